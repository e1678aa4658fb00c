"""Carbon nanotube structure helpers.

A tube is described by its roll-up index pair (n, m).  Diameter, chiral
angle, electronic behaviour, and the spacing of a parallel tube array all
follow from that pair in closed form.
"""

import math
from dataclasses import dataclass
from enum import Enum

A_CC_NM = 0.142  # C-C bond length in graphene, nm

_SQRT3 = math.sqrt(3.0)


class GeometryError(ValueError):
    """A geometric quantity would be undefined or unphysical."""


class ChiralityError(GeometryError):
    """The index pair does not describe a tube."""


class ElectronicClass(Enum):
    METALLIC = "Metallic"
    SMALL_BAND_GAP = "SmallBandGap"
    SEMICONDUCTING = "Semiconducting"


class StructureClass(Enum):
    ARMCHAIR = "Armchair"
    ZIGZAG = "Zigzag"
    CHIRAL = "Chiral"


@dataclass(frozen=True, order=True)
class Chirality:
    """Roll-up index pair, normalized to the canonical orientation n >= m >= 0.

    A reversed pair is swapped on construction; diameter and electronic
    class do not depend on the orientation.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ChiralityError(f"negative roll-up index ({self.n}, {self.m})")
        if self.n == 0 and self.m == 0:
            raise ChiralityError("(0, 0) does not define a tube")
        if self.m > self.n:
            n, m = self.m, self.n
            object.__setattr__(self, "n", n)
            object.__setattr__(self, "m", m)

    def __str__(self):
        return f"({self.n}, {self.m})"


def diameter(ch: Chirality, a_cc_nm: float = A_CC_NM) -> float:
    """Tube diameter in nm: roll-up circumference divided by pi."""
    if a_cc_nm <= 0:
        raise GeometryError(f"bond length must be positive, got {a_cc_nm}")
    radical = math.sqrt(ch.n * ch.n + ch.n * ch.m + ch.m * ch.m)
    return _SQRT3 * a_cc_nm / math.pi * radical


def chiral_angle(ch: Chirality) -> float:
    """Angle between roll-up vector and zigzag direction, degrees in [0, 30]."""
    if ch.m == 0:
        return 0.0
    if ch.n == ch.m:
        return 30.0
    return math.degrees(math.atan2(_SQRT3 * ch.m, 2 * ch.n + ch.m))


def classify_electronic(ch: Chirality) -> ElectronicClass:
    """Metallic for n = m, small band gap when n - m is a multiple of 3, else semiconducting."""
    if ch.n == ch.m:
        return ElectronicClass.METALLIC
    if (ch.n - ch.m) % 3 == 0:
        return ElectronicClass.SMALL_BAND_GAP
    return ElectronicClass.SEMICONDUCTING


def classify_structure(ch: Chirality) -> StructureClass:
    if ch.n == ch.m:
        return StructureClass.ARMCHAIR
    if ch.m == 0:
        return StructureClass.ZIGZAG
    return StructureClass.CHIRAL


def pitch(gate_width_nm: float, diameter_nm: float, tube_count: int) -> float:
    """Centre-to-centre spacing of `tube_count` parallel tubes under one gate."""
    if tube_count < 2:
        raise GeometryError(f"pitch needs at least two tubes, got {tube_count}")
    if gate_width_nm <= diameter_nm:
        raise GeometryError(
            f"gate width {gate_width_nm} nm does not fit a {diameter_nm} nm tube"
        )
    return (gate_width_nm - diameter_nm) / (tube_count - 1)


@dataclass(frozen=True)
class CntGeometry:
    """Derived structural quantities for one tube."""

    diameter_nm: float
    chiral_angle_deg: float
    circumference_nm: float
    electronic_class: ElectronicClass
    structure_class: StructureClass


def geometry(ch: Chirality, a_cc_nm: float = A_CC_NM) -> CntGeometry:
    d = diameter(ch, a_cc_nm)
    return CntGeometry(
        diameter_nm=d,
        chiral_angle_deg=chiral_angle(ch),
        circumference_nm=math.pi * d,
        electronic_class=classify_electronic(ch),
        structure_class=classify_structure(ch),
    )

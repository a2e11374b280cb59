"""Non-uniformity measures for a binary composite of two frame fields.

The symmetry type of each component decides which defect detects a
broken material isomorphism between the components:

  case 1  discrete vs discrete      B = Gamma1 - Gamma2      (third order)
  case 2  discrete vs isotropic     B = g1 - g2              (metric defect)
  case 3  discrete vs transverse    B = g1 - g2 and Bhat = grad_1 n
  case 4  isotropic vs isotropic    same defect as case 2
  case 5  transverse vs transverse  B = g1 - g2 and an angle defect delta

The composite is uniform in a direction only when every defect of its
case vanishes along it. The symmetry group of the composite at a point
is the intersection of the component groups.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import MissingDirectorError, NotAGroupError
from .fields import FrameField, VectorField, frame_jet
from .geometry import christoffel, covariant_derivative, metric
from .linalg3 import Mat3, Ten3, as_mat3, as_vec3, invert


class SymmetryCase(Enum):
    DISCRETE_DISCRETE = "discrete-discrete"
    DISCRETE_ISOTROPIC = "discrete-isotropic"
    DISCRETE_TRANSISO = "discrete-transiso"
    ISO_ISO = "iso-iso"
    TRANSISO_TRANSISO = "transiso-transiso"

    @classmethod
    def from_string(cls, text: str) -> "SymmetryCase":
        for case in cls:
            if case.value == text:
                return case
        raise ValueError(f"unknown symmetry case {text!r}")


_CASE_NUMBER = {
    SymmetryCase.DISCRETE_DISCRETE: 1,
    SymmetryCase.DISCRETE_ISOTROPIC: 2,
    SymmetryCase.DISCRETE_TRANSISO: 3,
    SymmetryCase.ISO_ISO: 4,
    SymmetryCase.TRANSISO_TRANSISO: 5,
}


@dataclass(frozen=True)
class CompositeSpec:
    """Two frame fields plus the symmetry data their case requires.

    director is the distinguished axis of the transverse component in
    case 3; director1/director2 are the per-component axes in case 5.
    """

    component1: FrameField
    component2: FrameField
    symmetry_case: SymmetryCase = SymmetryCase.DISCRETE_DISCRETE
    director: VectorField | None = None
    director1: VectorField | None = None
    director2: VectorField | None = None

    def __post_init__(self):
        case = self.symmetry_case
        if case is SymmetryCase.DISCRETE_TRANSISO and self.director is None:
            raise MissingDirectorError("case discrete-transiso requires a director")
        if case is SymmetryCase.TRANSISO_TRANSISO and (
            self.director1 is None or self.director2 is None
        ):
            raise MissingDirectorError("case transiso-transiso requires director1 and director2")

    @property
    def case_number(self) -> int:
        return _CASE_NUMBER[self.symmetry_case]


@dataclass(frozen=True)
class MeasureResult:
    case_number: int
    B: np.ndarray                 # Ten3 for case 1, Mat3 otherwise
    b_hat: Mat3 | None = None     # case 3 director gradient
    angle_defect: float | None = None  # case 5


def measure_case1(spec: CompositeSpec, point) -> Ten3:
    """Third-order defect B = Gamma1 - Gamma2 of the two material connections."""
    p = as_vec3(point)
    g1 = christoffel(spec.component1, p).gamma
    g2 = christoffel(spec.component2, p).gamma
    return g1 - g2


def measure_case1_covariant(spec: CompositeSpec, point) -> Ten3:
    """Same defect, computed covariantly: B^I_JK = -P1inv^a_J (P1^I_a;K).

    The semicolon derivative uses the connection of component 2:
    P1^I_a;K = P1^I_a,K + Gamma2^I_MK P1^M_a. Agreement with
    measure_case1 is an internal identity, kept as a dual route.
    """
    p = as_vec3(point)
    p1, dp1 = frame_jet(spec.component1, p)
    gamma2 = christoffel(spec.component2, p).gamma
    semi = dp1 + np.einsum("imk,ma->iak", gamma2, p1)
    return -np.einsum("aj,iak->ijk", invert(p1), semi)


def measure_case2(spec: CompositeSpec, point) -> Mat3:
    """Metric defect B = g1 - g2."""
    p = as_vec3(point)
    return metric(spec.component1, p).g - metric(spec.component2, p).g


def measure_case3(spec: CompositeSpec, point) -> tuple[Mat3, Mat3]:
    """Metric defect plus the covariant gradient of the director in component 1."""
    if spec.director is None:
        raise MissingDirectorError("case discrete-transiso requires a director")
    p = as_vec3(point)
    _require_nonzero(spec.director, p)
    b = measure_case2(spec, p)
    b_hat = covariant_derivative(spec.director, spec.component1, p)
    return b, b_hat


def measure_case5(spec: CompositeSpec, point) -> tuple[Mat3, float]:
    """Metric defect plus the director angle defect.

    delta = <n1, P1 P2^-1 n2> - <n1, n2> in the metric of component 1,
    with both directors normalized to unit metric length first. delta
    vanishes exactly when transporting the second director through the
    implants preserves its angle against the first.
    """
    if spec.director1 is None or spec.director2 is None:
        raise MissingDirectorError("case transiso-transiso requires director1 and director2")
    p = as_vec3(point)
    _require_nonzero(spec.director1, p)
    _require_nonzero(spec.director2, p)
    b = measure_case2(spec, p)
    g = metric(spec.component1, p).g
    n1 = _normalize(spec.director1.value(p), g)
    n2 = _normalize(spec.director2.value(p), g)
    p1, _ = frame_jet(spec.component1, p)
    p2, _ = frame_jet(spec.component2, p)
    transported = p1 @ invert(p2) @ n2
    delta = float(n1 @ g @ transported - n1 @ g @ n2)
    return b, delta


def evaluate_measure(spec: CompositeSpec, point) -> MeasureResult:
    """Dispatch on the symmetry case; case 4 reuses the case-2 defect."""
    case = spec.case_number
    if case == 1:
        return MeasureResult(1, measure_case1(spec, point))
    if case in (2, 4):
        return MeasureResult(case, measure_case2(spec, point))
    if case == 3:
        b, b_hat = measure_case3(spec, point)
        return MeasureResult(3, b, b_hat=b_hat)
    b, delta = measure_case5(spec, point)
    return MeasureResult(5, b, angle_defect=delta)


def _require_nonzero(director: VectorField, point) -> None:
    n = director.value(point)
    if float(np.linalg.norm(n)) == 0.0:
        raise MissingDirectorError(f"director vanishes at {as_vec3(point).tolist()}")


def _normalize(n, g) -> np.ndarray:
    length = float(np.sqrt(n @ g @ n))
    if length == 0.0:
        raise MissingDirectorError("director has zero metric length")
    return n / length


# ---------------------------------------------------------------------------
# Finite matrix groups
# ---------------------------------------------------------------------------


@dataclass
class FiniteMatrixGroup:
    """Finite set of invertible 3x3 matrices, validated as a group."""

    elements: list[np.ndarray]
    tolerance: float = 1e-9
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.elements = [as_mat3(m) for m in self.elements]
        if self.check:
            self.validate()

    def __len__(self):
        return len(self.elements)

    def contains(self, m: Mat3) -> bool:
        return any(np.max(np.abs(m - el)) <= self.tolerance for el in self.elements)

    def validate(self) -> None:
        if not self.contains(np.eye(3)):
            raise NotAGroupError("identity is missing")
        for a in self.elements:
            if not self.contains(invert(a)):
                raise NotAGroupError("set is not closed under inversion")
            for b in self.elements:
                if not self.contains(a @ b):
                    raise NotAGroupError("set is not closed under products")


def intersect_groups(
    group1: FiniteMatrixGroup, group2: FiniteMatrixGroup, tolerance: float = 1e-9
) -> FiniteMatrixGroup:
    """Symmetry group of the composite: elements of group1 matching group2 within tolerance."""
    group1.validate()
    group2.validate()
    picked: list[np.ndarray] = []
    for a in group1.elements:
        if any(np.max(np.abs(a - b)) <= tolerance for b in group2.elements):
            if not any(np.max(np.abs(a - c)) <= tolerance for c in picked):
                picked.append(a)
    return FiniteMatrixGroup(picked, tolerance)

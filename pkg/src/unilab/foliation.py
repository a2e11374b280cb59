"""Uniformity foliations of a discrete-discrete composite.

At each body point the directions v with B(X) v = 0 (B the third-order
case-1 defect) span the subspace along which the composite stays
uniform. Scanning the kernel dimension m over a domain classifies the
body:

    m = 0  totally non-uniform      m = 2  laminated (uniform sheets)
    m = 1  fibered (uniform curves) m = 3  uniform body

The kernel distribution is always involutive, so the sheets and curves
integrate to genuine foliations; involutivity_residual quantifies the
numerical size of B([v, w]) for caller-supplied in-kernel fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PreconditionViolatedError, ScanFailedError, UnilabError
from .fields import AnalyticVectorField, BodyDomain
from .linalg3 import Vec3, as_vec3, contract_ten3_vec, kernel_of_flattened
from .measures import CompositeSpec, SymmetryCase, measure_case1

DEFAULT_RANK_REL_TOL = 1e-8


class FoliationClass(Enum):
    TOTALLY_NON_UNIFORM = "TotallyNonUniform"
    FIBERED = "Fibered"
    LAMINATED = "Laminated"
    UNIFORM_BODY = "UniformBody"
    SINGULAR = "Singular"


_CLASS_BY_DIM = {
    0: FoliationClass.TOTALLY_NON_UNIFORM,
    1: FoliationClass.FIBERED,
    2: FoliationClass.LAMINATED,
    3: FoliationClass.UNIFORM_BODY,
}

# Fraction of nodes that must share one kernel dimension before the scan
# declares a constant-m class instead of Singular.
CONSTANT_M_FRACTION = 0.99

# Scans tolerate pointwise failures at up to this fraction of nodes.
MAX_FAILURE_FRACTION = 0.10


@dataclass(frozen=True)
class DistributionSample:
    point: Vec3
    m: int
    basis: np.ndarray          # (m, 3) orthonormal rows spanning the kernel
    sigma_min: float
    singular_values: np.ndarray


@dataclass(frozen=True)
class FoliationReport:
    samples: list[DistributionSample]
    foliation_class: FoliationClass
    involutivity_max_residual: float | None
    failures: list[tuple[list, str]]


def _require_case1(spec: CompositeSpec) -> None:
    if spec.symmetry_case is not SymmetryCase.DISCRETE_DISCRETE:
        raise UnilabError("foliation analysis requires a discrete-discrete composite")


def null_space_at(
    spec: CompositeSpec, point, rel_tol: float = DEFAULT_RANK_REL_TOL
) -> DistributionSample:
    """Kernel of the case-1 defect at one point."""
    _require_case1(spec)
    p = as_vec3(point)
    b = measure_case1(spec, p)
    kernel = kernel_of_flattened(b, rel_tol)
    return DistributionSample(
        p,
        kernel.dimension,
        kernel.basis,
        float(kernel.singular_values[-1]),
        kernel.singular_values,
    )


def scan_domain(
    spec: CompositeSpec,
    domain: BodyDomain,
    rel_tol: float = DEFAULT_RANK_REL_TOL,
    kernel_fields: tuple[AnalyticVectorField, AnalyticVectorField] | None = None,
) -> FoliationReport:
    """Kernel scan over the sampling lattice with the constant-m rule.

    When a pair of analytic in-kernel fields is supplied, the maximal
    involutivity residual over the lattice is recorded as well.
    """
    _require_case1(spec)
    samples: list[DistributionSample] = []
    failures: list[tuple[list, str]] = []
    max_residual: float | None = None
    for point in domain.lattice():
        try:
            sample = null_space_at(spec, point, rel_tol)
            if kernel_fields is not None:
                r = involutivity_residual(spec, kernel_fields[0], kernel_fields[1], point)
                max_residual = r if max_residual is None else max(max_residual, r)
        except UnilabError as exc:
            failures.append((point.tolist(), str(exc)))
            continue
        samples.append(sample)
    total = len(samples) + len(failures)
    if total == 0 or len(failures) > MAX_FAILURE_FRACTION * total:
        raise ScanFailedError(
            f"{len(failures)} of {total} lattice nodes failed during the foliation scan"
        )
    counts = np.bincount([s.m for s in samples], minlength=4)
    top = int(np.argmax(counts))
    if counts[top] >= CONSTANT_M_FRACTION * len(samples):
        foliation_class = _CLASS_BY_DIM[top]
    else:
        foliation_class = FoliationClass.SINGULAR
    return FoliationReport(samples, foliation_class, max_residual, failures)


def lie_bracket(vfield: AnalyticVectorField, wfield: AnalyticVectorField, point) -> Vec3:
    """[v, w]^K = v^L w^K,L - w^L v^K,L at the point."""
    p = as_vec3(point)
    v, dv = vfield.jet(p)
    w, dw = wfield.jet(p)
    return dw @ v - dv @ w


def involutivity_residual(
    spec: CompositeSpec,
    vfield: AnalyticVectorField,
    wfield: AnalyticVectorField,
    point,
) -> float:
    """Normalized size of B([v, w]) for two fields lying in the kernel of B.

    Returns max|B [v,w]| / (max|B| * max|[v,w]|), with 0/0 read as 0.
    Both input fields must be in the kernel at the point to a normalized
    1e-6, otherwise the residual would be meaningless.
    """
    _require_case1(spec)
    p = as_vec3(point)
    b = measure_case1(spec, p)
    b_scale = float(np.max(np.abs(b)))
    for label, fld in (("v", vfield), ("w", wfield)):
        vec = fld.value(p)
        scale = b_scale * float(np.max(np.abs(vec)))
        if scale > 0.0:
            residual = float(np.max(np.abs(contract_ten3_vec(b, vec))))
            if residual > 1e-6 * scale:
                raise PreconditionViolatedError(
                    f"field {label} is not in the kernel at {p.tolist()}"
                    f" (normalized residual {residual / scale:.3e})"
                )
    bracket = lie_bracket(vfield, wfield, p)
    denominator = b_scale * float(np.max(np.abs(bracket)))
    if denominator == 0.0:
        return 0.0
    return float(np.max(np.abs(contract_ten3_vec(b, bracket)))) / denominator


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def report_to_dict(report: FoliationReport) -> dict:
    counts = np.bincount([s.m for s in report.samples], minlength=4)
    return {
        "class": report.foliation_class.value,
        "n_samples": len(report.samples),
        "m_counts": {str(m): int(counts[m]) for m in range(4)},
        "involutivity_max_residual": report.involutivity_max_residual,
        "n_failures": len(report.failures),
        "nodes": [
            {
                "x": [float(c) for c in s.point],
                "m": s.m,
                "sigma_min": s.sigma_min,
            }
            for s in report.samples
        ],
    }


def report_to_csv(report: FoliationReport) -> str:
    """Per-node dump with columns x1,x2,x3,m,sigma_min."""
    lines = ["x1,x2,x3,m,sigma_min"]
    for s in report.samples:
        lines.append(
            "%.12e,%.12e,%.12e,%d,%.12e"
            % (s.point[0], s.point[1], s.point[2], s.m, s.sigma_min)
        )
    return "\n".join(lines) + "\n"

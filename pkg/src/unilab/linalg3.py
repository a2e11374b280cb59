"""Dense kernels for 3-vectors, 3x3 matrices, and 3x3x3 tensors.

Everything is a float64 numpy array. The inversion guard and the kernel
rank tolerance are explicit so that callers share one notion of "zero".
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonFiniteError, SingularMatrixError

Vec3 = np.ndarray
Mat3 = np.ndarray
Ten3 = np.ndarray

DEFAULT_KERNEL_REL_TOL = 1e-8


def _as_array(values, shape, label: str) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.shape != shape:
        raise ValueError(f"{label} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{label} has non-finite entries")
    return a


def as_vec3(values) -> Vec3:
    return _as_array(values, (3,), "vec3")


def as_mat3(values) -> Mat3:
    return _as_array(values, (3, 3), "mat3")


def as_ten3(values) -> Ten3:
    return _as_array(values, (3, 3, 3), "ten3")


def singular_tolerance(m: Mat3) -> float:
    """Scale-aware determinant guard: 1e-12 * (max absolute entry)**3."""
    return 1e-12 * float(np.max(np.abs(m))) ** 3


def invert(m: Mat3) -> Mat3:
    """Inverse of a 3x3 matrix, guarded by ``singular_tolerance``."""
    m = as_mat3(m)
    det = float(np.linalg.det(m))
    if abs(det) <= singular_tolerance(m):
        raise SingularMatrixError(f"determinant {det:.3e} below singularity guard")
    return np.linalg.inv(m)


def contract_ten3_vec(b: Ten3, v: Vec3) -> Mat3:
    """Contraction on the last slot: (B v)^I_J = B^I_JK v^K."""
    return np.einsum("ijk,k->ij", as_ten3(b), as_vec3(v))


class KernelResult(NamedTuple):
    dimension: int
    basis: np.ndarray            # (dimension, 3), orthonormal rows
    singular_values: np.ndarray  # (3,), descending


def kernel_of_flattened(b: Ten3, rel_tol: float = DEFAULT_KERNEL_REL_TOL) -> KernelResult:
    """Null space of v -> B v via the 9x3 flattening M[(3I+J), K] = B^I_JK.

    A singular value sigma counts as zero when sigma <= rel_tol * sigma_max.
    The zero tensor has sigma_max = 0 and full kernel; its basis is the
    standard basis.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    b = as_ten3(b)
    m = b.reshape(9, 3)
    _, sigma, vh = np.linalg.svd(m)
    sigma_max = float(sigma[0])
    if sigma_max == 0.0:
        dim = 3
    else:
        dim = int(np.count_nonzero(sigma <= rel_tol * sigma_max))
    basis = vh[3 - dim:].copy() if dim > 0 else np.zeros((0, 3))
    return KernelResult(dim, basis, sigma.copy())

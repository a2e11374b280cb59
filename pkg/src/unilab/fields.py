"""Frame and vector fields over a box-shaped body chart.

A frame field assigns an invertible 3x3 implant matrix P(X) to each body
point. Analytic variants hold one scalar expression per entry and
differentiate exactly; sampled variants hold per-node matrices on a
regular grid and differentiate with 2nd-order finite differences
(one-sided 2nd-order stencils at boundary nodes). Sampled fields are
node-based: evaluation snaps to the nearest grid node.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from . import expressions as ex
from .errors import NonFiniteError, OutOfDomainError, SingularFrameError
from .linalg3 import Mat3, Vec3, as_mat3, as_vec3, singular_tolerance


@dataclass(frozen=True)
class BodyDomain:
    """Axis-aligned box with a per-axis sampling resolution."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    resolution: tuple[int, int, int]

    def __post_init__(self):
        lo = as_vec3(self.lower)
        hi = as_vec3(self.upper)
        if not np.all(hi > lo):
            raise ValueError("domain upper corner must exceed lower corner on every axis")
        if any(int(r) < 2 for r in self.resolution):
            raise ValueError("resolution must be at least 2 nodes per axis")
        object.__setattr__(self, "lower", tuple(float(v) for v in lo))
        object.__setattr__(self, "upper", tuple(float(v) for v in hi))
        object.__setattr__(self, "resolution", tuple(int(r) for r in self.resolution))

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            np.linspace(self.lower[i], self.upper[i], self.resolution[i]) for i in range(3)
        )

    def lattice(self) -> np.ndarray:
        """All sampling nodes as an (N, 3) array in row-major axis order."""
        a1, a2, a3 = self.axes()
        g1, g2, g3 = np.meshgrid(a1, a2, a3, indexing="ij")
        return np.column_stack([g1.ravel(), g2.ravel(), g3.ravel()])

    def contains(self, point, margin: float = 0.0) -> bool:
        p = as_vec3(point)
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return bool(np.all(p >= lo) and np.all(p <= hi))


# ---------------------------------------------------------------------------
# Analytic fields
# ---------------------------------------------------------------------------


def _parse_grid(rows, shape) -> tuple:
    out = []
    for row in rows:
        out.append(tuple(ex.parse(cell) if isinstance(cell, str) else cell for cell in row))
    parsed = tuple(out)
    if len(parsed) != shape[0] or any(len(r) != shape[1] for r in parsed):
        raise ValueError(f"expected a {shape[0]}x{shape[1]} layout of entries")
    return parsed


@dataclass(frozen=True)
class AnalyticFrameField:
    """3x3 grid of scalar expressions; row index is the body leg, column the archetype leg."""

    entries: tuple[tuple[ex.ScalarExpr, ...], ...]

    @classmethod
    def from_strings(cls, rows) -> "AnalyticFrameField":
        return cls(_parse_grid(rows, (3, 3)))

    @classmethod
    def from_matrix(cls, m) -> "AnalyticFrameField":
        m = as_mat3(m)
        return cls(tuple(tuple(ex.Num(float(m[i, j])) for j in range(3)) for i in range(3)))

    @classmethod
    def identity(cls) -> "AnalyticFrameField":
        return cls.from_matrix(np.eye(3))

    @cached_property
    def _value_fns(self):
        return tuple(tuple(ex.compile_expr(e) for e in row) for row in self.entries)

    @cached_property
    def _deriv_fns(self):
        return tuple(
            tuple(tuple(ex.compile_expr(ex.diff(e, k)) for k in (1, 2, 3)) for e in row)
            for row in self.entries
        )

    @cached_property
    def inverse_entries(self) -> tuple[tuple[ex.ScalarExpr, ...], ...]:
        """Symbolic inverse via the adjugate over the determinant."""
        m = self.entries

        def minor(i, j):
            rows = [r for r in range(3) if r != i]
            cols = [c for c in range(3) if c != j]
            a, b = rows
            c, d = cols
            return ex.sub(ex.mul(m[a][c], m[b][d]), ex.mul(m[a][d], m[b][c]))

        det = ex.add(
            ex.sub(ex.mul(m[0][0], minor(0, 0)), ex.mul(m[0][1], minor(0, 1))),
            ex.mul(m[0][2], minor(0, 2)),
        )
        inv = []
        for i in range(3):
            row = []
            for j in range(3):
                cof = minor(j, i)  # transposed cofactor
                if (i + j) % 2 == 1:
                    cof = ex.neg(cof)
                row.append(ex.div(cof, det))
            inv.append(tuple(row))
        return tuple(inv)

    def value(self, point) -> Mat3:
        p = as_vec3(point)
        fns = self._value_fns
        out = np.array(
            [[ex.call_compiled(fns[i][j], p) for j in range(3)] for i in range(3)]
        )
        if abs(float(np.linalg.det(out))) <= singular_tolerance(out):
            raise SingularFrameError(f"frame is singular at {p.tolist()}")
        return out

    def jet(self, point) -> tuple[Mat3, np.ndarray]:
        """Return (P, dP) with dP[i, a, k] the derivative of P[i, a] along x<k+1>."""
        p = as_vec3(point)
        value = self.value(p)
        dfns = self._deriv_fns
        deriv = np.array(
            [
                [[ex.call_compiled(dfns[i][j][k], p) for k in range(3)] for j in range(3)]
                for i in range(3)
            ]
        )
        return value, deriv

    def right_multiplied(self, c: Mat3) -> "AnalyticFrameField":
        """Analytic field for X -> P(X) @ C with a constant matrix C."""
        c = as_mat3(c)
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                acc = ex.Num(0.0)
                for k in range(3):
                    acc = ex.add(acc, ex.mul(self.entries[i][k], ex.Num(float(c[k, j]))))
                row.append(acc)
            rows.append(tuple(row))
        return AnalyticFrameField(tuple(rows))


@dataclass(frozen=True)
class AnalyticVectorField:
    """Three scalar expressions, one per body component."""

    components: tuple[ex.ScalarExpr, ex.ScalarExpr, ex.ScalarExpr]

    @classmethod
    def from_strings(cls, items) -> "AnalyticVectorField":
        items = tuple(ex.parse(s) if isinstance(s, str) else s for s in items)
        if len(items) != 3:
            raise ValueError("a vector field needs exactly 3 components")
        return cls(items)

    @classmethod
    def constant(cls, v) -> "AnalyticVectorField":
        v = as_vec3(v)
        return cls(tuple(ex.Num(float(c)) for c in v))

    @cached_property
    def _value_fns(self):
        return tuple(ex.compile_expr(e) for e in self.components)

    @cached_property
    def _deriv_fns(self):
        return tuple(
            tuple(ex.compile_expr(ex.diff(e, k)) for k in (1, 2, 3)) for e in self.components
        )

    def value(self, point) -> Vec3:
        p = as_vec3(point)
        return np.array([ex.call_compiled(f, p) for f in self._value_fns])

    def jet(self, point) -> tuple[Vec3, np.ndarray]:
        """Return (n, dn) with dn[i, k] the derivative of n[i] along x<k+1>."""
        p = as_vec3(point)
        value = self.value(p)
        deriv = np.array(
            [[ex.call_compiled(self._deriv_fns[i][k], p) for k in range(3)] for i in range(3)]
        )
        return value, deriv


# ---------------------------------------------------------------------------
# Sampled fields
# ---------------------------------------------------------------------------


def _grid_index(lower, spacing, shape, point) -> tuple[int, int, int]:
    p = as_vec3(point)
    idx = []
    for axis in range(3):
        i = int(round((p[axis] - lower[axis]) / spacing[axis]))
        if i < 0 or i >= shape[axis]:
            raise OutOfDomainError(
                f"point {p.tolist()} is outside the sampling grid on axis {axis + 1}"
            )
        idx.append(i)
    return tuple(idx)


def _grid_derivative(values: np.ndarray, idx, axis: int, spacing: float) -> np.ndarray:
    """2nd-order derivative of a gridded field along one axis at a node."""
    n = values.shape[axis]
    i, j, k = idx

    def at(offset):
        probe = [i, j, k]
        probe[axis] += offset
        return values[tuple(probe)]

    pos = idx[axis]
    if 0 < pos < n - 1:
        return (at(1) - at(-1)) / (2.0 * spacing)
    if pos == 0:
        return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * spacing)
    return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * spacing)


class _SampledField:
    """Regular-grid samples of an array-valued field, node-based access."""

    def __init__(self, lower, spacing, values: np.ndarray, tail_shape: tuple):
        self.lower = tuple(float(v) for v in as_vec3(lower))
        self.spacing = tuple(float(v) for v in as_vec3(spacing))
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 + len(tail_shape) or values.shape[3:] != tail_shape:
            raise ValueError(f"values must have shape (n1, n2, n3){tail_shape}")
        if any(s < 3 for s in values.shape[:3]):
            raise ValueError("sampling grid needs at least 3 nodes per axis")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError("grid samples must be finite")
        self.values = values
        self.shape = values.shape[:3]

    def node_value(self, point) -> np.ndarray:
        return self.values[_grid_index(self.lower, self.spacing, self.shape, point)]

    def node_jet(self, point) -> tuple[np.ndarray, np.ndarray]:
        idx = _grid_index(self.lower, self.spacing, self.shape, point)
        value = self.values[idx]
        deriv = np.stack(
            [
                _grid_derivative(self.values, idx, axis, self.spacing[axis])
                for axis in range(3)
            ],
            axis=-1,
        )
        return value, deriv


class SampledFrameField:
    """Per-node implant matrices on a regular grid."""

    def __init__(self, lower, spacing, values):
        self._grid = _SampledField(lower, spacing, values, (3, 3))

    @property
    def lower(self):
        return self._grid.lower

    @property
    def spacing(self):
        return self._grid.spacing

    @property
    def shape(self):
        return self._grid.shape

    @property
    def values(self):
        return self._grid.values

    @classmethod
    def from_function(cls, fn, domain: BodyDomain) -> "SampledFrameField":
        a1, a2, a3 = domain.axes()
        values = np.empty((len(a1), len(a2), len(a3), 3, 3))
        for i, x1 in enumerate(a1):
            for j, x2 in enumerate(a2):
                for k, x3 in enumerate(a3):
                    values[i, j, k] = fn(np.array([x1, x2, x3]))
        spacing = [(domain.upper[i] - domain.lower[i]) / (domain.resolution[i] - 1) for i in range(3)]
        return cls(domain.lower, spacing, values)

    @classmethod
    def from_npz(cls, path) -> "SampledFrameField":
        data = np.load(path)
        return cls(data["lower"], data["spacing"], data["values"])

    def to_npz(self, path) -> None:
        np.savez(
            path,
            lower=np.asarray(self.lower),
            spacing=np.asarray(self.spacing),
            values=self.values,
        )

    def value(self, point) -> Mat3:
        out = self._grid.node_value(point)
        if abs(float(np.linalg.det(out))) <= singular_tolerance(out):
            raise SingularFrameError(f"frame is singular at {as_vec3(point).tolist()}")
        return out.copy()

    def jet(self, point) -> tuple[Mat3, np.ndarray]:
        value, deriv = self._grid.node_jet(point)
        if abs(float(np.linalg.det(value))) <= singular_tolerance(value):
            raise SingularFrameError(f"frame is singular at {as_vec3(point).tolist()}")
        return value.copy(), deriv

    @cached_property
    def inverse_field(self) -> "SampledFrameField":
        """Grid of pointwise inverses, for the inverse-derivative route."""
        inv = np.linalg.inv(self.values.reshape(-1, 3, 3)).reshape(self.values.shape)
        return SampledFrameField(self.lower, self.spacing, inv)


class SampledVectorField:
    """Per-node 3-vectors on a regular grid."""

    def __init__(self, lower, spacing, values):
        self._grid = _SampledField(lower, spacing, values, (3,))

    @classmethod
    def from_function(cls, fn, domain: BodyDomain) -> "SampledVectorField":
        a1, a2, a3 = domain.axes()
        values = np.empty((len(a1), len(a2), len(a3), 3))
        for i, x1 in enumerate(a1):
            for j, x2 in enumerate(a2):
                for k, x3 in enumerate(a3):
                    values[i, j, k] = fn(np.array([x1, x2, x3]))
        spacing = [(domain.upper[i] - domain.lower[i]) / (domain.resolution[i] - 1) for i in range(3)]
        return cls(domain.lower, spacing, values)

    def value(self, point) -> Vec3:
        return self._grid.node_value(point).copy()

    def jet(self, point) -> tuple[Vec3, np.ndarray]:
        value, deriv = self._grid.node_jet(point)
        return value.copy(), deriv


FrameField = Union[AnalyticFrameField, SampledFrameField]
VectorField = Union[AnalyticVectorField, SampledVectorField]


def frame_jet(field: FrameField, point) -> tuple[Mat3, np.ndarray]:
    """Value and first derivatives of a frame field at a point."""
    return field.jet(point)

"""Differential geometry of a single frame field.

A frame field P induces a distant parallelism. Its material connection
has Christoffel symbols

    Gamma^I_JK = -P^I_alpha,K * Pinv^alpha_J = P^I_alpha * Pinv^alpha_J,K

where Pinv is the pointwise inverse of P (archetype index up). The two
published forms are tied by the product rule on P Pinv = Id; the library
computes the first (frame-derivative) contraction and exposes the
inverse-derivative contraction as an independent cross-check. The
connection is flat (zero curvature) but in general has torsion. The
induced metric is g = (P P^T)^-1, equivalently g_IJ = Pinv^a_I Pinv^a_J.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expressions as ex
from .fields import AnalyticFrameField, FrameField, SampledFrameField, VectorField, frame_jet
from .linalg3 import Mat3, Ten3, Vec3, as_vec3, invert


@dataclass(frozen=True)
class ConnectionValue:
    gamma: Ten3            # gamma[i, j, k] = Gamma^I_JK
    point: Vec3


@dataclass(frozen=True)
class TorsionValue:
    tau: Ten3              # tau[i, j, k] = Gamma^I_JK - Gamma^I_KJ
    point: Vec3


@dataclass(frozen=True)
class MetricValue:
    g: Mat3                # symmetric positive definite
    point: Vec3


def christoffel(field: FrameField, point) -> ConnectionValue:
    """Christoffel symbols Gamma^I_JK = -P^I_a,K Pinv^a_J of the material connection."""
    p = as_vec3(point)
    value, deriv = frame_jet(field, p)
    pinv = invert(value)
    gamma = -np.einsum("iak,aj->ijk", deriv, pinv)
    return ConnectionValue(gamma, p)


def christoffel_first_form(field: FrameField, point) -> Ten3:
    """Cross-check route Gamma^I_JK = P^I_a Pinv^a_J,K.

    The inverse components are differentiated directly: symbolically via
    the adjugate for analytic fields, by grid stencils on the pointwise
    inverse for sampled fields. Up to round-off this must agree with
    christoffel().
    """
    p = as_vec3(point)
    if isinstance(field, AnalyticFrameField):
        value = field.value(p)
        inv_entries = field.inverse_entries
        dinv = np.array(
            [
                [[ex.evaluate(ex.diff(inv_entries[a][j], k), p) for k in (1, 2, 3)] for j in range(3)]
                for a in range(3)
            ]
        )
    elif isinstance(field, SampledFrameField):
        value = field.value(p)
        _, dinv = field.inverse_field.jet(p)
    else:
        raise TypeError(f"not a frame field: {field!r}")
    return np.einsum("ia,ajk->ijk", value, dinv)


def torsion(connection: ConnectionValue) -> TorsionValue:
    """Torsion of the material connection; exactly antisymmetric in the lower slots."""
    gamma = connection.gamma
    return TorsionValue(gamma - gamma.transpose(0, 2, 1), connection.point)


def metric(field: FrameField, point) -> MetricValue:
    """Material metric g = (P P^T)^-1, symmetrized against round-off."""
    p = as_vec3(point)
    value, _ = frame_jet(field, p)
    pinv = invert(value)
    g = pinv.T @ pinv
    return MetricValue(0.5 * (g + g.T), p)


def covariant_derivative(director: VectorField, field: FrameField, point) -> Mat3:
    """(grad n)^I_K = n^I,K + Gamma^I_MK n^M with the connection of the given frame."""
    p = as_vec3(point)
    n, dn = director.jet(p)
    gamma = christoffel(field, p).gamma
    return dn + np.einsum("imk,m->ik", gamma, n)


def curvature_residual(field: FrameField, point, h: float) -> float:
    """Max-entry curvature of the material connection, via central differences.

    R^I_JKL = Gamma^I_JL,K - Gamma^I_JK,L
            + Gamma^I_MK Gamma^M_JL - Gamma^I_ML Gamma^M_JK

    Distant parallelism is flat, so this is a pure discretization
    residual: it decays at 2nd order in h for smooth analytic fields and
    is exactly zero for a constant frame.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    p = as_vec3(point)
    gamma = christoffel(field, p).gamma
    dgamma = np.empty((3, 3, 3, 3))  # dgamma[i, j, k, l] = d Gamma^I_JK / d x<l+1>
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        plus = christoffel(field, p + step).gamma
        minus = christoffel(field, p - step).gamma
        dgamma[:, :, :, axis] = (plus - minus) / (2.0 * h)
    quad = np.einsum("imk,mjl->ijkl", gamma, gamma)
    riemann = (
        dgamma.transpose(0, 1, 3, 2)  # Gamma^I_JL,K
        - dgamma                      # Gamma^I_JK,L
        + quad
        - quad.transpose(0, 1, 3, 2)
    )
    return float(np.max(np.abs(riemann)))

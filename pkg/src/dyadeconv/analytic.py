"""Closed-form characteristic functions, derivatives, and triple-CF slices.

Ground truth for tests and a noise-free input mode for the identification
pipeline.  The slice compositions follow from joint independence of the
seven latent draws: the CF of the observed triple factors into the
component CFs, so the three one-dimensional slices and the two
first-argument partial-derivative slices used downstream are plain
products.

The shifted-exponential law is included deliberately as an asymmetric law
(complex-valued CF) so nothing downstream may assume real CFs; its CF has
no real zeros.  The uniform and two-point laws supply the zero-crossing
stress cases, and both satisfy the requirement that their CF and its
derivative never vanish together (for uniform_symmetric(a) the zeros are
k*pi/a where the derivative is cos(k*pi)/s != 0; for two_point the zeros
of cos(a s) are where sin(a s) = +-1).  Laws with non-isolated CF zeros
are not representable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ComplexCurve, ComponentDist, FreqGrid, ModelConfig


def _cf_values(dist: ComponentDist, s: np.ndarray) -> np.ndarray:
    """Characteristic function of ``dist`` evaluated at frequencies ``s``."""
    a = dist.scale
    kind = dist.kind
    if kind == "normal":
        return np.exp(-0.5 * (a * s) ** 2).astype(np.complex128)
    if kind == "laplace":
        return (1.0 / (1.0 + (a * s) ** 2)).astype(np.complex128)
    if kind == "uniform_symmetric":
        # sin(a s)/(a s) with the removable value 1 at s = 0
        return np.sinc(a * s / np.pi).astype(np.complex128)
    if kind == "two_point_symmetric":
        return np.cos(a * s).astype(np.complex128)
    if kind == "shifted_exponential":
        return np.exp(-1j * a * s) / (1.0 - 1j * a * s)
    if dist.is_degenerate:
        return np.ones_like(s, dtype=np.complex128)
    raise ValueError(f"unknown kind {kind!r}")  # pragma: no cover


def _cf_deriv_values(dist: ComponentDist, s: np.ndarray) -> np.ndarray:
    """First derivative of the CF of ``dist`` at frequencies ``s``.

    All laws have zero mean, so the derivative is 0 at s = 0.
    """
    a = dist.scale
    kind = dist.kind
    if kind == "normal":
        return (-(a * a) * s * np.exp(-0.5 * (a * s) ** 2)).astype(np.complex128)
    if kind == "laplace":
        return (-2.0 * a * a * s / (1.0 + (a * s) ** 2) ** 2).astype(np.complex128)
    if kind == "uniform_symmetric":
        # d/ds sin(as)/(as) = cos(as)/s - sin(as)/(a s^2); odd, 0 at s=0
        out = np.zeros_like(s, dtype=np.complex128)
        nz = s != 0.0
        sn = s[nz]
        out[nz] = np.cos(a * sn) / sn - np.sin(a * sn) / (a * sn * sn)
        return out
    if kind == "two_point_symmetric":
        return (-a * np.sin(a * s)).astype(np.complex128)
    if kind == "shifted_exponential":
        return -(a * a) * s * np.exp(-1j * a * s) / (1.0 - 1j * a * s) ** 2
    if dist.is_degenerate:
        return np.zeros_like(s, dtype=np.complex128)
    raise ValueError(f"unknown kind {kind!r}")  # pragma: no cover


def analytic_cf(dist: ComponentDist, grid: FreqGrid) -> ComplexCurve:
    """Exact CF of a component law sampled on a grid."""
    return ComplexCurve(grid, _cf_values(dist, grid.values), is_cf=True)


def analytic_cf_deriv(dist: ComponentDist, grid: FreqGrid) -> ComplexCurve:
    """Exact first derivative of the CF, sampled on a grid (derivative-flagged)."""
    return ComplexCurve(grid, _cf_deriv_values(dist, grid.values), is_cf=False)


def analytic_density(dist: ComponentDist, x: np.ndarray) -> np.ndarray:
    """Exact density of a component law on points ``x``.

    Raises for the two-point law, which has no density.
    """
    a = dist.scale
    kind = dist.kind
    x = np.asarray(x, dtype=np.float64)
    if kind == "normal":
        return np.exp(-0.5 * (x / a) ** 2) / (a * np.sqrt(2.0 * np.pi))
    if kind == "laplace":
        return np.exp(-np.abs(x) / a) / (2.0 * a)
    if kind == "uniform_symmetric":
        return np.where(np.abs(x) <= a, 1.0 / (2.0 * a), 0.0)
    if kind == "shifted_exponential":
        return np.where(x >= -a, np.exp(-np.clip(x + a, 0.0, None) / a) / a, 0.0)
    raise ValueError(f"law {kind!r} has no density")


@dataclass(frozen=True)
class PhiYSlices:
    """The five slices of the triple CF used by the identification stages.

    With the triple Y = (y_ij, y_kj, y_il) and c = 0 (centering removes it):

    ================ ====================================================
    curve_00r        phi_Y(0,0,r)      = phi_alpha(r) phi_eta(r) phi_eps(r)
    curve_0t0        phi_Y(0,t,0)      = phi_alpha(t) phi_eta(t) phi_eps(t)
    curve_s00        phi_Y(s,0,0)      = phi_alpha(s) phi_eta(s) phi_eps(s)
    dcurve_00r       d/ds phi_Y(0,0,r) = phi_eta(r) phi_eps(r) phi_alpha'(r)
    dcurve_0t0       d/ds phi_Y(0,t,0) = phi_alpha(t) phi_eps(t) phi_eta'(t)
    ================ ====================================================

    The derivative slices isolate the factor shared between the two dyads
    of each pair: differentiating in the first argument brings down the
    derivative of the CF of the latent variable common to y_ij and the
    anchor column (alpha for the (i,l) pair, eta for the (k,j) pair); the
    other derivative terms vanish at 0 because all means are zero.
    """

    curve_00r: ComplexCurve
    curve_0t0: ComplexCurve
    curve_s00: ComplexCurve
    dcurve_00r: ComplexCurve
    dcurve_0t0: ComplexCurve


def compose_phi_Y_slices(config: ModelConfig, grid: FreqGrid) -> PhiYSlices:
    """Exact slices of the triple CF for a model configuration."""
    s = grid.values
    cf_a = _cf_values(config.dist_alpha, s)
    cf_e = _cf_values(config.dist_eta, s)
    cf_x = _cf_values(config.dist_eps, s)
    d_a = _cf_deriv_values(config.dist_alpha, s)
    d_e = _cf_deriv_values(config.dist_eta, s)

    marginal = cf_a * cf_e * cf_x
    return PhiYSlices(
        curve_00r=ComplexCurve(grid, marginal, is_cf=True),
        curve_0t0=ComplexCurve(grid, marginal, is_cf=True),
        curve_s00=ComplexCurve(grid, marginal, is_cf=True),
        dcurve_00r=ComplexCurve(grid, cf_e * cf_x * d_a, is_cf=False),
        dcurve_0t0=ComplexCurve(grid, cf_a * cf_x * d_e, is_cf=False),
    )

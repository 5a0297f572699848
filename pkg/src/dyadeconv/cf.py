"""Empirical characteristic functions and log-derivative ratio curves.

The two estimators are raw sample averages (no smoothing or tapering):

    ecf(x)(s)                 = mean_m exp(i s x_m)
    ecf_partial_first(y, x)(r) = mean_m i y_m exp(i r x_m)

The second is the exact sample analogue of the first-argument partial
derivative of the triple CF evaluated on an anchor axis; using the moment
form instead of finite-differencing the ECF is unbiased and needs no step
size.  Columns should be centered (their population means equal the
intercept c) before estimation; see :func:`center`.

Evaluation walks the uniform frequency lattice with a per-sample phase
recurrence (one complex exp per sample, multiplies per grid step), and
fills the negative half axis by the exact symmetry of the estimator:
ecf(-s) = conj(ecf(s)) and the derivative analogue d(-s) = -conj(d(s)).
Grid points are independent, so evaluation parallelizes trivially over s;
inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .model import ComplexCurve, FreqGrid

if TYPE_CHECKING:  # pragma: no cover
    from .identify import ZeroSet


def center(column) -> np.ndarray:
    """Subtract the sample mean (removes the intercept c up to noise)."""
    x = np.asarray(column, dtype=np.float64)
    if x.size == 0:
        raise ValueError("column must be nonempty")
    return x - x.mean()


def _half_means(x: np.ndarray, weights: np.ndarray | None, n_half: int, h: float) -> np.ndarray:
    """mean(w * exp(i k h x)) for k = 0..n_half-1 via phase recurrence."""
    step = np.exp(1j * h * x)
    cur = np.ones_like(step)
    out = np.empty(n_half, dtype=np.complex128)
    for k in range(n_half):
        out[k] = np.mean(cur) if weights is None else np.mean(weights * cur)
        cur = cur * step
    return out


def _mirror(pos: np.ndarray, odd: bool) -> np.ndarray:
    """Assemble the full grid from the s >= 0 half using Hermitian symmetry."""
    neg = np.conj(pos[1:])[::-1]
    if odd:
        neg = -neg
    return np.concatenate([neg, pos])


def ecf(column, grid: FreqGrid) -> ComplexCurve:
    """Empirical characteristic function of a data column on a grid.

    Parameters
    ----------
    column : array_like
        Nonempty sample; center beforehand if intercept removal is wanted.
    grid : FreqGrid
        Evaluation frequencies.

    Returns
    -------
    ComplexCurve
        Tagged as a CF; satisfies value(0) = 1 and Hermitian symmetry
        exactly by construction.
    """
    x = np.asarray(column, dtype=np.float64)
    if x.size == 0:
        raise ValueError("column must be nonempty")
    pos = _half_means(x, None, grid.zero_index + 1, grid.spacing)
    pos[0] = 1.0 + 0.0j  # mean of exp(0) exactly
    return ComplexCurve(grid, _mirror(pos, odd=False), is_cf=True)


def ecf_partial_first(y_first, y_anchor, grid: FreqGrid) -> ComplexCurve:
    """Sample analogue of the first-argument CF derivative along an anchor.

    value(r) = mean_m i*y_first_m*exp(i r y_anchor_m), the estimator of
    E[i y_ij exp(i r y_anchor)].  Columns must be paired per replicate.
    The result is derivative-flagged (exempt from CF invariants).
    """
    yf = np.asarray(y_first, dtype=np.float64)
    ya = np.asarray(y_anchor, dtype=np.float64)
    if yf.size == 0:
        raise ValueError("columns must be nonempty")
    if yf.shape != ya.shape:
        raise ValueError(f"length mismatch: {yf.shape} vs {ya.shape}")
    pos = 1j * _half_means(ya, yf, grid.zero_index + 1, grid.spacing)
    return ComplexCurve(grid, _mirror(pos, odd=True), is_cf=False)


def ecf_pair(y_first, y_anchor, grid: FreqGrid) -> tuple[ComplexCurve, ComplexCurve]:
    """ecf(y_anchor) and ecf_partial_first(y_first, y_anchor) in one pass.

    Shares the phase recurrence between the two estimators; used by the
    identification pipeline where both curves are needed on one grid.
    """
    yf = np.asarray(y_first, dtype=np.float64)
    ya = np.asarray(y_anchor, dtype=np.float64)
    if yf.size == 0:
        raise ValueError("columns must be nonempty")
    if yf.shape != ya.shape:
        raise ValueError(f"length mismatch: {yf.shape} vs {ya.shape}")
    n_half = grid.zero_index + 1
    step = np.exp(1j * grid.spacing * ya)
    cur = np.ones_like(step)
    den_pos = np.empty(n_half, dtype=np.complex128)
    num_pos = np.empty(n_half, dtype=np.complex128)
    for k in range(n_half):
        den_pos[k] = np.mean(cur)
        num_pos[k] = 1j * np.mean(yf * cur)
        cur = cur * step
    den_pos[0] = 1.0 + 0.0j
    den = ComplexCurve(grid, _mirror(den_pos, odd=False), is_cf=True)
    num = ComplexCurve(grid, _mirror(num_pos, odd=True), is_cf=False)
    return den, num


@dataclass(frozen=True)
class PsiCurve:
    """Ratio of the derivative slice to the CF slice, with masked zeros.

    Off the mask the values equal num/den pointwise; on the mask (grid
    points flagged as denominator zeros) the value is exactly 0, matching
    the convention that the ratio is defined as 0 on the zero set.  Values
    are finite everywhere by construction.
    """

    grid: FreqGrid
    values: np.ndarray
    zero_mask: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        mask = np.asarray(self.zero_mask, dtype=bool)
        if vals.shape != (self.grid.n_points,) or mask.shape != vals.shape:
            raise ValueError("values and zero_mask must match the grid length")
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise ValueError("psi values must be finite everywhere")
        if np.any(vals[mask] != 0):
            raise ValueError("masked psi values must be exactly 0")
        vals = vals.copy()
        vals.flags.writeable = False
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "zero_mask", mask)

    def clean_values(self) -> np.ndarray:
        """Values with masked points replaced by linear interpolation.

        Lets downstream quadrature treat masked points uniformly; at a
        removable zero the interpolant is the natural continuation, at a
        singular zero the surrounding points are excised by the caller
        anyway.
        """
        if not np.any(self.zero_mask):
            return np.array(self.values)
        good = ~self.zero_mask
        if good.sum() < 2:
            raise ValueError("cannot interpolate: fewer than 2 unmasked points")
        s = self.grid.values
        out = np.array(self.values)
        re = np.interp(s[self.zero_mask], s[good], self.values[good].real)
        im = np.interp(s[self.zero_mask], s[good], self.values[good].imag)
        out[self.zero_mask] = re + 1j * im
        return out


def psi_from_curves(num: ComplexCurve, den: ComplexCurve, zeros: "ZeroSet") -> PsiCurve:
    """Pointwise ratio num/den with denominator zeros masked to 0.

    ``zeros`` must have been detected on ``den``; its nearest grid points
    form the mask.  Any point where the ratio is non-finite (an exactly
    zero denominator) is masked as well.
    """
    if num.grid != den.grid:
        raise ValueError("numerator and denominator must share a grid")
    n = num.grid.n_points
    mask = np.zeros(n, dtype=bool)
    idx = np.asarray(zeros.grid_indices, dtype=int)
    if idx.size:
        mask[idx] = True
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.where(mask, 0.0 + 0.0j, num.values / den.values)
    bad = ~np.isfinite(vals.view(np.float64)).reshape(n, 2).all(axis=1)
    if np.any(bad):
        mask |= bad
        vals = np.where(mask, 0.0 + 0.0j, vals)
    return PsiCurve(num.grid, vals, mask)

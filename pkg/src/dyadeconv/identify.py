"""Recovery of component CFs from ratio curves with isolated zeros.

The pipeline estimates the ratio psi = (derivative slice) / (CF slice),
which equals the logarithmic derivative of the target component CF off
the denominator's zero set.  The target CF is then rebuilt as a product
of exponentiated integrals of psi taken between zeros, with symmetric
delta-neighborhoods excised around the singular zeros and the limit
delta -> 0 realized by a decreasing schedule:

    phi(s) = lim_{d->0} (-1)^K  prod_{0<k<=K} exp( int_{z(k-1)+d}^{z(k)-d} psi )
                              * exp( int_{z(K)+d}^{s} psi ),     K = #{z <= s}

Exponentiating integrals of psi sidesteps any branch tracking of the
complex logarithm.  The (-1)^K factor is the exact cross-zero limit: at a
simple zero z the mean value theorem gives

    phi(z-d)/phi(z+d) = -phi'(xi1)/phi'(xi2) -> -1,

so the target CF changes sign across every singular zero while the
excised product alone converges to its modulus-continuation; the sign
factor restores the true (possibly negative or complex) continuation.
One value per crossing is all that is needed because zeros of the
denominator at which the numerator also vanishes (removable zeros) leave
psi bounded and require no excision at all.

Zeros are detected as deep strict local minima of the denominator
modulus, refined by quadratic interpolation, and classified singular or
removable by comparing |psi| next to the zero against the surrounding
level.  The origin is never a zero (the CF equals 1 there), so no
delta-offset is applied at 0 and the base segment integral is exact.

Stage outputs on the negative half-axis use Hermitian symmetry
phi(-s) = conj(phi(s)), exact for CFs of real random variables; the
mirrored product formula for the negative axis is available behind
``negative_axis="product"`` and agrees with the symmetry fill to
quadrature accuracy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .analytic import compose_phi_Y_slices
from .cf import PsiCurve, center, ecf, ecf_pair, psi_from_curves
from .model import (
    ComplexCurve,
    FreqGrid,
    ModelConfig,
    SampleSet,
    hermitian_symmetrize,
    validate_cf_curve,
)


class IdentificationError(RuntimeError):
    """A stage of the identification pipeline failed."""


class ZeroIsolationError(IdentificationError):
    """Detected zeros violate the isolation requirement; refine the grid."""


class GridTooCoarseError(IdentificationError):
    """The grid cannot resolve the structure around a zero."""


# --------------------------------------------------------------------------
# zero sets and schedules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSet:
    """Refined locations of isolated zeros of a curve's modulus.

    ``points`` are strictly increasing with pairwise gaps above twice the
    grid spacing (isolation); ``grid_indices`` and ``moduli`` record the
    nearest grid point and the modulus seen at detection.
    """

    points: np.ndarray
    grid_indices: np.ndarray
    moduli: np.ndarray
    spacing: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        idx = np.asarray(self.grid_indices, dtype=np.intp)
        mod = np.asarray(self.moduli, dtype=np.float64)
        if not (pts.shape == idx.shape == mod.shape) or pts.ndim != 1:
            raise ValueError("points, grid_indices, moduli must be 1-d and aligned")
        if pts.size > 1:
            gaps = np.diff(pts)
            if np.any(gaps <= 0):
                raise ValueError("zero locations must be strictly increasing")
            if np.any(gaps <= 2.0 * self.spacing):
                raise ZeroIsolationError(
                    "two zeros closer than 2 grid spacings "
                    f"(min gap {gaps.min():.4g}, spacing {self.spacing:.4g}); "
                    "refine the grid"
                )
        for name, arr in (("points", pts), ("grid_indices", idx), ("moduli", mod)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls, spacing: float) -> "ZeroSet":
        return cls(np.empty(0), np.empty(0, dtype=np.intp), np.empty(0), spacing)

    def __len__(self) -> int:
        return self.points.size

    def union(self, other: "ZeroSet") -> "ZeroSet":
        """Merge two zero sets detected on grids of equal spacing.

        Points within one spacing of each other are treated as the same
        zero; the representative with the smaller detection modulus wins.
        """
        if abs(self.spacing - other.spacing) > 1e-12 * self.spacing:
            raise ValueError("can only union zero sets with equal grid spacing")
        pts = np.concatenate([self.points, other.points])
        idx = np.concatenate([self.grid_indices, other.grid_indices])
        mod = np.concatenate([self.moduli, other.moduli])
        order = np.argsort(pts)
        pts, idx, mod = pts[order], idx[order], mod[order]
        keep_p, keep_i, keep_m = [], [], []
        for p, i, m in zip(pts, idx, mod):
            if keep_p and p - keep_p[-1] <= self.spacing:
                if m < keep_m[-1]:
                    keep_p[-1], keep_i[-1], keep_m[-1] = p, i, m
            else:
                keep_p.append(p)
                keep_i.append(i)
                keep_m.append(m)
        return ZeroSet(np.array(keep_p), np.array(keep_i, dtype=np.intp),
                       np.array(keep_m), self.spacing)


@dataclass(frozen=True)
class SingularSet:
    """Ordered singular points (zeros where |psi| blows up).

    The positive elements are ascending, the negative elements ascending
    as well (towards 0); the origin is implicitly the 0-th point of each
    enumeration and is never singular since the CF equals 1 there.
    """

    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positive, dtype=np.float64)
        neg = np.asarray(self.negative, dtype=np.float64)
        if np.any(pos <= 0) or np.any(neg >= 0):
            raise ValueError("singular points must be nonzero and sign-sorted")
        if (pos.size > 1 and np.any(np.diff(pos) <= 0)) or (
            neg.size > 1 and np.any(np.diff(neg) <= 0)
        ):
            raise ValueError("singular points must be strictly increasing")
        for name, arr in (("positive", pos), ("negative", neg)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls) -> "SingularSet":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def from_points(cls, points) -> "SingularSet":
        pts = np.sort(np.asarray(points, dtype=np.float64))
        return cls(pts[pts > 0], pts[pts < 0])

    @property
    def is_empty(self) -> bool:
        return self.positive.size == 0 and self.negative.size == 0

    @property
    def all_points(self) -> np.ndarray:
        return np.concatenate([self.negative, self.positive])

    def crossings_upto(self, s: float) -> int:
        """Number of positive singular points <= s (the index K above)."""
        if s < 0:
            raise ValueError("crossings_upto expects s >= 0")
        return int(np.searchsorted(self.positive, s, side="right"))


@dataclass(frozen=True)
class DeltaSchedule:
    """Decreasing excision half-widths realizing the delta -> 0 limit.

    ``extrapolation`` selects how the per-delta values at a point are
    combined: "last_value" takes the smallest delta, "richardson"
    extrapolates linearly in delta from the two smallest.
    """

    deltas: tuple
    extrapolation: str = "last_value"

    def __post_init__(self):
        ds = tuple(float(d) for d in self.deltas)
        if not ds or any(d <= 0 for d in ds):
            raise ValueError("deltas must be positive")
        if any(b >= a for a, b in zip(ds, ds[1:])) is True:
            raise ValueError("deltas must be strictly decreasing")
        if self.extrapolation not in ("last_value", "richardson"):
            raise ValueError(f"unknown extrapolation {self.extrapolation!r}")
        object.__setattr__(self, "deltas", ds)

    @classmethod
    def geometric(cls, base: float = 0.2, ratio: float = 0.5, levels: int = 8,
                  scale: float = 1.0, extrapolation: str = "last_value") -> "DeltaSchedule":
        """Geometric schedule base*scale*ratio^k, k = 0..levels-1."""
        if not (0 < ratio < 1) or levels < 1:
            raise ValueError("need 0 < ratio < 1 and levels >= 1")
        return cls(tuple(base * scale * ratio**k for k in range(levels)),
                   extrapolation=extrapolation)

    @classmethod
    def default(cls) -> "DeltaSchedule":
        return cls.geometric()

    @property
    def delta_min(self) -> float:
        return self.deltas[-1]


# --------------------------------------------------------------------------
# zero detection and classification
# --------------------------------------------------------------------------


def _sliding_max(m: np.ndarray, window: int) -> np.ndarray:
    """Max of m over index window [i-window, i+window], edges clipped."""
    out = m.copy()
    for k in range(1, window + 1):
        out[k:] = np.maximum(out[k:], m[:-k])
        out[:-k] = np.maximum(out[:-k], m[k:])
    return out


def detect_zeros(curve: ComplexCurve, rel_threshold: float = 0.1, *,
                 window: int = 8, noise_floor: float | None = None) -> ZeroSet:
    """Locate isolated zeros of a curve as deep dips of its modulus.

    A grid point is a candidate when its modulus is a strict local minimum
    and falls below ``rel_threshold`` times the maximum modulus over the
    ``window`` neighboring points on each side.  The location is refined
    by the vertex of a quadratic fit of the squared modulus through the 3
    nearest points, and refined points within one grid spacing merge.

    The threshold is relative because sampling noise in estimated curves
    scales like n^(-1/2); pass ``noise_floor`` (3/sqrt(n) for empirical
    curves) to discard dips whose whole neighborhood sits below the floor,
    where a dip cannot be distinguished from noise and must not be
    bridged.

    Raises
    ------
    ZeroIsolationError
        If two refined zeros are closer than 2 grid spacings; the grid
        must be refined before the pipeline can continue.
    """
    if not (rel_threshold > 0):
        raise ValueError("rel_threshold must be positive")
    if window < 1:
        raise ValueError("window must be >= 1")
    s = curve.grid.values
    h = curve.grid.spacing
    m = np.abs(curve.values)

    neigh = _sliding_max(m, window)
    cand = np.zeros(m.size, dtype=bool)
    cand[1:-1] = (m[1:-1] < m[:-2]) & (m[1:-1] < m[2:])
    cand &= m < rel_threshold * neigh
    if noise_floor is not None:
        cand &= neigh >= noise_floor

    points, indices, moduli = [], [], []
    for i in np.flatnonzero(cand):
        y0, y1, y2 = m[i - 1] ** 2, m[i] ** 2, m[i + 1] ** 2
        denom = y0 - 2.0 * y1 + y2
        offset = 0.0 if denom <= 0 else 0.5 * h * (y0 - y2) / denom
        offset = float(np.clip(offset, -h, h))
        points.append(s[i] + offset)
        indices.append(i)
        moduli.append(m[i])

    # merge refined locations within one grid spacing
    keep_p, keep_i, keep_m = [], [], []
    for p, i, mod in zip(points, indices, moduli):
        if keep_p and p - keep_p[-1] <= h:
            if mod < keep_m[-1]:
                keep_p[-1], keep_i[-1], keep_m[-1] = p, i, mod
        else:
            keep_p.append(p)
            keep_i.append(i)
            keep_m.append(mod)
    return ZeroSet(np.array(keep_p), np.array(keep_i, dtype=np.intp),
                   np.array(keep_m), h)


def classify_singular(psi: PsiCurve, zeros: ZeroSet, window: int = 4,
                      blowup_factor: float = 10.0, *, ref_span: int = 8) -> SingularSet:
    """Split detected zeros into singular and removable ones.

    A zero is singular when max |psi| over the ``window`` unmasked grid
    points on each side exceeds ``blowup_factor`` times the median |psi|
    over the surrounding region (the next ``ref_span * window`` unmasked
    points outward on each side, away from other zeros).  At a removable
    zero the numerator vanishes with the denominator and psi stays at the
    level of its neighborhood.

    Raises
    ------
    GridTooCoarseError
        If the near-window of one zero reaches another zero.
    """
    if window < 1 or blowup_factor <= 0:
        raise ValueError("window must be >= 1 and blowup_factor positive")
    a = np.abs(psi.values)
    masked = psi.zero_mask
    n = a.size
    zero_idx = set(int(i) for i in zeros.grid_indices)

    def walk(start: int, direction: int, count: int, forbid: set):
        """Collect up to ``count`` unmasked indices outward from start."""
        got = []
        i = start + direction
        while 0 <= i < n and len(got) < count:
            if i in forbid:
                return got, i
            if not masked[i]:
                got.append(i)
            i += direction
        return got, None

    singular_points = []
    for z, zi in zip(zeros.points, zeros.grid_indices):
        others = zero_idx - {int(zi)}
        near = []
        for direction in (-1, +1):
            got, hit = walk(int(zi), direction, window, others)
            if hit is not None:
                raise GridTooCoarseError(
                    f"window around zero at {z:.6g} reaches the zero near grid "
                    f"index {hit}; grid too coarse"
                )
            near.extend(got)
        ref = []
        for direction in (-1, +1):
            i = int(zi) + direction * (window + 1)
            need = ref_span * window
            while 0 <= i < n and len(ref) < need:
                if not masked[i] and all(abs(i - j) > window for j in others):
                    ref.append(i)
                i += direction
        if not near:
            raise GridTooCoarseError(f"no unmasked points next to zero at {z:.6g}")
        peak = float(np.max(a[near]))
        level = float(np.median(a[ref])) if ref else float(np.median(a[~masked]))
        if peak > blowup_factor * max(level, 1e-300):
            singular_points.append(z)
    return SingularSet.from_points(singular_points)


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


def _interp_complex(s: np.ndarray, v: np.ndarray, x: float) -> complex:
    """Linear interpolation of complex samples at a scalar point."""
    re = np.interp(x, s, v.real)
    im = np.interp(x, s, v.imag)
    return complex(re, im)


def _segment_integral(s: np.ndarray, v: np.ndarray, a: float, b: float) -> complex:
    """Trapezoid integral of samples (s, v) over [a, b].

    Interior grid points are used as-is; the endpoint values come from
    linear interpolation between the bracketing grid points.
    """
    if a == b:
        return 0.0 + 0.0j
    i0 = int(np.searchsorted(s, a, side="right"))
    i1 = int(np.searchsorted(s, b, side="left"))  # s[i1-1] < b
    va = _interp_complex(s, v, a)
    vb = _interp_complex(s, v, b)
    if i0 >= i1:  # no interior grid point
        return 0.5 * (b - a) * (va + vb)
    total = 0.5 * (s[i0] - a) * (va + v[i0])
    if i1 - i0 > 1:
        seg = v[i0:i1]
        total += 0.5 * np.sum((s[i0 + 1:i1] - s[i0:i1 - 1]) * (seg[1:] + seg[:-1]))
    total += 0.5 * (b - s[i1 - 1]) * (v[i1 - 1] + vb)
    return complex(total)


def integrate_psi_segment(psi: PsiCurve, a: float, b: float,
                          singular: SingularSet | None = None) -> complex:
    """Trapezoid integral of psi over [a, b] with interpolated endpoints.

    Masked grid points inside the range contribute through linear
    interpolation from their unmasked neighbors.  When a SingularSet is
    supplied, segments crossing a singular point are rejected.
    """
    if a > b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    s = psi.grid.values
    if a < s[0] or b > s[-1]:
        raise ValueError(f"[{a}, {b}] is not contained in the grid range")
    if singular is not None:
        pts = singular.all_points
        if np.any((pts > a) & (pts < b)):
            raise IdentificationError(
                f"integration segment [{a}, {b}] crosses a singular point"
            )
    return _segment_integral(s, psi.clean_values(), a, b)


# --------------------------------------------------------------------------
# masked-window fill
# --------------------------------------------------------------------------


def _fill_masked_cubic(s: np.ndarray, values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill contiguous masked runs by the cubic through 2 clean points per side.

    Raises when a run lacks two clean points on either side (overlapping
    windows or a window at the grid edge violate the isolation needed for
    a continuity fill).
    """
    out = np.array(values)
    n = len(s)
    i = 0
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        left = [k for k in (i - 1, i - 2) if k >= 0 and not mask[k]]
        right = [k for k in (j + 1, j + 2) if k < n and not mask[k]]
        if len(left) < 2 or len(right) < 2:
            raise IdentificationError(
                "masked windows overlap or touch the grid edge; "
                "isolation violated for the continuity fill"
            )
        nodes = np.array(sorted(left + right))
        xs = s[nodes]
        ys = out[nodes]
        # Lagrange cubic through the 4 nodes
        target = s[i:j + 1]
        acc = np.zeros(target.size, dtype=np.complex128)
        for p in range(4):
            w = np.ones(target.size)
            for q in range(4):
                if q != p:
                    w *= (target - xs[q]) / (xs[p] - xs[q])
            acc += ys[p] * w
        out[i:j + 1] = acc
        i = j + 1
    return out


def extend_by_continuity(curve: ComplexCurve, masked: ZeroSet,
                         radius: float | None = None) -> ComplexCurve:
    """Refill grid points near masked zeros by local cubic interpolation.

    Grid points within ``radius`` (default: half a grid spacing, i.e. the
    nearest point per zero) of any masked location are replaced by the
    cubic through the 2 nearest clean points on each side.  Masked
    windows must be isolated: at least 2 clean grid points between them.
    """
    s = curve.grid.values
    if radius is None:
        radius = 0.5 * curve.grid.spacing
    mask = np.zeros(s.size, dtype=bool)
    windows = 0
    for z in masked.points:
        w = np.abs(s - z) <= radius
        windows += int(np.any(w))
        mask |= w
    if not np.any(mask):
        return curve
    runs = int(np.sum(mask & ~np.concatenate([[False], mask[:-1]])))
    if runs < windows:
        raise IdentificationError(
            "masked windows around distinct zeros overlap; isolation violated"
        )
    filled = _fill_masked_cubic(s, curve.values, mask)
    return ComplexCurve(curve.grid, filled, is_cf=curve.is_cf)


# --------------------------------------------------------------------------
# reconstruction
# --------------------------------------------------------------------------


def _half_axis_values(s: np.ndarray, v: np.ndarray, zeros_pos: np.ndarray,
                      schedule: DeltaSchedule) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the product formula on one half axis.

    Parameters
    ----------
    s : ascending nodes with s[0] == 0
    v : clean psi values on those nodes
    zeros_pos : ascending singular points inside (0, s[-1]]
    schedule : DeltaSchedule

    Returns
    -------
    values : complex per node (value at 0 is exactly 1)
    filled : bool per node, True where the value came from the continuity
        fill (inside the final delta-window of a singular point, or where
        no delta in the schedule was applicable)
    """
    n = s.size
    values = np.empty(n, dtype=np.complex128)
    if zeros_pos.size == 0:
        incr = 0.5 * (s[1:] - s[:-1]) * (v[1:] + v[:-1])
        integral = np.concatenate([[0.0 + 0.0j], np.cumsum(incr)])
        values = np.exp(integral)
        values[0] = 1.0 + 0.0j
        return values, np.zeros(n, dtype=bool)

    deltas = schedule.deltas
    d_min = schedule.delta_min
    seg_of = np.searchsorted(zeros_pos, s, side="right")
    dist = np.min(np.abs(s[:, None] - zeros_pos[None, :]), axis=1)
    fill = dist < d_min

    rows = np.full((len(deltas), n), np.nan + 1j * np.nan, dtype=np.complex128)

    # segment 0 is delta-free: the origin is a regular point of psi
    first = np.flatnonzero(seg_of > 0)
    n0 = first[0] if first.size else n
    incr = 0.5 * (s[1:n0] - s[:n0 - 1]) * (v[1:n0] + v[:n0 - 1])
    base = np.concatenate([[0.0 + 0.0j], np.cumsum(incr)])
    rows[:, :n0] = np.exp(base)[None, :]

    for di, d in enumerate(deltas):
        # cumulative log-products over completed segments
        log_full = np.empty(zeros_pos.size, dtype=np.complex128)
        ok_upto = zeros_pos.size
        acc = 0.0 + 0.0j
        for k, z in enumerate(zeros_pos):
            lo = 0.0 if k == 0 else zeros_pos[k - 1] + d
            hi = z - d
            if hi <= lo:
                ok_upto = k
                break
            acc = acc + _segment_integral(s, v, lo, hi)
            log_full[k] = acc
        # partial integrals within each following segment
        for k in range(1, ok_upto + 1):
            a = zeros_pos[k - 1] + d
            in_seg = np.flatnonzero(seg_of == k)
            if in_seg.size == 0 or a > s[-1]:
                continue
            live = in_seg[s[in_seg] >= a]
            if live.size == 0:
                continue
            j0 = live[0]
            head = _segment_integral(s, v, a, s[j0])
            incr = 0.5 * (s[j0 + 1:live[-1] + 1] - s[j0:live[-1]]) * (
                v[j0 + 1:live[-1] + 1] + v[j0:live[-1]]
            )
            partial = head + np.concatenate([[0.0 + 0.0j], np.cumsum(incr)])
            sign = -1.0 if k % 2 else 1.0
            rows[di, live] = sign * np.exp(log_full[k - 1] + partial[: live.size])

    if schedule.extrapolation == "richardson" and len(deltas) >= 2:
        v2, v1 = rows[-1], rows[-2]
        d2, d1 = deltas[-1], deltas[-2]
        both = np.isfinite(v1.real) & np.isfinite(v2.real)
        combined = np.where(both, v2 + (v2 - v1) * (d2 / (d1 - d2)), v2)
    else:
        combined = rows[-1]

    fill |= ~np.isfinite(combined.real)
    values = np.where(fill, 0.0, combined)
    if np.any(fill):
        values = _fill_masked_cubic(s, values, fill)
    values[0] = 1.0 + 0.0j
    return values, fill


def reconstruct_cf(psi: PsiCurve, singular: SingularSet, schedule: DeltaSchedule,
                   grid: FreqGrid | None = None, *,
                   negative_axis: str = "hermitian") -> ComplexCurve:
    """Rebuild the component CF from its log-derivative ratio curve.

    For each positive grid point the product formula is evaluated at every
    delta in the schedule and combined per the schedule's extrapolation
    rule; the value at s = 0 is exactly 1.  Points inside the final
    delta-window of a singular point are refilled by the continuity fill.
    The negative half axis is filled by Hermitian symmetry (default) or by
    running the mirrored product formula (``negative_axis="product"``).

    When singular points are present, every delta must exceed the grid
    spacing and the spacing must be at most delta_min / 5 (psi is steep
    just outside the excised windows, so the quadrature needs headroom).
    """
    if grid is None:
        grid = psi.grid
    elif grid != psi.grid:
        raise ValueError("grid must match the psi curve's grid")
    if negative_axis not in ("hermitian", "product"):
        raise ValueError(f"unknown negative_axis mode {negative_axis!r}")
    h = grid.spacing
    if not singular.is_empty:
        if schedule.delta_min <= h:
            raise ValueError(
                f"every delta must exceed the grid spacing {h:.3g}; "
                f"got delta_min {schedule.delta_min:.3g}"
            )
        if h > schedule.delta_min / 5.0 * (1.0 + 1e-9):
            raise ValueError(
                f"grid spacing {h:.3g} must be <= delta_min/5 = "
                f"{schedule.delta_min / 5.0:.3g}; refine the grid or raise delta_min"
            )
    clean = psi.clean_values()
    mid = grid.zero_index
    s_pos = grid.values[mid:]
    pos_vals, _ = _half_axis_values(s_pos, clean[mid:], singular.positive, schedule)

    values = np.empty(grid.n_points, dtype=np.complex128)
    values[mid:] = pos_vals
    if negative_axis == "hermitian":
        values[:mid] = np.conj(pos_vals[1:])[::-1]
    else:
        # reflect: chi(u) := phi(-u) has log-derivative -psi(-u)
        v_ref = -clean[: mid + 1][::-1]
        zeros_ref = -singular.negative[::-1]
        neg_vals, _ = _half_axis_values(s_pos, v_ref, zeros_ref, schedule)
        values[:mid] = neg_vals[1:][::-1]
    return ComplexCurve(grid, values, is_cf=True)


def delta_trace(psi: PsiCurve, singular: SingularSet, schedule: DeltaSchedule,
                s: float) -> np.ndarray:
    """Per-delta values of the product formula at one probe point s >= 0.

    Entries are NaN for deltas too large to apply at s (the probe lies
    inside the excised window, or a gap between singular points closes).
    The limit realized by the schedule is the last finite entry.
    """
    if s < 0:
        raise ValueError("delta_trace expects a probe s >= 0")
    grid_s = psi.grid.values
    if s > grid_s[-1]:
        raise ValueError("probe lies outside the grid")
    v = psi.clean_values()
    zeros_pos = singular.positive
    k_bar = int(np.searchsorted(zeros_pos, s, side="right"))
    out = np.full(len(schedule.deltas), np.nan + 1j * np.nan, dtype=np.complex128)
    for di, d in enumerate(schedule.deltas):
        if k_bar == 0:
            out[di] = np.exp(_segment_integral(grid_s, v, 0.0, s))
            continue
        acc = 0.0 + 0.0j
        ok = True
        for k in range(k_bar):
            lo = 0.0 if k == 0 else zeros_pos[k - 1] + d
            hi = zeros_pos[k] - d
            if hi <= lo:
                ok = False
                break
            acc += _segment_integral(grid_s, v, lo, hi)
        a = zeros_pos[k_bar - 1] + d
        if not ok or a > s:
            continue
        acc += _segment_integral(grid_s, v, a, s)
        sign = -1.0 if k_bar % 2 else 1.0
        out[di] = sign * np.exp(acc)
    return out


def reconstruction_report(psi: PsiCurve, singular: SingularSet,
                          schedule: DeltaSchedule, probes=None,
                          ctol: float = 1e-3) -> dict:
    """Delta-sequence diagnostics at probe points.

    Default probes are the midpoints of the open segments between
    consecutive positive singular points (and just past the last one).
    Each probe reports its trace and a convergence flag: the run is
    flagged non-convergent when the last successive difference exceeds
    ``ctol`` while not clearly shrinking.
    """
    if probes is None:
        probes = []
        z = singular.positive
        prev = 0.0
        for k, zk in enumerate(z):
            probes.append(0.5 * (prev + zk))
            prev = zk
        if z.size:
            end = psi.grid.values[-1]
            if prev < end:
                probes.append(min(0.5 * (prev + end), prev + 10 * schedule.delta_min))
        else:
            probes.append(0.5 * psi.grid.values[-1])
    entries = []
    all_converged = True
    for p in probes:
        tr = delta_trace(psi, singular, schedule, float(p))
        finite = tr[np.isfinite(tr.real)]
        if finite.size <= 1:
            converged, last_diff = True, 0.0
        else:
            diffs = np.abs(np.diff(finite))
            last_diff = float(diffs[-1])
            converged = bool(last_diff <= ctol or last_diff <= 0.5 * diffs[0])
        all_converged &= converged
        entries.append({
            "s": float(p),
            "deltas": list(schedule.deltas),
            "trace_re": [float(x) for x in tr.real],
            "trace_im": [float(x) for x in tr.imag],
            "converged": converged,
            "last_diff": last_diff,
        })
    return {"probes": entries, "all_converged": bool(all_converged)}


# --------------------------------------------------------------------------
# identification stages
# --------------------------------------------------------------------------


def identify_from_curves(num: ComplexCurve, den: ComplexCurve,
                         schedule: DeltaSchedule | None = None, *,
                         noise_floor: float | None = None,
                         rel_threshold: float = 0.1, zero_window: int = 8,
                         class_window: int = 4, blowup_factor: float = 10.0,
                         negative_axis: str = "hermitian",
                         stage_report: dict | None = None) -> ComplexCurve:
    """Zero detection, classification, and reconstruction for one stage.

    ``num`` is the derivative slice and ``den`` the CF slice whose ratio
    is the log-derivative of the target CF; the curves may be empirical or
    exact.  Pass ``stage_report`` (a dict) to collect the detected zeros,
    the singular classification, and the delta-trace diagnostics.
    """
    schedule = schedule or DeltaSchedule.default()
    zeros = detect_zeros(den, rel_threshold, window=zero_window,
                         noise_floor=noise_floor)
    psi = psi_from_curves(num, den, zeros)
    singular = classify_singular(psi, zeros, class_window, blowup_factor)
    curve = reconstruct_cf(psi, singular, schedule, negative_axis=negative_axis)
    if stage_report is not None:
        report = reconstruction_report(psi, singular, schedule)
        if not report["all_converged"]:
            warnings.warn("delta sequence did not stabilize at some probe points; "
                          "see the diagnostics report", RuntimeWarning)
        sing = set(float(z) for z in singular.all_points)
        stage_report.update({
            "zeros": [
                {"location": float(p), "grid_index": int(i), "modulus": float(m),
                 "singular": bool(any(abs(float(p) - q) <= den.grid.spacing for q in sing))}
                for p, i, m in zip(zeros.points, zeros.grid_indices, zeros.moduli)
            ],
            "singular": [float(z) for z in singular.all_points],
            "noise_floor": noise_floor,
            "reconstruction": report,
        })
        stage_report["_zeros_obj"] = zeros
        stage_report["_singular_obj"] = singular
    return curve


def identify_alpha(samples: SampleSet, grid: FreqGrid,
                   schedule: DeltaSchedule | None = None, **tuning) -> ComplexCurve:
    """Estimate the CF of the row effect alpha_i from observed triples.

    Pipeline: center the y_ij and y_il columns, estimate the CF of the
    anchor column y_il and the paired derivative slice, detect and
    classify the denominator zeros, and reconstruct.  The zero detector
    uses the noise floor 3/sqrt(n).
    """
    y_first = center(samples.y_ij)
    anchor = center(samples.y_il)
    den, num = ecf_pair(y_first, anchor, grid)
    tuning.setdefault("noise_floor", 3.0 / np.sqrt(len(samples)))
    return identify_from_curves(num, den, schedule, **tuning)


def identify_eta(samples: SampleSet, grid: FreqGrid,
                 schedule: DeltaSchedule | None = None, **tuning) -> ComplexCurve:
    """Estimate the CF of the column effect eta_j (mirror of identify_alpha).

    The anchor column is y_kj: the latent variable shared between y_ij
    and y_kj is eta_j, so the ratio curve is the log-derivative of its CF.
    """
    y_first = center(samples.y_ij)
    anchor = center(samples.y_kj)
    den, num = ecf_pair(y_first, anchor, grid)
    tuning.setdefault("noise_floor", 3.0 / np.sqrt(len(samples)))
    return identify_from_curves(num, den, schedule, **tuning)


def identify_alpha_oracle(config: ModelConfig, grid: FreqGrid,
                          schedule: DeltaSchedule | None = None, **tuning) -> ComplexCurve:
    """identify_alpha on exact slices instead of estimates (noise-free mode)."""
    slices = compose_phi_Y_slices(config, grid)
    return identify_from_curves(slices.dcurve_00r, slices.curve_00r, schedule, **tuning)


def identify_eta_oracle(config: ModelConfig, grid: FreqGrid,
                        schedule: DeltaSchedule | None = None, **tuning) -> ComplexCurve:
    """identify_eta on exact slices instead of estimates (noise-free mode)."""
    slices = compose_phi_Y_slices(config, grid)
    return identify_from_curves(slices.dcurve_0t0, slices.curve_0t0, schedule, **tuning)


def identify_epsilon(phi_y: ComplexCurve, phi_alpha: ComplexCurve,
                     phi_eta: ComplexCurve, zeros_union: ZeroSet, *,
                     mask_radius: float | None = None, den_floor: float = 1e-8,
                     reject_tol: float = 0.5) -> ComplexCurve:
    """Recover the idiosyncratic CF by division.

    phi_eps = phi_y / (phi_alpha * phi_eta) off the union of the two
    stages' zero sets; grid points within ``mask_radius`` (default twice
    the grid spacing) of a zero are masked and refilled by the continuity
    fill, as are points where the denominator product falls below
    ``den_floor`` (reported with a warning).  The result is re-anchored to
    1 at s = 0 and symmetrized to exact Hermitian form.

    Raises
    ------
    IdentificationError
        If the refilled curve violates the CF invariants by more than
        ``reject_tol``: inconsistent inputs are detected, not returned.
    """
    grid = phi_y.grid
    if phi_alpha.grid != grid or phi_eta.grid != grid:
        raise ValueError("all three curves must share a grid")
    if mask_radius is None:
        mask_radius = 2.0 * grid.spacing
    s = grid.values
    mask = np.zeros(grid.n_points, dtype=bool)
    for z in zeros_union.points:
        mask |= np.abs(s - z) <= mask_radius

    den = phi_alpha.values * phi_eta.values
    low = (np.abs(den) < den_floor) & ~mask
    if np.any(low):
        warnings.warn(
            f"|phi_alpha*phi_eta| below {den_floor:.1g} at {int(low.sum())} "
            "unmasked grid points; masking them as well", RuntimeWarning)
        mask |= low

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mask, 0.0 + 0.0j, phi_y.values / den)
    bad = ~np.isfinite(ratio.view(np.float64)).reshape(-1, 2).all(axis=1)
    if np.any(bad):
        mask |= bad
        ratio = np.where(mask, 0.0 + 0.0j, ratio)

    if np.any(mask):
        ratio = _fill_masked_cubic(s, ratio, mask)
    mid = grid.zero_index
    anchor = ratio[mid]
    if anchor == 0:
        raise IdentificationError("division produced 0 at the origin")
    ratio = ratio / anchor

    curve = hermitian_symmetrize(ComplexCurve(grid, ratio, is_cf=True))
    report = validate_cf_curve(curve, reject_tol)
    if not report.passed:
        raise IdentificationError(
            "division result is not a plausible CF, inputs are inconsistent: "
            + report.summary()
        )
    return curve


# --------------------------------------------------------------------------
# full pipeline
# --------------------------------------------------------------------------


@dataclass
class PipelineResult:
    """Curves and diagnostics from a full three-stage identification run."""

    alpha: ComplexCurve
    eta: ComplexCurve
    epsilon: ComplexCurve
    report_alpha: dict
    report_eta: dict
    zeros_union: ZeroSet


def _finish_pipeline(phi_y, alpha, eta, rep_a, rep_e, schedule, grid) -> PipelineResult:
    zeros_union = rep_a.pop("_zeros_obj").union(rep_e.pop("_zeros_obj"))
    sing_a = rep_a.pop("_singular_obj")
    sing_e = rep_e.pop("_singular_obj")
    radius = 2.0 * grid.spacing
    if not (sing_a.is_empty and sing_e.is_empty):
        radius = max(radius, schedule.delta_min)
    epsilon = identify_epsilon(phi_y, alpha, eta, zeros_union, mask_radius=radius)
    return PipelineResult(alpha=alpha, eta=eta, epsilon=epsilon,
                          report_alpha=rep_a, report_eta=rep_e,
                          zeros_union=zeros_union)


def run_pipeline(samples: SampleSet, grid: FreqGrid,
                 schedule: DeltaSchedule | None = None, **tuning) -> PipelineResult:
    """Identify all three component CFs from observed triples."""
    schedule = schedule or DeltaSchedule.default()
    rep_a: dict = {}
    rep_e: dict = {}
    alpha = identify_alpha(samples, grid, schedule, stage_report=rep_a, **tuning)
    eta = identify_eta(samples, grid, schedule, stage_report=rep_e, **tuning)
    phi_y = ecf(center(samples.y_ij), grid)
    return _finish_pipeline(phi_y, alpha, eta, rep_a, rep_e, schedule, grid)


def run_oracle_pipeline(config: ModelConfig, grid: FreqGrid,
                        schedule: DeltaSchedule | None = None, **tuning) -> PipelineResult:
    """Identify all three component CFs from exact slices (noise-free mode)."""
    schedule = schedule or DeltaSchedule.default()
    slices = compose_phi_Y_slices(config, grid)
    rep_a: dict = {}
    rep_e: dict = {}
    alpha = identify_from_curves(slices.dcurve_00r, slices.curve_00r, schedule,
                                 stage_report=rep_a, **tuning)
    eta = identify_from_curves(slices.dcurve_0t0, slices.curve_0t0, schedule,
                               stage_report=rep_e, **tuning)
    return _finish_pipeline(slices.curve_s00, alpha, eta, rep_a, rep_e, schedule, grid)

"""Core domain types for the dyadic error-component toolkit.

The observed quantity is a triple of outcomes from three linked dyads,

    y_ij = c + alpha_i + eta_j + eps_ij
    y_kj = c + alpha_k + eta_j + eps_kj
    y_il = c + alpha_i + eta_l + eps_il

where the row effects alpha, column effects eta, and idiosyncratic errors
eps are jointly independent with zero means.  This module houses the
zero-mean component laws, the model configuration, sampled triples,
uniform frequency grids, and complex-valued curves (sampled characteristic
functions or their derivatives), plus validation and CSV/JSON round-trips.

All types are immutable after construction and safe to share between
threads for concurrent reads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DIST_KINDS = (
    "normal",
    "laplace",
    "uniform_symmetric",
    "two_point_symmetric",
    "shifted_exponential",
)

# Internal kind used by the test-only degenerate hook (point mass at 0).
# Public constructors reject zero scales; see ComponentDist.degenerate().
_DEGENERATE_KIND = "degenerate"


@dataclass(frozen=True)
class ComponentDist:
    """A zero-mean component law with one positive scale parameter.

    Supported kinds and the meaning of ``scale``:

    ==================== ==========================================
    normal               standard deviation sigma
    laplace              spread b, density exp(-|x|/b) / (2b)
    uniform_symmetric    half-width a, Uniform[-a, a]
    two_point_symmetric  +-a with probability 1/2 each
    shifted_exponential  Exp with mean lam, shifted left by lam
    ==================== ==========================================

    Every supported law has mean exactly zero; parameterizations that
    would introduce a nonzero mean are not representable.
    """

    kind: str
    scale: float

    def __post_init__(self):
        if self.kind == _DEGENERATE_KIND:
            if self.scale != 0.0:
                raise ValueError("degenerate law must have scale 0")
            return
        if self.kind not in DIST_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(
                f"scale must be a positive finite real, got {self.scale!r}"
            )

    @classmethod
    def degenerate(cls) -> "ComponentDist":
        """Test-only hook: a point mass at 0 (all draws 0, CF identically 1).

        Zero-scale laws are rejected by the public constructor; this hook
        exists so plumbing tests can run the pipeline on exactly-known
        inputs.
        """
        return cls(_DEGENERATE_KIND, 0.0)

    @property
    def is_degenerate(self) -> bool:
        return self.kind == _DEGENERATE_KIND

    @property
    def variance(self) -> float:
        """Exact variance of the law."""
        a = self.scale
        return {
            "normal": a * a,
            "laplace": 2.0 * a * a,
            "uniform_symmetric": a * a / 3.0,
            "two_point_symmetric": a * a,
            "shifted_exponential": a * a,
            _DEGENERATE_KIND: 0.0,
        }[self.kind]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "ComponentDist":
        return cls(str(d["kind"]), float(d["scale"]))


@dataclass(frozen=True)
class ModelConfig:
    """Intercept and the three component laws of the dyadic model.

    One law is shared by alpha_i and alpha_k, one by eta_j and eta_l, and
    one by all three eps terms.  The downstream formulas never exploit
    this homogeneity (curves are passed per index), it only keeps the
    simulator and the ground-truth compositions small.
    """

    c: float
    dist_alpha: ComponentDist
    dist_eta: ComponentDist
    dist_eps: ComponentDist

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise ValueError("intercept c must be finite")
        for name in ("dist_alpha", "dist_eta", "dist_eps"):
            if not isinstance(getattr(self, name), ComponentDist):
                raise TypeError(f"{name} must be a ComponentDist")

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "alpha": self.dist_alpha.to_dict(),
            "eta": self.dist_eta.to_dict(),
            "eps": self.dist_eps.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            c=float(d.get("c", 0.0)),
            dist_alpha=ComponentDist.from_dict(d["alpha"]),
            dist_eta=ComponentDist.from_dict(d["eta"]),
            dist_eps=ComponentDist.from_dict(d["eps"]),
        )

    def save(self, path) -> None:
        """Write the config as a JSON key-value file (see README schema)."""
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ModelConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TripleSample:
    """One observed triple (y_ij, y_kj, y_il) of the connected component."""

    y_ij: float
    y_kj: float
    y_il: float

    def __post_init__(self):
        for name in ("y_ij", "y_kj", "y_il"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


class SampleSet:
    """Ordered collection of observed triples.

    Parameters
    ----------
    data : np.ndarray of shape (n, 3)
        Columns are y_ij, y_kj, y_il.
    seed : int
        Seed the set was generated with (0 for externally ingested data).
    config : ModelConfig or None
        Generating configuration; None for externally ingested data.
    """

    __slots__ = ("data", "seed", "config")

    def __init__(self, data: np.ndarray, seed: int, config: ModelConfig | None = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("data must have shape (n, 3)")
        if arr.shape[0] < 1:
            raise ValueError("a SampleSet needs at least one triple")
        if not np.all(np.isfinite(arr)):
            raise ValueError("all outcomes must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self.data = arr
        self.seed = int(seed)
        self.config = config

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def y_ij(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def y_kj(self) -> np.ndarray:
        return self.data[:, 1]

    @property
    def y_il(self) -> np.ndarray:
        return self.data[:, 2]

    def triples(self):
        """Iterate rows as TripleSample objects."""
        for row in self.data:
            yield TripleSample(*row)

    def __eq__(self, other):
        return (
            isinstance(other, SampleSet)
            and self.seed == other.seed
            and self.config == other.config
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=True)
class FreqGrid:
    """Uniform symmetric frequency grid on [-s_max, s_max] containing 0.

    ``n_points`` must be odd so that s = 0 is an exact grid point; the
    grid is built as spacing * k for k = -m..m, hence mirror symmetry is
    bitwise exact and the midpoint is exactly 0.0.
    """

    s_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.s_max) and self.s_max > 0):
            raise ValueError("s_max must be positive and finite")
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError("n_points must be an odd integer >= 3")
        m = (self.n_points - 1) // 2
        vals = (self.s_max / m) * np.arange(-m, m + 1, dtype=np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "_values", vals)

    @classmethod
    def from_spacing(cls, s_max: float, spacing: float) -> "FreqGrid":
        """Grid with (approximately) the requested spacing, rounded to fit."""
        m = max(1, round(s_max / spacing))
        return cls(s_max=s_max, n_points=2 * m + 1)

    @property
    def values(self) -> np.ndarray:
        return self._values  # type: ignore[attr-defined]

    @property
    def spacing(self) -> float:
        return self.s_max / ((self.n_points - 1) // 2)

    @property
    def zero_index(self) -> int:
        return (self.n_points - 1) // 2


@dataclass(frozen=True)
class ComplexCurve:
    """Complex values sampled on a FreqGrid.

    ``is_cf`` tags the curve as a characteristic function of a real random
    variable; derivative curves carry ``is_cf=False`` and are exempt from
    the CF invariants checked by :func:`validate_cf_curve`.
    """

    grid: FreqGrid
    values: np.ndarray
    is_cf: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"values must have shape ({self.grid.n_points},), got {vals.shape}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def value_at_zero(self) -> complex:
        return complex(self.values[self.grid.zero_index])


def hermitian_symmetrize(curve: ComplexCurve) -> ComplexCurve:
    """Average a curve with its reflected conjugate.

    For any input the result satisfies value(-s) == conj(value(s)) exactly
    in floating point, since the same two summands appear at s and -s.
    """
    v = curve.values
    sym = 0.5 * (v + np.conj(v[::-1]))
    return ComplexCurve(curve.grid, sym, is_cf=curve.is_cf)


@dataclass(frozen=True)
class CFValidationReport:
    """Maximal violations of the characteristic-function invariants."""

    origin_violation: float      # |phi(0) - 1|
    modulus_violation: float     # max(|phi| - 1, 0)
    hermitian_violation: float   # max |phi(-s) - conj(phi(s))|
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.origin_violation <= self.tol
            and self.modulus_violation <= self.tol
            and self.hermitian_violation <= self.tol
        )

    def summary(self) -> str:
        return (
            f"phi(0)=1 violation {self.origin_violation:.3g}, "
            f"|phi|<=1 violation {self.modulus_violation:.3g}, "
            f"Hermitian violation {self.hermitian_violation:.3g} "
            f"(tol {self.tol:.3g})"
        )


def validate_cf_curve(curve: ComplexCurve, tol: float) -> CFValidationReport:
    """Report violations of phi(0)=1, |phi|<=1, and Hermitian symmetry.

    Report-only: never raises on violations.  The input must be tagged as
    a CF; derivative curves have no reason to satisfy these invariants.
    """
    if not curve.is_cf:
        raise ValueError("validate_cf_curve expects a curve tagged as a CF")
    if not (tol > 0):
        raise ValueError("tol must be positive")
    v = curve.values
    origin = abs(v[curve.grid.zero_index] - 1.0)
    modulus = max(float(np.max(np.abs(v))) - 1.0, 0.0)
    hermitian = float(np.max(np.abs(v[::-1] - np.conj(v))))
    return CFValidationReport(
        origin_violation=float(origin),
        modulus_violation=modulus,
        hermitian_violation=hermitian,
        tol=float(tol),
    )


def write_curve_csv(curve: ComplexCurve, path) -> None:
    """Write a curve as CSV with columns s, re, im (shortest round-trip reprs)."""
    lines = ["s,re,im"]
    s = curve.grid.values
    v = curve.values
    for i in range(len(s)):
        lines.append(f"{float(s[i])!r},{float(v[i].real)!r},{float(v[i].imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path, is_cf: bool = True) -> ComplexCurve:
    """Read a curve CSV written by :func:`write_curve_csv`.

    The s column must form a symmetric uniform odd-length grid.  Malformed
    rows are reported with their line number.
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "s,re,im":
        raise ValueError(f"{path}: line 1: expected header 's,re,im'")
    s_list, v_list = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 fields, got {len(parts)}")
        try:
            s_list.append(float(parts[0]))
            v_list.append(complex(float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    s = np.asarray(s_list)
    n = len(s)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"{path}: grid must have odd length >= 3, got {n}")
    m = (n - 1) // 2
    if s[m] != 0.0:
        raise ValueError(f"{path}: grid midpoint must be 0, got {s[m]}")
    spac = np.diff(s)
    if not np.allclose(spac, spac[0], rtol=1e-9, atol=0.0):
        raise ValueError(f"{path}: grid is not uniform")
    grid = FreqGrid(s_max=float(abs(s[-1])), n_points=n)
    if not np.allclose(grid.values, s, rtol=0.0, atol=1e-12 * max(1.0, abs(s[-1]))):
        raise ValueError(f"{path}: grid is not symmetric about 0")
    return ComplexCurve(grid, np.asarray(v_list), is_cf=is_cf)

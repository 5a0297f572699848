"""Seeded simulation of i.i.d. replicates of the linked-triple component.

Stream-splitting rule: one PCG64 substream per latent component, spawned
from ``SeedSequence(seed)`` in the fixed order

    alpha_i, alpha_k, eta_j, eta_l, eps_ij, eps_kj, eps_il

so changing one component's law never perturbs the draws of the others.
Draws are produced by inverse-CDF transforms of the substream's uniform
doubles; this keeps output streams stable across numpy releases (only the
bit-generator stream is relied upon) and therefore keeps golden files
byte-reproducible.

Replicates could be generated in parallel by splitting each substream
further per block; the serial implementation here defines the canonical
output order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .model import ComponentDist, ModelConfig, SampleSet

COMPONENTS = ("alpha_i", "alpha_k", "eta_j", "eta_l", "eps_ij", "eps_kj", "eps_il")

# Keeps inverse-CDF logs away from 0 and ndtri away from the endpoints.
_U_FLOOR = 1e-15


def component_generators(seed: int) -> dict[str, np.random.Generator]:
    """One independent PCG64 generator per latent component."""
    root = np.random.SeedSequence(int(seed))
    children = root.spawn(len(COMPONENTS))
    return {
        name: np.random.Generator(np.random.PCG64(child))
        for name, child in zip(COMPONENTS, children)
    }


def draw(dist: ComponentDist, rng: np.random.Generator, size: int | None = None):
    """Draw from a zero-mean component law via inverse-CDF sampling.

    Parameters
    ----------
    dist : ComponentDist
        The law to sample.
    rng : np.random.Generator
        Source of uniform doubles; consumed deterministically.
    size : int or None
        None returns a scalar float, otherwise an array of that length.

    Returns
    -------
    float or np.ndarray
    """
    u = rng.random(1 if size is None else size)
    u = np.clip(u, _U_FLOOR, 1.0 - _U_FLOOR)
    a = dist.scale
    kind = dist.kind
    if kind == "normal":
        x = a * ndtri(u)
    elif kind == "laplace":
        # F^-1(u) = b*ln(2u) for u < 1/2, -b*ln(2(1-u)) otherwise
        x = np.where(u < 0.5, a * np.log(2.0 * u), -a * np.log(2.0 * (1.0 - u)))
    elif kind == "uniform_symmetric":
        x = a * (2.0 * u - 1.0)
    elif kind == "two_point_symmetric":
        x = np.where(u < 0.5, -a, a)
    elif kind == "shifted_exponential":
        # Exp(mean a) minus a, support (-a, inf)
        x = -a * np.log1p(-u) - a
    elif dist.is_degenerate:
        x = np.zeros_like(u)
    else:  # pragma: no cover - ComponentDist already validates kinds
        raise ValueError(f"unknown kind {kind!r}")
    return float(x[0]) if size is None else x


def sample_components(config: ModelConfig, n: int, seed: int) -> SampleSet:
    """Generate n replicates of the triple (y_ij, y_kj, y_il).

    Per replicate, seven jointly independent draws alpha_i, alpha_k,
    eta_j, eta_l, eps_ij, eps_kj, eps_il are combined as

        y_ij = c + alpha_i + eta_j + eps_ij
        y_kj = c + alpha_k + eta_j + eps_kj
        y_il = c + alpha_i + eta_l + eps_il

    The output is a deterministic function of (config, n, seed).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gens = component_generators(seed)
    alpha_i = draw(config.dist_alpha, gens["alpha_i"], n)
    alpha_k = draw(config.dist_alpha, gens["alpha_k"], n)
    eta_j = draw(config.dist_eta, gens["eta_j"], n)
    eta_l = draw(config.dist_eta, gens["eta_l"], n)
    eps_ij = draw(config.dist_eps, gens["eps_ij"], n)
    eps_kj = draw(config.dist_eps, gens["eps_kj"], n)
    eps_il = draw(config.dist_eps, gens["eps_il"], n)

    c = config.c
    data = np.column_stack(
        [
            c + alpha_i + eta_j + eps_ij,
            c + alpha_k + eta_j + eps_kj,
            c + alpha_i + eta_l + eps_il,
        ]
    )
    return SampleSet(data, seed=seed, config=config)


def write_samples(samples: SampleSet, path) -> Path:
    """Write a SampleSet to CSV plus a JSON sidecar with config and seed.

    Returns the sidecar path (same stem, .json suffix).
    """
    path = Path(path)
    lines = ["y_ij,y_kj,y_il"]
    for row in samples.data:
        lines.append(f"{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = path.with_suffix(".json")
    meta = {
        "n": len(samples),
        "seed": samples.seed,
        "config": samples.config.to_dict() if samples.config is not None else None,
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def read_samples(path) -> SampleSet:
    """Read a samples CSV (and its sidecar, when present)."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "y_ij,y_kj,y_il":
        raise ValueError(f"{path}: line 1: expected header 'y_ij,y_kj,y_il'")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}: line {lineno}: {exc}") from None
    seed = 0
    config = None
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        seed = int(meta.get("seed", 0))
        if meta.get("config") is not None:
            config = ModelConfig.from_dict(meta["config"])
    return SampleSet(np.asarray(rows), seed=seed, config=config)

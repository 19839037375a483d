"""Finite-statistics emulation of the prepare-and-measure run with losses.

Each shot is lost (no click) with probability ``1 - (1 - loss) * efficiency``,
independently of the outcome; a surviving photon clicks ``D0`` with the ideal
probability ``p(x, y)``. Estimation post-selects on detected events, so the
estimator targets the lossless table whatever the loss.

Randomness: PCG64 bit generators seeded from ``SeedSequence(seed,
spawn_key=(x, y))``, one independent stream per table cell. Per-shot
Bernoulli trials are drawn in aggregate as two chained binomials (detected
count, then ``D0`` count among detected), which has the same distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .state import QdcError
from .witness import (
    LINEAR_TERMS,
    PamSettings,
    ProbTable,
    WitnessKind,
    WitnessResult,
    _det,
    evaluate,
    linear_value,
    prob_table,
    witness_matrix,
)

RNG_ALGORITHM = "PCG64 via numpy SeedSequence(seed, spawn_key=(x, y))"


class EstimationError(QdcError, ValueError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    shots_per_setting: int
    loss: float = 0.0
    efficiency: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.shots_per_setting) != self.shots_per_setting or self.shots_per_setting < 1:
            raise ValueError("shots_per_setting must be a positive integer")
        if not 0 <= self.loss < 1:
            raise ValueError("loss must lie in [0, 1)")
        if not 0 < self.efficiency <= 1:
            raise ValueError("efficiency must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def detection_probability(self) -> float:
        return (1 - self.loss) * self.efficiency


@dataclass(frozen=True, eq=False)
class CountTable:
    n0: np.ndarray
    n1: np.ndarray
    n_lost: np.ndarray

    def __post_init__(self):
        for name in ("n0", "n1", "n_lost"):
            a = np.array(getattr(self, name), dtype=np.int64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.n0.shape == self.n1.shape == self.n_lost.shape):
            raise ValueError("count arrays must share a shape")

    @property
    def detected(self) -> np.ndarray:
        return self.n0 + self.n1

    @property
    def shots(self) -> np.ndarray:
        return self.n0 + self.n1 + self.n_lost

    def to_dict(self) -> dict:
        return {"n0": self.n0.tolist(), "n1": self.n1.tolist(), "n_lost": self.n_lost.tolist()}


def cell_rng(seed: int, x: int, y: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(x, y))))


def sample_counts(settings: PamSettings, noise: NoiseConfig, table: ProbTable | None = None) -> CountTable:
    """Simulate ``noise.shots_per_setting`` photons per (x, y) cell."""
    p = (table or prob_table(settings)).p
    n = int(noise.shots_per_setting)
    eff = noise.detection_probability
    n0 = np.zeros(p.shape, dtype=np.int64)
    n1 = np.zeros_like(n0)
    lost = np.zeros_like(n0)
    for x in range(p.shape[0]):
        for y in range(p.shape[1]):
            rng = cell_rng(noise.seed, x, y)
            det = rng.binomial(n, eff)
            zero = rng.binomial(det, p[x, y])
            n0[x, y], n1[x, y], lost[x, y] = zero, det - zero, n - det
    return CountTable(n0, n1, lost)


def estimate_table(c: CountTable) -> ProbTable:
    """Post-selected estimate ``n0/(n0+n1)`` with binomial standard errors."""
    det = c.detected
    if np.any(det < 1):
        cells = [tuple(int(i) for i in ix) for ix in np.argwhere(det < 1)]
        raise EstimationError(f"no detected events in cells {cells}")
    p = c.n0 / det
    se = np.sqrt(p * (1 - p) / det)
    return ProbTable(p, "sampled", se)


def _linear_sigma(t: ProbTable) -> float:
    # E_xy = 2p - 1, so each term contributes (2 se)^2
    return math.sqrt(sum((2 * t.stderr[x, y]) ** 2 for x, y, _ in LINEAR_TERMS))


def _cofactors(w: np.ndarray) -> np.ndarray:
    k = w.shape[0]
    if k == 2:
        return np.array([[w[1, 1], -w[1, 0]], [-w[0, 1], w[0, 0]]])
    cof = np.empty_like(w)
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(w, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return cof


def _nonlinear_sigma(t: ProbTable) -> float:
    """Delta method for ``|det W|``; ``W[i, j]`` depends on ``p(2j, i)`` and ``p(2j+1, i)``."""
    w = witness_matrix(t.p)
    cof = _cofactors(w)
    se = t.stderr
    var = 0.0
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            var += cof[i, j] ** 2 * (se[2 * j, i] ** 2 + se[2 * j + 1, i] ** 2)
    return math.sqrt(var)


def _bootstrap_sigma(kind: WitnessKind, c: CountTable, n_resamples: int, seed: int) -> float:
    """Parametric bootstrap: redraw D0 counts per cell at the estimated rate."""
    t = estimate_table(c)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xB007,)))
    det = c.detected
    draws = rng.binomial(det, t.p, size=(n_resamples,) + det.shape) / det
    if kind is WitnessKind.LINEAR:
        vals = linear_value(draws)
    else:
        vals = np.abs(_det(witness_matrix(draws)))
    return float(np.std(vals, ddof=1))


def estimate_witness(kind, settings: PamSettings, noise: NoiseConfig, bootstrap: bool = False, n_resamples: int = 1000) -> WitnessResult:
    """Witness on a sampled table with a first-order (or bootstrap) uncertainty."""
    kind = WitnessKind.parse(kind)
    counts = sample_counts(settings, noise)
    t = estimate_table(counts)
    res = evaluate(kind, t, settings)
    sigma = _linear_sigma(t) if kind is WitnessKind.LINEAR else _nonlinear_sigma(t)
    extra = {"counts": counts, "table": t, "delta_sigma": sigma}
    if bootstrap:
        sigma = _bootstrap_sigma(kind, counts, n_resamples, noise.seed)
        extra["bootstrap_sigma"] = sigma
    return WitnessResult(kind, res.value, res.matrix, settings, sigma, extra)

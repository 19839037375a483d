"""Brute-force search over classical prepare-and-measure strategies.

A deterministic strategy of message dimension ``d`` sends message ``prep[x]``
for preparation ``x``; the measurer outputs ``response[m][y]`` for message
``m`` and setting ``y``. Mixtures come in two flavours:

* ``shared``: one random variable drives both boxes (a convex combination of
  deterministic strategies). The linear witness is affine in the table, so
  its maximum is attained on deterministic strategies.
* ``independent``: preparer and measurer randomize separately, which is the
  situation the determinant witness assumes. For ``d <= k`` the determinant
  then vanishes identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .state import QdcError
from .witness import ProbTable, WitnessKind, _det, linear_value, witness_matrix

MAX_STRATEGIES = 10**7
MIXTURE_SEED = 20190401


class EnumerationTooLarge(QdcError, ValueError):
    pass


@dataclass(frozen=True)
class ClassicalStrategy:
    dim: int
    prep: tuple[int, ...]
    response: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("message dimension must be positive")
        if any(not 0 <= m < self.dim for m in self.prep):
            raise ValueError("prep maps outside the message alphabet")
        if len(self.response) != self.dim:
            raise ValueError("response must cover every message")
        if len({len(r) for r in self.response}) > 1:
            raise ValueError("response rows must cover the same settings")

    @property
    def n_prep(self) -> int:
        return len(self.prep)

    @property
    def n_meas(self) -> int:
        return len(self.response[0])

    def outcome(self, x: int, y: int) -> int:
        return self.response[self.prep[x]][y]


@dataclass(frozen=True)
class MixedStrategy:
    components: tuple[tuple[float, ClassicalStrategy], ...]

    def __post_init__(self):
        w = np.array([c[0] for c in self.components], dtype=float)
        if len(w) == 0 or np.any(w <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"mixture weights sum to {w.sum()!r}, not 1")


def strategy_count(n_prep: int, n_meas: int, d: int) -> int:
    return d**n_prep * 2 ** (d * n_meas)


def _guard(n_prep: int, n_meas: int, d: int) -> int:
    n = strategy_count(n_prep, n_meas, d)
    if n > MAX_STRATEGIES:
        raise EnumerationTooLarge(f"{n} strategies for (n_prep={n_prep}, n_meas={n_meas}, d={d}) exceeds {MAX_STRATEGIES}")
    return n


def iter_strategies(n_prep: int, n_meas: int, d: int) -> Iterator[ClassicalStrategy]:
    _guard(n_prep, n_meas, d)
    responses = list(itertools.product((0, 1), repeat=d * n_meas))
    for prep in itertools.product(range(d), repeat=n_prep):
        for bits in responses:
            resp = tuple(bits[m * n_meas:(m + 1) * n_meas] for m in range(d))
            yield ClassicalStrategy(d, prep, resp)


def enumerate_strategies(n_prep: int, n_meas: int, d: int) -> list[ClassicalStrategy]:
    """All deterministic strategies; ``d**n_prep * 2**(d*n_meas)`` of them."""
    return list(iter_strategies(n_prep, n_meas, d))


def strategy_table(s: ClassicalStrategy | MixedStrategy, n_prep: int | None = None, n_meas: int | None = None) -> ProbTable:
    """``p[x, y]``: probability of outcome 0 under ``s``."""
    if isinstance(s, MixedStrategy):
        tabs = [(w, strategy_table(c, n_prep, n_meas).p) for w, c in s.components]
        return ProbTable(sum(w * t for w, t in tabs), "analytic")
    n_prep = s.n_prep if n_prep is None else n_prep
    n_meas = s.n_meas if n_meas is None else n_meas
    if n_prep > s.n_prep or n_meas > s.n_meas:
        raise ValueError(f"strategy covers {s.n_prep}x{s.n_meas} settings, asked for {n_prep}x{n_meas}")
    p = [[1.0 if s.outcome(x, y) == 0 else 0.0 for y in range(n_meas)] for x in range(n_prep)]
    return ProbTable(np.array(p), "analytic")


def _deterministic_tables(n_prep: int, n_meas: int, d: int) -> np.ndarray:
    """Stack of all deterministic tables, in :func:`iter_strategies` order."""
    _guard(n_prep, n_meas, d)
    preps = np.array(list(itertools.product(range(d), repeat=n_prep)), dtype=int).reshape(-1, n_prep)
    bits = np.array(list(itertools.product((0, 1), repeat=d * n_meas)), dtype=int).reshape(-1, d, n_meas)
    # outcome[prep_i, resp_j, x, y] = bits[resp_j, preps[prep_i, x], y]
    out = bits[:, preps, :]  # (resp, prep, x, y)
    return (1 - np.swapaxes(out, 0, 1)).reshape(-1, n_prep, n_meas).astype(float)


def random_mixture(rng: np.random.Generator, n_prep: int, n_meas: int, d: int, mode: str = "independent", max_components: int = 8) -> MixedStrategy:
    """Dirichlet-uniform mixture over 2..``max_components`` components.

    ``independent`` draws separate preparer and measurer mixtures and returns
    their product distribution over joint strategies.
    """
    preps = list(itertools.product(range(d), repeat=n_prep))
    resps = list(itertools.product((0, 1), repeat=d * n_meas))

    def resp(i):
        bits = resps[i]
        return tuple(bits[m * n_meas:(m + 1) * n_meas] for m in range(d))

    def pick(pool_size):
        k = int(rng.integers(2, max_components + 1))
        return rng.dirichlet(np.ones(k)), rng.integers(pool_size, size=k)

    if mode == "shared":
        w, idx = pick(len(preps) * len(resps))
        comps = [(float(wi), ClassicalStrategy(d, preps[i // len(resps)], resp(i % len(resps)))) for wi, i in zip(w, idx)]
    elif mode == "independent":
        a, ia = pick(len(preps))
        b, ib = pick(len(resps))
        comps = [
            (float(ai * bj), ClassicalStrategy(d, preps[i], resp(j)))
            for ai, i in zip(a, ia)
            for bj, j in zip(b, ib)
        ]
    else:
        raise ValueError(f"unknown mixture mode {mode!r}")
    total = sum(w for w, _ in comps)
    return MixedStrategy(tuple((w / total, c) for w, c in comps))


def _random_mixture_tables(rng, n_prep, n_meas, d, n, mode, max_components=8) -> np.ndarray:
    """Tables of ``n`` mixtures drawn as in :func:`random_mixture` (same distribution, batched)."""
    det_tabs = _deterministic_tables(n_prep, n_meas, d)
    if mode == "shared":
        out = np.empty((n, n_prep, n_meas))
        for i in range(n):
            k = int(rng.integers(2, max_components + 1))
            w = rng.dirichlet(np.ones(k))
            out[i] = np.tensordot(w, det_tabs[rng.integers(len(det_tabs), size=k)], axes=1)
        return out
    n_preps = d**n_prep
    preps = np.array(list(itertools.product(range(d), repeat=n_prep)), dtype=int).reshape(-1, n_prep)
    onehot = np.eye(d)[preps]  # (prep_map, x, m): message distribution per prep map
    bits = np.array(list(itertools.product((0, 1), repeat=d * n_meas)), dtype=int).reshape(-1, d, n_meas)
    out = np.empty((n, n_prep, n_meas))
    for i in range(n):
        k = int(rng.integers(2, max_components + 1))
        a = rng.dirichlet(np.ones(k))
        msg = np.tensordot(a, onehot[rng.integers(n_preps, size=k)], axes=1)  # P(m|x)
        l = int(rng.integers(2, max_components + 1))
        b = rng.dirichlet(np.ones(l))
        p0 = np.tensordot(b, 1 - bits[rng.integers(len(bits), size=l)], axes=1)  # P(D=0|m,y)
        out[i] = msg @ p0
    return out


def _values(kind: WitnessKind, tables: np.ndarray) -> np.ndarray:
    if kind is WitnessKind.LINEAR:
        return linear_value(tables)
    return np.abs(_det(witness_matrix(tables)))


@dataclass(frozen=True)
class BoundReport:
    kind: WitnessKind
    n_prep: int
    n_meas: int
    dim: int
    n_strategies: int
    n_mixtures: int
    max_deterministic: float
    max_mixture: float | None
    mixture_mode: str

    @property
    def value(self) -> float:
        if self.max_mixture is None:
            return self.max_deterministic
        return max(self.max_deterministic, self.max_mixture)


def classical_search(kind, n_prep: int, n_meas: int, d: int, n_random_mixtures: int = 0, seed: int = MIXTURE_SEED, mixture_mode: str = "independent") -> BoundReport:
    kind = WitnessKind.parse(kind)
    tabs = _deterministic_tables(n_prep, n_meas, d)
    det_max = float(np.max(_values(kind, tabs)))
    mix_max = None
    if n_random_mixtures > 0:
        rng = np.random.default_rng(seed)
        mix = _random_mixture_tables(rng, n_prep, n_meas, d, n_random_mixtures, mixture_mode)
        mix_max = float(np.max(_values(kind, mix)))
    return BoundReport(kind, n_prep, n_meas, d, len(tabs), n_random_mixtures, det_max, mix_max, mixture_mode)


def classical_max(kind, n_prep: int, n_meas: int, d: int, n_random_mixtures: int = 0, seed: int = MIXTURE_SEED, mixture_mode: str = "independent") -> float:
    """Largest witness value found over all deterministic strategies and sampled mixtures."""
    return classical_search(kind, n_prep, n_meas, d, n_random_mixtures, seed, mixture_mode).value

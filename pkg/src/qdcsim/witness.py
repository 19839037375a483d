"""Prepare-and-measure probability tables and dimension witnesses.

A table entry ``p[x, y]`` is the probability of a ``D0`` click for preparation
phase ``preparations[x]`` and measurement phase ``measurements[y]``.

Two witnesses are provided:

* nonlinear: ``|det W_k|`` with ``W_k[i, j] = p(2j, i) - p(2j+1, i)``; zero for
  any classical message of dimension ``d <= k`` (no preparer/measurer correlation);
* linear: ``E00 + E01 + E10 - E11 - E20 <= 3`` with ``E_xy = 2 p(x, y) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .analysis import detect_prob
from .circuits import QdcParams, qdc_amplitudes, qdc_state

LINEAR_BOUND = 3.0
QUANTUM_LINEAR_MAX = 1 + 2 * math.sqrt(2)
VIOLATION_ATOL = 1e-9

# (x, y, sign) terms of the linear witness
LINEAR_TERMS = ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1), (2, 0, -1))


class WitnessKind(str, Enum):
    NONLINEAR = "nonlinear_det"
    LINEAR = "linear_idw"

    @classmethod
    def parse(cls, value) -> WitnessKind:
        if isinstance(value, cls):
            return value
        aliases = {"nonlinear": cls.NONLINEAR, "det": cls.NONLINEAR, "linear": cls.LINEAR, "idw": cls.LINEAR}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown witness kind {value!r}") from None


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class PamSettings:
    preparations: tuple[float, ...]
    measurements: tuple[float, ...]
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "preparations", tuple(float(v) for v in self.preparations))
        object.__setattr__(self, "measurements", tuple(float(v) for v in self.measurements))
        if len(self.measurements) < 2:
            raise ValueError("need at least two measurement settings")
        if len(self.preparations) < 3:
            raise ValueError("need at least three preparations")
        if not all(math.isfinite(v) for v in (*self.preparations, *self.measurements, self.theta)):
            raise ValueError("settings must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.preparations), len(self.measurements)


def nonlinear_settings(phi: float, theta: float) -> PamSettings:
    """Default family: preparations ``phi, 2phi, 3phi, 4phi``; measurements ``0, pi/2``."""
    return PamSettings((phi, 2 * phi, 3 * phi, 4 * phi), (0.0, math.pi / 2), theta)


def linear_settings(phi: float, theta: float) -> PamSettings:
    """Default family: preparations ``phi, -phi, pi``; measurements ``0, pi/2``."""
    return PamSettings((phi, -phi, math.pi), (0.0, math.pi / 2), theta)


def default_settings(kind, phi: float, theta: float) -> PamSettings:
    kind = WitnessKind.parse(kind)
    return nonlinear_settings(phi, theta) if kind is WitnessKind.NONLINEAR else linear_settings(phi, theta)


@dataclass(frozen=True, eq=False)
class ProbTable:
    p: np.ndarray
    provenance: str = "analytic"
    stderr: np.ndarray | None = None

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2:
            raise ShapeError("probability table must be two-dimensional")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if self.stderr is not None:
            se = np.array(self.stderr, dtype=float)
            if se.shape != p.shape:
                raise ShapeError("stderr shape must match the table")
            se.setflags(write=False)
            object.__setattr__(self, "stderr", se)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape


@dataclass(frozen=True, eq=False)
class WitnessResult:
    kind: WitnessKind
    value: float
    matrix: np.ndarray | None = None
    settings: PamSettings | None = None
    uncertainty: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return is_violated(self.kind, self.value)


def is_violated(kind, value: float) -> bool:
    kind = WitnessKind.parse(kind)
    bound = 0.0 if kind is WitnessKind.NONLINEAR else LINEAR_BOUND
    return value > bound + VIOLATION_ATOL


def prob_table(settings: PamSettings) -> ProbTable:
    """Simulate every (preparation, measurement) pair through the circuit."""
    p = [
        [detect_prob(qdc_state(QdcParams(settings.theta, px, py)), 0) for py in settings.measurements]
        for px in settings.preparations
    ]
    return ProbTable(np.array(p), "analytic")


def prob_table_closed_form(settings: PamSettings) -> np.ndarray:
    dphi = np.subtract.outer(settings.preparations, settings.measurements)
    return 0.5 * (1 + math.sin(2 * settings.theta) * np.cos(dphi))


def _batch_tables(preps: np.ndarray, meas: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Circuit-evolved tables for stacked settings; ``preps[..., x]``, ``meas[..., y]``."""
    amps = qdc_amplitudes(theta[..., None, None], preps[..., :, None], meas[..., None, :])
    return np.abs(amps[..., 0]) ** 2


def witness_matrix(p: np.ndarray) -> np.ndarray:
    """``W[i, j] = p(2j, i) - p(2j+1, i)`` for a ``2k x k`` table (leading batch axes allowed)."""
    p = np.asarray(p, dtype=float)
    n_prep, n_meas = p.shape[-2:]
    if n_prep != 2 * n_meas:
        raise ShapeError(f"nonlinear witness needs 2k preparations and k measurements, got {n_prep}x{n_meas}")
    return np.swapaxes(p[..., 0::2, :] - p[..., 1::2, :], -1, -2)


def _det(w: np.ndarray) -> np.ndarray:
    if w.shape[-1] == 2:
        return w[..., 0, 0] * w[..., 1, 1] - w[..., 0, 1] * w[..., 1, 0]
    return np.linalg.det(w)


def nonlinear_witness(t: ProbTable, settings: PamSettings | None = None) -> WitnessResult:
    w = witness_matrix(t.p)
    return WitnessResult(WitnessKind.NONLINEAR, float(abs(_det(w))), w, settings)


def linear_value(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-2] < 3 or p.shape[-1] < 2:
        raise ShapeError(f"linear witness needs >=3 preparations and >=2 measurements, got {p.shape[-2:]}")
    return sum(sign * (2 * p[..., x, y] - 1) for x, y, sign in LINEAR_TERMS)


def linear_witness(t: ProbTable, settings: PamSettings | None = None) -> WitnessResult:
    return WitnessResult(WitnessKind.LINEAR, float(linear_value(t.p)), None, settings)


def evaluate(kind, t: ProbTable, settings: PamSettings | None = None) -> WitnessResult:
    kind = WitnessKind.parse(kind)
    return nonlinear_witness(t, settings) if kind is WitnessKind.NONLINEAR else linear_witness(t, settings)


def witness_at(kind, phi: float, theta: float, settings: PamSettings | None = None) -> WitnessResult:
    settings = settings or default_settings(kind, phi, theta)
    return evaluate(kind, prob_table(settings), settings)


# closed forms, used as independent oracles


def det_closed_form_general(settings: PamSettings) -> float:
    """Determinant from the cosine expansion for four preparations and two measurements."""
    f, m, t = settings.preparations, settings.measurements, settings.theta
    c = lambda x, y: math.cos(f[x] - m[y])  # noqa: E731
    val = (c(0, 0) - c(1, 0)) * (c(2, 1) - c(3, 1)) - (c(2, 0) - c(3, 0)) * (c(0, 1) - c(1, 1))
    return abs(0.25 * math.sin(2 * t) ** 2 * val)


def det_closed_form(phi, theta):
    """``|sin^2(2t)/4 * (2 sin 2phi - sin phi - sin 3phi)|`` for the default family; broadcasts."""
    phi = np.asarray(phi, dtype=float)
    return np.abs(0.25 * np.sin(2 * np.asarray(theta)) ** 2 * (2 * np.sin(2 * phi) - np.sin(phi) - np.sin(3 * phi)))


def idw_closed_form_general(settings: PamSettings) -> float:
    f, m = settings.preparations, settings.measurements
    c = lambda x, y: math.cos(f[x] - m[y])  # noqa: E731
    return math.sin(2 * settings.theta) * (c(0, 0) + c(0, 1) + c(1, 0) - c(1, 1) - c(2, 0))


def idw_closed_form(phi, theta):
    """``sin 2t (2(cos phi + sin phi) + 1)`` for the default family; broadcasts."""
    phi = np.asarray(phi, dtype=float)
    return np.sin(2 * np.asarray(theta)) * (2 * (np.cos(phi) + np.sin(phi)) + 1)


@dataclass(frozen=True)
class SweepRow:
    phi: float
    theta: float
    value: float
    violated: bool
    matrix: tuple[tuple[float, ...], ...] | None = None


def sweep_values(kind, phis: Sequence[float], thetas: Sequence[float]):
    """Witness values on the grid as arrays ``(values[i_phi, i_theta], matrices|None)``.

    Tables are produced by evolving the circuit for every grid point in one
    batched pass over the default setting family.
    """
    kind = WitnessKind.parse(kind)
    phis = np.asarray(phis, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if phis.size == 0 or thetas.size == 0:
        raise ValueError("grids must be nonempty")
    pg, tg = np.meshgrid(phis, thetas, indexing="ij")
    if kind is WitnessKind.NONLINEAR:
        preps = pg[..., None] * np.arange(1, 5)
    else:
        preps = np.stack([pg, -pg, np.full_like(pg, math.pi)], axis=-1)
    meas = np.broadcast_to(np.array([0.0, math.pi / 2]), pg.shape + (2,))
    p = _batch_tables(preps, meas, tg)
    if kind is WitnessKind.NONLINEAR:
        w = witness_matrix(p)
        return np.abs(_det(w)), w
    return linear_value(p), None


def sweep_witness(kind, phis: Sequence[float], thetas: Sequence[float]) -> list[SweepRow]:
    """Rows in grid order (phi outer, theta inner)."""
    kind = WitnessKind.parse(kind)
    values, mats = sweep_values(kind, phis, thetas)
    rows = []
    for i, phi in enumerate(phis):
        for j, theta in enumerate(thetas):
            v = float(values[i, j])
            m = None if mats is None else tuple(tuple(float(x) for x in r) for r in mats[i, j])
            rows.append(SweepRow(float(phi), float(theta), v, is_violated(kind, v), m))
    return rows

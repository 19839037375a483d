"""Unitaries for the optical elements of the interferometers.

Every constructor returns an :class:`~qdcsim.state.ElementUnitary` acting on
the full space. Path-local elements are tensored with the identity on
polarization; polarization elements can be restricted to a set of paths
(``paths=``), which is how the arm-local rotators of the entangler are built.

Conventions:

* BS:  |0> -> (|0> + |1>)/sqrt2,  |1> -> (|0> - |1>)/sqrt2
* TBS: |0> -> cos t|0> + sin t|1>,  |1> -> sin t|0> - cos t|1>
* PR:  |H> -> cos r|H> + sin r|V>,  |V> -> sin r|H> - cos r|V>
* HWP at 22.5 deg: |H> -> (|H> + |V>)/sqrt2,  |V> -> (|H> - |V>)/sqrt2
* PBS: H transmitted, V swapped between the two coupled paths
* Mirrors carry no phase (identity).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .state import H, V, ElementUnitary, SpaceDescriptor

SQRT1_2 = 1 / math.sqrt(2)


class RegimeWarning(UserWarning):
    """An angle lies outside the [0, pi/4] range the experiment tunes over."""


def rotation_block(angle) -> np.ndarray:
    """Real reflection-rotation ``[[c, s], [s, -c]]``; broadcasts over ``angle``.

    Shared by TBS (on a path pair) and PR (on polarization).
    """
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty(angle.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = s
    out[..., 1, 1] = -c
    return out


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2


def _check_pair(space: SpaceDescriptor, pair: Sequence[int]) -> tuple[int, int]:
    if len(pair) != 2:
        raise ValueError(f"expected a pair of paths, got {pair!r}")
    a, b = (int(p) for p in pair)
    if a == b or not (0 <= a < space.path_dim and 0 <= b < space.path_dim):
        raise ValueError(f"invalid path pair {pair!r} for path_dim={space.path_dim}")
    return a, b


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


def _need_pol(space: SpaceDescriptor):
    if space.pol_dim != 2:
        raise ValueError("element acts on polarization but the space has none")


def _path_operator(space: SpaceDescriptor, pair: tuple[int, int], block: np.ndarray) -> np.ndarray:
    a, b = pair
    p = np.eye(space.path_dim, dtype=complex)
    p[a, a], p[a, b], p[b, a], p[b, b] = block[0, 0], block[0, 1], block[1, 0], block[1, 1]
    if space.pol_dim == 1:
        return p
    return np.kron(np.eye(space.pol_dim), p)


def _pol_operator(space: SpaceDescriptor, block: np.ndarray, paths: Iterable[int] | None) -> np.ndarray:
    if paths is None:
        return np.kron(block, np.eye(space.path_dim))
    mask = np.zeros(space.path_dim)
    for p in paths:
        if not 0 <= p < space.path_dim:
            raise ValueError(f"invalid path {p} for path_dim={space.path_dim}")
        mask[p] = 1
    on = np.diag(mask)
    return np.kron(block, on) + np.kron(np.eye(2), np.eye(space.path_dim) - on)


def check_regime(angle: float, name: str = "angle") -> bool:
    """True if ``angle`` is in [0, pi/4].

    Angles in (pi/4, pi/2] are accepted with a :class:`RegimeWarning`;
    anything else raises.
    """
    eps = 1e-12
    if -eps <= angle <= math.pi / 4 + eps:
        return True
    if angle <= math.pi / 2 + eps:
        warnings.warn(f"{name}={angle:.6g} is outside [0, pi/4]", RegimeWarning, stacklevel=2)
        return False
    raise ValueError(f"{name}={angle!r} outside the allowed range [0, pi/2]")


def identity(space: SpaceDescriptor) -> ElementUnitary:
    return ElementUnitary(space, np.eye(space.dim), "I")


def mirror(space: SpaceDescriptor) -> ElementUnitary:
    return ElementUnitary(space, np.eye(space.dim), "MR")


def bs(space: SpaceDescriptor, path_pair: Sequence[int] = (0, 1)) -> ElementUnitary:
    pair = _check_pair(space, path_pair)
    return ElementUnitary(space, _path_operator(space, pair, HADAMARD), f"BS{pair}")


def tbs(space: SpaceDescriptor, theta: float, path_pair: Sequence[int] = (0, 1)) -> ElementUnitary:
    _check_finite(theta=theta)
    pair = _check_pair(space, path_pair)
    return ElementUnitary(space, _path_operator(space, pair, rotation_block(theta)), f"TBS{pair}")


def phase_path(space: SpaceDescriptor, path: int, value: float) -> ElementUnitary:
    _check_finite(value=value)
    if not 0 <= path < space.path_dim:
        raise ValueError(f"invalid path {path} for path_dim={space.path_dim}")
    d = np.ones(space.path_dim, dtype=complex)
    d[path] = np.exp(1j * value)
    return ElementUnitary(space, np.diag(np.tile(d, space.pol_dim)), f"PS[{path}]")


def phase_pol(space: SpaceDescriptor, pol: int, value: float, paths: Iterable[int] | None = None) -> ElementUnitary:
    _need_pol(space)
    _check_finite(value=value)
    if pol not in (H, V):
        raise ValueError(f"pol must be H (0) or V (1), got {pol!r}")
    d = np.ones(2, dtype=complex)
    d[pol] = np.exp(1j * value)
    return ElementUnitary(space, _pol_operator(space, np.diag(d), paths), f"PS[{'HV'[pol]}]")


def pr(space: SpaceDescriptor, angle: float, paths: Iterable[int] | None = None) -> ElementUnitary:
    """Polarization rotator, optionally confined to ``paths``."""
    _need_pol(space)
    _check_finite(angle=angle)
    return ElementUnitary(space, _pol_operator(space, rotation_block(angle), paths), "PR")


def pbs(space: SpaceDescriptor, path_pair: Sequence[int] = (0, 1)) -> ElementUnitary:
    """|H,p> -> |H,p>;  |V,p> <-> |V,p'> for the coupled pair (p, p')."""
    _need_pol(space)
    a, b = _check_pair(space, path_pair)
    m = np.eye(space.dim, dtype=complex)
    va, vb = space.index(a, V), space.index(b, V)
    m[[va, vb]] = m[[vb, va]]
    return ElementUnitary(space, m, f"PBS{(a, b)}")


def hwp225(space: SpaceDescriptor, paths: Iterable[int] | None = None) -> ElementUnitary:
    _need_pol(space)
    return ElementUnitary(space, _pol_operator(space, HADAMARD, paths), "HWP22.5")


def sigma_z(space: SpaceDescriptor, paths: Iterable[int] | None = None) -> ElementUnitary:
    _need_pol(space)
    return ElementUnitary(space, _pol_operator(space, np.diag([1, -1]).astype(complex), paths), "SZ")


class Kind(str, Enum):
    BS = "BS"
    TBS = "TBS"
    PHASE_PATH = "PhaseShifterPath"
    PHASE_POL = "PhaseShifterPol"
    PBS = "PBS"
    PR = "PR"
    HWP225 = "HWP225"
    SIGMA_Z = "SigmaZ"
    MIRROR = "Mirror"


@dataclass(frozen=True)
class ElementSpec:
    """Declarative description of one element; ``build`` turns it into a unitary.

    ``paths`` is the path pair for BS/TBS/PBS, the target path (single entry)
    for a path phase shifter, and an optional mask for polarization elements.
    """

    kind: Kind
    value: float = 0.0
    paths: tuple[int, ...] | None = None
    pol: int = V

    @property
    def in_tuning_range(self) -> bool:
        if self.kind in (Kind.TBS, Kind.PR):
            return -1e-12 <= self.value <= math.pi / 4 + 1e-12
        return True

    def build(self, space: SpaceDescriptor) -> ElementUnitary:
        k, v, p = self.kind, self.value, self.paths
        if k in (Kind.TBS, Kind.PR):
            check_regime(v, k.value)
        if k is Kind.BS:
            return bs(space, p or (0, 1))
        if k is Kind.TBS:
            return tbs(space, v, p or (0, 1))
        if k is Kind.PHASE_PATH:
            if not p or len(p) != 1:
                raise ValueError("PhaseShifterPath needs exactly one target path")
            return phase_path(space, p[0], v)
        if k is Kind.PHASE_POL:
            return phase_pol(space, self.pol, v, p)
        if k is Kind.PBS:
            return pbs(space, p or (0, 1))
        if k is Kind.PR:
            return pr(space, v, p)
        if k is Kind.HWP225:
            return hwp225(space, p)
        if k is Kind.SIGMA_Z:
            return sigma_z(space, p)
        if k is Kind.MIRROR:
            return mirror(space)
        raise ValueError(f"unknown element kind {k!r}")

"""End-to-end interferometer circuits and their closed-form final states.

Each builder composes element unitaries from :mod:`qdcsim.elements`; the
``*_closed_form`` functions evaluate the final-state expressions directly and
serve as independent oracles for the composed circuits.

Entangler layout (8-dim space, 4 paths, input ``(|H>+|V>)|1>/sqrt2``)::

    PBS(1,0)                 H stays on path 1, V is routed to path 0
    HWP(path 1)              path 1: H -> (H+V)/sqrt2
    HWP(path 0), SZ(path 0)  path 0: V -> (H-V)/sqrt2 -> (H+V)/sqrt2
    BS(0,2), BS(1,3)         open the two hybrid interferometers
    PS phi on paths 2, 3     path phase
    PS phi' on V             polarization phase (a PBS-split arm in the lab)
    PR(r1) on {0,2}, PR(r2) on {1,3}
    TBS(t1) on (0,2), TBS(t2) on (1,3)

The first three lines use the two half-wave plates and the pi phase shifter
to turn the single input mode into the product
``(|H>+|V>)/sqrt2 (x) (|0>+|1>)/sqrt2``; everything after that is two copies of
the hybrid circuit, one on arms {0,2} and one on arms {1,3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from . import elements as el
from .state import ENTANGLER, HYBRID, PATH2, H, V, PureState, apply_all, basis_state, make_state

SQRT1_2 = 1 / math.sqrt(2)


class _Params:
    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")


@dataclass(frozen=True)
class QdcParams(_Params):
    """Single-photon circuit: TBS angle, preparation phase, measurement phase."""

    theta: float
    phi: float
    phi_m: float = 0.0


@dataclass(frozen=True)
class HybridParams(_Params):
    theta: float
    rot: float
    phi: float
    phi_pol: float


@dataclass(frozen=True)
class EntanglerParams(_Params):
    rot1: float
    rot2: float
    theta1: float
    theta2: float
    phi: float
    phi_pol: float


def qdc_elements(p: QdcParams):
    s = PATH2
    return [
        el.bs(s),
        el.phase_path(s, 1, p.phi),
        el.mirror(s),
        el.phase_path(s, 0, p.phi_m),
        el.tbs(s, p.theta),
    ]


def qdc_state(p: QdcParams) -> PureState:
    return apply_all(qdc_elements(p), basis_state(PATH2, 0))


def qdc_closed_form(theta, phi, phi_m=0.0) -> np.ndarray:
    """Final amplitudes ``[a0, a1]`` of the single-photon circuit; broadcasts."""
    theta, phi, phi_m = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (theta, phi, phi_m)))
    em, ep = np.exp(1j * phi_m), np.exp(1j * phi)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([em * c + ep * s, em * s - ep * c], axis=-1) * SQRT1_2


def qdc_amplitudes(theta, phi, phi_m=0.0) -> np.ndarray:
    """Batched circuit evolution of ``|0>``; shape ``broadcast(...) + (2,)``.

    Uses the same element blocks as :func:`qdc_elements`, composed with
    broadcasting so a whole grid evolves in one pass.
    """
    theta, phi, phi_m = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (theta, phi, phi_m)))
    psi = el.HADAMARD @ np.array([1, 0], dtype=complex)
    phases = np.stack([np.exp(1j * phi_m), np.exp(1j * phi)], axis=-1)
    psi = phases * psi
    return np.einsum("...ij,...j->...i", el.rotation_block(theta), psi)


def hybrid_elements(p: HybridParams):
    s = HYBRID
    return [
        el.bs(s),
        el.phase_path(s, 1, p.phi),
        el.phase_pol(s, V, p.phi_pol),
        el.pr(s, p.rot),
        el.tbs(s, p.theta),
    ]


def hybrid_input() -> PureState:
    return make_state(HYBRID, [1, 0, 1, 0])


def hybrid_state(p: HybridParams) -> PureState:
    return apply_all(hybrid_elements(p), hybrid_input())


def pol_factor(rot, phi_pol) -> np.ndarray:
    """Unnormalized ``[(cos r + e^{i phi'} sin r), (sin r - e^{i phi'} cos r)]``."""
    e = np.exp(1j * phi_pol)
    return np.array([math.cos(rot) + e * math.sin(rot), math.sin(rot) - e * math.cos(rot)])


def path_factor(theta, phi) -> np.ndarray:
    e = np.exp(1j * phi)
    return np.array([math.cos(theta) + e * math.sin(theta), math.sin(theta) - e * math.cos(theta)])


def hybrid_closed_form(p: HybridParams) -> np.ndarray:
    return 0.5 * np.kron(pol_factor(p.rot, p.phi_pol), path_factor(p.theta, p.phi))


def entangler_elements(p: EntanglerParams):
    s = ENTANGLER
    return [
        el.pbs(s, (1, 0)),
        el.hwp225(s, paths=[1]),
        el.hwp225(s, paths=[0]),
        el.sigma_z(s, paths=[0]),
        el.bs(s, (0, 2)),
        el.bs(s, (1, 3)),
        el.phase_path(s, 2, p.phi),
        el.phase_path(s, 3, p.phi),
        el.phase_pol(s, V, p.phi_pol),
        el.pr(s, p.rot1, paths=[0, 2]),
        el.pr(s, p.rot2, paths=[1, 3]),
        el.tbs(s, p.theta1, (0, 2)),
        el.tbs(s, p.theta2, (1, 3)),
    ]


def entangler_input() -> PureState:
    amps = np.zeros(ENTANGLER.dim, dtype=complex)
    amps[ENTANGLER.index(1, H)] = 1
    amps[ENTANGLER.index(1, V)] = 1
    return make_state(ENTANGLER, amps)


def entangler_state(p: EntanglerParams) -> PureState:
    return apply_all(entangler_elements(p), entangler_input())


def entangler_closed_form(p: EntanglerParams) -> np.ndarray:
    def arm(theta, lo, hi):
        f = path_factor(theta, p.phi)
        v = np.zeros(4, dtype=complex)
        v[lo], v[hi] = f
        return v

    branch1 = np.kron(pol_factor(p.rot1, p.phi_pol), arm(p.theta1, 0, 2))
    branch2 = np.kron(pol_factor(p.rot2, p.phi_pol), arm(p.theta2, 1, 3))
    return (branch1 + branch2) / (2 * math.sqrt(2))


def bell_entangler_params(phi: float = math.pi / 3, phi_pol: float = math.pi / 3) -> EntanglerParams:
    """Settings producing the wave-particle entangled state."""
    return EntanglerParams(rot1=0.0, rot2=math.pi / 4, theta1=math.pi / 4, theta2=0.0, phi=phi, phi_pol=phi_pol)

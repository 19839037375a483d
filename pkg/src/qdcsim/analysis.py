"""Detection probabilities, fringe visibility, wave/particle decomposition, concurrence."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import QdcParams, qdc_amplitudes, qdc_state
from .state import PATH2, PureState, QdcError, SpaceDescriptor, make_state

# Condition-number ceiling for the {particle, wave} basis. cond ~ 2.83/|cos phi|,
# so this rejects only |cos phi| < ~3e-8 around phi = +-pi/2.
DEGENERACY_COND = 1e8


class DegenerateBasisError(QdcError, ValueError):
    """The particle and wave states are (numerically) parallel."""


def particle_vec(phi: float) -> np.ndarray:
    return np.array([1, -np.exp(1j * phi)]) / math.sqrt(2)


def wave_vec(phi: float) -> np.ndarray:
    return np.exp(1j * phi / 2) * np.array([math.cos(phi / 2), -1j * math.sin(phi / 2)])


@dataclass(frozen=True)
class WPBasis:
    phi: float
    particle: PureState
    wave: PureState
    overlap: complex


def wp_basis(phi: float) -> WPBasis:
    """Particle/wave pair on a two-level system at phase ``phi``.

    The same vectors serve the polarization DOF with ``|H>, |V>`` in place
    of ``|0>, |1>``.
    """
    p = PureState(PATH2, particle_vec(phi))
    w = PureState(PATH2, wave_vec(phi))
    return WPBasis(phi, p, w, complex(np.vdot(p.amplitudes, w.amplitudes)))


def detect_prob(s: PureState, path: int) -> float:
    """Probability that the detector on ``path`` clicks (summed over polarization)."""
    if not 0 <= path < s.space.path_dim:
        raise ValueError(f"invalid path {path} for path_dim={s.space.path_dim}")
    return float(np.sum(np.abs(s.matrix[:, path]) ** 2))


def intensity(theta, phi):
    """Closed-form ``D0`` click probability ``(1 + sin 2t cos phi)/2``; broadcasts."""
    return 0.5 * (1 + np.sin(2 * np.asarray(theta)) * np.cos(phi))


def morphing_grid(phis, thetas) -> np.ndarray:
    """Simulated ``D0`` probability, ``out[i_phi, i_theta]``, from one batched circuit pass."""
    phis = np.asarray(phis, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    amps = qdc_amplitudes(thetas[None, :], phis[:, None])
    return np.abs(amps[..., 0]) ** 2


def visibility(theta: float) -> float:
    return math.sin(2 * theta)


def fringe_visibility(intensities) -> float:
    """(max - min)/(max + min) over sampled intensities; extrema are grid values."""
    a = np.asarray(intensities, dtype=float)
    if a.size < 3:
        raise ValueError("need at least 3 sweep points")
    hi, lo = a.max(), a.min()
    if hi + lo == 0:
        raise ValueError("degenerate sweep: all intensities are zero")
    return float((hi - lo) / (hi + lo))


def visibility_empirical(theta: float, phis=None) -> float:
    """Visibility read off a phase sweep of the simulated circuit (361 points by default)."""
    if phis is None:
        phis = np.linspace(0, 2 * np.pi, 361)
    return fringe_visibility([detect_prob(qdc_state(QdcParams(theta, float(p))), 0) for p in phis])


def wp_decompose(s: PureState, phi: float, max_cond: float = DEGENERACY_COND) -> tuple[complex, complex]:
    """Coefficients ``(alpha, beta)`` with ``s = alpha*particle + beta*wave``.

    Raises
    ------
    DegenerateBasisError
        Near ``phi = +-pi/2`` where the two basis states coincide.
    """
    if s.space != PATH2:
        raise ValueError("wp_decompose expects a two-path state without polarization")
    b = np.column_stack([particle_vec(phi), wave_vec(phi)])
    cond = np.linalg.cond(b)
    if not cond < max_cond:
        raise DegenerateBasisError(f"particle/wave basis degenerate at phi={phi:.6g} (cond={cond:.3g})")
    alpha, beta = np.linalg.solve(b, s.amplitudes)
    resid = np.linalg.norm(s.amplitudes - b @ [alpha, beta])
    if resid > 1e-10:
        raise DegenerateBasisError(f"decomposition residual {resid:.3g} too large")
    return complex(alpha), complex(beta)


@dataclass(frozen=True)
class ConcurrenceReport:
    physical: float
    logical: float | None
    schmidt_coefficients: np.ndarray
    logical_coefficients: np.ndarray | None = None
    logical_labels: tuple[tuple[str, ...], tuple[str, ...]] | None = None


def _path_frame(space: SpaceDescriptor, phi: float):
    """Columns spanning path space with particle/wave states, and their labels."""
    if space.path_dim == 2:
        return np.column_stack([particle_vec(phi), wave_vec(phi)]), ("particle", "wave")
    cols, labels = [], []
    for lo, hi in ((0, 2), (1, 3)):
        for name, vec in (("particle", particle_vec(phi)), ("wave", wave_vec(phi))):
            c = np.zeros(4, dtype=complex)
            c[[lo, hi]] = vec
            cols.append(c)
            labels.append(f"{name}[{lo},{hi}]")
    return np.column_stack(cols), tuple(labels)


def _from_purity(rho: np.ndarray) -> float:
    purity = float(np.real(np.trace(rho @ rho)))
    return math.sqrt(max(0.0, 2 * (1 - purity)))


def concurrence_from_matrix(m: np.ndarray) -> float:
    """Pure-state concurrence sqrt(2(1 - Tr rho_A^2)) of a normalized coefficient matrix."""
    return _from_purity(m @ m.conj().T)


def concurrence_from_schmidt(sv) -> float:
    """``2 s1 s2``: equal to the purity form for a qubit factor, and accurate near zero
    where the purity form loses about half the digits to the square root."""
    sv = np.sort(np.asarray(sv, dtype=float))[::-1]
    return float(2 * sv[0] * sv[1]) if sv.size > 1 else 0.0


def logical_frame(s: PureState, phi: float, phi_pol: float, max_cond: float = DEGENERACY_COND):
    """Coefficients of ``s`` in formal orthonormal particle/wave labels per DOF.

    Returns ``(L, labels)`` with ``L[pol_label, path_label]`` renormalized to unit
    Frobenius norm, or raises :class:`DegenerateBasisError`.
    """
    if s.space.pol_dim != 2:
        raise ValueError("logical frame needs both polarization and path")
    a_pol = np.column_stack([particle_vec(phi_pol), wave_vec(phi_pol)])
    a_path, path_labels = _path_frame(s.space, phi)
    for a in (a_pol, a_path):
        if not np.linalg.cond(a) < max_cond:
            raise DegenerateBasisError("particle/wave frame is degenerate at these phases")
    m = s.matrix
    lmat = np.linalg.solve(a_pol, m)
    lmat = np.linalg.solve(a_path, lmat.T).T
    resid = np.linalg.norm(a_pol @ lmat @ a_path.T - m)
    if resid > 1e-10:
        raise DegenerateBasisError(f"logical-frame residual {resid:.3g}")
    lmat = lmat / np.linalg.norm(lmat)
    return lmat, (("particle", "wave"), path_labels)


def concurrence(s: PureState, cut: str = "pol|path", phi: float | None = None, phi_pol: float | None = None) -> ConcurrenceReport:
    """Entanglement across the polarization|path cut.

    ``physical`` uses the actual state (Schmidt form; :func:`concurrence_from_purity`
    gives the reduced-state route); ``logical`` re-expresses it with the
    particle and wave states of each DOF treated as orthonormal labels. The
    logical value needs the frame phases ``phi`` (path) and ``phi_pol``; it is
    ``None`` when they are not given or the frame is degenerate.
    """
    if cut != "pol|path":
        raise ValueError(f"unsupported cut {cut!r}")
    if s.space.pol_dim != 2:
        raise ValueError("concurrence needs a state with polarization and path")
    schmidt = np.linalg.svd(s.matrix, compute_uv=False)
    physical = concurrence_from_schmidt(schmidt)
    logical = lmat = labels = None
    if phi is not None and phi_pol is not None:
        try:
            lmat, labels = logical_frame(s, phi, phi_pol)
        except DegenerateBasisError:
            pass
        else:
            if lmat.shape == (2, 2):
                logical = float(2 * abs(lmat[0, 0] * lmat[1, 1] - lmat[0, 1] * lmat[1, 0]))
            else:
                logical = concurrence_from_schmidt(np.linalg.svd(lmat, compute_uv=False))
    return ConcurrenceReport(physical, logical, schmidt, lmat, labels)


def concurrence_from_purity(s: PureState) -> float:
    return _from_purity(reduced_pol(s))


def reduced_pol(s: PureState) -> np.ndarray:
    """Polarization density matrix via explicit partial trace over paths."""
    pd, qd = s.space.pol_dim, s.space.path_dim
    rho = np.zeros((pd, pd), dtype=complex)
    a = s.amplitudes
    for i in range(pd):
        for j in range(pd):
            rho[i, j] = sum(a[i * qd + k] * np.conj(a[j * qd + k]) for k in range(qd))
    return rho


def as_path_state(amplitudes) -> PureState:
    return make_state(PATH2, amplitudes)

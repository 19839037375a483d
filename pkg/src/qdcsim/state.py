"""Pure states and unitaries on small path (x) polarization Hilbert spaces.

Basis ordering is polarization-major::

    index = pol_index * path_dim + path_index      (pol_index 0 = H, 1 = V)

so ``amplitudes.reshape(pol_dim, path_dim)`` yields the amplitude matrix
``M[pol, path]`` used for partial traces and Schmidt decompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10

H, V = 0, 1


class QdcError(Exception):
    """Base class for errors raised by qdcsim."""


class SpaceMismatchError(QdcError, ValueError):
    pass


@dataclass(frozen=True)
class SpaceDescriptor:
    path_dim: int
    pol_dim: int = 1

    def __post_init__(self):
        if self.path_dim not in (2, 4):
            raise ValueError(f"path_dim must be 2 or 4, got {self.path_dim}")
        if self.pol_dim not in (1, 2):
            raise ValueError(f"pol_dim must be 1 or 2, got {self.pol_dim}")

    @property
    def dim(self) -> int:
        return self.path_dim * self.pol_dim

    def index(self, path: int, pol: int = H) -> int:
        if not 0 <= path < self.path_dim:
            raise ValueError(f"path index {path} out of range for path_dim={self.path_dim}")
        if not 0 <= pol < self.pol_dim:
            raise ValueError(f"pol index {pol} out of range for pol_dim={self.pol_dim}")
        return pol * self.path_dim + path

    def label(self, i: int) -> str:
        pol, path = divmod(i, self.path_dim)
        if self.pol_dim == 1:
            return f"|{path}>"
        return f"|{'HV'[pol]},{path}>"


PATH2 = SpaceDescriptor(2, 1)
HYBRID = SpaceDescriptor(2, 2)
ENTANGLER = SpaceDescriptor(4, 2)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector. Construct through :func:`make_state`."""

    space: SpaceDescriptor
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _readonly(self.amplitudes))

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes arranged as ``M[pol, path]``."""
        return self.amplitudes.reshape(self.space.pol_dim, self.space.path_dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        terms = [
            f"({a.real:+.4g}{a.imag:+.4g}j){self.space.label(i)}"
            for i, a in enumerate(self.amplitudes)
            if abs(a) > 1e-12
        ]
        return "PureState(" + " ".join(terms) + ")"


@dataclass(frozen=True, eq=False)
class ElementUnitary:
    space: SpaceDescriptor
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatchError(
                f"matrix shape {m.shape} does not match space dimension {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(len(m)), "fro"))

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_error() < tol

    def __matmul__(self, other: ElementUnitary) -> ElementUnitary:
        return matmul(self, other)


def make_state(space: SpaceDescriptor, amplitudes) -> PureState:
    """Normalize ``amplitudes`` into a state on ``space``.

    Raises
    ------
    SpaceMismatchError
        If the vector length differs from ``space.dim``.
    ValueError
        If the vector is zero.
    """
    vec = np.asarray(amplitudes, dtype=complex).ravel()
    if vec.shape != (space.dim,):
        raise SpaceMismatchError(f"expected {space.dim} amplitudes, got {vec.size}")
    n = np.linalg.norm(vec)
    if not np.isfinite(n) or n == 0:
        raise ValueError("cannot normalize a zero or non-finite vector")
    return PureState(space, vec / n)


def basis_state(space: SpaceDescriptor, path: int, pol: int = H) -> PureState:
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(path, pol)] = 1
    return PureState(space, vec)


def product_state(pol_vec, path_vec) -> PureState:
    """Normalized ``pol (x) path`` product in the pol-major ordering."""
    pol_vec = np.asarray(pol_vec, dtype=complex)
    path_vec = np.asarray(path_vec, dtype=complex)
    space = SpaceDescriptor(len(path_vec), len(pol_vec))
    return make_state(space, np.kron(pol_vec, path_vec))


def _check_space(a: SpaceDescriptor, b: SpaceDescriptor):
    if a != b:
        raise SpaceMismatchError(f"space mismatch: {a} vs {b}")


def apply(u: ElementUnitary, s: PureState) -> PureState:
    _check_space(u.space, s.space)
    out = u.matrix @ s.amplitudes
    # renormalize away floating drift only; real non-unitarity is caught by tests
    return PureState(s.space, out / math.sqrt(np.vdot(out, out).real))


def apply_all(elements, s: PureState) -> PureState:
    """Apply ``elements`` in order (first element acts first)."""
    for u in elements:
        s = apply(u, s)
    return s


def matmul(u2: ElementUnitary, u1: ElementUnitary) -> ElementUnitary:
    """Composite ``u2 . u1`` (``u1`` acts first)."""
    _check_space(u2.space, u1.space)
    name = f"{u2.name}*{u1.name}" if u1.name and u2.name else ""
    return ElementUnitary(u1.space, u2.matrix @ u1.matrix, name)


def compose(elements) -> ElementUnitary:
    elements = list(elements)
    total = ElementUnitary(elements[0].space, np.eye(elements[0].space.dim), "I")
    for u in elements:
        total = matmul(u, total)
    return total


def inner(a: PureState, b: PureState) -> complex:
    """``<a|b>``."""
    _check_space(a.space, b.space)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: PureState, b: PureState) -> float:
    return abs(inner(a, b)) ** 2


def canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate ``vec`` so its largest-magnitude entry is real and positive.

    Ties in magnitude are broken by the lowest index, after rounding
    magnitudes to 12 decimals so that numerically equal entries tie.
    """
    vec = np.asarray(vec, dtype=complex)
    mags = np.round(np.abs(vec), 12)
    k = int(np.argmax(mags))
    if mags[k] == 0:
        return vec.copy()
    return vec * (abs(vec[k]) / vec[k])


def equal_up_to_phase(a, b, atol: float = 1e-12) -> bool:
    """Elementwise equality after removing one global phase from each side."""
    va = a.amplitudes if isinstance(a, PureState) else np.asarray(a, dtype=complex)
    vb = b.amplitudes if isinstance(b, PureState) else np.asarray(b, dtype=complex)
    if va.shape != vb.shape:
        return False
    # align b onto a through their overlap; robust to near-tied largest entries
    ov = np.vdot(vb, va)
    if abs(ov) < 1e-15:
        return bool(np.allclose(va, vb, rtol=0, atol=atol))
    return bool(np.allclose(va, vb * (ov / abs(ov)), rtol=0, atol=atol))

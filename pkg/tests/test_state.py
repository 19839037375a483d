import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdcsim import elements as el
from qdcsim.analysis import particle_vec, wave_vec
from qdcsim.state import (
    HYBRID,
    PATH2,
    ElementUnitary,
    PureState,
    SpaceDescriptor,
    SpaceMismatchError,
    apply,
    basis_state,
    canonical_phase,
    compose,
    equal_up_to_phase,
    inner,
    make_state,
    matmul,
)

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def test_make_state_basis():
    s = make_state(PATH2, [1, 0])
    np.testing.assert_allclose(s.amplitudes, [1, 0])


def test_make_state_renormalizes():
    s = make_state(PATH2, [2, 0])
    np.testing.assert_allclose(s.amplitudes, [1, 0])


def test_make_state_pol_superposition():
    s = make_state(HYBRID, np.array([1, 0, 1, 0]) / math.sqrt(2))
    np.testing.assert_allclose(s.matrix, [[1 / math.sqrt(2), 0], [1 / math.sqrt(2), 0]])


@pytest.mark.parametrize("amps", [[1, 0, 0], [0, 0]])
def test_make_state_errors(amps):
    with pytest.raises(ValueError):
        make_state(PATH2, amps)


def test_space_descriptor_validation():
    assert SpaceDescriptor(4, 2).dim == 8
    assert SpaceDescriptor(4, 2).index(3, 1) == 7
    with pytest.raises(ValueError):
        SpaceDescriptor(3, 1)
    with pytest.raises(ValueError):
        SpaceDescriptor(2, 3)


def test_states_are_immutable():
    s = basis_state(PATH2, 0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2


def test_apply_identity_and_bs():
    s = basis_state(PATH2, 0)
    assert equal_up_to_phase(apply(el.identity(PATH2), s), s)
    np.testing.assert_allclose(apply(el.bs(PATH2), s).amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-15)


def test_apply_tbs_zero_flips_relative_sign():
    phi = 0.7
    s = make_state(PATH2, [1, cmath.exp(1j * phi)])
    out = apply(el.tbs(PATH2, 0.0), s)
    np.testing.assert_allclose(out.amplitudes, np.array([1, -cmath.exp(1j * phi)]) / math.sqrt(2), atol=1e-15)


def test_apply_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        apply(el.bs(HYBRID), basis_state(PATH2, 0))


def test_inner_basis():
    assert inner(basis_state(PATH2, 0), basis_state(PATH2, 0)) == 1
    assert inner(basis_state(PATH2, 0), basis_state(PATH2, 1)) == 0
    with pytest.raises(SpaceMismatchError):
        inner(basis_state(PATH2, 0), basis_state(HYBRID, 0))


def test_inner_particle_wave_symbolic_oracle():
    # expand both definitions symbolically, then compare on a grid
    import sympy as sp

    phi = sp.symbols("phi", real=True)
    part = sp.Matrix([1, -sp.exp(sp.I * phi)]) / sp.sqrt(2)
    wave = sp.exp(sp.I * phi / 2) * sp.Matrix([sp.cos(phi / 2), -sp.I * sp.sin(phi / 2)])
    expr = (part.H * wave)[0]
    target = (1 + sp.I * sp.sin(phi)) / sp.sqrt(2)
    assert sp.simplify(sp.expand_complex(expr - target)) == 0
    f = sp.lambdify(phi, expr, "numpy")
    for p in np.linspace(-math.pi, math.pi, 73):
        got = inner(PureState(PATH2, particle_vec(p)), PureState(PATH2, wave_vec(p)))
        assert abs(got - complex(f(p))) < 1e-12
        assert abs(got - (1 + 1j * math.sin(p)) / math.sqrt(2)) < 1e-12


def _random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_norm_preserved_and_composition_associative(seed):
    rng = np.random.default_rng(seed)
    for space in (PATH2, HYBRID, SpaceDescriptor(4, 2)):
        u1 = ElementUnitary(space, _random_unitary(rng, space.dim))
        u2 = ElementUnitary(space, _random_unitary(rng, space.dim))
        s = make_state(space, rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim))
        out = apply(u2, apply(u1, s))
        assert abs(out.norm() - 1) < 1e-10
        np.testing.assert_allclose(out.amplitudes, apply(matmul(u2, u1), s).amplitudes, atol=1e-10)
        np.testing.assert_allclose(compose([u1, u2]).matrix, (u2 @ u1).matrix, atol=1e-12)


@given(angles, angles)
def test_equal_up_to_phase(a, b):
    v = np.array([0.6, 0.8j * cmath.exp(1j * a)])
    assert equal_up_to_phase(v, v * cmath.exp(1j * b))
    assert not equal_up_to_phase(v, np.array([0.8, 0.6]))


def test_canonical_phase_largest_entry_real_positive():
    v = np.array([0.1j, -0.9, 0.3])
    c = canonical_phase(v)
    assert c[1] == pytest.approx(0.9)
    assert abs(np.vdot(c, c) - 1.0 * np.vdot(v, v)) < 1e-15

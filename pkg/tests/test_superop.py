import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddmeas.linalg import ShapeError, local, pauli, projector, random_density, random_hermitian, random_unitary
from ddmeas.superop import (
    LinearMap,
    anticommutator_map,
    apply,
    compose,
    compose_all,
    conjugation_map,
    identity_map,
    kraus_map,
    lincomb,
    nonselective_measurement,
    pillar_errors,
    projection_map,
    pulse_map,
    repreparation_map,
    sandwich_map,
    unvec,
    vec,
)

seeds = st.integers(0, 2**32 - 1)
env_dims = st.sampled_from([1, 2, 4])
ZERO = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])


@given(seeds, st.integers(1, 5))
def test_vec_roundtrip_and_sandwich(seed, d):
    rng = np.random.default_rng(seed)
    a, b, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
    assert np.allclose(unvec(vec(x), d), x)
    assert np.allclose(sandwich_map(a, b)(x), a @ x @ b)


@given(seeds, env_dims)
def test_kraus_map_matches_direct_action(seed, e):
    rng = np.random.default_rng(seed)
    d = 2 * e
    u = random_unitary(rng, d)
    p = local(projector("x", 1), e)
    rho = random_density(rng, d)
    m = kraus_map([p @ u, (np.eye(d) - p) @ u])
    direct = p @ u @ rho @ u.conj().T @ p + (np.eye(d) - p) @ u @ rho @ u.conj().T @ (np.eye(d) - p)
    assert np.allclose(m(rho), direct)
    assert m.is_trace_preserving() and m.is_completely_positive()


def test_conjugation_examples(rng):
    e = 3
    rho_e = random_density(rng, e)
    assert conjugation_map(np.eye(2 * e)).distance(identity_map(2 * e)) == 0
    x = conjugation_map(local(pauli("x"), e))
    plus = np.kron(projector("x", 1), rho_e)
    assert np.allclose(x(plus), plus)
    assert np.allclose(x(np.kron(ZERO, rho_e)), np.kron(ONE, rho_e))


def test_projection_examples(rng):
    e = 2
    rho_e = random_density(rng, e)
    plus = np.kron(projector("x", 1), rho_e)
    p = projection_map("x", 1, e)
    assert np.allclose(p(plus), plus)
    assert np.allclose(p(np.kron(ZERO, rho_e)), 0.5 * plus)
    total = projection_map("x", 1, e) + projection_map("x", -1, e)
    assert total.is_trace_preserving()
    rho = random_density(rng, 2 * e)
    assert np.isclose(np.trace(total(rho)), 1.0)


def test_anticommutator_examples(rng):
    e = 2
    rho_e = random_density(rng, e)
    d = anticommutator_map("x", e)
    for m in (1, -1):
        s = np.kron(projector("x", m), rho_e)
        assert np.allclose(d(s), 2 * m * s)
    quarter = 0.25 * (identity_map(2 * e) + pulse_map("x", e) + d)
    assert quarter.distance(projection_map("x", 1, e)) <= 1e-12


def test_lincomb_examples():
    pulse = lincomb([(2, projection_map("x", 1)), (2, projection_map("x", -1)), (-1, identity_map(2))])
    assert pulse.distance(conjugation_map(pauli("x"))) <= 1e-12
    assert np.allclose(apply(pulse, ZERO), ONE)
    m = pulse_map("x", 2)
    assert compose(m, identity_map(4)).distance(m) == 0


@pytest.mark.parametrize("axis", ["x", "y"])
@pytest.mark.parametrize("env_dim", [1, 2, 4, 8])
def test_pillar_identities(axis, env_dim):
    errs = pillar_errors(axis, env_dim)
    assert max(errs.values()) <= 1e-12


def test_y_projections_label_sigma_y_eigenvectors():
    plus_i = np.array([1, 1j]) / np.sqrt(2)
    p = projection_map("y", 1j)(np.eye(2))
    assert np.allclose(p, np.outer(plus_i, plus_i.conj()))
    assert nonselective_measurement("y").is_trace_preserving()


@given(seeds, env_dims, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_lincomb_and_compose_bilinear(seed, e, c):
    rng = np.random.default_rng(seed)
    d = 2 * e
    a, b, k = (conjugation_map(random_unitary(rng, d)) for _ in range(3))
    lhs = compose(lincomb([(c, a), (1, b)]), k)
    rhs = lincomb([(c, compose(a, k)), (1, compose(b, k))])
    assert lhs.distance(rhs) <= 1e-10
    lhs = compose(k, lincomb([(c, a), (1, b)]))
    rhs = lincomb([(c, compose(k, a)), (1, compose(k, b))])
    assert lhs.distance(rhs) <= 1e-10


@given(seeds, env_dims)
def test_compose_order_and_associativity(seed, e):
    rng = np.random.default_rng(seed)
    d = 2 * e
    us = [random_unitary(rng, d) for _ in range(3)]
    maps = [conjugation_map(u) for u in us]
    rho = random_density(rng, d)
    u = us[2] @ us[1] @ us[0]
    assert np.allclose(compose_all(maps)(rho), u @ rho @ u.conj().T)
    a, b, c = maps
    assert ((a @ b) @ c).distance(a @ (b @ c)) <= 1e-12


@given(seeds, env_dims)
def test_repreparation_map(seed, e):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2 * e)
    env = np.trace(rho.reshape(2, e, 2, e), axis1=0, axis2=2)
    r = repreparation_map(e)
    assert np.allclose(r(rho), np.kron(projector("x", 1), env))
    assert r.is_trace_preserving() and r.is_completely_positive()


def test_map_predicates():
    assert pulse_map("x", 2).is_unital()
    assert not repreparation_map(1).is_unital()
    assert not projection_map("x", 1).is_trace_preserving()
    h = random_hermitian(np.random.default_rng(0), 2)
    assert not sandwich_map(h, np.eye(2)).is_completely_positive()


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        identity_map(2) @ identity_map(4)
    with pytest.raises(ShapeError):
        identity_map(2) + identity_map(4)
    with pytest.raises(TypeError):
        identity_map(2) + np.eye(4)
    with pytest.raises(ShapeError):
        apply(identity_map(2), np.eye(3))
    with pytest.raises(ShapeError):
        LinearMap(2, np.eye(3))

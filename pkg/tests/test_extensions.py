import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddmeas import extensions as ext
from ddmeas import protocols as pr
from ddmeas.linalg import HilbertDims, local, pauli, random_density, random_model
from ddmeas.superop import conjugation_map, identity_map, lincomb, projection_map, pulse_map

import oracle

seeds = st.integers(0, 2**32 - 1)


def test_alphabet_closure():
    assert ext.alphabet_closed([1, -1])
    assert ext.alphabet_closed([1, 1j, -1, -1j])
    assert not ext.alphabet_closed([1j, -1j])
    assert ext.alphabet_closed(np.exp(2j * np.pi * np.arange(5) / 5))


def test_y_pillar():
    built = lincomb([(2, projection_map("y", 1j, 2)), (2, projection_map("y", -1j, 2)), (-1, identity_map(4))])
    assert built.distance(pulse_map("y", 2)) <= 1e-12


def test_single_x_axis_reduces_to_single_axis_check():
    m = random_model(HilbertDims(2, 2), "general", 3)
    s = pr.Schedule((0.4, 1.1))
    checks = ext.two_axis_duality_check(m, s, "x")
    lhs = pr.verify_nonselective(m, s)
    assert checks[0].error == pytest.approx(lhs.error, abs=1e-15)


@given(seeds, st.sampled_from([1, 2]), st.sampled_from(["xy", "yx", "yy", "xyx", "yyx"]))
def test_two_axis_duality(seed, e, axes):
    n = len(axes) + 1
    m = random_model(HilbertDims(2, e), "general", seed)
    s = pr.Schedule.from_durations(np.linspace(0.3, 0.9, n))
    assert all(c.ok for c in ext.two_axis_duality_check(m, s, axes))


def test_two_axis_against_oracle(rng):
    e = 2
    m = random_model(HilbertDims(2, e), "general", 12)
    s = pr.Schedule((0.5, 1.2))
    rho = random_density(rng, 2 * e)
    us = oracle.unitaries(m, s)
    sides = pr.nonselective_chain(pr.segment_maps(m, s), ("y",))
    for m_n, (lhs, _) in sides.items():
        assert np.abs(lhs(rho) - oracle.nonselective_state(rho, us, m_n, e, axes=("y", "x"))).max() <= 1e-10


@pytest.mark.parametrize("n_qubits", [1, 2, 3])
@pytest.mark.parametrize("env_dim", [1, 2])
def test_multiqubit_identity(n_qubits, env_dim):
    checks = ext.multiqubit_identity_check(ext.MultiQubitRegister(n_qubits, env_dim), seed=5)
    assert all(c.ok for c in checks)


def test_single_qubit_register_is_pillar():
    reg = ext.MultiQubitRegister(1, 2)
    lhs, rhs = ext.multiqubit_sides(reg)
    assert lhs.distance(identity_map(4) + pulse_map("x", 2)) <= 1e-12
    assert lhs.distance(rhs) <= 1e-12


def test_two_qubit_eight_terms():
    reg = ext.MultiQubitRegister(2, 2)
    coherent, projective = ext.two_qubit_terms(reg)
    assert len(coherent) == 4 and len(projective) == 4
    xx = conjugation_map(np.kron(np.kron(pauli("x"), pauli("x")), np.eye(2)))
    assert coherent[3].distance(xx) <= 1e-12
    lhs = lincomb([(1, c) for c in coherent])
    rhs = lincomb([(4, p) for p in projective])
    assert lhs.distance(rhs) <= 1e-10
    with pytest.raises(ValueError):
        ext.two_qubit_terms(ext.MultiQubitRegister(3))


def test_register_lift_places_qubit():
    reg = ext.MultiQubitRegister(3, 1)
    assert np.allclose(reg.lift(pauli("z"), 2), np.kron(np.eye(4), pauli("z")))
    assert np.allclose(reg.lift(pauli("z"), 0), local(pauli("z"), 4))


@pytest.mark.parametrize("d", range(2, 9))
def test_qudit_invariants(d):
    alg = ext.QuditShiftAlgebra(d)
    assert max(alg.invariant_errors().values()) <= 1e-12
    assert ext.qudit_decomposition_error(alg) <= 1e-12
    assert ext.geometric_series_error(d) <= 1e-12


def test_qudit_generator_shape():
    g = ext.QuditShiftAlgebra(3).generator
    assert np.array_equal(g.real, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    with pytest.raises(ValueError):
        ext.QuditShiftAlgebra(1)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6, 7, 8])
def test_residual_coefficients_vanish(d):
    alg = ext.QuditShiftAlgebra(d)
    _, _, residual = ext.qudit_expansion(alg)
    assert len(residual) == d * (d - 1)
    assert max(abs(c) for c, _ in residual) <= 1e-12


@pytest.mark.parametrize("d,env_dim", [(2, 1), (3, 2), (4, 1), (5, 1), (7, 2)])
def test_qudit_measurement_identity(d, env_dim):
    check = ext.qudit_prime_identity_check(ext.QuditShiftAlgebra(d), env_dim, seed=1)
    assert check.ok and check.info["state_error"] <= 1e-10


def test_qubit_case_reduces_to_pillar():
    lhs, meas, _ = ext.qudit_expansion(ext.QuditShiftAlgebra(2))
    expected = identity_map(2) + pulse_map("x")
    assert lhs.distance(expected) <= 1e-12
    assert meas.distance(2 * (projection_map("x", 1) + projection_map("x", -1))) <= 1e-12


def test_d6_residual_consistency():
    alg = ext.QuditShiftAlgebra(6)
    lhs, meas, residual = ext.qudit_expansion(alg)
    direct = float(np.linalg.norm((lhs - meas).matrix))
    listed = float(np.linalg.norm(ext.residual_map(alg, residual).matrix))
    assert abs(direct - listed) <= 1e-12


def test_primitive_roots():
    prime = ext.QuditShiftAlgebra(5)
    assert all(prime.powers_cover_outcomes(j) for j in range(1, 5))
    six = ext.QuditShiftAlgebra(6)
    assert [six.powers_cover_outcomes(j) for j in range(1, 6)] == [True, False, False, False, True]


def test_single_shift_outside_measurement_span():
    assert ext.single_shift_residual(ext.QuditShiftAlgebra(3)) > 1e-3
    # for the qubit the single shift is the pulse itself, which is in the span
    assert ext.single_shift_residual(ext.QuditShiftAlgebra(2)) <= 1e-10


def test_d3_span_residual_value():
    alg = ext.QuditShiftAlgebra(3)
    basis = [np.eye(9).reshape(-1)] + [np.kron(p.conj(), p).reshape(-1) for p in alg.projections]
    q, _ = np.linalg.qr(np.stack(basis, axis=1))
    target = np.kron(alg.generator.conj(), alg.generator).reshape(-1)
    residual = np.linalg.norm(target - q @ (q.conj().T @ target))
    assert ext.single_shift_residual(alg) == pytest.approx(residual, abs=1e-12)
    assert residual == pytest.approx(np.sqrt(4.5), abs=1e-12)

"""Generalizations beyond a single x axis on one qubit.

* mixed x/y pulse sequences against mixed-axis measurement sequences;
* local pi pulses on several qubits against local measurements;
* the cyclic shift group on a qudit against measurements in its eigenbasis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .linalg import ModelSpec, pauli, projector, random_hermitian, random_unitary
from .protocols import (
    CHAIN_TOL,
    Schedule,
    dd_chain,
    dd_expansion,
    evaluate_expansion,
    nonselective_chain,
    segment_maps,
)
from .report import Check
from .superop import LinearMap, conjugation_map, identity_map, lincomb, sandwich_map


def alphabet_closed(alphabet, tol: float = 1e-12) -> bool:
    """Whether a finite set of complex numbers is closed under products and conjugation."""
    alphabet = [complex(a) for a in alphabet]

    def member(z):
        return any(abs(z - a) <= tol for a in alphabet)

    return all(member(a * b) for a in alphabet for b in alphabet) and all(member(a.conjugate()) for a in alphabet)


# -- two axes ----------------------------------------------------------------------

def two_axis_duality_check(model: ModelSpec, schedule: Schedule, axis_pattern: Sequence[str],
                           tol: float = CHAIN_TOL) -> list[Check]:
    """Both directions of the pulse/measurement duality with one axis per slot."""
    axes = tuple(axis_pattern)
    segs = segment_maps(model, schedule)
    params = {
        "n": schedule.n,
        "env_dim": model.dims.env_dim,
        "seed": model.seed,
        "axes": "".join(axes),
        "kinds": "/".join(k[0] for k in schedule.kinds),
    }
    sides = nonselective_chain(segs, axes)
    err3 = max(lhs.distance(rhs) for lhs, rhs in sides.values())
    pulses = dd_chain(segs, axes)
    err4 = pulses.distance(evaluate_expansion(dd_expansion(schedule.n, axes), segs))
    return [
        Check("twoaxis.nonselective", "mixed-axis non-selective = averaged pulses", err3, tol, params),
        Check("twoaxis.expansion", "mixed-axis pulses = signed measurement expansion", err4, tol, params),
    ]


# -- several qubits ------------------------------------------------------------------

@dataclass(frozen=True)
class MultiQubitRegister:
    """``n_qubits`` qubits (qubit 0 is the leftmost tensor factor) and an environment."""

    n_qubits: int
    env_dim: int = 1

    @property
    def total_dim(self) -> int:
        return 2**self.n_qubits * self.env_dim

    def lift(self, op, j: int) -> np.ndarray:
        left = np.eye(2**j)
        right = np.eye(2 ** (self.n_qubits - j - 1) * self.env_dim)
        return np.kron(np.kron(left, op), right)

    def identity(self) -> LinearMap:
        return identity_map(self.total_dim)

    def pulse(self, j: int) -> LinearMap:
        return conjugation_map(self.lift(pauli("x"), j))

    def projection(self, j: int, m: int) -> LinearMap:
        p = self.lift(projector("x", m), j)
        return sandwich_map(p, p)


def _product(maps: Sequence[LinearMap]) -> LinearMap:
    out = maps[0]
    for m in maps[1:]:
        out = out @ m
    return out


def multiqubit_sides(reg: MultiQubitRegister) -> tuple[LinearMap, LinearMap]:
    ident = reg.identity()
    lhs = _product([ident + reg.pulse(j) for j in range(reg.n_qubits)])
    rhs = 2**reg.n_qubits * _product([reg.projection(j, 1) + reg.projection(j, -1) for j in range(reg.n_qubits)])
    return lhs, rhs


def two_qubit_terms(reg: MultiQubitRegister) -> tuple[list[LinearMap], list[LinearMap]]:
    """The four coherent and four projective terms of the two-qubit relation."""
    if reg.n_qubits != 2:
        raise ValueError("two_qubit_terms needs a two-qubit register")
    coherent = [reg.identity(), reg.pulse(0), reg.pulse(1), reg.pulse(0) @ reg.pulse(1)]
    projective = [reg.projection(0, a) @ reg.projection(1, b) for b, a in itertools.product((1, -1), repeat=2)]
    return coherent, projective


def multiqubit_identity_check(reg: MultiQubitRegister, seed: int = 0, tol: float = CHAIN_TOL) -> list[Check]:
    params = {"n_qubits": reg.n_qubits, "env_dim": reg.env_dim}
    lhs, rhs = multiqubit_sides(reg)
    checks = [Check("multiqubit.product", "prod(I + X_j) = 2^n prod(P+_j + P-_j)", lhs.distance(rhs), tol, params)]
    if reg.n_qubits == 2:
        coherent, projective = two_qubit_terms(reg)
        c = lincomb([(1, m) for m in coherent])
        p = lincomb([(4, m) for m in projective])
        err = max(c.distance(p), c.distance(lhs), p.distance(rhs))
        checks.append(Check("multiqubit.two_qubit_terms", "4 coherent terms = 4 x 4 projective terms", err, tol, params))
    # one interlaced step: local operations, a joint evolution, local operations
    u = conjugation_map(random_unitary(np.random.default_rng(seed), reg.total_dim))
    err = (lhs @ u @ lhs).distance(rhs @ u @ rhs)
    checks.append(Check("multiqubit.interlaced", "two-slot interlaced sequence", err, tol, {**params, "seed": seed}))
    comm = 0.0
    for i, j in itertools.combinations(range(reg.n_qubits), 2):
        for a, b in ((reg.pulse(i), reg.pulse(j)), (reg.projection(i, 1), reg.projection(j, -1))):
            comm = max(comm, (a @ b).distance(b @ a))
    checks.append(Check("multiqubit.commute", "distinct-qubit operations commute", comm, 1e-12, params))
    return checks


# -- qudit shifts --------------------------------------------------------------------

@dataclass(frozen=True)
class QuditShiftAlgebra:
    """Cyclic shift ``g`` (ones on the superdiagonal and bottom-left corner),
    its powers, and its eigenprojections.

    Outcome ``m_j = exp(2 pi i j / d)`` labels projection ``P_j``; the
    eigenvectors are the discrete-Fourier vectors, so the order is fixed.
    """

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")

    @cached_property
    def generator(self) -> np.ndarray:
        return np.roll(np.eye(self.d, dtype=complex), 1, axis=1)

    @cached_property
    def outcomes(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.d) / self.d)

    @cached_property
    def projections(self) -> list[np.ndarray]:
        idx = np.arange(self.d)
        out = []
        for j in range(self.d):
            v = np.exp(2j * np.pi * idx * j / self.d) / np.sqrt(self.d)
            out.append(np.outer(v, v.conj()))
        return out

    def shift(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.generator, k)

    def invariant_errors(self) -> dict:
        d, g, m, ps = self.d, self.generator, self.outcomes, self.projections
        eye = np.eye(d)
        return {
            "g^d = 1": float(np.abs(self.shift(d) - eye).max()),
            "g = sum m_i P_i": float(np.abs(g - sum(mi * p for mi, p in zip(m, ps))).max()),
            "sum P_i = 1": float(np.abs(sum(ps) - eye).max()),
            "P_i P_j = delta P_i": max(
                float(np.abs(ps[i] @ ps[j] - (ps[i] if i == j else 0)).max()) for i in range(d) for j in range(d)
            ),
            "1 + sum m_j = 0": float(abs(m.sum())),
            "|m_j| = 1": float(np.abs(np.abs(m) - 1).max()),
        }

    def powers_cover_outcomes(self, j: int, tol: float = 1e-12) -> bool:
        """Whether ``{m_j^k : k = 0..d-1}`` is the full outcome set."""
        powers = self.outcomes[j] ** np.arange(self.d)
        return all(np.min(np.abs(powers - m)) <= tol for m in self.outcomes)

    def residual_coefficient(self, i: int, j: int) -> complex:
        z = self.outcomes[i] * np.conj(self.outcomes[j])
        return complex(1 + sum(z**k for k in range(1, self.d)))


def _extend(op, env_dim):
    return np.kron(op, np.eye(env_dim))


def qudit_expansion(alg: QuditShiftAlgebra, env_dim: int = 1):
    """``(I + sum_k S_k, d sum_i P_i, [(c_ij, (i, j)) for i != j])``.

    ``c_ij`` multiplies the cross term ``rho -> P_i rho P_j``.
    """
    d = alg.d
    dim = d * env_dim
    lhs = identity_map(dim)
    for k in range(1, d):
        lhs = lhs + conjugation_map(_extend(alg.shift(k), env_dim))
    ps = [_extend(p, env_dim) for p in alg.projections]
    meas = d * lincomb([(1, sandwich_map(p, p)) for p in ps])
    residual = [(alg.residual_coefficient(i, j), (i, j)) for i in range(d) for j in range(d) if i != j]
    return lhs, meas, residual


def residual_map(alg: QuditShiftAlgebra, residual, env_dim: int = 1) -> LinearMap:
    ps = [_extend(p, env_dim) for p in alg.projections]
    dim = alg.d * env_dim
    out = LinearMap(dim, np.zeros((dim * dim, dim * dim), dtype=complex))
    for c, (i, j) in residual:
        out = out + c * sandwich_map(ps[i], ps[j])
    return out


def qudit_decomposition_error(alg: QuditShiftAlgebra, env_dim: int = 1) -> float:
    lhs, meas, residual = qudit_expansion(alg, env_dim)
    return lhs.distance(meas + residual_map(alg, residual, env_dim))


def qudit_prime_identity_check(alg: QuditShiftAlgebra, env_dim: int = 1, seed: int = 0,
                               tol: float = CHAIN_TOL) -> Check:
    """``I + sum_k S_k`` against ``d sum_i P_i``; error is the Frobenius norm
    of the difference of the two map matrices."""
    lhs, meas, residual = qudit_expansion(alg, env_dim)
    diff = lhs.matrix - meas.matrix
    err = float(np.linalg.norm(diff))
    rng = np.random.default_rng(seed)
    rho = random_hermitian(rng, alg.d * env_dim)
    state_err = float(np.abs(lhs(rho) - meas(rho)).max())
    return Check(
        "qudit.shift_sum",
        "I + sum S_k = d sum P_i",
        err,
        tol,
        {"d": alg.d, "env_dim": env_dim, "seed": seed},
        info={
            "residual_norm": float(np.linalg.norm(residual_map(alg, residual, env_dim).matrix)),
            "state_error": state_err,
        },
    )


def geometric_series_error(d: int) -> float:
    """``max |sum_{k<d} z^k|`` over the d-th roots of unity ``z != 1``."""
    roots = np.exp(2j * np.pi * np.arange(1, d) / d)
    return max(float(abs(sum(z**k for k in range(d)))) for z in roots)


def span_residual(target: LinearMap, basis: Sequence[LinearMap]) -> float:
    """Frobenius distance from ``target`` to the span of ``basis`` (least squares)."""
    a = np.stack([b.matrix.reshape(-1) for b in basis], axis=1)
    y = target.matrix.reshape(-1)
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.linalg.norm(a @ coef - y))


def single_shift_residual(alg: QuditShiftAlgebra, k: int = 1) -> float:
    """Distance of one shift map from ``span{I, P_0, ..., P_{d-1}}``."""
    basis = [identity_map(alg.d)] + [sandwich_map(p, p) for p in alg.projections]
    return span_residual(conjugation_map(alg.shift(k)), basis)

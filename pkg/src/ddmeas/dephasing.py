"""Pure dephasing: environment-side Kraus dynamics and re-preparation.

For ``H = a_z sz (x) V_z + a_1 1 (x) V_1`` each evolution step splits into
two environment unitaries ``U_up/down = exp(-i tau (a_1 V_1 +/- a_z V_z))``.
A qubit prepared in the x eigenstate ``p`` and found in ``m`` after the step
leaves the environment acted on by ``K = (U_up + p m U_down) / 2``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    DomainError,
    ModelSpec,
    check_state,
    expm_hermitian,
    partial_trace_sys,
    projector,
)
from .protocols import (
    Schedule,
    SignalTable,
    O_signal,
    outcome_probabilities,
    plus_state,
    segment_maps,
    segment_unitaries,
)
from .report import Check
from .superop import LinearMap, compose_all, projection_map, repreparation_map

UP = np.diag([1.0, 0.0]).astype(complex)
DOWN = np.diag([0.0, 1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class DephasingStep:
    duration: float
    u_up: np.ndarray
    u_down: np.ndarray

    def full_unitary(self) -> np.ndarray:
        return np.kron(UP, self.u_up) + np.kron(DOWN, self.u_down)


def _require_dephasing(model: ModelSpec):
    if not model.is_pure_dephasing:
        raise DomainError("model is not a pure-dephasing model")


def dephasing_step(model: ModelSpec, duration: float, kind: str = "composite") -> DephasingStep:
    _require_dephasing(model)
    p = model.dephasing
    if kind == "composite":
        up = expm_hermitian(p.a_1 * p.v_1 + p.a_z * p.v_z, duration)
        down = expm_hermitian(p.a_1 * p.v_1 - p.a_z * p.v_z, duration)
    elif kind == "env_only":
        up = down = expm_hermitian(p.a_1 * p.v_1, duration)
    else:
        raise DomainError(f"unknown segment kind {kind!r}")
    return DephasingStep(float(duration), up, down)


def dephasing_steps(model: ModelSpec, schedule: Schedule) -> list[DephasingStep]:
    return [dephasing_step(model, tau, kind) for tau, kind in zip(schedule.durations, schedule.kinds)]


def _sign(v, what):
    if v not in (1, -1):
        raise DomainError(f"{what} must be +1 or -1, got {v!r}")
    return int(v)


def kraus_K(m: int, p: int, step: DephasingStep) -> np.ndarray:
    m, p = _sign(m, "outcome"), _sign(p, "preparation")
    return 0.5 * (step.u_up + p * m * step.u_down)


def no_reprep_preparations(outcomes: Sequence[int]) -> tuple:
    """Preparations without reset: first ``+1``, then the previous outcome."""
    return (1,) + tuple(outcomes[:-1])


def reprep_preparations(n: int) -> tuple:
    return (1,) * n


def conditioned_probability(rho_env0, steps: Sequence[DephasingStep], outcomes, preparations) -> float:
    """Probability of ``outcomes`` given per-step ``preparations``,
    computed on the environment alone."""
    outcomes, preparations = tuple(outcomes), tuple(preparations)
    if not (len(steps) == len(outcomes) == len(preparations)):
        raise DomainError(
            f"lengths differ: {len(steps)} steps, {len(outcomes)} outcomes, {len(preparations)} preparations"
        )
    rho = np.asarray(rho_env0, dtype=complex)
    for step, m, p in zip(steps, outcomes, preparations):
        k = kraus_K(m, p, step)
        rho = k @ rho @ k.conj().T
    return float(np.trace(rho).real)


def env_probabilities(model: ModelSpec, schedule: Schedule, reprep: bool = False) -> dict:
    """All outcome probabilities from the Kraus chain, starting from ``P_+ (x) rho_E``."""
    steps = dephasing_steps(model, schedule)
    out = {}
    for outcomes in itertools.product((1, -1), repeat=schedule.n):
        preps = reprep_preparations(schedule.n) if reprep else no_reprep_preparations(outcomes)
        out[outcomes] = conditioned_probability(model.env_initial, steps, outcomes, preps)
    return out


# -- re-preparation on the full space -----------------------------------------

def repreparation_probabilities(model: ModelSpec, rho0, schedule: Schedule) -> SignalTable:
    """Outcome probabilities when the qubit is reset to |+> after every
    intermediate measurement."""
    check_state(rho0)
    dims = model.dims
    plus = projector("x", 1)
    projs = {m: np.kron(projector("x", m), np.eye(dims.env_dim)) for m in (1, -1)}
    us = segment_unitaries(model, schedule)
    table = SignalTable()
    if not model.is_pure_dephasing:
        table.meta["flag"] = "no-equivalence-guarantee"

    def walk(k, rho, prefix):
        if k == len(us):
            table.add("P_R", schedule, prefix, np.trace(rho))
            return
        if k > 0:
            rho = np.kron(plus, partial_trace_sys(rho, dims))
        rho = us[k] @ rho @ us[k].conj().T
        for m in (1, -1):
            walk(k + 1, projs[m] @ rho @ projs[m], prefix + (m,))

    walk(0, np.asarray(rho0, dtype=complex), ())
    table.check_probabilities(schedule, "P_R")
    return table


def repreparation_branch_map(model: ModelSpec, schedule: Schedule, outcomes) -> LinearMap:
    outcomes = tuple(outcomes)
    if len(outcomes) != schedule.n:
        raise DomainError(f"{len(outcomes)} outcomes for {schedule.n} evolutions")
    e = model.dims.env_dim
    reset = repreparation_map(e)
    chain = []
    for k, (seg, m) in enumerate(zip(segment_maps(model, schedule), outcomes)):
        if k > 0:
            chain.append(reset)
        chain += [seg, projection_map("x", m, e)]
    return compose_all(chain)


# -- relabeling ------------------------------------------------------------------

def relabel(outcomes) -> tuple:
    """Map an outcome record without resets to the record with resets of
    equal probability: entry ``k`` is ``m_k * m_{k-1}`` (``m_0 = +1``)."""
    outcomes = tuple(_sign(m, "outcome") for m in outcomes)
    return tuple(m * prev for m, prev in zip(outcomes, (1,) + outcomes[:-1]))


def unrelabel(outcomes) -> tuple:
    """Inverse of :func:`relabel`: cumulative products."""
    outcomes = tuple(_sign(m, "outcome") for m in outcomes)
    return tuple(int(v) for v in np.cumprod(outcomes))


def relabel_discrepancy(model: ModelSpec, schedule: Schedule, rho0=None) -> float:
    """``max |P_R(relabel(m)) - P(m)|`` over all outcome records."""
    rho0 = plus_state(model) if rho0 is None else rho0
    p = outcome_probabilities(model, rho0, schedule).select("P", schedule)
    p_r = repreparation_probabilities(model, rho0, schedule).select("P_R", schedule)
    return max(abs(p_r[relabel(m)] - p[m]) for m in sorted(p))


def correlation_R(model: ModelSpec, rho0, schedule: Schedule) -> float:
    """Expectation of the product of all outcomes in the reset protocol."""
    p_r = repreparation_probabilities(model, rho0, schedule).select("P_R", schedule)
    return sum(int(np.prod(m)) * p_r[m] for m in sorted(p_r))


# -- checks -------------------------------------------------------------------

def _params(model, schedule, **extra):
    return {
        "n": schedule.n,
        "env_dim": model.dims.env_dim,
        "seed": model.seed,
        "kinds": "/".join(k[0] for k in schedule.kinds),
        **extra,
    }


def verify_kraus_reduction(model: ModelSpec, schedule: Schedule, tol: float = 1e-10) -> Check:
    rho0 = plus_state(model)
    full = outcome_probabilities(model, rho0, schedule).select("P", schedule)
    full_r = repreparation_probabilities(model, rho0, schedule).select("P_R", schedule)
    env = env_probabilities(model, schedule)
    env_r = env_probabilities(model, schedule, reprep=True)
    err = max(max(abs(full[m] - env[m]), abs(full_r[m] - env_r[m])) for m in full)
    return Check("dephasing.kraus", "environment Kraus chain = full space", err, tol, _params(model, schedule))


def verify_sign_collapse(model: ModelSpec, schedule: Schedule, tol: float = 1e-12) -> Check:
    err = 0.0
    for step in dephasing_steps(model, schedule):
        for m, p in itertools.product((1, -1), repeat=2):
            err = max(err, float(np.linalg.norm(kraus_K(m, p, step) - kraus_K(m * p, 1, step))))
    return Check("dephasing.sign", "K_{m,p} = K_{mp,+}", err, tol, _params(model, schedule))


def verify_relabeling(model: ModelSpec, schedule: Schedule, tol: float = 1e-12, negative: bool = False) -> Check:
    err = relabel_discrepancy(model, schedule)
    if negative:
        return Check("dephasing.relabel_negative", "relabeling without pure dephasing", err, 1e-3,
                     _params(model, schedule), expect="fail")
    return Check("dephasing.relabel", "P_R(relabel(m)) = P(m)", err, tol, _params(model, schedule))


def verify_correlation(model: ModelSpec, schedule: Schedule, tol: float = 1e-10) -> Check:
    rho0 = plus_state(model)
    err = abs(correlation_R(model, rho0, schedule) - O_signal(model, rho0, schedule))
    return Check("dephasing.correlation", "<prod m'>_R = O_n", err, tol, _params(model, schedule))

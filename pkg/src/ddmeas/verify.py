"""Verification suites: every identity swept over models, schedules and seeds.

Each suite returns a list of :class:`~ddmeas.report.Check` records; the
report sorts them canonically so output does not depend on run order.
"""
from __future__ import annotations

import itertools
import time
from datetime import datetime, timezone
from math import comb

import numpy as np

from . import dephasing as dph
from . import extensions as ext
from . import protocols as pr
from .linalg import HilbertDims, dephasing_model, random_model
from .report import Check
from .superop import pillar_errors

SWEEP_N = (2, 3, 4)
SWEEP_ENV = (1, 2, 4, 8)
REPLICAS = 3
KIND_PATTERNS = ("composite", "alternating")

PILLAR_TOL = 1e-12
CHAIN_TOL = 1e-10


def cell_seed(base: int, *parts: int) -> int:
    """Deterministic per-cell seed derived from the base seed."""
    return int(np.random.SeedSequence([base, *parts]).generate_state(1)[0])


def segment_kinds(n: int, pattern: str) -> tuple:
    if pattern == "composite":
        return ("composite",) * n
    if pattern == "alternating":
        return tuple("composite" if k % 2 == 0 else "env_only" for k in range(n))
    raise ValueError(f"unknown segment-kind pattern {pattern!r}")


def random_schedule(seed: int, n: int, kinds: str = "composite") -> pr.Schedule:
    rng = np.random.default_rng(seed)
    return pr.Schedule.from_durations(rng.uniform(0.2, 1.2, size=n), segment_kinds(n, kinds))


def sweep(base: int, ns=SWEEP_N, envs=SWEEP_ENV, replicas=REPLICAS, kinds=KIND_PATTERNS, model_kind="general"):
    """Yield ``(model, schedule)`` pairs over the default grid."""
    for n, e, r, kp in itertools.product(ns, envs, range(replicas), kinds):
        seed = cell_seed(base, n, e, r)
        model = random_model(HilbertDims(2, e), model_kind, seed)
        yield model, random_schedule(seed + 1, n, kp)


# -- suites ---------------------------------------------------------------------------

def suite_pillar(seed: int) -> list[Check]:
    out = []
    for axis, e in itertools.product(("x", "y"), SWEEP_ENV):
        errs = pillar_errors(axis, e)
        params = {"axis": axis, "total_dim": 2 * e}
        out.append(Check("pillar.pulse", "A = 2(P+ + P-) - I", errs["pulse"], PILLAR_TOL, params))
        out.append(Check("pillar.converse", "P_m = (I + A + c D)/4", errs["converse"], PILLAR_TOL, params))
    return out


def suite_nonselective(seed: int) -> list[Check]:
    return suite_pillar(seed) + [pr.verify_nonselective(m, s) for m, s in sweep(seed)]


# Expected term multisets for the two worked expansions, written term by term.
ECHO_TERMS = {(-1, "[U2 U1]"), (2, "[U2 P+ U1]"), (2, "[U2 P− U1]")}
TWO_PULSE_TERMS = {
    (1, "[U3 U2 U1]"),
    (-2, "[U3 U2 P+ U1]"), (-2, "[U3 U2 P− U1]"),
    (-2, "[U3 P+ U2 U1]"), (-2, "[U3 P− U2 U1]"),
    (4, "[U3 P+ U2 P+ U1]"), (4, "[U3 P− U2 P− U1]"),
    (4, "[U3 P+ U2 P− U1]"), (4, "[U3 P− U2 P+ U1]"),
}


def term_multiset_error(n: int, expected: set) -> float:
    """Number of terms in the symmetric difference with ``expected``."""
    got = [(t.coefficient, t.label()) for t in pr.dd_expansion(n)]
    if len(got) != len(set(got)):
        return float(len(got) - len(set(got)))
    return float(len(set(got) ^ expected))


def suite_expansion(seed: int) -> list[Check]:
    out = [pr.verify_expansion(m, s) for m, s in sweep(seed)]
    out.append(Check("expansion.terms", "spin-echo expansion terms", term_multiset_error(2, ECHO_TERMS), 0.0, {"n": 2}))
    out.append(Check("expansion.terms", "two-pulse expansion terms", term_multiset_error(3, TWO_PULSE_TERMS), 0.0, {"n": 3}))
    for n in range(1, 7):
        count, weighted = pr.expansion_bookkeeping(n)
        expected = sum(comb(n - 1, k) * 2**k for k in range(n))
        err = max(abs(count - expected), abs(weighted - 1.0))
        out.append(Check("expansion.bookkeeping", "term count and sum c 2^-k = 1", err, 1e-12, {"n": n},
                         info={"terms": count}))
    return out


def suite_o_from_w(seed: int) -> list[Check]:
    return [pr.verify_on_in_wn(m, s) for m, s in sweep(seed)]


def suite_w_from_o(seed: int) -> list[Check]:
    return [pr.verify_wn_in_ok(m, s) for m, s in sweep(seed)]


def analytic_model(a_1: float = 0.0):
    """Single qubit, no environment, ``a_z V_z = 1/2``: precession at unit frequency."""
    return dephasing_model(0.5, a_1, 1.0, 1.0)


def analytic_errors(a_1: float = 0.3, points: int = 100) -> dict:
    m = analytic_model(a_1)
    rho = pr.plus_state(m)
    grid = np.linspace(0.05, 10.0, points)
    free = max(abs(pr.W_signal(m, rho, pr.Schedule((t / 2, t)), "i") - np.cos(t)) for t in grid)
    echo = max(abs(pr.W_signal(m, rho, pr.Schedule((t / 2, t)), "x") - 1.0) for t in grid)
    o2 = 0.0
    for t1, t2 in zip(grid * 0.37, grid):
        expected = 0.5 * (np.cos(t2) + np.cos(t2 - 2 * t1))
        o2 = max(o2, abs(pr.O_signal(m, rho, pr.Schedule((t1, t2))) - expected))
    return {"free": free, "echo": echo, "o2": o2}


def suite_worked(seed: int) -> list[Check]:
    out = []
    for e, r in itertools.product(SWEEP_ENV, range(REPLICAS)):
        s = cell_seed(seed, 99, e, r)
        m = random_model(HilbertDims(2, e), "general", s)
        rng = np.random.default_rng(s + 1)
        t1, dt2, dt3 = rng.uniform(0.2, 1.2, size=3)
        t2, t3 = t1 + dt2, t1 + dt2 + dt3
        p = {"env_dim": e, "seed": s}
        for kinds in (None, ("composite", "env_only")):
            kp = {**p, "kinds": "c/c" if kinds is None else "c/e"}
            w, rhs = pr.echo_from_two_measurements(m, t1, t2, kinds)
            out.append(Check("worked.echo", "W_x = 2 O_2 - O_1", abs(w - rhs), CHAIN_TOL, kp))
            o2, avg = pr.two_measurements_from_echo(m, t1, t2, kinds)
            out.append(Check("worked.two_point", "O_2 = (W_i + W_x)/2", abs(o2 - avg), CHAIN_TOL, kp))
        o3, avg = pr.three_measurements_from_pulses(m, (t1, t2, t3))
        out.append(Check("worked.three", "O_3 = mean of four W", abs(o3 - avg), CHAIN_TOL, p))
        w, rhs = pr.cp2_from_measurements(m, t1 / 2)
        out.append(Check("worked.cp2", "CP-2 from O_1, O_2, O_3", abs(w - rhs), CHAIN_TOL, p))
    errs = analytic_errors()
    out.append(Check("analytic.free", "W_idle(t) = cos t", errs["free"], CHAIN_TOL, {"points": 100}))
    out.append(Check("analytic.echo", "echo W(2 t1) = 1", errs["echo"], CHAIN_TOL, {"points": 100}))
    out.append(Check("analytic.o2", "O_2 = [cos t2 + cos(t2 - 2 t1)]/2", errs["o2"], CHAIN_TOL, {"points": 100}))
    return out


def suite_dephasing(seed: int) -> list[Check]:
    out = []
    for n, e, r, kp in itertools.product((1, 2, 3, 4), SWEEP_ENV, range(REPLICAS), KIND_PATTERNS):
        s = cell_seed(seed, 7, n, e, r)
        m = random_model(HilbertDims(2, e), "pure_dephasing", s)
        sched = random_schedule(s + 1, n, kp)
        out += [
            dph.verify_kraus_reduction(m, sched),
            dph.verify_sign_collapse(m, sched),
            dph.verify_relabeling(m, sched),
            dph.verify_correlation(m, sched),
        ]
        if n == 2:
            rho = pr.plus_state(m)
            corr = dph.correlation_R(m, rho, sched)
            avg = 0.5 * (pr.W_signal(m, rho, sched, "i") + pr.W_signal(m, rho, sched, "x"))
            out.append(Check("dephasing.two_point_corr", "<m'1 m'2>_R = (W_i + W_x)/2", abs(corr - avg), CHAIN_TOL,
                             {"env_dim": e, "seed": s, "kinds": "/".join(k[0] for k in sched.kinds)}))
    # negative control: a transverse coupling breaks the relabeling
    worst, where = 0.0, None
    for r in range(REPLICAS):
        s = cell_seed(seed, 13, r)
        m = random_model(HilbertDims(2, 2), "general", s)
        err = dph.relabel_discrepancy(m, random_schedule(s + 1, 3))
        if err > worst:
            worst, where = err, s
    out.append(Check("dephasing.relabel_negative", "relabeling with V_x != 0", worst, 1e-3,
                     {"env_dim": 2, "n": 3, "seed": where}, expect="fail"))
    return out


def suite_multiqubit(seed: int) -> list[Check]:
    out = []
    for nq, e in itertools.product((1, 2, 3), (1, 2)):
        out += ext.multiqubit_identity_check(ext.MultiQubitRegister(nq, e), seed=cell_seed(seed, 21, nq, e))
    return out


def suite_qudit(seed: int) -> list[Check]:
    out = []
    for d in range(2, 9):
        alg = ext.QuditShiftAlgebra(d)
        out.append(Check("qudit.invariants", "shift algebra invariants", max(alg.invariant_errors().values()),
                         PILLAR_TOL, {"d": d}))
        out.append(Check("qudit.decomposition", "I + sum S_k = d sum P_i + sum c_ij Q_ij",
                         ext.qudit_decomposition_error(alg), PILLAR_TOL, {"d": d}))
        out.append(Check("qudit.geometric", "sum_k z^k = 0 for roots z != 1",
                         ext.geometric_series_error(d), PILLAR_TOL, {"d": d}))
        out.append(Check("qudit.closure", "outcomes closed under product and conjugation",
                         0.0 if ext.alphabet_closed(alg.outcomes) else 1.0, 0.0, {"d": d}))
        covers = [j for j in range(1, d) if alg.powers_cover_outcomes(j)]
        if all(d % p for p in range(2, d)):
            out.append(Check("qudit.primitive", "powers of every m_j cover all outcomes",
                             float(d - 1 - len(covers)), 0.0, {"d": d}))
        _, _, residual = ext.qudit_expansion(alg)
        nonzero = [(i, j, c) for c, (i, j) in residual if abs(c) > PILLAR_TOL]
        max_c = max(abs(c) for c, _ in residual)
        for e in (1, 2):
            chk = ext.qudit_prime_identity_check(alg, e, cell_seed(seed, 31, d, e))
            expect = "pass" if not nonzero else "info"
            out.append(Check(chk.check_id, chk.equation, chk.error, chk.threshold, chk.params, expect, chk.info))
            out.append(Check("qudit.residual_consistency", "difference norm = residual norm",
                             abs(chk.error - chk.info["residual_norm"]), PILLAR_TOL, chk.params))
        if d == 6:
            out.append(Check("qudit.d6_residuals", "residual coefficients for d = 6", max_c, PILLAR_TOL, {"d": 6},
                             expect="info",
                             info={"nonzero_pairs": [[i, j, abs(c)] for i, j, c in nonzero],
                                   "max_abs_coefficient": float(f"{max_c:.6e}")}))
    out.append(Check("qudit.single_shift", "S_1 outside span{I, P_i} (d = 3)",
                     ext.single_shift_residual(ext.QuditShiftAlgebra(3)), 1e-3, {"d": 3}, expect="fail"))
    return out


def suite_twoaxis(seed: int) -> list[Check]:
    out = []
    for e in (1, 2):
        errs = pillar_errors("y", e)
        params = {"axis": "y", "total_dim": 2 * e}
        out.append(Check("twoaxis.pillar", "Y = 2(P+ + P-) - I", errs["pulse"], PILLAR_TOL, params))
        out.append(Check("twoaxis.converse", "P_m = (I + Y - i m D_Y)/4", errs["converse"], PILLAR_TOL, params))
    for n, e, r in itertools.product((2, 3, 4), (1, 2, 4), range(2)):
        s = cell_seed(seed, 41, n, e, r)
        m = random_model(HilbertDims(2, e), "general", s)
        sched = random_schedule(s + 1, n, "alternating" if r else "composite")
        for axes in itertools.product("xy", repeat=n - 1):
            out += ext.two_axis_duality_check(m, sched, axes)
    return out


SUITES = {
    "eq3": suite_nonselective,
    "eq4": suite_expansion,
    "eq5": suite_o_from_w,
    "eq6": suite_w_from_o,
    "worked": suite_worked,
    "dephasing": suite_dephasing,
    "multiqubit": suite_multiqubit,
    "qudit": suite_qudit,
    "twoaxis": suite_twoaxis,
}
SCOPES = ("all",) + tuple(SUITES)


def run(scope: str = "all", seed: int = 0) -> list[Check]:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; choose from {', '.join(SCOPES)}")
    names = list(SUITES) if scope == "all" else [scope]
    checks = []
    for name in names:
        checks += SUITES[name](seed)
    return sorted(checks, key=Check.sort_key)


def build_report(scope: str = "all", seed: int = 0) -> dict:
    t0 = time.perf_counter()
    checks = run(scope, seed)
    wall = time.perf_counter() - t0
    counts = {
        "total": len(checks),
        "ok": sum(c.ok for c in checks),
        "failed": sum(not c.ok for c in checks),
        "negative_controls": sum(c.expect == "fail" for c in checks),
        "informational": sum(c.expect == "info" for c in checks),
    }
    return {
        "scope": scope,
        "seed": seed,
        "passed": counts["failed"] == 0,
        "summary": counts,
        "records": [c.to_dict() for c in checks],
        "timing": {
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time_s": round(wall, 3),
        },
    }

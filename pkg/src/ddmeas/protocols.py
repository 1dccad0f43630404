"""Pulse sequences and sequential measurements on a qubit coupled to an environment.

Two routes are kept apart on purpose:

* operation level: every protocol is a :class:`~ddmeas.superop.LinearMap`
  built from the segment evolutions and the local qubit operations;
* state level: signals and probabilities are computed by propagating the
  density matrix with the segment unitaries and projectors directly.

Outcome tuples are stored in chronological order ``(m_1, ..., m_n)``.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .linalg import (
    DomainError,
    InvariantError,
    ModelSpec,
    check_state,
    evolution_unitary,
    local,
    pauli,
    projector,
)
from .report import Check
from .superop import (
    LinearMap,
    compose_all,
    conjugation_map,
    lincomb,
    outcome_eigenvalue,
    outcomes_for,
    projection_map,
    pulse_map,
)

SEGMENT_KINDS = ("composite", "env_only")
PULSES = ("i", "x", "y")
REAL_TOL = 1e-10
CHAIN_TOL = 1e-10


@dataclass(frozen=True)
class Schedule:
    """Intervention times ``t_1 < ... < t_n`` (``t_0 = 0``) and the kind of
    evolution on each interval ``(t_{k-1}, t_k]``."""

    times: tuple
    kinds: tuple = None

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        kinds = tuple(self.kinds) if self.kinds is not None else ("composite",) * len(times)
        if not times:
            raise DomainError("schedule needs at least one time")
        if len(kinds) != len(times):
            raise DomainError(f"{len(kinds)} segment kinds for {len(times)} times")
        if times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError(f"times must be >= 0 and strictly increasing: {times}")
        for k in kinds:
            if k not in SEGMENT_KINDS:
                raise DomainError(f"unknown segment kind {k!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "kinds", kinds)

    @classmethod
    def from_durations(cls, durations: Iterable[float], kinds=None) -> "Schedule":
        return cls(tuple(np.cumsum(list(durations))), kinds)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def durations(self) -> tuple:
        return tuple(np.diff((0.0,) + self.times))

    @property
    def key(self) -> str:
        text = ",".join(repr(t) for t in self.times) + "|" + ",".join(self.kinds)
        return hashlib.sha1(text.encode()).hexdigest()[:12]


def normalize_pattern(pattern, n: int) -> tuple:
    """Pulse pattern ``(s_1, ..., s_{n-1})`` as a tuple of 'i'/'x'/'y'."""
    pattern = tuple(pattern)
    if len(pattern) != n - 1:
        raise DomainError(f"pattern of length {len(pattern)} needs a schedule of {len(pattern) + 1} times, got {n}")
    for s in pattern:
        if s not in PULSES:
            raise DomainError(f"unknown pulse {s!r}")
    return pattern


def all_patterns(n: int, axes: Sequence[str] | None = None) -> list[tuple]:
    """Every idle/pulse pattern over ``n - 1`` slots (pulse axis per slot)."""
    axes = tuple(axes) if axes is not None else ("x",) * (n - 1)
    return [tuple(p) for p in itertools.product(*[("i", a) for a in axes])]


def plus_state(model: ModelSpec) -> np.ndarray:
    """``P_+ (x) rho_E``."""
    return np.kron(projector("x", 1), model.env_initial)


def _real(value, what: str) -> float:
    if abs(np.imag(value)) > REAL_TOL:
        raise InvariantError(f"{what} has imaginary residue {np.imag(value):.3e}")
    return float(np.real(value))


def outcome_label(m) -> str:
    return {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[m]


# -- operation level ---------------------------------------------------------

def segment_unitaries(model: ModelSpec, schedule: Schedule) -> list[np.ndarray]:
    return [evolution_unitary(model, tau, kind) for tau, kind in zip(schedule.durations, schedule.kinds)]


def segment_maps(model: ModelSpec, schedule: Schedule) -> list[LinearMap]:
    return [conjugation_map(u) for u in segment_unitaries(model, schedule)]


def _env_dim(segments: Sequence[LinearMap]) -> int:
    return segments[0].dim // 2


def dd_chain(segments: Sequence[LinearMap], pattern) -> LinearMap:
    pattern = normalize_pattern(pattern, len(segments))
    e = _env_dim(segments)
    chain = [segments[0]]
    for s, seg in zip(pattern, segments[1:]):
        if s != "i":
            chain.append(pulse_map(s, e))
        chain.append(seg)
    return compose_all(chain)


def dd_map(model: ModelSpec, schedule: Schedule, pattern) -> LinearMap:
    return dd_chain(segment_maps(model, schedule), pattern)


def branch_chain(segments: Sequence[LinearMap], outcomes, axes=None) -> LinearMap:
    outcomes = tuple(outcomes)
    if len(outcomes) != len(segments):
        raise DomainError(f"{len(outcomes)} outcomes for {len(segments)} evolutions")
    axes = tuple(axes) if axes is not None else ("x",) * len(outcomes)
    e = _env_dim(segments)
    chain = []
    for seg, m, a in zip(segments, outcomes, axes):
        chain += [seg, projection_map(a, m, e)]
    return compose_all(chain)


def measurement_branch_map(model: ModelSpec, schedule: Schedule, outcomes, axes=None) -> LinearMap:
    return branch_chain(segment_maps(model, schedule), outcomes, axes)


def _chains(segments: Sequence[LinearMap], slot_options) -> list[LinearMap]:
    """All chains ``U_n o A_{n-1} o ... o A_1 o U_1`` with ``A_k`` drawn from
    ``slot_options[k-1]`` (``None`` = idle), sharing common prefixes."""
    level = [segments[0]]
    for opts, seg in zip(slot_options, segments[1:]):
        level = [seg @ (m if op is None else op @ m) for m in level for op in opts]
    return level


def nonselective_chain(segments: Sequence[LinearMap], axes=None) -> dict:
    """Both sides of the non-selective-measurement identity, keyed by final outcome.

    Returns ``{m_n: (summed_branches, averaged_pulse_sequences)}``. Intermediate
    slot ``k`` uses ``axes[k-1]`` for both its measurement and its pulse; the
    final measurement is along x.
    """
    n = len(segments)
    axes = tuple(axes) if axes is not None else ("x",) * (n - 1)
    e = _env_dim(segments)
    branches = _chains(segments, [[projection_map(a, m, e) for m in outcomes_for(a)] for a in axes])
    pulses = _chains(segments, [[None, pulse_map(a, e)] for a in axes])
    branch_sum = lincomb([(1.0, b) for b in branches])
    dd_sum = lincomb([(1.0, p) for p in pulses])
    out = {}
    for m_n in outcomes_for("x"):
        final = projection_map("x", m_n, e)
        out[m_n] = (final @ branch_sum, (1.0 / 2 ** (n - 1)) * (final @ dd_sum))
    return out


def nonselective_map(model: ModelSpec, schedule: Schedule) -> dict:
    return nonselective_chain(segment_maps(model, schedule))


# -- signed expansion of a pulse sequence into measurement terms -------------

@dataclass(frozen=True)
class ExpansionTerm:
    """``coefficient * U_n ... P_{m} U_k ...`` with pulses replaced by
    projections at ``slots`` (1-based) and dropped elsewhere."""

    n: int
    coefficient: int
    slots: tuple
    outcomes: tuple
    axes: tuple

    @property
    def k(self) -> int:
        return len(self.slots)

    @property
    def intervals(self) -> tuple:
        """Segment indices merged between consecutive measurements."""
        bounds = (0,) + self.slots + (self.n,)
        return tuple(tuple(range(a + 1, b + 1)) for a, b in zip(bounds, bounds[1:]))

    def label(self) -> str:
        parts = []
        for k in range(1, self.n + 1):
            parts.append(f"U{k}")
            if k in self.slots:
                idx = self.slots.index(k)
                m, a = self.outcomes[idx], self.axes[idx]
                sign = "+" if outcome_eigenvalue(a, m) > 0 else "−"
                parts.append(f"P{sign}" if a == "x" else f"PY{sign}i")
        return "[" + " ".join(reversed(parts)) + "]"

    def to_map(self, segments: Sequence[LinearMap]) -> LinearMap:
        e = _env_dim(segments)
        chain = []
        for k, seg in enumerate(segments, start=1):
            chain.append(seg)
            if k in self.slots:
                idx = self.slots.index(k)
                chain.append(projection_map(self.axes[idx], self.outcomes[idx], e))
        return compose_all(chain)


def dd_expansion(n: int, axes: Sequence[str] | None = None) -> list[ExpansionTerm]:
    """Expand the sequence with a pulse in every one of the ``n - 1`` slots.

    Each pulse ``A`` is replaced by ``2 (P_+ + P_-) - I`` and the product is
    distributed; idle factors merge the neighbouring evolutions.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    axes = tuple(axes) if axes is not None else ("x",) * (n - 1)
    if len(axes) != n - 1:
        raise DomainError(f"{len(axes)} axes for {n - 1} pulse slots")
    per_slot = [[(None, -1)] + [(m, 2) for m in outcomes_for(a)] for a in axes]
    terms = []
    for choice in itertools.product(*per_slot):
        coeff = int(np.prod([c for _, c in choice])) if choice else 1
        slots = tuple(k + 1 for k, (m, _) in enumerate(choice) if m is not None)
        outcomes = tuple(m for m, _ in choice if m is not None)
        term_axes = tuple(axes[s - 1] for s in slots)
        terms.append(ExpansionTerm(n, coeff, slots, outcomes, term_axes))

    def order(t):
        return (t.k, t.slots, [outcomes_for(a).index(m) for m, a in zip(t.outcomes, t.axes)])

    return sorted(terms, key=order)


def evaluate_expansion(terms: Sequence[ExpansionTerm], segments: Sequence[LinearMap]) -> LinearMap:
    return lincomb([(t.coefficient, t.to_map(segments)) for t in terms])


def format_expansion(terms: Sequence[ExpansionTerm]) -> str:
    out = []
    for t in terms:
        sign = "+" if t.coefficient > 0 else "−"
        out.append(f"{sign}{abs(t.coefficient)}·{t.label()}")
    return " ".join(out)


def signal_coefficients(n: int) -> list[tuple[int, tuple]]:
    """Coefficient of each ``O_{k+1}[t_n + subset]`` in the all-pulse W signal.

    Obtained by grouping the expansion terms by their measurement slots; the
    sum over intermediate outcomes of one group is a non-selective protocol.
    """
    groups: dict[tuple, set] = {}
    for t in dd_expansion(n):
        groups.setdefault(t.slots, set()).add(t.coefficient)
    out = []
    for slots, coeffs in sorted(groups.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if len(coeffs) != 1:
            raise InvariantError(f"mixed coefficients {coeffs} for slots {slots}")
        out.append((coeffs.pop(), slots))
    return out


# -- state level -------------------------------------------------------------

def _branch_probabilities(unitaries, rho0, axes, env_dim) -> dict:
    projs = {
        (a, m): local(projector(a, outcome_eigenvalue(a, m)), env_dim)
        for a in set(axes)
        for m in outcomes_for(a)
    }
    probs = {}

    def walk(k, rho, prefix):
        if k == len(unitaries):
            probs[prefix] = _real(np.trace(rho), "branch probability")
            return
        u = unitaries[k]
        rho = u @ rho @ u.conj().T
        for m in outcomes_for(axes[k]):
            p = projs[(axes[k], m)]
            walk(k + 1, p @ rho @ p, prefix + (m,))

    walk(0, np.asarray(rho0, dtype=complex), ())
    return probs


class SignalTable:
    """Scalar signals keyed by ``(kind, schedule key, label)``.

    ``kind`` is one of ``W``, ``O``, ``P``, ``P_R``. Values are stored as
    complex numbers; reading one back asserts it is real.
    """

    KINDS = ("W", "O", "P", "P_R")

    def __init__(self):
        self._entries: dict = {}
        self._schedules: dict = {}
        self.meta: dict = {}

    def add(self, kind: str, schedule: Schedule, label, value) -> None:
        if kind not in self.KINDS:
            raise DomainError(f"unknown signal kind {kind!r}")
        self._schedules[schedule.key] = schedule
        self._entries[(kind, schedule.key, label)] = complex(value)

    def get(self, kind: str, schedule: Schedule, label) -> float:
        return _real(self._entries[(kind, schedule.key, label)], f"{kind}{label}")

    def select(self, kind: str, schedule: Schedule) -> dict:
        return {
            lab: _real(v, f"{kind}{lab}")
            for (k, key, lab), v in self._entries.items()
            if k == kind and key == schedule.key
        }

    def schedule(self, key: str) -> Schedule:
        return self._schedules[key]

    def items(self):
        def canon(item):
            (kind, key, lab), _ = item
            return (kind, key, str(lab))

        return sorted(self._entries.items(), key=canon)

    def __len__(self) -> int:
        return len(self._entries)

    def update(self, other: "SignalTable") -> None:
        self._entries.update(other._entries)
        self._schedules.update(other._schedules)

    def check_probabilities(self, schedule: Schedule, kind: str = "P", tol: float = 1e-10) -> float:
        probs = self.select(kind, schedule)
        bad = [p for p in probs.values() if not (-tol <= p <= 1 + tol)]
        if bad:
            raise InvariantError(f"probabilities outside [0, 1]: {bad}")
        err = abs(sum(probs[k] for k in sorted(probs, key=str)) - 1.0)
        if err > tol:
            raise InvariantError(f"probabilities sum to 1 + {err:.3e}")
        return err


def outcome_probabilities(model: ModelSpec, rho0, schedule: Schedule, axes=None) -> SignalTable:
    check_state(rho0)
    axes = tuple(axes) if axes is not None else ("x",) * schedule.n
    probs = _branch_probabilities(segment_unitaries(model, schedule), rho0, axes, model.dims.env_dim)
    table = SignalTable()
    for outcomes, p in probs.items():
        table.add("P", schedule, outcomes, p)
    table.check_probabilities(schedule)
    return table


def _last_expectation(probs: dict) -> float:
    return sum(o[-1] * probs[o] for o in sorted(probs))


def O_signal(model: ModelSpec, rho0, schedule: Schedule) -> float:
    """Expectation of the last of ``n`` sequential x measurements."""
    probs = outcome_probabilities(model, rho0, schedule).select("P", schedule)
    return _last_expectation(probs)


def O_subset(model: ModelSpec, rho0, schedule: Schedule, slots: Iterable[int]) -> float:
    """Last-measurement expectation when only the slots in ``slots`` (1-based,
    ``< n``) carry a measurement before the final one at ``t_n``.

    Evolutions across unmeasured slots are merged.
    """
    slots = tuple(sorted(slots))
    if any(not (1 <= s < schedule.n) for s in slots):
        raise DomainError(f"measurement slots {slots} outside 1..{schedule.n - 1}")
    us = segment_unitaries(model, schedule)
    merged = []
    bounds = (0,) + slots + (schedule.n,)
    for a, b in zip(bounds, bounds[1:]):
        u = np.eye(us[0].shape[0], dtype=complex)
        for k in range(a, b):
            u = us[k] @ u
        merged.append(u)
    check_state(rho0)
    probs = _branch_probabilities(merged, rho0, ("x",) * len(merged), model.dims.env_dim)
    return _last_expectation(probs)


def W_signal(model: ModelSpec, rho0, schedule: Schedule, pattern) -> float:
    """Expectation of sigma_x at ``t_n`` after the pulse pattern."""
    pattern = normalize_pattern(pattern, schedule.n)
    check_state(rho0)
    e = model.dims.env_dim
    us = segment_unitaries(model, schedule)
    rho = np.asarray(rho0, dtype=complex)
    rho = us[0] @ rho @ us[0].conj().T
    for s, u in zip(pattern, us[1:]):
        if s != "i":
            p = local(pauli(s), e)
            rho = p @ rho @ p
        rho = u @ rho @ u.conj().T
    return _real(np.trace(local(pauli("x"), e) @ rho), "W")


def W_table(model: ModelSpec, rho0, schedule: Schedule) -> SignalTable:
    table = SignalTable()
    for p in all_patterns(schedule.n):
        table.add("W", schedule, "".join(p), W_signal(model, rho0, schedule, p))
    return table


# -- identity checks -----------------------------------------------------------

def _params(model: ModelSpec, schedule: Schedule, **extra) -> dict:
    return {
        "n": schedule.n,
        "env_dim": model.dims.env_dim,
        "seed": model.seed,
        "kinds": "/".join(k[0] for k in schedule.kinds),
        **extra,
    }


def verify_nonselective(model: ModelSpec, schedule: Schedule, tol: float = CHAIN_TOL) -> Check:
    sides = nonselective_map(model, schedule)
    err = max(lhs.distance(rhs) for lhs, rhs in sides.values())
    return Check("nonselective", "non-selective = averaged pulses", err, tol, _params(model, schedule))


def verify_expansion(model: ModelSpec, schedule: Schedule, tol: float = CHAIN_TOL) -> Check:
    segs = segment_maps(model, schedule)
    pulses = dd_chain(segs, ("x",) * (schedule.n - 1))
    err = pulses.distance(evaluate_expansion(dd_expansion(schedule.n), segs))
    return Check("expansion", "pulses = signed measurement expansion", err, tol, _params(model, schedule))


def verify_on_in_wn(model: ModelSpec, schedule: Schedule, rho0=None, tol: float = CHAIN_TOL) -> Check:
    rho0 = plus_state(model) if rho0 is None else rho0
    o_n = O_signal(model, rho0, schedule)
    ws = [W_signal(model, rho0, schedule, p) for p in all_patterns(schedule.n)]
    err = abs(o_n - sum(ws) / len(ws))
    return Check("o_from_w", "O_n = mean of W over patterns", err, tol, _params(model, schedule), info={"O_n": o_n})


def wn_in_ok_sides(model: ModelSpec, schedule: Schedule, rho0=None) -> tuple[float, float]:
    rho0 = plus_state(model) if rho0 is None else rho0
    lhs = W_signal(model, rho0, schedule, ("x",) * (schedule.n - 1))
    rhs = sum(c * O_subset(model, rho0, schedule, slots) for c, slots in signal_coefficients(schedule.n))
    return lhs, rhs


def verify_wn_in_ok(model: ModelSpec, schedule: Schedule, rho0=None, tol: float = CHAIN_TOL) -> Check:
    lhs, rhs = wn_in_ok_sides(model, schedule, rho0)
    return Check("w_from_o", "W_(x..x) = signed sum of O_k over subsets", abs(lhs - rhs), tol, _params(model, schedule))


# worked examples, written out term by term

def echo_from_two_measurements(model: ModelSpec, t1: float, t2: float, kinds=None, rho0=None) -> tuple[float, float]:
    """``W_x(t2, t1)`` and ``2 O_2(t2, t1) - O_1(t2)``."""
    rho0 = plus_state(model) if rho0 is None else rho0
    s2 = Schedule((t1, t2), kinds)
    w = W_signal(model, rho0, s2, "x")
    o1 = O_subset(model, rho0, s2, ())
    return w, 2 * O_signal(model, rho0, s2) - o1


def two_measurements_from_echo(model: ModelSpec, t1: float, t2: float, kinds=None, rho0=None) -> tuple[float, float]:
    """``O_2(t2, t1)`` and ``(W_i + W_x) / 2``."""
    rho0 = plus_state(model) if rho0 is None else rho0
    s = Schedule((t1, t2), kinds)
    return O_signal(model, rho0, s), 0.5 * (W_signal(model, rho0, s, "i") + W_signal(model, rho0, s, "x"))


def three_measurements_from_pulses(model: ModelSpec, times, kinds=None, rho0=None) -> tuple[float, float]:
    rho0 = plus_state(model) if rho0 is None else rho0
    s = Schedule(times, kinds)
    ws = [W_signal(model, rho0, s, p) for p in ("ii", "xi", "ix", "xx")]
    return O_signal(model, rho0, s), 0.25 * sum(ws)


def cp2_from_measurements(model: ModelSpec, tau: float, rho0=None) -> tuple[float, float]:
    """Two-pulse Carr-Purcell signal with delays tau, 2 tau, tau against
    ``O_1(4t) - 2[O_2(4t, t) + O_2(4t, 3t)] + 4 O_3(4t, 3t, t)``."""
    rho0 = plus_state(model) if rho0 is None else rho0
    w = W_signal(model, rho0, Schedule((tau, 3 * tau, 4 * tau)), "xx")
    rhs = (
        O_signal(model, rho0, Schedule((4 * tau,)))
        - 2 * (O_signal(model, rho0, Schedule((tau, 4 * tau))) + O_signal(model, rho0, Schedule((3 * tau, 4 * tau))))
        + 4 * O_signal(model, rho0, Schedule((tau, 3 * tau, 4 * tau)))
    )
    return w, rhs


def expansion_bookkeeping(n: int) -> tuple[int, float]:
    """Term count and the sum of ``coefficient * 2**-k`` over the expansion."""
    terms = dd_expansion(n)
    return len(terms), float(sum(t.coefficient * 2.0 ** (-t.k) for t in terms))

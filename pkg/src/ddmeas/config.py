"""Experiment configuration (JSON) and signal-table output (CSV / JSON).

Complex matrices are written as nested lists of ``[re, im]`` pairs. Floats in
tables use 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dephasing as dph
from . import protocols as pr
from .linalg import DomainError, HilbertDims, ShapeError, dephasing_model, general_model, projector, random_model

FLOAT_FMT = "{:.16e}"
FAMILIES = ("dd", "meas", "meas_reprep")
QUBIT_STATES = ("+", "-", "0", "1", "mixed")


class ConfigError(ValueError):
    """Malformed experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "general"
    system_dim: int = 2
    env_dim: int = 1
    seed: int = 0
    # explicit operators; any present key replaces the random draw
    # general: h_q, h_e, v_x, v_y, v_z, env_initial
    # pure_dephasing: a_z, a_1, v_z, v_1, env_initial
    hamiltonian: dict | None = None


@dataclass(frozen=True)
class ScheduleConfig:
    times: tuple = ()
    segment_kinds: tuple | None = None
    grid: tuple | None = None  # several time lists sharing segment_kinds


@dataclass(frozen=True)
class ProtocolConfig:
    family: str = "dd"
    pattern: str | None = None  # pulse string like "xix", or "all"
    initial_qubit: str = "+"


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _frozen(v):
    if isinstance(v, list):
        return tuple(_frozen(x) for x in v)
    if isinstance(v, dict):
        return {k: _frozen(x) for k, x in v.items()}
    return v


def _section(data: dict, name: str, cls):
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(name, "must be an object")
    known = cls.__dataclass_fields__
    for key in raw:
        if key not in known:
            raise ConfigError(f"{name}.{key}", "unknown field")
    return cls(**{k: _frozen(v) for k, v in raw.items()})


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("<document>", "top level must be an object")
    for key in data:
        if key not in ExperimentConfig.__dataclass_fields__:
            raise ConfigError(key, "unknown section")
    cfg = ExperimentConfig(
        model=_section(data, "model", ModelConfig),
        schedule=_section(data, "schedule", ScheduleConfig),
        protocol=_section(data, "protocol", ProtocolConfig),
        output=_section(data, "output", OutputConfig),
    )
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# -- validation and construction ------------------------------------------------------

def _matrix(value, name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(name, "matrix entries must be [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(name, f"expected a square matrix of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_pairs(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def schedules(cfg: ExperimentConfig) -> list[pr.Schedule]:
    sc = cfg.schedule
    lists = sc.grid if sc.grid else (sc.times,)
    out = []
    for i, times in enumerate(lists):
        name = f"schedule.grid[{i}]" if sc.grid else "schedule.times"
        try:
            out.append(pr.Schedule(tuple(times), sc.segment_kinds))
        except DomainError as exc:
            field_name = "schedule.segment_kinds" if "kind" in str(exc) else name
            raise ConfigError(field_name, str(exc)) from None
    if len({s.n for s in out}) > 1:
        raise ConfigError("schedule.grid", "all grid entries need the same number of times")
    return out


def patterns(cfg: ExperimentConfig, n: int) -> list[tuple]:
    p = cfg.protocol.pattern
    if cfg.protocol.family != "dd":
        if p not in (None, ""):
            raise ConfigError("protocol.pattern", "only the dd family takes a pulse pattern")
        return []
    if p == "all":
        return pr.all_patterns(n)
    if p is None:
        raise ConfigError("protocol.pattern", "dd family needs a pattern (or 'all')")
    try:
        return [pr.normalize_pattern(p, n)]
    except DomainError as exc:
        raise ConfigError("protocol.pattern", str(exc)) from None


def build_model(cfg: ExperimentConfig):
    mc = cfg.model
    if mc.system_dim != 2:
        raise ConfigError("model.system_dim", "simulations are for a qubit (system_dim = 2)")
    if mc.kind not in ("general", "pure_dephasing"):
        raise ConfigError("model.kind", f"unknown kind {mc.kind!r}")
    if not mc.hamiltonian:
        return random_model(HilbertDims(2, mc.env_dim), mc.kind, mc.seed)
    h = dict(mc.hamiltonian)
    e = mc.env_dim
    mats = {}
    for key, value in h.items():
        if key in ("a_z", "a_1"):
            continue
        mats[key] = _matrix(value, f"model.hamiltonian.{key}")
        want = (2, 2) if key == "h_q" else (e, e)
        if mats[key].shape != want:
            raise ConfigError(f"model.hamiltonian.{key}", f"expected shape {want}, got {mats[key].shape}")
    zero = np.zeros((e, e))
    rho_e = mats.get("env_initial", np.eye(e) / e)
    try:
        if mc.kind == "pure_dephasing":
            unknown = set(h) - {"a_z", "a_1", "v_z", "v_1", "env_initial"}
            if unknown:
                raise ConfigError(f"model.hamiltonian.{sorted(unknown)[0]}", "not a pure-dephasing parameter")
            return dephasing_model(float(h.get("a_z", 0.0)), float(h.get("a_1", 0.0)),
                                   mats.get("v_z", zero), mats.get("v_1", zero), rho_e, seed=mc.seed)
        unknown = set(h) - {"h_q", "h_e", "v_x", "v_y", "v_z", "env_initial"}
        if unknown:
            raise ConfigError(f"model.hamiltonian.{sorted(unknown)[0]}", "not a general-model operator")
        couplings = {k[-1]: mats[k] for k in ("v_x", "v_y", "v_z") if k in mats}
        return general_model(mats.get("h_q", np.zeros((2, 2))), mats.get("h_e", zero), couplings, rho_e, seed=mc.seed)
    except (DomainError, ShapeError) as exc:
        raise ConfigError("model.hamiltonian", str(exc)) from None


def initial_state(cfg: ExperimentConfig, model) -> np.ndarray:
    q = cfg.protocol.initial_qubit
    qubit = {
        "+": projector("x", 1),
        "-": projector("x", -1),
        "0": projector("z", 1),
        "1": projector("z", -1),
        "mixed": np.eye(2) / 2,
    }.get(q)
    if qubit is None:
        raise ConfigError("protocol.initial_qubit", f"choose from {QUBIT_STATES}")
    return np.kron(qubit, model.env_initial)


def validate(cfg: ExperimentConfig) -> None:
    if cfg.protocol.family not in FAMILIES:
        raise ConfigError("protocol.family", f"choose from {FAMILIES}")
    if cfg.output.format not in ("json", "csv"):
        raise ConfigError("output.format", "choose json or csv")
    if cfg.model.env_dim < 1:
        raise ConfigError("model.env_dim", "must be >= 1")
    scheds = schedules(cfg)
    patterns(cfg, scheds[0].n)
    if cfg.protocol.initial_qubit not in QUBIT_STATES:
        raise ConfigError("protocol.initial_qubit", f"choose from {QUBIT_STATES}")


# -- simulation -------------------------------------------------------------------------

def _sign(m) -> str:
    return "+1" if m > 0 else "-1"


def simulate(cfg: ExperimentConfig) -> tuple[list[str], list[dict], pr.SignalTable]:
    """Evaluate the configured protocol on every schedule; returns header, rows, table."""
    validate(cfg)
    model = build_model(cfg)
    rho0 = initial_state(cfg, model)
    scheds = schedules(cfg)
    n = scheds[0].n
    tcols = [f"t_{k}" for k in range(1, n + 1)]
    mcols = [f"m_{k}" for k in range(1, n + 1)]
    table = pr.SignalTable()
    rows = []
    family = cfg.protocol.family
    if family == "dd":
        header = tcols + ["pattern", "W"]
        pats = patterns(cfg, n)
        for s in scheds:
            for p in pats:
                w = pr.W_signal(model, rho0, s, p)
                table.add("W", s, "".join(p), w)
                rows.append({**dict(zip(tcols, s.times)), "pattern": "".join(p), "W": w})
        return header, rows, table
    header = ["record"] + tcols + mcols + ["value"]
    for s in scheds:
        if family == "meas":
            probs = pr.outcome_probabilities(model, rho0, s)
            kind, summary = "P", ("O", pr.O_signal(model, rho0, s))
        else:
            probs = dph.repreparation_probabilities(model, rho0, s)
            kind, summary = "P_R", ("corr", dph.correlation_R(model, rho0, s))
            table.meta.update(probs.meta)
        table.update(probs)
        for outcomes, p in sorted(probs.select(kind, s).items(), key=lambda kv: [-m for m in kv[0]]):
            rows.append({"record": kind, **dict(zip(tcols, s.times)),
                         **{c: _sign(m) for c, m in zip(mcols, outcomes)}, "value": p})
        table.add("O", s, summary[0], summary[1])
        rows.append({"record": summary[0], **dict(zip(tcols, s.times)), **{c: "" for c in mcols},
                     "value": summary[1]})
    return header, rows, table


def _cell(v) -> str:
    return FLOAT_FMT.format(v) if isinstance(v, float) else str(v)


def rows_to_csv(header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r[h]) for h in header])
    return buf.getvalue()


def rows_to_json(cfg: ExperimentConfig, header: list[str], rows: list[dict], meta: dict | None = None) -> str:
    doc = {"config": cfg.to_dict(), "columns": header, "rows": rows}
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=2)


def read_csv(text: str) -> list[dict]:
    """Parse a table written by :func:`rows_to_csv`; numeric cells become floats."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in row.items():
            try:
                parsed[k] = float(v) if (k.startswith("t_") or k in ("W", "value")) else v
            except ValueError:
                parsed[k] = v
        out.append(parsed)
    return out

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddmeas import cli
from ddmeas import config as cfgmod
from ddmeas import protocols as pr
from ddmeas.config import ConfigError, ExperimentConfig, ModelConfig, OutputConfig, ProtocolConfig, ScheduleConfig

PRECESSION = {"a_z": 1.0, "a_1": 0.4, "v_z": [[[0.5, 0.0]]], "v_1": [[[1.0, 0.0]]]}


def config(**sections):
    doc = {
        "model": {"kind": "general", "env_dim": 2, "seed": 3},
        "schedule": {"times": [0.4, 1.1, 1.5]},
        "protocol": {"family": "dd", "pattern": "all"},
        "output": {"format": "csv"},
    }
    for k, v in sections.items():
        doc[k] = {**doc[k], **v}
    return doc


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@st.composite
def configs(draw):
    n = draw(st.integers(1, 4))
    times = sorted(draw(st.sets(st.floats(0.01, 10.0, allow_nan=False), min_size=n, max_size=n)))
    family = draw(st.sampled_from(cfgmod.FAMILIES))
    kinds = draw(st.none() | st.lists(st.sampled_from(pr.SEGMENT_KINDS), min_size=n, max_size=n).map(tuple))
    pattern = draw(st.sampled_from(["all", "x" * (n - 1), "i" * (n - 1)])) if family == "dd" else None
    e = draw(st.integers(1, 3))
    ham = draw(st.none() | st.just({"h_q": (((0.5, 0.0), (0.1, -0.2)), ((0.1, 0.2), (-0.5, 0.0)))}))
    return ExperimentConfig(
        model=ModelConfig("general", 2, e, draw(st.integers(0, 2**32 - 1)), ham),
        schedule=ScheduleConfig(tuple(times), kinds),
        protocol=ProtocolConfig(family, pattern, draw(st.sampled_from(cfgmod.QUBIT_STATES))),
        output=OutputConfig(draw(st.sampled_from(["json", "csv"])), draw(st.none() | st.just("out/table.csv"))),
    )


@given(configs())
def test_config_roundtrip(cfg):
    text = cfg.dumps()
    again = cfgmod.parse_config(text)
    assert again == cfg
    assert again.dumps() == text


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"protocol": {"pattern": "xxx"}}, "protocol.pattern"),
        ({"protocol": {"pattern": "xq"}}, "protocol.pattern"),
        ({"protocol": {"family": "other"}}, "protocol.family"),
        ({"schedule": {"times": [1.0, 0.5]}}, "schedule.times"),
        ({"schedule": {"segment_kinds": ["composite"]}}, "schedule.segment_kinds"),
        ({"output": {"format": "xml"}}, "output.format"),
        ({"model": {"env_dim": 0}}, "model.env_dim"),
        ({"model": {"bogus": 1}}, "model.bogus"),
        ({"protocol": {"initial_qubit": "z"}}, "protocol.initial_qubit"),
    ],
)
def test_config_errors_name_field(patch, field):
    with pytest.raises(ConfigError) as exc:
        cfgmod.parse_config(json.dumps(config(**patch)))
    assert exc.value.field == field


def test_bad_matrices_name_field():
    doc = config(model={"kind": "pure_dephasing", "env_dim": 1, "hamiltonian": {"a_z": 1.0, "v_z": [[0.5]]}})
    with pytest.raises(ConfigError) as exc:
        cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert exc.value.field == "model.hamiltonian.v_z"
    doc = config(model={"hamiltonian": {"h_e": [[[1, 0]]]}})
    with pytest.raises(ConfigError) as exc:
        cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert exc.value.field == "model.hamiltonian.h_e"


def test_matrix_pairs_roundtrip():
    a = np.array([[1 + 2j, -0.5], [0.25j, 3]])
    assert np.array_equal(cfgmod._matrix(cfgmod.matrix_to_pairs(a), "m"), a)


def test_simulate_free_induction_grid():
    grid = [[t / 2, t] for t in np.linspace(0.1, 9.0, 30)]
    doc = config(model={"kind": "pure_dephasing", "env_dim": 1, "hamiltonian": PRECESSION},
                 schedule={"times": [], "grid": grid}, protocol={"pattern": "i"})
    header, rows, _ = cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert header == ["t_1", "t_2", "pattern", "W"]
    assert max(abs(r["W"] - np.cos(r["t_2"])) for r in rows) <= 1e-10


def test_simulate_echo_grid():
    grid = [[t, 2 * t] for t in np.linspace(0.1, 5.0, 30)]
    doc = config(model={"kind": "pure_dephasing", "env_dim": 1, "hamiltonian": PRECESSION},
                 schedule={"times": [], "grid": grid}, protocol={"pattern": "x"})
    _, rows, _ = cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert max(abs(r["W"] - 1.0) for r in rows) <= 1e-10


def test_simulate_meas_without_dynamics():
    zero2 = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
    doc = config(model={"hamiltonian": {"h_q": zero2}}, protocol={"family": "meas", "pattern": None})
    header, rows, _ = cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert header == ["record", "t_1", "t_2", "t_3", "m_1", "m_2", "m_3", "value"]
    probs = [r for r in rows if r["record"] == "P"]
    nonzero = [r for r in probs if abs(r["value"]) > 1e-15]
    assert len(nonzero) == 1 and (nonzero[0]["m_1"], nonzero[0]["m_2"], nonzero[0]["m_3"]) == ("+1", "+1", "+1")
    assert nonzero[0]["value"] == pytest.approx(1.0)
    assert rows[-1]["record"] == "O" and rows[-1]["value"] == pytest.approx(1.0)


def test_simulate_reprep_correlation_row():
    doc = config(model={"kind": "pure_dephasing", "env_dim": 2, "seed": 9},
                 protocol={"family": "meas_reprep", "pattern": None})
    cfg = cfgmod.parse_config(json.dumps(doc))
    _, rows, table = cfgmod.simulate(cfg)
    corr = rows[-1]
    assert corr["record"] == "corr"
    assert sum(r["value"] for r in rows if r["record"] == "P_R") == pytest.approx(1.0, abs=1e-12)
    meas = cfgmod.parse_config(json.dumps(config(model={"kind": "pure_dephasing", "env_dim": 2, "seed": 9},
                                                 protocol={"family": "meas", "pattern": None})))
    _, mrows, _ = cfgmod.simulate(meas)
    assert abs(corr["value"] - mrows[-1]["value"]) <= 1e-10
    assert "flag" not in table.meta


def test_csv_roundtrip_reproduces_O_from_W(tmp_path):
    doc = config()
    dd = write(tmp_path, doc, "dd.json")
    meas = write(tmp_path, config(protocol={"family": "meas", "pattern": None}), "meas.json")
    assert cli.main(["simulate", "--config", str(dd), "--out", str(tmp_path / "w.csv")]) == 0
    assert cli.main(["simulate", "--config", str(meas), "--out", str(tmp_path / "o.csv")]) == 0
    w_rows = cfgmod.read_csv((tmp_path / "w.csv").read_text())
    o_rows = cfgmod.read_csv((tmp_path / "o.csv").read_text())
    assert len(w_rows) == 4
    o_n = [r for r in o_rows if r["record"] == "O"][0]["value"]
    assert abs(np.mean([r["W"] for r in w_rows]) - o_n) <= 1e-9
    # floats survive the text round trip bit for bit
    _, rows, _ = cfgmod.simulate(cfgmod.parse_config(json.dumps(doc)))
    assert [r["W"] for r in rows] == [r["W"] for r in w_rows]


def test_simulate_json_output(tmp_path, capsys):
    path = write(tmp_path, config(output={"format": "json"}))
    assert cli.main(["simulate", "--config", str(path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][-1] == "W" and len(doc["rows"]) == 4
    assert cli.main(["simulate", "--config", str(path), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("t_1,t_2,t_3,pattern,W\n")


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["expand", "2"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "−1·[U2 U1] +2·[U2 P+ U1] +2·[U2 P− U1]"
    assert cli.main(["expand", "0"]) == 2
    assert cli.main(["expand", "7"]) == 2
    assert cli.main(["verify", "--scope", "nope"]) == 2
    assert cli.main(["bogus"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write(tmp_path, config(protocol={"pattern": "xxxx"}))
    assert cli.main(["simulate", "--config", str(bad)]) == 2
    assert "protocol.pattern" in capsys.readouterr().err


def test_expand_term_table():
    text = cli.expand_text(3)
    lines = text.splitlines()
    assert lines[0].count("·") == 9
    assert "terms: 9" in text
    assert cli.expand_text(1).splitlines()[0] == "+1·[U1]"


def test_verify_writes_report_and_exit(tmp_path, monkeypatch):
    out = tmp_path / "r.json"
    assert cli.main(["verify", "--scope", "multiqubit", "--seed", "1", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and report["summary"]["failed"] == 0

    from ddmeas import verify
    from ddmeas.report import Check

    monkeypatch.setitem(verify.SUITES, "multiqubit", lambda seed: [Check("broken", "x", 1.0, 1e-10)])
    assert cli.main(["verify", "--scope", "multiqubit", "--out", str(out)]) == 1
    report = json.loads(out.read_text())
    assert not report["passed"] and report["records"][0]["check_id"] == "broken"


def test_no_color(monkeypatch):
    class Tty:
        def isatty(self):
            return True

    monkeypatch.delenv("NO_COLOR", raising=False)
    assert cli._color("PASS", "32", Tty()) != "PASS"
    monkeypatch.setenv("NO_COLOR", "1")
    assert cli._color("PASS", "32", Tty()) == "PASS"

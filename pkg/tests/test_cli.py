import csv
import json
import math

import pytest

from cmhilbert.cli import main
from cmhilbert.report import ConfigError, run_scenario
from cmhilbert.scenarios import REGISTRY, TOPICS

FAST = """
[global]
seed = 7

[hilbert-axioms]
triples = 50

[eta-zeta-roundtrip]
samples = 1000
"""


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "fast.ini"
    p.write_text(FAST)
    return str(p)


def test_registry_size_and_topics():
    assert len(REGISTRY) >= 12
    assert {s.topic for s in REGISTRY.values()} == set(TOPICS)
    for s in REGISTRY.values():
        assert s.anchors and s.description
        assert s.defaults, f"{s.id} has no documented parameters"


def test_list_prints_every_scenario_with_defaults(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for sid, s in REGISTRY.items():
        assert sid in out
        for key in s.defaults:
            assert f"{key}=" in out


def test_list_json(capsys):
    assert main(["list", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [d["id"] for d in doc] == list(REGISTRY)


def test_run_writes_report(tmp_path, config):
    out = tmp_path / "r.json"
    assert main(["run", "--scenario", "hilbert-axioms", "--config", config, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    body = doc["body"]
    assert body["scenario"] == "hilbert-axioms" and body["seed"] == 7 and body["pass"] is True
    assert body["parameters"]["triples"] == 50
    assert {c["name"] for c in body["checks"]} >= {"additivity", "cauchy-schwarz", "parallelogram"}
    assert all(set(c) >= {"name", "lhs", "rhs", "residual", "tolerance", "pass"} for c in body["checks"])
    assert "timestamp" in doc


def test_reports_are_deterministic(tmp_path, config):
    bodies = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        main(["run", "--scenario", "hilbert-axioms", "--config", config, "--out", str(out)])
        bodies.append(json.dumps(json.loads(out.read_text())["body"], sort_keys=True))
    assert bodies[0] == bodies[1]
    other = tmp_path / "other.json"
    main(["run", "--scenario", "hilbert-axioms", "--config", config, "--seed", "8", "--out", str(other)])
    assert json.dumps(json.loads(other.read_text())["body"], sort_keys=True) != bodies[0]


def test_parallel_matches_sequential(tmp_path, config):
    seq, par = tmp_path / "seq", tmp_path / "par"
    ids = ["--scenario", "hilbert-axioms", "--scenario", "eta-zeta-roundtrip"]
    assert main(["run", *ids, "--config", config, "--out", str(seq)]) == 0
    assert main(["run", *ids, "--config", config, "--out", str(par), "--parallel", "2"]) == 0
    for name in ("hilbert-axioms.json", "eta-zeta-roundtrip.json"):
        a = json.loads((seq / name).read_text())["body"]
        b = json.loads((par / name).read_text())["body"]
        assert a == b


def test_failing_check_exits_1_and_still_writes(tmp_path):
    cfg = tmp_path / "strict.ini"
    cfg.write_text("[hilbert-axioms]\ntriples = 20\ntolerance = 0\n")
    out = tmp_path / "r.json"
    assert main(["run", "--scenario", "hilbert-axioms", "--config", str(cfg), "--out", str(out)]) == 1
    assert json.loads(out.read_text())["body"]["pass"] is False


@pytest.mark.parametrize(
    "text",
    ["[hilbert-axioms]\ntriples = many\n", "[no-such-scenario]\nx = 1\n", "[hilbert-axioms]\nbogus = 1\n", "not an ini"],
)
def test_bad_config_exits_2(tmp_path, text, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    assert main(["run", "--scenario", "hilbert-axioms", "--config", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_2(tmp_path):
    assert main(["run", "--scenario", "no-such-scenario"]) == 2
    assert main(["run", "--scenario", "hilbert-axioms", "--config", str(tmp_path / "missing.ini")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2


def test_emit_difference_quotient_series(tmp_path):
    out = tmp_path / "dq.csv"
    assert main(["emit", "--scenario", "difference-quotient-rate", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "y", "series"]
    by_label = {}
    for x, y, label in rows[1:]:
        by_label.setdefault(label, []).append((float(x), float(y)))
    assert set(by_label) == {"x1", "x2", "x3", "x4"}
    for pts in by_label.values():
        (h0, r0), (h1, r1) = pts[-2], pts[-1]
        slope = math.log(r1 / r0) / math.log(h1 / h0)
        assert abs(slope - 1) < 0.05


def test_emit_heat_series_is_monotone(tmp_path):
    out = tmp_path / "heat.csv"
    assert main(["emit", "--scenario", "heat-contraction", "--out", str(out)]) == 0
    rows = [r for r in csv.reader(out.open())][1:]
    norms = [float(y) for _, y, label in rows if label == "norm"]
    assert len(norms) == 50
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_emit_without_series_writes_nothing(tmp_path, capsys):
    out = tmp_path / "none.csv"
    assert main(["emit", "--scenario", "hilbert-axioms", "--out", str(out)]) == 2
    assert not out.exists()
    assert "no data series" in capsys.readouterr().err


def test_run_scenario_rejects_unknown_parameter():
    with pytest.raises(ConfigError):
        run_scenario("hilbert-axioms", {"nonsense": 1})


@pytest.mark.parametrize("sid", sorted(set(REGISTRY) - {"generator-symmetry"}))
def test_every_scenario_passes_with_defaults(sid):
    report = run_scenario(sid)
    failed = [(c.name, c.residual, c.tolerance) for c in report.checks if not c.passed]
    assert not failed

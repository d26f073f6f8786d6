import json
import os

import pytest

from intervalzeta.cli import main
from intervalzeta.config import ConfigError, parse_config
from intervalzeta.pipeline import run_pipeline, run_verify
from intervalzeta.presets import preset_document
from intervalzeta.report import csv_tables, render_json

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")


def config_text(name, **run):
    doc = preset_document(name)
    if run:
        doc.setdefault("run", {}).update(run)
    return json.dumps(doc, indent=2)


def test_parse_tent():
    cfg = parse_config(config_text("tent"))
    assert cfg.fmap.n_pieces == 2
    assert [br.slope for br in cfg.fmap.branches] == [2.0, -2.0]
    assert (cfg.order, cfg.ulam_bins, cfg.margin) == (14, 512, 0.05)


def test_parse_rejects_unsorted_breakpoints():
    doc = preset_document("three_interval")
    doc["map"]["breakpoints"] = [0, 0.7, 0.5, 1]
    with pytest.raises(ConfigError, match="breakpoints not increasing") as err:
        parse_config(json.dumps(doc, indent=2))
    assert err.value.line == 3


def test_parse_rejects_reciprocal_weight_on_critical_branch():
    doc = preset_document("logistic4")
    doc["weight"] = {"kind": "reciprocal_derivative", "scale": 1.0}
    with pytest.raises(ConfigError, match="weight not bounded variation"):
        parse_config(json.dumps(doc))


def test_parse_rejects_unknown_key_with_line():
    doc = preset_document("tent")
    doc["run"] = {"order": 10, "colour": "red"}
    text = json.dumps(doc, indent=2)
    with pytest.raises(ConfigError, match="unknown key 'colour'") as err:
        parse_config(text)
    assert text.splitlines()[err.value.line - 1].strip().startswith('"colour"')


def test_parse_json_syntax_error_has_line():
    with pytest.raises(ConfigError) as err:
        parse_config('{\n  "map": {\n    "breakpoints": [0, 1,]\n  }\n}')
    assert err.value.line == 3


@pytest.mark.parametrize("run, message", [
    ({"order": 3}, "order"),
    ({"order": 21}, "order"),
    ({"ulam_bins": 1000}, "ulam_bins"),
    ({"ulam_bins": 8}, "ulam_bins"),
    ({"margin": -0.1}, "margin"),
    ({"tolerance": 0}, "tolerance"),
    ({"order": 7.5}, "integer"),
])
def test_parse_run_ranges(run, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(config_text("tent", **run))


def test_complex_weight_values():
    doc = preset_document("tent")
    doc["weight"] = {"kind": "constant", "values": [[0.5, 0.1], 0.25]}
    cfg = parse_config(json.dumps(doc))
    assert cfg.weight.values == (0.5 + 0.1j, 0.25)


def test_shipped_configs_match_presets():
    for name in ("tent", "weighted_tent", "three_interval", "logistic4", "logistic38", "identity_branch"):
        with open(os.path.join(CONFIGS, f"{name}.json")) as fh:
            assert json.load(fh) == preset_document(name)


def test_verify_verdicts():
    tent = run_verify(parse_config(config_text("tent")))
    assert tent.match.verdict == "match" and tent.exit_code == 0
    wt = run_verify(parse_config(config_text("weighted_tent")))
    assert wt.match.verdict == "match" and wt.exit_code == 0
    ib = run_verify(parse_config(config_text("identity_branch")))
    assert ib.match.verdict == "no testable pairs" and ib.exit_code == 0
    assert ib.certificate.label == "constructed" and ib.zeta_semantics == "zeta_S"
    assert tent.zeta_semantics == "zeta"


def test_report_contents():
    rep = run_verify(parse_config(config_text("tent", order=8)))
    data = json.loads(render_json(rep))
    assert data["d_coefficients"] == [1.0, -2.0] + [0.0] * 7
    assert data["bk_crosscheck"]["verdict"] == "match"
    assert list(data)[:3] == ["command", "config", "run"]
    tables = csv_tables(rep)
    assert tables["traces"].splitlines()[0] == "m,re_T,im_T"
    assert tables["cylinders"].splitlines()[0] == "word,lo,hi"
    assert tables["pressure"].splitlines()[0] == "m,P_m"


def test_identity_plot_data_flags_outside_validity():
    rep = run_verify(parse_config(config_text("identity_branch", order=8)))
    rows = [r.split(",") for r in csv_tables(rep)["plot"].splitlines()[1:]]
    zeta_rows = [r for r in rows if r[2] == "zeta_zero_reciprocal"]
    assert zeta_rows == [["1.0", "0.0", "zeta_zero_reciprocal", "1", "1"]]


def test_complex_numbers_render_as_pairs():
    doc = preset_document("tent")
    doc["weight"] = {"kind": "constant", "values": [[0.5, 0.5], 0.25]}
    doc["run"] = {"order": 6}
    data = json.loads(render_json(run_pipeline(parse_config(json.dumps(doc)), "zeta")))
    assert data["traces"][0] == [0.75, 0.5]


def test_deterministic_json():
    text = config_text("tent")
    a = render_json(run_verify(parse_config(text)), include_wall_time=False)
    b = render_json(run_verify(parse_config(text)), include_wall_time=False)
    assert a == b


@pytest.mark.parametrize("command", ["validate", "cylinders", "periodic", "zeta", "spectrum", "pressure"])
def test_subcommands(tmp_path, capsys, command):
    code = main([command, "--config", os.path.join(CONFIGS, "weighted_tent.json"), "--order", "8"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["command"] == command and "validation" in data


def test_cli_verify_files(tmp_path):
    out = tmp_path / "out"
    code = main(["verify", "--config", os.path.join(CONFIGS, "tent.json"), "--order", "10",
                 "--output", str(out), "--format", "both"])
    assert code == 0
    names = sorted(os.listdir(out))
    assert names == ["cylinders.csv", "d_series.csv", "periodic.csv", "plot.csv", "pressure.csv",
                     "report.json", "traces.csv"]
    assert json.loads((out / "report.json").read_text())["run"]["order"] == 10


def test_cli_exit_codes(tmp_path, capsys):
    doc = preset_document("three_interval")
    doc["map"]["breakpoints"] = [0, 0.7, 0.5, 1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc, indent=2))
    assert main(["validate", "--config", str(bad)]) == 2
    assert "breakpoints not increasing" in capsys.readouterr().err
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 3
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["validate", "--preset", "tent", "--output", str(blocker / "sub")]) == 3
    assert main(["verify", "--preset", "tent", "--order", "8"]) == 0


def test_cli_mismatch_exit_code(tmp_path):
    # the order-8 truncation of the logistic 3.8 series has no stable zeros while
    # the Ulam spectrum has eigenvalues above theta: the cross-check fails
    assert main(["verify", "--preset", "logistic38", "--order", "8", "--ulam-bins", "64",
                 "--output", str(tmp_path)]) == 1


def test_invalid_map_exit_code(tmp_path):
    doc = preset_document("tent")
    doc["map"]["branches"][1]["intercept"] = 1.5  # breaks continuity at 1/2
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    assert main(["verify", "--config", str(path)]) == 2

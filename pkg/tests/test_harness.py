import numpy as np
import pytest
import yaml

from schrodinger_homog import harness
from schrodinger_homog.cli import main
from schrodinger_homog.errors import ParseError, SchemaViolation, StageError, UnsatisfiableResolution

SMALL = {"problem": {"d": 1, "T": 0.25}, "eps": [0.25, 0.125], "cell": {"M": 32, "K": 8}}


def write_cfg(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


def test_minimal_config_defaults(tmp_path):
    cfg = harness.load_config(write_cfg(tmp_path, {"problem": {"d": 1}}))
    assert (cfg.M, cfg.K, cfg.resolution) == (256, 64, 16)
    assert cfg.eps == (1 / 8, 1 / 16, 1 / 32, 1 / 64)
    assert "cell" in cfg.defaults_used and "problem.d" not in cfg.defaults_used
    assert harness.config_from_dict(cfg.to_dict()) == harness.config_from_dict({"problem": {"d": 1}})


def test_schema_violations():
    with pytest.raises(SchemaViolation) as info:
        harness.config_from_dict({"eps": [1 / 8, 1 / 4]})
    assert info.value.key == "eps"
    with pytest.raises(SchemaViolation) as info:
        harness.config_from_dict({"problme": {}})
    assert info.value.key == "problme"
    with pytest.raises(SchemaViolation):
        harness.config_from_dict({"problem": {"d": 3}})
    with pytest.raises(SchemaViolation):
        harness.config_from_dict({"cell": {"M": 100}})
    with pytest.raises(SchemaViolation):
        harness.config_from_dict({"homogenized_form": "other"})


def test_unsatisfiable_resolution():
    with pytest.raises(UnsatisfiableResolution):
        harness.config_from_dict({"eps": [1 / 1024], "resolution": {"max_samples": 1_000_000}})


def test_parse_error(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("problem: [unclosed\n")
    with pytest.raises(ParseError):
        harness.load_config(p)
    with pytest.raises(ParseError):
        harness.load_config(tmp_path / "missing.yaml")


def test_degenerate_pipeline():
    cfg = harness.config_from_dict({**SMALL, "problem": {"d": 1, "T": 0.25, "coefficient": {"kind": "constant"},
                                                         "potential": {"kind": "zero"}}})
    rep = harness.run_pipeline(cfg)
    assert np.array_equal(rep.model.q, np.eye(1)) and rep.model.mu == 0 and not rep.model.b.any()
    assert all(r.err_zeroth <= 1e-9 for r in rep.rows)


def test_single_eps_has_no_verdict():
    rep = harness.run_pipeline(harness.config_from_dict({**SMALL, "eps": [0.25]}))
    assert len(rep.rows) == 1 and rep.verdicts == {}
    assert rep.rows[0].observed_order is None
    assert "no monotonicity verdict" in harness.report_text(rep)


def test_stage_errors_are_named():
    cfg = harness.config_from_dict({**SMALL, "problem": {"d": 1, "potential": {"kind": "cosine",
                                                                                "time_wavenumber": 0,
                                                                                "offset": 0.5}}})
    with pytest.raises(StageError) as info:
        harness.run_pipeline(cfg)
    assert info.value.stage == "cell"


def test_csv_header_only_and_roundtrip():
    empty = harness.ConvergenceReport([], None)
    assert harness.report_csv(empty) == ",".join(harness.CSV_COLUMNS) + "\n"
    rep = harness.run_pipeline(harness.config_from_dict(SMALL))
    text = harness.report_csv(rep)
    rows = harness.parse_report_csv(text)
    assert rows[0]["err_l2_zeroth"] == rep.rows[0].err_zeroth
    assert rows[1]["observed_order"] == rep.rows[1].observed_order
    assert rows[0]["observed_order"] is None
    assert rows[1]["pairing_res_3"] == rep.rows[1].pairing[2]
    assert "\r" not in text


def test_determinism_and_workers(tmp_path):
    cfg = harness.config_from_dict(SMALL)
    a = harness.report_csv(harness.run_pipeline(cfg))
    b = harness.report_csv(harness.run_pipeline(cfg))
    c = harness.report_csv(harness.run_pipeline(cfg, workers=2))
    assert a == b == c


def test_cli_roundtrip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "report.csv").exists() and (tmp_path / "o" / "model.json").exists()
    assert main(["report", "--csv", str(tmp_path / "o" / "report.csv")]) == 0
    assert "zeroth_strictly_decreasing" in capsys.readouterr().out
    assert main(["cell", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "chi.npz").exists()
    assert main(["effective", "--config", str(cfg), "--out", str(tmp_path / "m.json")]) == 0
    assert main(["solve-fine", "--config", str(cfg), "--out", str(tmp_path / "f.npz"), "--csv-stride", "8"]) == 0
    assert main(["solve-homog", "--config", str(cfg), "--model", str(tmp_path / "m.json"),
                 "--out", str(tmp_path / "h.npz")]) == 0
    assert (tmp_path / "f.csv").exists() and (tmp_path / "h.npz").exists()
    bad = write_cfg(tmp_path, {"eps": [0.1, 0.2]}, "bad.yaml")
    assert main(["sweep", "--config", str(bad)]) == 2

import json
from pathlib import Path

import pytest

from lnayield.cli import build_parser, main
from lnayield.designs import builtin_designs, dataset_to_config


def test_parser_defaults():
    parser = build_parser()
    args = parser.parse_args(["simulate"])
    assert args.command == "simulate"
    assert args.seed == 12345
    assert args.n == 100_000
    assert args.out_dir == Path("out")
    assert args.format == "text"
    assert args.config is None


def test_parser_rejects_unknown_command():
    parser = build_parser()
    with pytest.raises(SystemExit) as err:
        parser.parse_args(["transmogrify"])
    assert err.value.code == 2


def test_parser_rejects_unknown_flag():
    with pytest.raises(SystemExit) as err:
        build_parser().parse_args(["simulate", "--frobnicate"])
    assert err.value.code == 2


def test_simulate_writes_artifacts(tmp_path, capsys):
    rc = main(["simulate", "--n", "400", "--seed", "3",
               "--out-dir", str(tmp_path), "--design", "paper-0.4mA"])
    assert rc == 0
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "violations.csv").exists()
    assert (tmp_path / "violations.png").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 3 and manifest["n"] == 400
    assert len(manifest["config_digest"]) == 64
    out = capsys.readouterr().out
    assert "paper-0.4mA" in out


def test_simulate_population_dump(tmp_path):
    rc = main(["simulate", "--n", "50", "--seed", "1", "--out-dir", str(tmp_path),
               "--design", "paper-plna", "--emit-population", "--format", "csv"])
    assert rc == 0
    pop_csv = tmp_path / "population_paper-plna.csv"
    assert pop_csv.exists()
    assert len(pop_csv.read_text().splitlines()) == 1 + 50 * 3


def test_simulate_unknown_design_is_validation_error(tmp_path, capsys):
    rc = main(["simulate", "--design", "paper-9mA", "--out-dir", str(tmp_path)])
    assert rc == 3
    assert "ConfigError" in capsys.readouterr().err


def test_select_and_outcomes(tmp_path):
    rc = main(["select", "--strategy", "best-gain", "--n", "300", "--seed", "2",
               "--out-dir", str(tmp_path), "--emit-outcomes", "--format", "csv"])
    assert rc == 0
    assert (tmp_path / "selection.csv").exists()
    assert (tmp_path / "outcomes_best-gain.csv").exists()
    assert (tmp_path / "occupancy.png").exists()


def test_compare_pipeline_and_json_stdout(tmp_path, capsys):
    rc = main(["compare", "--n", "500", "--seed", "4", "--out-dir", str(tmp_path),
               "--baselines", "0.4,0.6", "--format", "json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc["comparisons"]) == {"best-gain", "best-receiver"}
    rows = doc["comparisons"]["best-gain"]
    assert [r["baseline"] for r in rows] == ["paper-0.4mA", "paper-0.6mA"]
    assert (tmp_path / "comparison.csv").exists()
    assert (tmp_path / "comparison.png").exists()


def test_explore_writes_sweep(tmp_path, capsys):
    rc = main(["explore", "--out-dir", str(tmp_path), "--format", "text"])
    assert rc == 0
    assert (tmp_path / "sweep.csv").exists()
    assert (tmp_path / "explore.png").exists()
    out = capsys.readouterr().out
    assert "0.4 mA" in out and "0.3" not in out.split("->")[0]


def test_fit_reports_marginals(tmp_path):
    rc = main(["fit", "--out-dir", str(tmp_path), "--format", "csv"])
    assert rc == 0
    doc = json.loads((tmp_path / "fit.json").read_text())
    rows = {(r["design"], r["mode"], r["parameter"]): r for r in doc["marginals"]}
    gain = rows[("paper-0.4mA", "NOM", "gain_db")]
    assert gain["sigma"] == pytest.approx(0.50032, abs=1e-4)
    assert gain["gaussianity_spread"] == pytest.approx(0.057, abs=5e-3)


def test_calibrate_traditional_smoke(tmp_path, capsys):
    rc = main(["calibrate", "--design", "paper-0.4mA", "--n-eval", "4000",
               "--sweeps", "1", "--out-dir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "calibrated_model.json").read_text())
    assert doc["design"] == "paper-0.4mA"
    assert "gain_linearity" in doc["model"]["couplings"]
    assert "residual" in capsys.readouterr().out


def test_config_file_override_propagates(tmp_path, capsys):
    # loosening the minimum-gain corner re-sizes the post-LNA noise budget,
    # which must collapse the baseline noise failures end to end
    config = dataset_to_config(builtin_designs())
    config["lna_spec"]["gain_min_db"] = 9.0
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config), encoding="utf-8")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--n", "2000", "--seed", "6", "--baselines", "0.4",
                 "--out-dir", str(out_a), "--format", "csv"]) == 0
    assert main(["compare", "--n", "2000", "--seed", "6", "--baselines", "0.4",
                 "--config", str(cfg_path), "--out-dir", str(out_b),
                 "--format", "csv"]) == 0
    base_a = json.loads((out_a / "report.json").read_text())["receiver"]["paper-0.4mA"]
    base_b = json.loads((out_b / "report.json").read_text())["receiver"]["paper-0.4mA"]
    assert base_b["nf_fail"] < 0.02 < base_a["nf_fail"]
    assert base_b["compliance"] > base_a["compliance"] + 0.05


def test_invalid_config_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}", encoding="utf-8")
    rc = main(["simulate", "--config", str(bad), "--out-dir", str(tmp_path / "o")])
    assert rc == 3
    assert "ConfigError" in capsys.readouterr().err


def test_report_end_to_end_determinism(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["report", "--n", "800", "--seed", "7",
                     "--out-dir", str(out), "--format", "csv"]) == 0
    files_a = sorted(p.name for p in out_a.iterdir())
    files_b = sorted(p.name for p in out_b.iterdir())
    assert files_a == files_b
    for name in files_a:
        a_bytes = (out_a / name).read_bytes()
        b_bytes = (out_b / name).read_bytes()
        if name == "manifest.json":
            a_doc = json.loads(a_bytes)
            b_doc = json.loads(b_bytes)
            a_doc.pop("timings_s")
            b_doc.pop("timings_s")
            assert a_doc == b_doc
        else:
            assert a_bytes == b_bytes, name

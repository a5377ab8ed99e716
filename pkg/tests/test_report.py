import csv
import json

import pytest

from lnayield.budget import ReceiverTargets, derive_stage2_limits
from lnayield.designs import builtin_designs
from lnayield.montecarlo import generate_population, summarize, violation_rates
from lnayield.report import (
    BaselineSummary,
    ComparisonRow,
    ReportBundle,
    RunManifest,
    atomic_writer,
    compare,
    config_digest,
    power_anchor_diagnostic,
    render_tables,
    render_text,
    summarize_baseline,
    write_json,
)
from lnayield.selection import BestGain, BestReceiver, apply_strategy

DATASET = builtin_designs()
LIMITS = derive_stage2_limits(DATASET.lna_spec, DATASET.receiver_targets)
TARGETS = DATASET.receiver_targets


def _selection_report(n=2000, seed=5, strategy=None):
    pop = generate_population(DATASET.plna, n, seed)
    return apply_strategy(pop, strategy or BestReceiver(), LIMITS, TARGETS,
                          DATASET.plna)


def _baseline(name="paper-0.4mA", n=2000, seed=5):
    design = DATASET.design(name)
    pop = generate_population(design, n, seed)
    return summarize_baseline(design, pop, LIMITS, TARGETS)


def test_compare_identical_inputs_give_zero_rows():
    rep = _selection_report()
    fake = BaselineSummary(name="self", n=rep.n, targets=TARGETS,
                           compliance_fraction=rep.compliance_fraction,
                           nf_fail_fraction=0.0, iip3_fail_fraction=0.0,
                           power_mw=rep.average_power_mw)
    row = compare(rep, [fake])[0]
    assert row.delta_compliance == pytest.approx(0.0, abs=1e-15)
    assert row.delta_power == pytest.approx(0.0, abs=1e-15)


def test_compare_definitions_on_hand_built_inputs():
    rep = _selection_report()
    base = BaselineSummary(name="b", n=rep.n, targets=TARGETS,
                           compliance_fraction=0.5, nf_fail_fraction=0.4,
                           iip3_fail_fraction=0.2, power_mw=0.5)
    row = compare(rep, [base])[0]
    assert row.delta_compliance == pytest.approx(rep.compliance_fraction - 0.5)
    assert row.delta_power == pytest.approx((rep.average_power_mw - 0.5) / 0.5)


def test_compare_antisymmetric_in_compliance_delta():
    rep = _selection_report()
    base = _baseline()
    forward = compare(rep, [base])[0].delta_compliance
    # swapping roles flips the sign of the compliance delta
    swapped = base.compliance_fraction - rep.compliance_fraction
    assert forward == pytest.approx(-swapped, abs=1e-15)


def test_compare_rejects_mismatched_population_size():
    rep = _selection_report(n=1000)
    base = _baseline(n=2000)
    with pytest.raises(ValueError):
        compare(rep, [base])


def test_compare_rejects_mismatched_targets():
    rep = _selection_report()
    base = BaselineSummary(name="b", n=rep.n,
                           targets=ReceiverTargets(nf_rx_max_db=14.0),
                           compliance_fraction=0.8, nf_fail_fraction=0.1,
                           iip3_fail_fraction=0.1, power_mw=0.5)
    with pytest.raises(ValueError):
        compare(rep, [base])


def test_comparison_row_validation():
    with pytest.raises(ValueError):
        ComparisonRow(baseline_name="x", delta_compliance=1.5, delta_power=0.0)


def test_power_anchor_diagnostic_names_binding_parameter():
    rep = _selection_report()
    base = _baseline()
    powers = DATASET.plna.mode_powers_mw()
    reachable = power_anchor_diagnostic(rep, base, 0.09, powers)
    assert "mode occupancy binds" in reachable
    unreachable = power_anchor_diagnostic(rep, base, 5.0, powers)
    assert "bias-overhead assumption binds" in unreachable


def test_render_tables_empty_bundle_has_headers(tmp_path):
    paths = render_tables(ReportBundle(), tmp_path)
    with paths["summary_csv"].open() as fh:
        rows = list(csv.reader(fh))
    assert rows == [["design", "mode", "parameter", "min", "mean", "max"]]
    with paths["comparison_csv"].open() as fh:
        rows = list(csv.reader(fh))
    assert rows == [["strategy", "baseline", "delta_compliance", "delta_power"]]
    doc = json.loads(paths["report_json"].read_text())
    assert doc["schema_version"] == 1
    assert doc["summaries"] == {}
    assert "(empty report)" in paths["report_txt"].read_text()


def _full_bundle(n=1500, seed=9):
    bundle = ReportBundle()
    baselines = []
    for design in DATASET.traditional[:2]:
        pop = generate_population(design, n, seed)
        bundle.summaries[design.name] = summarize(pop)
        bundle.violations[design.name] = violation_rates(pop, DATASET.lna_spec)
        base = summarize_baseline(design, pop, LIMITS, TARGETS)
        baselines.append(base)
        bundle.receiver[design.name] = base
    pop = generate_population(DATASET.plna, n, seed)
    for strategy in (BestGain(), BestReceiver()):
        rep = apply_strategy(pop, strategy, LIMITS, TARGETS, DATASET.plna)
        bundle.selections[rep.strategy] = rep
        bundle.comparisons[rep.strategy] = compare(rep, baselines)
    return bundle


def test_render_tables_round_trip(tmp_path):
    bundle = _full_bundle()
    paths = render_tables(bundle, tmp_path)
    # CSV values parse back to in-memory values within formatting precision
    with paths["receiver_csv"].open() as fh:
        rows = {r["design"]: r for r in csv.DictReader(fh)}
    for name, base in bundle.receiver.items():
        assert float(rows[name]["compliance"]) == pytest.approx(
            base.compliance_fraction, abs=1e-6)
        assert float(rows[name]["power_mw"]) == pytest.approx(base.power_mw, rel=1e-5)
    with paths["comparison_csv"].open() as fh:
        crows = list(csv.DictReader(fh))
    want = [(s, r) for s, rs in bundle.comparisons.items() for r in rs]
    assert len(crows) == len(want)
    for got, (strategy, row) in zip(crows, want):
        assert got["strategy"] == strategy
        assert float(got["delta_compliance"]) == pytest.approx(
            row.delta_compliance, abs=1e-6)
    doc = json.loads(paths["report_json"].read_text())
    for label, rep in bundle.selections.items():
        assert doc["selections"][label]["compliance"] == rep.compliance_fraction
    text = render_text(bundle)
    assert "Mode selection" in text and "PLNA vs fixed designs" in text


def test_violations_csv_is_clause_by_design(tmp_path):
    bundle = ReportBundle()
    for design in DATASET.traditional:
        pop = generate_population(design, 500, 3)
        bundle.violations[design.name] = violation_rates(pop, DATASET.lna_spec)
    paths = render_tables(bundle, tmp_path)
    with paths["violations_csv"].open() as fh:
        rows = list(csv.reader(fh))
    # header plus exactly six clause rows, one column per traditional design
    assert len(rows) == 1 + 6
    assert rows[0] == ["clause", "paper-0.4mA", "paper-0.5mA", "paper-0.6mA",
                       "paper-0.7mA"]
    assert [r[0] for r in rows[1:]] == [
        "gain_below_min", "gain_above_max", "nf_above_max", "iip3_below_min",
        "s11_above_max", "s22_above_max"]


def test_atomic_writer_leaves_no_partial_file(tmp_path):
    target = tmp_path / "artifact.txt"
    with pytest.raises(RuntimeError):
        with atomic_writer(target) as fh:
            fh.write("partial")
            raise RuntimeError("boom")
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []
    with atomic_writer(target) as fh:
        fh.write("done")
    assert target.read_text() == "done"


def test_write_json_stable_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    payload = {"zeta": 1.5, "alpha": [1, 2, 3], "nested": {"y": 2, "x": 1}}
    write_json(a, payload)
    write_json(b, dict(reversed(list(payload.items()))))
    assert a.read_bytes() == b.read_bytes()


def test_config_digest_stability():
    from lnayield.designs import dataset_to_config

    doc = dataset_to_config(DATASET)
    d1 = config_digest(doc)
    d2 = config_digest(json.loads(json.dumps(doc)))
    assert d1 == d2 and len(d1) == 64


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest(command="simulate", seed=7, n=100,
                           config_digest="abc", tool_version="0.1.0",
                           timings_s={"simulate": 0.123456789})
    path = tmp_path / "manifest.json"
    manifest.write(path)
    doc = json.loads(path.read_text())
    assert doc["command"] == "simulate"
    assert doc["seed"] == 7 and doc["n"] == 100
    assert doc["timings_s"]["simulate"] == pytest.approx(0.123457, abs=1e-6)


def test_baseline_summary_rejects_multimode_population():
    pop = generate_population(DATASET.plna, 10, 1)
    with pytest.raises(ValueError):
        summarize_baseline(DATASET.plna, pop, LIMITS, TARGETS)

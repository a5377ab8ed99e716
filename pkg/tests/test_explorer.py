import csv

import numpy as np
import pytest

from lnayield.budget import RfQuantities
from lnayield.explorer import (
    DesignPoint,
    SweepConstraints,
    default_grid,
    explore_to_csv,
    filter_feasible,
    pick_best_per_current,
    surrogate_performance,
    sweep,
)


def _random_model(rng):
    """Smooth random surrogate: unimodal IIP3 in width, arbitrary coefficients."""
    peak = rng.uniform(20.0, 90.0)
    iip3_0 = rng.uniform(-8.0, 2.0)
    slope = rng.uniform(0.0, 20.0)
    curv = rng.uniform(0.5, 12.0)
    nf_0 = rng.uniform(2.0, 3.2)

    def model(i_d, w1):
        return RfQuantities(
            gain_db=10.6 - 0.002 * abs(w1 - peak),
            nf_db=nf_0 - 0.4 * (i_d - 0.5),
            iip3_dbm=iip3_0 + slope * (i_d - 0.4) - curv * ((w1 - peak) / 40.0) ** 2,
            s11_db=-16.0 - i_d,
            s22_db=-16.0 - 0.01 * w1,
        )

    return model


def _brute_force(currents, widths, model, constraints):
    """One-pass oracle: evaluate, filter, and argmax in a single loop."""
    best = {}
    for c in sorted(set(currents)):
        for w in sorted(set(widths)):
            rf = model(c, w)
            if not (constraints.gain_min_db <= rf.gain_db <= constraints.gain_max_db):
                continue
            if rf.nf_db > constraints.nf_max_db or rf.iip3_dbm < constraints.iip3_min_dbm:
                continue
            if rf.s11_db > constraints.s11_max_db or rf.s22_db > constraints.s22_max_db:
                continue
            cur = best.get(c)
            if cur is None or (rf.iip3_dbm, -w) > (cur[1].iip3_dbm, -cur[0]):
                best[c] = (w, rf)
    return {c: w for c, (w, _) in best.items()}


def test_sweep_cardinality_and_order():
    points = sweep([0.4, 0.5], [20, 30, 40], surrogate_performance)
    assert len(points) == 6
    assert [(p.i_d_ma, p.w1_um) for p in points] == [
        (0.4, 20), (0.4, 30), (0.4, 40), (0.5, 20), (0.5, 30), (0.5, 40)]


def test_sweep_single_cell():
    points = sweep([0.4], [40.0], surrogate_performance)
    assert len(points) == 1 and points[0].valid
    assert points[0].rf == surrogate_performance(0.4, 40.0)


def test_sweep_permutation_invariance():
    a = sweep([0.5, 0.4], [40, 20, 30], surrogate_performance)
    b = sweep([0.4, 0.5], [20, 30, 40], surrogate_performance)
    assert a == b


def test_sweep_flags_model_failures():
    def flaky(i_d, w1):
        if w1 == 30:
            raise RuntimeError("solver diverged")
        return surrogate_performance(i_d, w1)

    points = sweep([0.4], [20, 30, 40], flaky)
    assert [p.valid for p in points] == [True, False, True]
    assert "diverged" in points[1].error
    assert filter_feasible(points, SweepConstraints()) == [
        p for p in points if p.valid and SweepConstraints().satisfied_by(p.rf)]


def test_sweep_rejects_empty_grid():
    with pytest.raises(ValueError):
        sweep([], [20], surrogate_performance)


def test_filter_matches_predicate():
    constraints = SweepConstraints()
    currents, widths = default_grid()
    points = sweep(currents, widths, surrogate_performance)
    feasible = filter_feasible(points, constraints)
    for p in points:
        assert (p in feasible) == (p.valid and constraints.satisfied_by(p.rf))
    # order is preserved
    assert feasible == [p for p in points if p in feasible]


def test_lowest_current_level_is_discarded():
    # the surrogate never reaches the linearity floor at 0.3 mA
    currents, widths = default_grid()
    points = sweep(currents, widths, surrogate_performance)
    feasible = filter_feasible(points, SweepConstraints())
    selected = pick_best_per_current(feasible)
    assert 0.3 not in selected
    assert set(selected) == {0.4, 0.5, 0.6, 0.7}
    # selected IIP3 improves monotonically with current for this surrogate
    iip3 = [selected[c].rf.iip3_dbm for c in sorted(selected)]
    assert iip3 == sorted(iip3)


def test_pick_best_identity_for_unique_points():
    pts = [DesignPoint(0.4, 30.0, surrogate_performance(0.4, 30.0)),
           DesignPoint(0.5, 50.0, surrogate_performance(0.5, 50.0))]
    assert pick_best_per_current(pts) == {0.4: pts[0], 0.5: pts[1]}


def test_pick_best_tie_breaks_to_smaller_width():
    rf = surrogate_performance(0.5, 50.0)
    a = DesignPoint(0.5, 60.0, rf)
    b = DesignPoint(0.5, 40.0, rf)  # same IIP3, smaller device
    assert pick_best_per_current([a, b]) == {0.5: b}
    assert pick_best_per_current([b, a]) == {0.5: b}


def test_pipeline_matches_brute_force_oracle_randomized():
    rng = np.random.default_rng(2718)
    constraints = SweepConstraints()
    for _ in range(200):
        model = _random_model(rng)
        currents = sorted(rng.choice([0.3, 0.4, 0.5, 0.6, 0.7],
                                     size=rng.integers(1, 4), replace=False))
        widths = sorted(rng.choice(np.arange(20.0, 92.0, 4.0),
                                   size=rng.integers(2, 8), replace=False))
        points = sweep(currents, widths, model)
        selected = pick_best_per_current(filter_feasible(points, constraints))
        oracle = _brute_force(currents, widths, model, constraints)
        assert {c: p.w1_um for c, p in selected.items()} == oracle


def test_shrinking_gain_window_never_adds_designs():
    currents, widths = default_grid()
    points = sweep(currents, widths, surrogate_performance)
    wide = set(id(p) for p in filter_feasible(points, SweepConstraints()))
    narrow = SweepConstraints(gain_min_db=10.4, gain_max_db=10.8)
    for p in filter_feasible(points, narrow):
        assert id(p) in wide


def test_constraints_validation():
    with pytest.raises(ValueError):
        SweepConstraints(gain_min_db=11.0, gain_max_db=10.0)


def test_explore_csv_columns(tmp_path):
    currents, widths = [0.3, 0.4], [24.0, 40.0]
    points = sweep(currents, widths, surrogate_performance)
    feasible = filter_feasible(points, SweepConstraints())
    selected = pick_best_per_current(feasible)
    path = tmp_path / "sweep.csv"
    explore_to_csv(points, feasible, selected, path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0].keys()) == ["i_d_ma", "w1_um", "gain_db", "nf_db",
                                    "iip3_dbm", "s11_db", "s22_db", "feasible",
                                    "selected"]
    assert len(rows) == len(points)
    assert {r["selected"] for r in rows} == {"true", "false"}
    for row, p in zip(rows, points):
        assert float(row["gain_db"]) == pytest.approx(p.rf.gain_db, rel=1e-5)

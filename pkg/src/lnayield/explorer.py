"""Design-space exploration: grid sweep, constraint filter, best-IIP3 pick.

The sweep walks a (bias current, device width) grid through a pluggable
performance model, keeps the points satisfying the matching/gain/noise/
linearity constraints, and selects the highest-IIP3 design per current level.

A synthetic surrogate model is provided so the machinery can run end to end.
Its coefficients are arbitrary smooth shapes (unimodal IIP3 versus width with
the peak drifting with current, noise falling with current); it makes no
claim of physical fidelity and is not a circuit simulator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .budget import RfQuantities

__all__ = [
    "DesignPoint",
    "SweepConstraints",
    "PerformanceModel",
    "surrogate_performance",
    "default_grid",
    "sweep",
    "filter_feasible",
    "pick_best_per_current",
    "explore_to_csv",
]

PerformanceModel = Callable[[float, float], RfQuantities]


@dataclass(frozen=True)
class DesignPoint:
    """One grid cell: bias current, device width, predicted RF parameters."""

    i_d_ma: float
    w1_um: float
    rf: RfQuantities | None
    error: str = ""

    def __post_init__(self):
        if not self.i_d_ma > 0:
            raise ValueError("i_d_ma must be > 0")
        if not self.w1_um > 0:
            raise ValueError("w1_um must be > 0")

    @property
    def valid(self) -> bool:
        return self.rf is not None


@dataclass(frozen=True)
class SweepConstraints:
    """Feasibility window for the sweep (tighter matching than the LNA spec)."""

    s11_max_db: float = -15.0
    s22_max_db: float = -15.0
    gain_min_db: float = 10.3
    gain_max_db: float = 10.9
    nf_max_db: float = 3.0
    iip3_min_dbm: float = -4.0

    def __post_init__(self):
        if not self.gain_min_db < self.gain_max_db:
            raise ValueError("gain window is empty")

    def satisfied_by(self, rf: RfQuantities) -> bool:
        return (self.gain_min_db <= rf.gain_db <= self.gain_max_db
                and rf.nf_db <= self.nf_max_db
                and rf.iip3_dbm >= self.iip3_min_dbm
                and rf.s11_db <= self.s11_max_db
                and rf.s22_db <= self.s22_max_db)


def surrogate_performance(i_d_ma: float, w1_um: float) -> RfQuantities:
    """Synthetic smooth performance surface (documented as non-physical).

    IIP3 is unimodal in width with its peak drifting up with current, and its
    peak value rises with current so the lowest current level never reaches
    the linearity constraint.  Noise falls with current; gain and matching
    stay inside their windows over the default grid.
    """
    if i_d_ma <= 0 or w1_um <= 0:
        raise ValueError("current and width must be > 0")
    w_peak = 133.0 * i_d_ma - 13.0
    iip3 = -4.0 + 12.0 * (i_d_ma - 0.33) - 8.0 * ((w1_um - w_peak) / 40.0) ** 2
    nf = 2.2 + 0.55 * (0.7 - i_d_ma) + 0.3 * ((w1_um - (100.0 * i_d_ma + 20.0)) / 60.0) ** 2
    gain = 10.6 - 0.1 * (0.7 - i_d_ma) - 0.2 * ((w1_um - w_peak) / 50.0) ** 2
    s11 = -16.0 - 5.0 * (i_d_ma - 0.3) - 0.01 * abs(w1_um - w_peak)
    s22 = -15.5 - 2.0 * (i_d_ma - 0.3) - 0.005 * abs(w1_um - w_peak)
    return RfQuantities(gain_db=gain, nf_db=nf, iip3_dbm=iip3,
                        s11_db=s11, s22_db=s22)


def default_grid():
    """Canonical sweep grid: currents 0.3-0.7 mA, widths 24-90 um."""
    currents = [round(c, 1) for c in np.arange(0.3, 0.75, 0.1)]
    widths = [float(w) for w in range(24, 92, 2)]
    return currents, widths


def sweep(currents: Sequence[float], widths: Sequence[float],
          model: PerformanceModel) -> list:
    """Evaluate the model once per grid cell, row-major by current then width.

    Grid values are deduplicated and sorted, so the output is invariant under
    permutation of the inputs.  A model failure marks the point invalid
    instead of dropping it.
    """
    cs = sorted(set(float(c) for c in currents))
    ws = sorted(set(float(w) for w in widths))
    if not cs or not ws:
        raise ValueError("grid must be non-empty")
    points = []
    for c in cs:
        for w in ws:
            try:
                rf = model(c, w)
                points.append(DesignPoint(i_d_ma=c, w1_um=w, rf=rf))
            except Exception as exc:  # surrogate contract: flag, don't drop
                points.append(DesignPoint(i_d_ma=c, w1_um=w, rf=None, error=str(exc)))
    return points


def filter_feasible(points: Sequence[DesignPoint],
                    constraints: SweepConstraints) -> list:
    """Points satisfying every constraint clause, in their original order."""
    return [p for p in points if p.valid and constraints.satisfied_by(p.rf)]


def pick_best_per_current(points: Sequence[DesignPoint]) -> Mapping[float, DesignPoint]:
    """Highest-IIP3 feasible point per current; IIP3 ties go to the smaller width.

    Currents with no feasible point are absent from the map.
    """
    best: dict[float, DesignPoint] = {}
    for p in points:
        if not p.valid:
            continue
        cur = best.get(p.i_d_ma)
        if cur is None or (p.rf.iip3_dbm, -p.w1_um) > (cur.rf.iip3_dbm, -cur.w1_um):
            best[p.i_d_ma] = p
    return dict(sorted(best.items()))


def explore_to_csv(points: Sequence[DesignPoint], feasible: Sequence[DesignPoint],
                   selected: Mapping[float, DesignPoint], path) -> None:
    """Full sweep dump with feasibility and selection flags."""
    from .report import atomic_writer

    feasible_keys = {(p.i_d_ma, p.w1_um) for p in feasible}
    selected_keys = {(p.i_d_ma, p.w1_um) for p in selected.values()}
    with atomic_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i_d_ma", "w1_um", "gain_db", "nf_db", "iip3_dbm",
                         "s11_db", "s22_db", "feasible", "selected"])
        for p in points:
            key = (p.i_d_ma, p.w1_um)
            rf_cols = (
                [f"{v:.6g}" for v in (p.rf.gain_db, p.rf.nf_db, p.rf.iip3_dbm,
                                      p.rf.s11_db, p.rf.s22_db)]
                if p.valid else ["", "", "", "", ""]
            )
            writer.writerow([
                f"{p.i_d_ma:.6g}", f"{p.w1_um:.6g}", *rf_cols,
                str(key in feasible_keys).lower(),
                str(key in selected_keys).lower(),
            ])

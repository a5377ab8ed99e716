"""Deterministic die populations and their summary statistics.

Populations are generated die-by-index with a counter-based generator, so a
population is fully determined by (design, model, n, seed), any prefix of a
longer run is bit-identical to a shorter one, and generation order or
parallelism cannot change the result.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .budget import LnaSpecCorner
from .statmodel import PARAMS, DieSample, LatentDieModel, sample_values

__all__ = [
    "CLAUSES",
    "DiePopulation",
    "ParamStats",
    "SummaryStats",
    "generate_population",
    "summarize",
    "violation_rates",
    "population_to_csv",
]

# LNA-level spec clauses, evaluated independently per mode.
CLAUSES = (
    "gain_below_min",
    "gain_above_max",
    "nf_above_max",
    "iip3_below_min",
    "s11_above_max",
    "s22_above_max",
)


@dataclass(frozen=True)
class DiePopulation:
    """N sampled dies of one design; values[i, m, p] indexed die/mode/param."""

    design_name: str
    modes: tuple
    seed: int
    values: np.ndarray
    factors: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 3 or self.values.shape[1] != len(self.modes) \
                or self.values.shape[2] != len(PARAMS):
            raise ValueError("values must have shape (n, modes, parameters)")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def die(self, index: int) -> DieSample:
        return DieSample(index=index, modes=self.modes,
                         factors=self.factors[index], values=self.values[index])

    def parameter(self, param: str, mode=None) -> np.ndarray:
        """Column of one parameter, for one mode or (n, modes) for all."""
        j = PARAMS.index(param)
        if mode is None:
            return self.values[:, :, j]
        return self.values[:, self.modes.index(mode), j]


def generate_population(design, n: int, seed: int,
                        model: LatentDieModel | None = None) -> DiePopulation:
    """Generate n dies with indices 0..n-1 for a design.

    The model defaults to the design's own variability model; passing one
    explicitly allows simulating a calibrated variant.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    mdl = design.model if model is None else model
    factors, values = sample_values(mdl, seed, np.arange(n, dtype=np.int64))
    return DiePopulation(design_name=design.name, modes=mdl.modes,
                         seed=int(seed), values=values, factors=factors)


@dataclass(frozen=True)
class ParamStats:
    min: float
    mean: float
    max: float

    def __post_init__(self):
        if not (self.min <= self.mean <= self.max):
            raise ValueError("expected min <= mean <= max")


@dataclass(frozen=True)
class SummaryStats:
    """Per-mode, per-parameter sample min/mean/max."""

    design_name: str
    n: int
    stats: Mapping[str, Mapping[str, ParamStats]]  # mode -> param -> stats

    def get(self, mode: str, param: str) -> ParamStats:
        return self.stats[mode][param]


def summarize(pop: DiePopulation) -> SummaryStats:
    """Exact sample min/mean/max of every (mode, parameter) column."""
    if pop.n == 0:
        raise ValueError("population is empty")
    stats = {}
    for i, mode in enumerate(pop.modes):
        cols = pop.values[:, i, :]
        stats[mode] = {
            param: ParamStats(min=float(cols[:, j].min()),
                              mean=float(cols[:, j].mean()),
                              max=float(cols[:, j].max()))
            for j, param in enumerate(PARAMS)
        }
    return SummaryStats(design_name=pop.design_name, n=pop.n, stats=stats)


def violation_rates(pop: DiePopulation, spec: LnaSpecCorner) -> dict:
    """Fraction of dies violating each LNA spec clause, per mode."""
    if pop.n == 0:
        raise ValueError("population is empty")
    rates = {}
    for i, mode in enumerate(pop.modes):
        gain = pop.values[:, i, 0]
        nf = pop.values[:, i, 1]
        iip3 = pop.values[:, i, 2]
        s11 = pop.values[:, i, 3]
        s22 = pop.values[:, i, 4]
        rates[mode] = {
            "gain_below_min": float((gain < spec.gain_min_db).mean()),
            "gain_above_max": float((gain > spec.gain_max_db).mean()),
            "nf_above_max": float((nf > spec.nf_max_db).mean()),
            "iip3_below_min": float((iip3 < spec.iip3_min_dbm).mean()),
            "s11_above_max": float((s11 > spec.s11_max_db).mean()),
            "s22_above_max": float((s22 > spec.s22_max_db).mean()),
        }
    return rates


def population_to_csv(pop: DiePopulation, path) -> None:
    """Write one row per (die, mode) with 6-significant-digit values."""
    from .report import atomic_writer

    with atomic_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["die_index", "mode", *PARAMS])
        for i in range(pop.n):
            for m, mode in enumerate(pop.modes):
                writer.writerow([
                    i, mode,
                    *(f"{pop.values[i, m, j]:.6g}" for j in range(len(PARAMS))),
                ])

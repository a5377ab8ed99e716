"""Digital mode-selection strategies for the programmable LNA.

Both adjustment strategies act per die on its three mode parameter sets:

* Best Gain picks the mode whose gain deviates least from the target.
* Best Receiver prefers any mode passing both receiver limits, then any mode
  passing the noise limit, then the mode with the largest dynamic range.

Ties break toward lower supply power, then smaller gain deviation, then the
design's mode order (which places HG ahead of LG).  Selection is evaluated
vectorized over the whole population; the per-die entry points wrap the same
kernel, so they cannot drift apart.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .budget import (
    ReceiverTargets,
    RfQuantities,
    StageTwoLimits,
    linear_to_db,
    mw_to_dbm,
    receiver_compliance,
    receiver_iip3_mw,
    receiver_noise_factor,
)
from .designs import PlnaDesign, PlnaMode
from .montecarlo import DiePopulation, ParamStats
from .statmodel import PARAMS, DieSample

__all__ = [
    "BestGain",
    "BestReceiver",
    "FixedMode",
    "SelectionStrategy",
    "strategy_from_name",
    "strategy_label",
    "dynamic_range_score",
    "select_best_gain",
    "select_best_receiver",
    "SelectionOutcome",
    "SelectionReport",
    "apply_strategy",
    "selection_to_csv",
]

DEFAULT_TARGET_GAIN_DB = 10.5


@dataclass(frozen=True)
class BestGain:
    target_gain_db: float = DEFAULT_TARGET_GAIN_DB


@dataclass(frozen=True)
class BestReceiver:
    target_gain_db: float = DEFAULT_TARGET_GAIN_DB


@dataclass(frozen=True)
class FixedMode:
    mode: PlnaMode


SelectionStrategy = Union[BestGain, BestReceiver, FixedMode]


def strategy_from_name(name: str) -> SelectionStrategy:
    """Parse a CLI strategy name: best-gain, best-receiver, fixed-<mode>."""
    key = name.strip().lower()
    if key == "best-gain":
        return BestGain()
    if key == "best-receiver":
        return BestReceiver()
    if key.startswith("fixed-"):
        tag = key[len("fixed-"):].upper().replace("_", "-")
        for mode in PlnaMode:
            if mode.value.upper() == tag:
                return FixedMode(mode)
    raise ValueError(
        f"unknown strategy {name!r}; expected best-gain, best-receiver or "
        f"fixed-{{hg,mg-lp,lg}}"
    )


def strategy_label(strategy: SelectionStrategy) -> str:
    if isinstance(strategy, BestGain):
        return "best-gain"
    if isinstance(strategy, BestReceiver):
        return "best-receiver"
    return f"fixed-{strategy.mode.value.lower()}"


def dynamic_range_score(q: RfQuantities, limits: StageTwoLimits) -> float:
    """Receiver dynamic-range proxy: IIP3_rx (dBm) minus NF_rx (dB).

    Monotone in each cascaded quantity, which is all the fallback ranking
    needs; constant bandwidth/SNR offsets would cancel under argmax.
    """
    return float(_dynamic_range(q.gain_db, q.nf_db, q.iip3_dbm, limits))


def _dynamic_range(gain_db, nf_db, iip3_dbm, limits: StageTwoLimits):
    nf_rx_db = linear_to_db(receiver_noise_factor(gain_db, nf_db, limits))
    iip3_rx_dbm = mw_to_dbm(receiver_iip3_mw(gain_db, iip3_dbm, limits))
    return iip3_rx_dbm - nf_rx_db


def _lex_pick(mask: np.ndarray, keys: Sequence[np.ndarray]) -> np.ndarray:
    """Per row, index of the masked column with the smallest key tuple (-1 if none)."""
    n, m = mask.shape
    best = np.full(n, -1, dtype=np.int64)
    best_keys = [np.full(n, np.inf) for _ in keys]
    for col in range(m):
        ok = mask[:, col]
        better = ok & (best < 0)
        undecided = ok & ~better
        for level, key in enumerate(keys):
            k = key[:, col]
            better |= undecided & (k < best_keys[level])
            undecided &= k == best_keys[level]
        best = np.where(better, col, best)
        for level, key in enumerate(keys):
            best_keys[level] = np.where(better, key[:, col], best_keys[level])
    return best


def _mode_keys(powers: np.ndarray, gains: np.ndarray, target: float):
    n = gains.shape[0]
    power_key = np.broadcast_to(powers, gains.shape)
    dev_key = np.abs(gains - target)
    rank_key = np.broadcast_to(np.arange(gains.shape[1], dtype=float), gains.shape)
    all_true = np.ones((n, gains.shape[1]), dtype=bool)
    return power_key, dev_key, rank_key, all_true


def _best_gain_indices(gains: np.ndarray, powers: np.ndarray, target: float) -> np.ndarray:
    power_key, dev_key, rank_key, all_true = _mode_keys(powers, gains, target)
    return _lex_pick(all_true, (dev_key, power_key, rank_key))


def _best_receiver_indices(gains, nfs, iip3s, powers, limits, targets, target):
    nf_pass, iip3_pass = receiver_compliance(gains, nfs, iip3s, limits, targets)
    both = nf_pass & iip3_pass
    power_key, dev_key, rank_key, all_true = _mode_keys(powers, gains, target)
    tier1 = _lex_pick(both, (power_key, dev_key, rank_key))
    tier2 = _lex_pick(nf_pass, (power_key, dev_key, rank_key))
    score = _dynamic_range(gains, nfs, iip3s, limits)
    tier3 = _lex_pick(all_true, (-score, power_key, dev_key, rank_key))
    return np.where(tier1 >= 0, tier1, np.where(tier2 >= 0, tier2, tier3))


def select_best_gain(die: DieSample, design: PlnaDesign,
                     target_gain_db: float = DEFAULT_TARGET_GAIN_DB) -> PlnaMode:
    """Mode whose gain deviates least from the target for this die."""
    gains = die.values[None, :, 0]
    idx = _best_gain_indices(gains, design.mode_powers_mw(), target_gain_db)[0]
    return design.modes[idx].mode


def select_best_receiver(die: DieSample, design: PlnaDesign,
                         limits: StageTwoLimits, targets: ReceiverTargets,
                         target_gain_db: float = DEFAULT_TARGET_GAIN_DB) -> PlnaMode:
    """Mode making the receiver compliant, with NF-only and dynamic-range fallbacks."""
    v = die.values[None]
    idx = _best_receiver_indices(v[:, :, 0], v[:, :, 1], v[:, :, 2],
                                 design.mode_powers_mw(), limits, targets,
                                 target_gain_db)[0]
    return design.modes[idx].mode


@dataclass(frozen=True)
class SelectionOutcome:
    die_index: int
    mode: str
    nf_pass: bool
    iip3_pass: bool
    power_mw: float
    per_mode_nf_pass: tuple
    per_mode_iip3_pass: tuple


@dataclass(frozen=True)
class SelectionReport:
    """Per-strategy outcome over a PLNA population."""

    design_name: str
    strategy: str
    n: int
    seed: int
    targets: ReceiverTargets
    mode_order: tuple
    chosen_idx: np.ndarray          # (n,)
    chosen_values: np.ndarray       # (n, 5) RF parameters at the chosen mode
    nf_pass: np.ndarray             # (n,)
    iip3_pass: np.ndarray           # (n,)
    power_mw: np.ndarray            # (n,)
    per_mode_nf_pass: np.ndarray    # (n, modes)
    per_mode_iip3_pass: np.ndarray  # (n, modes)

    @property
    def occupancy(self) -> Mapping[str, float]:
        return {mode: float((self.chosen_idx == i).mean())
                for i, mode in enumerate(self.mode_order)}

    @property
    def compliance_fraction(self) -> float:
        return float((self.nf_pass & self.iip3_pass).mean())

    @property
    def nf_fail_fraction(self) -> float:
        return float((~self.nf_pass).mean())

    @property
    def iip3_fail_fraction(self) -> float:
        return float((~self.iip3_pass).mean())

    @property
    def average_power_mw(self) -> float:
        return float(self.power_mw.mean())

    @property
    def post_selection_stats(self) -> Mapping[str, ParamStats]:
        return {
            param: ParamStats(min=float(self.chosen_values[:, j].min()),
                              mean=float(self.chosen_values[:, j].mean()),
                              max=float(self.chosen_values[:, j].max()))
            for j, param in enumerate(PARAMS)
        }

    def outcomes(self):
        for i in range(self.n):
            yield SelectionOutcome(
                die_index=i,
                mode=self.mode_order[self.chosen_idx[i]],
                nf_pass=bool(self.nf_pass[i]),
                iip3_pass=bool(self.iip3_pass[i]),
                power_mw=float(self.power_mw[i]),
                per_mode_nf_pass=tuple(bool(x) for x in self.per_mode_nf_pass[i]),
                per_mode_iip3_pass=tuple(bool(x) for x in self.per_mode_iip3_pass[i]),
            )


def apply_strategy(pop: DiePopulation, strategy: SelectionStrategy,
                   limits: StageTwoLimits, targets: ReceiverTargets,
                   design: PlnaDesign) -> SelectionReport:
    """Run a strategy over every die and aggregate compliance and power."""
    if pop.modes != design.model.modes:
        raise ValueError(
            f"population modes {pop.modes} do not match design modes "
            f"{design.model.modes}"
        )
    gains = pop.values[:, :, 0]
    nfs = pop.values[:, :, 1]
    iip3s = pop.values[:, :, 2]
    powers = design.mode_powers_mw()

    per_mode_nf, per_mode_iip3 = receiver_compliance(gains, nfs, iip3s,
                                                     limits, targets)
    if isinstance(strategy, BestGain):
        chosen = _best_gain_indices(gains, powers, strategy.target_gain_db)
    elif isinstance(strategy, BestReceiver):
        chosen = _best_receiver_indices(gains, nfs, iip3s, powers, limits,
                                        targets, strategy.target_gain_db)
    elif isinstance(strategy, FixedMode):
        mode_name = strategy.mode.value
        if mode_name not in pop.modes:
            raise ValueError(f"mode {mode_name!r} not present in population")
        chosen = np.full(pop.n, pop.modes.index(mode_name), dtype=np.int64)
    else:
        raise TypeError(f"unknown strategy {strategy!r}")

    rows = np.arange(pop.n)
    return SelectionReport(
        design_name=pop.design_name,
        strategy=strategy_label(strategy),
        n=pop.n,
        seed=pop.seed,
        targets=targets,
        mode_order=pop.modes,
        chosen_idx=chosen,
        chosen_values=pop.values[rows, chosen, :],
        nf_pass=per_mode_nf[rows, chosen],
        iip3_pass=per_mode_iip3[rows, chosen],
        power_mw=powers[chosen],
        per_mode_nf_pass=per_mode_nf,
        per_mode_iip3_pass=per_mode_iip3,
    )


def selection_to_csv(report: SelectionReport, path) -> None:
    """Per-die outcome rows: die_index, chosen_mode, nf_pass, iip3_pass, power_mw."""
    from .report import atomic_writer

    with atomic_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["die_index", "chosen_mode", "nf_pass", "iip3_pass", "power_mw"])
        for i in range(report.n):
            writer.writerow([
                i,
                report.mode_order[report.chosen_idx[i]],
                str(bool(report.nf_pass[i])).lower(),
                str(bool(report.iip3_pass[i])).lower(),
                f"{report.power_mw[i]:.6g}",
            ])

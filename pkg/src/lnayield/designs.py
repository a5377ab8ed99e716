"""Bundled LNA designs and config ingestion.

Ships four traditional common-source LNA designs (0.4-0.7 mA bias) and one
programmable LNA (PLNA) with three digitally selected modes, together with
variability models fitted from their recorded 1000-run Monte Carlo
characterization summaries.  Passive sizing values are inert metadata: they
are carried and serialized but never computed on.

Fitting policy for the bundled marginals (all Gaussian, dB/dBm domain):

* gain (traditional): mean and sigma fitted jointly from the two recorded
  tail rates, so both tails are reproduced exactly; the recovered mean stays
  within rounding distance of the recorded one.
* IIP3 (traditional): mean as recorded, sigma from the single lower tail.
* NF: sigma defaults to 0.1 dB, capped so that a spec violation would have
  stayed unobserved in 1000 runs (tail below 0.05%).
* S11/S22: the single recorded values are worst-case extremes, not means
  (a -6 dB mean would contradict the recorded 2-3% violation rates), so S22
  solves jointly for (mean, sigma) from its tail rate plus the extreme, and
  S11 takes a default sigma with the mean backed off from the extreme.
* PLNA: means as recorded; gain sigmas are the pooled average of the
  per-mode extreme-span estimates (their differences are within 1000-sample
  extreme noise, and pooling preserves the tight mode-to-mode tracking);
  IIP3 sigmas from the recorded minima as extreme events.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .budget import LnaSpecCorner, ReceiverTargets
from .explorer import SweepConstraints
from .statmodel import (
    EXTREME_Z_1000,
    PARAMS,
    ZERO_TAIL_Z,
    CrossCouplings,
    LatentDieModel,
    fit_mean_sigma_from_tails,
    fit_sigma_from_extreme,
    fit_sigma_from_quantile,
    inverse_normal_cdf,
)

__all__ = [
    "PlnaMode",
    "mode_from_controls",
    "PlnaModeSpec",
    "TraditionalDesign",
    "PlnaDesign",
    "equivalent_operating_point",
    "mode_power_mw",
    "ExplorerSettings",
    "BuiltinDataset",
    "builtin_designs",
    "ConfigError",
    "parse_config",
    "parse_config_file",
    "dataset_to_config",
    "model_to_json",
    "model_from_json",
]

SCHEMA_VERSION = 1


class PlnaMode(enum.Enum):
    """Digitally selected PLNA operating modes."""

    HG = "HG"
    MG_LP = "MG-LP"
    LG = "LG"


# Control inputs (phi, phi_g) -> mode; (1, 1) is not a valid drive state.
_CONTROL_MAP = {
    (True, False): PlnaMode.HG,
    (False, True): PlnaMode.LG,
    (False, False): PlnaMode.MG_LP,
}


def mode_from_controls(phi: bool, phi_g: bool) -> PlnaMode:
    """Map the cascode switch drive (phi, phi_g) to an operating mode."""
    try:
        return _CONTROL_MAP[(bool(phi), bool(phi_g))]
    except KeyError:
        raise ValueError("phi = phi_g = 1 is not a valid control state") from None


@dataclass(frozen=True)
class PlnaModeSpec:
    """One PLNA mode: control bits, supply current, nominal gain offset."""

    mode: PlnaMode
    phi: bool
    phi_g: bool
    idd_ma: float
    gain_offset_db: float

    def __post_init__(self):
        if mode_from_controls(self.phi, self.phi_g) is not self.mode:
            raise ValueError(f"control bits {(self.phi, self.phi_g)} do not select {self.mode}")
        if not self.idd_ma > 0:
            raise ValueError("idd_ma must be > 0")


def equivalent_operating_point(w1_um: float, id1_ma: float, w3_um: float):
    """Combined (width, current) of the paralleled input devices.

    The auxiliary branch is scaled so the shared gate bias keeps the current
    density constant: i_eq/w_eq == id1/w1 exactly.
    """
    if not w1_um > 0:
        raise ValueError("w1_um must be > 0")
    if w3_um < 0:
        raise ValueError("w3_um must be >= 0")
    if not id1_ma > 0:
        raise ValueError("id1_ma must be > 0")
    w_eq = w1_um + w3_um
    i_eq = id1_ma * (w1_um + w3_um) / w1_um
    return w_eq, i_eq


def mode_power_mw(idd_ma: float, supply_voltage_v: float) -> float:
    """Supply power in mW for a given supply current (mA) and voltage (V)."""
    if idd_ma <= 0 or supply_voltage_v <= 0:
        raise ValueError("current and voltage must be > 0")
    return idd_ma * supply_voltage_v


@dataclass(frozen=True)
class TraditionalDesign:
    """A fixed-bias common-source LNA design with its variability model."""

    name: str
    nominal_current_ma: float
    model: LatentDieModel
    supply_voltage_v: float = 1.2
    bias_overhead_ma: float = 0.03
    sizing: Mapping[str, float] = field(default_factory=dict)
    recorded_stats: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.nominal_current_ma > 0:
            raise ValueError("nominal_current_ma must be > 0")
        if not self.supply_voltage_v > 0:
            raise ValueError("supply_voltage_v must be > 0")
        if self.model.mode_count != 1:
            raise ValueError("traditional designs carry exactly one mode")

    def power_mw(self) -> float:
        """Supply power including the bias branch overhead."""
        return mode_power_mw(self.nominal_current_ma + self.bias_overhead_ma,
                             self.supply_voltage_v)


@dataclass(frozen=True)
class PlnaDesign:
    """The programmable LNA: three modes sharing one die."""

    name: str
    modes: Sequence[PlnaModeSpec]
    model: LatentDieModel
    w1_um: float = 42.0
    w3_um: float = 14.0
    supply_voltage_v: float = 1.2
    sizing: Mapping[str, float] = field(default_factory=dict)
    recorded_stats: Mapping[str, Mapping[str, Mapping[str, float]]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) != 3 or {m.mode for m in self.modes} != set(PlnaMode):
            raise ValueError("a PLNA carries exactly the three modes HG, MG-LP, LG")
        by_mode = {m.mode: m for m in self.modes}
        if by_mode[PlnaMode.HG].idd_ma != by_mode[PlnaMode.LG].idd_ma:
            raise ValueError("HG and LG share the auxiliary branch and its supply current")
        if not by_mode[PlnaMode.MG_LP].idd_ma < by_mode[PlnaMode.HG].idd_ma:
            raise ValueError("MG-LP must be the lowest-power mode")
        if self.model.modes != tuple(m.mode.value for m in self.modes):
            raise ValueError("model modes must match the design's mode order")
        if not self.w1_um > 0 or not self.w3_um >= 0:
            raise ValueError("device widths must be positive")

    def mode_spec(self, mode: PlnaMode) -> PlnaModeSpec:
        for m in self.modes:
            if m.mode is mode:
                return m
        raise KeyError(mode)

    def mode_power_mw(self, mode: PlnaMode) -> float:
        return mode_power_mw(self.mode_spec(mode).idd_ma, self.supply_voltage_v)

    def mode_powers_mw(self) -> np.ndarray:
        """Per-mode supply power, ordered like the model's mode axis."""
        return np.array([mode_power_mw(m.idd_ma, self.supply_voltage_v)
                         for m in self.modes])


# ---------------------------------------------------------------------------
# Bundled dataset: recorded characterization tables
# ---------------------------------------------------------------------------

# LNA specification corners (matching at 50 ohm).
RECORDED_LNA_SPEC = dict(gain_min_db=10.0, gain_max_db=11.0, nf_max_db=3.0,
                         iip3_min_dbm=-4.0, s11_max_db=-10.0, s22_max_db=-10.0)

RECORDED_RECEIVER_TARGETS = dict(nf_rx_max_db=15.5, iip3_rx_min_dbm=-10.0)

# Sizing of the traditional designs (lengths um, inductors nH, caps fF/pF).
RECORDED_TRADITIONAL_SIZING = {
    0.4: dict(w1_um=40.0, l1_um=0.12, ls_nh=2.51, lg_nh=11.8, cx_ff=246.0,
              c1_ff=439.0, cp_pf=1.71, ld_nh=10.5),
    0.5: dict(w1_um=56.0, l1_um=0.12, ls_nh=2.51, lg_nh=7.40, cx_ff=383.0,
              c1_ff=429.0, cp_pf=1.62, ld_nh=10.5),
    0.6: dict(w1_um=64.0, l1_um=0.12, ls_nh=2.51, lg_nh=6.06, cx_ff=453.0,
              c1_ff=425.0, cp_pf=1.61, ld_nh=10.5),
    0.7: dict(w1_um=80.0, l1_um=0.12, ls_nh=2.65, lg_nh=5.02, cx_ff=532.0,
              c1_ff=416.0, cp_pf=1.54, ld_nh=10.5),
}

# Monte Carlo summaries of the traditional designs: per-parameter extremes,
# means, and spec-violation fractions from 1000-run characterization.
RECORDED_TRADITIONAL_STATS = {
    0.4: dict(
        gain_db=dict(min=8.64, mean=10.4, max=11.7, p_below_min=0.22, p_above_max=0.11),
        nf_db=dict(mean=2.8, p_above_max=0.0),
        iip3_dbm=dict(min=-10.4, mean=0.7, p_below_min=0.14),
        s11_db=dict(worst=-15.0, p_above_max=0.0),
        s22_db=dict(worst=-6.1, p_above_max=0.03),
    ),
    0.5: dict(
        gain_db=dict(min=8.23, mean=10.4, max=11.6, p_below_min=0.23, p_above_max=0.10),
        nf_db=dict(mean=2.8, p_above_max=0.0),
        iip3_dbm=dict(min=-9.6, mean=4.2, p_below_min=0.08),
        s11_db=dict(worst=-16.0, p_above_max=0.0),
        s22_db=dict(worst=-6.3, p_above_max=0.03),
    ),
    0.6: dict(
        gain_db=dict(min=8.92, mean=10.5, max=11.6, p_below_min=0.16, p_above_max=0.11),
        nf_db=dict(mean=2.7, p_above_max=0.0),
        iip3_dbm=dict(min=-6.6, mean=5.4, p_below_min=0.01),
        s11_db=dict(worst=-17.0, p_above_max=0.0),
        s22_db=dict(worst=-6.4, p_above_max=0.02),
    ),
    0.7: dict(
        gain_db=dict(min=8.67, mean=10.4, max=11.4, p_below_min=0.16, p_above_max=0.07),
        nf_db=dict(mean=2.7, p_above_max=0.0),
        iip3_dbm=dict(min=-5.8, mean=5.4, p_below_min=0.001),
        s11_db=dict(worst=-17.0, p_above_max=0.0),
        s22_db=dict(worst=-6.8, p_above_max=0.02),
    ),
}

# PLNA sizing: shared passives plus the two input devices.
RECORDED_PLNA_SIZING = dict(w1_um=42.0, l1_um=0.12, w3_um=14.0, l3_um=0.12,
                            ls_nh=2.38, lg_nh=11.23, cx_ff=246.0, c1_ff=426.0,
                            cp_pf=1.59, ld_nh=10.5)

# Mode structure: MG-LP runs the main device alone; HG/LG add the auxiliary
# branch (shared supply current), steering it to the load or to the supply.
RECORDED_PLNA_MODES = {
    PlnaMode.HG: dict(phi=True, phi_g=False, idd_ma=0.56, gain_offset_db=1.5),
    PlnaMode.MG_LP: dict(phi=False, phi_g=False, idd_ma=0.43, gain_offset_db=0.0),
    PlnaMode.LG: dict(phi=False, phi_g=True, idd_ma=0.56, gain_offset_db=-1.0),
}

# Per-mode Monte Carlo summaries of the PLNA (1000 runs per mode).
RECORDED_PLNA_STATS = {
    PlnaMode.HG: dict(
        gain_db=dict(min=10.1, mean=11.9, max=13.1),
        nf_db=dict(mean=2.5),
        iip3_dbm=dict(min=-8.9, mean=2.3),
        s11_db=dict(worst=-14.0),
        s22_db=dict(worst=-8.3),
    ),
    PlnaMode.MG_LP: dict(
        gain_db=dict(min=8.48, mean=10.5, max=11.9),
        nf_db=dict(mean=2.9),
        iip3_dbm=dict(min=-11.0, mean=-1.5),
        s11_db=dict(worst=-16.0),
        s22_db=dict(worst=-8.1),
    ),
    PlnaMode.LG: dict(
        gain_db=dict(min=7.58, mean=9.5, max=10.8),
        nf_db=dict(mean=3.6),
        iip3_dbm=dict(min=-9.2, mean=2.4),
        s11_db=dict(worst=-14.0),
        s22_db=dict(worst=-8.2),
    ),
}

# Post-selection matching statistics: centers for the S11/S22 marginals
# (recorded aggregate means across the selected-mode population).
_S11_CENTER_DB = -23.0
_S22_CENTER_DB = -19.0
_S11_DEFAULT_SIGMA = 2.5

# Receiver-level compliance fractions recorded for the bundled designs
# (both-pass / NF-fail / IIP3-fail), used as calibration targets.
RECORDED_RECEIVER_RATES = {
    "paper-0.4mA": dict(both=0.77, nf_fail=0.21, iip3_fail=0.06),
    "paper-0.5mA": dict(both=0.79, nf_fail=0.21, iip3_fail=0.003),
    "paper-0.6mA": dict(both=0.86, nf_fail=0.14, iip3_fail=0.0),
    "paper-0.7mA": dict(both=0.86, nf_fail=0.14, iip3_fail=0.001),
}

# Compliance after PLNA mode selection, per strategy.
RECORDED_SELECTION_RATES = {
    "best-gain": dict(both=0.85, nf_fail=0.07, iip3_fail=0.09),
    "best-receiver": dict(both=0.92, nf_fail=0.0, iip3_fail=0.08),
}

# Recorded compliance/power deltas of the PLNA against the fixed designs:
# (delta_compliance, delta_power), None where not recorded.
RECORDED_COMPARISONS = {
    "best-gain": {
        "paper-0.4mA": (0.08, 0.09),
        "paper-0.6mA": (0.0, -0.26),
        "paper-0.7mA": (None, -0.35),
    },
    "best-receiver": {
        "paper-0.4mA": (0.15, 0.05),
    },
}

# Cross-mode/cross-parameter couplings.  The shared-variance fractions follow
# the common-die rationale (all modes share the input devices and passives);
# gain_linearity is a free parameter tuned so that simulated receiver-level
# compliance of the bundled designs matches RECORDED_RECEIVER_RATES.
DEFAULT_COUPLINGS = CrossCouplings(gain=0.95, noise=0.95, linearity=0.90,
                                   s11=0.0, s22=0.0, gain_linearity=0.70)

_TRADITIONAL_MODE = "NOM"


def _nf_sigma(mean_nf_db: float, nf_max_db: float = 3.0) -> float:
    """Default 0.1 dB, capped so P(NF > limit) stays below 0.05%."""
    if mean_nf_db >= nf_max_db:
        return 0.1
    return min(0.1, (nf_max_db - mean_nf_db) / ZERO_TAIL_Z)


def _tail_plus_extreme(extreme: float, tail_value: float, tail_prob: float):
    """Joint (mean, sigma) from an upper-tail rate plus a recorded extreme.

    Solves mean + z(1-p)*sigma = tail_value and mean + z_extreme*sigma =
    extreme; used for S22 where only those two facts are recorded.
    """
    z_tail = inverse_normal_cdf(1.0 - tail_prob)
    if not z_tail < EXTREME_Z_1000:
        raise ValueError("tail rate too small to separate from the extreme")
    sigma = (extreme - tail_value) / (EXTREME_Z_1000 - z_tail)
    mean = tail_value - z_tail * sigma
    return mean, sigma


def _traditional_model(stats: Mapping[str, Mapping[str, float]],
                       spec: LnaSpecCorner,
                       couplings: CrossCouplings) -> LatentDieModel:
    g = stats["gain_db"]
    gain_mean, gain_sigma = fit_mean_sigma_from_tails(
        spec.gain_min_db, g["p_below_min"], spec.gain_max_db, g["p_above_max"]
    )
    nf_mean = stats["nf_db"]["mean"]
    i = stats["iip3_dbm"]
    iip3_sigma = fit_sigma_from_quantile(i["mean"], spec.iip3_min_dbm, i["p_below_min"])
    s22_mean, s22_sigma = _tail_plus_extreme(
        stats["s22_db"]["worst"], spec.s22_max_db, stats["s22_db"]["p_above_max"]
    )
    s11_mean = stats["s11_db"]["worst"] - EXTREME_Z_1000 * _S11_DEFAULT_SIGMA
    means = [[gain_mean, nf_mean, i["mean"], s11_mean, s22_mean]]
    sigmas = [[gain_sigma, _nf_sigma(nf_mean, spec.nf_max_db), iip3_sigma,
               _S11_DEFAULT_SIGMA, s22_sigma]]
    return LatentDieModel((_TRADITIONAL_MODE,), means, sigmas, couplings)


def _plna_model(stats, couplings: CrossCouplings) -> LatentDieModel:
    order = (PlnaMode.HG, PlnaMode.MG_LP, PlnaMode.LG)
    span_sigmas = [
        0.5 * (fit_sigma_from_extreme(stats[m]["gain_db"]["mean"], stats[m]["gain_db"]["min"])
               + fit_sigma_from_extreme(stats[m]["gain_db"]["mean"], stats[m]["gain_db"]["max"]))
        for m in order
    ]
    gain_sigma = float(np.mean(span_sigmas))  # pooled across modes
    means, sigmas = [], []
    for m in order:
        s = stats[m]
        means.append([
            s["gain_db"]["mean"], s["nf_db"]["mean"], s["iip3_dbm"]["mean"],
            _S11_CENTER_DB, _S22_CENTER_DB,
        ])
        sigmas.append([
            gain_sigma,
            0.1,
            fit_sigma_from_extreme(s["iip3_dbm"]["mean"], s["iip3_dbm"]["min"]),
            fit_sigma_from_extreme(_S11_CENTER_DB, s["s11_db"]["worst"]),
            fit_sigma_from_extreme(_S22_CENTER_DB, s["s22_db"]["worst"]),
        ])
    return LatentDieModel(tuple(m.value for m in order), means, sigmas, couplings)


@dataclass(frozen=True)
class ExplorerSettings:
    """Optional sweep configuration: grid values plus feasibility constraints."""

    currents_ma: tuple = ()
    widths_um: tuple = ()
    constraints: SweepConstraints = SweepConstraints()


@dataclass(frozen=True)
class BuiltinDataset:
    """The bundled designs plus the spec corners and receiver targets."""

    lna_spec: LnaSpecCorner
    receiver_targets: ReceiverTargets
    traditional: tuple
    plna: PlnaDesign
    explorer: ExplorerSettings | None = None

    def design(self, name: str):
        for d in self.all_designs():
            if d.name == name:
                return d
        raise KeyError(f"unknown design {name!r}; available: "
                       f"{[d.name for d in self.all_designs()]}")

    def all_designs(self):
        return (*self.traditional, self.plna)


def builtin_designs(couplings: CrossCouplings = DEFAULT_COUPLINGS) -> BuiltinDataset:
    """Build the bundled dataset with marginals fitted from the recorded stats."""
    spec = LnaSpecCorner(**RECORDED_LNA_SPEC)
    targets = ReceiverTargets(**RECORDED_RECEIVER_TARGETS)
    traditional = tuple(
        TraditionalDesign(
            name=f"paper-{current:.1f}mA",
            nominal_current_ma=current,
            model=_traditional_model(RECORDED_TRADITIONAL_STATS[current], spec, couplings),
            sizing=dict(RECORDED_TRADITIONAL_SIZING[current]),
            recorded_stats=RECORDED_TRADITIONAL_STATS[current],
        )
        for current in sorted(RECORDED_TRADITIONAL_STATS)
    )
    modes = tuple(
        PlnaModeSpec(mode=m, **RECORDED_PLNA_MODES[m])
        for m in (PlnaMode.HG, PlnaMode.MG_LP, PlnaMode.LG)
    )
    plna = PlnaDesign(
        name="paper-plna",
        modes=modes,
        model=_plna_model(RECORDED_PLNA_STATS, couplings),
        w1_um=RECORDED_PLNA_SIZING["w1_um"],
        w3_um=RECORDED_PLNA_SIZING["w3_um"],
        sizing=dict(RECORDED_PLNA_SIZING),
        recorded_stats={m.value: RECORDED_PLNA_STATS[m] for m in PlnaMode},
    )
    return BuiltinDataset(lna_spec=spec, receiver_targets=targets,
                          traditional=traditional, plna=plna)


# ---------------------------------------------------------------------------
# Config serialization (schema version 1)
# ---------------------------------------------------------------------------


class ConfigError(ValueError):
    """Config document violates the schema; the message carries the JSON path."""


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{path}.{key}: missing required field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, "
                          f"got {type(value).__name__}")
    return value


def _number(obj, key, path, default=None):
    if default is not None and key not in obj:
        return default
    value = _need(obj, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(value)


def _model_to_config(model: LatentDieModel) -> dict:
    return {
        "modes": list(model.modes),
        "means": {mode: {p: float(model.means[i, j]) for j, p in enumerate(PARAMS)}
                  for i, mode in enumerate(model.modes)},
        "sigmas": {mode: {p: float(model.sigmas[i, j]) for j, p in enumerate(PARAMS)}
                   for i, mode in enumerate(model.modes)},
        "couplings": {
            "gain": model.couplings.gain,
            "noise": model.couplings.noise,
            "linearity": model.couplings.linearity,
            "s11": model.couplings.s11,
            "s22": model.couplings.s22,
            "gain_linearity": model.couplings.gain_linearity,
        },
    }


def _model_from_config(doc: dict, path: str) -> LatentDieModel:
    modes = _need(doc, "modes", path, list)
    if not modes:
        raise ConfigError(f"{path}.modes: needs at least one mode")
    means_doc = _need(doc, "means", path, dict)
    sigmas_doc = _need(doc, "sigmas", path, dict)
    means, sigmas = [], []
    for mode in modes:
        mrow = _need(means_doc, mode, f"{path}.means", dict)
        srow = _need(sigmas_doc, mode, f"{path}.sigmas", dict)
        means.append([_number(mrow, p, f"{path}.means.{mode}") for p in PARAMS])
        row = []
        for p in PARAMS:
            sigma = _number(srow, p, f"{path}.sigmas.{mode}")
            if sigma < 0:
                raise ConfigError(f"{path}.sigmas.{mode}.{p}: sigma must be >= 0")
            row.append(sigma)
        sigmas.append(row)
    cdoc = doc.get("couplings", {})
    cpath = f"{path}.couplings"
    try:
        couplings = CrossCouplings(
            gain=_number(cdoc, "gain", cpath, DEFAULT_COUPLINGS.gain),
            noise=_number(cdoc, "noise", cpath, DEFAULT_COUPLINGS.noise),
            linearity=_number(cdoc, "linearity", cpath, DEFAULT_COUPLINGS.linearity),
            s11=_number(cdoc, "s11", cpath, DEFAULT_COUPLINGS.s11),
            s22=_number(cdoc, "s22", cpath, DEFAULT_COUPLINGS.s22),
            gain_linearity=_number(cdoc, "gain_linearity", cpath,
                                   DEFAULT_COUPLINGS.gain_linearity),
        )
        return LatentDieModel(tuple(modes), means, sigmas, couplings)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dataset_to_config(dataset: BuiltinDataset) -> dict:
    """Serialize a dataset to the (versioned) JSON config structure."""
    spec, targets = dataset.lna_spec, dataset.receiver_targets
    designs = []
    for d in dataset.traditional:
        designs.append({
            "kind": "traditional",
            "name": d.name,
            "nominal_current_ma": d.nominal_current_ma,
            "supply_voltage_v": d.supply_voltage_v,
            "bias_overhead_ma": d.bias_overhead_ma,
            "sizing": dict(d.sizing),
            "model": _model_to_config(d.model),
        })
    p = dataset.plna
    designs.append({
        "kind": "plna",
        "name": p.name,
        "supply_voltage_v": p.supply_voltage_v,
        "w1_um": p.w1_um,
        "w3_um": p.w3_um,
        "sizing": dict(p.sizing),
        "modes": [
            {"name": m.mode.value, "phi": m.phi, "phi_g": m.phi_g,
             "idd_ma": m.idd_ma, "gain_offset_db": m.gain_offset_db}
            for m in p.modes
        ],
        "model": _model_to_config(p.model),
    })
    doc = {
        "schema_version": SCHEMA_VERSION,
        "lna_spec": {
            "gain_min_db": spec.gain_min_db, "gain_max_db": spec.gain_max_db,
            "nf_max_db": spec.nf_max_db, "iip3_min_dbm": spec.iip3_min_dbm,
            "s11_max_db": spec.s11_max_db, "s22_max_db": spec.s22_max_db,
        },
        "receiver_targets": {
            "nf_rx_max_db": targets.nf_rx_max_db,
            "iip3_rx_min_dbm": targets.iip3_rx_min_dbm,
        },
        "designs": designs,
    }
    if dataset.explorer is not None:
        ex = dataset.explorer
        c = ex.constraints
        doc["explorer"] = {
            "currents_ma": list(ex.currents_ma),
            "widths_um": list(ex.widths_um),
            "constraints": {
                "s11_max_db": c.s11_max_db, "s22_max_db": c.s22_max_db,
                "gain_min_db": c.gain_min_db, "gain_max_db": c.gain_max_db,
                "nf_max_db": c.nf_max_db, "iip3_min_dbm": c.iip3_min_dbm,
            },
        }
    return doc


def model_to_json(model: LatentDieModel) -> dict:
    """Standalone JSON document for one variability model (versioned)."""
    return {"schema_version": SCHEMA_VERSION, **_model_to_config(model)}


def model_from_json(doc: dict) -> LatentDieModel:
    """Parse a standalone model document produced by model_to_json."""
    if not isinstance(doc, dict):
        raise ConfigError("$: model document must be an object")
    version = _need(doc, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"$.schema_version: unsupported version {version!r}")
    return _model_from_config(doc, "$")


def parse_config(doc: dict) -> BuiltinDataset:
    """Parse and fully validate a config document into a dataset."""
    if not isinstance(doc, dict):
        raise ConfigError("$: config root must be an object")
    version = _need(doc, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"$.schema_version: unsupported version {version!r}")
    sdoc = _need(doc, "lna_spec", "$", dict)
    try:
        spec = LnaSpecCorner(
            gain_min_db=_number(sdoc, "gain_min_db", "$.lna_spec"),
            gain_max_db=_number(sdoc, "gain_max_db", "$.lna_spec"),
            nf_max_db=_number(sdoc, "nf_max_db", "$.lna_spec"),
            iip3_min_dbm=_number(sdoc, "iip3_min_dbm", "$.lna_spec"),
            s11_max_db=_number(sdoc, "s11_max_db", "$.lna_spec"),
            s22_max_db=_number(sdoc, "s22_max_db", "$.lna_spec"),
        )
    except ValueError as exc:
        raise ConfigError(f"$.lna_spec: {exc}") from exc
    tdoc = _need(doc, "receiver_targets", "$", dict)
    try:
        targets = ReceiverTargets(
            nf_rx_max_db=_number(tdoc, "nf_rx_max_db", "$.receiver_targets"),
            iip3_rx_min_dbm=_number(tdoc, "iip3_rx_min_dbm", "$.receiver_targets"),
        )
    except ValueError as exc:
        raise ConfigError(f"$.receiver_targets: {exc}") from exc

    traditional, plna = [], None
    for i, ddoc in enumerate(_need(doc, "designs", "$", list)):
        path = f"$.designs[{i}]"
        kind = _need(ddoc, "kind", path, str)
        name = _need(ddoc, "name", path, str)
        model = _model_from_config(_need(ddoc, "model", path, dict), f"{path}.model")
        try:
            if kind == "traditional":
                traditional.append(TraditionalDesign(
                    name=name,
                    nominal_current_ma=_number(ddoc, "nominal_current_ma", path),
                    supply_voltage_v=_number(ddoc, "supply_voltage_v", path, 1.2),
                    bias_overhead_ma=_number(ddoc, "bias_overhead_ma", path, 0.03),
                    sizing=ddoc.get("sizing", {}),
                    model=model,
                ))
            elif kind == "plna":
                mode_specs = []
                for j, mdoc in enumerate(_need(ddoc, "modes", path, list)):
                    mpath = f"{path}.modes[{j}]"
                    mode_specs.append(PlnaModeSpec(
                        mode=PlnaMode(_need(mdoc, "name", mpath, str)),
                        phi=bool(_need(mdoc, "phi", mpath)),
                        phi_g=bool(_need(mdoc, "phi_g", mpath)),
                        idd_ma=_number(mdoc, "idd_ma", mpath),
                        gain_offset_db=_number(mdoc, "gain_offset_db", mpath),
                    ))
                if plna is not None:
                    raise ConfigError(f"{path}: only one PLNA design is supported")
                plna = PlnaDesign(
                    name=name,
                    modes=mode_specs,
                    model=model,
                    w1_um=_number(ddoc, "w1_um", path, 42.0),
                    w3_um=_number(ddoc, "w3_um", path, 14.0),
                    supply_voltage_v=_number(ddoc, "supply_voltage_v", path, 1.2),
                    sizing=ddoc.get("sizing", {}),
                )
            else:
                raise ConfigError(f"{path}.kind: unknown design kind {kind!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if plna is None:
        raise ConfigError("$.designs: a PLNA design is required")

    explorer = None
    if "explorer" in doc:
        edoc = _need(doc, "explorer", "$", dict)
        cdoc = edoc.get("constraints", {})
        cpath = "$.explorer.constraints"
        defaults = SweepConstraints()
        try:
            constraints = SweepConstraints(
                s11_max_db=_number(cdoc, "s11_max_db", cpath, defaults.s11_max_db),
                s22_max_db=_number(cdoc, "s22_max_db", cpath, defaults.s22_max_db),
                gain_min_db=_number(cdoc, "gain_min_db", cpath, defaults.gain_min_db),
                gain_max_db=_number(cdoc, "gain_max_db", cpath, defaults.gain_max_db),
                nf_max_db=_number(cdoc, "nf_max_db", cpath, defaults.nf_max_db),
                iip3_min_dbm=_number(cdoc, "iip3_min_dbm", cpath, defaults.iip3_min_dbm),
            )
        except ValueError as exc:
            raise ConfigError(f"{cpath}: {exc}") from exc
        for key in ("currents_ma", "widths_um"):
            if key in edoc and not isinstance(edoc[key], list):
                raise ConfigError(f"$.explorer.{key}: expected a list")
        explorer = ExplorerSettings(
            currents_ma=tuple(float(v) for v in edoc.get("currents_ma", [])),
            widths_um=tuple(float(v) for v in edoc.get("widths_um", [])),
            constraints=constraints,
        )
    return BuiltinDataset(lna_spec=spec, receiver_targets=targets,
                          traditional=tuple(traditional), plna=plna,
                          explorer=explorer)


def parse_config_file(path) -> BuiltinDataset:
    """Load and validate a JSON config file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: not valid JSON ({exc})") from exc
    return parse_config(doc)

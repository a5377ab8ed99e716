"""Receiver budget math: unit conversions, noise/linearity cascades, compliance.

All cascade arithmetic is done in linear units (power ratios and mW); decibel
values appear only at the interfaces.  The conversion and cascade functions
accept plain floats or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "mw_to_dbm",
    "RfQuantities",
    "LnaSpecCorner",
    "ReceiverTargets",
    "StageTwoLimits",
    "ComplianceFlags",
    "cascade_noise",
    "cascade_iip3",
    "derive_stage2_limits",
    "receiver_noise_factor",
    "receiver_iip3_mw",
    "receiver_compliance",
    "classify_receiver",
]


def db_to_linear(value_db):
    """Convert decibels to a linear power ratio: 10**(x/10)."""
    if not np.all(np.isfinite(value_db)):
        raise ValueError("dB value must be finite")
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value_lin):
    """Convert a linear power ratio to decibels: 10*log10(x). Requires x > 0."""
    if not np.all(np.isfinite(value_lin)):
        raise ValueError("linear value must be finite")
    if np.any(np.asarray(value_lin) <= 0.0):
        raise ValueError("linear value must be positive")
    return 10.0 * np.log10(value_lin)


def dbm_to_mw(value_dbm):
    """Convert dBm to milliwatts."""
    return db_to_linear(value_dbm)


def mw_to_dbm(value_mw):
    """Convert milliwatts to dBm. Requires value > 0."""
    return linear_to_db(value_mw)


@dataclass(frozen=True)
class RfQuantities:
    """One die's (or one mode's) RF parameters, all in dB/dBm units."""

    gain_db: float
    nf_db: float
    iip3_dbm: float
    s11_db: float
    s22_db: float

    def __post_init__(self):
        if not self.nf_db > 0.0:
            raise ValueError(f"nf_db must be > 0, got {self.nf_db}")
        if self.s11_db > 0.0:
            raise ValueError(f"s11_db must be <= 0, got {self.s11_db}")
        if self.s22_db > 0.0:
            raise ValueError(f"s22_db must be <= 0, got {self.s22_db}")


@dataclass(frozen=True)
class LnaSpecCorner:
    """LNA specification corners (matching referred to 50 ohm)."""

    gain_min_db: float = 10.0
    gain_max_db: float = 11.0
    nf_max_db: float = 3.0
    iip3_min_dbm: float = -4.0
    s11_max_db: float = -10.0
    s22_max_db: float = -10.0

    def __post_init__(self):
        if not self.gain_min_db < self.gain_max_db:
            raise ValueError("gain_min_db must be < gain_max_db")


@dataclass(frozen=True)
class ReceiverTargets:
    """Receiver-level limits the full chain has to meet."""

    nf_rx_max_db: float = 15.5
    iip3_rx_min_dbm: float = -10.0

    def __post_init__(self):
        if not self.nf_rx_max_db > 0.0:
            raise ValueError("nf_rx_max_db must be > 0")


@dataclass(frozen=True)
class StageTwoLimits:
    """Limits for the chain after the LNA: max noise factor, min IIP3 (mW)."""

    f2_max: float
    iip3_2_min_mw: float

    def __post_init__(self):
        if not self.f2_max >= 1.0:
            raise ValueError("f2_max must be >= 1")
        if not self.iip3_2_min_mw > 0.0:
            raise ValueError("iip3_2_min_mw must be > 0")

    @property
    def nf2_max_db(self) -> float:
        return float(linear_to_db(self.f2_max))

    @property
    def iip3_2_min_dbm(self) -> float:
        return float(mw_to_dbm(self.iip3_2_min_mw))


@dataclass(frozen=True)
class ComplianceFlags:
    """Independent receiver pass/fail flags; a die can fail both."""

    nf_pass: bool
    iip3_pass: bool

    @property
    def both_pass(self) -> bool:
        return self.nf_pass and self.iip3_pass


def cascade_noise(f_lna, g_lna, f2):
    """Two-stage noise-factor cascade: f_lna + (f2 - 1)/g_lna.

    All arguments are linear: noise factors >= 1, gain a power ratio > 0.
    """
    if np.any(np.asarray(f_lna) < 1.0) or np.any(np.asarray(f2) < 1.0):
        raise ValueError("noise factors must be >= 1")
    if np.any(np.asarray(g_lna) <= 0.0):
        raise ValueError("g_lna must be > 0")
    return f_lna + (f2 - 1.0) / g_lna


def cascade_iip3(iip3_lna_mw, g_lna, iip3_2_mw):
    """Two-stage IIP3 cascade: 1 / (1/iip3_lna + g_lna/iip3_2), in mW.

    The result never exceeds iip3_lna nor iip3_2/g_lna.
    """
    for name, v in (("iip3_lna_mw", iip3_lna_mw), ("g_lna", g_lna), ("iip3_2_mw", iip3_2_mw)):
        if np.any(np.asarray(v) <= 0.0):
            raise ValueError(f"{name} must be > 0")
    return 1.0 / (1.0 / iip3_lna_mw + g_lna / iip3_2_mw)


def derive_stage2_limits(spec: LnaSpecCorner, targets: ReceiverTargets) -> StageTwoLimits:
    """Size the post-LNA chain so a worst-corner LNA exactly meets the targets.

    The noise limit uses the minimum-gain corner (least suppression of
    second-stage noise); the linearity limit uses the maximum-gain corner
    (largest signal handed to the second stage).  Raises ValueError when the
    LNA corner alone already exhausts the receiver budget.
    """
    f_rx_max = db_to_linear(targets.nf_rx_max_db)
    f_corner = db_to_linear(spec.nf_max_db)
    if not f_rx_max > f_corner:
        raise ValueError(
            "infeasible targets: receiver noise budget does not exceed the LNA corner"
        )
    iip3_rx_min = dbm_to_mw(targets.iip3_rx_min_dbm)
    iip3_corner = dbm_to_mw(spec.iip3_min_dbm)
    if not iip3_rx_min < iip3_corner:
        raise ValueError(
            "infeasible targets: receiver linearity target is not below the LNA corner"
        )
    g_min = db_to_linear(spec.gain_min_db)
    g_max = db_to_linear(spec.gain_max_db)
    f2_max = (f_rx_max - f_corner) * g_min + 1.0
    iip3_2_min = g_max / (1.0 / iip3_rx_min - 1.0 / iip3_corner)
    return StageTwoLimits(f2_max=float(f2_max), iip3_2_min_mw=float(iip3_2_min))


def receiver_noise_factor(gain_db, nf_db, limits: StageTwoLimits):
    """Receiver noise factor with the second stage at its noise limit."""
    return cascade_noise(db_to_linear(nf_db), db_to_linear(gain_db), limits.f2_max)


def receiver_iip3_mw(gain_db, iip3_dbm, limits: StageTwoLimits):
    """Receiver IIP3 in mW with the second stage at its linearity limit."""
    return cascade_iip3(dbm_to_mw(iip3_dbm), db_to_linear(gain_db), limits.iip3_2_min_mw)


def receiver_compliance(gain_db, nf_db, iip3_dbm, limits: StageTwoLimits,
                        targets: ReceiverTargets):
    """Elementwise receiver pass masks (nf_pass, iip3_pass) for dB/dBm inputs.

    Comparisons are inclusive, so the exact spec-corner die passes with zero
    margin.
    """
    f_rx = receiver_noise_factor(gain_db, nf_db, limits)
    i_rx = receiver_iip3_mw(gain_db, iip3_dbm, limits)
    nf_pass = f_rx <= db_to_linear(targets.nf_rx_max_db)
    iip3_pass = i_rx >= dbm_to_mw(targets.iip3_rx_min_dbm)
    return nf_pass, iip3_pass


def classify_receiver(q: RfQuantities, limits: StageTwoLimits,
                      targets: ReceiverTargets) -> ComplianceFlags:
    """Classify one die: does a receiver built around it meet both targets?"""
    nf_pass, iip3_pass = receiver_compliance(
        q.gain_db, q.nf_db, q.iip3_dbm, limits, targets
    )
    return ComplianceFlags(nf_pass=bool(nf_pass), iip3_pass=bool(iip3_pass))

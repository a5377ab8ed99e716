"""Variability models: Gaussian marginals fitted from tail data, plus a
latent-factor structure that correlates parameters within a die and modes
across a die.

Marginals are Gaussian in dB/dBm units.  Published dispersion data usually
comes as tail probabilities ("x% of samples violate ...") or as extreme values
of a 1000-sample run; the fitting helpers here invert those through the
standard normal quantile function.

The latent model draws, per die, one shared factor per physical axis (gain,
noise, linearity).  A factor shifts every operating mode of the die by the
same dB amount (loadings are equal across modes, scaled to the smallest mode
sigma), which keeps mode-to-mode tracking tight; the remainder of each
marginal's variance is idiosyncratic per (mode, parameter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import erfc

from . import rng
from .budget import RfQuantities

__all__ = [
    "PARAMS",
    "FACTORS",
    "EXTREME_Z_1000",
    "ZERO_TAIL_Z",
    "inverse_normal_cdf",
    "fit_sigma_from_quantile",
    "TwoTailFit",
    "fit_sigma_two_tails",
    "fit_mean_sigma_from_tails",
    "fit_sigma_from_extreme",
    "MarginalSpec",
    "CrossCouplings",
    "LatentDieModel",
    "DieSample",
    "sample_values",
    "sample_die",
    "CalibrationTarget",
    "CalibrationResult",
    "calibrate",
]

PARAMS = ("gain_db", "nf_db", "iip3_dbm", "s11_db", "s22_db")
FACTORS = ("gain", "noise", "linearity")

# Convention: the extreme of a 1000-sample Gaussian run sits near +/-3.2 sigma.
EXTREME_Z_1000 = 3.2
# "No violations observed in 1000 runs" is modelled as a tail below 0.05%.
ZERO_TAIL_Z = 3.2905267314919255

# Rational approximation for the normal quantile (central region and tails),
# refined below with one Halley step against the complementary error function.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _normal_cdf(z):
    return 0.5 * erfc(-z / _SQRT2)


def inverse_normal_cdf(p):
    """Quantile z with Phi(z) = p for p in (0, 1); scalar or array.

    Rational approximation plus one Halley refinement; absolute error is far
    below 1e-9 over the full open interval.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p_arr)) or np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
        raise ValueError("probability must lie strictly inside (0, 1)")
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    z = np.empty_like(p_arr)

    lo = p_arr < _P_LOW
    hi = p_arr > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(mid):
        q = p_arr[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        z[mid] = num * q / den
    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(p_arr[lo]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        z[lo] = num / den
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log(1.0 - p_arr[hi]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        z[hi] = -num / den

    # One Halley step against the high-precision CDF.
    err = _normal_cdf(z) - p_arr
    u = err * _SQRT2PI * np.exp(0.5 * z * z)
    z = z - u / (1.0 + 0.5 * z * u)
    return float(z[0]) if scalar else z


def fit_sigma_from_quantile(mean: float, q_value: float, q_prob: float) -> float:
    """Recover a Gaussian sigma from one quantile: sigma = (q - mean)/z(p).

    The quantile must sit on the side of the mean its probability implies
    (q_value < mean iff q_prob < 0.5).
    """
    if q_prob == 0.5:
        raise ValueError("q_prob = 0.5 carries no dispersion information")
    if q_value == mean:
        raise ValueError("q_value must differ from the mean")
    if (q_value < mean) != (q_prob < 0.5):
        raise ValueError(
            f"inconsistent quantile: value {q_value} vs mean {mean} "
            f"with probability {q_prob}"
        )
    return (q_value - mean) / inverse_normal_cdf(q_prob)


@dataclass(frozen=True)
class TwoTailFit:
    """Sigma recovered independently from each tail of one marginal."""

    sigma_low: float
    sigma_high: float

    @property
    def sigma(self) -> float:
        return 0.5 * (self.sigma_low + self.sigma_high)

    @property
    def relative_spread(self) -> float:
        """Disagreement between the two fits; small values support Gaussianity."""
        return abs(self.sigma_low - self.sigma_high) / self.sigma


def fit_sigma_two_tails(mean: float, low_value: float, low_prob: float,
                        high_value: float, high_prob: float) -> TwoTailFit:
    """Fit sigma from both tails around a fixed mean.

    low_prob is P(X < low_value); high_prob is P(X > high_value).
    """
    return TwoTailFit(
        sigma_low=fit_sigma_from_quantile(mean, low_value, low_prob),
        sigma_high=fit_sigma_from_quantile(mean, high_value, 1.0 - high_prob),
    )


def fit_mean_sigma_from_tails(low_value: float, low_prob: float,
                              high_value: float, high_prob: float):
    """Joint (mean, sigma) fit from two tail constraints.

    Solves mean + z(low_prob)*sigma = low_value and
    mean + z(1 - high_prob)*sigma = high_value exactly, so both tail rates are
    reproduced by construction.
    """
    if not low_value < high_value:
        raise ValueError("low_value must be below high_value")
    z_lo = inverse_normal_cdf(low_prob)
    z_hi = inverse_normal_cdf(1.0 - high_prob)
    if not z_lo < z_hi:
        raise ValueError("tail probabilities leave no room for a positive sigma")
    sigma = (high_value - low_value) / (z_hi - z_lo)
    mean = low_value - z_lo * sigma
    return mean, sigma


def fit_sigma_from_extreme(mean: float, extreme_value: float,
                           z_extreme: float = EXTREME_Z_1000) -> float:
    """Sigma implied by treating a recorded extreme as a z_extreme-sigma event."""
    if extreme_value == mean:
        raise ValueError("extreme_value must differ from the mean")
    if z_extreme <= 0:
        raise ValueError("z_extreme must be > 0")
    return abs(extreme_value - mean) / z_extreme


@dataclass(frozen=True)
class MarginalSpec:
    """Gaussian marginal of one parameter in dB/dBm units."""

    mean: float
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not math.isfinite(self.mean):
            raise ValueError("mean must be finite")


@dataclass(frozen=True)
class CrossCouplings:
    """Shared-variance fractions tying parameters together across modes.

    gain/noise/linearity/s11/s22 give, per parameter, the fraction of the
    smallest mode sigma's variance carried by that parameter's shared factor
    (so they equal the cross-mode correlation when mode sigmas are equal).
    s11/s22 ride on the gain factor when nonzero.  gain_linearity is the
    loading of the linearity axis on the gain factor, in units of the smallest
    linearity sigma; it creates the within-die gain-to-IIP3 correlation.
    """

    gain: float = 0.95
    noise: float = 0.95
    linearity: float = 0.90
    s11: float = 0.0
    s22: float = 0.0
    gain_linearity: float = 0.70

    def __post_init__(self):
        for name in ("gain", "noise", "linearity", "s11", "s22"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"coupling {name} must be in [0, 1], got {v}")
        if not abs(self.gain_linearity) <= math.sqrt(self.linearity):
            raise ValueError(
                "gain_linearity**2 must not exceed the linearity coupling"
            )


class LatentDieModel:
    """Correlated per-die model: Gaussian marginals + three shared factors.

    Immutable after construction.  The loading matrix and idiosyncratic sigmas
    are derived from (sigmas, couplings) so that every marginal variance
    decomposes exactly: sum(loadings**2) + idio_sigma**2 == sigma**2.
    """

    def __init__(self, modes: Sequence[str], means, sigmas,
                 couplings: CrossCouplings = CrossCouplings()):
        self.modes = tuple(modes)
        if not self.modes:
            raise ValueError("model needs at least one mode")
        m = len(self.modes)
        self.means = np.asarray(means, dtype=float).reshape(m, len(PARAMS)).copy()
        self.sigmas = np.asarray(sigmas, dtype=float).reshape(m, len(PARAMS)).copy()
        if np.any(self.sigmas < 0.0) or not np.all(np.isfinite(self.sigmas)):
            raise ValueError("sigmas must be finite and >= 0")
        if not np.all(np.isfinite(self.means)):
            raise ValueError("means must be finite")
        self.couplings = couplings
        self.loadings, self.idio_sigma = self._derive_loadings()
        self.means.flags.writeable = False
        self.sigmas.flags.writeable = False
        self.loadings.flags.writeable = False
        self.idio_sigma.flags.writeable = False
        self._check_variance_decomposition()

    def _derive_loadings(self):
        m = len(self.modes)
        c = self.couplings
        loadings = np.zeros((m, len(PARAMS), len(FACTORS)))
        s_min = self.sigmas.min(axis=0)  # smallest sigma per parameter
        # Gain, noise: one factor each, equal dB loading across modes.
        loadings[:, 0, 0] = math.sqrt(c.gain) * s_min[0]
        loadings[:, 1, 1] = math.sqrt(c.noise) * s_min[1]
        # Linearity: split between the gain factor and its own factor.
        w_gain = c.gain_linearity * s_min[2]
        loadings[:, 2, 0] = w_gain
        loadings[:, 2, 2] = math.sqrt(max(c.linearity * s_min[2] ** 2 - w_gain ** 2, 0.0))
        # Matching terms ride on the gain factor when coupled at all.
        loadings[:, 3, 0] = math.sqrt(c.s11) * s_min[3]
        loadings[:, 4, 0] = math.sqrt(c.s22) * s_min[4]
        shared_var = (loadings ** 2).sum(axis=2)
        idio = np.sqrt(np.maximum(self.sigmas ** 2 - shared_var, 0.0))
        return loadings, idio

    def _check_variance_decomposition(self):
        total = (self.loadings ** 2).sum(axis=2) + self.idio_sigma ** 2
        if not np.allclose(total, self.sigmas ** 2, rtol=0.0, atol=1e-9):
            raise ValueError("variance decomposition violated")

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    def mode_index(self, mode: str) -> int:
        return self.modes.index(mode)

    def marginal(self, mode: str, param: str) -> MarginalSpec:
        i, j = self.mode_index(mode), PARAMS.index(param)
        return MarginalSpec(mean=float(self.means[i, j]), sigma=float(self.sigmas[i, j]))

    def implied_correlation(self, mode_a: str, param_a: str,
                            mode_b: str, param_b: str) -> float:
        """Model-implied correlation between two (mode, parameter) slots."""
        ia, ja = self.mode_index(mode_a), PARAMS.index(param_a)
        ib, jb = self.mode_index(mode_b), PARAMS.index(param_b)
        cov = float(np.dot(self.loadings[ia, ja], self.loadings[ib, jb]))
        if (ia, ja) == (ib, jb):
            cov += float(self.idio_sigma[ia, ja] ** 2)
        denom = float(self.sigmas[ia, ja] * self.sigmas[ib, jb])
        if denom == 0.0:
            return 0.0
        rho = cov / denom
        if not -1.0 - 1e-12 <= rho <= 1.0 + 1e-12:
            raise ValueError("implied correlation outside [-1, 1]")
        return rho

    def with_updates(self, sigmas=None, couplings=None, means=None) -> "LatentDieModel":
        return LatentDieModel(
            self.modes,
            self.means if means is None else means,
            self.sigmas if sigmas is None else sigmas,
            self.couplings if couplings is None else couplings,
        )

    def __eq__(self, other):
        if not isinstance(other, LatentDieModel):
            return NotImplemented
        return (self.modes == other.modes
                and np.array_equal(self.means, other.means)
                and np.array_equal(self.sigmas, other.sigmas)
                and self.couplings == other.couplings)

    def __repr__(self):
        return f"LatentDieModel(modes={self.modes!r}, couplings={self.couplings!r})"


@dataclass(frozen=True)
class DieSample:
    """One sampled die: latent factors plus per-mode RF parameters."""

    index: int
    modes: tuple
    factors: np.ndarray       # (3,)
    values: np.ndarray        # (mode_count, 5), columns ordered as PARAMS

    def value(self, mode: str, param: str) -> float:
        return float(self.values[self.modes.index(mode), PARAMS.index(param)])

    def rf(self, mode: str) -> RfQuantities:
        row = self.values[self.modes.index(mode)]
        return RfQuantities(*(float(v) for v in row))


def sample_values(model: LatentDieModel, seed: int, indices):
    """Draw dies by index: returns (factors (n, 3), values (n, modes, 5)).

    Entry i is a pure function of (model, seed, indices[i]); generation order
    and batch size never change the result.
    """
    idx = np.asarray(indices, dtype=np.int64)
    n = idx.size
    m = model.mode_count
    draws = len(FACTORS) + m * len(PARAMS)
    z = inverse_normal_cdf(rng.uniforms(seed, idx, draws))
    factors = z[:, :len(FACTORS)]
    eps = z[:, len(FACTORS):].reshape(n, m, len(PARAMS))
    values = (model.means
              + np.einsum("mpk,nk->nmp", model.loadings, factors)
              + model.idio_sigma * eps)
    return factors, values


def sample_die(model: LatentDieModel, seed: int, index: int) -> DieSample:
    """Sample a single die deterministically by (model, seed, index)."""
    factors, values = sample_values(model, seed, [index])
    return DieSample(index=int(index), modes=model.modes,
                     factors=factors[0], values=values[0])


@dataclass(frozen=True)
class CalibrationTarget:
    """One named statistic the calibrated model should reproduce."""

    name: str
    value: float
    weight: float = 1.0


@dataclass(frozen=True)
class FreeParameter:
    """A tunable knob: ("sigma", mode, param) or ("coupling", field)."""

    kind: str
    mode: str = ""
    param: str = ""
    coupling_field: str = ""

    @staticmethod
    def sigma(mode: str, param: str) -> "FreeParameter":
        return FreeParameter(kind="sigma", mode=mode, param=param)

    @staticmethod
    def coupling(field_name: str) -> "FreeParameter":
        return FreeParameter(kind="coupling", coupling_field=field_name)


@dataclass
class CalibrationResult:
    model: LatentDieModel
    sse_before: float
    sse_after: float
    residuals: dict
    evaluations: int
    message: str

    @property
    def improved(self) -> bool:
        return self.sse_after < self.sse_before


def _get_knob(model: LatentDieModel, knob: FreeParameter) -> float:
    if knob.kind == "sigma":
        return float(model.sigmas[model.mode_index(knob.mode), PARAMS.index(knob.param)])
    if knob.kind == "coupling":
        return float(getattr(model.couplings, knob.coupling_field))
    raise ValueError(f"unknown knob kind {knob.kind!r}")


def _set_knob(model: LatentDieModel, knob: FreeParameter, value: float) -> LatentDieModel:
    if knob.kind == "sigma":
        sig = model.sigmas.copy()
        sig[model.mode_index(knob.mode), PARAMS.index(knob.param)] = value
        return model.with_updates(sigmas=sig)
    if knob.kind == "coupling":
        c = replace(model.couplings, **{knob.coupling_field: value})
        return model.with_updates(couplings=c)
    raise ValueError(f"unknown knob kind {knob.kind!r}")


def _knob_bounds(model: LatentDieModel, knob: FreeParameter):
    if knob.kind == "sigma":
        return 1e-9, math.inf
    if knob.coupling_field == "gain_linearity":
        limit = math.sqrt(model.couplings.linearity)
        return -limit, limit
    return 0.0, 1.0


def calibrate(model: LatentDieModel,
              targets: Sequence[CalibrationTarget],
              evaluate: Callable[[LatentDieModel], Mapping[str, float]],
              free: Sequence[FreeParameter],
              *,
              sweeps: int = 4,
              initial_step: float = 0.25,
              shrink: float = 0.5,
              tol: float = 1e-12) -> CalibrationResult:
    """Coordinate-descent search minimising summed squared target error.

    `evaluate` must be deterministic (fixed evaluation seed, fixed sample
    count) and return the named statistics the targets refer to.  The search
    never fails silently: if no candidate improves on the input model, the
    input is returned with a diagnostic message.
    """
    if not targets:
        raise ValueError("at least one calibration target is required")

    evals = 0

    def sse(mdl):
        nonlocal evals
        stats = evaluate(mdl)
        evals += 1
        missing = [t.name for t in targets if t.name not in stats]
        if missing:
            raise KeyError(f"evaluate() did not produce statistics: {missing}")
        return sum(t.weight * (stats[t.name] - t.value) ** 2 for t in targets), stats

    best_sse, best_stats = sse(model)
    initial_sse = best_sse
    best = model

    step = initial_step
    for _ in range(sweeps):
        for knob in free:
            # probe both directions, then walk while the objective improves
            for direction in (+1.0, -1.0):
                moved = False
                for _ in range(40):  # bounds the evaluation budget per knob
                    current = _get_knob(best, knob)
                    lo, hi = _knob_bounds(best, knob)
                    scale = abs(current) if abs(current) > 1e-6 else 1.0
                    cand_val = min(max(current + direction * step * scale, lo), hi)
                    if cand_val == current:
                        break
                    try:
                        cand = _set_knob(best, knob, cand_val)
                    except ValueError:
                        break
                    cand_sse, cand_stats = sse(cand)
                    if cand_sse < best_sse - tol:
                        best, best_sse, best_stats = cand, cand_sse, cand_stats
                        moved = True
                    else:
                        break
                if moved:
                    break
        step *= shrink

    residuals = {t.name: best_stats[t.name] - t.value for t in targets}
    if best_sse < initial_sse - tol:
        message = "improved"
    else:
        message = ("no improving step found; returning the best model seen "
                   "(the input)")
    return CalibrationResult(model=best, sse_before=initial_sse,
                             sse_after=best_sse, residuals=residuals,
                             evaluations=evals, message=message)

"""Analytic log-price laws for the Wiener-Bachelier and Ornstein-Uhlenbeck models.

Both models describe ``x = ln(S_t / S_0)`` as a Gaussian variable at a fixed
time ``t``.  The classical model uses the no-arbitrage drift ``r - sigma**2/2``;
the OU model recentres the Fokker-Planck fundamental solution so that
``E[S_t] = S_0 * exp(r*q*t)``.

Densities accept scalars or numpy arrays for ``x``.  Moment generating
functions and cumulants accept ``t = 0``; densities do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, RangeError

# exp(700) is the last comfortable power below the double overflow threshold.
MAX_QT = 700.0
_TINY_QT = 1e-8
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Model(str, Enum):
    WB = "wb"
    OU = "ou"


@dataclass(frozen=True)
class WienerBachelierParams:
    rate: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.rate):
            raise DomainError(f"rate must be finite, got {self.rate}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")

    @property
    def model(self) -> Model:
        return Model.WB


@dataclass(frozen=True)
class OrnsteinUhlenbeckParams:
    rate: float
    sigma: float
    q: float

    def __post_init__(self):
        if not math.isfinite(self.rate):
            raise DomainError(f"rate must be finite, got {self.rate}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")
        if not (math.isfinite(self.q) and self.q > 0):
            raise DomainError(f"q must be positive and finite, got {self.q}")

    @property
    def model(self) -> Model:
        return Model.OU


Params = WienerBachelierParams | OrnsteinUhlenbeckParams


@dataclass(frozen=True)
class LogPriceDensity:
    """Gaussian law of the log-return at time ``t``."""

    model: Model
    mean: float
    variance: float
    t: float

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        return _gauss_pdf(x, self.mean, self.variance)


@dataclass(frozen=True)
class CumulantPair:
    s1: float
    s2: float


def one_minus_exp_neg2(qt: float) -> float:
    """``1 - exp(-2*qt)``, accurate for tiny and large ``qt``."""
    if qt < _TINY_QT:
        return 2.0 * qt - 2.0 * qt * qt
    return -math.expm1(-2.0 * qt)


def _check_t(t: float, strict: bool) -> None:
    if not math.isfinite(t) or t < 0 or (strict and t == 0):
        bound = "> 0" if strict else ">= 0"
        raise DomainError(f"time must be {bound}, got {t}")


def _gauss_pdf(x, mean: float, variance: float):
    x = np.asarray(x, dtype=float)
    z2 = (x - mean) ** 2 / variance
    out = np.exp(-0.5 * z2 - _LOG_SQRT_2PI - 0.5 * math.log(variance))
    return float(out) if out.ndim == 0 else out


def wb_law(params: WienerBachelierParams, t: float) -> LogPriceDensity:
    _check_t(t, strict=False)
    s2 = params.sigma**2
    return LogPriceDensity(Model.WB, (params.rate - 0.5 * s2) * t, s2 * t, t)


def ou_variance(params: OrnsteinUhlenbeckParams, t: float) -> float:
    """``sigma**2 * (1 - exp(-2qt))``; equals ``2 sigma**2 exp(-qt) sinh(qt)``."""
    return params.sigma**2 * one_minus_exp_neg2(params.q * t)


def ou_law(params: OrnsteinUhlenbeckParams, t: float) -> LogPriceDensity:
    _check_t(t, strict=False)
    v = ou_variance(params, t)
    # sigma^2 e^{-qt} sinh(qt) == v / 2
    return LogPriceDensity(Model.OU, params.rate * params.q * t - 0.5 * v, v, t)


def law(params: Params, t: float) -> LogPriceDensity:
    if isinstance(params, OrnsteinUhlenbeckParams):
        return ou_law(params, t)
    return wb_law(params, t)


def wb_density(params: WienerBachelierParams, x, t: float):
    _check_t(t, strict=True)
    d = wb_law(params, t)
    return _gauss_pdf(x, d.mean, d.variance)


def ou_density(params: OrnsteinUhlenbeckParams, x, t: float):
    """Density of the recentred OU log-price at time ``t``."""
    _check_t(t, strict=True)
    d = ou_law(params, t)
    return _gauss_pdf(x, d.mean, d.variance)


def ou_transition_density(params: OrnsteinUhlenbeckParams, x, x0: float, t: float):
    """Fundamental solution of the OU Fokker-Planck equation started at ``x0``.

    The rate does not enter; only ``sigma`` and ``q`` do.
    """
    _check_t(t, strict=True)
    qt = params.q * t
    return _gauss_pdf(x, x0 * math.exp(-qt), ou_variance(params, t))


def ou_calibrate_x0(params: OrnsteinUhlenbeckParams, t: float) -> float:
    """Initial point that makes ``E[S_t] = S_0 exp(r q t)`` for the OU transition law.

    Returns ``r q t e^{qt} - sigma**2 sinh(qt)``.
    """
    _check_t(t, strict=False)
    qt = params.q * t
    if qt > MAX_QT:
        raise RangeError(f"q*t = {qt} exceeds {MAX_QT}; exp(q*t) overflows")
    if qt == 0:
        return 0.0
    # e^{qt} * (rqt - sigma^2 e^{-qt} sinh qt), with e^{-qt} sinh qt = (1 - e^{-2qt}) / 2
    return math.exp(qt) * (params.rate * qt - 0.5 * params.sigma**2 * one_minus_exp_neg2(qt))


def wb_log_mgf(params: WienerBachelierParams, lam: float, t: float) -> float:
    _check_t(t, strict=False)
    return 0.5 * lam * (2.0 * params.rate + (lam - 1.0) * params.sigma**2) * t


def ou_log_mgf(params: OrnsteinUhlenbeckParams, lam: float, t: float) -> float:
    _check_t(t, strict=False)
    qt = params.q * t
    return lam * params.rate * qt + 0.5 * (lam - 1.0) * lam * params.sigma**2 * one_minus_exp_neg2(qt)


def wb_mgf(params: WienerBachelierParams, lam: float, t: float) -> float:
    """``E[exp(lam * x)]`` under the Wiener-Bachelier law."""
    return math.exp(wb_log_mgf(params, lam, t))


def ou_mgf(params: OrnsteinUhlenbeckParams, lam: float, t: float) -> float:
    """``exp(lam r q t + e^{-qt} (lam - 1) lam sigma**2 sinh(qt))``."""
    return math.exp(ou_log_mgf(params, lam, t))


def log_mgf(params: Params, lam: float, t: float) -> float:
    if isinstance(params, OrnsteinUhlenbeckParams):
        return ou_log_mgf(params, lam, t)
    return wb_log_mgf(params, lam, t)


def cumulants(params: Params, t: float) -> CumulantPair:
    """Mean and variance of the log-price; the law is Gaussian, so these determine it."""
    d = law(params, t)
    return CumulantPair(d.mean, d.variance)


def short_time_cumulant_gap(
    wb: WienerBachelierParams, ou: OrnsteinUhlenbeckParams, lam: float, t: float
) -> float:
    """``ln Phi_ou(lam) - ln Phi_wb(lam)`` for models sharing ``r`` and ``sigma``.

    For small ``t`` this behaves like
    ``((q-1) r + sigma**2 (lam-1) (q-1/2)) * lam * t``.
    """
    if wb.rate != ou.rate or wb.sigma != ou.sigma:
        raise DomainError("both parameter sets must share rate and sigma")
    _check_t(t, strict=False)
    r, s2, q = ou.rate, ou.sigma**2, ou.q
    # Subtract term by term so the O(t) parts cancel before rounding.
    drift_gap = lam * r * (q - 1.0) * t
    spread_gap = 0.5 * lam * (lam - 1.0) * s2 * (one_minus_exp_neg2(q * t) - t)
    return drift_gap + spread_gap


def short_time_gap_slope(ou: OrnsteinUhlenbeckParams, lam: float) -> float:
    """Linear-in-``t`` coefficient of :func:`short_time_cumulant_gap`."""
    r, s2, q = ou.rate, ou.sigma**2, ou.q
    return ((q - 1.0) * r + s2 * (lam - 1.0) * (q - 0.5)) * lam

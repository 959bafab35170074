"""European call pricing: closed forms and an adaptive-quadrature oracle."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from statistics import NormalDist

import numpy as np
from scipy import integrate

from .core import (
    MAX_QT,
    Model,
    OrnsteinUhlenbeckParams,
    Params,
    WienerBachelierParams,
    law,
    ou_density,
    wb_density,
)
from .errors import DomainError, NumericalFailure, RangeError

_SQRT1_2 = 1.0 / math.sqrt(2.0)
TAIL_SDS = 12.0


class Method(str, Enum):
    CLOSED = "closed"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class OptionSpec:
    spot: float
    strike: float
    maturity: float

    def __post_init__(self):
        if not (math.isfinite(self.spot) and self.spot > 0):
            raise DomainError(f"spot must be positive, got {self.spot}")
        if not (math.isfinite(self.strike) and self.strike >= 0):
            raise DomainError(f"strike must be non-negative, got {self.strike}")
        if not (math.isfinite(self.maturity) and self.maturity >= 0):
            raise DomainError(f"maturity must be non-negative, got {self.maturity}")


@dataclass(frozen=True)
class PriceResult:
    value: float
    method: Method
    stderr: float | None = None
    error_estimate: float | None = field(default=None, compare=False)

    def confidence_interval(self, level: float = 0.99) -> tuple[float, float]:
        """Normal-approximation interval; only defined for Monte Carlo results."""
        if self.stderr is None:
            raise ValueError(f"{self.method.value} prices carry no standard error")
        half = NormalDist().inv_cdf(0.5 + 0.5 * level) * self.stderr
        return self.value - half, self.value + half


def std_normal_cdf(z: float) -> float:
    """Standard normal CDF through ``erfc``, which keeps full accuracy in both tails."""
    return 0.5 * math.erfc(-z * _SQRT1_2)


def discount_factor(params: Params, maturity: float) -> float:
    """``exp(-r T)`` for Wiener-Bachelier, ``exp(-r q T)`` for OU."""
    if isinstance(params, OrnsteinUhlenbeckParams):
        return math.exp(-params.rate * params.q * maturity)
    return math.exp(-params.rate * maturity)


def _edge_case(params: Params, opt: OptionSpec) -> PriceResult | None:
    if opt.maturity == 0:
        return PriceResult(max(opt.spot - opt.strike, 0.0), Method.CLOSED)
    if opt.strike == 0:
        # discounted E[S_T] is S_0 under both calibrations
        return PriceResult(opt.spot, Method.CLOSED)
    return None


def price_call_bs(params: WienerBachelierParams, opt: OptionSpec) -> PriceResult:
    edge = _edge_case(params, opt)
    if edge is not None:
        return edge
    S0, K, T = opt.spot, opt.strike, opt.maturity
    r, sigma = params.rate, params.sigma
    vol = sigma * math.sqrt(T)
    b = math.log(S0 / K)
    d1 = (b + (r + 0.5 * sigma**2) * T) / vol
    d2 = (b + (r - 0.5 * sigma**2) * T) / vol
    value = S0 * std_normal_cdf(d1) - K * math.exp(-r * T) * std_normal_cdf(d2)
    return PriceResult(max(value, 0.0), Method.CLOSED)


def price_call_ou(params: OrnsteinUhlenbeckParams, opt: OptionSpec) -> PriceResult:
    """Closed-form call under the recentred OU law.

    Both arguments of N(.) are divided through by ``exp(qT)``, which leaves
    ``sigma**2 exp(-qT) sinh(qT) = v/2`` and ``sigma sqrt(2 exp(-qT) sinh(qT)) = sqrt(v)``
    with ``v`` the terminal log-price variance.
    """
    edge = _edge_case(params, opt)
    if edge is not None:
        return edge
    S0, K, T = opt.spot, opt.strike, opt.maturity
    qT = params.q * T
    if qT > MAX_QT:
        raise RangeError(f"q*T = {qT} exceeds {MAX_QT}")
    v = law(params, T).variance
    sqrt_v = math.sqrt(v)
    centre = params.rate * qT + math.log(S0 / K)
    d1 = (centre + 0.5 * v) / sqrt_v
    d2 = (centre - 0.5 * v) / sqrt_v
    value = S0 * std_normal_cdf(d1) - math.exp(-params.rate * qT) * K * std_normal_cdf(d2)
    return PriceResult(max(value, 0.0), Method.CLOSED)


def price_call(params: Params, opt: OptionSpec) -> PriceResult:
    if isinstance(params, OrnsteinUhlenbeckParams):
        return price_call_ou(params, opt)
    return price_call_bs(params, opt)


def price_call_quadrature(
    params: Params, opt: OptionSpec, tolerance: float = 1e-10, rel_tolerance: float = 0.0
) -> PriceResult:
    """Discounted expected payoff integrated against the model density.

    The integration window starts at the exercise boundary ``ln(K/S0)`` (or
    the lower Gaussian tail when that is further out) and ends twelve
    standard deviations past the later of that start and ``m + v``, the peak
    of the ``e^x``-tilted density.  Anchoring the end to the start keeps
    deep out-of-the-money prices resolved in relative terms.  Both discarded
    tails are bounded analytically and charged to the error budget.

    The result is accepted when its error estimate is at most
    ``max(tolerance, rel_tolerance * value)``; pass a tiny ``tolerance`` with
    a positive ``rel_tolerance`` to price far-out-of-the-money calls to a
    fixed number of significant digits.
    """
    if not tolerance > 0:
        raise DomainError(f"tolerance must be positive, got {tolerance}")
    if not 0 <= rel_tolerance < 1:
        raise DomainError(f"rel_tolerance must lie in [0, 1), got {rel_tolerance}")
    if opt.maturity <= 0:
        raise DomainError("quadrature pricing needs maturity > 0")
    S0, K, T = opt.spot, opt.strike, opt.maturity
    d = law(params, T)
    m, v, sd = d.mean, d.variance, d.std
    density = ou_density if isinstance(params, OrnsteinUhlenbeckParams) else wb_density
    disc = discount_factor(params, T)

    def integrand(x):
        return (S0 * math.exp(x) - K) * density(params, x, T)

    window_lo = m - TAIL_SDS * sd
    # S0 e^x f(x) integrates to S0 e^{m+v/2} times a normal probability
    tilted_mass = S0 * math.exp(m + 0.5 * v)
    exercise = math.log(K / S0) if K > 0 else -math.inf
    if exercise >= window_lo:
        lo, lower_tail = exercise, 0.0
    else:
        lo = window_lo
        lower_tail = tilted_mass * std_normal_cdf(-TAIL_SDS - sd)
    hi = max(lo, m + v) + TAIL_SDS * sd
    upper_tail = tilted_mass * std_normal_cdf(-(hi - m - v) / sd)

    breaks = [p for p in (m, m + v) if lo < p < hi]
    value, quad_err, *info = integrate.quad(
        integrand, lo, hi, points=breaks or None, epsabs=0.1 * tolerance / disc,
        epsrel=max(1e-13, 0.1 * rel_tolerance), limit=500, full_output=1,
    )
    value = max(disc * value, 0.0)
    err = disc * (quad_err + upper_tail + lower_tail)
    budget = max(tolerance, rel_tolerance * value)
    if not math.isfinite(value) or err > budget:
        raise NumericalFailure(
            f"quadrature reached error {err:.3e}, above tolerance {budget:.3e}",
            error_estimate=err,
        )
    return PriceResult(value, Method.QUADRATURE, error_estimate=err)


@dataclass(frozen=True)
class CompareCurve:
    """Samples of ``ln c_ou - ln c_wb`` against moneyness ``b = ln(S0/K)``."""

    b: np.ndarray
    gap: np.ndarray
    maturity: float
    convention: str = "K=1, S0=exp(b)"

    def rows(self):
        return list(zip(self.b.tolist(), self.gap.tolist()))


def _log_price_gap(wb: WienerBachelierParams, ou: OrnsteinUhlenbeckParams, b: float, T: float) -> float:
    opt = OptionSpec(math.exp(b), 1.0, T)
    c = price_call_bs(wb, opt).value
    cq = price_call_ou(ou, opt).value
    if not (c > 0 and cq > 0):
        raise NumericalFailure(f"non-positive price at b={b!r}: c={c!r}, c_q={cq!r}")
    return math.log(cq) - math.log(c)


def compare_curve(
    wb: WienerBachelierParams,
    ou: OrnsteinUhlenbeckParams,
    maturity: float,
    b_range: tuple[float, float],
    n: int,
    workers: int = 1,
) -> CompareCurve:
    """Evaluate ``ln c_q - ln c`` on ``n`` evenly spaced moneyness values.

    The strike is held at 1 and the spot set to ``exp(b)``.  Each sample is
    independent, so ``workers > 1`` gives the same numbers as a serial run.
    """
    if wb.rate != ou.rate or wb.sigma != ou.sigma:
        raise DomainError("both parameter sets must share rate and sigma")
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    if not maturity > 0:
        raise DomainError(f"maturity must be positive, got {maturity}")
    b_min, b_max = b_range
    if not b_min < b_max:
        raise DomainError(f"empty moneyness range {b_range}")
    bs = np.linspace(b_min, b_max, n)

    def one(b):
        return _log_price_gap(wb, ou, float(b), maturity)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(one, bs))
    else:
        gaps = [one(b) for b in bs]
    return CompareCurve(bs, np.array(gaps), maturity)


__all__ = [
    "CompareCurve",
    "Method",
    "Model",
    "OptionSpec",
    "PriceResult",
    "compare_curve",
    "discount_factor",
    "price_call",
    "price_call_bs",
    "price_call_ou",
    "price_call_quadrature",
    "std_normal_cdf",
]

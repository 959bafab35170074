"""Path samplers, a Monte Carlo call pricer, and an AR(1) calibrator for the OU model.

Random numbers come from counter-based Philox streams.  Paths are grouped in
fixed blocks of ``BLOCK_PATHS``; block ``j`` under seed ``s`` always draws
from the Philox key ``(j << 64) | s``.  A path's noise therefore depends only
on the seed, its index and the step count, never on how many workers ran or
how many other paths were requested.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Model,
    OrnsteinUhlenbeckParams,
    Params,
    WienerBachelierParams,
    law,
    one_minus_exp_neg2,
    ou_calibrate_x0,
)
from .errors import ConfigError, EstimationError
from .pricing import Method, OptionSpec, PriceResult, discount_factor

BLOCK_PATHS = 4096
_SEED_MASK = (1 << 64) - 1
# Dickey-Fuller 5% critical value, regression without intercept, large sample.
DF_CRITICAL_5PCT = -1.95


class Scheme(str, Enum):
    EXACT = "exact"
    EULER = "euler"


@dataclass(frozen=True)
class SimConfig:
    paths: int
    steps: int
    horizon: float
    seed: int = 0
    scheme: Scheme = Scheme.EXACT

    def __post_init__(self):
        if int(self.paths) != self.paths or self.paths < 1:
            raise ConfigError(f"paths must be a positive integer, got {self.paths}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError(f"steps must be a positive integer, got {self.steps}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if not 0 <= self.seed <= _SEED_MASK:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def times(self) -> np.ndarray:
        t = np.arange(self.steps + 1, dtype=float) * self.dt
        t[-1] = self.horizon
        return t


@dataclass(frozen=True)
class PathBatch:
    """Log-price paths, one row per path, ``steps + 1`` columns."""

    values: np.ndarray
    times: np.ndarray
    model: Model
    params: Params
    seed: int
    scheme: Scheme

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    def to_csv(self, path) -> None:
        """Write ``t,path_0,...`` with one row per time node, atomically."""
        header = ["t"] + [f"path_{i}" for i in range(self.values.shape[0])]
        table = np.column_stack([self.times, self.values.T])
        write_csv_atomic(path, header, table)


def write_csv_atomic(path, header, rows) -> None:
    """Write a CSV of floats in round-trippable ``%.17g`` through temp-then-rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow(["%.17g" % v for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def block_normals(seed: int, block: int, rows: int, cols: int) -> np.ndarray:
    """Standard normals for one path block; row ``i`` belongs to path ``block*BLOCK_PATHS + i``."""
    bitgen = np.random.Philox(key=(block << 64) | (seed & _SEED_MASK))
    return np.random.Generator(bitgen).standard_normal((rows, cols))


def standard_normals(seed: int, paths: int, cols: int, workers: int = 1) -> np.ndarray:
    """A ``paths x cols`` array of normals assembled from per-block streams."""
    out = np.empty((paths, cols))

    def fill(block):
        start = block * BLOCK_PATHS
        stop = min(start + BLOCK_PATHS, paths)
        out[start:stop] = block_normals(seed, block, stop - start, cols)

    blocks = range(-(-paths // BLOCK_PATHS))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for b in blocks:
            fill(b)
    return out


def _noise(cfg: SimConfig, cols: int, noise, workers: int) -> np.ndarray:
    if noise is None:
        return standard_normals(cfg.seed, cfg.paths, cols, workers)
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (cfg.paths, cols):
        raise ConfigError(f"noise must have shape {(cfg.paths, cols)}, got {noise.shape}")
    return noise


def simulate_gbm_log(
    params: WienerBachelierParams, x0: float, cfg: SimConfig, noise=None, workers: int = 1
) -> PathBatch:
    """Log-price paths of geometric Brownian motion with drift ``r - sigma**2/2``.

    The Gaussian increment recursion is exact for this model, so both schemes
    produce the same paths.  ``noise`` replaces the random draws when given
    (shape ``paths x steps``).
    """
    z = _noise(cfg, cfg.steps, noise, workers)
    dt = cfg.dt
    incr = (params.rate - 0.5 * params.sigma**2) * dt + params.sigma * math.sqrt(dt) * z
    values = np.empty((cfg.paths, cfg.steps + 1))
    values[:, 0] = x0
    np.cumsum(incr, axis=1, out=values[:, 1:])
    values[:, 1:] += x0
    return PathBatch(values, cfg.times(), Model.WB, params, cfg.seed, cfg.scheme)


def _check_euler(params: OrnsteinUhlenbeckParams, cfg: SimConfig) -> None:
    if cfg.scheme is Scheme.EULER and params.q * cfg.dt >= 1:
        raise ConfigError(f"euler scheme unstable: q*dt = {params.q * cfg.dt:.6g} >= 1")


def simulate_ou_log(
    params: OrnsteinUhlenbeckParams, x0: float, cfg: SimConfig, noise=None, workers: int = 1
) -> PathBatch:
    """Paths of ``dX = sigma sqrt(2q) dB - q X dt`` started at ``x0``.

    The exact scheme steps with the Fokker-Planck transition law; the Euler
    scheme uses the first-order Maruyama update and refuses ``q*dt >= 1``.
    """
    _check_euler(params, cfg)
    z = _noise(cfg, cfg.steps, noise, workers)
    dt, q, sigma = cfg.dt, params.q, params.sigma
    if cfg.scheme is Scheme.EXACT:
        a = math.exp(-q * dt)
        scale = sigma * math.sqrt(one_minus_exp_neg2(q * dt))
    else:
        a = 1.0 - q * dt
        scale = sigma * math.sqrt(2.0 * q * dt)
    values = np.empty((cfg.paths, cfg.steps + 1))
    values[:, 0] = x0
    for k in range(cfg.steps):
        values[:, k + 1] = a * values[:, k] + scale * z[:, k]
    return PathBatch(values, cfg.times(), Model.OU, params, cfg.seed, cfg.scheme)


def simulate(params: Params, x0: float, cfg: SimConfig, noise=None, workers: int = 1) -> PathBatch:
    if isinstance(params, OrnsteinUhlenbeckParams):
        return simulate_ou_log(params, x0, cfg, noise, workers)
    return simulate_gbm_log(params, x0, cfg, noise, workers)


def terminal_log_returns(params: Params, cfg: SimConfig, workers: int = 1) -> np.ndarray:
    """Risk-neutral log-returns ``ln(S_T/S_0)`` at ``cfg.horizon``.

    The exact scheme takes one draw per path from the time-T law.  The Euler
    scheme walks ``cfg.steps`` steps; for OU it starts from the calibrated
    ``x0(T)`` so the continuous-time limit is the same law.
    """
    T = cfg.horizon
    if cfg.scheme is Scheme.EXACT:
        d = law(params, T)
        z = standard_normals(cfg.seed, cfg.paths, 1, workers)[:, 0]
        return d.mean + d.std * z
    if isinstance(params, OrnsteinUhlenbeckParams):
        _check_euler(params, cfg)
        start = ou_calibrate_x0(params, T)
    else:
        start = 0.0
    return simulate(params, start, cfg, workers=workers).terminal


def mc_price_call(params: Params, opt: OptionSpec, cfg: SimConfig, workers: int = 1) -> PriceResult:
    """Plain Monte Carlo estimate of the discounted call payoff with its standard error."""
    if not math.isclose(cfg.horizon, opt.maturity, rel_tol=1e-12):
        raise ConfigError(f"config horizon {cfg.horizon} differs from maturity {opt.maturity}")
    x = terminal_log_returns(params, cfg, workers)
    disc = discount_factor(params, opt.maturity)
    payoff = disc * np.maximum(opt.spot * np.exp(x) - opt.strike, 0.0)
    n = payoff.size
    stderr = float(payoff.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return PriceResult(float(payoff.mean()), Method.MONTE_CARLO, stderr=stderr)


@dataclass(frozen=True)
class AR1Fit:
    slope: float
    mean_square: float
    residual_variance: float
    slope_stderr: float
    df_statistic: float
    n: int


def fit_ar1(log_prices) -> AR1Fit:
    """Least-squares fit of ``x[k+1] = a x[k] + eps`` without intercept."""
    x = np.asarray(log_prices, dtype=float).ravel()
    if x.size < 3:
        raise EstimationError(f"need at least 3 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise EstimationError("series contains non-finite values")
    prev, nxt = x[:-1], x[1:]
    sxx = float(prev @ prev)
    if sxx == 0:
        raise EstimationError("series is identically zero")
    a = float(prev @ nxt) / sxx
    resid = nxt - a * prev
    n = prev.size
    v = float(resid @ resid) / (n - 1)
    se = math.sqrt(v / sxx)
    df = (a - 1.0) / se if se > 0 else (0.0 if a == 1.0 else -math.inf)
    return AR1Fit(a, sxx / n, v, se, df, n)


def calibrate_ou(log_prices, dt: float, rate: float = 0.0) -> OrnsteinUhlenbeckParams:
    """Recover ``q`` and ``sigma`` from an evenly sampled log-price series.

    Uses the exact discretisation ``a = exp(-q dt)`` and
    ``Var(eps) = sigma**2 (1 - a**2)``.  The rate is not identified by a
    single path and is passed through.  Series whose slope is not clearly
    inside (0, 1) are rejected, including those where a unit root cannot be
    ruled out at the 5% Dickey-Fuller level.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise EstimationError(f"dt must be positive, got {dt}")
    fit = fit_ar1(log_prices)
    a = fit.slope
    if not 0 < a < 1:
        raise EstimationError(f"fitted AR(1) slope {a:.6g} is outside (0, 1)")
    # innovations at round-off level relative to the series scale
    if fit.residual_variance <= 1e-24 * fit.mean_square:
        raise EstimationError("series has no innovation variance")
    if fit.df_statistic > DF_CRITICAL_5PCT:
        raise EstimationError(
            f"unit root not rejected (Dickey-Fuller statistic {fit.df_statistic:.3f})"
        )
    q = -math.log(a) / dt
    sigma = math.sqrt(fit.residual_variance / (1.0 - a * a))
    return OrnsteinUhlenbeckParams(rate, sigma, q)

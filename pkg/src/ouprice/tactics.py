"""Grid discretisation of the Gaussian tactic kernel.

The kernel

    R(y, y') = exp(-(y**2 - y'**2) / (2 s) - (e^{-g} y - y')**2 / (s (1 - e^{-2g})))
               / sqrt(pi s (1 - e^{-2g}))

with ``g = gamma`` and ``s = sigma_r`` leaves the Gaussian
``exp(-y**2 / (2 s))`` invariant.  Multiplying by ``exp(-(y'**2 - y**2) / (2 s))``
turns it into the OU transition density in ``y'`` with ``sigma**2 = s/2``,
``q t = g`` and start point ``y``.

Integrals over ``y'`` use composite Simpson weights (a 3/8 panel closes an odd
interval count) and numpy's pairwise summation along each row, so every node
is evaluated in the same order regardless of how the work is split.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import OrnsteinUhlenbeckParams, one_minus_exp_neg2, ou_transition_density
from .errors import DomainError
from .simulation import write_csv_atomic

BOUNDARY_RATIO = 1e-12
FIXED_POINT_TOL = 1e-6
SEMIGROUP_TOL = 1e-5
HTRANSFORM_TOL = 1e-10


@dataclass(frozen=True)
class KernelGrid:
    y_min: float
    y_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.y_min) and math.isfinite(self.y_max) and self.y_min < self.y_max):
            raise DomainError(f"need y_min < y_max, got [{self.y_min}, {self.y_max}]")
        if int(self.n) != self.n or self.n < 16:
            raise DomainError(f"grid needs at least 16 nodes, got {self.n}")

    @classmethod
    def symmetric(cls, sigma_r: float, n: int = 1024, span: float = 10.0) -> "KernelGrid":
        """Grid on ``+-span * sqrt(sigma_r / 2)``, i.e. ``span`` ground-state deviations."""
        half = span * math.sqrt(0.5 * sigma_r)
        return cls(-half, half, n)

    @property
    def h(self) -> float:
        return (self.y_max - self.y_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n)

    def weights(self) -> np.ndarray:
        return simpson_weights(self.n, self.h)


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` equally spaced nodes (``n >= 4``)."""
    if n < 4:
        raise DomainError("Simpson weights need at least 4 nodes")
    w = np.zeros(n)
    intervals = n - 1
    m = intervals if intervals % 2 == 0 else intervals - 3
    if m:
        w[0:m + 1:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m] -= 1.0
        w[: m + 1] *= h / 3.0
    if intervals % 2:
        w[m:] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


@dataclass(frozen=True)
class StrategyFunction:
    grid: KernelGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("strategy values must be finite")
        object.__setattr__(self, "values", v)

    def to_csv(self, path) -> None:
        write_csv_atomic(path, ["y", "value"], np.column_stack([self.grid.nodes, self.values]))

    @classmethod
    def from_csv(cls, path) -> "StrategyFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["y", "value"]:
            raise DomainError(f"{path}: expected header 'y,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        y = data[:, 0]
        grid = KernelGrid(float(y[0]), float(y[-1]), len(y))
        if not np.allclose(y, grid.nodes, rtol=0, atol=1e-9 * grid.h):
            raise DomainError(f"{path}: y column is not uniformly spaced")
        return cls(grid, data[:, 1])


@dataclass(frozen=True)
class TacticParams:
    gamma: float
    sigma_r: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not (math.isfinite(self.sigma_r) and self.sigma_r > 0):
            raise DomainError(f"sigma_r must be > 0, got {self.sigma_r}")

    def as_ou(self) -> OrnsteinUhlenbeckParams:
        """OU parameters whose transition density matches the h-transformed kernel at ``t = 1``."""
        return OrnsteinUhlenbeckParams(0.0, math.sqrt(0.5 * self.sigma_r), self.gamma)


def _spread(p: TacticParams) -> float:
    if p.gamma == 0:
        raise DomainError("gamma = 0 collapses the kernel to a point mass")
    return p.sigma_r * one_minus_exp_neg2(p.gamma)


def kernel_value(p: TacticParams, y, y_prime):
    spread = _spread(p)
    y = np.asarray(y, dtype=float)
    yp = np.asarray(y_prime, dtype=float)
    expo = -(y * y - yp * yp) / (2.0 * p.sigma_r) - (math.exp(-p.gamma) * y - yp) ** 2 / spread
    out = np.exp(expo) / math.sqrt(math.pi * spread)
    return float(out) if out.ndim == 0 else out


def htransform_kernel(p: TacticParams, y, y_prime):
    """Kernel conjugated by the ground state; a probability density in ``y_prime``."""
    y = np.asarray(y, dtype=float)
    yp = np.asarray(y_prime, dtype=float)
    out = kernel_value(p, y, yp) * np.exp(-(yp * yp - y * y) / (2.0 * p.sigma_r))
    return float(out) if np.ndim(out) == 0 else out


def kernel_matrix(p: TacticParams, grid: KernelGrid) -> np.ndarray:
    y = grid.nodes
    return kernel_value(p, y[:, None], y[None, :])


def ground_state(grid: KernelGrid, sigma_r: float) -> StrategyFunction:
    y = grid.nodes
    return StrategyFunction(grid, np.exp(-y * y / (2.0 * sigma_r)))


def first_excited(grid: KernelGrid, sigma_r: float) -> StrategyFunction:
    y = grid.nodes
    return StrategyFunction(grid, y * np.exp(-y * y / (2.0 * sigma_r)))


def _check_boundary(psi: StrategyFunction) -> None:
    # Compared on |psi|**2, the density whose tail mass the grid must cover.
    v = psi.values**2
    peak = v.max()
    limit = BOUNDARY_RATIO * peak
    for side, idx in (("lower", 0), ("upper", -1)):
        if v[idx] > limit:
            raise DomainError(
                f"{side} boundary y={psi.grid.nodes[idx]:.6g} carries |psi|^2 = {v[idx]:.3e}, "
                f"above {BOUNDARY_RATIO:g} of the maximum; widen the grid"
            )


def apply_tactic(p: TacticParams, psi: StrategyFunction, adjoint: bool = False) -> StrategyFunction:
    """``(R psi)(y) = int R(y, y') psi(y') dy'`` at every grid node.

    With ``adjoint=True`` the kernel acts in the other argument,
    ``int R(y', y) psi(y') dy'``.
    """
    _check_boundary(psi)
    K = kernel_matrix(p, psi.grid)
    if adjoint:
        K = K.T
    weighted = psi.grid.weights() * psi.values
    return StrategyFunction(psi.grid, (K * weighted[None, :]).sum(axis=1))


def check_semigroup(p1: TacticParams, p2: TacticParams, psi: StrategyFunction) -> float:
    """Max-norm of ``R_{g1} R_{g2} psi - R_{g1+g2} psi``."""
    if p1.sigma_r != p2.sigma_r:
        raise DomainError("both tactics must share sigma_r")
    for p in (p1, p2):
        _spread(p)
    composed = apply_tactic(p1, apply_tactic(p2, psi))
    direct = apply_tactic(TacticParams(p1.gamma + p2.gamma, p1.sigma_r), psi)
    return float(np.max(np.abs(composed.values - direct.values)))


def fixed_point_residual(p: TacticParams, grid: KernelGrid) -> float:
    psi = ground_state(grid, p.sigma_r)
    out = apply_tactic(p, psi)
    return float(np.max(np.abs(out.values - psi.values)) / np.max(np.abs(psi.values)))


def htransform_deviation(p: TacticParams, grid: KernelGrid) -> float:
    """Largest pointwise gap between the h-transformed kernel and the OU transition density."""
    y = grid.nodes
    t_kernel = htransform_kernel(p, y[:, None], y[None, :])
    fp = ou_transition_density(p.as_ou(), y[None, :], y[:, None], 1.0)
    return float(np.max(np.abs(t_kernel - fp)))


@dataclass(frozen=True)
class TacticReport:
    fixed_point: float
    semigroup: float
    htransform: float

    def breaches(self) -> list[str]:
        out = []
        if not self.fixed_point <= FIXED_POINT_TOL:
            out.append(f"fixed_point {self.fixed_point:.3e} > {FIXED_POINT_TOL:g}")
        if not self.semigroup <= SEMIGROUP_TOL:
            out.append(f"semigroup {self.semigroup:.3e} > {SEMIGROUP_TOL:g}")
        if not self.htransform <= HTRANSFORM_TOL:
            out.append(f"htransform {self.htransform:.3e} > {HTRANSFORM_TOL:g}")
        return out


def diagnose(p: TacticParams, grid: KernelGrid) -> TacticReport:
    """Fixed-point, semigroup (gamma split in half, first excited mode) and h-transform checks."""
    half = TacticParams(0.5 * p.gamma, p.sigma_r)
    semigroup = check_semigroup(half, half, first_excited(grid, p.sigma_r))
    return TacticReport(fixed_point_residual(p, grid), semigroup, htransform_deviation(p, grid))

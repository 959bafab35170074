"""European call pricing under Wiener-Bachelier and Ornstein-Uhlenbeck log-price dynamics."""

from .core import (
    Model,
    OrnsteinUhlenbeckParams,
    WienerBachelierParams,
    cumulants,
    law,
    log_mgf,
    ou_calibrate_x0,
    ou_density,
    ou_transition_density,
    wb_density,
)
from .errors import (
    ConfigError,
    DomainError,
    EstimationError,
    NumericalFailure,
    OUPriceError,
    RangeError,
)
from .pricing import (
    OptionSpec,
    PriceResult,
    compare_curve,
    price_call,
    price_call_bs,
    price_call_ou,
    price_call_quadrature,
)
from .simulation import SimConfig, calibrate_ou, mc_price_call, simulate
from .tactics import KernelGrid, TacticParams, diagnose

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "EstimationError",
    "KernelGrid",
    "Model",
    "NumericalFailure",
    "OUPriceError",
    "OptionSpec",
    "OrnsteinUhlenbeckParams",
    "PriceResult",
    "RangeError",
    "SimConfig",
    "TacticParams",
    "WienerBachelierParams",
    "calibrate_ou",
    "compare_curve",
    "cumulants",
    "diagnose",
    "law",
    "log_mgf",
    "mc_price_call",
    "ou_calibrate_x0",
    "ou_density",
    "ou_transition_density",
    "price_call",
    "price_call_bs",
    "price_call_ou",
    "price_call_quadrature",
    "simulate",
    "wb_density",
]

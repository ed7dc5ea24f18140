"""
Model configuration: architecture, hyperpriors and initial hyperparameters.
"""

from dataclasses import dataclass, field
from typing import Optional

from ..kernels.matern import CovarianceParams
from ..latent.inr import INRConfig
from ..spectral.features import DEFAULT_DF_MULTIPLIER
from ..utils.errors import ParameterError

HYPER_NAMES = ("alpha", "nu", "rho_s", "rho_t", "rho_l", "sigma2", "tau2")


@dataclass
class PriorConfig:
    """
    Hyperpriors. Normal priors act on the log scale and take (mean, variance);
    inverse-gamma priors act on the natural scale and take (shape, scale).
    """

    alpha_shape: float = 1.0
    alpha_scale: float = 0.05
    log_nu_mean: float = 0.5
    log_nu_var: float = 0.5
    log_rho_s_mean: float = -2.0
    log_rho_s_var: float = 1.0
    log_rho_t_mean: float = -1.0
    log_rho_t_var: float = 0.5
    log_rho_l_mean: float = -2.0
    log_rho_l_var: float = 1.0
    sigma2_shape: float = 0.1
    sigma2_scale: float = 0.1
    tau2_shape: float = 0.1
    tau2_scale: float = 0.1

    def __post_init__(self):
        for name, value in vars(self).items():
            if (name.endswith("_var") or name.endswith("_shape") or name.endswith("_scale")) \
                    and value <= 0:
                raise ParameterError(f"{name} must be positive, got {value}")


@dataclass
class HyperInit:
    """
    Centre of the initial hyperparameters; each particle adds N(0, jitter^2)
    on the log scale. alpha defaults to 1 / width of the latent network.
    """

    alpha: Optional[float] = None
    nu: float = 1.5
    rho_s: float = 0.1
    rho_t: float = 0.3
    rho_l: float = 0.2
    sigma2: float = 1.0
    tau2: float = 0.1
    jitter: float = 0.1

    def __post_init__(self):
        for name in HYPER_NAMES:
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ParameterError(f"initial {name} must be positive, got {value}")
        if self.jitter < 0:
            raise ParameterError("jitter must be non-negative")


@dataclass
class ModelConfig:
    """
    Full network configuration.

    Attributes:
        J: Number of random Fourier features
        inr: Latent network architecture; None disables the latent field (p = 0)
        df_multiplier: Frequency-prior degrees of freedom per unit of smoothness
        freeze_frequencies: Keep frequencies at their initial draw
        freeze_hyper: Keep log-hyperparameters at their initial values
        priors: Hyperpriors
        init: Initial hyperparameters
    """

    J: int = 200
    inr: Optional[INRConfig] = field(default_factory=INRConfig)
    df_multiplier: float = DEFAULT_DF_MULTIPLIER
    freeze_frequencies: bool = False
    freeze_hyper: bool = False
    priors: PriorConfig = field(default_factory=PriorConfig)
    init: HyperInit = field(default_factory=HyperInit)

    def __post_init__(self):
        if self.J < 1:
            raise ParameterError(f"J must be at least 1, got {self.J}")
        if self.df_multiplier <= 0:
            raise ParameterError("df_multiplier must be positive")

    @property
    def latent_dim(self) -> int:
        """Latent dimension p (0 when the latent field is disabled)."""
        return 0 if self.inr is None else self.inr.latent_dim

    def initial_params(self) -> CovarianceParams:
        """Covariance parameters at the centre of the initialization."""
        return CovarianceParams(sigma2=self.init.sigma2, tau2=self.init.tau2, nu=self.init.nu,
                                rho_s=self.init.rho_s, rho_t=self.init.rho_t,
                                rho_l=self.init.rho_l)

    def initial_alpha(self) -> float:
        if self.init.alpha is not None:
            return self.init.alpha
        return 1.0 / self.inr.width if self.inr is not None else self.priors.alpha_scale

"""Neural style transfer with Gram-matrix feature statistics and their extensions."""

from .config import MethodConfig, StyleTerm, build_method_config, geometric_weights
from .estimator import StyleTransfer
from .loss import StyleObjective, gradient_mask, total_loss_grad
from .optimize import gd_run, lbfgs_run, strong_wolfe_line_search
from .statistics import GramStatistic, Variant, compute_statistic, statistic_vjp
from .vgg import NetworkWeights, backward_inject, forward_record, toy_network
from .weights_io import load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "GramStatistic", "MethodConfig", "NetworkWeights", "StyleObjective", "StyleTerm",
    "StyleTransfer", "Variant", "backward_inject", "build_method_config", "compute_statistic",
    "forward_record", "gd_run", "geometric_weights", "gradient_mask", "lbfgs_run",
    "load_weights", "save_weights", "statistic_vjp", "strong_wolfe_line_search",
    "toy_network", "total_loss_grad",
]

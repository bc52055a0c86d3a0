"""Kolmogorov–Arnold networks with norm-based complexity instrumentation."""

from .bounds import (BoundInputs, LowRankInputs, covering_bound_basis, covering_bound_kan,
                     cover_radius_composition, dudley_term, lowrank_entropy, maurey_sparsify,
                     rademacher_linear_exact, rademacher_mc_class, slack_excess_cor1, slack_subexp,
                     slack_thm_main, slack_thm_main2, slack_thm_main3)
from .complexity import (ComplexityReport, LayerStats, alpha_tilde, complexity_measure,
                         complexity_report, layer_stats, normalize_series)
from .experiments import (Dataset, ExperimentConfig, f1, f2, load_feature_csv, loss_and_grad,
                          make_dataset, run_dropout_comparison, run_experiment)
from .network import (ForwardTape, KanLayer, KanNetwork, init_network, layer_forward,
                      load_checkpoint, network_backward, network_forward, save_checkpoint, sgd_step)
from .numeric import frobenius_norm, make_rng, sample_standard_normal, spectral_norm
from .spline import EdgeBasis, SplineSpec, basis_derivative, basis_eval, basis_lipschitz

__version__ = "0.1.0"

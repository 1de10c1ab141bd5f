"""Monte Carlo simulator of a spin-pair model of local prices on fractional-dimension rings."""

from .dynamics import (ConfigError, RunRecord, SimConfig, Snapshot, apply_step, dimension_to_mq,
                       run_ensemble, run_sweeps)
from .model import (InteractionOutcome, ModelError, ModelState, NodeState, Spin, Topology,
                    build_topology, effective_dimension, interact, neighbor_weights, select_pair)
from .observables import (Histogram, PowerLawFit, count_domain_walls, exp_transform, excess_kurtosis,
                          find_modes, fit_loglog, peak_price, price_histogram, smooth, variance)

__version__ = "0.1.0"

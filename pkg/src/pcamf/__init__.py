"""Majority-rule probabilistic cellular automata and their mean-field maps."""

from .bounds import Interval, chernov_interval, clt_interval, kl_minus, kl_plus
from .dynamics import (BifurcationDiagram, FixedPoint, bifurcation, critical_point,
                       find_fixed_points, iterate)
from .engine import DensitySeries, PcaState, RuleParams, majority_prob, run, run_many, step
from .graphs import (ConfigurationError, Graph, TopologySpec, build_random, build_smallworld,
                     build_torus, connectivity_threshold, is_connected)
from .markov import TransitionKernel, build_kernel, evolve, stationary
from .meanfield import MeanFieldMap, binom_pmf, mf_derivative, sigma2_for

__version__ = "0.1.0"

"""Conditional Poisson approximation for sums of indicators on finite spaces.

Functions on a finite probability space form the vector lattice; a
partition gives the conditional expectation ``T``.  The package computes
conditional laws of sums of conditionally independent indicators, the Stein
solution ``g(j,H,A)`` and the bounds ``sup h_i`` and ``sup h_i (u - e^{-H})``
on ``|P_T[w ∈ A] - Po(A;H)|``.
"""

from .condexp import (
    CondExp,
    IndependenceReport,
    PartitionSigma,
    apply_T,
    check_averaging,
    check_band_domination,
    conditionally_independent,
    decompose_levels,
    family_conditionally_independent,
    in_range,
    is_conditionally_poisson,
    make_partition,
    trivial_partition,
)
from .errors import *  # noqa: F401,F403
from .lattice import (
    LatticeElement,
    SampleSpace,
    add,
    band_projection,
    exp_neg,
    inf,
    is_component,
    lattice_abs,
    leq,
    make_space,
    multiply,
    partial_inverse,
    scale,
    subtract,
    sup,
    sup_all,
    support_component,
)
from .lsn import (
    BernoulliFamily,
    ConditionalPMF,
    ConvergenceReport,
    DiscrepancyReport,
    build_product_model,
    check_functional_calculus,
    check_independence_shift,
    conditional_pmf,
    conditional_prob,
    g_of,
    lsn_bounds,
    make_family,
    stein_identity_residual,
    truncated_lsn,
    tv_distance,
    verify_lsn,
)
from .models import Model, emit_model, example1, example2, example3, load_model, parse_model, set_battery
from .poisson import NatSet, nu, poisson_measure, poisson_pmf, poisson_tail
from .scalars import FLOAT, RATIONAL, FloatBackend, RationalBackend, get_backend
from .stein import (
    Evaluator,
    SteinConfig,
    check_g_measure,
    delta,
    stein_F,
    stein_g,
    stein_g_singleton,
    stein_g_table,
    stein_hg_singleton,
)

__version__ = "0.1.0"

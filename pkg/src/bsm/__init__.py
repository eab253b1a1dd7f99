"""Bicriteria submodular maximization: balancing average utility and maximin group fairness."""
from .core import (
    EvalState,
    GroupedPopulation,
    GroupUtilityOracle,
    MaximinObjective,
    GroupObjective,
    Solution,
    TruncatedComposite,
    UtilityObjective,
    eval_f,
    eval_falpha,
    eval_g,
    eval_group,
    eval_gtau,
)
from .algorithms import (
    BisectionState,
    BsmParams,
    GreedyTrace,
    bsm_saturate,
    bsm_tsgreedy,
    greedy_max,
    greedy_solution,
    saturate_rsm,
    saturate_solution,
)
from .problems import (
    BenefitMatrix,
    CoverageInstance,
    CoverageOracle,
    Digraph,
    RrSetOracle,
    build_rr_oracle,
    coverage_from_digraph,
    facility_location,
    mc_estimate,
)

__version__ = "0.1.0"

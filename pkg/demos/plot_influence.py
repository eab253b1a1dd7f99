"""
Fair influence maximization under independent cascade
=====================================================

Seeds spread influence along each edge with probability ``p``. The solvers
work on a frozen sample of reverse-reachable sets; reported values come from
a separate Monte-Carlo simulation so they are not biased by the sample the
solver optimized against.
"""
from bsm import BsmParams, bsm_saturate, bsm_tsgreedy, build_rr_oracle, greedy_solution, mc_estimate
from bsm import data

graph, pop = data.gen_sbm(data.SbmConfig(100, [0.2, 0.8], p_intra=0.1, p_inter=0.02, seed=0))
p = 0.1
oracle = build_rr_oracle(graph, p, R=100_000, population=pop, seed=0)
print(f"{graph.n_edges // 2} edges; {oracle.R} RR-sets")

###############################################################################
# Comparing solvers at k = 5, tau = 0.8
# -------------------------------------

k = 5
params = BsmParams(k, tau=0.8)
for sol in (greedy_solution(oracle, k), bsm_tsgreedy(oracle, params), bsm_saturate(oracle, params)):
    f, groups = mc_estimate(graph, p, sol.items, reps=10_000, population=pop, seed=1)
    print(f"{sol.meta['algorithm']:>12}: seeds {sol.items}  "
          f"RR f={sol.f_value:.4f}  MC f={f:.4f}  MC group values {groups.round(4).tolist()}")

"""
Sweeping the balance factor on a two-community graph
====================================================

A stochastic block model with a 20/80 split, dense inside communities and
sparse across them. Each node covers itself and its neighbours. As ``tau``
grows, the solvers trade average coverage for coverage of the minority.
"""
from bsm import BsmParams, UtilityObjective, bsm_saturate, bsm_tsgreedy, coverage_from_digraph, greedy_max, saturate_rsm
from bsm import data

graph, pop = data.gen_sbm(data.SbmConfig(500, [0.2, 0.8], p_intra=0.1, p_inter=0.02, seed=0))
oracle = coverage_from_digraph(graph, pop)
print(f"{graph.n_nodes} nodes, {graph.n_edges // 2} edges, group sizes {pop.sizes.tolist()}")

###############################################################################
# Reference points
# ----------------
# Computing the utility-greedy trace and the Saturate solution once lets every
# sweep point reuse them.

k = 5
trace = greedy_max(oracle, UtilityObjective(pop), k)
robust = saturate_rsm(oracle, k)
print(f"OPT'_f = {trace.value:.4f}   OPT'_g = {robust[1]:.4f}")

###############################################################################
# The sweep
# ---------

print(f"{'tau':>4} | {'tsgreedy f':>10} {'g':>6} {'k_prime':>7} | {'bsm-sat f':>9} {'g':>6} {'alpha_min':>9}")
for i in range(1, 10):
    tau = i / 10
    params = BsmParams(k, tau=tau)
    ts = bsm_tsgreedy(oracle, params, greedy_trace=trace, robust=robust)
    bs = bsm_saturate(oracle, params, greedy_trace=trace, robust=robust)
    print(f"{tau:>4} | {ts.f_value:>10.4f} {ts.g_value:>6.3f} {ts.meta['k_prime']:>7} | "
          f"{bs.f_value:>9.4f} {bs.g_value:>6.3f} {bs.meta['alpha_min']:>9.5f}")

###############################################################################
# The same sweep from the command line writes a plot-ready CSV::
#
#     bsm --problem mc --gen sbm:n=500,props=0.2/0.8,pin=0.1,pout=0.02 \
#         --alg tsgreedy --alg bsm-saturate --sweep tau=0.1:0.9:0.1 --k 5 --out tau.csv

"""
Facility location on Gaussian blobs
===================================

Users come from two Gaussian blobs of unequal size, and every user location is
also a candidate facility. A user's benefit from the chosen facilities is the
best one on offer. With the k-median benefit, ``dbar`` minus the distance, the
small blob is easy to neglect.
"""
import numpy as np

from bsm import BsmParams, bsm_saturate, bsm_tsgreedy, facility_location, greedy_solution
from bsm import data
from bsm.exact import export_ilp_fl

users, items, pop = data.gen_blobs(data.BlobConfig([15, 85], sigma=1.0, dim=5, seed=0))
oracle = facility_location(users, items, "kmedian", pop)
print(f"{pop.m} users, {oracle.n} candidate facilities, dbar = {oracle.meta['dbar']:.3f}")

###############################################################################
# Solutions
# ---------

k = 5
for tau in (0.5, 0.9):
    params = BsmParams(k, tau=tau)
    for sol in (greedy_solution(oracle, k), bsm_tsgreedy(oracle, params), bsm_saturate(oracle, params)):
        small = np.isin(sol.items, pop.members(0)).sum()
        print(f"tau={tau} {sol.meta['algorithm']:>12}: f={sol.f_value:.3f} g={sol.g_value:.3f} "
              f"({small} of {k} facilities in the small blob)")

###############################################################################
# Handing the exact problem to a MIP solver
# -----------------------------------------
# The LP file below can be read by any solver that accepts the CPLEX LP format.

text = export_ilp_fl(oracle, k, mode="robust")
print(f"LP file: {len(text.splitlines())} lines, first rows:")
print("\n".join(text.splitlines()[:4]))

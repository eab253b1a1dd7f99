"""Experiment harness: run the solvers over a sweep of tau, k or eps and write a results table.

Examples::

    bsm --problem mc --gen fig1 --alg tsgreedy --tau 0.8 --k 2
    bsm --problem mc --gen sbm:n=500,props=0.2/0.8,pin=0.1,pout=0.02 \\
        --alg tsgreedy --alg bsm-saturate --sweep tau=0.1:0.9:0.1 --k 5 --out rand.csv
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import data
from .algorithms import BsmParams, bsm_saturate, bsm_tsgreedy, greedy_max, saturate_rsm
from .core import Solution, UtilityObjective
from .exact import brute_force
from .problems import RrSetOracle, build_rr_oracle, coverage_from_digraph, facility_location, mc_estimate

ALGORITHMS = ("greedy", "saturate", "tsgreedy", "bsm-saturate", "brute-force")
PROBLEMS = ("mc", "im", "fl")
AXES = ("tau", "k", "eps")


class SpecError(ValueError):
    """Invalid experiment description (exit code 1)."""


@dataclass
class ExperimentSpec:
    problem: str
    algorithms: list
    k: int = 5
    tau: float = 0.8
    eps: float = 0.05
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)
    graph: str | None = None
    groups: str | None = None
    points: str | None = None
    sets: str | None = None
    gen: str | None = None
    directed: bool = False
    kernel: str = "rbf"
    dbar: float | None = None
    p: float = 0.1
    rr: int = 100_000
    reps: int = 10_000
    seed: int = 0
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise SpecError(f"unknown problem {self.problem!r}; choose from {PROBLEMS}")
        if not self.algorithms:
            raise SpecError("at least one --alg is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise SpecError(f"unknown algorithm {alg!r}; choose from {ALGORITHMS}")
        if self.sweep_axis is not None and self.sweep_axis not in AXES:
            raise SpecError(f"unknown sweep axis {self.sweep_axis!r}; choose from {AXES}")
        for value in self.points_of_sweep():
            try:
                BsmParams(**value)
            except ValueError as exc:
                raise SpecError(f"invalid sweep value: {exc}") from None

    def points_of_sweep(self) -> list:
        base = dict(k=self.k, tau=self.tau, eps=self.eps)
        if self.sweep_axis is None:
            return [base]
        points = []
        for v in self.sweep_values:
            point = dict(base)
            point[self.sweep_axis] = int(v) if self.sweep_axis == "k" else float(v)
            points.append(point)
        return points


# ---------------------------------------------------------------------------
# Instance construction


def _parse_gen(text: str, default_seed: int):
    kind, _, rest = text.partition(":")
    opts = {}
    for part in filter(None, rest.split(",")):
        key, eq, value = part.partition("=")
        if not eq:
            raise SpecError(f"generator option {part!r} is not key=value")
        opts[key.strip()] = value.strip()
    opts.setdefault("seed", str(default_seed))
    return kind, opts


def _floats(text):
    return [float(x) for x in text.split("/")]


@dataclass
class Instance:
    oracle: object
    graph: object = None
    item_ids: list | None = None
    description: str = ""


def build_instance(spec: ExperimentSpec) -> Instance:
    graph = pop = None
    if spec.gen:
        kind, o = _parse_gen(spec.gen, spec.seed)
        try:
            if kind == "fig1":
                oracle = data.figure1_instance()
                return Instance(oracle, item_ids=oracle.item_ids, description="figure-1 coverage")
            if kind == "hard":
                oracle = data.gen_hard_instance(int(o.get("k", 1)), float(o.get("alpha", 0.1)), int(o.get("m", 10)))
                return Instance(oracle, description=f"hard instance {o}")
            if kind == "sbm":
                cfg = data.SbmConfig(int(o.get("n", 500)), _floats(o.get("props", "0.2/0.8")),
                                     float(o.get("pin", 0.1)), float(o.get("pout", 0.02)),
                                     directed=o.get("directed", "0") in ("1", "true"), seed=int(o["seed"]))
                graph, pop = data.gen_sbm(cfg)
            elif kind == "blobs":
                cfg = data.BlobConfig([int(x) for x in o.get("counts", "15/85").split("/")],
                                      sigma=float(o.get("sigma", 1.0)), dim=int(o.get("dim", 5)),
                                      center_box=float(o.get("box", 5.0)), seed=int(o["seed"]))
                users, items, pop = data.gen_blobs(cfg)
            else:
                raise SpecError(f"unknown generator {kind!r}; expected fig1, hard, sbm or blobs")
        except (KeyError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"bad generator spec {spec.gen!r}: {exc}") from None
    else:
        if spec.groups:
            pop = data.load_groups(spec.groups)
        if spec.problem == "fl":
            if not spec.points:
                raise SpecError("facility location needs --points or --gen blobs:...")
            users, pop = data.load_points(spec.points)
            items = users
        elif spec.sets:
            if pop is None:
                raise SpecError("--sets needs --groups")
            oracle = data.load_sets(spec.sets, pop)
            return Instance(oracle, item_ids=oracle.item_ids, description=spec.sets)
        elif spec.graph:
            if pop is None:
                raise SpecError("--graph needs --groups")
            graph = data.load_graph(spec.graph, directed=spec.directed, node_ids=pop.ids)
        else:
            raise SpecError("no instance given: use --graph/--groups, --sets/--groups, --points or --gen")

    if spec.problem == "fl":
        if graph is not None:
            raise SpecError("facility location needs points, not a graph")
        oracle = facility_location(users, items, spec.kernel, pop, dbar=spec.dbar)
        detail = f", dbar={oracle.meta['dbar']:g}" if "dbar" in oracle.meta else ""
        return Instance(oracle, item_ids=pop.ids, description=f"facility location ({spec.kernel}{detail})")
    if graph is None:
        raise SpecError(f"problem {spec.problem!r} needs a graph")
    if spec.problem == "mc":
        return Instance(coverage_from_digraph(graph, pop), graph=graph, item_ids=graph.ids,
                        description="dominating-set coverage")
    oracle = build_rr_oracle(graph, spec.p, spec.rr, pop, seed=spec.seed, workers=spec.workers)
    return Instance(oracle, graph=graph, item_ids=graph.ids, description=f"IC influence, p={spec.p}, R={spec.rr}")


# ---------------------------------------------------------------------------
# Sweeps


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _row_seed(seed: int, index: int, alg_index: int) -> int:
    return int(np.random.SeedSequence([seed, index, alg_index]).generate_state(1)[0])


def _solve(alg, inst: Instance, params: BsmParams, shared):
    oracle = inst.oracle
    trace, robust = shared
    start = time.perf_counter()
    if alg == "greedy":
        sol = Solution.evaluate(oracle, trace.items, algorithm=alg)
    elif alg == "saturate":
        sol = Solution.evaluate(oracle, robust[0], algorithm=alg)
    elif alg == "tsgreedy":
        sol = bsm_tsgreedy(oracle, params, greedy_trace=trace, robust=robust)
    elif alg == "bsm-saturate":
        sol = bsm_saturate(oracle, params, greedy_trace=trace, robust=robust)
    else:
        if isinstance(oracle, RrSetOracle):
            raise ValueError("brute-force is not available for influence maximization")
        res = brute_force(oracle, params.k, params.tau)
        sol = Solution.evaluate(oracle, res.bsm_items, algorithm=alg, opt_f=res.opt_f, opt_g=res.opt_g)
    sol.meta["wall_time"] = time.perf_counter() - start
    return sol


def _run_point(spec: ExperimentSpec, inst: Instance, index: int, point: dict, shared_by_k: dict):
    rows = []
    params = BsmParams(point["k"], point["tau"], point["eps"], seed=spec.seed)
    axis_value = point[spec.sweep_axis] if spec.sweep_axis else None
    c = inst.oracle.population.c
    dbar = getattr(inst.oracle, "meta", {}).get("dbar")
    for a, alg in enumerate(spec.algorithms):
        row = {"axis": spec.sweep_axis or "", "value": axis_value, "algorithm": alg,
               "k": params.k, "tau": params.tau, "eps": params.eps, "dbar": dbar}
        try:
            shared = shared_by_k[params.k]
            if isinstance(shared, Exception):
                raise shared
            trace, robust = shared
            sol = _solve(alg, inst, params, shared)
            if spec.problem == "im":
                f, groups = mc_estimate(inst.graph, spec.p, sol.items, spec.reps, inst.oracle.population,
                                        seed=_row_seed(spec.seed, index, a))
                g = float(groups.min())
            else:
                f, groups, g = sol.f_value, sol.group_values, sol.g_value
            optg = robust[1]
            ids = inst.item_ids
            row.update(
                status="ok", f=float(f), g=float(g),
                groups=[float(x) for x in groups],
                items=[ids[v] if ids else v for v in sol.items],
                k_prime=sol.meta.get("k_prime"),
                alpha_min=sol.meta.get("alpha_min"), alpha_max=sol.meta.get("alpha_max"),
                opt_f=trace.value, opt_g=optg, tau_opt_g=params.tau * optg,
                wall_ms=1000.0 * sol.meta["wall_time"] if spec.timing else None,
                evaluations=sol.meta.get("evaluations"), error="",
            )
        except Exception as exc:  # failures are recorded per row
            row.update(status="failed", f=None, g=None, groups=[None] * c, items=[], k_prime=None,
                       alpha_min=None, alpha_max=None, opt_f=None, opt_g=None, tau_opt_g=None,
                       wall_ms=None, evaluations=None, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def _shared(oracle, k):
    try:
        trace = greedy_max(oracle, UtilityObjective(oracle.population), k)
        robust = saturate_rsm(oracle, k)
        return trace, robust
    except Exception as exc:
        return exc


def run_sweep(spec: ExperimentSpec, instance: Instance | None = None) -> list:
    """One row per (sweep value, algorithm), in sweep order."""
    inst = instance or build_instance(spec)
    points = spec.points_of_sweep()
    # OPT'_f and OPT'_g depend only on k, so compute them once per distinct k
    shared_by_k = {k: _shared(inst.oracle, k) for k in sorted({p["k"] for p in points})}
    jobs = [(spec, inst, i, p, shared_by_k) for i, p in enumerate(points)]
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            chunks = list(pool.map(lambda a: _run_point(*a), jobs))
    else:
        chunks = [_run_point(*a) for a in jobs]
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows: list, c: int) -> str:
    header = ["axis", "value", "algorithm", "status", "k", "tau", "eps", "dbar", "f", "g"]
    header += [f"f_{i}" for i in range(c)]
    header += ["items", "k_prime", "alpha_min", "alpha_max", "opt_f", "opt_g", "tau_opt_g",
               "wall_ms", "evaluations", "error"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow(
            [r["axis"], _fmt(r["value"]), r["algorithm"], r["status"], r["k"], _fmt(r["tau"]), _fmt(r["eps"]),
             _fmt(r.get("dbar")), _fmt(r["f"]), _fmt(r["g"])]
            + [_fmt(x) for x in r["groups"]]
            + [" ".join(str(v) for v in r["items"]), _fmt(r["k_prime"]), _fmt(r["alpha_min"]),
               _fmt(r["alpha_max"]), _fmt(r["opt_f"]), _fmt(r["opt_g"]), _fmt(r["tau_opt_g"]),
               _fmt(r["wall_ms"]), _fmt(r["evaluations"]), r["error"]]
        )
    return buf.getvalue()


def rows_to_jsonl(rows: list) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def format_report(rows: list, inst: Instance) -> str:
    """Human-readable summary of single-point results."""
    pop = inst.oracle.population
    out = [f"instance: {inst.description} (n={inst.oracle.n}, m={pop.m}, c={pop.c})"]
    for r in rows:
        out.append("")
        out.append(f"[{r['algorithm']}] k={r['k']} tau={r['tau']:g} eps={r['eps']:g}")
        if r["status"] != "ok":
            out.append(f"  failed: {r['error']}")
            continue
        out.append(f"  items: {' '.join(str(v) for v in r['items'])}")
        out.append(f"  f = {r['f']:.4f}   g = {r['g']:.4f}   OPT'_f = {r['opt_f']:.4f}   OPT'_g = {r['opt_g']:.4f}")
        out.append("  group      size   f_i")
        for i, value in enumerate(r["groups"]):
            out.append(f"  {pop.labels[i]:<10} {pop.sizes[i]:>5}   {value:.4f}")
        if r["alpha_min"] is not None:
            out.append(f"  alpha_min = {r['alpha_min']:g}   alpha_max = {r['alpha_max']:g}")
        if r["k_prime"] is not None:
            out.append(f"  k' = {r['k_prime']}")
        out.append("  " + verdict(r["g"], r["tau"], r["opt_g"]))
    return "\n".join(out) + "\n"


def verdict(g: float, tau: float, optg: float) -> str:
    if tau == 0:
        return "constraint vacuous (tau=0)"
    bound = tau * optg
    if g >= bound - 1e-9:
        return f"satisfied: g={g:.4f} ≥ {bound:.4f}"
    return f"violated: g={g:.4f} < {bound:.4f}"


def run_single(spec: ExperimentSpec, instance: Instance | None = None):
    """Run every algorithm once at the fixed parameters; returns ``(rows, report)``."""
    inst = instance or build_instance(spec)
    single = ExperimentSpec(**{**spec.__dict__, "sweep_axis": None, "sweep_values": []})
    rows = run_sweep(single, inst)
    return rows, format_report(rows, inst)


# ---------------------------------------------------------------------------
# Command line


def parse_sweep(text: str):
    axis, eq, values = text.partition("=")
    axis = axis.strip()
    if not eq or axis not in AXES:
        raise SpecError(f"--sweep must look like tau=0.1:0.9:0.1, k=5:50:5 or eps=0.05,0.1; got {text!r}")
    if ":" in values:
        try:
            lo, hi, step = (float(x) for x in values.split(":"))
        except ValueError:
            raise SpecError(f"bad sweep range {values!r}") from None
        if step <= 0:
            raise SpecError("sweep step must be positive")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        grid = [round(lo + i * step, 10) for i in range(count)]
    else:
        grid = [float(x) for x in values.split(",") if x.strip()]
    if axis == "k":
        grid = [int(round(v)) for v in grid]
    return axis, grid


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bsm", description="Bicriteria submodular maximization experiments.")
    ap.add_argument("--problem", choices=PROBLEMS, default="mc")
    src = ap.add_argument_group("instance")
    src.add_argument("--graph", help="edge list, src<TAB>dst per line")
    src.add_argument("--groups", help="node_id<TAB>group_label per line")
    src.add_argument("--points", help="CSV id,group,x1..xd (facility location)")
    src.add_argument("--sets", help="set system item_id<TAB>user_id per line (maximum coverage)")
    src.add_argument("--gen", help="generator: fig1 | hard:k=,alpha=,m= | sbm:n=,props=a/b,pin=,pout= | blobs:counts=a/b,dim=,sigma=")
    src.add_argument("--directed", action="store_true", help="treat --graph as directed")
    src.add_argument("--kernel", choices=("rbf", "kmedian"), default="rbf")
    src.add_argument("--dbar", type=float, help="k-median normalisation distance")
    ap.add_argument("--alg", action="append", choices=ALGORITHMS, help="repeatable")
    ap.add_argument("--sweep", help="tau=0.1:0.9:0.1 | k=5:50:5 | eps=0.05,0.1,...")
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--tau", type=float, default=0.8)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--p", type=float, default=0.1, help="IC edge probability")
    ap.add_argument("--rr", type=int, default=100_000, help="RR-set sample count")
    ap.add_argument("--reps", type=int, default=10_000, help="Monte-Carlo replications for evaluation")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for byte-reproducible output")
    ap.add_argument("--out", help="output file (default: stdout for sweeps)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv", help="csv or JSON lines")
    return ap


def spec_from_args(args) -> ExperimentSpec:
    axis, values = (None, [])
    if args.sweep:
        axis, values = parse_sweep(args.sweep)
    return ExperimentSpec(
        problem=args.problem, algorithms=args.alg or ["tsgreedy", "bsm-saturate"], k=args.k, tau=args.tau,
        eps=args.eps, sweep_axis=axis, sweep_values=values, graph=args.graph, groups=args.groups,
        points=args.points, sets=args.sets, gen=args.gen, directed=args.directed, kernel=args.kernel,
        dbar=args.dbar, p=args.p, rr=args.rr, reps=args.reps, seed=args.seed, workers=max(1, args.workers),
        timing=not args.no_timing,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        inst = build_instance(spec)
    except (SpecError, ValueError, OSError) as exc:
        print(f"bsm: error: {exc}", file=sys.stderr)
        return 1
    if spec.sweep_axis is None:
        rows, report = run_single(spec, inst)
        sys.stdout.write(report)
    else:
        rows = run_sweep(spec, inst)
    if args.out or spec.sweep_axis is not None:
        text = rows_to_csv(rows, inst.oracle.population.c) if args.format == "csv" else rows_to_jsonl(rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 2 if any(r["status"] != "ok" for r in rows) else 0


if __name__ == "__main__":
    sys.exit(main())

"""Exact solutions of tiny instances by enumeration, and ILP export in LP-file format."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GroupUtilityOracle
from .problems import BenefitMatrix, CoverageOracle

MAX_SUBSETS = 10**7
LP_MODES = ("utility", "robust", "bsm")


class InstanceTooLarge(ValueError):
    pass


@dataclass
class ExactResult:
    """Optima over all size-``k`` sets. ``bsm_items`` is None when infeasible."""

    k: int
    tau: float
    opt_f: float
    opt_f_items: tuple
    opt_g: float
    opt_g_items: tuple
    bsm_items: tuple | None
    bsm_f: float | None
    bsm_g: float | None

    @property
    def infeasible(self) -> bool:
        return self.bsm_items is None


def brute_force(oracle: GroupUtilityOracle, k: int, tau: float = 0.0) -> ExactResult:
    """Exhaustive BSM solver.

    Computes ``OPT_f``, ``OPT_g`` and the set maximizing ``f`` among those
    with ``g >= tau * OPT_g``. Ties go to the lexicographically smallest set.
    Refuses instances with more than ``10**7`` candidate sets.
    """
    if not 1 <= k <= oracle.n:
        raise ValueError(f"k must lie in [1, {oracle.n}], got {k}")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    total = math.comb(oracle.n, k)
    if total > MAX_SUBSETS:
        raise InstanceTooLarge(f"instance too large: C({oracle.n},{k}) = {total} subsets exceeds {MAX_SUBSETS}")
    pop = oracle.population
    subsets, fs, gs = [], [], []
    for subset in itertools.combinations(range(oracle.n), k):
        sums = oracle.group_sums(subset)
        subsets.append(subset)
        fs.append(float(np.sum(sums) / pop.m))
        gs.append(float(np.min(sums / pop.sizes)))
    fs = np.asarray(fs)
    gs = np.asarray(gs)
    i_f = int(np.argmax(fs))  # argmax returns the first, i.e. lexicographically smallest, maximizer
    i_g = int(np.argmax(gs))
    opt_g = float(gs[i_g])
    feasible = gs >= tau * opt_g - 1e-12
    assert feasible.any(), "the OPT_g witness always satisfies its own constraint"
    masked = np.where(feasible, fs, -np.inf)
    i_b = int(np.argmax(masked))
    return ExactResult(
        k=k, tau=tau,
        opt_f=float(fs[i_f]), opt_f_items=subsets[i_f],
        opt_g=opt_g, opt_g_items=subsets[i_g],
        bsm_items=subsets[i_b], bsm_f=float(fs[i_b]), bsm_g=float(gs[i_b]),
    )


# ---------------------------------------------------------------------------
# LP-file export


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _expr(terms, width=8) -> str:
    """Render ``[(coef, var), ...]`` as a linear expression, wrapped across lines."""
    parts = []
    for coef, var in terms:
        if coef == 1:
            piece = f"+ {var}"
        elif coef == -1:
            piece = f"- {var}"
        elif coef < 0:
            piece = f"- {_num(-coef)} {var}"
        else:
            piece = f"+ {_num(coef)} {var}"
        parts.append(piece)
    if not parts:
        return "0"
    if parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    lines = [" ".join(parts[i:i + width]) for i in range(0, len(parts), width)]
    return "\n    ".join(lines)


def _lp_text(title, objective, rows, binaries, bounds) -> str:
    out = [f"\\ {title}", "Maximize", f" obj: {_expr(objective)}", "Subject To"]
    for name, terms, sense, rhs in rows:
        out.append(f" {name}: {_expr(terms)} {sense} {_num(rhs)}")
    if bounds:
        out.append("Bounds")
        out.extend(f" {b}" for b in bounds)
    out.append("Binaries")
    for i in range(0, len(binaries), 10):
        out.append(" " + " ".join(binaries[i:i + 10]))
    out.append("End")
    return "\n".join(out) + "\n"


def _check_mode(mode, optg):
    if mode not in LP_MODES:
        raise ValueError(f"mode must be one of {LP_MODES}, got {mode!r}")
    if mode == "bsm" and optg is None:
        raise ValueError("mode='bsm' needs optg (solve the robust ILP or run brute_force first)")


def export_ilp_mc(instance: CoverageOracle, k: int, tau: float = 0.0, optg: float | None = None,
                  mode: str = "utility") -> str:
    """ILP for maximum coverage (``utility``), its maximin version (``robust``) or BSM (``bsm``)."""
    _check_mode(mode, optg)
    pop = instance.population
    if instance.n == 0 or instance.n_elements == 0:
        raise ValueError("empty coverage instance")
    if instance.n_elements != pop.m or not np.all(instance.element_weight == 1):
        raise ValueError("ILP export needs a plain coverage instance whose elements are the users")
    m = pop.m
    x = [f"x{l}" for l in range(instance.n)]
    y = [f"y{j}" for j in range(m)]
    covering = [[] for _ in range(m)]
    for l, s in enumerate(instance.sets):
        for j in s:
            covering[j].append(l)

    rows = [("card", [(1, v) for v in x], "<=", k)]
    for j in range(m):
        rows.append((f"link{j}", [(1, x[l]) for l in covering[j]] + [(-1, y[j])], ">=", 0))
    group_terms = [[(1.0 / pop.sizes[i], y[j]) for j in pop.members(i)] for i in range(pop.c)]
    bounds = []
    if mode == "robust":
        objective = [(1, "w")]
        for i, terms in enumerate(group_terms):
            rows.append((f"group{i}", terms + [(-1, "w")], ">=", 0))
        bounds.append("w >= 0")
    else:
        objective = [(1.0 / m, v) for v in y]
        if mode == "bsm":
            for i, terms in enumerate(group_terms):
                rows.append((f"fair{i}", terms, ">=", tau * optg))
    return _lp_text(f"maximum coverage, mode={mode}, k={k}", objective, rows, x + y, bounds)


def export_ilp_fl(matrix: BenefitMatrix, k: int, tau: float = 0.0, optg: float | None = None,
                  mode: str = "utility") -> str:
    """ILP for facility location with assignment variables ``y_j_l <= x_l``."""
    _check_mode(mode, optg)
    pop = matrix.population
    b = matrix.benefits
    m, n = b.shape
    if m == 0 or n == 0:
        raise ValueError("empty benefit matrix")
    x = [f"x{l}" for l in range(n)]
    y = [[f"y{j}_{l}" for l in range(n)] for j in range(m)]
    rows = [("card", [(1, v) for v in x], "<=", k)]
    for j in range(m):
        rows.append((f"assign{j}", [(1, v) for v in y[j]], "<=", 1))
    for j in range(m):
        for l in range(n):
            rows.append((f"open{j}_{l}", [(1, y[j][l]), (-1, x[l])], "<=", 0))

    def group_terms(i):
        size = pop.sizes[i]
        return [(b[j, l] / size, y[j][l]) for j in pop.members(i) for l in range(n) if b[j, l] != 0]

    bounds = []
    if mode == "robust":
        objective = [(1, "w")]
        for i in range(pop.c):
            rows.append((f"group{i}", group_terms(i) + [(-1, "w")], ">=", 0))
        bounds.append("w >= 0")
    else:
        objective = [(b[j, l] / m, y[j][l]) for j in range(m) for l in range(n) if b[j, l] != 0]
        if mode == "bsm":
            for i in range(pop.c):
                rows.append((f"fair{i}", group_terms(i), ">=", tau * optg))
    binaries = x + [v for row in y for v in row]
    return _lp_text(f"facility location, mode={mode}, k={k}", objective, rows, binaries, bounds)


def write_lp(text: str, path) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Minimal reader for the subset of the LP format written above.


@dataclass
class LpModel:
    sense: str
    objective: dict
    constraints: dict  # name -> (coefficients, sense, rhs)
    bounds: list
    binaries: list


def _parse_expr(tokens) -> dict:
    coefs = {}
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = 1.0 if tok == "+" else -1.0
            continue
        try:
            coef = float(tok)
            continue
        except ValueError:
            pass
        coefs[tok] = coefs.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
        sign, coef = 1.0, None
    return coefs


def read_lp(text: str) -> LpModel:
    """Parse an LP file produced by this module back into coefficients."""
    section = None
    sense = None
    chunks = {"obj": [], "rows": [], "bounds": [], "bin": []}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("maximize", "minimize"):
            section, sense = "obj", low
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low == "binaries":
            section = "bin"
            continue
        if low == "end":
            break
        if section is None:
            raise ValueError(f"content outside any section: {raw!r}")
        if section in ("obj", "rows") and raw.startswith("    "):
            chunks[section][-1] += " " + line  # continuation of a wrapped expression
        else:
            chunks[section].append(line)

    if len(chunks["obj"]) != 1:
        raise ValueError("expected exactly one objective")
    _, obj_expr = chunks["obj"][0].split(":", 1)
    objective = _parse_expr(obj_expr.split())
    constraints = {}
    for row in chunks["rows"]:
        name, body = row.split(":", 1)
        tokens = body.split()
        op = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
        constraints[name.strip()] = (_parse_expr(tokens[:op]), tokens[op], float(tokens[op + 1]))
    binaries = [v for line in chunks["bin"] for v in line.split()]
    return LpModel(sense, objective, constraints, chunks["bounds"], binaries)

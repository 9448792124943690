"""Experiment runner: verification suites, algorithm sweeps, curves and tail tables.

Config files are JSON documents with a top-level ``"version": 1``. A run config:

    {"version": 1, "case": "SC",
     "grid": {"n": [8], "L": [32], "mu": [1], "R": [1], "eps": [1e-4]},
     "algorithms": [{"name": "svrg"}, {"name": "sgda", "step": 0.01}],
     "seeds": 5, "master_seed": 0, "max_queries": 200000}

Grid keys are the parameter names of the case (n, L, L_prime, mu, mu_x, mu_y,
Rx, Ry, R, Delta, eps); the grid is their Cartesian product.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import itertools
import json
import logging
import math
import os

import numpy as np

from . import instances as ins
from . import instances_min as im
from . import reference as ref
from . import zero_chain as zc
from .algorithms import ALGORITHMS, AlgorithmSpec, Stop, protocol_audit, run_algorithm
from .oracle import component_grad, component_value, pifo

log = logging.getLogger("pifo_bench")

CONFIG_VERSION = 1
WORKERS_ENV = "PIFO_BENCH_WORKERS"
RUN_COLUMNS = ["case", "n", "L", "mu_x", "mu_y", "R_x", "R_y", "eps", "algorithm", "seed",
               "queries_to_eps", "final_gap", "budget_N", "gap_at_budget"]
PARAM_KEYS = ["n", "L", "L_prime", "mu", "mu_x", "mu_y", "Rx", "Ry", "R", "Delta"]


def fmt(v):
    """CSV cell: 17 significant digits for floats, blank for missing."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------------ config

@dataclass
class ExperimentConfig:
    case: str
    grid: dict
    algorithms: list = field(default_factory=lambda: [{"name": "svrg"}])
    seeds: list = field(default_factory=lambda: [0])
    master_seed: int = 0
    max_queries: int = 10 ** 6
    version: int = CONFIG_VERSION

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        v = d.pop("version", CONFIG_VERSION)
        if v != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {v}")
        seeds = d.pop("seeds", [0])
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        algs = [a if isinstance(a, dict) else {"name": a} for a in d.pop("algorithms", ["svrg"])]
        for a in algs:
            if a["name"] not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a['name']}")
        grid = {k: v if isinstance(v, list) else [v] for k, v in d.pop("grid").items()}
        bad = set(grid) - set(PARAM_KEYS) - {"eps"}
        if bad:
            raise ValueError(f"unknown grid keys {sorted(bad)}")
        return cls(d.pop("case"), grid, algs, list(seeds), **d)

    def points(self):
        keys = sorted(self.grid)
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            yield dict(zip(keys, combo))


def load_config(path):
    with open(path) as fh:
        return json.load(fh)


def split_point(point):
    p = {k: v for k, v in point.items() if k != "eps"}
    return p, point["eps"]


def build_case_instance(case, params, eps, m):
    """Instance of a construction recipe at dimension m (nonconvex kinds set m from eps)."""
    p = params
    if case == "SCSC":
        return ins.make_scsc(p["L"], p["mu_x"], p["mu_y"], p["Rx"], p["Ry"], p["n"], m)
    if case == "CSC":
        return ins.make_csc(p["L"], p["mu_y"], p["Rx"], p["Ry"], p["n"], m)
    if case == "CC":
        return ins.make_cc(p["L"], p["Rx"], p["Ry"], p["n"], m)
    if case == "SC":
        return im.make_sc(p["L"], p["mu"], p["R"], p["n"], m)
    if case == "C":
        return im.make_c(p["L"], p["R"], p["n"], m)
    if case == "NCSC":
        return ins.make_ncsc(p["L"], p["mu_x"], p["mu_y"], p["Delta"], eps, p["n"])
    if case == "NCSC_AVG":
        return ins.make_ncsc_avg(p["L_prime"], p["mu_x"], p["mu_y"], p["Delta"], eps, p["n"])
    if case == "NC":
        return im.make_nc(p["L"], p["mu"], p["Delta"], eps, p["n"])
    if case == "NC_AVG":
        return im.make_nc_avg(p["L_prime"], p["mu"], p["Delta"], eps, p["n"])
    if case.endswith("_AVG"):
        kw = {k: v for k, v in p.items() if k != "L_prime"}
        return ins.lift_to_average_smooth(case[:-4], p["L_prime"], m=m, **kw)
    raise ValueError(f"unknown case {case}")


def trial_rng(master_seed, seed):
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(seed)]))


# --------------------------------------------------------------------- run

def _run_task(task):
    case, params, eps, m, alg, seed, master, max_q, N = task
    inst = build_case_instance(case, params, eps, m)
    spec = AlgorithmSpec(**alg)
    tb = run_algorithm(inst, spec, Stop(int(math.floor(N))), trial_rng(master, seed), seed)
    te = run_algorithm(inst, spec, Stop(int(max_q), eps=eps), trial_rng(master, seed), seed)
    return dict(queries_to_eps=te.queries_to_eps, final_gap=te.final_value,
                gap_at_budget=tb.final_value)


def _csv_params(case, params, eps):
    g = params.get
    return dict(case=case, n=g("n"), L=g("L", g("L_prime")), mu_x=g("mu_x", g("mu")),
                mu_y=g("mu_y"), R_x=g("Rx", g("R")), R_y=g("Ry"), eps=eps)


def _quantiles(v):
    v = np.asarray([x for x in v if x is not None], dtype=float)
    if v.size == 0:
        return None
    q = np.quantile(v, [0.1, 0.25, 0.5, 0.75, 0.9])
    return dict(mean=float(v.mean()), median=float(q[2]), q10=float(q[0]), q25=float(q[1]),
                q75=float(q[3]), q90=float(q[4]), count=int(v.size))


def cmd_run(config, out_dir=None, workers=None):
    """Sweep the grid; returns (rows, summary) and writes runs.csv / summary.json."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    workers = workers or default_workers()
    tasks, meta, skipped = [], [], []
    for gi, point in enumerate(cfg.points()):
        params, eps = split_point(point)
        try:
            b = ref.select_m_N(cfg.case, params, eps)
        except ref.PreconditionError as e:
            log.warning("skipping %s %s: %s", cfg.case, point, e)
            skipped.append(dict(point=point, reason=str(e)))
            continue
        try:
            curve = ref.lower_bound_curve(ref.LowerBoundQuery(cfg.case, params, eps))
        except ref.PreconditionError:
            curve = None
        for alg in cfg.algorithms:
            for seed in cfg.seeds:
                tasks.append((cfg.case, params, eps, b.m, alg, seed, cfg.master_seed,
                              cfg.max_queries, b.N))
                meta.append((gi, params, eps, b, alg["name"], seed, curve))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_task(t) for t in tasks]
    rows = []
    for (gi, params, eps, b, name, seed, curve), res in zip(meta, results):
        row = _csv_params(cfg.case, params, eps)
        row.update(algorithm=name, seed=seed, budget_N=b.N, **res)
        rows.append(row)
    groups = {}
    for (gi, params, eps, b, name, seed, curve), row in zip(meta, rows):
        key = (gi, name)
        g = groups.setdefault(key, dict(point=dict(params, eps=eps), algorithm=name, m=b.m,
                                        M=b.M, budget_N=b.N, lower_bound_curve=curve,
                                        q=[], gb=[]))
        g["q"].append(row["queries_to_eps"])
        g["gb"].append(row["gap_at_budget"])
    summary = dict(version=CONFIG_VERSION, case=cfg.case, skipped=skipped, groups=[])
    for key in sorted(groups):
        g = groups.pop(key)
        q, gb = g.pop("q"), np.asarray(g.pop("gb"), dtype=float)
        g["reached"] = sum(x is not None for x in q)
        g["trials"] = len(q)
        g["queries_to_eps"] = _quantiles(q)
        g["gap_at_budget"] = dict(mean=float(gb.mean()),
                                  stderr=float(gb.std(ddof=1) / math.sqrt(gb.size))
                                  if gb.size > 1 else 0.0,
                                  min=float(gb.min()))
        summary["groups"].append(g)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "runs.csv"), RUN_COLUMNS, rows)
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    return rows, summary


# ------------------------------------------------------------------- curve

CURVE_COLUMNS = ["case"] + PARAM_KEYS + ["eps", "curve", "status"]


def cmd_curve(config, out_path=None):
    """Evaluate lower_bound_curve over a grid; invalid points are flagged, not dropped."""
    cfg = dict(config)
    case = cfg["case"]
    grid = {k: v if isinstance(v, list) else [v] for k, v in cfg["grid"].items()}
    keys = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        params, eps = split_point(dict(zip(keys, combo)))
        row = dict(case=case, eps=eps, **params)
        q = ref.LowerBoundQuery(case, params, eps)
        row["curve"] = ref.lower_bound_curve(q, check=False)
        try:
            ref.check_curve_preconditions(case, params, eps)
            row["status"] = "ok"
        except ref.PreconditionError as e:
            row["status"] = f"invalid: {e}"
        rows.append(row)
    write_csv(out_path, CURVE_COLUMNS, rows)
    return rows


# --------------------------------------------------------------------- geo

GEO_COLUMNS = ["case_id", "m", "p_sum", "j", "exact", "mc", "mc_lower99", "threshold"]


def cmd_geo(config, out_path=None):
    """Tail tables P(sum Y > j) per probability list, exact and Monte Carlo.

    config: {"cases": [[p1, ..., pm], ...] or {"m": [2, 4, 8]} for p = 1/m,
    "trials": int, "seed": int, "j_max_factor": float}.
    """
    cfg = dict(config)
    if "cases" in cfg:
        cases = [list(map(float, c)) for c in cfg["cases"]]
    else:
        cases = [[1.0 / m] * m for m in cfg.get("m", [2, 4, 8])]
    trials = int(cfg.get("trials", 0))
    factor = float(cfg.get("j_max_factor", 2.0))
    root = np.random.SeedSequence(int(cfg.get("seed", 0)))
    rows, reports = [], []
    for cid, (p, ss) in enumerate(zip(cases, root.spawn(len(cases)))):
        rng = np.random.default_rng(ss)
        rep = zc.verify_geo_concentration(p, trials, rng)
        reports.append(rep)
        m = len(p)
        sums = None
        if trials:
            sums = np.zeros(trials, dtype=np.int64)
            for pk in p:
                sums += rng.geometric(pk, size=trials)
        jmax = max(m, int(math.ceil(factor * rep.threshold)))
        for j in range(m - 1, jmax + 1):
            row = dict(case_id=cid, m=m, p_sum=float(sum(p)), j=j, threshold=rep.threshold,
                       exact=zc.geo_tail_exact(p, j))
            if sums is not None:
                hits = int(np.count_nonzero(sums > j))
                row["mc"] = hits / trials
                row["mc_lower99"] = zc.clopper_pearson_lower(hits, trials)
            rows.append(row)
    write_csv(out_path, GEO_COLUMNS, rows)
    return rows, reports


# ------------------------------------------------------------------ verify

@dataclass(frozen=True)
class Check:
    scope: str
    name: str
    passed: bool
    detail: str = ""


def _fd_grad_error(inst, i, x, y, h=1e-6):
    gx, gy = component_grad(inst, i, x, y)
    z = np.concatenate([x, y]) if inst.is_minimax else x
    g = np.concatenate([gx, gy]) if inst.is_minimax else gx
    fd = np.zeros_like(z)
    dx = inst.dim_x
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        zp, zm = z + e, z - e
        fp = component_value(inst, i, zp[:dx], zp[dx:] if inst.is_minimax else None)
        fm = component_value(inst, i, zm[:dx], zm[dx:] if inst.is_minimax else None)
        fd[j] = (fp - fm) / (2 * h)
    return float(np.max(np.abs(fd - g)) / max(1.0, float(np.max(np.abs(g)))))


def _prox_residual(inst, i, x, y, gamma):
    r = pifo(inst, i, x, y, gamma)
    ux, uy = component_grad(inst, i, r.prox_x, r.prox_y if inst.is_minimax else None)
    res = np.max(np.abs(gamma * ux + r.prox_x - x))
    if inst.is_minimax:
        res = max(res, np.max(np.abs(gamma * uy - (r.prox_y - y))))
    return float(res / max(1.0, float(np.max(np.abs(x)))))


def _sample_point(inst, rng):
    x = rng.normal(size=inst.dim_x)
    y = rng.normal(size=inst.dim_y) if inst.is_minimax else None
    return x, y


def _verify_oracle(zoo, rng):
    out = []
    for k, inst in zoo.items():
        fd = pr = 0.0
        for _ in range(3):
            x, y = _sample_point(inst, rng)
            i = int(rng.integers(inst.n)) + 1
            fd = max(fd, _fd_grad_error(inst, i, x, y))
            pr = max(pr, _prox_residual(inst, i, x, y, min(0.3, 0.5 * inst.gamma_max)))
        out.append(Check("oracle", f"gradient_fd[{k}]", fd <= 1e-5, f"{fd:.3g}"))
        out.append(Check("oracle", f"prox_residual[{k}]", pr <= 1e-8, f"{pr:.3g}"))
    return out


def _verify_instances(zoo, rng):
    out = []
    for k, inst in zoo.items():
        L = inst.regularity.L
        worst = 0.0
        for _ in range(20):
            x, y = _sample_point(inst, rng)
            x2, y2 = _sample_point(inst, rng)
            i = int(rng.integers(inst.n)) + 1
            a = np.concatenate(component_grad(inst, i, x, y))
            b = np.concatenate(component_grad(inst, i, x2, y2))
            d = np.concatenate([x - x2, y - y2]) if inst.is_minimax else x - x2
            worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(d))
        out.append(Check("instances", f"lipschitz[{k}]", worst <= L * (1 + 1e-9) + 1e-9,
                         f"sampled {worst:.6g} vs L {L:.6g}"))
    return out


def _verify_reference(zoo, rng):
    out = []
    inst = zoo.get("SCSC")
    if inst is not None:
        pt = ref.saddle_point_scsc(inst)
        out.append(Check("reference", "scsc_saddle_residual", pt.residual <= 1e-8,
                         f"{pt.residual:.3g}"))
    for k in ("SC", "C"):
        inst = zoo.get(k)
        if inst is None:
            continue
        pt = ref.minimizer_closed_form(inst)
        pv = ref.optimal_value_printed(inst)
        rel = abs(pt.value - pv) / abs(pv)
        out.append(Check("reference", f"{k.lower()}_minimizer", pt.residual <= 1e-8 and
                         rel <= 1e-10, f"residual {pt.residual:.3g}, value rel {rel:.3g}"))
    return out


def _verify_zero_chain(zoo, rng):
    out = []
    for k in ("TILDE_R", "HAT_R", "R_BASE", "R_BASE_NC"):
        inst = zoo.get(k)
        if inst is None:
            continue
        case = zc.chain_case(inst)
        m = inst.dim_x
        top = m - 1 if case == "HAT" else m
        ok = True
        for _ in range(20):
            kk = int(rng.integers(0, top))
            x = np.zeros(m)
            x[:kk] = rng.normal(size=kk)
            if case == "MIN":
                point = x
            else:
                ky = max(kk - 1, 0) if case == "TILDE" else kk
                y = np.zeros(inst.dim_y)
                y[:ky] = rng.normal(size=ky)
                point = (x, y)
            i = int(rng.integers(inst.n)) + 1
            rep = zc.check_jump(inst, point, i, min(0.3, 0.5 * inst.gamma_max))
            ok &= rep.passed or not rep.hypothesis_ok
        out.append(Check("zero_chain", f"jump[{k}]", bool(ok)))
    err = max(abs(zc.f2j_closed_form(a, b, j) - zc.geo_tail_exact([a, b], j))
              for a in (0.1, 0.5, 0.9) for b in (0.2, 0.5, 0.7) for j in range(1, 12))
    out.append(Check("zero_chain", "f2j_matches_dp", err <= 1e-12, f"{err:.3g}"))
    for m in (2, 4, 8):
        rep = zc.verify_geo_concentration([1.0 / m] * m, 0, rng)
        out.append(Check("zero_chain", f"geo_tail_m{m}", rep.passed, f"{rep.exact:.6g}"))
    return out


def _verify_algorithms(zoo, rng):
    out = []
    for k, inst in zoo.items():
        for name in ALGORITHMS:
            tr = run_algorithm(inst, AlgorithmSpec(name), Stop(50, record=True), rng)
            a = protocol_audit(tr, inst)
            out.append(Check("algorithms", f"audit[{k}/{name}]", a.passed,
                             f"worst {a.worst_residual:.3g}"))
    return out


SUITES = {
    "instances": _verify_instances,
    "oracle": _verify_oracle,
    "reference": _verify_reference,
    "zero_chain": _verify_zero_chain,
    "algorithms": _verify_algorithms,
}


def cmd_verify(scope="all", seed=0, zoo=None):
    """Run the invariant suites; returns a list of Check records."""
    from .zoo import small_zoo

    if scope != "all" and scope not in SUITES:
        raise ValueError(f"unknown scope {scope}; choose from all, {', '.join(SUITES)}")
    zoo = small_zoo() if zoo is None else zoo
    rng = np.random.default_rng(seed)
    names = list(SUITES) if scope == "all" else [scope]
    checks = []
    for s in names:
        checks.extend(Check(c.scope, c.name, bool(c.passed), c.detail) for c in SUITES[s](zoo, rng))
    return checks

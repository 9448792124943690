"""Span-protocol PIFO algorithms and the protocol audit."""

from dataclasses import dataclass, field
import math

import numpy as np

from . import reference as ref
from .linalg import project_ball
from .oracle import QueryCounter, pifo


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    step: float = None  # step size; defaults depend on the method
    gamma: float = None  # prox weight for point_prox
    epoch: int = None  # inner steps per anchor for svrg
    probs: tuple = None  # sampling distribution override (zeros allowed)


@dataclass(frozen=True)
class Stop:
    max_queries: int
    eps: float = None
    eval_every: int = None  # defaults to n queries
    record: bool = False  # keep iterates and oracle outputs for the audit


@dataclass
class Trace:
    algorithm: str
    seed: object
    step_queries: list = field(default_factory=list)
    eval_queries: list = field(default_factory=list)
    eval_values: list = field(default_factory=list)
    stop_reason: str = ""
    queries_to_eps: int = None
    total_queries: int = 0
    x: np.ndarray = None
    y: np.ndarray = None
    iterates: list = None
    outputs: list = None

    @property
    def final_value(self):
        return self.eval_values[-1] if self.eval_values else math.nan


class DivergenceError(RuntimeError):
    pass


def measure(instance, x, y=None):
    """Gap for convex kinds, envelope gradient norm for nonconvex ones."""
    kind = instance.kind
    nonconvex = kind in ("HAT_R", "NCSC", "NCSC_AVG", "NC", "NC_AVG") or (
        kind == "R_BASE" and not instance.model.convex)
    if nonconvex:
        return ref.stationarity(instance, x)
    if instance.is_minimax:
        return ref.primal_dual_gap(instance, x, y)
    return ref.suboptimality(instance, x)


class _Run:
    """Bookkeeping shared by all methods: counting, sampling, logging, stopping."""

    def __init__(self, instance, spec, stop, rng, seed):
        self.inst = instance
        self.n = instance.n
        self.stop = stop
        self.rng = rng
        self.counter = QueryCounter(self.n)
        p = np.asarray(spec.probs if spec.probs is not None else instance.probs, dtype=float)
        if p.shape != (self.n,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("sampling distribution must be length n, nonnegative, sum 1")
        self.p = p
        self.buf, self.buf_pos = np.zeros(0, dtype=int), 0
        self.trace = Trace(spec.name, seed)
        self.every = stop.eval_every or self.n
        self.next_eval = 0
        self.v0 = None
        self.step_outputs = None
        if stop.record:
            self.trace.iterates = []
            self.trace.outputs = []
        self.mm = instance.is_minimax
        self.Rx, self.Ry = instance.feasible.Rx, instance.feasible.Ry

    def draw(self):
        if self.buf_pos == len(self.buf):
            self.buf = self.rng.choice(self.n, size=256, p=self.p) + 1
            self.buf_pos = 0
        self.buf_pos += 1
        return int(self.buf[self.buf_pos - 1])

    def weight(self, i):
        return 1.0 / (self.n * self.p[i - 1])

    def room(self, cost):
        return self.counter.total + cost <= self.stop.max_queries

    def query(self, i, x, y, gamma=None):
        r = pifo(self.inst, i, x, y, gamma, self.counter)
        if self.step_outputs is not None:
            self.step_outputs.append(r)
        return r

    def begin_step(self):
        if self.stop.record:
            self.step_outputs = []

    def end_step(self, x, y):
        """Log the new iterate; returns True when the run should stop."""
        tr = self.trace
        tr.step_queries.append(self.counter.total)
        if self.stop.record:
            tr.iterates.append((x.copy(), None if y is None else y.copy()))
            tr.outputs.append(self.step_outputs)
        if self.counter.total >= self.next_eval:
            return self.evaluate(x, y)
        return False

    def evaluate(self, x, y):
        tr = self.trace
        v = measure(self.inst, x, y)
        tr.eval_queries.append(self.counter.total)
        tr.eval_values.append(v)
        while self.next_eval <= self.counter.total:
            self.next_eval += self.every
        if self.v0 is None:
            self.v0 = max(abs(v), 1e-300)
        if not np.isfinite(v) or abs(v) > 1e12 * self.v0:
            tr.stop_reason = "diverged"
            return True
        if self.stop.eps is not None and v <= self.stop.eps:
            tr.queries_to_eps = self.counter.total
            tr.stop_reason = "eps"
            return True
        return False

    def start(self):
        x = np.zeros(self.inst.dim_x)
        y = np.zeros(self.inst.dim_y) if self.mm else None
        if self.stop.record:
            self.trace.iterates.append((x.copy(), None if y is None else y.copy()))
            self.trace.outputs.append([])
        self.evaluate(x, y)
        return x, y

    def finish(self, x, y, reason="budget"):
        tr = self.trace
        if not tr.stop_reason:
            if not tr.eval_queries or tr.eval_queries[-1] != self.counter.total:
                self.evaluate(x, y)
            if not tr.stop_reason:
                tr.stop_reason = reason
        tr.total_queries = self.counter.total
        tr.x, tr.y = x, y
        return tr

    def descend(self, x, gx, y, gy, eta):
        xn = project_ball(x - eta * gx, self.Rx)
        yn = project_ball(y + eta * gy, self.Ry) if self.mm else None
        return xn, yn


def _L(instance):
    return instance.regularity.L


def run_sgda(instance, spec, stop, rng, seed=None):
    """Stochastic gradient descent-ascent with projection, one query per step."""
    run = _Run(instance, spec, stop, rng, seed)
    eta = spec.step if spec.step is not None else 1.0 / (3.0 * _L(instance))
    x, y = run.start()
    if run.trace.stop_reason:
        return run.finish(x, y)
    while run.room(1):
        run.begin_step()
        i = run.draw()
        r = run.query(i, x, y)
        w = run.weight(i)
        x, y = run.descend(x, w * r.grad_x, y, w * r.grad_y if run.mm else None, eta)
        if run.end_step(x, y):
            break
    return run.finish(x, y)


def run_svrg_vr(instance, spec, stop, rng, seed=None):
    """Variance-reduced gradient method; the anchor gradient costs n queries."""
    run = _Run(instance, spec, stop, rng, seed)
    n = instance.n
    eta = spec.step if spec.step is not None else 1.0 / (3.0 * _L(instance))
    T = spec.epoch if spec.epoch is not None else 2 * n
    x, y = run.start()
    if run.trace.stop_reason:
        return run.finish(x, y)
    done = False
    while not done and run.room(n + 2):
        wx, wy = x.copy(), None if y is None else y.copy()
        anchor_gx = np.zeros_like(x)
        anchor_gy = np.zeros_like(y) if run.mm else None
        # the anchor is n sequential queries, one component each
        for i in range(1, n + 1):
            run.begin_step()
            r = run.query(i, wx, wy)
            anchor_gx += r.grad_x / n
            if run.mm:
                anchor_gy += r.grad_y / n
            if run.end_step(x, y):
                done = True
                break
        if done:
            break
        for _ in range(T):
            if not run.room(2):
                break
            run.begin_step()
            i = run.draw()
            a = run.query(i, x, y)
            b = run.query(i, wx, wy)
            w = run.weight(i)
            gx = w * (a.grad_x - b.grad_x) + anchor_gx
            gy = w * (a.grad_y - b.grad_y) + anchor_gy if run.mm else None
            x, y = run.descend(x, gx, y, gy, eta)
            if run.end_step(x, y):
                done = True
                break
    return run.finish(x, y)


def default_prox_weight(instance):
    reg = instance.regularity
    L, n = reg.L, instance.n
    mu = min(reg.mu_x, reg.mu_y) if instance.is_minimax else reg.mu_x
    if mu > 0:
        g = math.sqrt((n - 1) ** 2 + 4 * n * L / mu) / (2 * L * n) - (1 - 1 / n) / (2 * L)
    else:
        g = 1.0 / L
    return min(g, 0.5 * instance.gamma_max)


def run_point_prox(instance, spec, stop, rng, seed=None):
    """Incremental proximal point with a SAGA-style correction table.

    The table holds the operator values (grad_x f_j, -grad_y f_j) last seen for
    each component; after a prox step at z the new value is (z - prox(z)) / gamma,
    so each step costs one query. Filling the table costs n queries.
    """
    run = _Run(instance, spec, stop, rng, seed)
    n = instance.n
    gamma = spec.gamma if spec.gamma is not None else default_prox_weight(instance)
    gamma = min(gamma, 0.5 * instance.gamma_max)
    x, y = run.start()
    if run.trace.stop_reason or not run.room(n):
        return run.finish(x, y)
    dx = instance.dim_x
    dim = dx + (instance.dim_y if run.mm else 0)
    table = np.zeros((n, dim))
    for i in range(1, n + 1):
        run.begin_step()
        r = run.query(i, x, y)
        table[i - 1, :dx] = r.grad_x
        if run.mm:
            table[i - 1, dx:] = -r.grad_y
        if run.end_step(x, y):
            return run.finish(x, y)
    mean = table.mean(axis=0)
    z_cur = np.concatenate([x, y]) if run.mm else x.copy()
    while run.room(1):
        run.begin_step()
        j = run.draw()
        z = z_cur + gamma * (table[j - 1] - mean)
        zx, zy = (z[:dx], z[dx:]) if run.mm else (z, None)
        r = run.query(j, zx, zy, gamma)
        new = np.concatenate([r.prox_x, r.prox_y]) if run.mm else r.prox_x
        g_new = (z - new) / gamma
        mean += (g_new - table[j - 1]) / n
        table[j - 1] = g_new
        x = project_ball(new[:dx], run.Rx)
        y = project_ball(new[dx:], run.Ry) if run.mm else None
        z_cur = np.concatenate([x, y]) if run.mm else x
        if run.end_step(x, y):
            break
    return run.finish(x, y)


def run_extragradient(instance, spec, stop, rng=None, seed=None):
    """Full-batch extragradient; each iteration sweeps all n components twice."""
    run = _Run(instance, spec, stop, rng or np.random.default_rng(0), seed)
    n = instance.n
    eta = spec.step if spec.step is not None else 1.0 / (2.0 * _L(instance))
    x, y = run.start()
    if run.trace.stop_reason:
        return run.finish(x, y)

    def full(xq, yq):
        gx = np.zeros_like(xq)
        gy = np.zeros_like(yq) if run.mm else None
        for i in range(1, n + 1):
            r = run.query(i, xq, yq)
            gx += r.grad_x / n
            if run.mm:
                gy += r.grad_y / n
        return gx, gy

    while run.room(2 * n):
        run.begin_step()
        gx, gy = full(x, y)
        xh, yh = run.descend(x, gx, y, gy, eta)
        gx, gy = full(xh, yh)
        x, y = run.descend(x, gx, y, gy, eta)
        if run.end_step(x, y):
            break
    return run.finish(x, y)


ALGORITHMS = {
    "sgda": run_sgda,
    "svrg": run_svrg_vr,
    "point_prox": run_point_prox,
    "extragradient": run_extragradient,
}


def run_algorithm(instance, spec, stop, rng, seed=None):
    return ALGORITHMS[spec.name](instance, spec, stop, rng, seed)


# ---------------------------------------------------------------- audit

@dataclass(frozen=True)
class AuditReport:
    passed: bool
    steps: int
    worst_residual: float
    first_violation: int = None


def _span_residual(basis, v):
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    if not basis:
        return 1.0
    A = np.column_stack(basis)
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    return float(np.linalg.norm(A @ coef - v) / nv)


def protocol_audit(trace, instance, tol=1e-8):
    """Check every iterate lies in the span of earlier iterates and oracle outputs.

    The check runs per block: x_t against past x's and the x-parts of every
    gradient and prox output received so far, and likewise for y. Projections
    onto balls rescale a vector and so stay inside the span.
    """
    if trace.iterates is None:
        raise ValueError("trace was not recorded; run with Stop(record=True)")
    mm = instance.is_minimax
    bx, by = [], []
    worst, first = 0.0, None

    def add(basis, v):
        if v is not None and v.size and np.linalg.norm(v) > 0:
            basis.append(v)

    for t, ((x, y), outs) in enumerate(zip(trace.iterates, trace.outputs)):
        # outputs received during step t may be used to form iterate t
        for r in outs:
            add(bx, r.grad_x)
            add(bx, r.prox_x)
            if mm:
                add(by, r.grad_y)
                add(by, r.prox_y)
        res = _span_residual(bx, x)
        if mm:
            res = max(res, _span_residual(by, y))
        worst = max(worst, res)
        if res > tol and first is None:
            first = t
        add(bx, x)
        if mm:
            add(by, y)
        bx = _compress(bx)
        if mm:
            by = _compress(by)
    return AuditReport(first is None, len(trace.iterates), worst, first)


def _compress(basis):
    """Keep an orthonormal basis so the least-squares problems stay small."""
    if len(basis) <= 1:
        return basis
    A = np.column_stack(basis)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    keep = s > 1e-12 * s[0]
    return list(U[:, keep].T)

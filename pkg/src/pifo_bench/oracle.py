"""Proximal incremental first-order oracle: value, gradient, prox and projections."""

from dataclasses import dataclass, field

import numpy as np

from .families import (
    BilinearFamily,
    HatFamily,
    MinFamily,
    QuadFamily,
    Scaled,
    Separable,
    TildeFamily,
)
from .linalg import gamma_deriv, gamma_second, gamma_value, project_ball

_EMPTY = np.zeros(0)


@dataclass
class QueryCounter:
    n: int
    total: int = 0
    per_component: np.ndarray = None

    def __post_init__(self):
        if self.per_component is None:
            self.per_component = np.zeros(self.n, dtype=np.int64)

    def tick(self, i):
        self.total += 1
        self.per_component[i - 1] += 1


@dataclass(frozen=True)
class PifoResponse:
    value: float
    grad_x: np.ndarray
    grad_y: np.ndarray
    prox_x: np.ndarray
    prox_y: np.ndarray
    proj_x: np.ndarray
    proj_y: np.ndarray


class GammaRangeError(ValueError):
    pass


# ---------------------------------------------------------------- closed forms

def _prox_tilde(fam, i, x, y, g):
    n = fam.n
    a = fam.c1 + 1.0 / g
    d = fam.c2 + 1.0 / g
    R = fam.rows[i - 1]
    xt = x / g
    if i == 1:
        xt[0] += n
    yt = y / g
    w = R.adjoint(-(n / d) * yt[R.rows - 1], xt)
    cc = n * n / d
    bw = R.act(w)
    u = R.adjoint(-cc * bw / (a * (a + cc * R.sqnorm)), w / a)
    v = yt / d
    v[R.rows - 1] += (n / d) * R.act(u)
    return u, v


def _prox_min_convex(fam, i, x, g):
    n = fam.n
    a = fam.c1 + 1.0 / g
    R = fam.rows[i - 1]
    w = x / g
    if i == 1:
        w[0] += fam.c3 * n
    bw = R.act(w)
    return R.adjoint(-n * bw / (a * (a + n * R.sqnorm)), w / a)


def _prox_quad(fam, i, x, g):
    w = x / g
    if i == 1:
        w[0] += fam.lin
    return w / (fam.a + 1.0 / g)


def _prox_bilinear(fam, i, x, y, g):
    L = fam.L
    lin = fam.lin if i == 1 else 0.0
    u = (x - g * L * y + g * g * L * lin) / (1.0 + g * g * L * L)
    v = y + g * (L * u - lin)
    return u, v


# ------------------------------------------------------ Gamma-coupled blocks

def solve_gamma_blocks(w, diag, pairs, s, gcoef, gscale, gmask, tol=1e-12, maxiter=200):
    """Solve diag*u + s*(pair coupling) + gcoef*gscale*Gamma'(gscale*u)*mask = w.

    ``pairs`` lists first coordinates p of coupled pairs (p, p+1), each adding
    s*[[1,-1],[-1,1]]. Pairs are disjoint. The system is the gradient of a
    strongly convex function whenever diag > gcoef*gscale^2*45(sqrt3-1); it is
    solved by damped Newton with per-block backtracking. Blocks with zero
    right-hand side return exact zeros.
    """
    w = np.asarray(w, dtype=float)
    m = w.size
    pairs = np.asarray(pairs, dtype=int)
    partner = np.full(m, -1)
    partner[pairs] = pairs + 1
    partner[pairs + 1] = pairs
    sc = np.zeros(m)
    sc[pairs] = s
    sc[pairs + 1] = s
    paired = partner >= 0
    bid = np.arange(m)
    bid[pairs + 1] = pairs
    singles = np.flatnonzero(~paired)
    seconds = pairs + 1
    gm = gmask.astype(float)

    def grad(u):
        g = diag * u - w + gcoef * gscale * gamma_deriv(gscale * u) * gm
        g[paired] += sc[paired] * (u[paired] - u[partner[paired]])
        return g

    def phi_blocks(u):
        e = 0.5 * diag * u * u - w * u + gcoef * (gamma_value(gscale * u) - gamma_value(0.0)) * gm
        e[pairs] += 0.5 * s * (u[pairs] - u[seconds]) ** 2
        return np.bincount(bid, weights=e, minlength=m)

    def gnorm_blocks(g):
        return np.bincount(bid, weights=g * g, minlength=m)

    scale = max(1.0, float(np.max(np.abs(w))) if m else 1.0)
    u = np.zeros(m)
    g = grad(u)
    for _ in range(maxiter):
        if np.max(np.abs(g)) <= tol * scale:
            return u
        h = diag + sc + gcoef * gscale ** 2 * gamma_second(gscale * u) * gm
        d = np.zeros(m)
        d[singles] = -g[singles] / h[singles]
        if pairs.size:
            hp, hq = h[pairs], h[seconds]
            gp, gq = g[pairs], g[seconds]
            det = hp * hq - s * s
            d[pairs] = -(hq * gp + s * gq) / det
            d[seconds] = -(s * gp + hp * gq) / det
        f0 = phi_blocks(u)
        n0 = gnorm_blocks(g)
        slope = np.bincount(bid, weights=g * d, minlength=m)
        t = np.ones(m)
        todo = np.ones(m, dtype=bool)
        for _ls in range(40):
            un = u + t[bid] * d
            gn = grad(un)
            ok = (phi_blocks(un) <= f0 + 1e-4 * t * slope) | (gnorm_blocks(gn) < n0)
            todo &= ~ok
            if not todo.any():
                break
            t[todo] *= 0.5
        u = u + t[bid] * d
        g = grad(u)
    if np.max(np.abs(g)) <= 1e-10 * scale:
        return u
    raise RuntimeError("Gamma-coupled prox did not converge")


def _prox_hat(fam, i, x, y, g):
    n, m = fam.n, fam.m
    c = fam.c1 + 1.0 / g
    R = fam.rows[i - 1]
    yh = y / g
    if i == 1:
        yh[0] -= n
    w = R.adjoint(-(n / c) * yh[R.rows], x / g)
    s = n * n / c
    diag = np.full(m, 1.0 / g)
    first = R.rows >= 1
    pairs = R.rows[first] - 1
    if np.any(R.rows == 0):
        diag[0] += s * fam.omega ** 2
    mask = np.ones(m, dtype=bool)
    mask[-1] = False
    u = solve_gamma_blocks(w, diag, pairs, s, fam.c2, fam.c3, mask)
    v = yh / c
    v[R.rows] += (n / c) * R.act(u)
    return u, v


def _prox_min_nonconvex(fam, i, x, g):
    n, m = fam.n, fam.m
    R = fam.rows[i - 1]
    w = x / g
    if i == 1:
        w[0] += fam.c3 * n
    diag = np.full(m, fam.c1 + 1.0 / g)
    rows = R.rows
    pairs = rows[(rows >= 1) & (rows <= m - 1)] - 1
    if np.any(rows == 0):
        diag[0] += n * fam.omega ** 2
    if np.any(rows == m):
        diag[m - 1] += n * fam.zeta ** 2
    mask = np.ones(m, dtype=bool)
    mask[-1] = False
    return solve_gamma_blocks(w, diag, pairs, float(n), fam.c2, 1.0, mask)


# ------------------------------------------------------------------ dispatch

def _check_gamma(fam, g):
    if not g > 0:
        raise GammaRangeError("gamma must be positive")
    if g >= fam.gamma_max:
        raise GammaRangeError(f"gamma = {g:.6g} must be below {fam.gamma_max:.6g}")


def prox_min(fam, i, x, g):
    """Prox of one component of a minimization family."""
    if isinstance(fam, Scaled):
        b = fam.beta
        return b * prox_min(fam.base, i, x / b, g * fam.curv)
    if isinstance(fam, QuadFamily):
        return _prox_quad(fam, i, x, g)
    if isinstance(fam, MinFamily):
        _check_gamma(fam, g)
        if fam.convex:
            return _prox_min_convex(fam, i, x, g)
        return _prox_min_nonconvex(fam, i, x, g)
    raise TypeError(f"no prox for {type(fam).__name__}")


def prox_saddle(fam, i, x, y, g):
    """Saddle prox: argmin_u argmax_v f_i(u,v) + |u-x|^2/2g - |v-y|^2/2g."""
    if isinstance(fam, Scaled):
        b = fam.beta
        u, v = prox_saddle(fam.base, i, x / b, y / b, g * fam.curv)
        return b * u, b * v
    if isinstance(fam, Separable):
        return prox_min(fam.xpart, i, x, g), prox_min(fam.ypart, i, y, g)
    if isinstance(fam, TildeFamily):
        return _prox_tilde(fam, i, x, y, g)
    if isinstance(fam, HatFamily):
        _check_gamma(fam, g)
        return _prox_hat(fam, i, x, y, g)
    if isinstance(fam, BilinearFamily):
        return _prox_bilinear(fam, i, x, y, g)
    raise TypeError(f"no prox for {type(fam).__name__}")


def _base_of(fam):
    while isinstance(fam, Scaled):
        fam = fam.base
    return fam


def _has_gamma(fam):
    if isinstance(fam, Separable):
        return _has_gamma(fam.xpart) or _has_gamma(fam.ypart)
    b = _base_of(fam)
    return isinstance(b, HatFamily) or (isinstance(b, MinFamily) and not b.convex)


def prox_quadratic(instance, i, x, y, gamma):
    """Closed-form prox for kinds without the Gamma potential."""
    if _has_gamma(instance.model):
        raise TypeError("instance has a Gamma-coupled component; use prox_gamma_coupled")
    return _prox(instance, i, x, y, gamma)


def prox_gamma_coupled(instance, i, x, y, gamma):
    """Newton-based prox for the nonconvex minimax kinds."""
    if not _has_gamma(instance.model) or not instance.is_minimax:
        raise TypeError("instance is not a Gamma-coupled minimax kind")
    return _prox(instance, i, x, y, gamma)


def prox_minimization(instance, i, x, gamma):
    if instance.is_minimax:
        raise TypeError("instance is a minimax kind")
    _check_gamma(instance.model, gamma)
    return prox_min(instance.model, i, np.asarray(x, dtype=float), gamma)


def _prox(instance, i, x, y, gamma):
    fam = instance.model
    _check_gamma(fam, gamma)
    x = np.asarray(x, dtype=float)
    if instance.is_minimax:
        return prox_saddle(fam, i, x, np.asarray(y, dtype=float), gamma)
    return prox_min(fam, i, x, gamma), _EMPTY


def component_value(instance, i, x, y=None):
    fam = instance.model
    return fam.value(i, x, y) if instance.is_minimax else fam.value(i, x)


def component_grad(instance, i, x, y=None):
    fam = instance.model
    if instance.is_minimax:
        return fam.grad(i, x, y)
    return fam.grad(i, x), _EMPTY


def aggregate_value(instance, x, y=None):
    fam = instance.model
    return fam.agg_value(x, y) if instance.is_minimax else fam.agg_value(x)


def aggregate_grad(instance, x, y=None):
    fam = instance.model
    if instance.is_minimax:
        return fam.agg_grad(x, y)
    return fam.agg_grad(x), _EMPTY


def pifo(instance, i, x, y=None, gamma=None, counter=None):
    """One oracle call for component i (1-based): value, gradient, prox, projections.

    The prox leg is skipped (returned as None) when gamma is None; the call is
    still counted once.
    """
    if not 1 <= i <= instance.n:
        raise IndexError(f"component {i} outside 1..{instance.n}")
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.dim_x,):
        raise ValueError("x has the wrong dimension")
    if instance.is_minimax:
        y = np.asarray(y, dtype=float)
        if y.shape != (instance.dim_y,):
            raise ValueError("y has the wrong dimension")
    else:
        y = _EMPTY
    if gamma is not None:
        px, py = _prox(instance, i, x, y, gamma)
    else:
        px = py = None
    val = component_value(instance, i, x, y)
    gx, gy = component_grad(instance, i, x, y)
    fe = instance.feasible
    out = PifoResponse(val, gx, gy, px, py, project_ball(x, fe.Rx),
                       project_ball(y, fe.Ry) if instance.is_minimax else _EMPTY)
    if counter is not None:
        counter.tick(i)
    return out

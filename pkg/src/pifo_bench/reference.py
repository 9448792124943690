"""Reference solutions: saddle points, minimizers, envelopes, gaps and lower-bound curves."""

from dataclasses import dataclass, field
import math
import weakref

import numpy as np
from scipy.optimize import brentq

from . import instances as inst_mod
from . import instances_min as imin


class PreconditionError(ValueError):
    """A parameter choice outside the range where a bound or recipe applies."""


@dataclass(frozen=True)
class ReferencePoint:
    x_star: np.ndarray
    y_star: np.ndarray
    value: float
    residual: float  # gradient norm at the point divided by the gradient norm at 0


@dataclass(frozen=True)
class QuadraticForm:
    """f(x, y) = const + x'Px/2 - a'x + y'Kx - y'Qy/2 - c'y (y-part empty if minimization)."""

    P: np.ndarray
    a: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    c: np.ndarray
    const: float


_CONVEX_QUADRATIC = {"TILDE_R", "SCSC", "CSC", "CC", "SCSC_AVG", "CSC_AVG", "CC_AVG",
                     "SC", "C", "SC_AVG", "C_AVG", "AUX_G_SCSC", "AUX_G_CSC", "AUX_H_CSC",
                     "AUX_H_SCSC_1D", "AUX_H_CC_1D", "AUX_G_SC_1D"}
_NONCONVEX = {"HAT_R", "NCSC", "NCSC_AVG", "NC", "NC_AVG"}

_forms = weakref.WeakKeyDictionary()
_ycurv = weakref.WeakKeyDictionary()


def _is_quadratic(instance):
    if instance.kind == "R_BASE":
        return instance.model.convex
    return instance.kind in _CONVEX_QUADRATIC


def quadratic_form(instance):
    """Coefficients of a quadratic aggregate, read off exact gradient probes."""
    if not _is_quadratic(instance):
        raise TypeError(f"{instance.kind} is not a convex quadratic kind")
    if instance in _forms:
        return _forms[instance]
    f = instance.model
    dx, dy = instance.dim_x, instance.dim_y
    zx, zy = np.zeros(dx), np.zeros(dy)
    if instance.is_minimax:
        gx0, gy0 = f.agg_grad(zx, zy)
        P = np.empty((dx, dx))
        K = np.empty((dy, dx))
        Q = np.empty((dy, dy))
        for j in range(dx):
            e = np.zeros(dx)
            e[j] = 1.0
            gx, gy = f.agg_grad(e, zy)
            P[:, j] = gx - gx0
            K[:, j] = gy - gy0
        for j in range(dy):
            e = np.zeros(dy)
            e[j] = 1.0
            Q[:, j] = gy0 - f.agg_grad(zx, e)[1]
        form = QuadraticForm(0.5 * (P + P.T), -gx0, K, 0.5 * (Q + Q.T), -gy0,
                             f.agg_value(zx, zy))
    else:
        g0 = f.agg_grad(zx)
        P = np.empty((dx, dx))
        for j in range(dx):
            e = np.zeros(dx)
            e[j] = 1.0
            P[:, j] = f.agg_grad(e) - g0
        form = QuadraticForm(0.5 * (P + P.T), -g0, np.zeros((0, dx)), np.zeros((0, 0)),
                             np.zeros(0), f.agg_value(zx))
    _forms[instance] = form
    return form


def max_concave_quadratic(g, H, R=math.inf):
    """max g'z - z'Hz/2 over |z| <= R for symmetric PSD H. Returns (value, z).

    Interior maximizer if one is feasible, otherwise the boundary solution
    z = (H + nu I)^{-1} g with nu > 0 found on the monotone secular equation.
    """
    g = np.asarray(g, dtype=float)
    if g.size == 0:
        return 0.0, g.copy()
    lam, V = np.linalg.eigh(np.atleast_2d(H))
    lam = np.maximum(lam, 0.0)
    w = V.T @ g
    gn = np.linalg.norm(g)
    if gn == 0.0:
        return 0.0, np.zeros_like(g)
    tol = 1e-12 * max(1.0, float(lam.max()))
    flat = lam <= tol
    unbounded = np.any(np.abs(w[flat]) > 1e-12 * gn)
    if not unbounded:
        z0 = np.where(flat, 0.0, w / np.where(flat, 1.0, lam))
        if np.linalg.norm(z0) <= R:
            return float(w @ z0 - 0.5 * np.sum(lam * z0 * z0)), V @ z0
    if not np.isfinite(R):
        return math.inf, None

    def excess(nu):
        return np.linalg.norm(w / (lam + nu)) - R

    hi = gn / R
    while excess(hi) > 0:  # rounding can leave the analytic bracket a hair short
        hi *= 1 + 1e-12
    lo = hi * 1e-300 if unbounded else 0.0
    lo = max(lo, np.finfo(float).tiny)
    if excess(lo) <= 0:  # interior solution only up to rounding
        nu = lo
    else:
        nu = brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    z = w / (lam + nu)
    return float(w @ z - 0.5 * np.sum(lam * z * z)), V @ z


def _convex_check(instance):
    if instance.kind in _NONCONVEX or (instance.kind == "R_BASE" and not instance.model.convex):
        raise TypeError(f"{instance.kind} is nonconvex; use grad_phi for stationarity")


def phi_eval(instance, x):
    """phi(x) = max over the y-ball of f(x, y); f itself for minimization kinds."""
    x = np.asarray(x, dtype=float)
    if instance.kind in ("NCSC", "NCSC_AVG", "HAT_R"):
        return _phi_ncsc(instance, x)[0]
    if not instance.is_minimax:
        return instance.model.agg_value(x)
    F = quadratic_form(instance)
    inner, _ = max_concave_quadratic(F.K @ x - F.c, F.Q, instance.feasible.Ry)
    return float(F.const + 0.5 * x @ F.P @ x - F.a @ x + inner)


def psi_eval(instance, y):
    """psi(y) = min over the x-ball of f(x, y)."""
    if not instance.is_minimax:
        raise TypeError("psi is defined for minimax kinds only")
    _convex_check(instance)
    y = np.asarray(y, dtype=float)
    F = quadratic_form(instance)
    inner, _ = max_concave_quadratic(F.a - F.K.T @ y, F.P, instance.feasible.Rx)
    return float(F.const - 0.5 * y @ F.Q @ y - F.c @ y - inner)


def primal_dual_gap(instance, x, y):
    """phi(x) - psi(y) for convex-concave kinds."""
    _convex_check(instance)
    return phi_eval(instance, x) - psi_eval(instance, y)


def optimal_value(instance):
    """min over the x-ball of f for convex minimization kinds."""
    if instance.is_minimax:
        raise TypeError("use primal_dual_gap for minimax kinds")
    _convex_check(instance)
    F = quadratic_form(instance)
    inner, _ = max_concave_quadratic(F.a, F.P, instance.feasible.Rx)
    return float(F.const - inner)


def suboptimality(instance, x):
    return instance.model.agg_value(np.asarray(x, dtype=float)) - optimal_value(instance)


def _y_curvature(instance):
    """Q such that grad_y f(x, y) = grad_y f(x, 0) - Q y (f quadratic in y)."""
    if instance in _ycurv:
        return _ycurv[instance]
    f = instance.model
    dx, dy = instance.dim_x, instance.dim_y
    zx = np.zeros(dx)
    gy0 = f.agg_grad(zx, np.zeros(dy))[1]
    Q = np.empty((dy, dy))
    for j in range(dy):
        e = np.zeros(dy)
        e[j] = 1.0
        Q[:, j] = gy0 - f.agg_grad(zx, e)[1]
    Q = 0.5 * (Q + Q.T)
    _ycurv[instance] = Q
    return Q


def _phi_ncsc(instance, x):
    f = instance.model
    Q = _y_curvature(instance)
    gy0 = f.agg_grad(x, np.zeros(instance.dim_y))[1]
    y = np.linalg.solve(Q, gy0)
    return f.agg_value(x, y), f.agg_grad(x, y)[0], y


def grad_phi(instance, x):
    """Gradient of the envelope max_y f(x, y) (Danskin); plain gradient for NC kinds."""
    x = np.asarray(x, dtype=float)
    if instance.kind in ("NCSC", "NCSC_AVG", "HAT_R"):
        return _phi_ncsc(instance, x)[1]
    if instance.kind in ("NC", "NC_AVG", "R_BASE"):
        return instance.model.agg_grad(x)
    raise TypeError(f"grad_phi is for nonconvex kinds, got {instance.kind}")


def stationarity(instance, x):
    return float(np.linalg.norm(grad_phi(instance, x)))


def _relative_residual(instance, x, y):
    f = instance.model
    if instance.is_minimax:
        g = np.concatenate(f.agg_grad(x, y))
        g0 = np.concatenate(f.agg_grad(np.zeros_like(x), np.zeros_like(y)))
    else:
        g = f.agg_grad(x)
        g0 = f.agg_grad(np.zeros_like(x))
    return float(np.linalg.norm(g) / np.linalg.norm(g0))


def saddle_point_scsc(instance):
    if instance.kind not in ("SCSC", "SCSC_AVG"):
        raise TypeError("saddle_point_scsc needs an SCSC kind")
    p = instance.params
    L, mu_x, mu_y, n, m = p["L"], p["mu_x"], p["mu_y"], p["n"], p["m"]
    k = inst_mod.scsc_constants(L, mu_x, mu_y, p["Rx"], p["Ry"], n)
    q, beta, alpha = k["q"], k["beta"], k["alpha"]
    powers = q ** np.arange(1, m + 1)
    x = beta * mu_y / ((1 - q) * k["xi"]) * powers
    y = beta * powers.copy()
    y[-1] *= math.sqrt((alpha + 1) / 2)
    val = instance.model.agg_value(x, y)
    return ReferencePoint(x, y, val, _relative_residual(instance, x, y))


def minimizer_closed_form(instance):
    kind, p = instance.kind, instance.params
    if kind in ("SC", "SC_AVG"):
        k = imin.sc_constants(p["L"], p["mu"], p["R"], p["n"])
        a, q = k["alpha"], k["q"]
        x = 2 * p["R"] * math.sqrt(a) / (a - 1) * q ** np.arange(1, p["m"] + 1)
    elif kind in ("C", "C_AVG"):
        k = imin.c_constants(p["L"], p["R"], p["n"], p["m"])
        x = 2 * k["xi"] / p["L"] * np.arange(p["m"], 0, -1, dtype=float)
    elif kind == "AUX_G_SC_1D":
        x = np.array([p["R"]])
    else:
        raise TypeError(f"no closed-form minimizer for {kind}")
    return ReferencePoint(x, np.zeros(0), instance.model.agg_value(x),
                          _relative_residual(instance, x, None))


def optimal_value_printed(instance):
    """Printed optimal values for the SC and C kinds."""
    p = instance.params
    if instance.kind in ("SC", "SC_AVG"):
        a = imin.sc_constants(p["L"], p["mu"], p["R"], p["n"])["alpha"]
        return -p["mu"] * p["R"] ** 2 * a / (a + 1)
    if instance.kind in ("C", "C_AVG"):
        xi = imin.c_constants(p["L"], p["R"], p["n"], p["m"])["xi"]
        return -p["m"] * xi ** 2 / (p["n"] * p["L"])
    raise TypeError(f"no printed optimal value for {instance.kind}")


def restricted_gap(instance, k):
    """Printed value (exact for C, lower bound otherwise) of the gap restricted to F_k."""
    p, kind = instance.params, instance.kind
    m = p["m"]
    if not 1 <= k <= m - 1:
        raise ValueError(f"k must lie in 1..{m - 1}")
    n, L = p["n"], p["L"]
    if kind in ("SCSC", "SCSC_AVG"):
        c = inst_mod.scsc_constants(L, p["mu_x"], p["mu_y"], p["Rx"], p["Ry"], n)
        return c["beta"] ** 2 * c["xi"] ** 2 / ((c["alpha"] + 1) * p["mu_x"]) * c["q"] ** (2 * k)
    if kind in ("CSC", "CSC_AVG"):
        beta = inst_mod.csc_constants(L, p["mu_y"], p["Rx"], p["Ry"], n, m)["beta"]
        return (-k * p["mu_y"] * beta ** 2 / 2
                + p["Rx"] * beta * math.sqrt(L * L - 2 * p["mu_y"] ** 2) / (2 * n * math.sqrt(k + 1)))
    if kind in ("CC", "CC_AVG"):
        return L * p["Rx"] * p["Ry"] / (2 * n * math.sqrt(m * (k + 1)))
    if kind in ("SC", "SC_AVG"):
        c = imin.sc_constants(L, p["mu"], p["R"], n)
        a = c["alpha"]
        return p["mu"] * p["R"] ** 2 * a / (a + 1) * c["q"] ** (2 * k)
    if kind in ("C", "C_AVG"):
        xi = imin.c_constants(L, p["R"], n, m)["xi"]
        return xi ** 2 * (m - k) / (n * L)
    raise TypeError(f"no restricted-gap formula for {kind}")


# ------------------------------------------------------------ lower bounds

@dataclass(frozen=True)
class LowerBoundQuery:
    case: str
    params: dict = field(default_factory=dict)
    eps: float = 1e-3


@dataclass(frozen=True)
class ChainBudget:
    m: int
    M: int
    N: float


def budget_N(n, M):
    """Query budget n(M+1)/4 below which the expected gap stays above eps."""
    return n * (M + 1) / 4.0


def _require(cond, msg):
    if not cond:
        raise PreconditionError(msg)


def _eps_at_most(eps, bound, text):
    _require(eps <= bound, f"eps = {eps:.6g} exceeds {text} = {bound:.6g}")


def _lifted(case, p):
    """Lifted per-component L for the average-smooth convex rows."""
    base = case[:-4]
    Lp, n = p["L_prime"], p["n"]
    if base in ("SCSC", "CSC", "SC"):
        _require(n >= 4, "average-smooth lifts need n >= 4")
    mu = {"SCSC": p.get("mu_x"), "CSC": p.get("mu_y"), "SC": p.get("mu")}.get(base, 0.0)
    return inst_mod.lifted_L(base, Lp, mu or 0.0, n)


def check_curve_preconditions(case, p, eps):
    """Validate a table row's parameter range, quoting the violated threshold."""
    n = p["n"]
    _require(eps > 0, "eps must be positive")
    _require(n >= 2, "n must be at least 2")
    if case == "SCSC":
        L, mx, my, Rx, Ry = p["L"], p["mu_x"], p["mu_y"], p["Rx"], p["Ry"]
        kx, ky = L / mx, L / my
        _require(kx >= 2 and ky >= 2 and kx <= ky, "need 2 <= kappa_x <= kappa_y")
        _eps_at_most(eps, min(n * n * mx * Rx ** 2 / (1600 * kx * ky), my * Ry ** 2 / 1600,
                              L * Rx ** 2 / 4),
                     "min{n^2 mu_x Rx^2/(1600 kx ky), mu_y Ry^2/1600, L Rx^2/4}")
    elif case == "CSC":
        L, my, Rx, Ry = p["L"], p["mu_y"], p["Rx"], p["Ry"]
        _require(L / my >= 2, "need L/mu_y >= 2")
        _eps_at_most(eps, min(L * Rx ** 2 / 4, my * Ry ** 2 / 36),
                     "min{L Rx^2/4, mu_y Ry^2/36}")
    elif case == "CC":
        _eps_at_most(eps, p["L"] / 4 * min(p["Rx"] ** 2, p["Ry"] ** 2),
                     "L/4 min{Rx^2, Ry^2}")
    elif case == "NCSC":
        L, mx, my = p["L"], p["mu_x"], p["mu_y"]
        a = inst_mod.ncsc_constants(L, mx, my, p["Delta"], eps, n)["alpha"]
        _eps_at_most(eps * eps, p["Delta"] * L * L * a / (27216 * n * n * my),
                     "Delta L^2 alpha/(27216 n^2 mu_y) [for eps^2]")
    elif case == "SCSC_AVG":
        Lp, mx, my, Rx, Ry = p["L_prime"], p["mu_x"], p["mu_y"], p["Rx"], p["Ry"]
        _require(n >= 4, "need n >= 4")
        kx, ky = Lp / mx, Lp / my
        _require(kx >= 2 and ky >= 2 and kx <= ky, "need 2 <= kappa'_x <= kappa'_y")
        _eps_at_most(eps, min(n * mx * Rx ** 2 / (800 * kx * ky), my * Ry ** 2 / 1600,
                              Lp * Rx ** 2 / 4),
                     "min{n mu_x Rx^2/(800 k'x k'y), mu_y Ry^2/1600, L' Rx^2/4}")
    elif case == "CSC_AVG":
        Lp, my = p["L_prime"], p["mu_y"]
        _require(n >= 4, "need n >= 4")
        _require(Lp / my >= 2, "need L'/mu_y >= 2")
        _eps_at_most(eps, min(Lp * p["Rx"] ** 2 / 4, my * p["Ry"] ** 2 / 36),
                     "min{L' Rx^2/4, mu_y Ry^2/36}")
    elif case == "CC_AVG":
        _eps_at_most(eps, p["L_prime"] / 4 * min(p["Rx"] ** 2, p["Ry"] ** 2),
                     "L'/4 min{Rx^2, Ry^2}")
    elif case == "NCSC_AVG":
        Lp, mx, my = p["L_prime"], p["mu_x"], p["mu_y"]
        a = inst_mod.ncsc_avg_constants(Lp, mx, my, p["Delta"], eps, n)["alpha"]
        _eps_at_most(eps * eps, p["Delta"] * Lp * Lp * a / (435456 * n * my),
                     "Delta L'^2 alpha/(435456 n mu_y) [for eps^2]")
    elif case == "SC":
        _require(p["L"] / p["mu"] >= 2, "need L/mu >= 2")
        _eps_at_most(eps, p["L"] * p["R"] ** 2 / 4, "L R^2/4")
    elif case == "C":
        _eps_at_most(eps, p["L"] * p["R"] ** 2 / 4, "L R^2/4")
    elif case == "NC":
        a = imin.nc_constants(p["L"], p["mu"], p["Delta"], eps, n)["alpha"]
        _eps_at_most(eps * eps, p["Delta"] * p["L"] * a / (81648 * n),
                     "Delta L alpha/(81648 n) [for eps^2]")
    elif case == "SC_AVG":
        _require(n >= 4, "need n >= 4")
        _require(p["L_prime"] / p["mu"] >= 2, "need L'/mu >= 2")
        _eps_at_most(eps, p["L_prime"] * p["R"] ** 2 / 4, "L' R^2/4")
    elif case == "C_AVG":
        _eps_at_most(eps, p["L_prime"] * p["R"] ** 2 / 4, "L' R^2/4")
    elif case == "NC_AVG":
        a = imin.nc_avg_constants(p["L_prime"], p["mu"], p["Delta"], eps, n)["alpha"]
        _eps_at_most(eps * eps, p["Delta"] * p["L_prime"] * a / (435456 * math.sqrt(n)),
                     "Delta L' alpha/(435456 sqrt(n)) [for eps^2]")
    else:
        raise ValueError(f"unknown case {case}")


def lower_bound_curve(query, check=True):
    """Constant-free value of the lower-bound expression for one table row.

    With check=False the expression is evaluated even where the bound itself
    does not apply.
    """
    case, p, eps = query.case, query.params, query.eps
    if check:
        check_curve_preconditions(case, p, eps)
    n = p["n"]
    rn, n34 = math.sqrt(n), n ** 0.75
    log = math.log(1.0 / eps)
    if case == "SCSC":
        return math.sqrt((n + p["L"] / p["mu_x"]) * (n + p["L"] / p["mu_y"])) * log
    if case == "CSC":
        L, my, Rx = p["L"], p["mu_y"], p["Rx"]
        return (n + Rx * math.sqrt(n * L / eps) + Rx * L / math.sqrt(my * eps)
                + math.sqrt(n * L / my) * log)
    if case == "CC":
        L, Rx, Ry = p["L"], p["Rx"], p["Ry"]
        return n + L * Rx * Ry / eps + (Rx + Ry) * math.sqrt(n * L / eps)
    if case == "NCSC":
        L, mx, my = p["L"], p["mu_x"], p["mu_y"]
        return n + p["Delta"] * L / eps ** 2 * min(math.sqrt(L / my), math.sqrt(abs(mx) / my))
    if case == "SCSC_AVG":
        Lp = p["L_prime"]
        return rn * math.sqrt((rn + Lp / p["mu_x"]) * (rn + Lp / p["mu_y"])) * log
    if case == "CSC_AVG":
        Lp, my, Rx = p["L_prime"], p["mu_y"], p["Rx"]
        return (n + Rx * n34 * math.sqrt(Lp / eps) + rn * Rx * Lp / math.sqrt(my * eps)
                + n34 * math.sqrt(Lp / my) * log)
    if case == "CC_AVG":
        Lp, Rx, Ry = p["L_prime"], p["Rx"], p["Ry"]
        return n + rn * Lp * Rx * Ry / eps + (Rx + Ry) * n34 * math.sqrt(Lp / eps)
    if case == "NCSC_AVG":
        Lp, mx, my = p["L_prime"], p["mu_x"], p["mu_y"]
        return n + p["Delta"] * rn * Lp / eps ** 2 * min(math.sqrt(Lp / my),
                                                          math.sqrt(abs(mx) / my))
    if case == "SC":
        kappa = p["L"] / p["mu"]
        if kappa >= n / 2 + 1:
            return (n + math.sqrt(kappa * n)) * log
        return n + n / (1 + max(math.log(n / kappa), 0.0)) * log
    if case == "C":
        return n + p["R"] * math.sqrt(n * p["L"] / eps)
    if case == "NC":
        a = imin.nc_constants(p["L"], p["mu"], p["Delta"], eps, n)["alpha"]
        return n + p["Delta"] * p["L"] * math.sqrt(a) / eps ** 2
    if case == "SC_AVG":
        kp = p["L_prime"] / p["mu"]
        if kp >= rn:
            return (n + n34 * math.sqrt(kp)) * log
        return n + n / (1 + max(math.log(rn / kp), 0.0)) * log
    if case == "C_AVG":
        return n + p["R"] * n34 * math.sqrt(p["L_prime"] / eps)
    if case == "NC_AVG":
        a = imin.nc_avg_constants(p["L_prime"], p["mu"], p["Delta"], eps, n)["alpha"]
        return n + p["Delta"] * p["L_prime"] * math.sqrt(n * a) / eps ** 2
    raise ValueError(f"unknown case {case}")


def _finish(n, m, M):
    _require(1 <= M < m, f"recipe gives M = {M}, m = {m}; need 1 <= M < m")
    return ChainBudget(int(m), int(M), budget_N(n, M))


def select_m_N(case, params, eps):
    """Dimension m, reachable depth M and budget N = n(M+1)/4 of a construction recipe."""
    p = dict(params)
    n = p["n"]
    _require(n >= 2, "n must be at least 2")
    _require(eps > 0, "eps must be positive")
    if case.endswith("_AVG") and case[:-4] in ("SCSC", "CSC", "CC", "SC", "C"):
        p["L"] = _lifted(case, p)
        case = case[:-4]
    if case == "SCSC":
        L, mx, my, Rx, Ry = p["L"], p["mu_x"], p["mu_y"], p["Rx"], p["Ry"]
        kx, ky = L / mx, L / my
        _require(ky >= kx >= math.sqrt(n * n + 2), "need kappa_y >= kappa_x >= sqrt(n^2 + 2)")
        _eps_at_most(eps, min(n * n * mx * Rx ** 2 / (kx * ky), my * Ry ** 2) / 1600,
                     "min{n^2 mu_x Rx^2/(kx ky), mu_y Ry^2}/1600")
        c = inst_mod.scsc_constants(L, mx, my, Rx, Ry, n)
        m = math.floor(c["alpha"] / 4 * math.log(max(mx * Rx ** 2, my * Ry ** 2) / (9 * eps))) + 1
        M = math.floor(math.log(9 * (c["alpha"] + 1) * mx * eps / (c["beta"] ** 2 * c["xi"] ** 2))
                       / (2 * math.log(c["q"])))
        return _finish(n, m, M)
    if case == "CSC":
        L, my, Rx, Ry = p["L"], p["mu_y"], p["Rx"], p["Ry"]
        _require(L / my >= 2, "need L/mu_y >= 2")
        _eps_at_most(eps, min(L * L * Rx ** 2 / (2592 * n * n * my), my * Ry ** 2 / 36),
                     "min{L^2 Rx^2/(2592 n^2 mu_y), mu_y Ry^2/36}")
        m = math.floor(Rx / (6 * n) * math.sqrt((L * L - 2 * my * my) / (my * eps))) - 2
        return _finish(n, m, m // 2)
    if case == "CC":
        L, Rx, Ry = p["L"], p["Rx"], p["Ry"]
        _eps_at_most(eps, L * Rx * Ry / (36 * math.sqrt(2) * n), "L Rx Ry/(36 sqrt(2) n)")
        m = math.floor(L * Rx * Ry / (9 * math.sqrt(2) * n * eps)) - 1
        return _finish(n, m, (m - 1) // 2)
    if case == "SC":
        L, mu, R = p["L"], p["mu"], p["R"]
        _require(L / mu >= 2, "need L/mu >= 2")
        c = imin.sc_constants(L, mu, R, n)
        a, q = c["alpha"], c["q"]
        _eps_at_most(eps, mu * R * R / 18 * q * q, "mu R^2 q^2/18")
        m = math.floor(a / 4 * math.log(mu * R * R / (9 * eps))) + 1
        delta = mu * R * R * a / (a + 1)
        M = math.floor(math.log(9 * eps / delta) / (2 * math.log(q)))
        return _finish(n, m, M)
    if case == "C":
        L, R = p["L"], p["R"]
        _eps_at_most(eps, R * R * L / (384 * n), "R^2 L/(384 n)")
        m = math.floor(math.sqrt(R * R * L / (24 * n * eps))) - 1
        return _finish(n, m, (m - 1) // 2)
    if case == "NCSC":
        L, my = p["L"], p["mu_y"]
        _require(L / my >= 4, "need L/mu_y >= 4")
        c = inst_mod.ncsc_constants(L, p["mu_x"], my, p["Delta"], eps, n)
        _eps_at_most(eps * eps, p["Delta"] * L * L * c["alpha"] / (435456 * n * n * my),
                     "Delta L^2 alpha/(435456 n^2 mu_y) [for eps^2]")
        return _finish(n, c["m"], c["m"] - 1)
    if case == "NCSC_AVG":
        Lp, my = p["L_prime"], p["mu_y"]
        _require(Lp / my >= 4, "need L'/mu_y >= 4")
        c = inst_mod.ncsc_avg_constants(Lp, p["mu_x"], my, p["Delta"], eps, n)
        _eps_at_most(eps * eps, p["Delta"] * Lp * Lp * c["alpha"] / (6967296 * n * my),
                     "Delta L'^2 alpha/(6967296 n mu_y) [for eps^2]")
        return _finish(n, c["m"], c["m"] - 1)
    if case == "NC":
        c = imin.nc_constants(p["L"], p["mu"], p["Delta"], eps, n)
        _eps_at_most(eps * eps, p["Delta"] * p["L"] * c["alpha"] / (81648 * n),
                     "Delta L alpha/(81648 n) [for eps^2]")
        return _finish(n, c["m"], c["m"] - 1)
    if case == "NC_AVG":
        c = imin.nc_avg_constants(p["L_prime"], p["mu"], p["Delta"], eps, n)
        _eps_at_most(eps * eps, p["Delta"] * p["L_prime"] * c["alpha"] / (435456 * math.sqrt(n)),
                     "Delta L' alpha/(435456 sqrt(n)) [for eps^2]")
        return _finish(n, c["m"], c["m"] - 1)
    raise ValueError(f"unknown case {case}")

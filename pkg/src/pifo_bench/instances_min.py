"""Factories for the finite-sum minimization constructions."""

import math

from .families import MinFamily, QuadFamily, Scaled
from .instances import BaseParams, Feasible, Scale, _check_n, build
from .linalg import BMatrixSpec


def make_r(m, omega, zeta, c, n, probs=None):
    """Unscaled base family; convex mode needs c2 = 0, nonconvex mode c1 = 0."""
    _check_n(n)
    c1, c2, c3 = c
    BMatrixSpec(m, omega, zeta).check_instance_range()
    fam = MinFamily(m, omega, zeta, c1, c2, c3, n)
    return build("R_BASE", fam, base=BaseParams(m, omega, zeta, (c1, c2, c3)), probs=probs,
                 params=dict(m=m, omega=omega, zeta=zeta, c=[c1, c2, c3], n=n))


def sc_constants(L, mu, R, n):
    kappa = L / mu
    alpha = math.sqrt(2.0 * (kappa - 1.0) / n + 1.0)
    return dict(alpha=alpha, q=(alpha - 1) / (alpha + 1),
                c=(2.0 * n / (kappa - 1.0), 0.0, 1.0),
                lam=2.0 * mu * R * R * alpha * n / (kappa - 1.0),
                beta=2.0 * R * math.sqrt(alpha) * n / (kappa - 1.0),
                zeta=math.sqrt(2.0 / (alpha + 1.0)))


def make_sc(L, mu, R, n, m, probs=None):
    _check_n(n)
    if m < 2:
        raise ValueError("m must be at least 2")
    if mu <= 0 or L / mu < 2:
        raise ValueError("need mu > 0 and L/mu >= 2")
    k = sc_constants(L, mu, R, n)
    fam = Scaled(MinFamily(m, 0.0, k["zeta"], *k["c"], n), k["lam"], k["beta"])
    return build("SC", fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m, 0.0, k["zeta"], k["c"], k["alpha"]),
                 feasible=Feasible(R), probs=probs,
                 params=dict(L=L, mu=mu, R=R, n=n, m=m))


def c_constants(L, R, n, m):
    return dict(lam=3.0 * L * R * R / (2.0 * n * (m + 1) ** 3),
                beta=math.sqrt(3.0) * R / (m + 1) ** 1.5,
                xi=math.sqrt(3.0) / 2.0 * R * L / (m + 1) ** 1.5)


def make_c(L, R, n, m, probs=None):
    _check_n(n)
    if m < 2:
        raise ValueError("m must be at least 2")
    k = c_constants(L, R, n, m)
    fam = Scaled(MinFamily(m, 0.0, 1.0, 0.0, 0.0, 1.0, n), k["lam"], k["beta"])
    return build("C", fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m, 0.0, 1.0, (0.0, 0.0, 1.0)),
                 feasible=Feasible(R), probs=probs, params=dict(L=L, R=R, n=n, m=m))


def nc_constants(L, mu, Delta, eps, n):
    alpha = min(1.0, (math.sqrt(3) + 1) * n * mu / (30.0 * L), n / 180.0)
    lam = 3888.0 * n * eps * eps / (L * alpha ** 1.5)
    return dict(alpha=alpha, c=(0.0, alpha, math.sqrt(alpha)), lam=lam,
                beta=math.sqrt(3.0 * lam * n / L),
                m=math.floor(Delta * L * math.sqrt(alpha) / (40824.0 * n * eps * eps)))


def nc_avg_constants(L_prime, mu, Delta, eps, n):
    rn = math.sqrt(n)
    alpha = min(1.0, 8 * (math.sqrt(3) + 1) * rn * mu / (45.0 * L_prime), math.sqrt(n / 270.0))
    lam = 20736.0 * rn * eps * eps / (L_prime * alpha ** 1.5)
    return dict(alpha=alpha, c=(0.0, alpha, math.sqrt(alpha)), lam=lam,
                beta=4.0 * math.sqrt(lam * rn / L_prime),
                m=math.floor(Delta * L_prime * math.sqrt(alpha) / (217728.0 * rn * eps * eps)))


def _make_nc_scaled(kind, k, params, probs):
    m = k["m"]
    if m < 2:
        raise ValueError(f"eps too large: dimension parameter m = {m} < 2")
    omega = k["alpha"] ** 0.25
    fam = Scaled(MinFamily(m + 1, omega, 0.0, *k["c"], params["n"]), k["lam"], k["beta"])
    return build(kind, fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m + 1, omega, 0.0, k["c"], k["alpha"]),
                 probs=probs, params=params)


def make_nc(L, mu, Delta, eps, n, probs=None):
    _check_n(n)
    k = nc_constants(L, mu, Delta, eps, n)
    bound = Delta * L * k["alpha"] / (81648.0 * n)
    if eps * eps > bound:
        raise ValueError(f"eps^2 must be <= Delta L alpha / (81648 n) = {bound:.6g}")
    return _make_nc_scaled("NC", k, dict(L=L, mu=mu, Delta=Delta, eps=eps, n=n), probs)


def make_nc_avg(L_prime, mu, Delta, eps, n, probs=None):
    _check_n(n)
    k = nc_avg_constants(L_prime, mu, Delta, eps, n)
    bound = Delta * L_prime * k["alpha"] / (435456.0 * math.sqrt(n))
    if eps * eps > bound:
        raise ValueError(f"eps^2 must be <= Delta L' alpha / (435456 sqrt(n)) = {bound:.6g}")
    return _make_nc_scaled("NC_AVG", k, dict(L_prime=L_prime, mu=mu, Delta=Delta, eps=eps,
                                             n=n), probs)


def make_gsc_1d(L, R, n, probs=None):
    """G_1(x) = L/2 x^2 - n L R x and G_i(x) = L/2 x^2 otherwise."""
    _check_n(n)
    fam = QuadFamily(L, n * L * R, n, 1)
    return build("AUX_G_SC_1D", fam, base=BaseParams(1), feasible=Feasible(R), probs=probs,
                 params=dict(L=L, R=R, n=n))

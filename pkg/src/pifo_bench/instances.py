"""Finite-sum instances and the minimax factories."""

from dataclasses import dataclass, field
import math

import numpy as np

from .families import BilinearFamily, HatFamily, QuadFamily, Scaled, Separable, TildeFamily
from .linalg import SQRT2, BMatrixSpec


@dataclass(frozen=True)
class Scale:
    lam: float = 1.0
    beta: float = 1.0


@dataclass(frozen=True)
class BaseParams:
    m: int
    omega: float = 0.0
    zeta: float = 0.0
    coeffs: tuple = ()
    alpha: float = math.nan


@dataclass(frozen=True)
class Feasible:
    Rx: float = math.inf
    Ry: float = math.inf


@dataclass(frozen=True)
class Regularity:
    L: float
    L_avg: float
    mu_x: float
    mu_y: float = 0.0


@dataclass(frozen=True, eq=False)
class FiniteSumInstance:
    kind: str
    n: int
    dim_x: int
    dim_y: int
    scale: Scale
    base_params: BaseParams
    feasible: Feasible
    regularity: Regularity
    probs: np.ndarray
    model: object = field(repr=False)
    labels: tuple = ()
    params: dict = field(default_factory=dict)

    @property
    def gamma_max(self):
        """Largest admissible prox weight (strict bound), inf for convex kinds."""
        return self.model.gamma_max

    @property
    def is_minimax(self):
        return self.dim_y > 0

    def descriptor(self):
        return {"kind": self.kind, "params": dict(self.params),
                "probs": [float(p) for p in self.probs]}


def _distribution(n, probs):
    """Sorted probabilities and the original labels, ascending order."""
    if probs is None:
        p = np.full(n, 1.0 / n)
        return p, tuple(range(1, n + 1))
    p = np.asarray(probs, dtype=float)
    if p.shape != (n,) or np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("probabilities must be positive, length n, and sum to 1")
    order = np.argsort(p, kind="stable")
    return p[order], tuple(int(k) + 1 for k in order)


def build(kind, model, *, scale=Scale(), base=None, feasible=Feasible(),
          probs=None, params=None):
    c = model.constants()
    if "mu" in c:
        reg = Regularity(L=c["L"], L_avg=c["L_avg"], mu_x=c["mu"])
    else:
        reg = Regularity(L=c["L"], L_avg=c["L_avg"], mu_x=c["mu_x"], mu_y=c["mu_y"])
    p, labels = _distribution(model.n, probs)
    return FiniteSumInstance(
        kind=kind, n=model.n, dim_x=model.dim_x,
        dim_y=model.dim_y if model.saddle else 0,
        scale=scale, base_params=base, feasible=feasible, regularity=reg,
        probs=p, model=model, labels=labels, params=dict(params or {}))


def _check_n(n, low=2):
    if int(n) != n or n < low:
        raise ValueError(f"n must be an integer >= {low}")


def make_tilde_r(m, zeta, c_tilde, n, probs=None):
    _check_n(n)
    c1, c2 = c_tilde
    if c1 < 0 or c2 < 0:
        raise ValueError("c_tilde entries must be nonnegative")
    BMatrixSpec(m, 0.0, zeta).check_instance_range()
    fam = TildeFamily(m, zeta, c1, c2, n)
    return build("TILDE_R", fam, base=BaseParams(m, 0.0, zeta, (c1, c2)), probs=probs,
                 params=dict(m=m, zeta=zeta, c_tilde=[c1, c2], n=n))


def make_hat_r(m, omega, c_hat, n, probs=None):
    _check_n(n)
    c1, c2, c3 = c_hat
    if c1 < 0 or c2 <= 0 or c3 <= 0:
        raise ValueError("need c1 >= 0 and c2, c3 > 0")
    BMatrixSpec(m, omega, 0.0).check_instance_range()
    fam = HatFamily(m, omega, c1, c2, c3, n)
    return build("HAT_R", fam, base=BaseParams(m, omega, 0.0, (c1, c2, c3)), probs=probs,
                 params=dict(m=m, omega=omega, c_hat=[c1, c2, c3], n=n))


def scsc_constants(L, mu_x, mu_y, Rx, Ry, n):
    """alpha, c_tilde, beta, lambda and q of the strongly-convex-strongly-concave family."""
    kx, ky = L / mu_x, L / mu_y
    alpha = math.sqrt((kx - 2.0 / kx) * ky / n ** 2 + 1.0)
    root = math.sqrt(kx * kx - 2.0)
    c_tilde = (2.0 * n / root, 2.0 * n * kx / (ky * root))
    beta = min(2 * n * Rx * math.sqrt(alpha) / root,
               2 * n * Rx / (alpha + 1) * math.sqrt(2 * alpha) / root,
               math.sqrt(2 * alpha) * Ry / (alpha - 1))
    lam = beta ** 2 / (2.0 * n) * math.sqrt(L * L - 2 * mu_x * mu_x)
    q = (alpha - 1.0) / (alpha + 1.0)
    return dict(alpha=alpha, c_tilde=c_tilde, beta=beta, lam=lam, q=q,
                xi=math.sqrt(L * L - 2 * mu_x * mu_x) / (2.0 * n))


def make_scsc(L, mu_x, mu_y, Rx, Ry, n, m, probs=None):
    _check_n(n)
    if m < 2:
        raise ValueError("m must be at least 2")
    if not (mu_x >= mu_y > 0):
        raise ValueError("need mu_x >= mu_y > 0")
    if L / mu_x < 2 or L / mu_y < 2:
        raise ValueError("need L/mu_x >= 2 and L/mu_y >= 2")
    k = scsc_constants(L, mu_x, mu_y, Rx, Ry, n)
    zeta = math.sqrt(2.0 / (k["alpha"] + 1.0))
    base = TildeFamily(m, zeta, k["c_tilde"][0], k["c_tilde"][1], n)
    fam = Scaled(base, k["lam"], k["beta"])
    return build("SCSC", fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m, 0.0, zeta, k["c_tilde"], k["alpha"]),
                 feasible=Feasible(Rx, Ry), probs=probs,
                 params=dict(L=L, mu_x=mu_x, mu_y=mu_y, Rx=Rx, Ry=Ry, n=n, m=m))


def csc_constants(L, mu_y, Rx, Ry, n, m):
    root = math.sqrt((L / mu_y) ** 2 - 2.0)
    beta = min(Rx * root / (2.0 * n * (m + 1) ** 1.5), Ry / math.sqrt(m))
    lam = beta ** 2 * math.sqrt(L * L - 2 * mu_y * mu_y) / (2.0 * n)
    return dict(c_tilde=(0.0, 2.0 * n / root), beta=beta, lam=lam)


def make_csc(L, mu_y, Rx, Ry, n, m, probs=None):
    _check_n(n)
    if m < 2:
        raise ValueError("m must be at least 2")
    if mu_y <= 0 or L / mu_y < 2:
        raise ValueError("need mu_y > 0 and L/mu_y >= 2")
    k = csc_constants(L, mu_y, Rx, Ry, n, m)
    base = TildeFamily(m, 1.0, k["c_tilde"][0], k["c_tilde"][1], n)
    fam = Scaled(base, k["lam"], k["beta"])
    return build("CSC", fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m, 0.0, 1.0, k["c_tilde"]),
                 feasible=Feasible(Rx, Ry), probs=probs,
                 params=dict(L=L, mu_y=mu_y, Rx=Rx, Ry=Ry, n=n, m=m))


def make_cc(L, Rx, Ry, n, m, probs=None):
    _check_n(n)
    if m < 3:
        raise ValueError("m must be at least 3")
    lam = L * Ry ** 2 / (2.0 * n * m)
    beta = Ry / math.sqrt(m)
    fam = Scaled(TildeFamily(m, 1.0, 0.0, 0.0, n), lam, beta)
    return build("CC", fam, scale=Scale(lam, beta), base=BaseParams(m, 0.0, 1.0, (0.0, 0.0)),
                 feasible=Feasible(Rx, Ry), probs=probs,
                 params=dict(L=L, Rx=Rx, Ry=Ry, n=n, m=m))


def ncsc_constants(L, mu_x, mu_y, Delta, eps, n):
    alpha = min(1.0, n * n * mu_y / (90.0 * L),
                8 * (math.sqrt(3) + 1) * n * n * mu_x * mu_y / (45.0 * L * L))
    c_hat = (4.0 * n * mu_y / L, math.sqrt(alpha) * L / (4.0 * n * mu_y), alpha ** 0.25)
    lam = 82944.0 * n ** 3 * mu_y ** 2 * eps ** 2 / (L ** 3 * alpha)
    beta = 2.0 * math.sqrt(lam * n / L)
    m = math.floor(Delta * L * L * math.sqrt(alpha) / (217728.0 * n * n * eps * eps * mu_y))
    return dict(alpha=alpha, c_hat=c_hat, lam=lam, beta=beta, m=m)


def ncsc_avg_constants(L_prime, mu_x, mu_y, Delta, eps, n):
    Lp, rn = L_prime, math.sqrt(n)
    alpha = min(1.0, 32.0 * n * mu_y / (135.0 * Lp),
                128 * (math.sqrt(3) + 1) * n * mu_x * mu_y / (45.0 * Lp * Lp))
    c_hat = (16.0 * rn * mu_y / Lp, math.sqrt(alpha) * Lp / (16.0 * rn * mu_y), alpha ** 0.25)
    lam = 5308416.0 * n ** 1.5 * mu_y ** 2 * eps ** 2 / (Lp ** 3 * alpha)
    beta = 4.0 * math.sqrt(lam * rn / Lp)
    m = math.floor(Delta * Lp * Lp * math.sqrt(alpha) / (3483648.0 * n * eps * eps * mu_y))
    return dict(alpha=alpha, c_hat=c_hat, lam=lam, beta=beta, m=m)


def _make_hat_scaled(kind, k, params, probs):
    m = k["m"]
    if m < 2:
        raise ValueError(f"eps too large: dimension parameter m = {m} < 2")
    omega = k["alpha"] ** 0.25
    base = HatFamily(m + 1, omega, *k["c_hat"], params["n"])
    fam = Scaled(base, k["lam"], k["beta"])
    return build(kind, fam, scale=Scale(k["lam"], k["beta"]),
                 base=BaseParams(m + 1, omega, 0.0, k["c_hat"], k["alpha"]),
                 probs=probs, params=params)


def make_ncsc(L, mu_x, mu_y, Delta, eps, n, probs=None):
    _check_n(n)
    if L / mu_y < 4:
        raise ValueError("need L/mu_y >= 4")
    k = ncsc_constants(L, mu_x, mu_y, Delta, eps, n)
    bound = Delta * L * L * k["alpha"] / (435456.0 * n * n * mu_y)
    if eps * eps > bound:
        raise ValueError(f"eps^2 must be <= Delta L^2 alpha / (435456 n^2 mu_y) = {bound:.6g}")
    return _make_hat_scaled("NCSC", k, dict(L=L, mu_x=mu_x, mu_y=mu_y, Delta=Delta,
                                            eps=eps, n=n), probs)


def make_ncsc_avg(L_prime, mu_x, mu_y, Delta, eps, n, probs=None):
    _check_n(n)
    if L_prime / mu_y < 4:
        raise ValueError("need L'/mu_y >= 4")
    k = ncsc_avg_constants(L_prime, mu_x, mu_y, Delta, eps, n)
    bound = Delta * L_prime ** 2 * k["alpha"] / (6967296.0 * n * mu_y)
    if eps * eps > bound:
        raise ValueError(f"eps^2 must be <= Delta L'^2 alpha / (6967296 n mu_y) = {bound:.6g}")
    return _make_hat_scaled("NCSC_AVG", k, dict(L_prime=L_prime, mu_x=mu_x, mu_y=mu_y,
                                                Delta=Delta, eps=eps, n=n), probs)


def lifted_L(case, L_prime, mu=0.0, n=None):
    """Per-component constant L whose construction is L'-average smooth."""
    if case in ("SCSC", "CSC"):
        return math.sqrt(n * (L_prime ** 2 - 2 * mu * mu) / 2.0 + 2 * mu * mu)
    if case == "SC":
        return math.sqrt(n * (L_prime ** 2 - mu * mu) / 2.0 - mu * mu)
    if case in ("CC", "C"):
        return math.sqrt(n / 2.0) * L_prime
    raise ValueError(f"no average-smooth lift for {case}")


def lift_to_average_smooth(case, L_prime, **kw):
    """Build the L'-average-smooth version of a construction.

    SCSC: mu_x, mu_y, Rx, Ry, n, m.  CSC: mu_y, Rx, Ry, n, m.  CC: Rx, Ry, n, m.
    SC: mu, R, n, m.  C: R, n, m.  NCSC: mu_x, mu_y, Delta, eps, n.
    """
    from . import instances_min as im

    n = kw["n"]
    probs = kw.get("probs")
    if case == "NCSC":
        return make_ncsc_avg(L_prime, kw["mu_x"], kw["mu_y"], kw["Delta"], kw["eps"], n, probs)
    if case in ("SCSC", "CSC", "SC"):
        _check_n(n, 4)
    if case == "SCSC":
        if L_prime / kw["mu_x"] < 2:
            raise ValueError("need L'/mu_x >= 2")
        L = lifted_L(case, L_prime, kw["mu_x"], n)
        inst = make_scsc(L, kw["mu_x"], kw["mu_y"], kw["Rx"], kw["Ry"], n, kw["m"], probs)
    elif case == "CSC":
        # the lift must use mu_y here: the construction has no mu_x
        if L_prime / kw["mu_y"] < 2:
            raise ValueError("need L'/mu_y >= 2")
        L = lifted_L(case, L_prime, kw["mu_y"], n)
        inst = make_csc(L, kw["mu_y"], kw["Rx"], kw["Ry"], n, kw["m"], probs)
    elif case == "CC":
        L = lifted_L(case, L_prime, n=n)
        inst = make_cc(L, kw["Rx"], kw["Ry"], n, kw["m"], probs)
    elif case == "SC":
        if L_prime / kw["mu"] < 2:
            raise ValueError("need L'/mu >= 2")
        L = lifted_L(case, L_prime, kw["mu"], n)
        inst = im.make_sc(L, kw["mu"], kw["R"], n, kw["m"], probs)
    elif case == "C":
        L = lifted_L(case, L_prime, n=n)
        inst = im.make_c(L, kw["R"], n, kw["m"], probs)
    else:
        raise ValueError(f"unknown case {case}")
    params = dict(inst.params, L_prime=L_prime, lifted=True)
    return _replace(inst, kind=inst.kind + "_AVG", params=params)


def _replace(inst, **changes):
    from dataclasses import replace
    return replace(inst, **changes)


def make_composed(kind, *, L, n, m, Rx=math.inf, Ry=math.inf, mu_x=None, mu_y=None,
                  probs=None):
    """Separable instances g_i(x) - h_i(y) wrapping minimization constructions.

    G_SCSC: mu_x/2 |x|^2 - f_SC,i(y), f_SC built from (L, mu_y, Ry).
    G_CSC:  f_C,i(x) - mu_y/2 |y|^2, f_C built from (L, Rx).
    H_CSC:  L/2 |x|^2 - g_SC,i(y), g_SC built from (L, mu_y, Ry).
    """
    from . import instances_min as im

    _check_n(n)
    if kind == "G_SCSC":
        sc = im.make_sc(L, mu_y, Ry, n, m)
        fam = Separable(QuadFamily(mu_x, 0.0, n, m), sc.model)
        base = sc.base_params
    elif kind == "G_CSC":
        c = im.make_c(L, Rx, n, m)
        fam = Separable(c.model, QuadFamily(mu_y, 0.0, n, m))
        base = c.base_params
    elif kind == "H_CSC":
        sc = im.make_sc(L, mu_y, Ry, n, m)
        fam = Separable(QuadFamily(L, 0.0, n, m), sc.model)
        base = sc.base_params
    else:
        raise ValueError(f"unknown composed kind {kind}")
    params = dict(L=L, n=n, m=m, Rx=Rx, Ry=Ry, mu_x=mu_x, mu_y=mu_y)
    return build("AUX_" + kind, fam, base=base, feasible=Feasible(Rx, Ry), probs=probs,
                 params=params)


def make_1d(kind, L, n, Rx, Ry=math.inf, probs=None):
    """One-dimensional instances whose first component carries the only linear term.

    H_SCSC: L/2 (x^2 - y^2) - n L Rx x [i == 1].
    H_CC:   L x y - n L Rx y [i == 1].
    """
    _check_n(n)
    if kind == "H_SCSC":
        fam = Separable(QuadFamily(L, n * L * Rx, n, 1), QuadFamily(L, 0.0, n, 1))
    elif kind == "H_CC":
        fam = BilinearFamily(L, n * L * Rx, n)
    else:
        raise ValueError(f"unknown one-dimensional kind {kind}")
    return build("AUX_" + kind + "_1D", fam, base=BaseParams(1), feasible=Feasible(Rx, Ry),
                 probs=probs, params=dict(L=L, n=n, Rx=Rx, Ry=Ry))


FACTORIES = {}


def from_descriptor(desc):
    """Rebuild an instance from ``descriptor()`` output."""
    kind = desc["kind"]
    params = dict(desc["params"])
    probs = desc.get("probs")
    if not FACTORIES:
        _register()
    if kind not in FACTORIES:
        raise ValueError(f"unknown kind {kind}")
    return FACTORIES[kind](params, probs)


def _register():
    from . import instances_min as im

    def simple(fn, keys):
        return lambda p, probs: fn(*[p[k] for k in keys], probs=probs)

    FACTORIES.update({
        "TILDE_R": lambda p, pr: make_tilde_r(p["m"], p["zeta"], tuple(p["c_tilde"]), p["n"], pr),
        "HAT_R": lambda p, pr: make_hat_r(p["m"], p["omega"], tuple(p["c_hat"]), p["n"], pr),
        "SCSC": simple(make_scsc, ["L", "mu_x", "mu_y", "Rx", "Ry", "n", "m"]),
        "CSC": simple(make_csc, ["L", "mu_y", "Rx", "Ry", "n", "m"]),
        "CC": simple(make_cc, ["L", "Rx", "Ry", "n", "m"]),
        "NCSC": simple(make_ncsc, ["L", "mu_x", "mu_y", "Delta", "eps", "n"]),
        "NCSC_AVG": simple(make_ncsc_avg, ["L_prime", "mu_x", "mu_y", "Delta", "eps", "n"]),
        "R_BASE": lambda p, pr: im.make_r(p["m"], p["omega"], p["zeta"], tuple(p["c"]), p["n"], pr),
        "SC": simple(im.make_sc, ["L", "mu", "R", "n", "m"]),
        "C": simple(im.make_c, ["L", "R", "n", "m"]),
        "NC": simple(im.make_nc, ["L", "mu", "Delta", "eps", "n"]),
        "NC_AVG": simple(im.make_nc_avg, ["L_prime", "mu", "Delta", "eps", "n"]),
        "AUX_G_SC_1D": simple(im.make_gsc_1d, ["L", "R", "n"]),
        "AUX_H_SCSC_1D": lambda p, pr: make_1d("H_SCSC", p["L"], p["n"], p["Rx"], p["Ry"], pr),
        "AUX_H_CC_1D": lambda p, pr: make_1d("H_CC", p["L"], p["n"], p["Rx"], p["Ry"], pr),
    })
    for k in ("G_SCSC", "G_CSC", "H_CSC"):
        FACTORIES["AUX_" + k] = (lambda kk: lambda p, pr: make_composed(kk, probs=pr, **p))(k)
    for case in ("SCSC", "CSC", "CC", "SC", "C"):
        FACTORIES[case + "_AVG"] = (lambda cs: lambda p, pr: lift_to_average_smooth(
            cs, p["L_prime"], probs=pr,
            **{k: v for k, v in p.items() if k not in ("L", "lifted", "L_prime")}))(case)

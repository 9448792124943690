"""Subspace propagation checks and the geometric stopping-time machinery."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.stats import beta as beta_dist

from .linalg import subspace_index
from .oracle import pifo

TILDE_KINDS = {"TILDE_R", "SCSC", "CSC", "CC", "SCSC_AVG", "CSC_AVG", "CC_AVG"}
HAT_KINDS = {"HAT_R", "NCSC", "NCSC_AVG"}
MIN_KINDS = {"R_BASE", "SC", "C", "NC", "NC_AVG", "SC_AVG", "C_AVG"}


def chain_case(instance):
    if instance.kind in TILDE_KINDS:
        return "TILDE"
    if instance.kind in HAT_KINDS:
        return "HAT"
    if instance.kind in MIN_KINDS:
        return "MIN"
    raise ValueError(f"{instance.kind} has no zero-chain structure")


def predict_next_subspace(case, k, i, n, m=None):
    """Subspace indices (x, y) reachable after one query of component i.

    TILDE starts from F_k x F_{k-1}, HAT from F_k x F_k, MIN from F_k (y index
    is None). Component i advances the chain iff i = k+1 (mod n).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if m is not None:
        top = m - 1 if case == "HAT" else m
        if k >= top:
            raise ValueError(f"k = {k} outside the jump range 0 <= k < {top}")
    hit = (i - 1) % n == k % n
    k2 = k + 1 if hit else k
    if case == "TILDE":
        return k2, k2 - 1 if k2 > 0 else 0
    if case == "HAT":
        return k2, k2
    if case == "MIN":
        return k2, None
    raise ValueError(f"unknown case {case}")


@dataclass(frozen=True)
class JumpReport:
    case: str
    k: int
    i: int
    predicted: tuple
    observed: tuple
    off_subspace: float
    hypothesis_ok: bool
    passed: bool


def _uses_newton(instance):
    return math.isfinite(instance.gamma_max)


def check_jump(instance, point, i, gamma):
    """Query component i at point and compare output subspaces with the jump rule."""
    case = chain_case(instance)
    newton = _uses_newton(instance)
    tol = 1e-10 if newton else 0.0
    if case == "MIN":
        x, y = np.asarray(point, dtype=float), None
        k = subspace_index(x)
        hyp = True
    else:
        x, y = (np.asarray(v, dtype=float) for v in point)
        kx, ky = subspace_index(x), subspace_index(y)
        if case == "TILDE":
            k = max(kx, ky + 1) if ky > 0 else kx
            hyp = ky <= max(k - 1, 0)
        else:
            k = max(kx, ky)
            hyp = True
    m = instance.dim_x
    hyp = hyp and k < (m - 1 if case == "HAT" else m)
    pred = predict_next_subspace(case, k, i, instance.n) if hyp else (m, m)
    r = pifo(instance, i, x, y, gamma)
    outs_x = [r.grad_x, r.prox_x]
    obs_x = max(subspace_index(v, tol) for v in outs_x)
    off = max(float(np.max(np.abs(v[pred[0]:]), initial=0.0)) for v in outs_x)
    if case == "MIN":
        obs = (obs_x, None)
        ok = obs_x <= pred[0]
    else:
        outs_y = [r.grad_y, r.prox_y]
        obs_y = max(subspace_index(v, tol) for v in outs_y)
        off = max(off, max(float(np.max(np.abs(v[pred[1]:]), initial=0.0)) for v in outs_y))
        obs = (obs_x, obs_y)
        ok = obs_x <= pred[0] and obs_y <= pred[1]
    ok = ok and off <= tol
    return JumpReport(case, k, i, pred, obs, off, hyp, bool(ok and hyp))


# ----------------------------------------------------------- stopping times

@dataclass(frozen=True)
class GeoProcess:
    probabilities: np.ndarray  # success probability of each step k = 1..K
    stopping_times: np.ndarray  # T_0 = 0, T_1, ..., T_K
    increments: np.ndarray  # Y_k = T_k - T_{k-1}


def step_probabilities(distribution, K):
    """p_{k'} for k = 1..K, where component k' = k (mod n) advances step k."""
    p = np.asarray(distribution, dtype=float)
    return p[np.arange(K) % p.size]


def simulate_stopping_times(distribution, K, rng, chunk=256):
    """Draw i_t i.i.d. and record T_k = min{t > T_{k-1} : i_t = k (mod n)}."""
    if K < 1:
        raise ValueError("K must be at least 1")
    p = np.asarray(distribution, dtype=float)
    n = p.size
    T = np.zeros(K + 1, dtype=np.int64)
    t, k = 0, 0
    while k < K:
        draws = rng.choice(n, size=chunk, p=p) + 1
        for d in draws:
            t += 1
            if (d - (k + 1)) % n == 0:
                k += 1
                T[k] = t
                if k == K:
                    break
    return GeoProcess(step_probabilities(p, K), T, np.diff(T))


def stopping_tail_mc(distribution, K, j, trials, rng, batch=20000):
    """Monte Carlo P(T_K > j): run j draws per trial and count unfinished chains."""
    p = np.asarray(distribution, dtype=float)
    n = p.size
    hits = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        k = np.zeros(b, dtype=np.int64)
        for _ in range(j):
            d = rng.choice(n, size=b, p=p) + 1
            k += ((d - (k + 1)) % n == 0) & (k < K)
        hits += int(np.count_nonzero(k < K))
        done += b
    return hits / trials


def clopper_pearson_lower(successes, trials, conf=0.99):
    if successes == 0:
        return 0.0
    return float(beta_dist.ppf(1 - conf, successes, trials - successes + 1))


def geo_tail_exact(p_list, j):
    """P(Y_1 + ... + Y_m > j) for independent geometric Y_i on {1, 2, ...}.

    Uses G_k(s) = p_k G_{k-1}(s-1) + (1-p_k) G_k(s-1) with only nonnegative
    terms, so small tails keep full relative accuracy.
    """
    p = np.asarray(p_list, dtype=float)
    if np.any((p <= 0) | (p > 1)):
        raise ValueError("probabilities must lie in (0, 1]")
    j = int(j)
    if j < 0:
        return 1.0
    m = p.size
    if j < m:
        return 1.0
    # G[k] holds G_k(s) for the current s; G_0(s) = 0 for s >= 0, G_k(0) = 1 for k >= 1
    G = np.ones(m + 1)
    G[0] = 0.0
    for _ in range(j):
        new = np.empty_like(G)
        new[0] = 0.0
        for k in range(1, m + 1):
            new[k] = p[k - 1] * G[k - 1] + (1 - p[k - 1]) * G[k]
        G = new
    return float(G[m])


def f2j_closed_form(p1, p2, j):
    """P(Y_1 + Y_2 > j) for two geometric variables, j >= 1."""
    if j < 1:
        raise ValueError("j must be at least 1")
    if p1 == p2:
        p = p1
        return j * p * (1 - p) ** (j - 1) + (1 - p) ** j
    return (p2 * (1 - p1) ** j - p1 * (1 - p2) ** j) / (p2 - p1)


@dataclass(frozen=True)
class ConcentrationReport:
    m: int
    threshold: float
    exact: float
    mc_estimate: float
    mc_lower99: float
    passed: bool


def verify_geo_concentration(p_list, trials, rng, exact_limit=10 ** 6):
    """Check P(sum Y_i > m^2 / (4 sum p_i)) >= 1/9."""
    p = np.asarray(p_list, dtype=float)
    m = p.size
    if m < 2:
        raise ValueError("need m >= 2")
    thr = m * m / (4 * p.sum())
    j = math.floor(thr)
    exact = geo_tail_exact(p, j) if j <= exact_limit else math.nan
    est = low = math.nan
    if trials:
        sums = np.zeros(trials, dtype=np.int64)
        for pk in p:
            sums += rng.geometric(pk, size=trials)
        hits = int(np.count_nonzero(sums > thr))
        est = hits / trials
        low = clopper_pearson_lower(hits, trials)
    ref = exact if not math.isnan(exact) else low
    return ConcentrationReport(m, thr, exact, est, low, bool(ref >= 1 / 9))

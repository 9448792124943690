"""Chain matrices, residue partitions, subspace tools and the scalar potential Gamma."""

from dataclasses import dataclass
import math

import numpy as np
from scipy import linalg as sla

SQRT2 = math.sqrt(2.0)
# weak-convexity constant of Gamma: min Gamma'' = -45 (sqrt(3) - 1)
GAMMA_WEAK = 45.0 * (math.sqrt(3.0) - 1.0)
GAMMA_SMOOTH = 180.0


@dataclass(frozen=True)
class BMatrixSpec:
    m: int
    omega: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if self.omega < 0 or self.zeta < 0:
            raise ValueError("omega and zeta must be nonnegative")

    def check_instance_range(self):
        tol = 1e-12
        if self.omega > SQRT2 + tol or self.zeta > SQRT2 + tol:
            raise ValueError("omega and zeta must lie in [0, sqrt(2)]")


def make_B(spec):
    """Dense (m+1) x m chain matrix. Row 0 is omega*e1, row m is zeta*e_m."""
    m = spec.m
    B = np.zeros((m + 1, m))
    B[0, 0] = spec.omega
    for l in range(1, m):
        B[l, l - 1] = 1.0
        B[l, l] = -1.0
    B[m, m - 1] = spec.zeta
    return B


def row_b(l, spec):
    if not 0 <= l <= spec.m:
        raise IndexError(f"row index {l} outside 0..{spec.m}")
    return make_B(spec)[l]


@dataclass(frozen=True)
class IndexPartition:
    n: int
    m: int
    sets: tuple

    def of(self, i):
        """Index set of component i (1-based)."""
        return self.sets[i - 1]

    def owner(self, l):
        """Component (1-based) whose set contains row l."""
        return l % self.n + 1


def partition_indices(m, n):
    if n < 2:
        raise ValueError("need at least two components")
    if m < 1:
        raise ValueError("m must be positive")
    sets = tuple(tuple(range(i, m + 1, n)) for i in range(n))
    return IndexPartition(n=n, m=m, sets=sets)


def subspace_index(v, tol=0.0):
    """Smallest k such that every coordinate past k is within tol of zero."""
    v = np.asarray(v, dtype=float)
    big = np.flatnonzero(np.abs(v) > tol)
    return int(big[-1] + 1) if big.size else 0


def project_ball(v, R):
    v = np.asarray(v, dtype=float)
    if not np.isfinite(R):
        return v.copy()
    if R <= 0:
        raise ValueError("radius must be positive")
    nrm = np.linalg.norm(v)
    if nrm <= R:
        return v.copy()
    return (R / nrm) * v


_GAMMA_SHIFT = 0.5 - 1.0 - 0.5 * math.log(2.0) + math.pi / 4.0


def gamma_value(x):
    """Gamma(x) = 120 * int_1^x t^2 (t-1) / (1+t^2) dt, closed form."""
    x = np.asarray(x, dtype=float)
    prim = 0.5 * x * x - x - 0.5 * np.log1p(x * x) + np.arctan(x)
    out = 120.0 * (prim - _GAMMA_SHIFT)
    return out if out.ndim else float(out)


def gamma_deriv(x):
    x = np.asarray(x, dtype=float)
    x2 = x * x
    out = 120.0 * x2 * (x - 1.0) / (1.0 + x2)
    return out if out.ndim else float(out)


def gamma_second(x):
    x = np.asarray(x, dtype=float)
    x2 = x * x
    out = 120.0 * (x2 * x2 + 3.0 * x2 - 2.0 * x) / (1.0 + x2) ** 2
    return out if out.ndim else float(out)


class ClassRows:
    """Row actions of the chain matrix restricted to a set of row indices.

    Every row has at most two nonzeros, b_l = cp*e_p + cq*e_q, and rows
    from one residue class touch disjoint coordinates, so the rows are
    mutually orthogonal. Nothing is materialized; zeros stay exact.
    """

    def __init__(self, spec, rows):
        m = spec.m
        rows = [l for l in rows if 0 <= l <= m]
        P, Q, CP, CQ = [], [], [], []
        kept = []
        for l in rows:
            if l == 0:
                if spec.omega == 0:
                    continue
                p, q, cp, cq = 0, 0, spec.omega, 0.0
            elif l == m:
                if spec.zeta == 0:
                    continue
                p, q, cp, cq = m - 1, m - 1, spec.zeta, 0.0
            else:
                p, q, cp, cq = l - 1, l, 1.0, -1.0
            kept.append(l)
            P.append(p)
            Q.append(q)
            CP.append(cp)
            CQ.append(cq)
        self.rows = np.array(kept, dtype=int)
        self.P = np.array(P, dtype=int)
        self.Q = np.array(Q, dtype=int)
        self.CP = np.array(CP, dtype=float)
        self.CQ = np.array(CQ, dtype=float)
        self.sqnorm = self.CP ** 2 + self.CQ ** 2
        self.m = m

    def act(self, x):
        """Vector of b_l . x over the kept rows."""
        return self.CP * x[self.P] + self.CQ * x[self.Q]

    def adjoint(self, w, out=None):
        """Add sum_l w_l b_l into out (fresh zeros if not given)."""
        if out is None:
            out = np.zeros(self.m)
        out[self.P] += self.CP * w
        out[self.Q] += self.CQ * w
        return out


def solve_tridiagonal(diag, sub, sup, rhs):
    """Solve a tridiagonal system; sub/sup have length n-1."""
    diag = np.asarray(diag, dtype=float)
    sub = np.asarray(sub, dtype=float)
    sup = np.asarray(sup, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.size
    if sub.size != n - 1 or sup.size != n - 1 or rhs.size != n:
        raise ValueError("inconsistent tridiagonal sizes")
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1] = diag
    ab[2, :-1] = sub
    try:
        sol = sla.solve_banded((1, 1), ab, rhs)
    except sla.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular tridiagonal system") from exc
    res = diag * sol
    res[:-1] += sup * sol[1:]
    res[1:] += sub * sol[:-1]
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    if not np.all(np.isfinite(sol)) or np.linalg.norm(res - rhs) > 1e-10 * scale:
        raise np.linalg.LinAlgError("tridiagonal system is singular or ill-conditioned")
    return sol

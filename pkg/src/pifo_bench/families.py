"""Component families: evaluation of values and gradients.

Saddle families take (i, x, y); minimization families take (i, x).
Component indices are 1-based. Proximal maps live in ``oracle``.
"""

import math

import numpy as np

from .linalg import (
    BMatrixSpec,
    ClassRows,
    GAMMA_SMOOTH,
    GAMMA_WEAK,
    gamma_deriv,
    gamma_value,
    make_B,
    partition_indices,
)


class TildeFamily:
    """Bilinear chain with quadratic regularizers (convex-concave base).

    r_i(x, y) = n sum_{l in L_i, l>=1} y_l (b_l.x) + c1/2 |x|^2 - c2/2 |y|^2
                - n x_1 [i == 1]
    """

    saddle = True

    def __init__(self, m, zeta, c1, c2, n):
        self.m, self.zeta, self.c1, self.c2, self.n = m, zeta, c1, c2, n
        self.spec = BMatrixSpec(m, 0.0, zeta)
        part = partition_indices(m, n)
        self.rows = [ClassRows(self.spec, [l for l in part.of(i) if l >= 1])
                     for i in range(1, n + 1)]
        self.dim_x = self.dim_y = m
        self._B = make_B(self.spec)[1:]
        self.gamma_max = math.inf

    def value(self, i, x, y):
        R = self.rows[i - 1]
        val = self.n * np.dot(y[R.rows - 1], R.act(x))
        val += 0.5 * self.c1 * np.dot(x, x) - 0.5 * self.c2 * np.dot(y, y)
        if i == 1:
            val -= self.n * x[0]
        return float(val)

    def grad(self, i, x, y):
        R = self.rows[i - 1]
        n = self.n
        gx = self.c1 * x
        gx = R.adjoint(n * y[R.rows - 1], gx)
        if i == 1:
            gx[0] -= n
        gy = -self.c2 * y
        gy[R.rows - 1] += n * R.act(x)
        return gx, gy

    def agg_value(self, x, y):
        return float(y @ (self._B @ x) + 0.5 * self.c1 * x @ x
                     - 0.5 * self.c2 * y @ y - x[0])

    def agg_grad(self, x, y):
        gx = self._B.T @ y + self.c1 * x
        gx[0] -= 1.0
        gy = self._B @ x - self.c2 * y
        return gx, gy

    def constants(self):
        c = max(self.c1, self.c2)
        n = self.n
        return dict(L=math.sqrt(4 * n * n + 2 * c * c),
                    L_avg=math.sqrt(8 * n + 2 * c * c),
                    mu_x=self.c1, mu_y=self.c2)


class HatFamily:
    """Bilinear chain in shifted y with the nonconvex potential on x.

    r_i(x, y) = n sum_{l in L_i, l<=m-1} y_{l+1} (b_l.x) - c1/2 |y|^2
                + c2 sum_{j<m} Gamma(c3 x_j) - n y_1 [i == 1]
    """

    saddle = True

    def __init__(self, m, omega, c1, c2, c3, n):
        if m < 2:
            raise ValueError("m must be at least 2")
        self.m, self.omega, self.n = m, omega, n
        self.c1, self.c2, self.c3 = c1, c2, c3
        self.spec = BMatrixSpec(m, omega, 0.0)
        part = partition_indices(m, n)
        self.rows = [ClassRows(self.spec, [l for l in part.of(i) if l <= m - 1])
                     for i in range(1, n + 1)]
        self.dim_x = self.dim_y = m
        self._B = make_B(self.spec)[:m]
        self.gamma_max = 1.0 / (GAMMA_WEAK * c2 * c3 * c3)

    def _pot(self, x):
        return self.c2 * float(np.sum(gamma_value(self.c3 * x[:-1])))

    def _pot_grad(self, x):
        g = np.zeros(self.m)
        g[:-1] = self.c2 * self.c3 * gamma_deriv(self.c3 * x[:-1])
        return g

    def value(self, i, x, y):
        R = self.rows[i - 1]
        val = self.n * np.dot(y[R.rows], R.act(x)) - 0.5 * self.c1 * np.dot(y, y)
        val += self._pot(x)
        if i == 1:
            val -= self.n * y[0]
        return float(val)

    def grad(self, i, x, y):
        R = self.rows[i - 1]
        n = self.n
        gx = R.adjoint(n * y[R.rows], self._pot_grad(x))
        gy = -self.c1 * y
        gy[R.rows] += n * R.act(x)
        if i == 1:
            gy[0] -= n
        return gx, gy

    def agg_value(self, x, y):
        return float(y @ (self._B @ x) - 0.5 * self.c1 * y @ y
                     + self._pot(x) - y[0])

    def agg_grad(self, x, y):
        gx = self._B.T @ y + self._pot_grad(x)
        gy = self._B @ x - self.c1 * y
        gy[0] -= 1.0
        return gx, gy

    def constants(self):
        n, c1, c2, c3 = self.n, self.c1, self.c2, self.c3
        return dict(L=math.sqrt(4 * n * n + 2 * c1 * c1) + GAMMA_SMOOTH * c2 * c3 ** 2,
                    L_avg=2 * math.sqrt(4 * n + c1 * c1 + 16200 * c2 ** 2 * c3 ** 4),
                    mu_x=-GAMMA_WEAK * c2 * c3 ** 2, mu_y=c1)


class MinFamily:
    """Squared chain rows plus optional Gamma potential (minimization base).

    r_i(x) = n/2 sum_{l in L_i} (b_l.x)^2 + c1/2 |x|^2 + c2 sum_{j<m} Gamma(x_j)
             - c3 n x_1 [i == 1]
    """

    saddle = False

    def __init__(self, m, omega, zeta, c1, c2, c3, n):
        if c1 > 0 and c2 > 0:
            raise ValueError("mixed mode: c1 and c2 cannot both be positive")
        if c1 < 0 or c2 < 0:
            raise ValueError("c1 and c2 must be nonnegative")
        self.m, self.omega, self.zeta, self.n = m, omega, zeta, n
        self.c1, self.c2, self.c3 = c1, c2, c3
        self.spec = BMatrixSpec(m, omega, zeta)
        part = partition_indices(m, n)
        self.rows = [ClassRows(self.spec, part.of(i)) for i in range(1, n + 1)]
        self.dim_x = m
        self._B = make_B(self.spec)
        self.convex = c2 == 0
        self.gamma_max = math.inf if self.convex else 1.0 / (GAMMA_WEAK * c2)

    def _pot(self, x):
        if self.c2 == 0:
            return 0.0
        return self.c2 * float(np.sum(gamma_value(x[:-1])))

    def _pot_grad(self, x):
        g = np.zeros(self.m)
        if self.c2 != 0:
            g[:-1] = self.c2 * gamma_deriv(x[:-1])
        return g

    def value(self, i, x):
        R = self.rows[i - 1]
        bx = R.act(x)
        val = 0.5 * self.n * np.dot(bx, bx) + 0.5 * self.c1 * np.dot(x, x) + self._pot(x)
        if i == 1:
            val -= self.c3 * self.n * x[0]
        return float(val)

    def grad(self, i, x):
        R = self.rows[i - 1]
        g = self._pot_grad(x)
        if self.c1:
            g += self.c1 * x
        g = R.adjoint(self.n * R.act(x), g)
        if i == 1:
            g[0] -= self.c3 * self.n
        return g

    def agg_value(self, x):
        Bx = self._B @ x
        return float(0.5 * Bx @ Bx + 0.5 * self.c1 * x @ x + self._pot(x) - self.c3 * x[0])

    def agg_grad(self, x):
        g = self._B.T @ (self._B @ x) + self.c1 * x + self._pot_grad(x)
        g[0] -= self.c3
        return g

    def constants(self):
        n, c1, c2 = self.n, self.c1, self.c2
        if self.convex:
            return dict(L=2 * n + c1,
                        L_avg=math.sqrt(4.0 / n * ((n + c1) ** 2 + n * n) + c1 * c1),
                        mu=c1)
        return dict(L=2 * n + GAMMA_SMOOTH * c2,
                    L_avg=4 * math.sqrt(n + 4050 * c2 * c2),
                    mu=-GAMMA_WEAK * c2)


class QuadFamily:
    """f_i(x) = a/2 |x|^2 - lin * x_1 [i == 1]."""

    saddle = False
    gamma_max = math.inf

    def __init__(self, a, lin, n, dim):
        self.a, self.lin, self.n, self.dim_x = a, lin, n, dim

    def value(self, i, x):
        val = 0.5 * self.a * np.dot(x, x)
        if i == 1:
            val -= self.lin * x[0]
        return float(val)

    def grad(self, i, x):
        g = self.a * x
        if i == 1:
            g[0] -= self.lin
        return g

    def agg_value(self, x):
        return float(0.5 * self.a * x @ x - self.lin / self.n * x[0])

    def agg_grad(self, x):
        g = self.a * x
        g[0] -= self.lin / self.n
        return g

    def constants(self):
        return dict(L=self.a, L_avg=self.a, mu=self.a)


class BilinearFamily:
    """One-dimensional f_i(x, y) = L x y - lin * y [i == 1]."""

    saddle = True
    gamma_max = math.inf
    dim_x = dim_y = 1

    def __init__(self, L, lin, n):
        self.L, self.lin, self.n = L, lin, n

    def value(self, i, x, y):
        val = self.L * x[0] * y[0]
        if i == 1:
            val -= self.lin * y[0]
        return float(val)

    def grad(self, i, x, y):
        gx = self.L * y
        gy = self.L * x
        if i == 1:
            gy = gy - self.lin
        return gx, gy

    def agg_value(self, x, y):
        return float(self.L * x[0] * y[0] - self.lin / self.n * y[0])

    def agg_grad(self, x, y):
        return self.L * y, self.L * x - self.lin / self.n

    def constants(self):
        return dict(L=self.L, L_avg=self.L, mu_x=0.0, mu_y=0.0)


class Scaled:
    """x -> lam * base(x / beta), for saddle or minimization bases."""

    def __init__(self, base, lam, beta):
        if lam <= 0 or beta <= 0:
            raise ValueError("lambda and beta must be positive")
        self.base, self.lam, self.beta = base, lam, beta
        self.saddle = base.saddle
        self.n = base.n
        self.dim_x = base.dim_x
        self.dim_y = getattr(base, "dim_y", 0)
        self.curv = lam / beta ** 2
        self.gamma_max = base.gamma_max / self.curv

    def value(self, i, *z):
        return self.lam * self.base.value(i, *(v / self.beta for v in z))

    def grad(self, i, *z):
        g = self.base.grad(i, *(v / self.beta for v in z))
        k = self.lam / self.beta
        if self.saddle:
            return k * g[0], k * g[1]
        return k * g

    def agg_value(self, *z):
        return self.lam * self.base.agg_value(*(v / self.beta for v in z))

    def agg_grad(self, *z):
        g = self.base.agg_grad(*(v / self.beta for v in z))
        k = self.lam / self.beta
        if self.saddle:
            return k * g[0], k * g[1]
        return k * g

    def constants(self):
        c = self.base.constants()
        return {key: val * self.curv for key, val in c.items()}


class Separable:
    """Saddle family g_i(x) - h_i(y) built from two minimization families."""

    saddle = True

    def __init__(self, xpart, ypart):
        if xpart.n != ypart.n:
            raise ValueError("pieces disagree on n")
        self.xpart, self.ypart = xpart, ypart
        self.n = xpart.n
        self.dim_x, self.dim_y = xpart.dim_x, ypart.dim_x
        self.gamma_max = min(xpart.gamma_max, ypart.gamma_max)

    def value(self, i, x, y):
        return self.xpart.value(i, x) - self.ypart.value(i, y)

    def grad(self, i, x, y):
        return self.xpart.grad(i, x), -self.ypart.grad(i, y)

    def agg_value(self, x, y):
        return self.xpart.agg_value(x) - self.ypart.agg_value(y)

    def agg_grad(self, x, y):
        return self.xpart.agg_grad(x), -self.ypart.agg_grad(y)

    def constants(self):
        cx, cy = self.xpart.constants(), self.ypart.constants()
        return dict(L=max(cx["L"], cy["L"]), L_avg=max(cx["L_avg"], cy["L_avg"]),
                    mu_x=cx["mu"], mu_y=cy["mu"])

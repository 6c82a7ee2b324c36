"""Vectorized prime-field kernels for small moduli.

Values are stored as float64 holding exact integers. Products of two
residues stay below q^2 < 2^53, so ordinary float multiplication is exact,
and reduction is the branch-free r = t - round(t/q)*q into the symmetric
range (-q/2, q/2]. Canonicalization back to [0, q) happens at kernel exits.

The modulus cap keeps the full inverse table small (one float64 entry per
residue) and every product exactly representable.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import DuplicatePoint, FieldExhausted
from .field import is_prime

MODULUS_CAP = 1 << 21          # inverse table <= 16 MiB, q^2 <= 2^42 << 2^53
DEFAULT_FAST_PRIME = 40961     # > 4 * 10240, comfortably under the cap


def supports(q: int) -> bool:
    return 5 <= q <= MODULUS_CAP and is_prime(q)


@njit(cache=True)
def _inv_table(q, qf, qinv):
    inv = np.zeros(q, dtype=np.float64)
    if q > 1:
        inv[1] = 1.0
    for i in range(2, q):
        k = q // i
        r = q - k * i
        v = -np.float64(k) * inv[r]
        t = np.rint(v * qinv)
        v -= t * qf
        if v < 0.0:
            v += qf
        inv[i] = v
    return inv


@njit(cache=True)
def _newton_coeffs(x, y, inv, qf, qinv):
    """Divided-difference coefficients for the interpolant through (x, y).

    Output nu satisfies p(t) = nu[0] + (t-x0)(nu[1] + (t-x1)(...)).
    Aborts with nu[0] = -1 sentinel impossible here: callers guarantee
    distinct nodes, checked in the wrapper.
    """
    n = x.shape[0]
    prev = y.copy()
    cur = y.copy()
    r = np.empty(n, dtype=np.float64)
    for j in range(1, n):
        for i in range(j, n):
            dx = x[i] - x[i - j]
            if dx < 0.0:
                dx += qf
            r[i] = inv[np.int64(dx)]
        for i in range(j, n):
            t = (prev[i] - prev[i - 1]) * r[i]
            k = np.rint(t * qinv)
            cur[i] = t - k * qf
        for i in range(j, n):
            prev[i] = cur[i]
    for i in range(n):
        v = cur[i]
        if v < 0.0:
            v += qf
        cur[i] = v
    return cur


@njit(cache=True)
def _horner_eval(x, nu, targets, out, qf, qinv):
    """Evaluate the Newton-form interpolant at each target (blocked)."""
    n = x.shape[0]
    m = targets.shape[0]
    BLK = 1024
    acc = np.empty(BLK, dtype=np.float64)
    for t0 in range(0, m, BLK):
        tb = min(BLK, m - t0)
        top = nu[n - 1]
        for t in range(tb):
            acc[t] = top
        for k in range(n - 2, -1, -1):
            xk = x[k]
            ck = nu[k]
            for t in range(tb):
                d = targets[t0 + t] - xk
                v = acc[t] * d
                s = np.rint(v * qinv)
                acc[t] = v - s * qf + ck
        for t in range(tb):
            a = acc[t]
            s = np.rint(a * qinv)
            a -= s * qf
            if a < 0.0:
                a += qf
            out[t0 + t] = a
    return out


class FastField:
    """Kernel bundle bound to one small prime modulus.

    Arrays in and out are float64 canonical residues. The inverse table is
    built once per modulus and shared by every interpolation call.
    """

    def __init__(self, q: int):
        if not supports(q):
            raise ValueError(f"modulus {q} unsupported by the fast tier")
        self.q = q
        self.qf = np.float64(q)
        self.qinv = np.float64(1.0) / self.qf
        self._inv = _inv_table(q, self.qf, self.qinv)

    def __repr__(self):
        return f"FastField(q={self.q})"

    def newton_coeffs(self, nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
        if np.unique(nodes).shape[0] != nodes.shape[0]:
            raise DuplicatePoint("interpolation nodes must be distinct")
        return _newton_coeffs(nodes, values, self._inv, self.qf, self.qinv)

    def eval_newton(self, nodes: np.ndarray, coeffs: np.ndarray,
                    targets: np.ndarray) -> np.ndarray:
        out = np.empty(targets.shape[0], dtype=np.float64)
        if targets.shape[0]:
            _horner_eval(nodes, coeffs, targets, out, self.qf, self.qinv)
        return out

    def eval_interpolant(self, nodes, values, targets):
        """One-shot interpolate-and-evaluate, the decode/commit workhorse."""
        nu = self.newton_coeffs(nodes, values)
        return self.eval_newton(nodes, nu, targets)

    def sample_distinct(self, k: int, rng) -> np.ndarray:
        """k distinct uniform residues as float64, via partial shuffle."""
        if k > self.q:
            raise FieldExhausted(f"cannot draw {k} distinct elements from F_{self.q}")
        return rng.choice(self.q, size=k, replace=False).astype(np.float64)

    def uniform(self, k: int, rng) -> np.ndarray:
        return rng.integers(0, self.q, size=k).astype(np.float64)

    def warmup(self):
        """Force JIT compilation of the kernels (small dummy instance)."""
        nodes = np.array([1.0, 2.0, 3.0, 4.0], dtype=np.float64)
        vals = np.array([1.0, 0.0, 1.0, 1.0], dtype=np.float64)
        nu = self.newton_coeffs(nodes, vals)
        self.eval_newton(nodes, nu, np.array([5.0, 6.0]))

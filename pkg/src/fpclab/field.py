"""Prime-field arithmetic, polynomial evaluation, and Lagrange interpolation.

Exact scalar tier: plain Python integers, works for any prime modulus
including the default 2^61 - 1. Hot experiment paths use the vectorized
tier in fastfield.py for small moduli; both tiers are cross-checked in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ArityMismatch,
    DuplicatePoint,
    FieldExhausted,
    FieldMismatch,
    ModulusTooSmall,
    NonPrimeModulus,
)

MERSENNE61 = (1 << 61) - 1  # default modulus, prime, fits 64-bit arithmetic

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldContext:
    """The field F_q. Immutable once constructed; elements carry a reference.

    All arithmetic methods operate on canonical residues (plain ints in
    [0, q)) for speed; the FieldElement wrapper provides the safe
    operator-overloaded surface.
    """

    __slots__ = ("q", "_fast")

    def __init__(self, q: int):
        if q < 5:
            raise ModulusTooSmall(f"modulus {q} < 5")
        if not is_prime(q):
            raise NonPrimeModulus(f"modulus {q} is not prime")
        self.q = q
        self._fast = None

    def __repr__(self):
        return f"FieldContext(q={self.q})"

    def __eq__(self, other):
        return isinstance(other, FieldContext) and other.q == self.q

    def __hash__(self):
        return hash(("FieldContext", self.q))

    # raw residue arithmetic

    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.q if s >= self.q else s

    def sub(self, a: int, b: int) -> int:
        s = a - b
        return s + self.q if s < 0 else s

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def neg(self, a: int) -> int:
        return self.q - a if a else 0

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.q - 2, self.q)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value % self.q, self)

    def batch_inv(self, values):
        """Invert a list of nonzero residues with one modular exponentiation."""
        n = len(values)
        if n == 0:
            return []
        prefix = [0] * n
        acc = 1
        for i, v in enumerate(values):
            if v == 0:
                raise ZeroDivisionError("inverse of zero")
            acc = acc * v % self.q
            prefix[i] = acc
        inv_acc = self.inv(acc)
        out = [0] * n
        for i in range(n - 1, 0, -1):
            out[i] = prefix[i - 1] * inv_acc % self.q
            inv_acc = inv_acc * values[i] % self.q
        out[0] = inv_acc
        return out

    @property
    def fast(self):
        """Vectorized kernel bundle for this modulus, or None if too large."""
        if self._fast is None:
            from . import fastfield
            if fastfield.supports(self.q):
                self._fast = fastfield.FastField(self.q)
            else:
                self._fast = False
        return self._fast or None


def field_new(q: int) -> FieldContext:
    """Create the field F_q. Raises NonPrimeModulus / ModulusTooSmall."""
    return FieldContext(q)


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int
    ctx: FieldContext

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.ctx.q != self.ctx.q:
            raise FieldMismatch(f"mixed moduli {self.ctx.q} and {other.ctx.q}")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.ctx.add(self.value, other.value), self.ctx)

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.ctx.sub(self.value, other.value), self.ctx)

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.ctx.mul(self.value, other.value), self.ctx)

    def __truediv__(self, other):
        self._check(other)
        return FieldElement(self.ctx.div(self.value, other.value), self.ctx)

    def __neg__(self):
        return FieldElement(self.ctx.neg(self.value), self.ctx)

    def inverse(self):
        return FieldElement(self.ctx.inv(self.value), self.ctx)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.ctx.q})"


@dataclass(frozen=True, slots=True)
class Polynomial:
    """Dense coefficient vector, lowest degree first.

    len(coefficients) == degree_bound + 1 always; trailing zeros permitted.
    """

    coefficients: tuple
    ctx: FieldContext

    @property
    def degree_bound(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return evaluate(self, x)


def evaluate(p: Polynomial, x) -> FieldElement:
    """Horner evaluation of p at x. Side-effect free."""
    if isinstance(x, FieldElement):
        if x.ctx.q != p.ctx.q:
            raise FieldMismatch(f"mixed moduli {p.ctx.q} and {x.ctx.q}")
        xv = x.value
    else:
        xv = int(x) % p.ctx.q
    q = p.ctx.q
    acc = 0
    for c in reversed(p.coefficients):
        acc = (acc * xv + c) % q
    return FieldElement(acc, p.ctx)


def _as_pairs(points, ctx):
    raw = []
    for x, y in points:
        xv = x.value if isinstance(x, FieldElement) else int(x) % ctx.q
        yv = y.value if isinstance(y, FieldElement) else int(y) % ctx.q
        raw.append((xv, yv))
    return raw


def interpolate(points, degree_bound: int, ctx: FieldContext | None = None) -> Polynomial:
    """The unique polynomial of degree <= degree_bound through the points.

    Requires exactly degree_bound + 1 points with pairwise-distinct
    x-coordinates. Newton's divided differences, then expansion to the
    monomial basis; exact for any modulus.
    """
    points = list(points)
    if ctx is None:
        first = points[0][0]
        if not isinstance(first, FieldElement):
            raise TypeError("pass ctx= when points are raw integers")
        ctx = first.ctx
    if len(points) != degree_bound + 1:
        raise ArityMismatch(
            f"need {degree_bound + 1} points for degree bound {degree_bound}, got {len(points)}")
    raw = _as_pairs(points, ctx)
    xs = [x for x, _ in raw]
    if len(set(xs)) != len(xs):
        raise DuplicatePoint("x-coordinates must be pairwise distinct")
    q = ctx.q
    n = len(raw)
    # divided differences in place
    dd = [y for _, y in raw]
    denominators = []
    for j in range(1, n):
        denominators.append([(xs[i] - xs[i - j]) % q for i in range(j, n)])
    inv_den = [ctx.batch_inv(col) for col in denominators]
    for j in range(1, n):
        inv_col = inv_den[j - 1]
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) * inv_col[i - j] % q
    # expand Newton form to monomial coefficients:
    # coeffs <- coeffs * (X - x_k) + dd[k], folding from the top down
    coeffs = [0] * n
    for k in range(n - 1, -1, -1):
        shifted = [0] + coeffs[:-1]
        coeffs = [(shifted[i] - coeffs[i] * xs[k]) % q for i in range(n)]
        coeffs[0] = (coeffs[0] + dd[k]) % q
    return Polynomial(tuple(coeffs), ctx)


def eval_interpolant(xs, ys, targets, ctx: FieldContext):
    """Evaluate the interpolant through (xs, ys) at each target, skipping
    the monomial expansion.

    Barycentric form with one batch inversion for the node weights and one
    per target block for the node differences. Raw residues in, raw
    residues out; exact for any modulus.
    """
    q = ctx.q
    n = len(xs)
    if len(set(xs)) != n:
        raise DuplicatePoint("x-coordinates must be pairwise distinct")
    weights = []
    for k in range(n):
        xk = xs[k]
        acc = 1
        for j in range(n):
            if j != k:
                acc = acc * (xk - xs[j]) % q
        weights.append(acc)
    inv_w = ctx.batch_inv(weights)
    coef = [ys[k] * inv_w[k] % q for k in range(n)]
    node_set = set(xs)
    out = []
    for t in range(len(targets)):
        x = targets[t]
        if x in node_set:
            out.append(ys[xs.index(x)])
            continue
        diffs = [(x - xs[k]) % q for k in range(n)]
        inv_d = ctx.batch_inv(diffs)
        phi = 1
        for d in diffs:
            phi = phi * d % q
        acc = 0
        for k in range(n):
            acc = (acc + coef[k] * inv_d[k]) % q
        out.append(acc * phi % q)
    return out


def sample_distinct(ctx: FieldContext, k: int, rng) -> list:
    """k pairwise-distinct uniform residues, by rejection with a seen-set.

    rng is a numpy Generator; draws are taken one block at a time so the
    stream consumption is deterministic for a given (seed, k).
    """
    import numpy as np

    if k > ctx.q:
        raise FieldExhausted(f"cannot draw {k} distinct elements from F_{ctx.q}")
    seen = set()
    out = []
    while len(out) < k:
        block = rng.integers(0, ctx.q, size=max(16, k - len(out)), dtype=np.uint64)
        for v in block:
            vi = int(v)
            if vi not in seen:
                seen.add(vi)
                out.append(vi)
                if len(out) == k:
                    break
    return out

"""Problem encoders and ground-truth evaluators.

Three problem surfaces over binary databases:
  * plain one-way marginals (column means),
  * the masked variant where each row is XORed with a lazily sampled
    per-row pad H(i),
  * the share-encoded variant where each row is hidden behind a random
    polynomial of degree 2d-1: the d row bits sit at d secret evaluation
    points, d more values are free randomness, and only 2d share pairs are
    ever served through the query surface.

Recovering a share-encoded row needs all 2d shares; any d of them together
with the prefix are jointly uniform, which the security-game harness here
measures directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyDatabase,
    FieldTooSmall,
    IncompleteShares,
    NotBinary,
)
from .field import FieldContext, eval_interpolant, sample_distinct


@dataclass(frozen=True, slots=True)
class BinaryDatabase:
    rows: np.ndarray  # shape (n, d), uint8 entries in {0, 1}

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.uint8)
        if rows.ndim != 2:
            raise DimensionMismatch(f"expected 2-d row matrix, got shape {rows.shape}")
        if rows.size and rows.max() > 1:
            raise DimensionMismatch("entries must be 0/1")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def random(cls, n: int, d: int, rng) -> "BinaryDatabase":
        return cls(rng.integers(0, 2, size=(n, d), dtype=np.uint8))


def exact_marginals(db: BinaryDatabase) -> np.ndarray:
    """Column means of the database."""
    if db.n == 0:
        raise EmptyDatabase("marginals of an empty database")
    return db.rows.mean(axis=0)


# -- random-oracle masking ------------------------------------------------------


class RandomOracle:
    """Lazily pinned map from row index to a d-bit pad.

    Single writer: population happens on first access from the bound rng
    stream; afterwards answers never change.
    """

    def __init__(self, d: int, rng):
        self.d = d
        self._rng = rng
        self._table: dict[int, np.ndarray] = {}

    def __call__(self, i: int) -> np.ndarray:
        pad = self._table.get(i)
        if pad is None:
            pad = self._rng.integers(0, 2, size=self.d, dtype=np.uint8)
            self._table[i] = pad
        return pad


@dataclass(frozen=True, slots=True)
class MaskedDatabase:
    rows: np.ndarray
    oracle: RandomOracle

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def verify_against(self, db: BinaryDatabase) -> bool:
        return bool(np.all(self.rows == (db.rows ^ np.stack(
            [self.oracle(i) for i in range(db.n)]))))


def encode_ro(db: BinaryDatabase, oracle: RandomOracle) -> MaskedDatabase:
    """Mask each row with its pad; applying twice restores the input."""
    if oracle.d != db.d:
        raise DimensionMismatch(f"oracle width {oracle.d} != database width {db.d}")
    pads = np.stack([oracle(i) for i in range(db.n)]) if db.n else \
        np.empty((0, db.d), dtype=np.uint8)
    return MaskedDatabase(db.rows ^ pads, oracle)


# -- share encoding --------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ShareRow:
    """One row's encoding: d prefix points plus 2d (point, value) shares.

    hidden carries the defining constraints (nodes, values) of the row
    polynomial for test oracles only; nothing in the query surface reads it.
    """

    prefix: tuple            # d evaluation points for the row bits
    points: tuple            # 2d share points
    values: tuple            # 2d share values
    d: int
    ctx: FieldContext
    hidden: tuple = dataclass_field(repr=False, default=())

    def hidden_eval(self, xs):
        """Test-only escrow: evaluate the row polynomial at arbitrary points."""
        nodes, vals = self.hidden
        return _eval_nodes(self.ctx, list(nodes), list(vals), [int(x) for x in xs])


def eval_shares(ctx: FieldContext, nodes, vals, targets) -> np.ndarray:
    """Evaluate the interpolant through (nodes, vals) at targets.

    Array in, int64 array out; dispatches to the vectorized tier when the
    modulus supports it, otherwise exact scalar arithmetic.
    """
    fast = ctx.fast
    if fast is not None:
        out = fast.eval_interpolant(
            np.asarray(nodes, dtype=np.float64),
            np.asarray(vals, dtype=np.float64),
            np.asarray(targets, dtype=np.float64))
        return out.astype(np.int64)
    res = eval_interpolant([int(v) for v in nodes], [int(v) for v in vals],
                           [int(v) for v in targets], ctx)
    return np.array(res, dtype=object if ctx.q > (1 << 62) else np.int64)


def _eval_nodes(ctx: FieldContext, nodes, vals, targets):
    return [int(v) for v in eval_shares(ctx, nodes, vals, targets)]


def _sample_row_points(ctx: FieldContext, d: int, rng):
    fast = ctx.fast
    if fast is not None:
        alphas = [int(v) for v in fast.sample_distinct(3 * d, rng)]
        zs = [int(v) for v in fast.uniform(d, rng)]
    else:
        alphas = sample_distinct(ctx, 3 * d, rng)
        zs = [int(v) for v in rng.integers(0, ctx.q, size=d, dtype=np.uint64)]
    return alphas, zs


def encode_row_ss(bits, ctx: FieldContext, rng) -> ShareRow:
    """Share-encode one row of bits."""
    d = len(bits)
    if ctx.q <= 4 * d:
        raise FieldTooSmall(f"need field order > {4 * d}, got {ctx.q}")
    alphas, zs = _sample_row_points(ctx, d, rng)
    nodes = alphas[:2 * d]
    vals = [int(b) for b in bits] + zs
    tail = _eval_nodes(ctx, nodes, vals, alphas[2 * d:])
    return ShareRow(
        prefix=tuple(alphas[:d]),
        points=tuple(alphas[d:]),
        values=tuple(zs + tail),
        d=d,
        ctx=ctx,
        hidden=(tuple(nodes), tuple(vals)),
    )


def encode_ss(db: BinaryDatabase, ctx: FieldContext, rng) -> list[ShareRow]:
    """Share-encode every row of the database."""
    return [encode_row_ss(db.rows[i], ctx, rng) for i in range(db.n)]


def decode_shares(prefix, points, values, d: int, ctx: FieldContext) -> np.ndarray:
    """Interpolate through all 2d shares and read the bits off the prefix."""
    if len(points) < 2 * d or len(values) < 2 * d:
        raise IncompleteShares(f"decoding needs {2 * d} shares, got {len(points)}")
    recovered = eval_shares(ctx, points, values, prefix)
    bad = (recovered != 0) & (recovered != 1)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise NotBinary(f"prefix value {recovered[j]} at position {j} is not a bit")
    return np.asarray(recovered.tolist(), dtype=np.uint8) \
        if recovered.dtype == object else recovered.astype(np.uint8)


def decode_ss(row: ShareRow) -> np.ndarray:
    return decode_shares(row.prefix, row.points, row.values, row.d, row.ctx)


# -- security game ----------------------------------------------------------------


class EncodingView:
    """Challenger-side query surface over a single encoded row.

    Serves share pairs by index; counts distinct queries; releases the
    prefix alongside the first answer without charging for it.
    """

    def __init__(self, row: ShareRow):
        self._row = row
        self._served: dict[int, tuple] = {}
        self.prefix = None

    @property
    def d(self) -> int:
        return self._row.d

    @property
    def queries_used(self) -> int:
        return len(self._served)

    def query(self, j: int):
        """Share pair j in [1, 2d]."""
        if not (1 <= j <= 2 * self._row.d):
            raise IncompleteShares(f"share index {j} out of range")
        if self.prefix is None:
            self.prefix = self._row.prefix
        hit = self._served.get(j)
        if hit is None:
            hit = (self._row.points[j - 1], self._row.values[j - 1])
            self._served[j] = hit
        return hit


def security_game_experiment(attacker, q: int, d: int, x, trials: int, rng,
                             ctx: FieldContext) -> dict:
    """Run the hidden-coin distinguishing game and return outcome counts.

    Per trial the challenger encodes either x or the all-zeros row, the
    attacker makes at most q share queries through an EncodingView and
    guesses the coin. Trials where the attacker overdraws its budget count
    as losses rather than raising.
    """
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (d,):
        raise DimensionMismatch(f"x must have length {d}")
    zeros = np.zeros(d, dtype=np.uint8)
    successes = 0
    budget_violations = 0
    for _ in range(trials):
        b = int(rng.integers(0, 2))
        row = encode_row_ss(x if b == 0 else zeros, ctx, rng)
        view = EncodingView(row)
        guess = attacker(view, q, d, rng)
        if view.queries_used > q:
            budget_violations += 1
            continue
        if int(guess) == b:
            successes += 1
    return {
        "trials": trials,
        "successes": successes,
        "budget_violations": budget_violations,
        "success_rate": successes / trials,
    }


# -- built-in attackers ------------------------------------------------------------


def transcript_parity_attacker(view: EncodingView, q: int, d: int, rng) -> int:
    """Best-effort distinguisher at budget q: hashes its transcript to a bit.

    Against a hiding encoding any such rule wins with probability exactly
    one half.
    """
    total = 0
    for j in range(1, min(q, 2 * d) + 1):
        _, value = view.query(j)
        total += int(value)
    return total & 1


def decode_compare_attacker(x):
    """Full-budget attacker: decode all 2d shares and compare against x."""
    x = np.asarray(x, dtype=np.uint8)

    def attack(view: EncodingView, q: int, d: int, rng) -> int:
        points = []
        values = []
        for j in range(1, 2 * d + 1):
            pt, val = view.query(j)
            points.append(pt)
            values.append(val)
        row = ShareRow(prefix=tuple(view.prefix), points=tuple(points),
                       values=tuple(values), d=d, ctx=view._row.ctx)
        try:
            bits = decode_ss(row)
        except NotBinary:
            return 1
        return 0 if np.array_equal(bits, x) else 1

    return attack

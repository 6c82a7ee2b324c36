"""Row-permuted, padded, column-permuted codebooks and their tracer.

Generation permutes the base codebook's rows with a public permutation,
appends ell all-ones and ell all-zeros columns, then scatters all columns
with a secret permutation. Tracing inverts the column permutation, keeps
the original code positions, and delegates to the base tracer, so every
guarantee of the base code carries over unchanged.

The feasibility predicate and the column-flip sampling trial live here too:
a word assembled from a row sample stays feasible for the full codebook
except when the flipped column is constant in the sample but not globally,
which the padding makes rare (at most d/ell).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tardos
from .errors import FpcLabError, LengthMismatch
from .tardos import Codebook, TardosSecretState, TraceOutcome


@dataclass(frozen=True, slots=True)
class PaddedCodebook:
    bits: np.ndarray      # shape (n, d_prime)
    d_original: int
    ell: int

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def d_prime(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True, slots=True)
class PrppcSecretState:
    inner: TardosSecretState
    inner_codebook: Codebook
    pi: np.ndarray        # secret column permutation, pi[j] = image of column j
    pi_row: np.ndarray    # public row permutation, pi_row[i] = image of row i

    def row_position(self, user: int) -> int:
        """Padded-codebook row (1-based) where 1-based inner user sits."""
        return int(self.pi_row[user - 1]) + 1

    def user_at_position(self, position: int) -> int:
        """Inverse of row_position."""
        return int(np.argwhere(self.pi_row == position - 1)[0, 0]) + 1


def gen_prime(n: int, c: int, xi: float, ell: int, rng,
              d_override: int | None = None) -> tuple[PaddedCodebook, PrppcSecretState]:
    """Sample the base code, permute rows, pad 2*ell constant columns,
    permute columns."""
    if ell < 1:
        raise FpcLabError(f"ell must be >= 1, got {ell}")
    codebook, st = tardos.tardos_gen(n, c, xi, rng, d_override=d_override)
    d = codebook.d
    d_prime = d + 2 * ell

    pi_row = rng.permutation(n)
    row_permuted = np.empty_like(codebook.bits)
    row_permuted[pi_row] = codebook.bits

    padded = np.empty((n, d_prime), dtype=np.uint8)
    padded[:, :d] = row_permuted
    padded[:, d:d + ell] = 1
    padded[:, d + ell:] = 0

    pi = rng.permutation(d_prime)
    scattered = np.empty_like(padded)
    scattered[:, pi] = padded

    return (PaddedCodebook(scattered, d_original=d, ell=ell),
            PrppcSecretState(inner=st, inner_codebook=codebook, pi=pi, pi_row=pi_row))


def trace_prime(answer, st: PrppcSecretState) -> TraceOutcome:
    """Un-permute the original code positions and delegate to the base tracer."""
    answer = np.asarray(answer, dtype=np.uint8)
    d = st.inner.params.d
    d_prime = st.pi.shape[0]
    if answer.shape != (d_prime,):
        raise LengthMismatch(f"answer length {answer.shape} != ({d_prime},)")
    original = answer[st.pi[:d]]
    # scoring row u of the inner book equals scoring row pi_row(u) of the
    # permuted book, so the outcome is already an inner user index
    return tardos.tardos_trace(original, st.inner, st.inner_codebook)


def unpermute_columns(padded: PaddedCodebook, st: PrppcSecretState) -> np.ndarray:
    """Reconstruct the pre-scatter layout: code columns, ones, zeros."""
    return padded.bits[:, st.pi]


def is_feasible(word, rows) -> bool:
    """True iff every column of the word matches some row at that column."""
    word = np.asarray(word, dtype=np.uint8)
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.ndim != 2 or word.shape != (rows.shape[1],):
        raise LengthMismatch(
            f"word length {word.shape} incompatible with matrix {rows.shape}")
    return bool(np.all((rows == word[None, :]).any(axis=0)))


def constant_columns(rows: np.ndarray, bit: int) -> np.ndarray:
    """Indices of columns equal to bit in every row."""
    rows = np.asarray(rows, dtype=np.uint8)
    if bit:
        return np.flatnonzero(rows.all(axis=0))
    return np.flatnonzero(~rows.any(axis=0))


def feasible_sample_trial(n: int, c: int, xi: float, ell: int, rng,
                          d_override: int | None = None) -> bool:
    """One column-flip adversary trial; True when the bad event occurred.

    The adversary starts from the coalition majority word (always feasible
    for the sample, hence for the full book), picks a bit b, then flips the
    word at a uniformly chosen column that is constant-b within the sample.
    The bad event: the flipped word is feasible for the full book but no
    longer for the sample, i.e. the column was constant only in the sample.
    """
    padded, st = gen_prime(n, c, xi, ell, rng, d_override=d_override)
    sample = padded.bits[:c]
    word = (sample.mean(axis=0) >= 0.5).astype(np.uint8)

    b = int(rng.integers(0, 2))
    candidates = constant_columns(sample, b)
    # the ell padded all-b columns guarantee candidates is nonempty
    j = int(candidates[rng.integers(0, candidates.shape[0])])
    flipped = word.copy()
    flipped[j] = 1 - b

    in_full = is_feasible(flipped, padded.bits)
    in_sample = is_feasible(flipped, sample)
    return in_full and not in_sample

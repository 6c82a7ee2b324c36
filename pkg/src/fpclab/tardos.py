"""Binary fingerprinting code: biased codebook generation and score tracing.

Symmetric-score variant. Column biases follow the arcsine density truncated
to (t, 1-t) with cutoff t = 1/(300c); code length defaults to
ceil(100 c^2 ln(n/xi)) and the accusation threshold is coupled to the
actual length as Z = d/(5c), which equals 20 c ln(n/xi) at the default
length. Experiments may pin d directly; the coupling keeps the threshold
meaningful at any length.

User indices are 1-based at the public surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCoalition, InvalidSecurity, LengthMismatch

LENGTH_CONSTANT = 100.0      # A in d = ceil(A c^2 ln(n/xi))
THRESHOLD_RATIO = 5.0        # Z = d / (THRESHOLD_RATIO * c)
CUTOFF_CONSTANT = 300.0      # bias cutoff t = 1 / (CUTOFF_CONSTANT * c)


@dataclass(frozen=True, slots=True)
class TardosParams:
    n: int
    c: int
    xi: float
    d: int
    cutoff: float
    threshold: float


@dataclass(frozen=True, slots=True)
class Codebook:
    bits: np.ndarray  # shape (n, d), uint8 entries in {0, 1}

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def d(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True, slots=True)
class TardosSecretState:
    biases: np.ndarray  # shape (d,), each in (cutoff, 1 - cutoff)
    params: TardosParams


@dataclass(frozen=True, slots=True)
class TraceOutcome:
    """Accused user (1-based) or bottom."""

    accused: int | None

    @property
    def is_bottom(self) -> bool:
        return self.accused is None


BOTTOM = TraceOutcome(None)


def code_length(n: int, c: int, xi: float) -> int:
    return math.ceil(LENGTH_CONSTANT * c * c * math.log(n / xi))


def _params(n, c, xi, d_override):
    if not (4 <= c <= n):
        raise InvalidCoalition(f"need 4 <= c <= n, got c={c}, n={n}")
    if not (0.0 < xi < 1.0):
        raise InvalidSecurity(f"need 0 < xi < 1, got {xi}")
    d = d_override if d_override is not None else code_length(n, c, xi)
    if d < 1:
        raise InvalidSecurity(f"code length {d} < 1")
    cutoff = 1.0 / (CUTOFF_CONSTANT * c)
    threshold = d / (THRESHOLD_RATIO * c)
    return TardosParams(n=n, c=c, xi=xi, d=d, cutoff=cutoff, threshold=threshold)


def sample_biases(d: int, cutoff: float, rng) -> np.ndarray:
    """Inverse-CDF draw from the arcsine density restricted to (t, 1-t).

    p = sin^2(u) with u uniform on (asin sqrt t, asin sqrt(1-t)).
    """
    lo = math.asin(math.sqrt(cutoff))
    hi = math.asin(math.sqrt(1.0 - cutoff))
    u = rng.uniform(lo, hi, size=d)
    return np.sin(u) ** 2


def tardos_gen(n: int, c: int, xi: float, rng,
               d_override: int | None = None) -> tuple[Codebook, TardosSecretState]:
    """Generate the codebook and the secret state (biases + threshold)."""
    params = _params(n, c, xi, d_override)
    p = sample_biases(params.d, params.cutoff, rng)
    bits = (rng.random((n, params.d)) < p).astype(np.uint8)
    return Codebook(bits), TardosSecretState(biases=p, params=params)


def score_matrix(word: np.ndarray, bits: np.ndarray, biases: np.ndarray) -> np.ndarray:
    """Per-user, per-column symmetric scores for the given word."""
    p = biases
    match1 = np.sqrt((1.0 - p) / p)    # word 1, bit 1
    match0 = np.sqrt(p / (1.0 - p))    # word 0, bit 0
    w = word.astype(bool)
    b = bits.astype(bool)
    return np.where(w, np.where(b, match1, -match0),
                    np.where(b, -match1, match0))


def accusation_scores(word: np.ndarray, st: TardosSecretState,
                      bits: np.ndarray) -> np.ndarray:
    return score_matrix(word, bits, st.biases).sum(axis=1)


def tardos_trace(word, st: TardosSecretState, codebook: Codebook) -> TraceOutcome:
    """Accuse the highest scorer above the threshold, else bottom."""
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (st.params.d,):
        raise LengthMismatch(f"word length {word.shape} != ({st.params.d},)")
    scores = accusation_scores(word, st, codebook.bits)
    top = int(np.argmax(scores))
    if scores[top] > st.params.threshold:
        return TraceOutcome(top + 1)
    return BOTTOM


# -- serialization -------------------------------------------------------------

def codebook_to_json(codebook: Codebook, st: TardosSecretState) -> str:
    payload = {
        "n": codebook.n,
        "d": codebook.d,
        "rows": ["".join("1" if b else "0" for b in row) for row in codebook.bits],
        "biases": [repr(float(p)) for p in st.biases],
        "threshold": st.params.threshold,
        "params": {"n": st.params.n, "c": st.params.c, "xi": st.params.xi,
                   "d": st.params.d, "cutoff": st.params.cutoff},
    }
    return json.dumps(payload, sort_keys=True)


def codebook_from_json(blob: str) -> tuple[Codebook, TardosSecretState]:
    data = json.loads(blob)
    bits = np.array([[int(ch) for ch in row] for row in data["rows"]], dtype=np.uint8)
    biases = np.array([float(s) for s in data["biases"]])
    pp = data["params"]
    params = TardosParams(n=pp["n"], c=pp["c"], xi=pp["xi"], d=pp["d"],
                          cutoff=pp["cutoff"], threshold=data["threshold"])
    return Codebook(bits), TardosSecretState(biases=biases, params=params)

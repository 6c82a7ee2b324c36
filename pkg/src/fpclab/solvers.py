"""Reference algorithms that drive the query-metered oracles.

Three surfaces: the private full-scan solver (decode everything, add
calibrated Gaussian noise), the non-private row sampler (decode a Hoeffding
sized sample), and a by-hand wrapper for arbitrary candidate algorithms
under attack. The row-query twins of the first two serve the masked-database
problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    OutputDimensionMismatch,
    PreconditionUnmet,
    SampleExceedsPopulation,
)
from .oracle import QueryLedger
from .problems import decode_shares


@dataclass(frozen=True, slots=True)
class SolverConfig:
    epsilon: float = 1.0
    delta: float = 1e-3
    alpha: float = 1 / 3
    p_fail: float = 1 / 3
    sample_rows: int | None = None
    allow_below_threshold: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise PreconditionUnmet(f"epsilon must be > 0, got {self.epsilon}")
        for name in ("delta", "alpha", "p_fail"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise PreconditionUnmet(f"{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True, slots=True)
class SolverReport:
    output: np.ndarray
    queries_used: QueryLedger
    noise_sigma: float | None = None
    pre_clamp: np.ndarray | None = None
    sampled_rows: tuple = ()
    decoded: np.ndarray | None = None


def gaussian_threshold_n(d: int, epsilon: float, delta: float) -> float:
    """Smallest database size at which the full-scan mechanism is admitted."""
    return math.sqrt(200.0 * d * math.log(20.0 * d) * math.log(1.25 / delta)) / epsilon


def gaussian_sigma(d: int, n: int, epsilon: float, delta: float) -> float:
    """Noise scale of the mechanism: l2 sensitivity sqrt(d)/n times the
    standard Gaussian-mechanism multiplier."""
    return math.sqrt(2.0 * math.log(1.25 / delta)) * math.sqrt(d) / (n * epsilon)


def hoeffding_sample_rows(d: int, alpha: float, p_fail: float) -> int:
    """Rows needed so every column mean lands within alpha, union bounded."""
    return math.ceil(math.log(2.0 * d / p_fail) / (2.0 * alpha * alpha))


def box_muller(rng, k: int) -> np.ndarray:
    """k standard normals from the uniform stream, platform independent."""
    pairs = (k + 1) // 2
    u1 = 1.0 - rng.random(pairs)   # (0, 1]
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:k]


def _decode_row(oracle, i: int) -> np.ndarray:
    points, values = oracle.query_row_all(i)
    prefix = np.asarray(oracle.prefix(i), dtype=np.int64)
    return decode_shares(prefix, points, values, oracle.d, oracle.ctx)


def gaussian_dp_solver(oracle, cfg: SolverConfig, rng) -> SolverReport:
    """Decode every row via attribute queries, release noisy marginals.

    Ledger total comes out at exactly 2*n*d. Noise is Box-Muller from the
    provided stream with sigma from the l2 sensitivity; the output is
    clamped to [0,1] (post-processing).
    """
    n, d = oracle.n, oracle.d
    threshold = gaussian_threshold_n(d, cfg.epsilon, cfg.delta)
    if n < threshold and not cfg.allow_below_threshold:
        raise PreconditionUnmet(
            f"n={n} below the mechanism's admission threshold {threshold:.1f}")
    decoded = np.empty((n, d), dtype=np.uint8)
    for i in range(1, n + 1):
        decoded[i - 1] = _decode_row(oracle, i)
    exact = decoded.mean(axis=0)
    sigma = gaussian_sigma(d, n, cfg.epsilon, cfg.delta)
    noisy = exact + sigma * box_muller(rng, d)
    return SolverReport(output=np.clip(noisy, 0.0, 1.0),
                        queries_used=oracle.ledger_report(),
                        noise_sigma=sigma,
                        pre_clamp=noisy,
                        decoded=decoded)


def subsample_solver(oracle, cfg: SolverConfig, rng) -> SolverReport:
    """Decode a uniform row sample and release the sample marginals.

    Sample size defaults to the Hoeffding bound for (alpha, p_fail);
    ledger total comes out at exactly 2*d*sample_rows.
    """
    n, d = oracle.n, oracle.d
    k = cfg.sample_rows if cfg.sample_rows is not None else \
        hoeffding_sample_rows(d, cfg.alpha, cfg.p_fail)
    if k > n:
        raise SampleExceedsPopulation(f"sample of {k} rows from {n}")
    chosen = rng.choice(n, size=k, replace=False) + 1
    decoded = np.empty((k, d), dtype=np.uint8)
    for idx, i in enumerate(chosen):
        decoded[idx] = _decode_row(oracle, int(i))
    return SolverReport(output=decoded.mean(axis=0),
                        queries_used=oracle.ledger_report(),
                        sampled_rows=tuple(int(i) for i in chosen),
                        decoded=decoded)


def gaussian_dp_solver_ro(oracle, cfg: SolverConfig, rng) -> SolverReport:
    """Row-query variant of the private solver for masked databases."""
    n, d = oracle.n, oracle.d
    threshold = gaussian_threshold_n(d, cfg.epsilon, cfg.delta)
    if n < threshold and not cfg.allow_below_threshold:
        raise PreconditionUnmet(
            f"n={n} below the mechanism's admission threshold {threshold:.1f}")
    decoded = np.empty((n, d), dtype=np.uint8)
    for i in range(1, n + 1):
        decoded[i - 1] = oracle.masked_rows[i - 1] ^ oracle.row_query(i)
    exact = decoded.mean(axis=0)
    sigma = gaussian_sigma(d, n, cfg.epsilon, cfg.delta)
    noisy = exact + sigma * box_muller(rng, d)
    return SolverReport(output=np.clip(noisy, 0.0, 1.0),
                        queries_used=oracle.ledger_report(),
                        noise_sigma=sigma,
                        pre_clamp=noisy,
                        decoded=decoded)


def subsample_solver_ro(oracle, cfg: SolverConfig, rng) -> SolverReport:
    """Row-query variant of the sampler for masked databases."""
    n, d = oracle.n, oracle.d
    k = cfg.sample_rows if cfg.sample_rows is not None else \
        hoeffding_sample_rows(d, cfg.alpha, cfg.p_fail)
    if k > n:
        raise SampleExceedsPopulation(f"sample of {k} rows from {n}")
    chosen = rng.choice(n, size=k, replace=False) + 1
    decoded = np.empty((k, d), dtype=np.uint8)
    for idx, i in enumerate(chosen):
        decoded[idx] = oracle.masked_rows[int(i) - 1] ^ oracle.row_query(int(i))
    return SolverReport(output=decoded.mean(axis=0),
                        queries_used=oracle.ledger_report(),
                        sampled_rows=tuple(int(i) for i in chosen),
                        decoded=decoded)


def candidate_interface(algorithm, oracle) -> SolverReport:
    """Wrap an arbitrary oracle-driving callable as a solver under attack."""
    out = algorithm(oracle)
    if isinstance(out, SolverReport):
        report = out
        vec = np.asarray(report.output, dtype=np.float64)
    else:
        vec = np.asarray(out, dtype=np.float64)
        report = SolverReport(output=vec, queries_used=oracle.ledger_report())
    if vec.shape != (oracle.d,):
        raise OutputDimensionMismatch(
            f"candidate produced shape {vec.shape}, oracle width {oracle.d}")
    return report

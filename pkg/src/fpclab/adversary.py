"""Reidentification adversaries that simulate oracles around attacked algorithms.

Both adversaries receive a coalition (the first c rows of a padded,
permuted codebook), embed it into the attacked algorithm's view without the
algorithm being able to tell, round the algorithm's output to a word, and
hand that word to the tracer.

The row-query adversary serves pad lookups so that the j-th distinct
queried row decodes to coalition member j. The attribute-query adversary
answers fresh queries with uniform share pairs until a row has been queried
past the hiding threshold, then commits that row to the next coalition
member by drawing the unique consistent polynomial; it never commits more
than c rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import prppc
from .errors import CommitBudgetExceeded, IndexOutOfRange, QueryBudgetExceeded, WrongMode
from .field import FieldContext, sample_distinct
from .oracle import AttributeAnswer, QueryLedger
from .problems import eval_shares
from .prppc import PaddedCodebook, PrppcSecretState
from .solvers import candidate_interface
from .tardos import TraceOutcome


@dataclass(frozen=True, slots=True)
class CoalitionSample:
    rows: np.ndarray                  # (c, d_prime) coalition bits
    padded: PaddedCodebook            # the instance the rows came from
    st: PrppcSecretState

    @property
    def c(self) -> int:
        return self.rows.shape[0]

    @property
    def d_prime(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True, slots=True)
class AttackReport:
    outcome: TraceOutcome
    rounded_answer: np.ndarray
    feasible_for_sample: bool
    feasible_for_full: bool
    commit_count: int
    ledger: QueryLedger
    budget_violation: bool
    accused_position: int | None      # padded-book row of the accused user
    committed_positions: tuple        # padded-book rows embedded this run

    @property
    def accused_committed(self) -> bool:
        return (self.accused_position is not None
                and self.accused_position in self.committed_positions)


def sample_coalition(n: int, c: int, xi: float, ell: int, rng,
                     d_override: int | None = None) -> CoalitionSample:
    """Generate a fresh instance and take its first c rows."""
    padded, st = prppc.gen_prime(n, c, xi, ell, rng, d_override=d_override)
    return CoalitionSample(rows=padded.bits[:c].copy(), padded=padded, st=st)


def round_answer(a) -> np.ndarray:
    """Entrywise rounding to bits; exact halves go to 1."""
    return (np.asarray(a, dtype=np.float64) >= 0.5).astype(np.uint8)


# -- attribute-query adversary ---------------------------------------------------


class _RowSim:
    """Lazy share state for one simulated row."""

    __slots__ = ("alphas", "z", "tail", "slot_of", "fresh", "member")

    def __init__(self, d: int, ctx: FieldContext, rng):
        fast = ctx.fast
        if fast is not None:
            self.alphas = fast.sample_distinct(3 * d, rng).astype(np.int64)
            self.z = fast.uniform(d, rng).astype(np.int64)
        else:
            self.alphas = np.array(sample_distinct(ctx, 3 * d, rng), dtype=np.int64)
            self.z = rng.integers(0, ctx.q, size=d, dtype=np.uint64).astype(np.int64)
        self.tail = None                 # filled at commit
        self.slot_of = np.zeros(2 * d, dtype=np.int32)   # attribute j -> slot
        self.fresh = 0                   # distinct attributes served so far
        self.member = None               # coalition member index once committed


class SimulatedSSOracle:
    """Attribute-query surface the attacked algorithm drives.

    Responses are uniform share pairs while a row stays below d distinct
    queries; the (d+1)-th distinct query commits the row to the next
    coalition member via the unique degree-(2d-1) polynomial through the
    member's bits at the prefix and the already-served random responses.
    """

    mode = "attribute"

    def __init__(self, coalition_rows: np.ndarray, n: int, ctx: FieldContext, rng):
        self.n = n
        self.d = coalition_rows.shape[1]
        self.ctx = ctx
        self._coalition = coalition_rows
        self._budget = coalition_rows.shape[0]
        self._rng = rng
        self._rows: dict[int, _RowSim] = {}
        self.commit_count = 0
        self.commit_order: list[int] = []    # oracle row index per commit
        self.ledger = QueryLedger()

    def _row(self, i: int) -> _RowSim:
        if not (1 <= i <= self.n):
            raise IndexOutOfRange(f"row {i} outside [1, {self.n}]")
        sim = self._rows.get(i)
        if sim is None:
            sim = _RowSim(self.d, self.ctx, self._rng)
            self._rows[i] = sim
        return sim

    def _commit(self, i: int, sim: _RowSim):
        if self.commit_count >= self._budget:
            raise CommitBudgetExceeded(
                f"row {i} would be commitment {self.commit_count + 1} "
                f"of budget {self._budget}")
        self.commit_count += 1
        self.commit_order.append(i)
        sim.member = self.commit_count
        d = self.d
        bits = self._coalition[sim.member - 1].astype(np.int64)
        nodes = sim.alphas[:2 * d]
        vals = np.concatenate([bits, sim.z])
        sim.tail = np.asarray(
            eval_shares(self.ctx, nodes, vals, sim.alphas[2 * d:]), dtype=np.int64)

    def _slot_answer(self, sim: _RowSim, slot: int) -> AttributeAnswer:
        d = self.d
        point = int(sim.alphas[d + slot - 1])
        if slot <= d:
            return AttributeAnswer(point, int(sim.z[slot - 1]))
        return AttributeAnswer(point, int(sim.tail[slot - d - 1]))

    def attribute_query(self, i: int, j: int) -> AttributeAnswer:
        sim = self._row(i)
        d = self.d
        if not (1 <= j <= 2 * d):
            raise IndexOutOfRange(f"attribute {j} outside [1, {2 * d}]")
        slot = int(sim.slot_of[j - 1])
        if slot == 0:
            sim.fresh += 1
            slot = sim.fresh
            sim.slot_of[j - 1] = slot
            if slot == d + 1:
                self._commit(i, sim)
            self.ledger.charge_attribute(i)
            self.ledger.prefix_released.add(i)
        return self._slot_answer(sim, slot)

    def query_row_all(self, i: int):
        """Batched full-row query; identical semantics, vectorized answers."""
        sim = self._row(i)
        d = self.d
        unassigned = np.flatnonzero(sim.slot_of == 0)
        for j0 in unassigned:
            sim.fresh += 1
            sim.slot_of[j0] = sim.fresh
            if sim.fresh == d + 1:
                self._commit(i, sim)
            self.ledger.charge_attribute(i)
        if unassigned.size:
            self.ledger.prefix_released.add(i)
        slots = sim.slot_of.astype(np.int64)
        points = sim.alphas[d + slots - 1]
        values = np.where(slots <= d,
                          sim.z[np.minimum(slots, d) - 1],
                          sim.tail[np.maximum(slots - d, 1) - 1]
                          if sim.tail is not None else 0)
        return points.copy(), np.asarray(values, dtype=np.int64)

    def prefix(self, i: int):
        if i not in self.ledger.prefix_released:
            raise IndexOutOfRange(f"prefix of row {i} not yet released")
        return self._rows[i].alphas[:self.d]

    def row_query(self, i: int):
        raise WrongMode("row queries are not available on an attribute oracle")

    def ledger_report(self) -> QueryLedger:
        return self.ledger.snapshot()

    def consistency_check(self) -> bool:
        """Committed polynomials must reproduce every pre-commit response."""
        d = self.d
        for sim in self._rows.values():
            if sim.member is None:
                continue
            nodes = sim.alphas[:2 * d]
            bits = self._coalition[sim.member - 1].astype(np.int64)
            vals = np.concatenate([bits, sim.z])
            again = np.asarray(
                eval_shares(self.ctx, nodes, vals, sim.alphas[d:2 * d]),
                dtype=np.int64)
            if not np.array_equal(again, sim.z):
                return False
        return True


def adversary_ss(coalition: CoalitionSample, algorithm, rng,
                 ctx: FieldContext) -> AttackReport:
    """Run the attribute-query attack around the given algorithm.

    algorithm receives the simulated oracle and must return a vector in
    [0,1]^d (or a SolverReport). Budget overruns are recorded, not raised.
    """
    oracle = SimulatedSSOracle(coalition.rows, coalition.padded.n, ctx, rng)
    return _run_attack(coalition, algorithm, oracle)


# -- row-query adversary -----------------------------------------------------------


class SimulatedROOracle:
    """Row-query surface: pads are forged so queried rows decode to coalition
    members in first-query order."""

    mode = "row"

    def __init__(self, coalition_rows: np.ndarray, n: int, rng):
        self.n = n
        self.d = coalition_rows.shape[1]
        self._coalition = coalition_rows
        self._budget = coalition_rows.shape[0]
        self.masked_rows = rng.integers(0, 2, size=(n, self.d), dtype=np.uint8)
        self.ledger = QueryLedger()
        self._pads: dict[int, np.ndarray] = {}
        self.commit_order: list[int] = []

    @property
    def commit_count(self) -> int:
        return len(self.commit_order)

    def row_query(self, i: int) -> np.ndarray:
        if not (1 <= i <= self.n):
            raise IndexOutOfRange(f"row {i} outside [1, {self.n}]")
        pad = self._pads.get(i)
        if pad is None:
            j = len(self.commit_order) + 1
            if j > self._budget:
                raise QueryBudgetExceeded(
                    f"distinct row query {j} exceeds budget {self._budget}")
            self.commit_order.append(i)
            pad = self.masked_rows[i - 1] ^ self._coalition[j - 1]
            self._pads[i] = pad
            self.ledger.charge_row(self.d)
        return pad

    def attribute_query(self, i: int, j: int):
        raise WrongMode("attribute queries are not available on a row oracle")

    def ledger_report(self) -> QueryLedger:
        return self.ledger.snapshot()


def adversary_ro(coalition: CoalitionSample, algorithm, rng) -> AttackReport:
    """Run the row-query attack around the given algorithm."""
    oracle = SimulatedROOracle(coalition.rows, coalition.padded.n, rng)
    return _run_attack(coalition, algorithm, oracle)


# -- shared tail --------------------------------------------------------------------


def _run_attack(coalition: CoalitionSample, algorithm, oracle) -> AttackReport:
    st = coalition.st
    budget_violation = False
    try:
        report = candidate_interface(algorithm, oracle)
        rounded = round_answer(report.output)
        outcome = prppc.trace_prime(rounded, st)
    except (CommitBudgetExceeded, QueryBudgetExceeded):
        budget_violation = True
        rounded = np.zeros(coalition.d_prime, dtype=np.uint8)
        outcome = TraceOutcome(None)
    committed = tuple(range(1, oracle.commit_count + 1))
    accused_position = None if outcome.is_bottom else st.row_position(outcome.accused)
    return AttackReport(
        outcome=outcome,
        rounded_answer=rounded,
        feasible_for_sample=bool(
            not budget_violation and prppc.is_feasible(rounded, coalition.rows)),
        feasible_for_full=bool(
            not budget_violation and prppc.is_feasible(rounded, coalition.padded.bits)),
        commit_count=oracle.commit_count,
        ledger=oracle.ledger_report(),
        budget_violation=budget_violation,
        accused_position=accused_position,
        committed_positions=committed,
    )


def neighbor_experiment(coalition: CoalitionSample, algorithm, removed_index: int,
                        rng, ctx: FieldContext | None = None,
                        kind: str = "ss") -> AttackReport:
    """Rerun the attack with coalition row removed_index zeroed out.

    The all-zeros row is the fixed replacement element, so the modified
    sample is a neighboring database of the intact one.
    """
    if not (1 <= removed_index <= coalition.c):
        raise IndexOutOfRange(f"removed index {removed_index} outside [1, {coalition.c}]")
    rows = coalition.rows.copy()
    rows[removed_index - 1] = 0
    modified = CoalitionSample(rows=rows, padded=coalition.padded, st=coalition.st)
    if kind == "ss":
        return adversary_ss(modified, algorithm, rng, ctx)
    if kind == "ro":
        return adversary_ro(modified, algorithm, rng)
    raise ValueError(f"unknown adversary kind {kind!r}")

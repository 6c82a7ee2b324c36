"""Query-metered access to encoded databases.

The ledger is the measurement instrument of the lab: every algorithm runs
against an oracle and the ledger's distinct-query counts are what the
experiments assert on. Repeated identical queries are answered from a
transcript cache and charged once, so the metered quantity is the number
of distinct queries. Row and attribute indices are 1-based at this surface.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, WrongMode
from .problems import MaskedDatabase, ShareRow

AttributeAnswer = namedtuple("AttributeAnswer", ["point", "value"])


@dataclass
class QueryLedger:
    per_row: dict = field(default_factory=dict)
    total: int = 0
    row_queries: int = 0
    prefix_released: set = field(default_factory=set)

    def charge_attribute(self, i: int):
        self.per_row[i] = self.per_row.get(i, 0) + 1
        self.total += 1

    def charge_row(self, d: int):
        self.row_queries += 1
        self.total += d

    def snapshot(self) -> "QueryLedger":
        return QueryLedger(per_row=dict(self.per_row), total=self.total,
                           row_queries=self.row_queries,
                           prefix_released=set(self.prefix_released))

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "row_queries": self.row_queries,
            "per_row": {str(k): v for k, v in sorted(self.per_row.items())},
            "prefix_released": sorted(self.prefix_released),
        }


class SSOracle:
    """Attribute-query oracle over share-encoded rows.

    attribute_query(i, j) serves share j of row i and releases the row's
    prefix through a side channel on first contact, without a ledger
    charge. With late_prefix=True the prefix instead becomes available
    only after the row has been queried (same release point here; the flag
    is honored by prefix() which refuses rows never queried either way).
    """

    mode = "attribute"

    def __init__(self, rows: list[ShareRow], record_transcript: bool = False):
        self._rows = rows
        self.n = len(rows)
        self.d = rows[0].d if rows else 0
        self.ctx = rows[0].ctx if rows else None
        self.ledger = QueryLedger()
        self._cache: dict[tuple, AttributeAnswer] = {}
        self.transcript = [] if record_transcript else None

    def _check_row(self, i: int):
        if not (1 <= i <= self.n):
            raise IndexOutOfRange(f"row {i} outside [1, {self.n}]")

    def attribute_query(self, i: int, j: int) -> AttributeAnswer:
        self._check_row(i)
        if not (1 <= j <= 2 * self.d):
            raise IndexOutOfRange(f"attribute {j} outside [1, {2 * self.d}]")
        key = (i, j)
        hit = self._cache.get(key)
        if hit is None:
            row = self._rows[i - 1]
            hit = AttributeAnswer(row.points[j - 1], row.values[j - 1])
            self._cache[key] = hit
            self.ledger.charge_attribute(i)
            self.ledger.prefix_released.add(i)
            if self.transcript is not None:
                self.transcript.append((i, j, hit.point, hit.value))
        return hit

    def query_row_all(self, i: int):
        """All 2d share pairs of row i (charged like 2d distinct queries)."""
        self._check_row(i)
        points = np.empty(2 * self.d, dtype=np.int64)
        values = np.empty(2 * self.d, dtype=np.int64)
        for j in range(1, 2 * self.d + 1):
            ans = self.attribute_query(i, j)
            points[j - 1] = ans.point
            values[j - 1] = ans.value
        return points, values

    def prefix(self, i: int):
        self._check_row(i)
        if i not in self.ledger.prefix_released:
            raise IndexOutOfRange(f"prefix of row {i} not yet released")
        return self._rows[i - 1].prefix

    def shared_row(self, i: int) -> ShareRow:
        """Assemble a ShareRow view from served answers (decode helper)."""
        self._check_row(i)
        points, values = self.query_row_all(i)
        base = self._rows[i - 1]
        return ShareRow(prefix=base.prefix, points=tuple(int(p) for p in points),
                        values=tuple(int(v) for v in values), d=self.d,
                        ctx=base.ctx)

    def row_query(self, i: int):
        raise WrongMode("row queries are not available on a share oracle")

    def ledger_report(self) -> QueryLedger:
        return self.ledger.snapshot()

    def transcript_json(self) -> list:
        if self.transcript is None:
            raise WrongMode("oracle built without transcript recording")
        return [{"row": i, "attribute": j, "point": int(p), "value": int(v)}
                for (i, j, p, v) in self.transcript]


class ROOracle:
    """Row-query oracle over a masked database.

    The masked rows are plain input, free to read; only pad lookups are
    metered, each charged as d attribute queries.
    """

    mode = "row"

    def __init__(self, masked: MaskedDatabase, record_transcript: bool = False):
        self._masked = masked
        self.n = masked.n
        self.d = masked.d
        self.ledger = QueryLedger()
        self._cache: dict[int, np.ndarray] = {}
        self.transcript = [] if record_transcript else None

    @property
    def masked_rows(self) -> np.ndarray:
        return self._masked.rows

    def row_query(self, i: int) -> np.ndarray:
        if not (1 <= i <= self.n):
            raise IndexOutOfRange(f"row {i} outside [1, {self.n}]")
        pad = self._cache.get(i)
        if pad is None:
            pad = self._masked.oracle(i - 1)
            self._cache[i] = pad
            self.ledger.charge_row(self.d)
            if self.transcript is not None:
                self.transcript.append((i, pad.copy()))
        return pad

    def attribute_query(self, i: int, j: int):
        raise WrongMode("attribute queries are not available on a row oracle")

    def ledger_report(self) -> QueryLedger:
        return self.ledger.snapshot()


def ledger_report(oracle) -> QueryLedger:
    """Immutable snapshot of the oracle's counters."""
    return oracle.ledger_report()

"""End-to-end acceptance campaigns at desk scale.

Each test runs one seeded campaign through the same code path the CLI uses,
prints a one-line verdict, and asserts the declared statistical bounds and
runtime budgets. Campaign parameters are pinned here; reruns are
byte-for-byte reproducible.
"""

import json
import math
import time

import numpy as np
import pytest

from fpclab.experiments import ExperimentConfig, run_experiment, write_report
from fpclab.field import MERSENNE61, field_new
from fpclab.oracle import SSOracle
from fpclab.problems import BinaryDatabase, decode_ss, encode_ss
from fpclab.errors import IncompleteShares

SEED = 20240613


def _verdict(num, name, ok, detail):
    print(f"ACCEPTANCE {num:>2} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _report_checks(rep):
    return {c["name"]: c for c in rep.payload["checks"]}


def test_01_share_roundtrip_exactness():
    """Encode/decode identity over 1000 random databases, 61-bit field,
    zero failures, under 10 seconds."""
    ctx = field_new(MERSENNE61)
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    failures = 0
    total = 0
    for d in (4, 8, 16, 32):
        for _ in range(250):
            db = BinaryDatabase.random(3, d, rng)
            rows = encode_ss(db, ctx, rng)
            got = np.stack([decode_ss(r) for r in rows])
            total += 1
            if not np.array_equal(got, db.rows):
                failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10.0
    _verdict(1, "share-roundtrip", ok,
             f"{total} databases, {failures} failures, {elapsed:.1f}s")
    assert failures == 0
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s over the 10s budget"


def test_02_hiding_security_game():
    """Distinguisher at budget d wins half the time (3-sigma band);
    the full-budget decoder wins at least 99%. Under 30 seconds."""
    start = time.perf_counter()
    parity = run_experiment(ExperimentConfig(
        kind="ss-security-game", d=16, attacker="parity", trials=5000,
        seed=SEED, workers=1))
    decode = run_experiment(ExperimentConfig(
        kind="ss-security-game", d=16, attacker="decode", trials=5000,
        seed=SEED + 1, workers=1))
    elapsed = time.perf_counter() - start
    rate = parity.payload["aggregates"]["success_rate"]
    margin = 3 * math.sqrt(0.25 / 5000)
    dec_rate = decode.payload["aggregates"]["success_rate"]
    ok = (abs(rate - 0.5) <= margin and dec_rate >= 0.99 and elapsed < 30.0)
    _verdict(2, "hiding-game", ok,
             f"parity {rate:.4f} (band ±{margin:.4f}), decoder {dec_rate:.4f}, "
             f"{elapsed:.1f}s")
    assert abs(rate - 0.5) <= margin
    assert dec_rate >= 0.99
    assert elapsed < 30.0


def test_03_feasible_sample_property():
    """Column-flip adversary triggers the bad event at most d/ell of the
    time (Wilson 99% allowance). Under 60 seconds."""
    start = time.perf_counter()
    rep = run_experiment(ExperimentConfig(
        kind="feasible-sample", n=50, c=5, d=20, ell=2000, xi=0.05,
        trials=2000, seed=SEED, workers=1))
    elapsed = time.perf_counter() - start
    chk = _report_checks(rep)["bad-sample-frequency"]
    ok = chk["passed"] and elapsed < 60.0
    _verdict(3, "feasible-sample", ok,
             f"bad-event rate {chk['observed']:.4f} vs bound {chk['bound']:.4f}, "
             f"{elapsed:.1f}s")
    assert chk["passed"], chk
    assert elapsed < 60.0


def test_04_code_security():
    """Four pirate strategies, 200 trials each at the derived code length:
    innocent accusations and feasible-but-untraced outcomes both stay under
    xi (Wilson 99% allowance). Under 5 minutes."""
    start = time.perf_counter()
    rep = run_experiment(ExperimentConfig(
        kind="fpc-security", n=50, c=5, xi=0.05, trials=200, seed=SEED,
        workers=1))
    elapsed = time.perf_counter() - start
    checks = rep.payload["checks"]
    worst = max(c["observed"] for c in checks)
    ok = all(c["passed"] for c in checks) and elapsed < 300.0
    _verdict(4, "code-security", ok,
             f"8 checks, worst observed {worst:.4f} vs bound 0.05, "
             f"d={rep.payload['aggregates']['code_length']}, {elapsed:.1f}s")
    for c in checks:
        assert c["passed"], c
    assert elapsed < 300.0


def test_05_private_solver_accuracy():
    """Full-scan private solver at the admission threshold for d=32:
    max-coordinate error within 1/10 at least 90% of runs, and the noise
    scale lands within 5% of 1/sqrt(200 ln(10 d))."""
    d, eps, delta = 32, 1.0, 1e-3
    n = math.ceil(math.sqrt(400 * d * math.log(1.25 / delta) * math.log(10 * d))
                  / eps)
    rep = run_experiment(ExperimentConfig(
        kind="solver-accuracy", solver="gaussian", d=d, n=n, epsilon=eps,
        delta=delta, trials=500, seed=SEED, workers=1))
    chk = _report_checks(rep)
    acc = chk["max-error-within-tenth"]
    sd = chk["noise-sd-relative-error"]
    led = chk["ledger-exact-every-trial"]
    ok = acc["passed"] and sd["passed"] and led["passed"]
    agg = rep.payload["aggregates"]
    _verdict(5, "private-solver", ok,
             f"n={n}, accurate {acc['observed']:.3f} (>=0.9), noise sd "
             f"{agg['empirical_noise_sd']:.5f} vs {agg['claimed_noise_sd']:.5f} "
             f"({100 * sd['observed']:.2f}% off), ledger exact {led['observed']:.0%}")
    assert acc["passed"], acc
    assert sd["passed"], sd
    assert led["passed"], led


def test_06_sublinear_sampler():
    """Hoeffding-sized sampler at d=64: exactly 2*64*27 = 3456 attribute
    queries every trial; max error within 1/3 at least 2/3 of runs."""
    rep = run_experiment(ExperimentConfig(
        kind="solver-accuracy", solver="sampler", d=64, n=100,
        alpha=1 / 3, p_fail=1 / 3, trials=500, seed=SEED, workers=1))
    chk = _report_checks(rep)
    acc = chk["max-error-within-alpha"]
    led = chk["ledger-exact-every-trial"]
    totals = rep.payload["aggregates"]["ledger_totals"]
    ok = acc["passed"] and led["passed"] and totals == [3456]
    _verdict(6, "sublinear-sampler", ok,
             f"ledger totals {totals} (want [3456]), accurate "
             f"{acc['observed']:.3f} (>=0.667)")
    assert totals == [3456]
    assert led["passed"], led
    assert acc["passed"], acc


def test_08_neighbor_gap():
    """Removing the most-accused member collapses its accusation rate:
    freq(intact) - e^eps * freq(removed) - delta stays positive."""
    rep = run_experiment(ExperimentConfig(
        kind="neighbor-gap", adversary="ss", n=50, d=64, ell=512, c=4,
        xi=0.01, epsilon=1.0, delta=1e-3, sample_rows=4, trials=500,
        seed=SEED, workers=1))
    agg = rep.payload["aggregates"]
    chk = _report_checks(rep)["neighbor-gap-positive"]
    _verdict(8, "neighbor-gap", chk["passed"],
             f"position {agg['most_accused_position']}: intact "
             f"{agg['freq_accused_intact']:.4f}, removed "
             f"{agg['freq_accused_removed']:.4f}, gap {agg['gap']:.4f} > 0")
    assert chk["passed"], agg


def test_09_query_floor():
    """Any strategy staying at or below d distinct queries per row decodes
    nothing: reconstruction needs all 2d shares, and the partial view is
    exactly uniform (the hiding game above). 1000 trials."""
    ctx = field_new(40961)
    rng = np.random.default_rng(SEED)
    d, n = 16, 20
    decoded_rows = 0
    violations = 0
    for _ in range(1000):
        db = BinaryDatabase.random(n, d, rng)
        oracle = SSOracle(encode_ss(db, ctx, rng))
        # spread strategy: d distinct attribute queries on every row
        for i in range(1, n + 1):
            for j in range(1, d + 1):
                oracle.attribute_query(i, int(j))
        led = oracle.ledger_report()
        if any(v > d for v in led.per_row.values()):
            violations += 1
        for i in range(1, n + 1):
            row = oracle._rows[i - 1]
            served = [(row.points[j - 1], row.values[j - 1]) for j in range(1, d + 1)]
            try:
                from fpclab.problems import decode_shares
                decode_shares(np.asarray(row.prefix), [p for p, _ in served],
                              [v for _, v in served], d, ctx)
                decoded_rows += 1
            except IncompleteShares:
                pass
    ok = decoded_rows == 0 and violations == 0
    _verdict(9, "query-floor", ok,
             f"1000 trials, {decoded_rows} rows decoded under the budget, "
             f"{violations} per-row budget breaches")
    assert decoded_rows == 0
    assert violations == 0


def test_10_report_determinism(tmp_path):
    """Every campaign kind reruns byte-identically from (config, seed)."""
    configs = [
        ExperimentConfig(kind="fpc-security", n=20, c=4, d=60, xi=0.1,
                         trials=3, seed=SEED, workers=1),
        ExperimentConfig(kind="feasible-sample", n=20, c=4, d=8, ell=40,
                         trials=25, seed=SEED, workers=1),
        ExperimentConfig(kind="ss-security-game", d=8, trials=40, seed=SEED,
                         workers=1),
        ExperimentConfig(kind="solver-accuracy", solver="sampler", d=8, n=30,
                         trials=5, seed=SEED, workers=1),
        ExperimentConfig(kind="reid-attack", n=30, d=8, ell=24, c=6, xi=0.05,
                         sample_rows=6, trials=4, seed=SEED, workers=1),
        ExperimentConfig(kind="neighbor-gap", n=30, d=8, ell=24, c=6, xi=0.05,
                         sample_rows=6, trials=4, seed=SEED, workers=1),
    ]
    mismatches = []
    for idx, cfg in enumerate(configs):
        p1 = write_report(run_experiment(cfg), str(tmp_path / f"{idx}a"))
        p2 = write_report(run_experiment(cfg), str(tmp_path / f"{idx}b"))
        b1, b2 = open(p1, "rb").read(), open(p2, "rb").read()
        if b1 != b2:
            mismatches.append(cfg.kind)
        json.loads(b1)
    ok = not mismatches
    _verdict(10, "determinism", ok,
             f"{len(configs)} kinds, byte-identical reruns"
             + (f", mismatches: {mismatches}" if mismatches else ""))
    assert not mismatches


# the reidentification campaigns run last: the share-encoded one is by far
# the heaviest piece of the suite


def _reid_config(kind_adversary):
    return ExperimentConfig(
        kind="reid-attack", adversary=kind_adversary, n=50, d=20, ell=2000,
        c=27, xi=0.01, sample_rows=27, trials=300, seed=SEED, workers=None)


def _assert_reid(num, label, rep, elapsed):
    chk = _report_checks(rep)
    hit = chk["accused-committed-member"]
    inn = chk["innocent-accusation"]
    inv = chk["commit-invariant"]
    ok = (hit["passed"] and inn["passed"] and inv["passed"] and elapsed < 600.0)
    _verdict(num, label, ok,
             f"committed-accusation {hit['observed']:.3f} (>=0.6), innocent "
             f"{inn['observed']:.3f} (<= xi+margin), commit-invariant "
             f"{inv['observed']:.0%}, {elapsed / 60:.1f} min")
    assert hit["passed"], hit
    assert inv["passed"], inv
    assert inn["passed"], inn
    assert elapsed < 600.0, f"runtime {elapsed / 60:.1f} min over the 10 min budget"


def test_07b_reidentification_row_queries():
    """Row-query attack around the sampler: a committed coalition member is
    accused in at least 60% of trials; innocents stay under xi; the commit
    budget is never breached. Under 10 minutes."""
    start = time.perf_counter()
    rep = run_experiment(_reid_config("ro"))
    _assert_reid(7, "reidentification-row", rep, time.perf_counter() - start)


def test_07a_reidentification_attribute_queries():
    """Attribute-query attack around the sampler, same bounds and budget."""
    start = time.perf_counter()
    rep = run_experiment(_reid_config("ss"))
    _assert_reid(7, "reidentification-attr", rep, time.perf_counter() - start)

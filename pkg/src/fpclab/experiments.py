"""Seeded Monte-Carlo campaigns with machine-readable reports.

Each campaign kind maps to one trial function; trials draw their randomness
from a documented split of the master seed (numpy SeedSequence over the
tuple [seed, phase, trial]), so reruns with the same config and seed are
byte-identical, worker pool or not. Statistical pass thresholds compare
the observed frequency's Wilson 99% interval against the declared bound:
an upper bound passes while the interval's lower end stays at or below it,
a lower bound passes while the interval's upper end reaches it.

Report payloads carry no wall-clock data; durations go to a sidecar so
report.json stays deterministic.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import adversary as adv
from . import prppc, problems, solvers, tardos
from .errors import ConfigInvalid
from .field import MERSENNE61, FieldContext
from .oracle import ROOracle, SSOracle

WILSON_Z99 = 2.5758293035489004

KINDS = ("fpc-security", "feasible-sample", "ss-security-game",
         "solver-accuracy", "reid-attack", "neighbor-gap")

STRATEGIES = ("majority", "minority", "random-feasible", "interleave")

# small primes accepted by the vectorized tier, ascending
_FAST_PRIMES = (40961, 65521, 131071, 262139, 524287, 1048573, 2097143)


def pick_field(encoded_d: int) -> int:
    """Smallest fast-tier prime exceeding 4 * encoded_d, else the 61-bit one."""
    need = 4 * encoded_d
    for p in _FAST_PRIMES:
        if p > need:
            return p
    return MERSENNE61


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z99):
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def check_freq(name: str, successes: int, trials: int, bound: float,
               direction: str) -> dict:
    lo, hi = wilson_interval(successes, trials)
    observed = successes / trials if trials else 0.0
    passed = lo <= bound if direction == "<=" else hi >= bound
    return {"name": name, "observed": observed, "bound": bound,
            "direction": direction, "wilson_lo": lo, "wilson_hi": hi,
            "trials": trials, "passed": bool(passed)}


def check_value(name: str, observed: float, bound: float, direction: str) -> dict:
    passed = observed <= bound if direction == "<=" else observed >= bound
    return {"name": name, "observed": observed, "bound": bound,
            "direction": direction, "wilson_lo": None, "wilson_hi": None,
            "trials": None, "passed": bool(passed)}


@dataclass(frozen=True, slots=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    trials: int = 100
    n: int = 50
    d: int | None = None          # pinned code length; None derives it
    c: int = 5
    ell: int | None = None        # padding count; None means 100 * d
    xi: float = 0.05
    epsilon: float = 1.0
    delta: float = 1e-3
    alpha: float = 1 / 3
    p_fail: float = 1 / 3
    q: int | None = None          # field modulus; None picks automatically
    sample_rows: int | None = None
    adversary: str = "ss"         # reid-attack / neighbor-gap: "ss" or "ro"
    solver: str = "gaussian"      # solver-accuracy: "gaussian" or "sampler"
    attacker: str = "parity"      # ss-security-game: "parity" or "decode"
    query_budget: int | None = None
    removed_index: int | None = None   # internal: neighbor phase marker
    workers: int | None = None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigInvalid(f"unknown kind {self.kind!r}", field="kind")
        if self.trials < 1:
            raise ConfigInvalid("trials must be >= 1", field="trials")
        if not (0 < self.xi < 1):
            raise ConfigInvalid("xi must lie in (0,1)", field="xi")
        if self.kind in ("fpc-security", "feasible-sample", "reid-attack",
                         "neighbor-gap"):
            if not (4 <= self.c <= self.n):
                raise ConfigInvalid("need 4 <= c <= n", field="c")
        if self.kind in ("feasible-sample", "reid-attack", "neighbor-gap"):
            if self.d is None:
                raise ConfigInvalid(f"{self.kind} needs a pinned d", field="d")
        if self.kind in ("ss-security-game", "solver-accuracy"):
            if self.d is None:
                raise ConfigInvalid(f"{self.kind} needs d", field="d")
        if self.adversary not in ("ss", "ro"):
            raise ConfigInvalid("adversary must be 'ss' or 'ro'", field="adversary")
        if self.solver not in ("gaussian", "sampler"):
            raise ConfigInvalid("solver must be 'gaussian' or 'sampler'",
                                field="solver")
        if self.attacker not in ("parity", "decode"):
            raise ConfigInvalid("attacker must be 'parity' or 'decode'",
                                field="attacker")
        if self.q is not None:
            enc = self.encoded_dimension()
            if enc is not None and self.q <= 4 * enc:
                raise ConfigInvalid(
                    f"field order {self.q} must exceed {4 * enc}", field="q")
        return self

    def effective_ell(self) -> int:
        if self.ell is not None:
            return self.ell
        return 100 * (self.d or 1)

    def encoded_dimension(self) -> int | None:
        """Width of the share encoding the algorithm faces, if any."""
        if self.kind in ("reid-attack", "neighbor-gap"):
            if self.adversary == "ro":
                return None
            return self.d + 2 * self.effective_ell()
        if self.kind in ("ss-security-game", "solver-accuracy"):
            return self.d
        return None

    def field_modulus(self) -> int | None:
        enc = self.encoded_dimension()
        if enc is None:
            return None
        return self.q if self.q is not None else pick_field(enc)


@dataclass(slots=True)
class ExperimentReport:
    payload: dict
    per_trial: list
    duration_seconds: float

    @property
    def passed(self) -> bool:
        return self.payload["passed"]

    def to_json(self) -> str:
        return json.dumps(self.payload, sort_keys=True, indent=2) + "\n"


def trial_rng(seed: int, phase: int, trial: int) -> np.random.Generator:
    """The documented seed split: one child stream per (phase, trial)."""
    return np.random.default_rng(np.random.SeedSequence([seed, phase, trial]))


# -- trial functions, one per kind --------------------------------------------------


def _fpc_word(strategy: str, rows: np.ndarray, rng) -> np.ndarray:
    c, d = rows.shape
    all_one = rows.all(axis=0)
    any_one = rows.any(axis=0)
    if strategy == "majority":
        return (rows.mean(axis=0) >= 0.5).astype(np.uint8)
    if strategy == "minority":
        minority = (rows.mean(axis=0) < 0.5).astype(np.uint8)
        return np.where(all_one, 1, np.where(~any_one, 0, minority)).astype(np.uint8)
    if strategy == "random-feasible":
        r = rng.integers(0, 2, size=d, dtype=np.uint8)
        return np.where(all_one, 1, np.where(~any_one, 0, r)).astype(np.uint8)
    if strategy == "interleave":
        return rows[np.arange(d) % c, np.arange(d)].astype(np.uint8)
    raise ConfigInvalid(f"unknown strategy {strategy!r}")


def _trial_fpc_security(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    strategy = STRATEGIES[phase]
    codebook, st = tardos.tardos_gen(cfg.n, cfg.c, cfg.xi, rng, d_override=cfg.d)
    members = rng.choice(cfg.n, size=cfg.c, replace=False) + 1
    rows = codebook.bits[members - 1]
    word = _fpc_word(strategy, rows, rng)
    feasible = prppc.is_feasible(word, rows)
    outcome = tardos.tardos_trace(word, st, codebook)
    accused_member = (not outcome.is_bottom) and outcome.accused in set(
        int(m) for m in members)
    return {
        "trial": trial, "strategy": strategy, "d": codebook.d,
        "feasible": bool(feasible),
        "bottom": outcome.is_bottom,
        "accused": 0 if outcome.is_bottom else outcome.accused,
        "accused_colluder": bool(accused_member),
        "innocent_accusation": bool(not outcome.is_bottom and not accused_member),
        "feasible_and_bottom": bool(feasible and outcome.is_bottom),
    }


def _trial_feasible_sample(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    bad = prppc.feasible_sample_trial(cfg.n, cfg.c, cfg.xi, cfg.effective_ell(),
                                      rng, d_override=cfg.d)
    return {"trial": trial, "bad_sample_event": bool(bad)}


def _game_x(d: int) -> np.ndarray:
    x = np.zeros(d, dtype=np.uint8)
    x[::2] = 1
    return x


def _trial_security_game(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    d = cfg.d
    ctx = FieldContext(cfg.field_modulus())
    x = _game_x(d)
    budget = cfg.query_budget if cfg.query_budget is not None else (
        2 * d if cfg.attacker == "decode" else d)
    attacker = (problems.decode_compare_attacker(x) if cfg.attacker == "decode"
                else problems.transcript_parity_attacker)
    res = problems.security_game_experiment(attacker, budget, d, x, 1, rng, ctx)
    return {"trial": trial, "success": res["successes"] == 1,
            "budget_violation": res["budget_violations"] == 1}


def _trial_solver_accuracy(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    d = cfg.d
    ctx = FieldContext(cfg.field_modulus())
    scfg = solvers.SolverConfig(epsilon=cfg.epsilon, delta=cfg.delta,
                                alpha=cfg.alpha, p_fail=cfg.p_fail,
                                sample_rows=cfg.sample_rows)
    n = cfg.n
    db = problems.BinaryDatabase.random(n, d, rng)
    oracle = SSOracle(problems.encode_ss(db, ctx, rng))
    exact = problems.exact_marginals(db)
    if cfg.solver == "gaussian":
        rep = solvers.gaussian_dp_solver(oracle, scfg, rng)
        expected_total = 2 * n * d
        noise = rep.pre_clamp - exact
    else:
        rep = solvers.subsample_solver(oracle, scfg, rng)
        k = len(rep.sampled_rows)
        expected_total = 2 * d * k
        noise = np.zeros(d)
    err = float(np.max(np.abs(rep.output - exact)))
    return {
        "trial": trial,
        "max_error": err,
        "within_tenth": bool(err <= 0.1),
        "within_alpha": bool(err <= cfg.alpha),
        "ledger_total": rep.queries_used.total,
        "ledger_exact": bool(rep.queries_used.total == expected_total),
        "noise_sq_sum": float(np.sum(noise ** 2)),
        "noise_count": int(d if cfg.solver == "gaussian" else 0),
        "sigma": rep.noise_sigma or 0.0,
    }


def _make_attack_algorithm(cfg: ExperimentConfig, rng):
    scfg = solvers.SolverConfig(epsilon=cfg.epsilon, delta=cfg.delta,
                                alpha=cfg.alpha, p_fail=cfg.p_fail,
                                sample_rows=cfg.sample_rows
                                if cfg.sample_rows is not None else cfg.c)

    if cfg.adversary == "ss":
        def algorithm(oracle):
            return solvers.subsample_solver(oracle, scfg, rng)
    else:
        def algorithm(oracle):
            return solvers.subsample_solver_ro(oracle, scfg, rng)
    return algorithm


def _attack_once(cfg: ExperimentConfig, rng, removed_index: int | None):
    coalition = adv.sample_coalition(cfg.n, cfg.c, cfg.xi, cfg.effective_ell(),
                                     rng, d_override=cfg.d)
    algorithm = _make_attack_algorithm(cfg, rng)
    if removed_index is not None:
        return adv.neighbor_experiment(
            coalition, algorithm, removed_index, rng,
            ctx=FieldContext(cfg.field_modulus()) if cfg.adversary == "ss" else None,
            kind=cfg.adversary)
    if cfg.adversary == "ss":
        return adv.adversary_ss(coalition, algorithm, rng,
                                FieldContext(cfg.field_modulus()))
    return adv.adversary_ro(coalition, algorithm, rng)


def _attack_record(trial: int, report: adv.AttackReport, c: int) -> dict:
    return {
        "trial": trial,
        "bottom": report.outcome.is_bottom,
        "accused_position": report.accused_position or 0,
        "accused_committed": bool(report.accused_committed),
        "innocent_accusation": bool(report.accused_position is not None
                                    and not report.accused_committed),
        "feasible_for_sample": report.feasible_for_sample,
        "feasible_for_full": report.feasible_for_full,
        "commit_count": report.commit_count,
        "commit_invariant_ok": bool(report.commit_count <= c),
        "budget_violation": report.budget_violation,
        "ledger_total": report.ledger.total,
    }


def _trial_reid_attack(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    report = _attack_once(cfg, rng, None)
    return _attack_record(trial, report, cfg.c)


def _trial_neighbor(cfg: ExperimentConfig, phase: int, trial: int) -> dict:
    rng = trial_rng(cfg.seed, phase, trial)
    report = _attack_once(cfg, rng, cfg.removed_index)
    rec = _attack_record(trial, report, cfg.c)
    rec["accused_removed"] = bool(report.accused_position == cfg.removed_index)
    return rec


_TRIAL_FNS = {
    "fpc-security": _trial_fpc_security,
    "feasible-sample": _trial_feasible_sample,
    "ss-security-game": _trial_security_game,
    "solver-accuracy": _trial_solver_accuracy,
    "reid-attack": _trial_reid_attack,
    "neighbor-gap": _trial_neighbor,
}


def _dispatch(args):
    cfg_dict, phase, trial = args
    cfg = ExperimentConfig(**cfg_dict)
    return _TRIAL_FNS[cfg.kind](cfg, phase, trial)


def _run_trials(cfg: ExperimentConfig, jobs: list) -> list:
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    args = [(asdict(cfg), phase, trial) for phase, trial in jobs]
    if workers <= 1 or len(jobs) <= 1:
        return [_dispatch(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(args) // (8 * workers))
        return list(pool.map(_dispatch, args, chunksize=chunk))


# -- campaign assembly ----------------------------------------------------------------


def _fraction(records, key) -> tuple[int, int]:
    hits = sum(1 for r in records if r[key])
    return hits, len(records)


def _campaign_fpc_security(cfg: ExperimentConfig):
    jobs = [(s, t) for s in range(len(STRATEGIES)) for t in range(cfg.trials)]
    records = _run_trials(cfg, jobs)
    checks = []
    for s, strategy in enumerate(STRATEGIES):
        recs = [r for r in records if r["strategy"] == strategy]
        inn, tot = _fraction(recs, "innocent_accusation")
        fb, _ = _fraction(recs, "feasible_and_bottom")
        checks.append(check_freq(f"innocent-accusation[{strategy}]", inn, tot,
                                 cfg.xi, "<="))
        checks.append(check_freq(f"feasible-and-bottom[{strategy}]", fb, tot,
                                 cfg.xi, "<="))
    aggregates = {
        "code_length": records[0]["d"] if records else None,
        "per_strategy": {
            strategy: {
                "innocent_accusation": _fraction(
                    [r for r in records if r["strategy"] == strategy],
                    "innocent_accusation")[0],
                "feasible_and_bottom": _fraction(
                    [r for r in records if r["strategy"] == strategy],
                    "feasible_and_bottom")[0],
                "accused_colluder": _fraction(
                    [r for r in records if r["strategy"] == strategy],
                    "accused_colluder")[0],
            } for strategy in STRATEGIES
        },
    }
    return aggregates, checks, records


def _campaign_feasible_sample(cfg: ExperimentConfig):
    jobs = [(0, t) for t in range(cfg.trials)]
    records = _run_trials(cfg, jobs)
    bad, tot = _fraction(records, "bad_sample_event")
    bound = cfg.d / cfg.effective_ell()
    checks = [check_freq("bad-sample-frequency", bad, tot, bound, "<=")]
    return {"bad_events": bad, "bound": bound}, checks, records


def _campaign_security_game(cfg: ExperimentConfig):
    jobs = [(0, t) for t in range(cfg.trials)]
    records = _run_trials(cfg, jobs)
    wins, tot = _fraction(records, "success")
    rate = wins / tot
    if cfg.attacker == "parity":
        margin = 3.0 * math.sqrt(0.25 / tot)
        checks = [
            check_value("distinguisher-success-upper", rate, 0.5 + margin, "<="),
            check_value("distinguisher-success-lower", rate, 0.5 - margin, ">="),
        ]
    else:
        checks = [check_freq("decode-attacker-success", wins, tot, 0.99, ">=")]
    return {"successes": wins, "success_rate": rate}, checks, records


def _campaign_solver_accuracy(cfg: ExperimentConfig):
    jobs = [(0, t) for t in range(cfg.trials)]
    records = _run_trials(cfg, jobs)
    tot = len(records)
    exact_ledgers, _ = _fraction(records, "ledger_exact")
    checks = []
    if cfg.solver == "gaussian":
        good, _ = _fraction(records, "within_tenth")
        checks.append(check_freq("max-error-within-tenth", good, tot, 0.9, ">="))
        claim = 1.0 / math.sqrt(200.0 * math.log(10.0 * cfg.d))
        pooled = sum(r["noise_sq_sum"] for r in records)
        count = sum(r["noise_count"] for r in records)
        sd = math.sqrt(pooled / count) if count else 0.0
        checks.append(check_value("noise-sd-relative-error",
                                  abs(sd - claim) / claim, 0.05, "<="))
        aggregates = {"empirical_noise_sd": sd, "claimed_noise_sd": claim,
                      "configured_sigma": records[0]["sigma"] if records else None}
    else:
        good, _ = _fraction(records, "within_alpha")
        checks.append(check_freq("max-error-within-alpha", good, tot,
                                 1.0 - cfg.p_fail, ">="))
        aggregates = {"ledger_totals": sorted({r["ledger_total"] for r in records})}
    checks.append(check_value("ledger-exact-every-trial",
                              exact_ledgers / tot if tot else 0.0, 1.0, ">="))
    return aggregates, checks, records


def _reid_checks(cfg: ExperimentConfig, records: list) -> tuple[dict, list]:
    valid = [r for r in records if not r["budget_violation"]]
    tot = len(valid)
    hits, _ = _fraction(valid, "accused_committed")
    inn, _ = _fraction(valid, "innocent_accusation")
    invariant_ok = all(r["commit_invariant_ok"] for r in records)
    checks = [
        check_freq("accused-committed-member", hits, tot, 0.6, ">="),
        check_freq("innocent-accusation", inn, tot, cfg.xi, "<="),
        check_value("commit-invariant", 1.0 if invariant_ok else 0.0, 1.0, ">="),
    ]
    position_counts = {}
    for r in valid:
        pos = r["accused_position"]
        if pos:
            position_counts[pos] = position_counts.get(pos, 0) + 1
    aggregates = {
        "valid_trials": tot,
        "budget_violations": len(records) - tot,
        "accused_committed": hits,
        "innocent_accusations": inn,
        "accusations_by_position": {str(k): v for k, v in sorted(position_counts.items())},
    }
    return aggregates, checks


def _campaign_reid_attack(cfg: ExperimentConfig):
    jobs = [(0, t) for t in range(cfg.trials)]
    records = _run_trials(cfg, jobs)
    aggregates, checks = _reid_checks(cfg, records)
    return aggregates, checks, records


def _campaign_neighbor_gap(cfg: ExperimentConfig):
    intact_jobs = [(0, t) for t in range(cfg.trials)]
    intact = _run_trials(cfg, intact_jobs)
    counts = {}
    for r in intact:
        if r["accused_committed"]:
            counts[r["accused_position"]] = counts.get(r["accused_position"], 0) + 1
    star = max(counts, key=lambda k: (counts[k], -k)) if counts else 1
    removed_cfg = replace(cfg, removed_index=int(star))
    removed_jobs = [(1, t) for t in range(cfg.trials)]
    removed = _run_trials(removed_cfg, removed_jobs)

    f_intact = sum(1 for r in intact if r["accused_position"] == star) / len(intact)
    f_removed = sum(1 for r in removed if r["accused_removed"]) / len(removed)
    gap = f_intact - math.exp(cfg.epsilon) * f_removed - cfg.delta
    checks = [check_value("neighbor-gap-positive", gap, 0.0, ">=")]
    aggregates = {
        "most_accused_position": int(star),
        "freq_accused_intact": f_intact,
        "freq_accused_removed": f_removed,
        "epsilon": cfg.epsilon, "delta": cfg.delta,
        "gap": gap,
    }
    for r in removed:
        r["phase"] = "removed"
    for r in intact:
        r["phase"] = "intact"
    return aggregates, checks, intact + removed


_CAMPAIGNS = {
    "fpc-security": _campaign_fpc_security,
    "feasible-sample": _campaign_feasible_sample,
    "ss-security-game": _campaign_security_game,
    "solver-accuracy": _campaign_solver_accuracy,
    "reid-attack": _campaign_reid_attack,
    "neighbor-gap": _campaign_neighbor_gap,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Execute the configured campaign deterministically from its seed."""
    cfg.validate()
    start = time.perf_counter()
    aggregates, checks, records = _CAMPAIGNS[cfg.kind](cfg)
    duration = time.perf_counter() - start
    config_echo = {k: v for k, v in asdict(cfg).items() if v is not None}
    config_echo["resolved_field"] = cfg.field_modulus()
    config_echo.pop("workers", None)
    payload = {
        "kind": cfg.kind,
        "config": config_echo,
        "aggregates": aggregates,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "trial_count": len(records),
    }
    return ExperimentReport(payload=payload, per_trial=records,
                            duration_seconds=duration)


def write_report(report: ExperimentReport, out_dir: str, stem: str = "report"):
    """Write report.json (deterministic), trials.csv, and a timing sidecar."""
    import csv

    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(json_path, "w") as fh:
        fh.write(report.to_json())
    csv_path = os.path.join(out_dir, f"{stem}_trials.csv")
    if report.per_trial:
        fieldnames = sorted({k for rec in report.per_trial for k in rec})
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            for rec in report.per_trial:
                writer.writerow(rec)
    with open(os.path.join(out_dir, f"{stem}_timing.json"), "w") as fh:
        json.dump({"duration_seconds": report.duration_seconds}, fh)
    return json_path


def scaling_sweep(base: ExperimentConfig, d_grid: list[int],
                  ell_factor: int = 100) -> list[ExperimentReport]:
    """Reid-attack across code lengths, coalition sized to the sampler.

    Produces one report per grid point plus a summary table; asserts
    nothing beyond each campaign's own bookkeeping.
    """
    if not d_grid:
        raise ConfigInvalid("empty d grid", field="d_grid")
    reports = []
    for d in d_grid:
        ell = ell_factor * d
        d_prime = d + 2 * ell
        k = solvers.hoeffding_sample_rows(d_prime, base.alpha, base.p_fail)
        c = max(4, min(k, base.n - 1))
        cfg = replace(base, kind="reid-attack", d=d, ell=ell, c=c,
                      sample_rows=c, q=None)
        reports.append(run_experiment(cfg))
    return reports


def sweep_table(reports: list[ExperimentReport]) -> list[dict]:
    rows = []
    for rep in reports:
        cfgd = rep.payload["config"]
        agg = rep.payload["aggregates"]
        valid = agg["valid_trials"]
        rows.append({
            "d": cfgd["d"], "c": cfgd["c"],
            "queries_per_trial": 2 * (cfgd["d"] + 2 * cfgd["ell"]) * cfgd["c"],
            "trace_success_rate": (agg["accused_committed"] / valid) if valid else 0.0,
        })
    return rows

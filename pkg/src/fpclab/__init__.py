"""fpclab: a simulation lab for tracing-based privacy lower-bound attacks.

Core pieces: exact prime-field arithmetic with a vectorized tier, a biased
binary fingerprinting code with pad-and-permute wrapping, share and
pad encodings of binary databases behind query-metered oracles, reference
solvers, the two reidentification adversaries, and a seeded experiment
runner with statistical acceptance checks.
"""

from .field import FieldContext, FieldElement, Polynomial, field_new, MERSENNE61
from .tardos import tardos_gen, tardos_trace, TraceOutcome
from .prppc import gen_prime, trace_prime, is_feasible, feasible_sample_trial
from .problems import (
    BinaryDatabase,
    encode_ro,
    encode_ss,
    decode_ss,
    exact_marginals,
    security_game_experiment,
)
from .oracle import SSOracle, ROOracle, QueryLedger, ledger_report
from .solvers import (
    SolverConfig,
    SolverReport,
    gaussian_dp_solver,
    subsample_solver,
    candidate_interface,
)
from .adversary import (
    adversary_ro,
    adversary_ss,
    neighbor_experiment,
    sample_coalition,
)
from .experiments import ExperimentConfig, run_experiment, scaling_sweep

__version__ = "0.1.0"

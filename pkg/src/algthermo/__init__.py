"""Thermodynamics of the halting programs of a small prefix-free machine."""
from .ensemble import (
    OMEGA_PARAMS,
    EnsembleParams,
    EnsembleStats,
    FiniteMeasure,
    PartitionEnclosure,
    algorithmic_entropy,
    complexity_proxies,
    gibbs_stats,
    partition_enclosure,
    pushforward_measure,
    relative_entropy,
    weight,
)
from .enumeration import (
    CorpusSnapshot,
    HaltingRecord,
    brute_force_oracle,
    dovetail_enumerate,
    kraft_sum,
    load_corpus,
    save_corpus,
)
from .thermo import (
    CycleReport,
    LoopPath,
    conjugates,
    constrained_partial,
    cycle_integrals,
    fundamental_residual,
    lnZ_derivatives,
    stoddard_loop,
    trace_isoline,
)
from .vm import Token, decode_token, parse_program, run

__version__ = "0.1.0"

"""K-mer guided speculative decoding for protein sequence generation.

A draft model proposes candidate continuations, motif statistics from a
multiple sequence alignment rank them, and a target model verifies the
winner token by token with maximal coupling, preserving the target's
output distribution while decoding faster than token-at-a-time sampling.
"""

__version__ = "0.1.0"

from .vocab import Vocabulary, default_vocabulary, encode, decode
from .msa import Msa, AlignmentRecord, parse_fasta, load_fasta, ungap
from .kmer import KmerIndex, KmerScore, build_index, score, select_best
from .kmer import save_index, load_index
from .lm import (
    SamplerConfig,
    NgramModel,
    TableModel,
    RemoteModel,
    warp,
    sample,
    sequence_nll,
    parse_model_descriptor,
)
from .coupling import CouplingOutcome, residual, couple, acceptance_probability
from .decode import (
    DecodeConfig,
    DecodeTrace,
    GenerationResult,
    speculative_generate,
    specmer_generate,
    baseline_generate,
    generate_library,
)
from .analysis import (
    LibraryStats,
    SpeedupParams,
    library_stats,
    expected_speedup,
    expected_speedup_batch,
    expected_speedup_serial,
    batch_acceptance,
    estimate_misranking,
    diversity,
    simulate_speedup,
)
from .oracle import ExactDistribution, exact_model_distribution, compare_empirical
from .rng import Rng

# The decode() codec would otherwise be shadowed by the decode submodule.
from .vocab import decode

__all__ = [name for name in dir() if not name.startswith("_")]

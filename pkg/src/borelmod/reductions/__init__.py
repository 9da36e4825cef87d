"""Explicit constructions: transducers and stream builders."""
from .graphs import E_VOCAB, GraphCodingError, decode_graph, to_graph
from .joins import VocabularyClash, diff_join, rename, section_structure, section_vocabulary
from .linord import LIN_VOCAB, STAR_TEXT, dyadics, pure_dense, r_linord, sentence_star
from .marker import (
    MarkerRecovery, marker_extend, marker_lift_formula, marker_recover, marker_vocabulary,
)
from .matching import (
    R_VOCAB, MatchingBuilder, MatchingCounts, matching_horizon, matching_oracle_verdict,
    matching_stream, r_matching,
)
from .monadic import P_VOCAB, infcoinf_stream, pad, r_infcoinf

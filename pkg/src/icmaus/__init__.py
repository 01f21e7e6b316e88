"""Multiple alignment by information compression over pattern knowledge bases."""

from .alignment import Alignment, compose, project_alignment, unify_alignment
from .encoding import AlignmentCode, decode_code, encode_alignment
from .engine import EngineParams, ScoredAlignment, best_alignment, build_alignments, score_alignment
from .errors import ICMAUSError
from .knowledge import (
    FrequencyTable,
    KnowledgeBase,
    Pattern,
    compute_frequency_table,
    new_pattern,
    parse_kb_text,
)
from .pairwise import SearchParams, align_pair, get_backend, set_backend
from .probability import (
    ProbabilityReport,
    ReferenceSet,
    absolute_probability,
    build_reference_set,
    containment_refinement,
    probability_report,
)
from .render import parse_alignment_ascii, render_alignment_ascii

__all__ = [
    "Alignment",
    "AlignmentCode",
    "EngineParams",
    "FrequencyTable",
    "ICMAUSError",
    "KnowledgeBase",
    "Pattern",
    "ProbabilityReport",
    "ReferenceSet",
    "ScoredAlignment",
    "SearchParams",
    "absolute_probability",
    "align_pair",
    "best_alignment",
    "build_alignments",
    "build_reference_set",
    "compose",
    "compute_frequency_table",
    "containment_refinement",
    "decode_code",
    "encode_alignment",
    "get_backend",
    "new_pattern",
    "parse_alignment_ascii",
    "parse_kb_text",
    "probability_report",
    "project_alignment",
    "render_alignment_ascii",
    "score_alignment",
    "set_backend",
    "unify_alignment",
]

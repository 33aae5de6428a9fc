"""Defeasible-logic reasoning engine and board-game QA dataset factory."""

from .logic import (
    NO_OBJECT,
    VARIABLE,
    Label,
    Literal,
    Quantifier,
    Rule,
    Theory,
    literal_from_str,
    literal_to_str,
    rule_from_str,
    rule_to_str,
    theory_from_dict,
    theory_to_dict,
    validate_theory,
)
from .solver import (
    EntailmentResult,
    Proof,
    ProofStep,
    Resolution,
    brute_force_entail,
    check_defeasible_consistency,
    entail,
    ground,
    stratify,
)
from .knowledge import (
    KnowledgeLink,
    KnowledgeOracle,
    convert_time,
    evaluate_link,
    fits_in_box,
    sample_knowledge_link,
)
from .generate import (
    EntityPool,
    Example,
    GenParams,
    add_distractors,
    generate_example,
    generate_theory,
    perturb_to_unknown,
    sample_question,
)
from .render import render_example, render_proof, render_text
from .pipeline import (
    DatasetConfig,
    build_dataset,
    build_split,
    dataset_stats,
    emit_jsonl,
    example_to_row,
    read_jsonl,
    resolve_config,
    theory_from_row,
    verify_row,
)
from .evaluate import conflict_f1, extract_rules_from_text, rule_f1, score

__version__ = "0.1.0"

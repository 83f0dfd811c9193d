"""Target PFD / SIL allocation for mitigation safety functions.

Mitigation safety functions act after a hazardous event and share equipment
with each other, which breaks the layer-independence assumption behind the
classic product-formula methods. This package instead enumerates every
availability state of the mitigation system exactly, totals the hazard
frequency falling into each consequence-severity segment, compares against
tolerable frequencies, and searches for the largest target PFD that keeps
every segment tolerable.
"""

from .allocation import (
    AllocationError,
    AllocationOptions,
    AllocationResult,
    PfhTarget,
    SilBand,
    TracePoint,
    allocate,
    instantiate_pfd,
    pfh_from_pfd,
    round_down_one_sig_fig,
    sil_from_pfd,
    sil_from_pfh,
)
from .engine import (
    COLLECTIVE,
    CollectiveAssessment,
    ConsequenceFrequencies,
    EngineError,
    EnumerationCapError,
    PER_SEGMENT,
    PartitionBreachError,
    RiskReport,
    SegmentAssessment,
    consequence_frequencies,
    function_states,
    risk_measures,
    state_frequency,
)
from .model import (
    ConsequenceScheme,
    DEFAULT_MAX_SUBSYSTEMS,
    Finding,
    FixedPfd,
    FunctionDef,
    MappingMatrix,
    PfdSpec,
    ScaledPfd,
    SegmentDef,
    SubsystemDef,
    SystemModel,
    ValidationReport,
    validate,
)
from .modelfile import (
    ModelFileError,
    ModelSemanticsError,
    bundled_model_path,
    load_bundled_model,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .oracle import (
    EtaIndependenceError,
    McEstimate,
    eta_reference,
    lopa_frequency,
    monte_carlo_w,
)
from .predicates import (
    And,
    ConstFalse,
    ConstTrue,
    EvalContext,
    FunctionLit,
    Not,
    Or,
    PredicateAst,
    PredicateEnv,
    PredicateError,
    PredicateNameError,
    PredicateSyntaxError,
    SegmentRef,
    eval_predicate,
    format_predicate,
    parse_predicate,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationError",
    "AllocationOptions",
    "AllocationResult",
    "And",
    "COLLECTIVE",
    "CollectiveAssessment",
    "ConsequenceFrequencies",
    "ConsequenceScheme",
    "ConstFalse",
    "ConstTrue",
    "DEFAULT_MAX_SUBSYSTEMS",
    "EngineError",
    "EnumerationCapError",
    "EtaIndependenceError",
    "EvalContext",
    "Finding",
    "FixedPfd",
    "FunctionDef",
    "FunctionLit",
    "MappingMatrix",
    "McEstimate",
    "ModelFileError",
    "ModelSemanticsError",
    "Not",
    "Or",
    "PER_SEGMENT",
    "PartitionBreachError",
    "PfdSpec",
    "PfhTarget",
    "PredicateAst",
    "PredicateEnv",
    "PredicateError",
    "PredicateNameError",
    "PredicateSyntaxError",
    "RiskReport",
    "ScaledPfd",
    "SegmentAssessment",
    "SegmentDef",
    "SegmentRef",
    "SilBand",
    "SubsystemDef",
    "SystemModel",
    "TracePoint",
    "ValidationReport",
    "allocate",
    "bundled_model_path",
    "consequence_frequencies",
    "eta_reference",
    "eval_predicate",
    "format_predicate",
    "function_states",
    "instantiate_pfd",
    "load_bundled_model",
    "load_model",
    "lopa_frequency",
    "model_from_dict",
    "model_to_dict",
    "monte_carlo_w",
    "parse_predicate",
    "pfh_from_pfd",
    "risk_measures",
    "round_down_one_sig_fig",
    "save_model",
    "sil_from_pfd",
    "sil_from_pfh",
    "state_frequency",
    "validate",
]

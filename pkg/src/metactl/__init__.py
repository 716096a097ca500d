"""metactl: metacontrol for component-based robot architectures.

A knowledge base of functions, designs, and objectives; a forward-chaining
reasoner that diagnoses failed objectives; a MAPE-K loop that reconfigures
the running system; a textual architecture-model format; a deterministic 2D
navigation simulator; and an experiment harness comparing an unmanaged
baseline against the managed stack.
"""
from .archmodel import (
    ModelError,
    ParseDiagnostic,
    generate_nav_model,
    parse_model,
    print_model,
    validate,
)
from .mapek import Diagnostic, LoopConfig, MapeLoop, ReconfigurationCommand
from .reasoner import InferenceReport, infer, objective_status
from .tomasys import (
    NFR,
    ArchitectureModel,
    Component,
    Fact,
    Function,
    FunctionDesign,
    FunctionGrounding,
    KnowledgeBase,
    Objective,
    QAType,
    QAValue,
    kb_init,
)

__version__ = "0.1.0"

__all__ = [
    "ArchitectureModel", "Component", "Diagnostic", "Fact", "Function",
    "FunctionDesign", "FunctionGrounding", "InferenceReport",
    "KnowledgeBase", "LoopConfig", "MapeLoop", "ModelError", "NFR",
    "Objective", "ParseDiagnostic", "QAType", "QAValue",
    "ReconfigurationCommand", "generate_nav_model", "infer", "kb_init",
    "objective_status", "parse_model", "print_model", "validate",
]

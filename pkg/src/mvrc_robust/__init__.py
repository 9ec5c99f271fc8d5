"""Static robustness analysis of transaction programs against multi-version Read Committed."""

from __future__ import annotations

from .benchmarks import build, load_benchmark
from .dsl import emit_workload, load_workload, parse_workload, parse_workload_or_raise
from .model import (
    ALL_SETTINGS,
    BTP,
    AnalysisSettings,
    FKAnnotation,
    ForeignKey,
    Granularity,
    Kind,
    Method,
    RelationDecl,
    Schema,
    Statement,
    Workload,
)
from .robustness import Verdict, build_graph, check_robust, maximal_robust_subsets
from .summary_graph import SummaryGraph, construct_summary_graph
from .unfold import unfold_program, unfold_workload
from .validate import Diagnostic, ValidationError, validate_workload

__all__ = [
    "ALL_SETTINGS", "AnalysisSettings", "BTP", "Diagnostic", "FKAnnotation", "ForeignKey",
    "Granularity", "Kind", "Method", "RelationDecl", "Schema", "Statement", "SummaryGraph",
    "ValidationError", "Verdict", "Workload", "build", "build_graph", "check_robust",
    "construct_summary_graph", "emit_workload", "load_benchmark", "load_workload",
    "maximal_robust_subsets", "parse_workload", "parse_workload_or_raise", "unfold_program",
    "unfold_workload", "validate_workload",
]

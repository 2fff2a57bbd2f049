"""Bounded model checking of HyperLTL properties through QBF solving."""

__version__ = "0.1.0"

from .checker import Trace, Verdict, check, decide, decode_trace  # noqa: E402
from .hyperltl import HyperFormula, negate, parse_formula, to_nnf, typecheck  # noqa: E402
from .model import SymbolicKripke, VarDecl, enumerate_states  # noqa: E402
from .oracle import check_brute, eval_bounded  # noqa: E402
from .qbf import QbfInstance, assemble, to_qcir, to_qdimacs  # noqa: E402
from .smv import parse_model  # noqa: E402
from .solver import SolveResult, brute_eval, solve, solve_external  # noqa: E402
from .unroll import Semantics, unroll_body, unroll_model  # noqa: E402

__all__ = [
    "HyperFormula", "QbfInstance", "Semantics", "SolveResult", "SymbolicKripke", "Trace", "VarDecl",
    "Verdict", "assemble", "brute_eval", "check", "check_brute", "decide", "decode_trace",
    "enumerate_states", "eval_bounded", "negate", "parse_formula", "parse_model", "solve",
    "solve_external", "to_nnf", "to_qcir", "to_qdimacs", "typecheck", "unroll_body", "unroll_model",
]

"""``hyperbmc <models...> <formula.hq> <k> -pes|-opt|-hpes|-hopt [-bughunt|-find]``"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .checker import BUGHUNT, FIND, HOLDS, VIOLATED, TraceDecodeError, check, query
from .hyperltl import ArityError, FormulaError, load_formula
from .model import ModelError
from .qbf import QbfError, compile_circuit, to_map, to_qcir, to_qdimacs
from .smv import SmvError, load_model
from .solver import ExternalSolverError
from .unroll import UnrollError

EXIT_HOLDS, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL, EXIT_IO = 64, 65, 70, 74

log = logging.getLogger("hyperbmc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="hyperbmc",
        description="Bounded model checking of HyperLTL properties via QBF.",
        epilog="Models bind to the formula's quantified traces in order. Exit status: "
        "0 holds, 1 violated, 2 inconclusive, 64 usage, 65 bad input, 70 internal error, 74 I/O error.",
    )
    p.add_argument("inputs", nargs="+", metavar="ARG", help="model files (.smv), then the formula (.hq), then the bound k")
    sem = p.add_mutually_exclusive_group(required=True)
    for s, text in (
        ("pes", "pessimistic: unknown future is false"),
        ("opt", "optimistic: unknown future is true"),
        ("hpes", "halting pessimistic"),
        ("hopt", "halting optimistic"),
    ):
        sem.add_argument(f"-{s}", dest="sem", action="store_const", const=s, help=text)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("-bughunt", dest="mode", action="store_const", const=BUGHUNT,
                      help="negate the property and search for a counterexample (default)")
    mode.add_argument("-find", dest="mode", action="store_const", const=FIND,
                      help="search for a witness of the property itself")
    p.set_defaults(mode=BUGHUNT)
    p.add_argument("--solver", default=os.environ.get("HYPERBMC_SOLVER"),
                   help="external QBF solver command; the query path is appended (env HYPERBMC_SOLVER)")
    p.add_argument("--solver-format", choices=("qcir", "qdimacs"), default="qdimacs",
                   help="file format handed to --solver (default qdimacs)")
    p.add_argument("--timeout", type=float, default=600.0, help="external solver timeout in seconds")
    p.add_argument("--emit", choices=("qcir", "qdimacs"), help="write the query (and a .map sidecar) instead of solving")
    p.add_argument("-o", "--out", type=Path, help="output path for --emit (default query.<format>)")
    p.add_argument("--json", action="store_true", help="print the verdict as JSON")
    p.add_argument("--budget", type=int, help="node budget of the internal solver")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _split_inputs(inputs: list[str]) -> tuple[list[str], str, int]:
    if len(inputs) < 3:
        raise UsageError("expected at least one model, a formula file and the bound k")
    *models, formula, k_text = inputs
    try:
        k = int(k_text)
    except ValueError:
        raise UsageError(f"bound k must be an integer, got {k_text!r}") from None
    if k < 0:
        raise UsageError("bound k must be non-negative")
    return models, formula, k


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    err = sys.stderr
    try:
        model_paths, formula_path, k = _split_inputs(args.inputs)
        formula = load_formula(formula_path)
        models = [load_model(p) for p in model_paths]
        if args.emit:
            c = compile_circuit(query(models, formula, k, args.sem, args.mode))
            text = to_qcir(c) if args.emit == "qcir" else to_qdimacs(c)
            out = args.out or Path(f"query.{args.emit}")
            out.write_text(text)
            Path(f"{out}.map").write_text(to_map(c))
            print(f"wrote {out} and {out}.map")
            return EXIT_HOLDS
        verdict = check(models, formula, k, args.sem, args.mode, budget=args.budget,
                        solver=args.solver, solver_format=args.solver_format, timeout=args.timeout)
    except (UsageError, ArityError) as exc:
        print(f"hyperbmc: usage error: {exc}", file=err)
        return EXIT_USAGE
    except (SmvError, FormulaError, ModelError, UnrollError, QbfError) as exc:
        print(f"hyperbmc: input error: {exc}", file=err)
        return EXIT_INPUT
    except ExternalSolverError as exc:
        print(f"hyperbmc: solver error ({exc.kind}): {exc}", file=err)
        return EXIT_INTERNAL
    except TraceDecodeError as exc:
        print(f"hyperbmc: internal error: {exc}", file=err)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"hyperbmc: I/O error: {exc}", file=err)
        return EXIT_IO
    sys.stdout.write(verdict.dumps() if args.json else verdict.format())
    return {HOLDS: EXIT_HOLDS, VIOLATED: EXIT_VIOLATED}.get(verdict.answer, EXIT_INCONCLUSIVE)


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()

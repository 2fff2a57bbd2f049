"""Bundled regression cases: ``corpus/<case>/{model*.smv, prop.hq, expect.txt}``.

``expect.txt`` holds ``key = value`` lines (``#`` comments): ``models``
(comma-separated file names, one per quantifier), ``k``, ``semantics``,
``mode`` and ``expected``.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .checker import Verdict, check
from .hyperltl import HyperFormula, load_formula
from .model import SymbolicKripke
from .smv import load_model

CORPUS_DIR = Path(__file__).parent / "corpus"


@dataclass(frozen=True)
class CorpusCase:
    name: str
    directory: Path
    model_files: tuple[str, ...]
    k: int
    semantics: str
    mode: str
    expected: str
    description: str = ""

    @property
    def formula_path(self) -> Path:
        return self.directory / "prop.hq"

    def load(self) -> tuple[list[SymbolicKripke], HyperFormula]:
        cache: dict[str, SymbolicKripke] = {}
        models = []
        for name in self.model_files:
            if name not in cache:
                cache[name] = load_model(self.directory / name)
            models.append(cache[name])
        return models, load_formula(self.formula_path)

    def run(self, **kwargs) -> Verdict:
        models, formula = self.load()
        return check(models, formula, self.k, self.semantics, self.mode, **kwargs)


def parse_expect(text: str) -> tuple[dict, str]:
    fields, notes = {}, []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            notes.append(line.lstrip("# "))
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed expectation line: {raw!r}")
        fields[key.strip()] = value.strip()
    return fields, " ".join(notes)


def load_case(directory: Path) -> CorpusCase:
    fields, description = parse_expect((directory / "expect.txt").read_text(encoding="utf-8"))
    try:
        return CorpusCase(
            name=directory.name,
            directory=directory,
            model_files=tuple(m.strip() for m in fields["models"].split(",")),
            k=int(fields["k"]),
            semantics=fields["semantics"],
            mode=fields["mode"],
            expected=fields["expected"],
            description=description,
        )
    except KeyError as exc:
        raise ValueError(f"{directory}/expect.txt lacks {exc.args[0]!r}") from None


def cases(root: Path = CORPUS_DIR) -> list[CorpusCase]:
    return [load_case(d) for d in sorted(root.iterdir()) if (d / "expect.txt").is_file()]


def case(name: str, root: Path = CORPUS_DIR) -> CorpusCase:
    return load_case(root / name)


@dataclass(frozen=True)
class CaseResult:
    case: CorpusCase
    verdict: Verdict
    seconds: float

    @property
    def ok(self) -> bool:
        return self.verdict.answer == self.case.expected


@dataclass(frozen=True)
class CorpusReport:
    results: tuple[CaseResult, ...]
    seconds: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def format(self) -> str:
        lines = []
        for r in self.results:
            mark = "ok  " if r.ok else "FAIL"
            lines.append(
                f"{mark} {r.case.name:<14} expected {r.case.expected:<12} got {r.verdict.answer:<12} "
                f"({r.verdict.qbf_status}, {r.seconds:.2f}s)"
            )
        lines.append(f"{sum(r.ok for r in self.results)}/{len(self.results)} cases as expected in {self.seconds:.2f}s")
        return "\n".join(lines)


def run_corpus(names: Iterable[str] | None = None, root: Path = CORPUS_DIR) -> CorpusReport:
    """Run the selected cases (all when ``names`` is None)."""
    selected = cases(root)
    if names is not None:
        wanted = set(names)
        selected = [c for c in selected if c.name in wanted]
    start = time.perf_counter()
    results = []
    for c in selected:
        t0 = time.perf_counter()
        verdict = c.run()
        results.append(CaseResult(c, verdict, time.perf_counter() - t0))
    return CorpusReport(tuple(results), time.perf_counter() - start)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="python -m hyperbmc.corpus", description="Run the bundled regression cases.")
    p.add_argument("names", nargs="*", help="case names (default: all)")
    args = p.parse_args(argv)
    report = run_corpus(args.names or None)
    print(report.format())
    return 0 if report.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

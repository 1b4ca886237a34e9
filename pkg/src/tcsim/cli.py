"""Command-line front end.

Subcommands:
  verify   discharge a spec file's goal (explicit axioms if present)
  explore  run the iterative instantiation loop, ignoring explicit axioms
  oracle   bounded closure-validity / entailment checks, built-in cases
  word     compile a word-vocabulary formula to a DFA; accept / sweep / dot
  corpus   run the shipped cases (run-all)

Exit codes: 0 success, 1 goal not discharged / refuted, 2 usage or config
error, 3 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from typing import Dict, List, Optional

from . import oracles
from .axioms import Color
from .explore import ExploreConfig, explore, prove_with_instances
from .formulas import Atom, Var, Vocabulary
from .models import OracleReport
from .parser import SpecError, parse_formula, parse_spec, print_formula
from .prover import find_prover
from .words import (
    WordVocabulary,
    all_words,
    compile_formula_to_dfa,
    mark,
    plain,
    word_model,
)

USAGE_ERROR = 2
BUDGET_ERROR = 3


def load_config(path: Optional[str]) -> Dict[str, str]:
    """Flat key = value text; # comments; later keys win."""
    out: Dict[str, str] = {}
    if not path:
        return out
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError("bad config line: %r" % raw.strip())
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def build_explore_config(cfg: Dict[str, str], args) -> ExploreConfig:
    ec = ExploreConfig()
    if "max_rounds" in cfg:
        ec.max_rounds = int(cfg["max_rounds"])
    if "premise_timeout" in cfg:
        ec.premise_timeout = float(cfg["premise_timeout"])
    if "goal_timeout" in cfg:
        ec.goal_timeout = float(cfg["goal_timeout"])
    if getattr(args, "max_rounds", None):
        ec.max_rounds = args.max_rounds
    if getattr(args, "premise_timeout", None):
        ec.premise_timeout = args.premise_timeout
    if getattr(args, "goal_timeout", None):
        ec.goal_timeout = args.goal_timeout
    return ec


def _report_stream(path: Optional[str]):
    if not path:
        return None
    return open(path, "w", encoding="utf-8")


def _emit(stream, record: dict):
    if stream:
        stream.write(json.dumps(record) + "\n")
        stream.flush()


def cmd_verify(args, explore_only: bool = False) -> int:
    cfg = load_config(args.config)
    try:
        text = open(args.spec, "r", encoding="utf-8").read()
    except OSError as exc:
        print("cannot read spec: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    try:
        task = parse_spec(text, os.path.basename(args.spec),)
    except SpecError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    if args.goal and args.goal != task.goal_kind:
        print("spec declares goal %r, requested %r" % (task.goal_kind, args.goal),
              file=sys.stderr)
        return USAGE_ERROR
    command = find_prover(cfg.get("prover"))
    if command is None:
        print("no prover available (set TCSIM_PROVER or install one)", file=sys.stderr)
        return USAGE_ERROR
    ec = build_explore_config(cfg, args)
    stream = _report_stream(args.report)
    if task.explicit_axioms and not explore_only and not args.explore:
        result = prove_with_instances(task, task.explicit_axioms, ec, command)
        mode = "explicit"
    else:
        result = explore(task, ec, command)
        mode = "explore"
    for a in result.transcript:
        print(a.line())
        _emit(stream, {"case": task.name, "mode": mode, "phase": a.phase,
                       "instance": a.label, "verdict": a.verdict,
                       "wall_s": round(a.wall, 3)})
    print("== %s: %s (%s, %d acquired instances)" % (
        task.name, "Success" if result.success else "Exhausted",
        result.goal_status, len(result.acquired)))
    _emit(stream, {"case": task.name, "mode": mode, "result": result.summary()})
    if args.transcript:
        result.write_transcript(args.transcript)
    if stream:
        stream.close()
    return 0 if result.success else 1


def cmd_oracle(args) -> int:
    n_max = args.nmax
    if args.builtin:
        report, text = oracles.run_builtin(args.builtin, n_max)
        print(text)
        if report is not None and report.verdict == "budget_exceeded":
            return BUDGET_ERROR
        return 0
    if args.check:
        try:
            report = oracles.run_named_check(args.check, n_max)
        except KeyError:
            print("unknown check %r (have: %s)" % (args.check,
                  ", ".join(sorted(oracles.NAMED_CHECKS))), file=sys.stderr)
            return USAGE_ERROR
        print("%s: %s" % (args.check, report.describe()))
        return {"valid_up_to": 0, "refuted": 0,
                "budget_exceeded": BUDGET_ERROR}[report.verdict]
    if args.formula:
        try:
            phi = parse_formula(args.formula)
        except SpecError as exc:
            print("parse error: %s" % exc, file=sys.stderr)
            return USAGE_ERROR
        from .models import check_tc_valid
        report = check_tc_valid(phi, n_max)
        print(report.describe())
        return {"valid_up_to": 0, "refuted": 0,
                "budget_exceeded": BUDGET_ERROR}[report.verdict]
    print("oracle: need --check, --builtin or --formula", file=sys.stderr)
    return USAGE_ERROR


def _parse_marked_word(text: str):
    out = []
    i = 0
    while i < len(text):
        letter = text[i]
        i += 1
        markers = set()
        if i < len(text) and text[i] == "[":
            j = text.index("]", i)
            markers = {m.strip() for m in text[i + 1:j].split(",") if m.strip()}
            i = j + 1
        out.append((letter, frozenset(markers)))
    return out


def cmd_word(args) -> int:
    wv = WordVocabulary(tuple(args.alphabet))
    try:
        phi = parse_formula(args.formula)
        dfa = compile_formula_to_dfa(phi, wv)
    except SpecError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dfa.dot() + "\n")
        print("wrote %s" % args.dot)
    if args.word:
        w = _parse_marked_word(args.word)
        print("accepts(%s): %s" % (args.word, dfa.accepts(w)))
        return 0
    if args.sweep:
        from .models import evaluate
        if dfa.variables:
            print("sweep needs a closed formula", file=sys.stderr)
            return USAGE_ERROR
        total = bad = 0
        for length in range(1, args.sweep + 1):
            for w in all_words(wv, length):
                total += 1
                if dfa.accepts(w) != evaluate(word_model(w, wv), phi):
                    bad += 1
                    print("disagree on %r" % "".join(s[0] for s in w))
        print("agreement: %d/%d words up to length %d" % (total - bad, total, args.sweep))
        return 0 if bad == 0 else 1
    if not args.dot:
        print(dfa.table())
    return 0


def cmd_corpus(args) -> int:
    if args.action != "run-all":
        print("corpus: unknown action %r" % args.action, file=sys.stderr)
        return USAGE_ERROR
    cfg = load_config(args.config)
    stream = _report_stream(args.report)
    command = None if args.oracle_only else find_prover(cfg.get("prover"))
    failures = 0

    print("== oracle-only cases ==")
    for name, fn in oracles.CORPUS_ORACLE_CASES.items():
        ok, text = fn()
        print("%-28s %s" % (name, "ok" if ok else "FAIL"))
        if text:
            print("    " + text.replace("\n", "\n    "))
        _emit(stream, {"case": name, "kind": "oracle", "ok": ok})
        failures += 0 if ok else 1

    if command is None:
        if not args.oracle_only:
            print("no prover available; prover cases skipped", file=sys.stderr)
            failures += 1
    else:
        print("== prover cases ==")
        ec = build_explore_config(cfg, args)
        for name in ("mark", "reverse", "append",
                     "precise_add", "precise_remove_func", "precise_remove_tree"):
            text = resources.files("tcsim").joinpath("corpus/%s.spec" % name).read_text()
            task = parse_spec(text, name)
            result = prove_with_instances(task, task.explicit_axioms, ec, command)
            print("%-28s %s (%s)" % (name, "ok" if result.success else "FAIL",
                                     result.goal_status))
            _emit(stream, {"case": name, "kind": "prover",
                           "ok": result.success, "result": result.summary()})
            failures += 0 if result.success else 1
    if stream:
        stream.close()
    return 0 if failures == 0 else 1


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="tcsim", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--report", help="JSON-lines report stream")
        p.add_argument("--max-rounds", type=int, dest="max_rounds")
        p.add_argument("--premise-timeout", type=float, dest="premise_timeout")
        p.add_argument("--goal-timeout", type=float, dest="goal_timeout")

    pv = sub.add_parser("verify", help="discharge a spec file's goal")
    pv.add_argument("spec")
    pv.add_argument("--goal", help="expected goal kind (sanity check)")
    pv.add_argument("--explore", action="store_true",
                    help="ignore the explicit axioms block and explore")
    pv.add_argument("--transcript", help="write the attempt transcript (JSONL)")
    common(pv)

    pe = sub.add_parser("explore", help="run the instantiation loop")
    pe.add_argument("spec")
    pe.add_argument("--goal", help="expected goal kind (sanity check)")
    pe.add_argument("--transcript")
    common(pe)

    po = sub.add_parser("oracle", help="bounded model checks")
    po.add_argument("--check", help="named validity check")
    po.add_argument("--builtin", help="built-in case (e.g. g1-noexit)")
    po.add_argument("--formula", help="closed formula text")
    po.add_argument("--nmax", type=int, default=4)

    pw = sub.add_parser("word", help="word-formula compilation")
    pw.add_argument("--formula", required=True)
    pw.add_argument("--alphabet", default="ab")
    pw.add_argument("--word", help="marked word, e.g. ba[x]b")
    pw.add_argument("--sweep", type=int, help="agreement sweep up to length N")
    pw.add_argument("--dot", help="write DOT to file")

    pc = sub.add_parser("corpus", help="run shipped cases")
    pc.add_argument("action", choices=["run-all"])
    pc.add_argument("--oracle-only", action="store_true")
    common(pc)

    args = ap.parse_args(argv)
    try:
        if args.cmd == "verify":
            return cmd_verify(args)
        if args.cmd == "explore":
            args.explore = True
            args.transcript = getattr(args, "transcript", None)
            return cmd_verify(args, explore_only=True)
        if args.cmd == "oracle":
            return cmd_oracle(args)
        if args.cmd == "word":
            return cmd_word(args)
        if args.cmd == "corpus":
            return cmd_corpus(args)
    except SpecError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

"""TPTP front end for the z3 wasm solver (z3-solver npm package).

Exposed as the `tcsim-z3` console script so the prover bridge can treat
z3 like any other TPTP prover: it reads a FOF file, translates it to the
single-sorted SMT2 fragment (conjecture negated), runs z3 under node,
and prints an SZS status line.

The z3-solver module is located via TCSIM_Z3_MODULES, a node_modules
directory next to the current directory, or `npm root -g`.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
import tempfile
import time
from importlib import resources
from typing import List, Optional, Tuple

from .formulas import (
    And,
    Atom,
    Bot,
    Equal,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Top,
    Var,
    alpha_normalize,
    relations_in,
    term_constants,
)
from .tptp_read import parse_tptp


def smt2_formula(phi: Formula) -> str:
    phi = alpha_normalize(phi)

    def vname(n: str) -> str:
        return "X" + n[2:]

    def term(t) -> str:
        if isinstance(t, Var):
            return vname(t.name)
        return "|%s|" % t.name

    def go(f: Formula) -> str:
        if isinstance(f, Top):
            return "true"
        if isinstance(f, Bot):
            return "false"
        if isinstance(f, Equal):
            return "(= %s %s)" % (term(f.left), term(f.right))
        if isinstance(f, Atom):
            if not f.args:
                return "|%s|" % f.rel
            return "(|%s| %s)" % (f.rel, " ".join(term(a) for a in f.args))
        if isinstance(f, Not):
            return "(not %s)" % go(f.body)
        if isinstance(f, And):
            return "(and %s)" % " ".join(go(p) for p in f.parts)
        if isinstance(f, Or):
            return "(or %s)" % " ".join(go(p) for p in f.parts)
        if isinstance(f, Implies):
            return "(=> %s %s)" % (go(f.left), go(f.right))
        if isinstance(f, Iff):
            return "(= %s %s)" % (go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            kw = "forall" if isinstance(f, Forall) else "exists"
            names = [f.var]
            body = f.body
            while isinstance(body, type(f)):
                names.append(body.var)
                body = body.body
            binders = " ".join("(%s U)" % vname(n) for n in names)
            return "(%s (%s) %s)" % (kw, binders, go(body))
        raise ValueError("cannot translate %r" % (f,))

    return go(phi)


def tptp_to_smt2(text: str) -> str:
    """Translate a FOF problem to SMT2 over one uninterpreted sort."""
    entries = parse_tptp(text)
    rels = {}
    consts = set()
    asserts = []
    saw_conjecture = False
    for name, role, f in entries:
        for r, ar in relations_in(f).items():
            have = rels.get(r)
            if have is not None and have != ar:
                raise ValueError("arity clash for %s" % r)
            rels[r] = ar
        consts.update(term_constants(f))
        if role == "conjecture":
            if saw_conjecture:
                raise ValueError("multiple conjectures")
            saw_conjecture = True
            asserts.append("(assert (not %s)) ; %s" % (smt2_formula(f), name))
        else:
            asserts.append("(assert %s) ; %s" % (smt2_formula(f), name))
    lines = ["(declare-sort U 0)"]
    for c in sorted(consts):
        lines.append("(declare-const |%s| U)" % c)
    for r in sorted(rels):
        args = " ".join(["U"] * rels[r])
        lines.append("(declare-fun |%s| (%s) Bool)" % (r, args))
    lines.extend(asserts)
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def find_node_modules() -> Optional[str]:
    env = os.environ.get("TCSIM_Z3_MODULES")
    if env and os.path.isdir(os.path.join(env, "z3-solver")):
        return env
    local = os.path.join(os.getcwd(), "node_modules")
    if os.path.isdir(os.path.join(local, "z3-solver")):
        return local
    for guess in ("/usr/lib/node_modules", "/usr/local/lib/node_modules"):
        if os.path.isdir(os.path.join(guess, "z3-solver")):
            return guess
    npm = shutil.which("npm")
    if npm:
        try:
            root = subprocess.run(
                [npm, "root", "-g"], capture_output=True, text=True, timeout=30
            ).stdout.strip()
            if root and os.path.isdir(os.path.join(root, "z3-solver")):
                return root
        except (OSError, subprocess.SubprocessError):
            pass
    return None


def run_z3(smt2: str, timeout_s: float) -> str:
    """Returns z3's verdict token: unsat | sat | unknown | error."""
    node = shutil.which("node")
    if node is None:
        raise RuntimeError("node executable not found (needed for the z3 backend)")
    modules = find_node_modules()
    if modules is None:
        raise RuntimeError("z3-solver node module not found; npm install -g z3-solver")
    runner = resources.files("tcsim").joinpath("data/z3runner.cjs")
    with resources.as_file(runner) as runner_path, \
            tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as tmp:
        tmp.write(smt2)
        tmp.flush()
        env = dict(os.environ)
        env["NODE_PATH"] = modules
        try:
            proc = subprocess.run(
                [node, str(runner_path), tmp.name, str(int(timeout_s * 1000))],
                capture_output=True,
                text=True,
                timeout=timeout_s + 20,
                env=env,
            )
        except subprocess.TimeoutExpired:
            return "unknown"
        finally:
            try:
                os.unlink(tmp.name)
            except OSError:
                pass
    for tok in reversed(proc.stdout.split()):
        if tok in ("sat", "unsat", "unknown", "error"):
            return tok
    return "error"


STATUS_OF = {
    "unsat": "Theorem",
    "sat": "CounterSatisfiable",
    "unknown": "GaveUp",
    "error": "Error",
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) < 1:
        print("usage: tcsim-z3 FILE [TIMEOUT_S]", file=sys.stderr)
        return 2
    path = argv[0]
    timeout_s = float(argv[1]) if len(argv) > 1 else 30.0
    t0 = time.time()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            smt2 = tptp_to_smt2(fh.read())
        tok = run_z3(smt2, timeout_s)
    except Exception as exc:  # surface as a prover error, never a false Proved
        print("% SZS status Error : %s" % exc)
        return 0
    status = STATUS_OF[tok]
    if tok == "unknown" and time.time() - t0 >= timeout_s:
        status = "Timeout"
    print("%% SZS status %s" % status)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

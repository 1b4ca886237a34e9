"""Iterative axiom instantiation: grow colors, prove premises, admit
conclusions, retry the goal.

Each round builds the Boolean combinations of the color atoms up to the
round index, then runs three phases: separation (GoOut) premises over
ordered color pairs, closure (NoExit) premises per color, and new-path
(NewStart) premises for colors that acquired a NoExit conclusion or
whose negation did.  Premises are attempted against the current axiom
set plus the task hypotheses; a proved premise admits the instance's
conclusion.  The sequence of attempts is deterministic for a fixed task
and configuration.

Two engineering layers keep the loop fast without touching soundness:

* a bounded-model filter: premises already false in some small closure
  model of the hypotheses are skipped (no prover can prove them);
* separation attempts are deferred for source colors that look closed
  in every filter model, since the closure conclusion acquired in the
  next phase subsumes anything separation could add.

Soundness never depends on the filter: every admitted conclusion still
rides on a Proved premise verdict from the external prover, and every
formula in the axiom set is true in every closure model of the
hypotheses by induction over admissions.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .axioms import (
    AxiomInstance,
    Color,
    base_axioms,
    goout,
    goout_premise_immediate,
    nc,
    noexit,
)
from .colors import ColorSpace, boolean_combinations, color_space
from .formulas import (
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    alpha_normalize,
    forall,
    free_vars,
    relations_in,
    subformulas,
    term_constants,
)
from .models import FiniteModel, compile_formula, enumerate_models, BudgetExceeded
from .parser import VerificationTask
from .prover import COUNTERSAT, PROVED, Verdict, prove
from .tptp import ProblemBundle


@dataclass
class ExploreConfig:
    max_rounds: int = 2
    premise_timeout: float = 10.0
    goal_timeout: float = 60.0
    goal_first_timeout: float = 20.0
    prover_command: Optional[str] = None
    include_change_colors: bool = True
    filter_sizes: Tuple[int, ...] = (1, 2)
    filter_model_cap: int = 300
    filter_budget: int = 2_000_000
    split_goal: bool = True
    bridge_lemmas: bool = False
    defer_closed_separation: bool = True
    premise_retries: int = 2
    natural: str = "t1"


@dataclass
class Attempt:
    phase: str
    label: str
    verdict: str
    wall: float
    detail: str = ""

    def line(self) -> str:
        return "%-8s %-44s %-10s %6.2fs %s" % (
            self.phase, self.label, self.verdict, self.wall, self.detail)


@dataclass
class ExplorationResult:
    success: bool
    rounds: int
    base: List[AxiomInstance]
    acquired: List[AxiomInstance]
    transcript: List[Attempt]
    goal_status: str

    @property
    def sigma(self) -> List[AxiomInstance]:
        return self.base + self.acquired

    def summary(self) -> dict:
        return {
            "success": self.success,
            "rounds": self.rounds,
            "goal_status": self.goal_status,
            "base": [i.label for i in self.base],
            "acquired": [i.label for i in self.acquired],
        }

    def write_transcript(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            for a in self.transcript:
                fh.write(json.dumps({
                    "phase": a.phase, "instance": a.label,
                    "verdict": a.verdict, "wall_s": round(a.wall, 3),
                    "detail": a.detail,
                }) + "\n")


# ---------------------------------------------------------------------------
# bounded-model filter


def _definitional_split(hyps: Sequence[Formula]):
    """Pull relation definitions (forall* r(vars) <-> body) out of the
    hypotheses so the model search computes those tables instead of
    enumerating them."""
    defined: Dict[str, Tuple[Tuple[str, ...], Formula]] = {}
    constraints: List[Formula] = []

    def try_define(part: Formula) -> bool:
        names: List[str] = []
        body = part
        while isinstance(body, Forall):
            names.append(body.var)
            body = body.body
        if not isinstance(body, Iff) or not names:
            return False
        left = body.left
        if not isinstance(left, Atom):
            return False
        args = [t.name for t in left.args if isinstance(t, Var)]
        if len(args) != len(left.args) or args != names or len(set(args)) != len(args):
            return False
        rel = left.rel
        if rel in defined or rel in relations_in(body.right):
            return False
        if free_vars(body.right) - set(names):
            return False
        defined[rel] = (tuple(names), body.right)
        return True

    for h in hyps:
        parts = list(h.parts) if isinstance(h, And) else [h]
        for part in parts:
            if not try_define(part):
                constraints.append(part)
    return defined, constraints


def hypothesis_models(task: VerificationTask, sizes: Sequence[int], cap: int,
                      budget: int) -> List[FiniteModel]:
    """Small closure models of the hypotheses, used to screen premises."""
    defined, constraints = _definitional_split(task.hypotheses)
    rels: Dict[str, int] = {}
    consts: List[str] = []
    for f in [*constraints, *[b for _, b in defined.values()], task.conclusion]:
        for name, ar in relations_in(f).items():
            rels.setdefault(name, ar)
        for c in sorted(term_constants(f)):
            if c not in consts:
                consts.append(c)
    for name, (params, _) in defined.items():
        rels.setdefault(name, len(params))
    closure_pairs = {b: s for b, s in task.vocab.closure_pairs.items()
                     if s in rels or b in rels}
    for b, s in closure_pairs.items():
        rels.setdefault(b, 2)
        rels.setdefault(s, 2)
    # closures of defined relations must be computed after the definition:
    # enumerate_models handles the ordering via its fixpoint fill
    out: List[FiniteModel] = []
    counter = [0]
    try:
        for m in enumerate_models(rels, sizes, consts, closure_pairs, True,
                                  constraints, defined, budget, counter):
            out.append(m)
            if len(out) >= cap:
                break
    except BudgetExceeded:
        pass
    return out


class PremiseFilter:
    def __init__(self, models: List[FiniteModel]):
        self.models = models

    def admits(self, phi: Formula) -> bool:
        """False when some hypothesis model falsifies phi (=> unprovable)."""
        if not self.models:
            return True
        fn, slots = compile_formula(phi)
        if slots:
            return True
        try:
            return all(fn(m, []) for m in self.models)
        except (FormulaError, KeyError):
            # the formula mentions a symbol outside the hypothesis signature
            # (e.g. a user color over an unconstrained relation): cannot screen
            return True


# ---------------------------------------------------------------------------
# goal discharge


def _strip_foralls(f: Formula):
    names = []
    while isinstance(f, Forall):
        names.append(f.var)
        f = f.body
    return names, f


def _lift_antecedent_exists(names, body: Formula):
    """(exists w. A) & B -> C  becomes  forall w. (A & B -> C)."""
    if not isinstance(body, Implies):
        return names, body
    ant, con = body.left, body.right
    parts = list(ant.parts) if isinstance(ant, And) else [ant]
    out_parts, extra = [], []
    from .formulas import fresh_var, substitute
    for p in parts:
        while isinstance(p, Exists):
            w = fresh_var(p.var, set(names) | set(extra) | free_vars(body))
            p = substitute(p.body, {p.var: Var(w)})
            extra.append(w)
        out_parts.append(p)
    if not extra:
        return names, body
    from .formulas import conj
    return names + extra, Implies(conj(out_parts), con)


def _ground_seeds(formulas, const_names, max_vars=3, cap=1200):
    """Instantiate universal prefixes at all tuples over the skolem constants.

    Purely redundant logically, but it hands the instantiations the proof
    needs straight to the solver; the deep quantified reasoning in the goal
    steps is exactly what SMT engines are worst at finding alone.
    """
    import itertools as _it
    from .formulas import Const, substitute
    out = []
    for label, f in formulas:
        names, body = _strip_foralls(f)
        if not names or len(names) > max_vars:
            continue
        for k, tup in enumerate(_it.product(const_names, repeat=len(names))):
            out.append(("%s_g%d" % (label, k),
                        substitute(body, dict(zip(names, (Const(c) for c in tup))))))
            if len(out) >= cap:
                return out
    return out


def _seeded_bundle(idx: int, part: Formula, axioms, hyps) -> ProblemBundle:
    names, body = _strip_foralls(part)
    names, body = _lift_antecedent_exists(names, body)
    if not names:
        return ProblemBundle("goal_part_%d" % idx, axioms=list(axioms),
                             hypotheses=list(hyps), conjecture=("goal", part))
    from .formulas import Const, substitute
    sk = ["sk_%d" % i for i in range(len(names))]
    ground = substitute(body, {n: Const(s) for n, s in zip(names, sk)})
    seeds = _ground_seeds(list(axioms) + list(hyps), sk)
    return ProblemBundle("goal_part_%d_seeded" % idx, axioms=list(axioms) + seeds,
                         hypotheses=list(hyps), conjecture=("goal", ground))


def _cover_facts(hyps):
    """Hypothesis conjuncts of shape ALL v. D1(v) | ... | Dk(v)."""
    out = []
    for label, h in hyps:
        names, body = _strip_foralls(h)
        if len(names) == 1 and isinstance(body, Or) and len(body.parts) <= 4:
            out.append((names[0], list(body.parts), label))
    return out


def _or_hypotheses(hyps):
    return [(label, list(h.parts)) for label, h in hyps
            if isinstance(h, Or) and len(h.parts) <= 4]


def discharge_goal(conclusion: Formula, axioms, hyps, command: str,
                   timeout: float, split: bool, transcript: List[Attempt],
                   filt: Optional["PremiseFilter"] = None,
                   first_timeout: Optional[float] = None):
    """Prove the conclusion part by part, escalating per part:

    1. plain attempt (quick timeout), proved parts become lemmas;
    2. ground-seeded attempt at the part's skolem constants;
    3. case split over a covering disjunction from the hypotheses
       (every element is in one of these classes), cases seeded,
       then one assembly call;
    4. case split over a disjunctive hypothesis (or-elimination,
       no assembly call needed);
    5. plain retry with all accumulated lemmas.
    """
    from .formulas import substitute as _subst

    parts = [conclusion]
    if split and isinstance(conclusion, And):
        parts = list(conclusion.parts)
    quick = min(first_timeout or timeout, timeout)
    covers = _cover_facts(hyps)
    or_hyps = _or_hypotheses(hyps)
    lemmas: List[Tuple[str, Formula]] = []
    failed: List[Tuple[int, Formula]] = []

    def record(stage, i, v):
        transcript.append(Attempt("goal", "%s_%d" % (stage, i), v.kind, v.wall_time, v.status))

    for i, part in enumerate(parts):
        if filt is not None and not filt.admits(part):
            transcript.append(Attempt("goal", "part_%d" % i, "refuted-by-model", 0.0))
            return False, "CounterSatisfiable(model)"
        pb = ProblemBundle("goal_part_%d" % i, axioms=list(axioms) + lemmas,
                           hypotheses=hyps, conjecture=("goal", part))
        v = prove(pb, quick, command)
        record("part", i, v)
        if v.proved:
            lemmas.append(("goal_lemma_%d" % i, part))
        else:
            failed.append((i, part))

    def seeded(i, part) -> bool:
        pb = _seeded_bundle(i, part, list(axioms) + lemmas, hyps)
        v = prove(pb, timeout, command)
        record("seeded", i, v)
        return v.proved

    def cover_split(i, part) -> bool:
        names, body = _strip_foralls(part)
        if not names:
            return False
        for var, disjuncts, lab in covers[:2]:
            case_lemmas = []
            ok = True
            for k, d in enumerate(disjuncts):
                guard = _subst(d, {var: Var(names[0])})
                sub = forall(names, Implies(guard, body))
                pb = _seeded_bundle(1000 * i + k, sub,
                                    list(axioms) + lemmas + case_lemmas, hyps)
                v = prove(pb, timeout, command)
                record("cover%d" % k, i, v)
                if not v.proved:
                    ok = False
                    break
                case_lemmas.append(("case_%d_%d" % (i, k), sub))
            if ok:
                pb = ProblemBundle("goal_assemble_%d" % i,
                                   axioms=list(axioms) + lemmas + case_lemmas,
                                   hypotheses=hyps, conjecture=("goal", part))
                v = prove(pb, timeout, command)
                record("assemble", i, v)
                if v.proved:
                    return True
        return False

    def or_split(i, part) -> bool:
        for label, disjuncts in or_hyps[:2]:
            ok = True
            for k, d in enumerate(disjuncts):
                case_hyps = [(l, d if l == label else h) for l, h in hyps]
                pb = _seeded_bundle(2000 * i + k, part, list(axioms) + lemmas, case_hyps)
                v = prove(pb, timeout, command)
                record("hypcase%d" % k, i, v)
                if not v.proved:
                    ok = False
                    break
            if ok:
                return True  # or-elimination: every disjunct yields the part
        return False

    for i, part in failed:
        if seeded(i, part) or cover_split(i, part) or or_split(i, part):
            lemmas.append(("goal_lemma_%d" % i, part))
            continue
        pb = ProblemBundle("goal_retry_%d" % i, axioms=list(axioms) + lemmas,
                           hypotheses=hyps, conjecture=("goal", part))
        v = prove(pb, timeout, command)
        record("retry", i, v)
        if v.proved:
            lemmas.append(("goal_lemma_%d" % i, part))
        else:
            return False, v.status
    return True, "Proved"


def split_hypotheses(hypotheses) -> List:
    out = []
    for k, h in enumerate(hypotheses):
        parts = list(h.parts) if isinstance(h, And) else [h]
        for j, p in enumerate(parts):
            out.append(("hyp_%02d_%02d" % (k, j), p))
    return out


# ---------------------------------------------------------------------------
# the loop


def bridge_lemma(f: str, vocab) -> Tuple[str, Formula]:
    stc = vocab.ensure_closure(f)
    u, v = Var("u"), Var("v")
    return ("edge_into_closure_%s" % f,
            forall(["u", "v"], Implies(Atom(f, (u, v)), Atom(stc, (u, v)))))


def explore(task: VerificationTask, config: ExploreConfig, command: str,
            space: Optional[ColorSpace] = None) -> ExplorationResult:
    vocab = task.vocab
    F = task.tc_relations
    base = base_axioms(F, vocab, config.natural)
    transcript: List[Attempt] = []
    acquired: List[AxiomInstance] = []
    acquired_keys: Set = set()
    acquired_out: Set = set()  # (color formula key, relation)
    cache: Dict = {}

    hyps = split_hypotheses(task.hypotheses)
    extra = [bridge_lemma(f, vocab) for f in F] if config.bridge_lemmas else []

    t0 = time.time()
    models = hypothesis_models(task, config.filter_sizes, config.filter_model_cap,
                               config.filter_budget)
    filt = PremiseFilter(models)
    transcript.append(Attempt("filter", "hypothesis-models", "built", time.time() - t0,
                              "%d models, sizes %s" % (len(models), list(config.filter_sizes))))

    if space is None:
        space = color_space(task, vocab, config.include_change_colors)

    def axiom_block() -> List[Tuple[str, Formula]]:
        out = [(inst.label, inst.whole) for inst in base]
        out.extend(extra)
        out.extend(("concl_%03d_%s" % (i, inst.label), inst.conclusion)
                   for i, inst in enumerate(acquired))
        return out

    def color_key(c: Color):
        return alpha_normalize(Exists(c.var, c.formula))

    def attempt_premise(phase: str, inst: AxiomInstance, immediate: bool = False) -> bool:
        key = inst.key()
        if key in acquired_keys:
            return True
        if key in cache:
            return cache[key] == PROVED
        if immediate:
            acquired.append(inst)
            acquired_keys.add(key)
            cache[key] = PROVED
            transcript.append(Attempt(phase, inst.label, "immediate", 0.0))
            return True
        if not filt.admits(inst.premise):
            cache[key] = "filtered"
            transcript.append(Attempt(phase, inst.label, "filtered", 0.0))
            return False
        pb = ProblemBundle("premise_" + inst.label, axioms=axiom_block(),
                           hypotheses=hyps, conjecture=("premise", inst.premise))
        v = prove(pb, config.premise_timeout, command)
        transcript.append(Attempt(phase, inst.label, v.kind, v.wall_time, v.status))
        cache[key] = v.kind
        if v.proved:
            acquired.append(inst)
            acquired_keys.add(key)
        return v.proved

    def looks_closed(c: Color, f: str) -> bool:
        if not config.defer_closed_separation:
            return False
        probe = noexit(c, f, vocab).premise
        return filt.admits(probe)

    def goal_attempt() -> Tuple[bool, str]:
        return discharge_goal(task.conclusion, axiom_block(), hyps, command,
                              config.goal_timeout, config.split_goal, transcript,
                              filt, config.goal_first_timeout)

    atoms = space.atoms
    rounds_run = 0
    for i in range(1, config.max_rounds + 1):
        rounds_run = i
        cprime = boolean_combinations(i, atoms)

        # phase 1: separation premises over ordered color pairs
        deferred: Set[int] = set()
        for f in F:
            for si, cs in enumerate(cprime):
                if si in deferred:
                    continue
                if looks_closed(cs, f):
                    deferred.add(si)
                    transcript.append(Attempt("phase1", "defer[%s,%s]" % (cs.name, f),
                                              "deferred", 0.0, "source looks closed"))
                    continue
                for ce in cprime:
                    if ce is cs:
                        continue
                    inst = goout(cs, ce, f, vocab)
                    attempt_premise("phase1", inst,
                                    immediate=goout_premise_immediate(cs, ce, f))

        # phase 2: closure premises per color
        for f in F:
            for c in cprime:
                inst = noexit(c, f, vocab)
                if attempt_premise("phase2", inst):
                    acquired_out.add((color_key(c), f))
                    acquired_out.add((color_key(c.negated()), f))

        # phase 3: new-path premises, gated on an acquired closure conclusion
        for retry in range(config.premise_retries):
            progress = False
            for f in F:
                for c in cprime:
                    if (color_key(c), f) not in acquired_out:
                        continue
                    for g in F:
                        if g == f:
                            continue
                        inst = nc(c, f, g, vocab)
                        if inst.key() in acquired_keys:
                            continue
                        before = len(acquired)
                        attempt_premise("phase3", inst)
                        progress = progress or len(acquired) > before
            if not progress:
                break

        ok, status = goal_attempt()
        if ok:
            return ExplorationResult(True, i, base, acquired, transcript, status)
        if status.endswith("(model)"):
            # a closure countermodel of the hypotheses is final: no sound
            # axiom can ever remove it, so further rounds are pointless
            return ExplorationResult(False, i, base, acquired, transcript, status)

    return ExplorationResult(False, rounds_run, base, acquired, transcript, "Exhausted")


def prove_with_instances(task: VerificationTask, instances: Sequence[AxiomInstance],
                         config: ExploreConfig, command: str) -> ExplorationResult:
    """Discharge the goal using an explicitly supplied instance set.

    Split instances get their premises proved first (with retry rounds, since
    one conclusion often unlocks another premise); unsplit instances are taken
    whole.  This is the `verify` path for corpus files with an axioms block.
    """
    vocab = task.vocab
    F = task.tc_relations
    base = base_axioms(F, vocab, config.natural)
    transcript: List[Attempt] = []
    acquired: List[AxiomInstance] = []
    hyps = split_hypotheses(task.hypotheses)
    extra = [bridge_lemma(f, vocab) for f in F] if config.bridge_lemmas else []
    wholes = [inst for inst in instances if not inst.split]
    t0 = time.time()
    models = hypothesis_models(task, config.filter_sizes, config.filter_model_cap,
                               config.filter_budget)
    filt = PremiseFilter(models)
    transcript.append(Attempt("filter", "hypothesis-models", "built", time.time() - t0,
                              "%d models" % len(models)))

    def axiom_block() -> List[Tuple[str, Formula]]:
        out = [(inst.label, inst.whole) for inst in base]
        out.extend(extra)
        out.extend(("whole_%03d_%s" % (i, inst.label), inst.whole)
                   for i, inst in enumerate(wholes))
        out.extend(("concl_%03d_%s" % (i, inst.label), inst.conclusion)
                   for i, inst in enumerate(acquired))
        return out

    pending = [inst for inst in instances if inst.split]
    for _ in range(1 + config.premise_retries):
        if not pending:
            break
        still = []
        for inst in pending:
            pb = ProblemBundle("premise_" + inst.label, axioms=axiom_block(),
                               hypotheses=hyps, conjecture=("premise", inst.premise))
            v = prove(pb, config.premise_timeout, command)
            transcript.append(Attempt("premise", inst.label, v.kind, v.wall_time, v.status))
            if v.proved:
                acquired.append(inst)
            else:
                still.append(inst)
        if len(still) == len(pending):
            break
        pending = still
    for inst in pending:
        transcript.append(Attempt("premise", inst.label, "unproven", 0.0,
                                  "conclusion not admitted"))

    success, status = discharge_goal(task.conclusion, axiom_block(), hyps, command,
                                     config.goal_timeout, config.split_goal,
                                     transcript, filt, config.goal_first_timeout)
    return ExplorationResult(success, 1, base, acquired + wholes, transcript, status)

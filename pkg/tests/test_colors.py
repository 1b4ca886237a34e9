from importlib import resources

from tcsim.axioms import Color
from tcsim.colors import (
    boolean_combinations,
    color_space,
    initial_colors,
    reachability_colors,
)
from tcsim.explore import hypothesis_models
from tcsim.formulas import Atom, Exists, Forall, Implies, Var, alpha_equal, free_vars
from tcsim.models import evaluate
from tcsim.parser import parse_formula, parse_spec


def _reverse_task():
    text = resources.files("tcsim").joinpath("corpus/reverse.spec").read_text()
    return parse_spec(text, "reverse")


def test_initial_colors_reverse():
    task = _reverse_task()
    cols = initial_colors(task)
    names = [c.name for c in cols]
    for want in ("x", "y", "x'", "y'"):
        assert want in names
    assert "dstart[n,n']" in names and "dend[n,n']" in names
    # program variables come before change colors
    assert names.index("x") < names.index("dstart[n,n']")


def test_initial_colors_no_pairs_no_change():
    text = """
vocab { root/1 var  f/2 field }
loop_cond { EX v. root(v) }
invariant { ALL v. root(v) -> TC[f](v, v) }
transformer { ALL v. root(v) <-> root(v) }
goal exit
post { true }
"""
    task = parse_spec(text, "t")
    cols = initial_colors(task)
    assert all(c.provenance != "start-change" for c in cols)


def test_start_change_is_contained_in_x_on_reverse_states():
    """On every bounded model of the reverse hypotheses, nodes whose
    outgoing edges changed are x-nodes (the heuristic's Roots/StartChange
    row points at x)."""
    task = _reverse_task()
    cols = {c.name: c for c in initial_colors(task)}
    ds = cols["dstart[n,n']"]
    x = cols["x"]
    claim = Forall("v", Implies(ds.at(Var("v")), x.at(Var("v"))))
    models = hypothesis_models(task, (1, 2, 3), cap=500, budget=2_000_000)
    assert models
    for m in models:
        assert evaluate(m, claim)


def test_reachability_colors_names_and_shape():
    task = _reverse_task()
    xp = Color("x'", "v", Atom("x'", (Var("v"),)), "program-variable")
    out = reachability_colors([xp], ["n", "n'"], task.vocab)
    names = [c.name for c in out]
    assert names == ["r[x',n]", "r[x',n']", "rb[x',n]", "rb[x',n']"]
    want = parse_formula("EX w. x'(w) & stc_n(w, v)")
    assert alpha_equal(Exists("v", out[0].formula), Exists("v", want))
    for c in out:
        assert free_vars(c.formula) == {c.var}


def test_boolean_combinations_sizes():
    a = Color("a", "v", Atom("A", (Var("v"),)))
    b = Color("b", "v", Atom("B", (Var("v"),)))
    bc1 = boolean_combinations(1, [a, b])
    assert [c.name for c in bc1] == ["a", "b", "!a", "!b"]
    bc2 = boolean_combinations(2, [a, b])
    names = [c.name for c in bc2]
    for want in ("a&b", "a&!b", "!a&b", "!a&!b"):
        assert want in names
    assert len(bc2) > len(bc1)
    # contradictory pairs a & !a are not enumerated
    assert not any(n in ("a&!a", "!a&a") for n in names)
    # monotone and deduplicated
    assert [c.name for c in bc2[:len(bc1)]] == [c.name for c in bc1]
    assert len({c.name for c in bc2}) == len(bc2)


def test_combination_colors_single_free_var():
    a = Color("a", "v", Atom("A", (Var("v"),)))
    b = Color("b", "w", Atom("B", (Var("w"),)))
    for c in boolean_combinations(2, [a, b]):
        assert free_vars(c.formula) <= {c.var}


def test_color_space_deterministic():
    t1 = _reverse_task()
    t2 = _reverse_task()
    s1 = color_space(t1, t1.vocab)
    s2 = color_space(t2, t2.vocab)
    assert [c.name for c in s1.atoms] == [c.name for c in s2.atoms]

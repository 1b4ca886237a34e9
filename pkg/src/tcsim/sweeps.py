"""Exhaustive closure-validity sweeps over whole scheme families.

The generic oracle enumerates models one relation table at a time, which
is fine for single-relation formulas but too slow for the coloring
schemes at universe size 4 (millions of table/color combinations).  The
functions here check the same statements with bit-level enumeration:
binary tables are 2^(n*n) masks over row-major pairs, colors are element
masks, and premise/conclusion evaluation is a handful of integer ANDs.

Because the colors range over all element subsets, a scheme-level sweep
subsumes every instance over definable colors: any defining formula
denotes some subset in each model.  Two reductions keep the two-relation
schemes exhaustive at size 4:

* NewStart: validity over all (A, f, g) with the premise `g inside A is
  contained in f` is equivalent to validity at the pointwise-worst
  f0 = g & (A x A); any premise-respecting f contains f0, so its closure
  contains f0's and a violation for f transfers verbatim to f0.
* TreeDisjoint: the guard forces in-degree <= 1 and acyclicity, so only
  forest-shaped down tables survive, and the selector pair enumerates
  the binary edge-labellings of each forest.

Everything returns the number of (model, color) combinations inspected,
raising SweepFailure with a concrete witness on the first violation.
"""

from __future__ import annotations

import itertools
from typing import Dict, Iterable, List, Optional, Tuple


class SweepFailure(Exception):
    def __init__(self, scheme: str, detail: str):
        super().__init__("%s violated: %s" % (scheme, detail))
        self.scheme = scheme
        self.detail = detail


def _pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n)]


def _bit(n: int, i: int, j: int) -> int:
    return 1 << (i * n + j)


def closure_mask(f: int, n: int) -> int:
    rows = [(f >> (i * n)) & ((1 << n) - 1) for i in range(n)]
    for i in range(n):
        rows[i] |= 1 << i
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = rows[i]
            scan = acc
            while scan:
                j = (scan & -scan).bit_length() - 1
                scan &= scan - 1
                acc |= rows[j]
            if acc != rows[i]:
                rows[i] = acc
                changed = True
    out = 0
    for i in range(n):
        out |= rows[i] << (i * n)
    return out


def _all_closures(n: int) -> List[int]:
    return [closure_mask(f, n) for f in range(1 << (n * n))]


def _outer(a_mask: int, b_mask: int, n: int) -> int:
    """Pair mask { (i,j) : i in a, j in b }."""
    out = 0
    row = b_mask & ((1 << n) - 1)
    for i in range(n):
        if a_mask >> i & 1:
            out |= row << (i * n)
    return out


def sweep_noexit(n_max: int) -> int:
    checked = 0
    for n in range(1, n_max + 1):
        full = (1 << n) - 1
        outer = [_outer(a, full ^ a, n) for a in range(1 << n)]
        for f in range(1 << (n * n)):
            stc = closure_mask(f, n)
            for a in range(1 << n):
                checked += 1
                if (f & outer[a]) == 0 and (stc & outer[a]) != 0:
                    raise SweepFailure("NoExit", "n=%d f=%x A=%x" % (n, f, a))
    return checked


def sweep_goout(n_max: int) -> int:
    checked = 0
    for n in range(1, n_max + 1):
        full = (1 << n) - 1
        outer = [_outer(a, full ^ a, n) for a in range(1 << n)]
        col = [_outer(full, b, n) for b in range(1 << n)]
        row_of = [_outer(1 << w, full, n) for w in range(n)]
        col_of = [_outer(full, 1 << w, n) for w in range(n)]
        for f in range(1 << (n * n)):
            stc = closure_mask(f, n)
            # through[w]: pairs (u,v) with stc(u,w) and stc(w,v)
            through = []
            for w in range(n):
                reach_w = 0  # elements u with stc(u,w)
                from_w = 0  # elements v with stc(w,v)
                for i in range(n):
                    if stc & _bit(n, i, w):
                        reach_w |= 1 << i
                    if stc & _bit(n, w, i):
                        from_w |= 1 << i
                through.append(_outer(reach_w, from_w, n))
            for a in range(1 << n):
                exits = stc & outer[a]
                fexits = f & outer[a]
                for b in range(1 << n):
                    checked += 1
                    if fexits & ~col[b]:
                        continue  # premise fails
                    ok = 0
                    bb = b
                    while bb:
                        w = (bb & -bb).bit_length() - 1
                        bb &= bb - 1
                        ok |= through[w]
                    if exits & ~ok:
                        raise SweepFailure(
                            "GoOut", "n=%d f=%x A=%x B=%x" % (n, f, a, b))
    return checked


def sweep_newstart(n_max: int) -> int:
    # worst-case reduction: f = g restricted to A x A
    checked = 0
    for n in range(1, n_max + 1):
        full = (1 << n) - 1
        inner = [_outer(a, a, n) for a in range(1 << n)]
        for g in range(1 << (n * n)):
            stc_g = closure_mask(g, n)
            through_not_a = {}
            for a in range(1 << n):
                acc = 0
                rest = full ^ a
                while rest:
                    w = (rest & -rest).bit_length() - 1
                    rest &= rest - 1
                    reach_w = 0
                    from_w = 0
                    for i in range(n):
                        if stc_g & _bit(n, i, w):
                            reach_w |= 1 << i
                        if stc_g & _bit(n, w, i):
                            from_w |= 1 << i
                    acc |= _outer(reach_w, from_w, n)
                through_not_a[a] = acc
            for a in range(1 << n):
                checked += 1
                f0 = g & inner[a]
                stc_f0 = closure_mask(f0, n)
                new_pairs = stc_g & ~stc_f0
                if new_pairs & ~through_not_a[a]:
                    raise SweepFailure("NewStart", "n=%d g=%x A=%x" % (n, g, a))
    return checked


def sweep_induction(n_max: int) -> int:
    checked = 0
    for n in range(1, n_max + 1):
        full = (1 << n) - 1
        for f in range(1 << (n * n)):
            stc = closure_mask(f, n)
            for p in range(1 << n):
                notp = full ^ p
                escape = f & _outer(p, notp, n)  # f-edge from P out of P
                if escape:
                    continue  # step premise fails for every Z
                # P closed under f: reachable set of any z in P stays in P,
                # so the conclusion needs stc & (Z x ~P) empty for Z subset P;
                # worst case Z = P
                checked += 1
                if stc & _outer(p, notp, n):
                    raise SweepFailure("Ind", "n=%d f=%x P=%x" % (n, f, p))
    return checked


def sweep_order(n_max: int) -> int:
    checked = 0
    for n in range(1, n_max + 1):
        for f in range(1 << (n * n)):
            rows = [(f >> (i * n)) & ((1 << n) - 1) for i in range(n)]
            if any(r & (r - 1) for r in rows):
                continue  # not functional
            stc = closure_mask(f, n)
            checked += 1
            for u in range(n):
                ru = (stc >> (u * n)) & ((1 << n) - 1)
                vs = [v for v in range(n) if ru >> v & 1]
                for v in vs:
                    for w in vs:
                        if not (stc & _bit(n, v, w) or stc & _bit(n, w, v)):
                            raise SweepFailure("Order", "n=%d f=%x u=%d" % (n, f, u))
    return checked


def sweep_tree_disjoint(n_max: int) -> int:
    """Forest-shaped down tables, split into two selector labellings."""
    checked = 0
    for n in range(1, n_max + 1):
        for down in range(1 << (n * n)):
            # in-degree <= 1 (unshared)
            ok = True
            for j in range(n):
                col = 0
                for i in range(n):
                    if down & _bit(n, i, j):
                        col |= 1 << i
                if col & (col - 1):
                    ok = False
                    break
            if not ok:
                continue
            stc = closure_mask(down, n)
            # acyclicity: no edge (i,j) with stc(j,i)
            acyclic = True
            for i in range(n):
                for j in range(n):
                    if down & _bit(n, i, j) and stc & _bit(n, j, i):
                        acyclic = False
                        break
                if not acyclic:
                    break
            if not acyclic:
                continue
            edges = [(i, j) for i in range(n) for j in range(n) if down & _bit(n, i, j)]
            for labelling in itertools.product((0, 1), repeat=len(edges)):
                checked += 1
                s = [0, 0]
                for (i, j), lab in zip(edges, labelling):
                    s[lab] |= _bit(n, i, j)
                # violation: v with s1-child v1, s2-child v2 both reaching w
                for v in range(n):
                    row1 = 0
                    row2 = 0
                    for j in range(n):
                        if s[0] & _bit(n, v, j):
                            row1 |= 1 << j
                        if s[1] & _bit(n, v, j):
                            row2 |= 1 << j
                    if not row1 or not row2:
                        continue
                    for v1 in range(n):
                        if not row1 >> v1 & 1:
                            continue
                        for v2 in range(n):
                            if not row2 >> v2 & 1 or v1 == v2:
                                continue
                            r1 = (stc >> (v1 * n)) & ((1 << n) - 1)
                            r2 = (stc >> (v2 * n)) & ((1 << n) - 1)
                            if r1 & r2:
                                raise SweepFailure(
                                    "TreeDisjoint",
                                    "n=%d down=%x split=%s" % (n, down, labelling))
    return checked


def sweep_tree_order(n_max: int) -> int:
    checked = 0
    for n in range(1, n_max + 1):
        for down in range(1 << (n * n)):
            ok = True
            for j in range(n):
                col = 0
                for i in range(n):
                    if down & _bit(n, i, j):
                        col |= 1 << i
                if col & (col - 1):
                    ok = False
                    break
            if not ok:
                continue
            stc = closure_mask(down, n)
            checked += 1
            for u in range(n):
                ancestors = [v for v in range(n) if stc & _bit(n, v, u)]
                for v in ancestors:
                    for w in ancestors:
                        if not (stc & _bit(n, v, w) or stc & _bit(n, w, v)):
                            raise SweepFailure("TreeOrder", "n=%d down=%x" % (n, down))
    return checked


SCHEME_SWEEPS = {
    "NoExit": sweep_noexit,
    "GoOut": sweep_goout,
    "NewStart": sweep_newstart,
    "Ind": sweep_induction,
    "Order": sweep_order,
    "TreeOrder": sweep_tree_order,
    "TreeDisjoint": sweep_tree_disjoint,
}


def run_scheme_sweeps(n_max: int = 4) -> Dict[str, int]:
    out = {}
    for name, fn in SCHEME_SWEEPS.items():
        out[name] = fn(n_max)
    return out

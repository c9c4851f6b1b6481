"""Backtracking enumeration of functors and natural transformations.

Every search is exhaustive and deterministic.  Candidate restrictions are
given as callables, which is how lifting problems, projections over a base
and "cartesian arrows go to cartesian arrows" are all expressed.
"""

from __future__ import annotations

from .category import Counter, Functor, NatTrans, okey


def _object_order(A, obj_cands):
    remaining = list(A.objects)
    order = []
    placed = set()
    while remaining:
        def score(x):
            links = sum(1 for a in A.out_arrows(x) if A.tgt(a) in placed) + sum(
                1 for a in A.in_arrows(x) if A.src(a) in placed
            )
            return (-links, len(obj_cands[x]), okey(x))

        best = min(remaining, key=score)
        remaining.remove(best)
        order.append(best)
        placed.add(best)
    return order


def _plan(A, order):
    """Interleave objects and the arrows that become determined after them."""
    plan = []
    placed = set()
    seen = set()
    for x in order:
        plan.append((0, x))
        placed.add(x)
        for a in A.arrows:
            if a in seen or A.is_identity(a):
                continue
            s, t = A.ends(a)
            if s in placed and t in placed:
                plan.append((1, a))
                seen.add(a)
    pos = {item: i for i, (k, item) in enumerate(plan) if k == 1}
    checks = [[] for _ in plan]
    for f, g in A.composable_pairs():
        h = A.then(f, g)
        involved = [a for a in (f, g, h) if not A.is_identity(a)]
        if not involved or (A.is_identity(f) or A.is_identity(g)):
            continue
        last = max(pos[a] for a in involved)
        checks[last].append((f, g, h))
    return plan, checks


def iter_functors(A, B, obj_candidates=None, arr_candidates=None, counter=None):
    """Yield every functor ``A -> B`` allowed by the candidate callables.

    ``obj_candidates(x)`` returns the allowed images of object ``x`` and
    ``arr_candidates(a, s, t)`` filters the arrows ``s -> t`` of ``B``
    allowed as images of arrow ``a``.
    """
    counter = counter or Counter("functor enumeration")
    obj_cands = {x: tuple(obj_candidates(x)) if obj_candidates else B.objects for x in A.objects}
    order = _object_order(A, obj_cands)
    plan, checks = _plan(A, order)
    n = len(plan)
    om = {}
    am = {}
    idB = B.identity

    def val(a):
        r = am.get(a)
        if r is None:
            r = idB(om[A.src(a)])
        return r

    def ok(i):
        then = B.then
        for f, g, h in checks[i]:
            if then(val(f), val(g)) != val(h):
                return False
        return True

    def rec(i):
        if i == n:
            arr = dict(am)
            for x in A.objects:
                arr[A.identity(x)] = idB(om[x])
            yield Functor(A, B, dict(om), arr)
            return
        kind, item = plan[i]
        if kind == 0:
            for b in obj_cands[item]:
                counter.tick()
                om[item] = b
                yield from rec(i + 1)
            om.pop(item, None)
        else:
            s, t = A.ends(item)
            hs = B.hom(om[s], om[t])
            if arr_candidates is not None:
                hs = arr_candidates(item, om[s], om[t])
            for h in hs:
                counter.tick()
                am[item] = h
                if ok(i):
                    yield from rec(i + 1)
            am.pop(item, None)

    yield from rec(0)


def iter_nat_trans(F, G, comp_candidates=None, counter=None):
    """Yield every natural transformation ``F => G``.

    ``comp_candidates(x, Fx, Gx)`` may restrict the allowed components.
    """
    counter = counter or Counter("natural transformation enumeration")
    A, B = F.dom, F.cod
    objs = A.objects
    idx = {x: i for i, x in enumerate(objs)}
    checks = [[] for _ in objs]
    for a in A.arrows:
        if A.is_identity(a):
            continue
        s, t = A.ends(a)
        checks[max(idx[s], idx[t])].append((a, s, t))
    comp = {}
    n = len(objs)

    def rec(i):
        if i == n:
            yield NatTrans(F, G, dict(comp))
            return
        x = objs[i]
        fx, gx = F.obj_map[x], G.obj_map[x]
        cands = comp_candidates(x, fx, gx) if comp_candidates else B.hom(fx, gx)
        for c in cands:
            counter.tick()
            comp[x] = c
            good = True
            for a, s, t in checks[i]:
                if B.then(comp[s], G.arr_map[a]) != B.then(F.arr_map[a], comp[t]):
                    good = False
                    break
            if good:
                yield from rec(i + 1)
        comp.pop(x, None)

    yield from rec(0)


def functor_category_from(functors, A, B, comp_candidates=None, counter=None, name=None):
    """Category whose objects are ``functors`` and arrows all transformations between them."""
    from .category import FinCategory

    functors = list(functors)
    arrows = {}
    ident = {}
    counter = counter or Counter("functor category")
    for F in functors:
        for G in functors:
            for t in iter_nat_trans(F, G, comp_candidates, counter):
                arrows[t] = (F, G)
        ident[F] = NatTrans(F, F, {x: B.identity(F.obj_map[x]) for x in A.objects})

    def rule(s, t):
        return NatTrans(s.src, t.tgt, {x: B.then(s.components[x], t.components[x]) for x in A.objects})

    return FinCategory(functors, arrows, ident, rule, name=name)

"""Presheaves of sets and of categories, sheaf tests and sheafification.

Sheafification is the plus construction applied twice.  Elements of a plus
presheaf are classes of matching families; a class that contains the image
of an old element keeps that element's name, so a sheaf sheafifies to
itself on the nose.
"""

from __future__ import annotations

from functools import cached_property

from .core.category import Counter, FinCategory, Functor, discrete, okey, osorted
from .errors import FunctorViolation, ValidationError


class SetPresheaf:
    """``values[S]`` a finite set; ``restr[f]`` a dict ``values[S] -> values[T]`` for ``f: T -> S``.

    Restrictions along identities may be omitted.
    """

    def __init__(self, base, values, restr, name=None):
        self.base = base
        self.values = {S: tuple(osorted(set(values[S]))) for S in base.objects}
        self.restr = {}
        for f in base.arrows:
            m = restr.get(f)
            if m is None:
                if base.is_identity(f):
                    m = {x: x for x in self.values[base.src(f)]}
                else:
                    raise ValidationError(f"missing restriction along {f!r}", f)
            self.restr[f] = dict(m)
        self.name = name

    def __repr__(self):
        sizes = {S: len(v) for S, v in self.values.items()}
        return f"<SetPresheaf {self.name or ''} {sizes}>"

    def restrict(self, f, x):
        return self.restr[f][x]

    def check(self):
        E = self.base
        for f in E.arrows:
            T, S = E.ends(f)
            m = self.restr[f]
            for x in self.values[S]:
                if m.get(x) not in self.values[T] or x not in m:
                    raise FunctorViolation(f"restriction along {f!r} is not a map at {x!r}", (f, x))
        for S in E.objects:
            for x in self.values[S]:
                if self.restr[E.identity(S)][x] != x:
                    raise FunctorViolation(f"identity restriction moves {x!r}", (S, x))
        for g, f in E.composable_pairs():
            gf = E.then(g, f)
            for x in self.values[E.tgt(f)]:
                if self.restr[gf][x] != self.restr[g][self.restr[f][x]]:
                    raise FunctorViolation(f"restriction not functorial at {(g, f)!r}", (g, f, x))
        return self

    @property
    def key(self):
        return (
            tuple(self.values[S] for S in self.base.objects),
            tuple(tuple(sorted(self.restr[f].items(), key=okey)) for f in self.base.arrows),
        )

    def sort_key(self):
        return okey(self.key)


class PresheafMap:
    """Natural map of set presheaves, ``comps[S][x]``."""

    def __init__(self, src, tgt, comps):
        self.src = src
        self.tgt = tgt
        self.comps = comps

    def __call__(self, S, x):
        return self.comps[S][x]

    def check(self):
        E = self.src.base
        for f in E.arrows:
            T, S = E.ends(f)
            for x in self.src.values[S]:
                if self.comps[T][self.src.restrict(f, x)] != self.tgt.restrict(f, self.comps[S][x]):
                    raise FunctorViolation(f"map is not natural along {f!r}", (f, x))
        return self

    def then(self, other):
        return PresheafMap(
            self.src, other.tgt,
            {S: {x: other.comps[S][y] for x, y in m.items()} for S, m in self.comps.items()},
        )

    def is_objectwise_bijective(self):
        return all(
            len(set(self.comps[S].values())) == len(self.src.values[S]) == len(self.tgt.values[S])
            for S in self.src.base.objects
        )


def identity_presheaf_map(P):
    return PresheafMap(P, P, {S: {x: x for x in P.values[S]} for S in P.base.objects})


def terminal_presheaf(E):
    return SetPresheaf(E, {S: ["*"] for S in E.objects}, {f: {"*": "*"} for f in E.arrows}, name="1")


def yoneda(E, S):
    """``eta(S)``: ``T -> Hom(T, S)`` with restriction by precomposition."""
    values = {T: list(E.hom(T, S)) for T in E.objects}
    restr = {g: {f: E.then(g, f) for f in E.hom(E.tgt(g), S)} for g in E.arrows}
    return SetPresheaf(E, values, restr, name=f"y({S!r})")


# -- matching families -------------------------------------------------------------


def matching_families(P, arrows, counter=None):
    """All matching families on a sieve, each a tuple of ``(f, s_f)`` in canonical order."""
    E = P.base
    arrows = osorted(arrows)
    # place arrows from larger sources first: their values determine the rest
    order = sorted(arrows, key=lambda f: (-len(E.in_arrows(E.src(f))), okey(f)))
    members = set(arrows)
    below = {f: [(g, E.then(g, f)) for g in E.in_arrows(E.src(f))] for f in arrows}
    above = {f: [] for f in arrows}
    for f in arrows:
        for g, h in below[f]:
            if h in members and h != f:
                above[h].append((g, f))
    counter = counter or Counter("matching families")
    assign = {}
    out = []

    def rec(i):
        if i == len(order):
            out.append(tuple((f, assign[f]) for f in arrows))
            return
        f = order[i]
        forced = None
        for g, h in above[f]:
            if h in assign:
                v = P.restrict(g, assign[h])
                if forced is None:
                    forced = v
                elif forced != v:
                    return
        cands = (forced,) if forced is not None else P.values[E.src(f)]
        for s in cands:
            counter.tick()
            ok = True
            for g, h in below[f]:
                if h in assign and assign[h] != P.restrict(g, s):
                    ok = False
                    break
            if ok:
                assign[f] = s
                rec(i + 1)
                del assign[f]

    rec(0)
    return out


def sheaf_witness(P, top):
    """``(S, sieve, reason)`` where the sheaf condition fails, or None."""
    E = P.base
    for S in E.objects:
        for R in top.refinements(S):
            arrows = osorted(R.arrows)
            fams = matching_families(P, arrows)
            image = {}
            for x in P.values[S]:
                fam = tuple((f, P.restrict(f, x)) for f in arrows)
                if fam in image:
                    return (S, R, ("not separated", image[fam], x))
                image[fam] = x
            if len(fams) != len(image):
                missing = next(fm for fm in fams if fm not in image)
                return (S, R, ("no amalgamation", missing))
    return None


def is_sheaf(P, top):
    return sheaf_witness(P, top) is None


# -- plus construction ---------------------------------------------------------------


def smallest_cover(top, S):
    """Intersection of every covering sieve of ``S``; itself a cover on a finite site."""
    covers = top.refinements(S)
    arrows = frozenset.intersection(*(R.arrows for R in covers))
    if not top.is_cover(S, arrows):
        raise ValidationError(f"covers of {S!r} are not closed under intersection", S)
    return arrows


class PlusResult:
    """``P+`` with its unit.

    Every matching family is equivalent to its restriction to the smallest
    cover, and two families on that cover are equivalent only when equal, so
    ``P+(S)`` is the set of matching families on the smallest cover.
    """

    def __init__(self, P, top, counter):
        E = P.base
        self.source = P
        self.minimal = {S: smallest_cover(top, S) for S in E.objects}
        self._names = {}
        values = {}
        unit = {}
        for S in E.objects:
            R = osorted(self.minimal[S])
            fams = matching_families(P, R, counter)
            from_unit = {}
            for x in P.values[S]:
                fam = tuple((f, P.restrict(f, x)) for f in R)
                if fam not in from_unit or okey(x) < okey(from_unit[fam]):
                    from_unit[fam] = x
            taken = set(P.values[S])
            fresh = 0
            names = {}
            for fam in fams:
                if fam in from_unit:
                    names[fam] = from_unit[fam]
                else:
                    while ("+", fresh) in taken:
                        fresh += 1
                    names[fam] = ("+", fresh)
                    taken.add(("+", fresh))
            self._names[S] = names
            values[S] = list(names.values())
            unit[S] = {x: names[tuple((f, P.restrict(f, x)) for f in R)] for x in P.values[S]}
        self.reps = {S: {n: dict(fam) for fam, n in self._names[S].items()} for S in E.objects}
        restr = {}
        for g in E.arrows:
            T, S = E.ends(g)
            restr[g] = {n: self.name(T, {h: d[E.then(h, g)] for h in self.minimal[T]})
                        for n, d in self.reps[S].items()}
        self.presheaf = SetPresheaf(E, values, restr, name=f"{P.name or 'P'}+")
        self.unit = PresheafMap(P, self.presheaf, unit)

    def name(self, S, family):
        """Element of ``P+(S)`` named by a matching family (a dict on any cover)."""
        key = tuple((f, family[f]) for f in osorted(self.minimal[S]))
        return self._names[S][key]


def plus_construction(P, top, counter=None):
    return PlusResult(P, top, counter or Counter("plus construction"))


def plus_map(phi, rp, rq):
    """``phi+: P+ -> Q+`` from the plus results of its source and target."""
    E = phi.src.base
    comps = {}
    for S in E.objects:
        comps[S] = {
            n: rq.name(S, {f: phi(E.src(f), s) for f, s in d.items()}) for n, d in rp.reps[S].items()
        }
    return PresheafMap(rp.presheaf, rq.presheaf, comps)


class Sheafification:
    """``aP = P++`` with the composite unit ``P -> aP``."""

    def __init__(self, P, top, counter=None):
        self.first = plus_construction(P, top, counter)
        self.second = plus_construction(self.first.presheaf, top, counter)
        self.sheaf = self.second.presheaf
        self.unit = self.first.unit.then(self.second.unit)
        self.source = P

    def map_to(self, phi, other):
        """``a(phi): aP -> aQ`` for ``phi: P -> Q`` with ``other`` the sheafification of Q."""
        once = plus_map(phi, self.first, other.first)
        return plus_map(once, self.second, other.second)


def sheafify(P, top, counter=None):
    """Return ``(aP, unit)``."""
    s = Sheafification(P, top, counter)
    return s.sheaf, s.unit


# -- presheaves of categories -----------------------------------------------------------


class CatPresheaf:
    """Strict presheaf of finite categories: ``restr[f]`` is a functor ``X(S) -> X(T)``."""

    def __init__(self, base, values, restr, name=None):
        self.base = base
        self.values = dict(values)
        self.restr = dict(restr)
        for f in base.arrows:
            if f not in self.restr:
                if base.is_identity(f):
                    C = self.values[base.src(f)]
                    self.restr[f] = Functor(C, C, {x: x for x in C.objects}, {a: a for a in C.arrows})
                else:
                    raise ValidationError(f"missing restriction along {f!r}", f)
        self.name = name

    def __repr__(self):
        sizes = {S: (len(C.objects), len(C.arrows)) for S, C in self.values.items()}
        return f"<CatPresheaf {self.name or ''} {sizes}>"

    def check(self):
        E = self.base
        for f in E.arrows:
            T, S = E.ends(f)
            F = self.restr[f]
            if F.dom is not self.values[S] and F.dom.signature != self.values[S].signature:
                raise FunctorViolation(f"restriction along {f!r} has the wrong domain", f)
            F.check()
        for S in E.objects:
            F = self.restr[E.identity(S)]
            if any(F.obj_map[x] != x for x in F.dom.objects) or any(F.arr_map[a] != a for a in F.dom.arrows):
                raise FunctorViolation(f"identity restriction at {S!r} is not the identity", S)
        for g, f in E.composable_pairs():
            lhs = self.restr[E.then(g, f)]
            rhs = self.restr[f].then(self.restr[g])
            if lhs.key != rhs.key:
                raise FunctorViolation(f"restriction not strictly functorial at {(g, f)!r}", (g, f))
        return self

    @cached_property
    def ob(self):
        E = self.base
        return SetPresheaf(
            E, {S: C.objects for S, C in self.values.items()},
            {f: dict(self.restr[f].obj_map) for f in E.arrows}, name="Ob",
        )

    @cached_property
    def mor(self):
        E = self.base
        return SetPresheaf(
            E, {S: C.arrows for S, C in self.values.items()},
            {f: dict(self.restr[f].arr_map) for f in E.arrows}, name="Mor",
        )

    @cached_property
    def pairs(self):
        E = self.base
        values = {S: C.composable_pairs() for S, C in self.values.items()}
        restr = {}
        for f in E.arrows:
            am = self.restr[f].arr_map
            restr[f] = {(a, b): (am[a], am[b]) for a, b in values[E.tgt(f)]}
        return SetPresheaf(E, values, restr, name="Mor2")


class CatPresheafMap:
    """Natural transformation of strict presheaves: ``comps[S]`` a functor ``X(S) -> Y(S)``."""

    def __init__(self, src, tgt, comps):
        self.src = src
        self.tgt = tgt
        self.comps = comps

    def check(self):
        E = self.src.base
        for f in E.arrows:
            T, S = E.ends(f)
            lhs = self.src.restr[f].then(self.comps[T])
            rhs = self.comps[S].then(self.tgt.restr[f])
            if lhs.key != rhs.key:
                raise FunctorViolation(f"map of presheaves not natural along {f!r}", f)
        return self

    def then(self, other):
        return CatPresheafMap(self.src, other.tgt, {S: F.then(other.comps[S]) for S, F in self.comps.items()})


def discrete_presheaf(P):
    """``D(P)``: objectwise discrete categories."""
    E = P.base
    values = {S: discrete(P.values[S], name=f"D{S!r}") for S in E.objects}
    restr = {}
    for f in E.arrows:
        T, S = E.ends(f)
        m = P.restr[f]
        restr[f] = Functor(values[S], values[T], dict(m), {("id", x): ("id", y) for x, y in m.items()})
    return CatPresheaf(E, values, restr, name=f"D{P.name or ''}")


def constant_presheaf(E, C):
    values = {S: C for S in E.objects}
    restr = {f: Functor(C, C, {x: x for x in C.objects}, {a: a for a in C.arrows}) for f in E.arrows}
    return CatPresheaf(E, values, restr, name=f"const({C.name})")


def sheaf_of_categories_witness(X, top):
    w = sheaf_witness(X.ob, top)
    if w is not None:
        return ("objects",) + w
    w = sheaf_witness(X.mor, top)
    if w is not None:
        return ("arrows",) + w
    return None


def is_sheaf_of_categories(X, top):
    """The comparison ``X(S) -> lim_R X`` is an isomorphism for every cover ``R``.

    Objects and arrows of the strict limit are matching families of objects
    and of arrows, so this is the sheaf condition on both.
    """
    return sheaf_of_categories_witness(X, top) is None


def limit_comparison_is_iso(X, top):
    """Independent form of the test: objects of ``X^(A)`` for ``A`` the point and the arrow."""
    from .core.category import arrow_category, terminal
    from .core.search import iter_functors

    E = X.base
    for A in (terminal(), arrow_category()):
        values = {S: [F.key for F in iter_functors(A, X.values[S])] for S in E.objects}
        restr = {}
        for f in E.arrows:
            T, S = E.ends(f)
            G = X.restr[f]
            restr[f] = {}
            for F in iter_functors(A, X.values[S]):
                restr[f][F.key] = F.then(G).key
        if not is_sheaf(SetPresheaf(E, values, restr), top):
            return False
    return True


class CatSheafification:
    """``aX`` with unit ``k: X -> aX``, computed on objects, arrows and composable pairs."""

    def __init__(self, X, top, counter=None):
        E = X.base
        counter = counter or Counter("sheafify categories")
        self.src = X
        self.top = top
        self.s_ob = Sheafification(X.ob, top, counter)
        self.s_mor = Sheafification(X.mor, top, counter)
        self.s_pairs = Sheafification(X.pairs, top, counter)
        aob, amor, apairs = self.s_ob.sheaf, self.s_mor.sheaf, self.s_pairs.sheaf

        def transported(fn, P, Q, sP, sQ):
            phi = PresheafMap(P, Q, {S: {x: fn(S, x) for x in P.values[S]} for S in E.objects})
            return sP.map_to(phi, sQ)

        a_src = transported(lambda S, a: X.values[S].src(a), X.mor, X.ob, self.s_mor, self.s_ob)
        a_tgt = transported(lambda S, a: X.values[S].tgt(a), X.mor, X.ob, self.s_mor, self.s_ob)
        a_id = transported(lambda S, x: X.values[S].identity(x), X.ob, X.mor, self.s_ob, self.s_mor)
        a_p1 = transported(lambda S, p: p[0], X.pairs, X.mor, self.s_pairs, self.s_mor)
        a_p2 = transported(lambda S, p: p[1], X.pairs, X.mor, self.s_pairs, self.s_mor)
        a_comp = transported(lambda S, p: X.values[S].then(p[0], p[1]), X.pairs, X.mor, self.s_pairs, self.s_mor)
        values = {}
        for S in E.objects:
            arrows = {a: (a_src(S, a), a_tgt(S, a)) for a in amor.values[S]}
            ident = {x: a_id(S, x) for x in aob.values[S]}
            table = {}
            for c in apairs.values[S]:
                key = (a_p1(S, c), a_p2(S, c))
                r = a_comp(S, c)
                if table.setdefault(key, r) != r:
                    raise ValidationError("sheafified composition is not single valued", key)
            values[S] = FinCategory(aob.values[S], arrows, ident, table, name=f"a{S!r}")
        restr = {}
        for f in E.arrows:
            T, S = E.ends(f)
            restr[f] = Functor(values[S], values[T], dict(aob.restr[f]), dict(amor.restr[f]))
        self.sheaf = CatPresheaf(E, values, restr, name=f"a({X.name or 'X'})")
        comps = {}
        for S in E.objects:
            comps[S] = Functor(X.values[S], values[S], dict(self.s_ob.unit.comps[S]), dict(self.s_mor.unit.comps[S]))
        self.unit = CatPresheafMap(X, self.sheaf, comps)

    def map_to(self, phi, other):
        """``a(phi): aX -> aY`` for ``phi: X -> Y`` with ``other`` the sheafification of ``Y``."""
        E = self.src.base
        X, Y = phi.src, phi.tgt
        ob = PresheafMap(X.ob, Y.ob, {S: dict(phi.comps[S].obj_map) for S in E.objects})
        mor = PresheafMap(X.mor, Y.mor, {S: dict(phi.comps[S].arr_map) for S in E.objects})
        a_ob = self.s_ob.map_to(ob, other.s_ob)
        a_mor = self.s_mor.map_to(mor, other.s_mor)
        comps = {
            S: Functor(self.sheaf.values[S], other.sheaf.values[S], a_ob.comps[S], a_mor.comps[S])
            for S in E.objects
        }
        return CatPresheafMap(self.sheaf, other.sheaf, comps)


def sheafify_cat(X, top, counter=None):
    """Return ``(aX, k)``."""
    s = CatSheafification(X, top, counter)
    return s.sheaf, s.unit

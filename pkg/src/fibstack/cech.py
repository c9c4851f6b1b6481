"""Cech simplicial fibred categories, truncated totalization and latching objects."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

from .core.category import FinCategory, Functor, NatTrans, identity_functor
from .core.constructions import coproduct, induced_from_pushout
from .core.flags import functor_flags
from .errors import MissingPullback, PreconditionViolated
from .fibred import FibMap, FibredCategory, cart_hom, empty_fibred, fib_pushout, slice_fib, slice_map
from .site import CoveringFamily, generated_sieve
from .stacks import restriction_functor


# -- wide pullbacks in a finite category ---------------------------------------------


def _cones(E, arrows):
    srcs = [E.src(f) for f in arrows]
    for P in E.objects:
        for legs in product(*(E.hom(P, s) for s in srcs)):
            if len({E.then(p, f) for p, f in zip(legs, arrows)}) == 1:
                yield P, legs


def wide_pullback(E, arrows):
    """A limit ``(P, legs)`` of arrows with a common target; raises MissingPullback."""
    arrows = tuple(arrows)
    if len(arrows) == 1:
        s = E.src(arrows[0])
        return s, (E.identity(s),)
    cones = list(_cones(E, arrows))
    for P, legs in cones:
        if all(
            sum(1 for h in E.hom(Q, P) if all(E.then(h, p) == q for p, q in zip(legs, qs))) == 1
            for Q, qs in cones
        ):
            return P, legs
    raise MissingPullback(f"no limit of {list(arrows)!r}", arrows)


def mediating_arrow(E, cone, target):
    """The unique arrow from the apex of ``cone`` into ``target`` commuting with the legs."""
    (Q, qs), (P, ps) = cone, target
    for h in E.hom(Q, P):
        if all(E.then(h, p) == q for p, q in zip(ps, qs)):
            return h
    raise MissingPullback("cone does not factor through the limit", (Q, P))


# -- truncated simplicial fibred categories ------------------------------------------


class TruncSimplicialFib:
    """Levels ``0..n`` of a simplicial object in Fib(E).

    ``faces[n][k]`` maps level ``n`` to ``n-1``; ``degeneracies[n][k]`` maps level
    ``n`` to ``n+1``.
    """

    def __init__(self, levels, faces, degeneracies):
        self.levels = list(levels)
        self.faces = faces
        self.degeneracies = degeneracies

    @property
    def base(self):
        return self.levels[0].base

    def sizes(self):
        return [(len(L.total.objects), len(L.total.arrows)) for L in self.levels]

    def simplicial_identity_witness(self):
        """First violated simplicial identity among the stored maps, as a string."""
        n_max = len(self.levels) - 1
        eq = _fibmaps_equal
        for n in range(2, n_max + 1):
            for i in range(n + 1):
                for j in range(i + 1, n + 1):
                    if not eq(self.faces[n][j].then(self.faces[n - 1][i]), self.faces[n][i].then(self.faces[n - 1][j - 1])):
                        return f"d{i} d{j} at level {n}"
        for n in range(n_max):
            for j in range(n + 1):
                s = self.degeneracies[n][j]
                for i in range(n + 2):
                    lhs = s.then(self.faces[n + 1][i])
                    if i in (j, j + 1):
                        if not eq(lhs, identity_fibmap(self.levels[n])):
                            return f"d{i} s{j} at level {n}"
                    elif n >= 1:
                        rhs = self.faces[n][i if i < j else i - 1].then(self.degeneracies[n - 1][j - 1 if i < j else j])
                        if not eq(lhs, rhs):
                            return f"d{i} s{j} at level {n}"
        for n in range(n_max - 1):
            for i in range(n + 1):
                for j in range(i, n + 1):
                    lhs = self.degeneracies[n][j].then(self.degeneracies[n + 1][i])
                    rhs = self.degeneracies[n][i].then(self.degeneracies[n + 1][j + 1])
                    if not eq(lhs, rhs):
                        return f"s{i} s{j} at level {n}"
        return None


def identity_fibmap(F):
    return FibMap(F, F, identity_functor(F.total))


def _fibmaps_equal(u, v):
    return u.functor.obj_map == v.functor.obj_map and u.functor.arr_map == v.functor.arr_map


def constant_simplicial(F, n_max=2):
    """The constant simplicial object at ``F``: every face and degeneracy is the identity."""
    one = identity_fibmap(F)
    faces = {n: [one] * (n + 1) for n in range(1, n_max + 1)}
    degs = {n: [one] * (n + 1) for n in range(n_max)}
    return TruncSimplicialFib([F] * (n_max + 1), faces, degs)


class CechObject(TruncSimplicialFib):
    """The Cech simplicial fibred category of a covering family.

    Level ``n`` is the disjoint union over multi-indices ``(i_0, ..., i_n)`` of the
    slices over the fibre products of the members; objects are ``(index, f)``.
    """

    def __init__(self, E, fam, n_max=2):
        self.E = E
        self.family = fam
        self.target = fam.target
        self.members = tuple(fam.members)
        self.n_max = n_max
        m = len(self.members)
        self.indices = {n: list(product(range(m), repeat=n + 1)) for n in range(n_max + 1)}
        self.apex = {}
        for n in range(n_max + 1):
            for idx in self.indices[n]:
                self.apex[idx] = wide_pullback(E, [self.members[i] for i in idx])
        self.levels = [self._level(n) for n in range(n_max + 1)]
        faces = {
            n: [self._simplicial_map(n, n - 1, _delete(n, k)) for k in range(n + 1)] for n in range(1, n_max + 1)
        }
        degs = {n: [self._simplicial_map(n, n + 1, _repeat(n, k)) for k in range(n + 1)] for n in range(n_max)}
        super().__init__(self.levels, faces, degs)

    def connecting_arrow(self, idx, positions):
        """The arrow ``S_idx -> S_sub`` where ``sub`` picks ``positions`` of ``idx``."""
        P, legs = self.apex[idx]
        sub = tuple(idx[k] for k in positions)
        return mediating_arrow(self.E, (P, tuple(legs[k] for k in positions)), self.apex[sub])

    def _level(self, n):
        E = self.E
        parts = {idx: slice_fib(E, self.apex[idx][0]).total for idx in self.indices[n]}
        C = coproduct(parts, name=f"Cech{n}")
        proj = Functor(
            C, E,
            {o: E.src(o[1]) for o in C.objects},
            {a: a[1][0] for a in C.arrows},
        )
        return FibredCategory(C, E, proj, name=C.name, cartesian=lambda a: True,
                              cleavage=lambda y, g: (y[0], (g, y[1])))

    def _simplicial_map(self, n, m, positions):
        E = self.E
        src, tgt = self.levels[n], self.levels[m]
        conn = {idx: self.connecting_arrow(idx, positions) for idx in self.indices[n]}

        def re(idx):
            return tuple(idx[k] for k in positions)

        om = {o: (re(o[0]), E.then(o[1], conn[o[0]])) for o in src.total.objects}
        am = {a: (re(a[0]), (a[1][0], E.then(a[1][1], conn[a[0]]))) for a in src.total.arrows}
        return FibMap(src, tgt, Functor(src.total, tgt.total, om, am))

    @cached_property
    def augmentation(self):
        """Level 0 to ``E_/S`` by composing with the members."""
        E = self.E
        src, tgt = self.levels[0], slice_fib(E, self.target)
        om = {o: E.then(o[1], self.members[o[0][0]]) for o in src.total.objects}
        am = {a: (a[1][0], E.then(a[1][1], self.members[a[0][0]])) for a in src.total.arrows}
        return FibMap(src, tgt, Functor(src.total, tgt.total, om, am))


def _delete(n, k):
    return tuple(p for p in range(n + 1) if p != k)


def _repeat(n, k):
    return tuple(range(k + 1)) + tuple(range(k, n + 1))


def cech_applicable(top):
    """Cech descent is only defined for sites given by covering families."""
    return top.pretopology


def cech_simplicial(top, fam, n_max=2):
    if not isinstance(fam, CoveringFamily):
        fam = CoveringFamily(fam[0], tuple(fam[1]))
    E = getattr(top, "base", top)
    for f in fam.members:
        if E.tgt(f) != fam.target:
            raise PreconditionViolated(f"{f!r} does not land in {fam.target!r}")
    return CechObject(E, fam, n_max)


# -- truncated cosimplicial categories and Tot ---------------------------------------


class _LazyMap(dict):
    def __init__(self, fn):
        super().__init__()
        self._fn = fn

    def __missing__(self, k):
        v = self[k] = self._fn(k)
        return v


class LazyFunctor:
    """A functor whose object and arrow maps are computed on demand."""

    def __init__(self, dom, cod, on_obj, on_arr):
        self.dom = dom
        self.cod = cod
        self.obj_map = _LazyMap(on_obj)
        self.arr_map = _LazyMap(on_arr)


class ProductCategory:
    """The product of a finite family of categories, evaluated lazily.

    Objects and arrows are tuples aligned with ``tags``.
    """

    def __init__(self, factors, name=None):
        self.tags = tuple(factors)
        self.factors = tuple(factors[t] for t in self.tags)
        self.position = {t: i for i, t in enumerate(self.tags)}
        self.name = name

    def __repr__(self):
        return f"<Product {self.name or ''} of {len(self.factors)}>"

    @cached_property
    def objects(self):
        return list(product(*(C.objects for C in self.factors)))

    def size(self):
        n = 1
        for C in self.factors:
            n *= len(C.objects)
        return n

    def hom(self, x, y):
        return list(product(*(C.hom(a, b) for C, a, b in zip(self.factors, x, y))))

    def isos(self, x, y):
        return list(product(*(C.isos(a, b) for C, a, b in zip(self.factors, x, y))))

    def identity(self, x):
        return tuple(C.identity(a) for C, a in zip(self.factors, x))

    def then(self, f, g):
        return tuple(C.then(a, b) for C, a, b in zip(self.factors, f, g))

    def is_iso(self, f):
        return all(C.is_iso(a) for C, a in zip(self.factors, f))


@dataclass
class TruncCosimplicialCat:
    """Levels ``X^0, X^1, X^2`` with cofaces ``d[n][i]: X^(n-1) -> X^n`` and ``s0: X^1 -> X^0``.

    Levels may be FinCategory or ProductCategory; maps may be Functor or LazyFunctor.
    """

    levels: list
    cofaces: dict
    codegeneracy: object
    extra: dict = field(default_factory=dict)

    def identity_witness(self, sample=None):
        """Check the cosimplicial identities on objects of ``X^0`` (all, or ``sample``)."""
        X0 = self.levels[0]
        d1, d2, s0 = self.cofaces[1], self.cofaces[2], self.codegeneracy
        for x in sample if sample is not None else X0.objects:
            for i in range(2):
                for j in range(i + 1, 3):
                    a = d2[j].obj_map[d1[i].obj_map[x]]
                    b = d2[i].obj_map[d1[j - 1].obj_map[x]]
                    if a != b:
                        return ("cofaces", i, j, x)
            for i in range(2):
                if s0.obj_map[d1[i].obj_map[x]] != x:
                    return ("codegeneracy", i, x)
        return None


def constant_cosimplicial(A):
    one = identity_functor(A)
    return TruncCosimplicialCat([A, A, A], {1: [one, one], 2: [one, one, one]}, one)


def tot(X):
    """Descent data ``(x, f)``: ``f: d1 x -> d0 x`` iso, ``s0 f = id``, ``d1 f = d0 f . d2 f``."""
    X0, X1, X2 = X.levels
    d0, d1 = X.cofaces[1]
    e0, e1, e2 = X.cofaces[2]
    s0 = X.codegeneracy
    objects = []
    for x in X0.objects:
        for f in X1.isos(d1.obj_map[x], d0.obj_map[x]):
            if s0.arr_map[f] != X0.identity(x):
                continue
            if e1.arr_map[f] != X2.then(e2.arr_map[f], e0.arr_map[f]):
                continue
            objects.append((x, f))
    arrows = {}
    ident = {}
    for a in objects:
        for b in objects:
            (x, f), (y, g) = a, b
            for u in X0.hom(x, y):
                if X1.then(f, d0.arr_map[u]) == X1.then(d1.arr_map[u], g):
                    arrows[u, a, b] = (a, b)
        ident[a] = (X0.identity(a[0]), a, a)

    def rule(p, q):
        return (X0.then(p[0], q[0]), p[1], q[2])

    return FinCategory(objects, arrows, ident, rule, name="Tot")


def _restrict_functor(E, h, x):
    return slice_map(E, h).functor.then(x)


def _restrict_nat(E, h, t):
    w = slice_map(E, h)
    return NatTrans(
        _restrict_functor(E, h, t.src),
        _restrict_functor(E, h, t.tgt),
        {a: t.components[w.obj(a)] for a in w.dom.total.objects},
    )


def cart_levels(F, cech, counter=None):
    """The truncated cosimplicial category ``Cart(level n, F)`` for ``n <= 2``.

    Level ``n`` is the product over multi-indices of ``Cart(E_/S_idx, F)``; the
    cofaces and codegeneracy are precomposition with the Cech structure maps.
    """
    if cech.n_max < 2:
        raise PreconditionViolated("Cart levels need the Cech object up to level 2")
    E = cech.E
    levels = []
    for n in range(3):
        factors = {idx: cart_hom(slice_fib(E, cech.apex[idx][0]), F, counter) for idx in cech.indices[n]}
        levels.append(ProductCategory(factors, name=f"X{n}"))

    def coface(n, k):
        src, tgt = levels[n - 1], levels[n]
        plan = []
        positions = _delete(n, k)
        for idx in tgt.tags:
            sub = tuple(idx[p] for p in positions)
            plan.append((src.position[sub], cech.connecting_arrow(idx, positions)))
        return LazyFunctor(
            src, tgt,
            lambda x: tuple(_restrict_functor(E, h, x[p]) for p, h in plan),
            lambda t: tuple(_restrict_nat(E, h, t[p]) for p, h in plan),
        )

    src, tgt = levels[1], levels[0]
    plan = [(src.position[(i, i)], cech.connecting_arrow((i,), (0, 0))) for (i,) in tgt.tags]
    s0 = LazyFunctor(
        src, tgt,
        lambda x: tuple(_restrict_functor(E, h, x[p]) for p, h in plan),
        lambda t: tuple(_restrict_nat(E, h, t[p]) for p, h in plan),
    )
    cofaces = {1: [coface(1, k) for k in range(2)], 2: [coface(2, k) for k in range(3)]}
    return TruncCosimplicialCat(levels, cofaces, s0, extra={"cech": cech})


def descent_comparison(F, cech, counter=None):
    """``Cart(E_/S, F) -> Tot`` sending ``x`` to its restrictions with identity gluing."""
    E = cech.E
    X = cart_levels(F, cech, counter)
    T = tot(X)
    src = cart_hom(slice_fib(E, cech.target), F, counter)
    X1 = X.levels[1]
    d1 = X.cofaces[1][1]
    om, am = {}, {}
    for x in src.objects:
        x0 = tuple(_restrict_functor(E, f, x) for f in cech.members)
        om[x] = (x0, X1.identity(d1.obj_map[x0]))
    for t in src.arrows:
        a, b = src.ends(t)
        u = tuple(_restrict_nat(E, f, t) for f in cech.members)
        am[t] = (u, om[a], om[b])
    return Functor(src, T, om, am), X


@dataclass
class HomotopySheafReport:
    holds: bool
    flags: object
    sieve_equivalence: bool
    level_sizes: list
    tot_size: tuple

    def __bool__(self):
        return self.holds

    @property
    def agrees(self):
        return self.holds == self.sieve_equivalence


def homotopy_sheaf_report(F, fam, counter=None):
    """Descent comparison for one covering family, cross-checked against its generated sieve."""
    if not isinstance(fam, CoveringFamily):
        fam = CoveringFamily(fam[0], tuple(fam[1]))
    E = F.base
    cech = CechObject(E, fam, 2)
    comp, X = descent_comparison(F, cech, counter)
    fl = functor_flags(comp)
    R = generated_sieve(E, fam.target, fam.members)
    sieve_eq = functor_flags(restriction_functor(F, R, counter)).equivalence
    return HomotopySheafReport(
        holds=fl.equivalence,
        flags=fl,
        sieve_equivalence=sieve_eq,
        level_sizes=cech.sizes(),
        tot_size=(len(comp.cod.objects), len(comp.cod.arrows)),
    )


def homotopy_sheaf_check(F, fam, counter=None):
    """True iff ``Cart(E_/S, F) -> Tot Cart(E_/S_., F)`` is an equivalence."""
    if not isinstance(fam, CoveringFamily):
        fam = CoveringFamily(fam[0], tuple(fam[1]))
    comp, _ = descent_comparison(F, CechObject(F.base, fam, 2), counter)
    return functor_flags(comp).equivalence


# -- latching objects ------------------------------------------------------------


@dataclass
class Latching:
    obj: FibredCategory
    map: FibMap
    injective_on_objects: bool


def _injective_on_objects(u):
    return len(set(u.obj_map.values())) == len(u.obj_map)


def latching(X, n, counter=None):
    """``L_n X`` with its comparison map to ``X_n``, for ``n <= 2``."""
    if n < 0 or n > 2 or n >= len(X.levels):
        raise PreconditionViolated(f"latching object at level {n} is not available")
    Xn = X.levels[n]
    if n == 0:
        L = empty_fibred(X.base)
        m = FibMap(L, Xn, Functor(L.total, Xn.total, {}, {}))
    elif n == 1:
        L = X.levels[0]
        m = X.degeneracies[0][0]
    else:
        s0 = X.degeneracies[0][0]
        if not _injective_on_objects(s0.functor):
            raise PreconditionViolated("the degeneracy of level 0 is not injective on objects")
        L, iG, iH = fib_pushout(s0, s0, counter, name="L2")
        fn = induced_from_pushout(L.total, iG.functor, iH.functor, X.degeneracies[1][0].functor,
                                  X.degeneracies[1][1].functor)
        m = FibMap(L, Xn, fn)
    return Latching(L, m, _injective_on_objects(m.functor))

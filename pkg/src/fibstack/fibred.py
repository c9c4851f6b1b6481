"""Categories fibred over a finite base.

A :class:`FibredCategory` is a functor ``p: F -> E``.  Cartesian always
means strongly cartesian.  Maps between fibred categories are
:class:`FibMap`, a functor of total categories that commutes with the
projections.
"""

from __future__ import annotations

from functools import cached_property

from .core.category import Counter, FinCategory, Functor, NatTrans, identity_functor, okey
from .core.constructions import product, pushout, strict_pullback
from .core.flags import functor_flags, is_isofibration
from .core.search import functor_category_from, iter_functors, iter_nat_trans
from .errors import NotOverBase, PreconditionViolated, UnknownObject


class FibredCategory:
    """A functor ``proj: total -> base``.

    ``cartesian`` optionally supplies a trusted predicate for cartesian
    arrows (constructions that know their cartesian arrows use it; call
    :meth:`certify` to recompute).  ``cleavage`` optionally maps
    ``(y, f)`` to a chosen cartesian lift of ``f`` with target ``y``.
    """

    def __init__(self, total, base, proj, name=None, cartesian=None, cleavage=None):
        self.total = total
        self.base = base
        self.proj = proj
        self.name = name
        self._cart_hint = cartesian
        self._cleave_hint = cleavage
        self._cleavage = None
        self._fibres = {}
        self.cache = {}

    def __repr__(self):
        return f"<Fibred {self.name or ''} {len(self.total.objects)} objects / {len(self.total.arrows)} arrows>"

    def p(self, x):
        return self.proj.obj_map[x]

    def pa(self, a):
        return self.proj.arr_map[a]

    @cached_property
    def over(self):
        out = {S: [] for S in self.base.objects}
        for x in self.total.objects:
            out[self.p(x)].append(x)
        return {S: tuple(v) for S, v in out.items()}

    @cached_property
    def arrows_over(self):
        out = {}
        for a in self.total.arrows:
            out.setdefault(self.pa(a), []).append(a)
        return out

    def fibre(self, S):
        if S not in self.base:
            raise UnknownObject(S)
        F = self._fibres.get(S)
        if F is None:
            ids = self.base.identity(S)
            arrows = [a for a in self.arrows_over.get(ids, ())]
            F = self.total.subcategory(self.over[S], arrows, name=f"fibre({S!r})")
            self._fibres[S] = F
        return F

    # -- cartesian arrows ----------------------------------------------------
    def compute_cartesian(self, phi):
        """Decide strong cartesianness of ``phi`` by exhausting factorizations."""
        E, C = self.base, self.total
        y1, y = C.ends(phi)
        f = self.pa(phi)
        T = E.src(f)
        for psi in C.in_arrows(y):
            z = C.src(psi)
            q = self.pa(psi)
            for g in E.hom(self.p(z), T):
                if E.then(g, f) != q:
                    continue
                n = 0
                for chi in C.hom(z, y1):
                    if self.pa(chi) == g and C.then(chi, phi) == psi:
                        n += 1
                        if n > 1:
                            return False
                if n != 1:
                    return False
        return True

    @cached_property
    def cartesian_arrows(self):
        hint = self._cart_hint
        test = hint if hint is not None else self.compute_cartesian
        return frozenset(a for a in self.total.arrows if test(a))

    def is_cartesian(self, phi):
        return phi in self.cartesian_arrows

    def certify(self):
        """Recompute cartesian arrows from scratch; raise if a trusted hint was wrong."""
        actual = frozenset(a for a in self.total.arrows if self.compute_cartesian(a))
        if actual != self.cartesian_arrows:
            bad = next(iter(actual ^ self.cartesian_arrows))
            raise PreconditionViolated(f"cartesian hint disagrees at arrow {bad!r}")
        return self

    @cached_property
    def _lifts(self):
        out = {}
        for a in self.cartesian_arrows:
            out.setdefault((self.total.tgt(a), self.pa(a)), []).append(a)
        return {k: tuple(sorted(v, key=okey)) for k, v in out.items()}

    def lifts(self, y, f):
        return self._lifts.get((y, f), ())

    def fibration_witness(self):
        """A pair ``(y, f)`` with no cartesian lift, or None."""
        E = self.base
        for y in self.total.objects:
            for f in E.in_arrows(self.p(y)):
                if not self.lifts(y, f):
                    return (y, f)
        return None

    def is_fibration(self):
        return self.fibration_witness() is None

    def cleave(self, y, f):
        """The chosen cartesian lift of ``f`` at ``y``."""
        if self._cleavage is None:
            self._cleavage = {}
        r = self._cleavage.get((y, f))
        if r is None:
            if self._cleave_hint is not None:
                r = self._cleave_hint(y, f)
            elif self.base.is_identity(f):
                r = self.total.identity(y)
            else:
                ls = self.lifts(y, f)
                if not ls:
                    raise PreconditionViolated(f"no cartesian lift of {f!r} at {y!r}")
                r = ls[0]
            self._cleavage[y, f] = r
        return r

    def pullback_obj(self, y, f):
        return self.total.src(self.cleave(y, f))

    def factor_through(self, psi, phi, g):
        """The unique arrow ``chi`` over ``g`` with ``chi then phi == psi`` (``phi`` cartesian)."""
        C = self.total
        z = C.src(psi)
        for chi in C.hom(z, C.src(phi)):
            if self.pa(chi) == g and C.then(chi, phi) == psi:
                return chi
        raise PreconditionViolated("no factorization through a cartesian arrow")

    def is_fibred_in_groupoids(self):
        return all(self.fibre(S).is_groupoid() for S in self.base.objects)


class FibMap:
    """A map of categories over the base: ``functor: dom.total -> cod.total``."""

    def __init__(self, dom, cod, functor, name=None):
        self.dom = dom
        self.cod = cod
        self.functor = functor
        self.name = name

    def __repr__(self):
        return f"<FibMap {self.name or ''} {self.dom.name} -> {self.cod.name}>"

    def obj(self, x):
        return self.functor.obj_map[x]

    def arr(self, a):
        return self.functor.arr_map[a]

    def then(self, other):
        return FibMap(self.dom, other.cod, self.functor.then(other.functor))

    def over_base_witness(self):
        F, G, u = self.dom, self.cod, self.functor
        for x in F.total.objects:
            if G.p(u.obj_map[x]) != F.p(x):
                return x
        for a in F.total.arrows:
            if G.pa(u.arr_map[a]) != F.pa(a):
                return a
        return None

    def fibre_functor(self, S):
        F, G = self.dom.fibre(S), self.cod.fibre(S)
        return Functor(F, G, {x: self.obj(x) for x in F.objects}, {a: self.arr(a) for a in F.arrows})

    @cached_property
    def flags(self):
        return functor_flags(self.functor)


def identity_map(F):
    return FibMap(F, F, identity_functor(F.total), name="id")


def cartesian_functor_witness(u):
    """A cartesian arrow sent to a non-cartesian one, or None; NotOverBase if projections differ."""
    w = u.over_base_witness()
    if w is not None:
        raise NotOverBase(f"map does not commute with projections at {w!r}")
    G = u.cod
    for a in sorted(u.dom.cartesian_arrows, key=okey):
        if not G.is_cartesian(u.arr(a)):
            return a
    return None


def is_cartesian_functor(u):
    return cartesian_functor_witness(u) is None


def is_E_equivalence(u):
    return u.flags.equivalence


# -- standard fibred categories -------------------------------------------------


def base_as_fibred(E):
    """``E`` over itself via the identity; the terminal object of Fib(E)."""
    return FibredCategory(E, E, identity_functor(E), name="E", cartesian=lambda a: True)


def empty_fibred(E):
    C = FinCategory((), {}, {}, {}, name="empty")
    return FibredCategory(C, E, Functor(C, E, {}, {}), name="empty", cartesian=lambda a: True)


def slice_fib(E, S):
    """``E_/S -> E``: objects are arrows ``f: T -> S``; arrows ``(g, f)`` from ``g then f`` to ``f``."""
    key = ("slice", S)
    cache = _base_cache(E)
    if key in cache:
        return cache[key]
    objs = list(E.in_arrows(S))
    arrows = {}
    for f in objs:
        for g in E.in_arrows(E.src(f)):
            arrows[g, f] = (E.then(g, f), f)
    ident = {f: (E.identity(E.src(f)), f) for f in objs}

    def rule(a, b):
        return (E.then(a[0], b[0]), b[1])

    C = FinCategory(objs, arrows, ident, rule, name=f"E/{S!r}")
    proj = Functor(C, E, {f: E.src(f) for f in objs}, {a: a[0] for a in arrows})
    F = FibredCategory(C, E, proj, name=f"E/{S!r}", cartesian=lambda a: True,
                       cleavage=lambda y, g: (g, y))
    F.slice_of = S
    cache[key] = F
    return F


def slice_map(E, g):
    """``E_/g: E_/T -> E_/S`` for ``g: T -> S`` (postcomposition)."""
    key = ("slice_map", g)
    cache = _base_cache(E)
    if key in cache:
        return cache[key]
    T, S = E.ends(g)
    A, B = slice_fib(E, T), slice_fib(E, S)
    fn = Functor(
        A.total, B.total,
        {f: E.then(f, g) for f in A.total.objects},
        {a: (a[0], E.then(a[1], g)) for a in A.total.arrows},
    )
    m = FibMap(A, B, fn, name=f"E/{g!r}")
    cache[key] = m
    return m


_BASE_CACHES = {}


def _base_cache(E):
    # keyed by identity; base categories live for the whole session
    c = _BASE_CACHES.get(id(E))
    if c is None or c[0] is not E:
        c = (E, {})
        _BASE_CACHES[id(E)] = c
    return c[1]


# -- Cart_E(F, G) ---------------------------------------------------------------


def iter_cartesian_functors(F, G, counter=None):
    if F.base.signature != G.base.signature:
        raise PreconditionViolated("fibred categories over different bases")
    cart_G = G.cartesian_arrows
    cart_F = F.cartesian_arrows

    def objs(x):
        return G.over[F.p(x)]

    def arrs(a, s, t):
        want = F.pa(a)
        need_cart = a in cart_F
        return [h for h in G.total.hom(s, t) if G.pa(h) == want and (not need_cart or h in cart_G)]

    return iter_functors(F.total, G.total, objs, arrs, counter)


def _vertical_comps(F, G):
    E = F.base
    memo = {}

    def comps(x, ux, vx):
        key = (F.p(x), ux, vx)
        hit = memo.get(key)
        if hit is None:
            ids = E.identity(key[0])
            hit = memo[key] = [c for c in G.total.hom(ux, vx) if G.pa(c) == ids]
        return hit

    return comps


def vertical_transformations(u, v, F, G, counter=None):
    return iter_nat_trans(u, v, _vertical_comps(F, G), counter)


def cart_hom(F, G, counter=None):
    """The category ``Cart_E(F, G)``: cartesian functors and vertical transformations."""
    key = ("cart_hom", id(G))
    hit = F.cache.get(key)
    if hit is not None and hit[0] is G:
        return hit[1]
    counter = counter or Counter("cart_hom")
    functors = list(iter_cartesian_functors(F, G, counter))
    C = functor_category_from(functors, F.total, G.total, _vertical_comps(F, G), counter, name=f"Cart({F.name},{G.name})")
    F.cache[key] = (G, C)
    return C


def precompose(w, C_src, C_tgt):
    """The functor ``Cart(B, G) -> Cart(A, G)`` given by precomposition with ``w: A -> B``."""
    om = {}
    for x in C_src.objects:
        om[x] = w.functor.then(x)
    am = {}
    A = w.dom.total
    for t in C_src.arrows:
        s0, t0 = C_src.ends(t)
        am[t] = NatTrans(om[s0], om[t0], {a: t.components[w.obj(a)] for a in A.objects})
    return Functor(C_src, C_tgt, om, am)


def postcompose(u, C_src, C_tgt):
    """The functor ``Cart(A, F) -> Cart(A, G)`` given by postcomposition with ``u: F -> G``."""
    om = {}
    for x in C_src.objects:
        om[x] = x.then(u.functor)
    am = {}
    for t in C_src.arrows:
        s0, t0 = C_src.ends(t)
        am[t] = NatTrans(om[s0], om[t0], {a: u.arr(c) for a, c in t.components.items()})
    return Functor(C_src, C_tgt, om, am)


# -- products, tensors, cotensors ------------------------------------------------


def fib_product(F, G, name=None):
    """Product in Fib(E): the fibre product of total categories over the base."""
    P, p1, p2 = strict_pullback(F.proj, G.proj, name=name)
    proj = p1.then(F.proj)
    cf, cg = F.cartesian_arrows, G.cartesian_arrows
    out = FibredCategory(P, F.base, proj, name=name or f"{F.name}x{G.name}",
                         cartesian=lambda a: a[0] in cf and a[1] in cg)
    return out, FibMap(out, F, p1), FibMap(out, G, p2)


def tensor(A, F, name=None):
    """``A x F``: total ``A x F.total`` projected through ``F``."""
    P, p1, p2 = product(A, F.total, name=name)
    proj = p2.then(F.proj)
    inv = A.inverses()
    cf = F.cartesian_arrows
    return FibredCategory(P, F.base, proj, name=name or f"{A.name}x{F.name}",
                          cartesian=lambda a: a[0] in inv and a[1] in cf)


def cotensor(F, A, counter=None, name=None):
    """``F^(A)``: fibre over ``S`` is the functor category ``[A, F_S]``."""
    counter = counter or Counter("cotensor")
    E, C = F.base, F.total
    objs = []
    for S in E.objects:
        ids = E.identity(S)
        over = F.over[S]
        for x in iter_functors(A, C, lambda a, over=over: over,
                               lambda a, s, t, ids=ids: [h for h in C.hom(s, t) if F.pa(h) == ids], counter):
            objs.append((S, x))
    arrows = {}
    for (S, x) in objs:
        for (T, y) in objs:
            for f in E.hom(S, T):
                comps = lambda a, xa, ya, f=f: [h for h in C.hom(xa, ya) if F.pa(h) == f]
                for t in iter_nat_trans(x, y, comps, counter):
                    arrows[f, t] = ((S, x), (T, y))
    ident = {(S, x): (E.identity(S), NatTrans(x, x, {a: C.identity(x.obj_map[a]) for a in A.objects}))
             for S, x in objs}

    def rule(s, t):
        n = NatTrans(s[1].src, t[1].tgt, {a: C.then(s[1].components[a], t[1].components[a]) for a in A.objects})
        return (E.then(s[0], t[0]), n)

    T = FinCategory(objs, arrows, ident, rule, name=name or f"{F.name}^{A.name}")
    proj = Functor(T, E, {o: o[0] for o in objs}, {a: a[0] for a in arrows})
    cf = F.cartesian_arrows
    return FibredCategory(T, E, proj, name=T.name,
                          cartesian=lambda a: all(c in cf for c in a[1].components.values()))


def internal_hom(F, G, counter=None):
    """``CART(F, G)``: fibre over ``S`` is ``Cart_E(E_/S x F, G)``."""
    from .groth import grothendieck
    from .presheaf import CatPresheaf

    E = F.base
    prods = {S: fib_product(slice_fib(E, S), F)[0] for S in E.objects}
    values = {S: cart_hom(prods[S], G, counter) for S in E.objects}
    restr = {}
    for g in E.arrows:
        T, S = E.ends(g)
        sg = slice_map(E, g)
        src, tgt = prods[T], prods[S]
        w = FibMap(src, tgt, Functor(
            src.total, tgt.total,
            {o: (sg.obj(o[0]), o[1]) for o in src.total.objects},
            {a: (sg.arr(a[0]), a[1]) for a in src.total.arrows},
        ))
        restr[g] = precompose(w, values[S], values[T])
    X = CatPresheaf(E, values, restr)
    return grothendieck(X, name=f"CART({F.name},{G.name})")


def cart_subcat(F):
    """``F^cart``: the same objects with only the cartesian arrows."""
    C = F.total.subcategory(F.total.objects, F.cartesian_arrows, name=f"{F.name}^cart")
    proj = F.proj.restrict(C)
    return FibredCategory(C, F.base, proj, name=C.name, cartesian=lambda a: True)


def is_fibred_in_groupoids(F):
    return F.is_fibred_in_groupoids()


# -- limits and colimits -----------------------------------------------------------


def fib_pullback(u, v, name=None, check=True):
    """Strict pullback of ``u: F -> H`` and ``v: G -> H``; ``u`` must be an isofibration."""
    if check and not is_isofibration(u.functor):
        raise PreconditionViolated("fib_pullback needs u to be an isofibration")
    P, p1, p2 = strict_pullback(u.functor, v.functor, name=name)
    F, G = u.dom, v.dom
    proj = p1.then(F.proj)
    out = FibredCategory(P, F.base, proj, name=name or f"{F.name}x{G.name}")
    return out, FibMap(out, F, p1), FibMap(out, G, p2)


def fib_pushout(u, v, counter=None, name=None):
    """Strict pushout ``G +_F H`` of ``u: F -> G`` (injective on objects) and ``v: F -> H``."""
    from .core.constructions import induced_from_pushout

    P, iG, iH = pushout(u.functor, v.functor, counter, name=name)
    G, H = u.cod, v.cod
    proj = induced_from_pushout(P, iG, iH, G.proj, H.proj)
    out = FibredCategory(P, G.base, proj, name=name or "pushout")
    return out, FibMap(G, out, iG), FibMap(H, out, iH)


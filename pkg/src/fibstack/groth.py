"""Grothendieck construction, sections and localization.

``grothendieck`` (Phi) turns a strict presheaf of categories into a split
fibration, ``sections`` (S) goes back via ``S -> Cart(E_/S, F)``, and
``localize_L`` inverts cartesian arrows by a calculus of right fractions.
"""

from __future__ import annotations

from .core.category import Counter, FinCategory, Functor, NatTrans, okey
from .core.flags import functor_flags
from .errors import FractionsNotSaturating, PreconditionViolated, SizeBudgetExceeded
from .fibred import FibMap, FibredCategory, cart_hom, postcompose, precompose, slice_fib, slice_map
from .presheaf import CatPresheaf, CatPresheafMap


def grothendieck(X, name=None):
    """``Phi X``: objects ``(S, x)``; arrows ``(f, xi, x)`` with ``xi: x' -> X(f)(x)``.

    The cleavage is ``(f, id, x)`` and an arrow is cartesian iff ``xi`` is
    invertible.
    """
    E = X.base
    objs = [(S, x) for S in E.objects for x in X.values[S].objects]
    arrows = {}
    for f in E.arrows:
        T, S = E.ends(f)
        XT = X.values[T]
        om = X.restr[f].obj_map
        for x in X.values[S].objects:
            fx = om[x]
            for xi in XT.in_arrows(fx):
                arrows[f, xi, x] = ((T, XT.src(xi)), (S, x))
    ident = {(S, x): (E.identity(S), X.values[S].identity(x), x) for S, x in objs}

    def rule(a, b):
        g, zeta, _ = a
        f, xi, x = b
        U = E.src(g)
        return (E.then(g, f), X.values[U].then(zeta, X.restr[g].arr_map[xi]), x)

    C = FinCategory(objs, arrows, ident, rule, name=name or f"Phi({X.name or 'X'})")
    proj = Functor(C, E, {o: o[0] for o in objs}, {a: a[0] for a in arrows})

    def cart(a):
        return X.values[E.src(a[0])].is_iso(a[1])

    def cleave(y, f):
        S, x = y
        fx = X.restr[f].obj_map[x]
        return (f, X.values[E.src(f)].identity(fx), x)

    F = FibredCategory(C, E, proj, name=C.name, cartesian=cart, cleavage=cleave)
    F.presheaf = X
    return F


def grothendieck_map(phi, F=None, G=None):
    """``Phi(phi): Phi X -> Phi Y`` for a map of presheaves of categories."""
    F = F or grothendieck(phi.src)
    G = G or grothendieck(phi.tgt)
    E = phi.src.base
    om = {(S, x): (S, phi.comps[S].obj_map[x]) for S, x in F.total.objects}
    am = {}
    for a in F.total.arrows:
        f, xi, x = a
        T, S = E.ends(f)
        am[a] = (f, phi.comps[T].arr_map[xi], phi.comps[S].obj_map[x])
    return FibMap(F, G, Functor(F.total, G.total, om, am), name="Phi")


def sections(F, counter=None):
    """``S F``: ``S -> Cart(E_/S, F)`` with restriction by precomposition."""
    if "sections" in F.cache:
        return F.cache["sections"]
    E = F.base
    counter = counter or Counter("sections")
    values = {S: cart_hom(slice_fib(E, S), F, counter) for S in E.objects}
    restr = {}
    for g in E.arrows:
        T, S = E.ends(g)
        restr[g] = precompose(slice_map(E, g), values[S], values[T])
    X = CatPresheaf(E, values, restr, name=f"S({F.name})")
    F.cache["sections"] = X
    return X


def sections_map(u, counter=None):
    """``S u: S F -> S G`` by postcomposition."""
    X, Y = sections(u.dom, counter), sections(u.cod, counter)
    comps = {S: postcompose(u, X.values[S], Y.values[S]) for S in u.dom.base.objects}
    return CatPresheafMap(X, Y, comps)


def sections_fibred(F, counter=None):
    """``Phi S F`` (cached on ``F``)."""
    if "Phi_sections" not in F.cache:
        F.cache["Phi_sections"] = grothendieck(sections(F, counter), name=f"PhiS({F.name})")
    return F.cache["Phi_sections"]


def counit_v(F, counter=None):
    """Evaluation at identities, ``Phi S F -> F``."""
    E = F.base
    PS = sections_fibred(F, counter)
    om = {}
    for S, x in PS.total.objects:
        om[S, x] = x.obj_map[E.identity(S)]
    am = {}
    C = F.total
    for a in PS.total.arrows:
        f, xi, x = a
        T, S = E.ends(f)
        am[a] = C.then(xi.components[E.identity(T)], x.arr_map[f, E.identity(S)])
    return FibMap(PS, F, Functor(PS.total, F.total, om, am), name="v")


def cleavage_functor(F, x):
    """The cartesian functor ``E_/S -> F`` sending ``f`` to ``f* x``."""
    E = F.base
    S = F.p(x)
    sl = slice_fib(E, S)
    om = {f: F.pullback_obj(x, f) for f in sl.total.objects}
    am = {}
    for a in sl.total.arrows:
        g, f = a
        gf = E.then(g, f)
        am[a] = F.factor_through(F.cleave(x, gf), F.cleave(x, f), g)
    return Functor(sl.total, F.total, om, am)


def counit_section(F, counter=None):
    """A section ``F -> Phi S F`` of the counit built from the cleavage of ``F``."""
    E = F.base
    PS = sections_fibred(F, counter)
    X = PS.presheaf
    cf = {x: cleavage_functor(F, x) for x in F.total.objects}
    om = {x: (F.p(x), cf[x]) for x in F.total.objects}
    am = {}
    for phi in F.total.arrows:
        x, y = F.total.ends(phi)
        f = F.pa(phi)
        S = F.p(x)
        target = X.restr[f].obj_map[cf[y]]
        comps = {}
        for g in slice_fib(E, S).total.objects:
            psi = F.total.then(F.cleave(x, g), phi)
            comps[g] = F.factor_through(psi, F.cleave(y, E.then(g, f)), E.identity(E.src(g)))
        am[phi] = (f, NatTrans(cf[x], target, comps), cf[y])
    return FibMap(F, PS, Functor(F.total, PS.total, om, am), name="s")


def unit_eta(X, counter=None, PX=None):
    """``eta: X -> S Phi X`` sending ``x`` to the split functor ``f -> (T, X(f)x)``."""
    E = X.base
    PX = PX or grothendieck(X)
    SX = sections(PX, counter)
    comps = {}
    for S in E.objects:
        sl = slice_fib(E, S).total
        XS = X.values[S]

        def at(x, S=S, sl=sl):
            om = {f: (E.src(f), X.restr[f].obj_map[x]) for f in sl.objects}
            am = {}
            for a in sl.arrows:
                g, f = a
                U = E.src(g)
                gx = X.restr[E.then(g, f)].obj_map[x]
                am[a] = (g, X.values[U].identity(gx), X.restr[f].obj_map[x])
            return Functor(sl, PX.total, om, am)

        objs = {x: at(x) for x in XS.objects}
        arr = {}
        for xi in XS.arrows:
            s, t = XS.ends(xi)
            cs = {f: (E.identity(E.src(f)), X.restr[f].arr_map[xi], X.restr[f].obj_map[t]) for f in sl.objects}
            arr[xi] = NatTrans(objs[s], objs[t], cs)
        comps[S] = Functor(XS, SX.values[S], objs, arr)
    return CatPresheafMap(X, SX, comps), PX


# -- localization at cartesian arrows ----------------------------------------------


class LocalizedFibre:
    """``LF(S)``: the coslice-pulled-back fibration with cartesian arrows inverted.

    Objects are ``(s, y)`` with ``s: S -> T`` and ``y`` over ``T``.  An arrow
    is a class of roofs ``(z, c, f)`` with ``z`` over ``S``, ``c: z -> y``
    cartesian over ``s`` and ``f: z -> y'`` over ``s'``.
    """

    def __init__(self, F, S, counter):
        E, C = F.base, F.total
        self.F, self.S = F, S
        objs = [(s, y) for s in E.out_arrows(S) for y in F.over[E.tgt(s)]]
        apex = F.over[S]
        roofs = []
        for s, y in objs:
            for z in apex:
                for c in C.hom(z, y):
                    if F.pa(c) != s or c not in F.cartesian_arrows:
                        continue
                    for s2 in E.out_arrows(S):
                        for y2 in F.over[E.tgt(s2)]:
                            for f in C.hom(z, y2):
                                if F.pa(f) == s2:
                                    counter.tick()
                                    roofs.append((z, c, f, (s, y), (s2, y2)))
        parent = {r[:3]: r[:3] for r in roofs}

        def find(r):
            while parent[r] != r:
                parent[r] = parent[parent[r]]
                r = parent[r]
            return r

        ids = E.identity(S)
        # roofs (z, t;c', t;f') ~ (z', c', f') for vertical t: z -> z'
        for z, c2, f2, a, b in roofs:
            for t in C.in_arrows(z):
                if F.pa(t) != ids or C.src(t) not in apex:
                    continue
                counter.tick()
                r = (C.src(t), C.then(t, c2), C.then(t, f2))
                if r in parent:
                    x, y = find(r), find((z, c2, f2))
                    if x != y:
                        if okey(x) < okey(y):
                            parent[y] = x
                        else:
                            parent[x] = y
        arrows = {}
        self.cls = {}
        for z, c, f, a, b in roofs:
            k = find((z, c, f))
            self.cls[z, c, f] = k
            arrows[k] = (a, b)
        ident = {}
        for s, y in objs:
            z = F.pullback_obj(y, s)
            c = F.cleave(y, s)
            ident[s, y] = self.cls[z, c, c]

        def rule(r1, r2):
            z1, c1, f1 = r1
            z2, c2, f2 = r2
            h = F.factor_through(f1, c2, ids)
            return self.cls[z1, c1, C.then(h, f2)]

        self.category = FinCategory(objs, arrows, ident, rule, name=f"LF({S!r})")

    def roof(self, z, c, f):
        return self.cls[z, c, f]


def localize_L(F, counter=None):
    """``LF`` as a strict presheaf of categories; raises FractionsNotSaturating over budget."""
    if "L" in F.cache:
        return F.cache["L"]
    E, C = F.base, F.total
    counter = counter or Counter("fractions")
    try:
        fibres = {S: LocalizedFibre(F, S, counter) for S in E.objects}
    except SizeBudgetExceeded as exc:
        raise FractionsNotSaturating(str(exc)) from None
    values = {S: L.category for S, L in fibres.items()}
    restr = {}
    for g in E.arrows:
        T, S = E.ends(g)
        LS, LT = fibres[S], fibres[T]
        om = {(s, y): (E.then(g, s), y) for s, y in LS.category.objects}
        am = {}
        for k in LS.category.arrows:
            z, c, f = k
            cz = F.cleave(z, g)
            am[k] = LT.roof(C.src(cz), C.then(cz, c), C.then(cz, f))
        restr[g] = Functor(LS.category, LT.category, om, am)
    X = CatPresheaf(E, values, restr, name=f"L({F.name})")
    X.fibres = fibres
    F.cache["L"] = X
    return X


def unit_l(F, counter=None):
    """``l: F -> Phi L F``: ``x`` goes to ``(S, (id_S, x))``."""
    E, C = F.base, F.total
    X = localize_L(F, counter)
    PL = grothendieck(X)
    om = {x: (F.p(x), (E.identity(F.p(x)), x)) for x in C.objects}
    am = {}
    for phi in C.arrows:
        x, y = C.ends(phi)
        f = F.pa(phi)
        S = F.p(x)
        xi = X.fibres[S].roof(x, C.identity(x), phi)
        am[phi] = (f, xi, (E.identity(E.tgt(f)), y))
    return FibMap(F, PL, Functor(C, PL.total, om, am), name="l")


def l_fibre_flags(F, S, counter=None):
    """Flags of ``(lF)_S: F_S -> LF(S)``."""
    u = unit_l(F, counter)
    fib = F.fibre(S)
    L = localize_L(F).values[S]
    fn = Functor(
        fib, L,
        {x: u.obj(x)[1] for x in fib.objects},
        {a: u.arr(a)[1] for a in fib.arrows},
    )
    return functor_flags(fn)


def require_fibration(F):
    w = F.fibration_witness()
    if w is not None:
        raise PreconditionViolated(f"not a fibration: no cartesian lift at {w!r}")

"""Stacks, prestacks, property P, bicovering maps and stack completion."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core.category import Counter, Functor, osorted
from .core.constructions import IsoComma
from .core.flags import functor_flags, full_faithful
from .errors import PreconditionViolated
from .fibred import cart_hom, postcompose, precompose, slice_fib
from .groth import sections_map, counit_section, counit_v, grothendieck, grothendieck_map, sections, sections_fibred, unit_eta
from .presheaf import CatSheafification, PresheafMap, SetPresheaf, is_sheaf_of_categories, sheafify_cat
from .site import induced_topology, locally_injective_witness, locally_surjective_witness, sieve_to_fib


def restriction_functor(F, R, counter=None):
    """``Cart(E_/S, F) -> Cart(R, F)`` by precomposition with the inclusion ``R -> E_/S``."""
    E = F.base
    RF, inc = sieve_to_fib(E, R)
    src = cart_hom(slice_fib(E, R.base_object), F, counter)
    tgt = cart_hom(RF, F, counter)
    return precompose(inc, src, tgt)


@dataclass
class DescentVerdict:
    holds: bool
    witness: object = None

    def __bool__(self):
        return self.holds


def prestack_witness(F, top, counter=None):
    for S in top.base.objects:
        for R in top.refinements(S):
            full, faithful, wit = full_faithful(restriction_functor(F, R, counter))
            if not (full and faithful):
                return (S, R, "full" if not full else "faithful", wit)
    return None


def is_prestack(F, top, counter=None):
    return prestack_witness(F, top, counter) is None


def stack_witness(F, top, counter=None):
    """``(S, R, flags)`` for the first cover whose restriction is not an equivalence."""
    for S in top.base.objects:
        for R in top.refinements(S):
            fl = functor_flags(restriction_functor(F, R, counter))
            if not fl.equivalence:
                return (S, R, fl)
    return None


def is_stack(F, top, counter=None):
    return stack_witness(F, top, counter) is None


# -- property P ------------------------------------------------------------------


def property_P_comparison(u, R, counter=None):
    """The functor ``Cart(E_/S, F) -> Cart(E_/S, G) x^h_{Cart(R, G)} Cart(R, F)``."""
    F, G = u.dom, u.cod
    E = F.base
    S = R.base_object
    sl = slice_fib(E, S)
    RF, inc = sieve_to_fib(E, R)
    cFS, cGS = cart_hom(sl, F, counter), cart_hom(sl, G, counter)
    cFR, cGR = cart_hom(RF, F, counter), cart_hom(RF, G, counter)
    resG = precompose(inc, cGS, cGR)
    resF = precompose(inc, cFS, cFR)
    postR = postcompose(u, cFR, cGR)
    postS = postcompose(u, cFS, cGS)
    ic = IsoComma(resG, postR)
    H = ic.category
    om, am = {}, {}
    for x in cFS.objects:
        a, b = postS.obj_map[x], resF.obj_map[x]
        om[x] = (a, b, cGR.identity(resG.obj_map[a]))
    for t in cFS.arrows:
        s, d = cFS.ends(t)
        al, be = postS.arr_map[t], resF.arr_map[t]
        am[t] = (al, be, om[s][2], om[d][2])
    return Functor(cFS, H, om, am)


def property_P_witness(u, top, counter=None):
    for S in top.base.objects:
        for R in top.refinements(S):
            fl = functor_flags(property_P_comparison(u, R, counter))
            if not fl.equivalence:
                return (S, R, fl)
    return None


def has_property_P(u, top, counter=None):
    return property_P_witness(u, top, counter) is None


# -- bicovering ------------------------------------------------------------------


@dataclass
class BicoveringReport:
    hom_verdicts: dict = field(default_factory=dict)
    surjectivity_sieves: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def bicovering(self):
        return not self.failures

    @property
    def locally_fully_faithful(self):
        return all(self.hom_verdicts.values())

    @property
    def locally_essentially_surjective(self):
        return all(ok for _, ok in self.surjectivity_sieves.values())

    def __bool__(self):
        return self.bicovering

    def witness(self):
        return self.failures[0] if self.failures else None


def hom_presheaf(F, S, x, x2):
    """``Hom_S(x, x')`` on ``E_/S``: at ``f: T -> S`` the arrows ``f*x -> x'`` over ``f``."""
    E, C = F.base, F.total
    sl = slice_fib(E, S).total
    values = {}
    for f in sl.objects:
        fx = F.pullback_obj(x, f)
        values[f] = [p for p in C.hom(fx, x2) if F.pa(p) == f]
    restr = {}
    for a in sl.arrows:
        g, f = a
        gf = E.then(g, f)
        kappa = F.factor_through(F.cleave(x, gf), F.cleave(x, f), g)
        restr[a] = {p: C.then(kappa, p) for p in values[f]}
    return SetPresheaf(sl, values, restr, name="Hom")


def bicovering_report(u, top, stop_early=False):
    F, G = u.dom, u.cod
    E = F.base
    rep = BicoveringReport()
    for S in E.objects:
        ind = induced_topology(top, S)
        xs = F.over[S]
        for x in xs:
            ux = u.obj(x)
            for x2 in xs:
                P = hom_presheaf(F, S, x, x2)
                Q = hom_presheaf(G, S, ux, u.obj(x2))
                comps = {}
                for f in P.values:
                    iota = G.factor_through(G.cleave(ux, f), u.arr(F.cleave(x, f)), G.base.identity(E.src(f)))
                    comps[f] = {p: G.total.then(iota, u.arr(p)) for p in P.values[f]}
                phi = PresheafMap(P, Q, comps)
                wi = locally_injective_witness(phi, ind)
                ws = locally_surjective_witness(phi, ind)
                ok = wi is None and ws is None
                rep.hom_verdicts[S, x, x2] = ok
                if not ok:
                    rep.failures.append(("hom", S, x, x2, wi or ws))
                    if stop_early:
                        return rep
        for y in G.over[S]:
            sieve = []
            for f in E.in_arrows(S):
                T = E.src(f)
                fy = G.pullback_obj(y, f)
                cls = G.fibre(T).iso_classes()
                if any(cls.get(u.obj(x2)) == cls[fy] for x2 in F.over[T]):
                    sieve.append(f)
            ok = top.is_cover(S, sieve)
            rep.surjectivity_sieves[S, y] = (frozenset(sieve), ok)
            if not ok:
                rep.failures.append(("objects", S, y, osorted(sieve)))
                if stop_early:
                    return rep
    return rep


def is_bicovering(u, top):
    return bicovering_report(u, top, stop_early=True).bicovering


# -- stack completion ----------------------------------------------------------------


class Leg:
    """One map of a zigzag, pointing ``forward`` (towards the stack) or backward."""

    def __init__(self, fmap, forward, kind):
        self.map = fmap
        self.forward = forward
        self.kind = kind

    def __repr__(self):
        arrow = "->" if self.forward else "<-"
        return f"<Leg {self.kind} {arrow}>"


class Stackification:
    """Two rounds of sections, sheafification and Grothendieck construction.

    ``legs`` is the zigzag ``F <- Phi S F -> Phi a S F <- Phi S Phi a S F -> A F``;
    ``chain`` holds genuine composable maps from ``Phi S F`` to ``A F``.
    """

    def __init__(self, F, top, counter=None):
        counter = counter or Counter("stackify")
        self.source = F
        self.top = top
        X1 = sections(F, counter)
        F1 = sections_fibred(F, counter)
        self.s1 = CatSheafification(X1, top, counter)
        aX1, k1 = self.s1.sheaf, self.s1.unit
        M1 = grothendieck(aX1, name="Phi a S F")
        X2 = sections(M1, counter)
        F2 = sections_fibred(M1, counter)
        self.s2 = CatSheafification(X2, top, counter)
        aX2, k2 = self.s2.sheaf, self.s2.unit
        self.stack = grothendieck(aX2, name="A F")
        v1 = counit_v(F, counter)
        Pk1 = grothendieck_map(k1, F1, M1)
        v2 = counit_v(M1, counter)
        Pk2 = grothendieck_map(k2, F2, self.stack)
        self.legs = [
            Leg(v1, False, "counit"),
            Leg(Pk1, True, "sheafify"),
            Leg(v2, False, "counit"),
            Leg(Pk2, True, "sheafify"),
        ]
        eta, _ = unit_eta(aX1, counter, PX=M1)
        Peta = grothendieck_map(eta, M1, F2)
        self.chain = [Pk1, Peta, Pk2]
        self.to_stack = Pk1.then(Peta).then(Pk2)
        self.section = counit_section(F, counter)
        self.middle = M1
        self.first = F1
        self.second = F2

    def apply(self, u, other, counter=None):
        """``A(u): AF -> AG`` for ``u: F -> G`` with ``other`` the stackification of ``G``."""
        a1 = self.s1.map_to(sections_map(u, counter), other.s1)
        m1 = grothendieck_map(a1, self.middle, other.middle)
        a2 = self.s2.map_to(sections_map(m1, counter), other.s2)
        return grothendieck_map(a2, self.stack, other.stack)


def stackify(F, top, counter=None):
    """Return ``(AF, witness)``; the witness carries the zigzag and genuine chain."""
    w = Stackification(F, top, counter)
    return w.stack, w


def certify_stackification(w):
    """Flags for every leg of a stackification witness."""
    from .model import classify

    out = []
    for leg in w.legs:
        c = classify(leg.map, w.top)
        out.append({
            "kind": leg.kind,
            "forward": leg.forward,
            "trivial_fibration": c.trivial_fibration,
            "bicovering": c.bicovering if leg.forward else None,
            "E_equivalence": c.E_equivalence,
        })
    return out


def fibrant_replacement_sheafcat(X, top, counter=None):
    """``X -> S Phi X -> a S Phi X``; returns ``(aSPhiX, map)`` where ``map`` is a presheaf map."""
    if not is_sheaf_of_categories(X, top):
        raise PreconditionViolated("input is not a sheaf of categories")
    eta, PX = unit_eta(X, counter)
    SPX = eta.tgt
    aX, k = sheafify_cat(SPX, top, counter)
    return aX, eta.then(k)

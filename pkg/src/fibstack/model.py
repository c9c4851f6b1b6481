"""Factorizations, path objects and homotopy pullbacks in Fib(E), and the axiom suite.

Two structures are modelled.  The natural one has E-equivalences as weak
equivalences, maps injective on objects as cofibrations and isofibrations
as fibrations.  The localized one keeps the cofibrations and uses
bicovering maps as weak equivalences; its fibrations are certified by
lifting against refinement inclusions (and their pushout-products with the
generating cofibrations of CAT).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .core.category import Counter, Functor, NatTrans, identity_functor, iso_groupoid, okey
from .core.constructions import IsoComma, strict_pullback
from .core.factorize import COF_TRIVFIB, Square, find_lift, glued_middle, mapping_path as cat_mapping_path
from .core.factorize import system_name
from .core.flags import functor_flags
from .errors import PreconditionViolated, SizeBudgetExceeded
from .fibred import (
    FibMap,
    FibredCategory,
    base_as_fibred,
    cart_hom,
    cartesian_functor_witness,
    cotensor,
    fib_product,
    fib_pullback,
    fib_pushout,
    iter_cartesian_functors,
    precompose,
    slice_fib,
)
from .groth import counit_section, counit_v, grothendieck_map, sections_fibred, sections_map
from .site import sieve_to_fib
from .stacks import Stackification, bicovering_report, property_P_witness, is_stack


class ClassifiedMap:
    """A map of Fib(E) with lazily decided class flags.

    ``top`` is needed only for the localized flags (property P, bicovering).
    """

    def __init__(self, fmap, top=None):
        self.map = fmap
        self.top = top

    @cached_property
    def functor_flags(self):
        return functor_flags(self.map.functor)

    @cached_property
    def cartesian(self):
        return cartesian_functor_witness(self.map) is None

    @property
    def E_equivalence(self):
        return self.cartesian and self.functor_flags.equivalence

    @property
    def isofibration(self):
        return self.functor_flags.isofibration

    @property
    def cofibration(self):
        return self.functor_flags.injective_on_objects

    @property
    def trivial_fibration(self):
        return self.E_equivalence and self.isofibration

    @property
    def trivial_cofibration(self):
        return self.E_equivalence and self.cofibration

    @cached_property
    def property_P(self):
        return property_P_witness(self.map, self._top()) is None

    @property
    def c_local_fibration(self):
        return self.isofibration and self.property_P

    @cached_property
    def bicovering_report(self):
        return bicovering_report(self.map, self._top())

    @property
    def bicovering(self):
        return self.bicovering_report.bicovering

    def _top(self):
        if self.top is None:
            raise PreconditionViolated("a topology is needed for localized flags")
        return self.top

    def flags(self, localized=None):
        out = {
            "cartesian": self.cartesian,
            "E_equivalence": self.E_equivalence,
            "isofibration": self.isofibration,
            "cofibration": self.cofibration,
            "trivial_fibration": self.trivial_fibration,
        }
        if localized if localized is not None else self.top is not None:
            out["property_P"] = self.property_P
            out["c_local_fibration"] = self.c_local_fibration
            out["bicovering"] = self.bicovering
        return out

    def witnesses(self):
        w = dict(self.functor_flags.witnesses)
        cw = cartesian_functor_witness(self.map)
        if cw is not None:
            w["cartesian"] = cw
        if self.top is not None:
            pw = property_P_witness(self.map, self.top)
            if pw is not None:
                w["property_P"] = pw[:2]
            bw = self.bicovering_report.witness()
            if bw is not None:
                w["bicovering"] = bw
        return w


def classify(fmap, top=None):
    return ClassifiedMap(fmap, top)


@dataclass
class FactorizationResult:
    left: ClassifiedMap
    right: ClassifiedMap
    middle: FibredCategory
    system: str
    certificate: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.certificate.values())


def _fibred_middle(M, right, G, name):
    proj = right.then(G.proj)
    return FibredCategory(M, G.base, proj, name=name)


def nat_factorize(u, system, top=None):
    """Factor ``u`` in the natural structure; ``system`` is cof/trivfib or trivcof/fib."""
    system = system_name(system)
    F, G = u.dom, u.cod
    if system == COF_TRIVFIB:
        M, l, r = glued_middle(u.functor)
    else:
        M, l, r = cat_mapping_path(u.functor)
    mid = _fibred_middle(M, r, G, name=f"mid({system})")
    left = classify(FibMap(F, mid, l), top)
    right = classify(FibMap(mid, G, r), top)
    cert = {
        "composite": l.then(r).key == u.functor.key,
        "middle_fibration": mid.is_fibration(),
        "left_cartesian": left.cartesian,
        "right_cartesian": right.cartesian,
    }
    if system == COF_TRIVFIB:
        cert["left_cofibration"] = left.cofibration
        cert["right_trivial_fibration"] = right.trivial_fibration
    else:
        cert["left_trivial_cofibration"] = left.trivial_cofibration
        cert["right_isofibration"] = right.isofibration
    return FactorizationResult(left, right, mid, system, cert)


def path_object(F, counter=None):
    """``F -> F^(J) -> F x F``: an E-equivalence followed by an isofibration."""
    J = iso_groupoid()
    PJ = cotensor(F, J, counter)
    C = F.total
    consts = {}
    om = {}
    for x in C.objects:
        k = Functor(J, C, {0: x, 1: x}, {a: C.identity(x) for a in J.arrows})
        consts[x] = k
        om[x] = (F.p(x), k)
    am = {}
    for phi in C.arrows:
        x, y = C.ends(phi)
        am[phi] = (F.pa(phi), NatTrans(om[x][1], om[y][1], {0: phi, 1: phi}))
    c = FibMap(F, PJ, Functor(C, PJ.total, om, am), name="const")
    FF, _, _ = fib_product(F, F)
    om2 = {o: (o[1].obj_map[0], o[1].obj_map[1]) for o in PJ.total.objects}
    am2 = {a: (a[1].components[0], a[1].components[1]) for a in PJ.total.arrows}
    ev = FibMap(PJ, FF, Functor(PJ.total, FF.total, om2, am2), name="ends")
    return PJ, c, ev


def _vertical(G):
    E = G.base
    return lambda th: E.is_identity(G.pa(th))


def mapping_path(u):
    """``u = q o j`` through triples ``(x, y, theta: u(x) -> y)`` with ``theta`` a vertical iso."""
    F, G = u.dom, u.cod
    ic = IsoComma(u.functor, identity_functor(G.total), vertical=_vertical(G), name="P(u)")
    M = ic.category
    P = FibredCategory(M, F.base, ic.proj1.then(F.proj), name="P(u)")
    C = G.total
    j = Functor(
        F.total, M,
        {x: (x, u.obj(x), C.identity(u.obj(x))) for x in F.total.objects},
        {a: (a, u.arr(a), C.identity(u.obj(F.total.src(a))), C.identity(u.obj(F.total.tgt(a))))
         for a in F.total.arrows},
    )
    return P, FibMap(F, P, j, name="j"), FibMap(P, G, ic.proj2, name="q")


def homotopy_pullback_2(u, v):
    """Triples ``(x, y, theta: u(x) -> v(y))`` with ``theta`` a vertical iso, and projections."""
    F, G, H = u.dom, v.dom, u.cod
    ic = IsoComma(u.functor, v.functor, vertical=_vertical(H), name="hopullback")
    M = ic.category
    P = FibredCategory(M, F.base, ic.proj1.then(F.proj), name="hopullback")
    return P, FibMap(P, F, ic.proj1), FibMap(P, G, ic.proj2)


# -- lifting against refinements -------------------------------------------------------


def refinement_lifting_witness(p, top, counter=None):
    """Check that ``p: K -> G`` lifts against every refinement inclusion ``R -> E_/S``.

    Lifting against ``R -> E_/S`` and its pushout-products with the point,
    the boundary of the arrow and the parallel pair amounts to the functor
    ``Cart(E_/S, K) -> Cart(R, K) x_{Cart(R, G)} Cart(E_/S, G)`` being
    surjective on objects, full and faithful.  Returns the first failure.
    """
    K, G = p.dom, p.cod
    E = K.base
    for S in E.objects:
        sl = slice_fib(E, S)
        cKS, cGS = cart_hom(sl, K, counter), cart_hom(sl, G, counter)
        for R in top.refinements(S):
            RF, inc = sieve_to_fib(E, R)
            cKR, cGR = cart_hom(RF, K, counter), cart_hom(RF, G, counter)
            resK = precompose(inc, cKS, cKR)
            resG = precompose(inc, cGS, cGR)
            post = _post(p, cKR, cGR)
            postS = _post(p, cKS, cGS)
            Pb, _, _ = strict_pullback(post, resG)
            comp = Functor(
                cKS, Pb,
                {x: (resK.obj_map[x], postS.obj_map[x]) for x in cKS.objects},
                {t: (resK.arr_map[t], postS.arr_map[t]) for t in cKS.arrows},
            )
            fl = functor_flags(comp)
            if not (fl.full and fl.faithful and fl.surjective_on_objects):
                return (S, R, {k: getattr(fl, k) for k in ("full", "faithful", "surjective_on_objects")})
    return None


def _post(p, C_src, C_tgt):
    from .fibred import postcompose

    return postcompose(p, C_src, C_tgt)


def lifts_in_fib(i, p, top_f, bottom_f, counter=None):
    """Diagonal for a square of cartesian functors, preserving cartesian arrows; or None."""
    B, K = i.cod, p.dom
    cart_B, cart_K = B.cartesian_arrows, K.cartesian_arrows
    sq = Square(top_f, i.functor, p.functor, bottom_f)
    return find_lift(sq, lambda b, h: b not in cart_B or h in cart_K, counter)


def squares(i, p, limit=None, counter=None):
    """Commuting squares from ``i: A -> B`` to ``p: K -> G`` (cartesian top and bottom)."""
    A, B = i.dom, i.cod
    K, G = p.dom, p.cod
    tops = list(iter_cartesian_functors(A, K, counter))
    n = 0
    for bottom in iter_cartesian_functors(B, G, counter):
        ib = i.functor.then(bottom).key
        for top in tops:
            if top.then(p.functor).key == ib:
                yield top, bottom
                n += 1
                if limit is not None and n >= limit:
                    return


def lifting_holds(i, p, limit=None, counter=None):
    """``(ok, squares tried, first failing square)``."""
    tried = 0
    for top, bottom in squares(i, p, limit, counter):
        tried += 1
        if lifts_in_fib(i, p, top, bottom, counter) is None:
            return False, tried, (top, bottom)
    return True, tried, None


# -- the localized factorization ----------------------------------------------------------


class ChampFactorization:
    """Factor ``u: F -> G`` as a bicovering cofibration followed by a local fibration.

    Both ends are stackified; ``A(u)`` is factored through its mapping path,
    which is pulled back to ``Phi S G``; the comparison map out of ``Phi S F``
    is then factored as a cofibration followed by a surjective equivalence.
    """

    def __init__(self, u, top, counter=None, wF=None, wG=None):
        counter = counter or Counter("champ factorization")
        F, G = u.dom, u.cod
        self.top = top
        wF = wF or Stackification(F, top, counter)
        wG = wG or Stackification(G, top, counter)
        F1, G1 = sections_fibred(F, counter), sections_fibred(G, counter)
        u1 = grothendieck_map(sections_map(u, counter), F1, G1)
        Au = wF.apply(u, wG, counter)
        aF, aG = wF.to_stack, wG.to_stack
        H, j, q = mapping_path(Au)
        Pb, pG, pH = fib_pullback(q, aG, name="pullback")
        # Pb has objects (h, g') with q(h) = aG(g'); rewrite as a map out of F1
        C = F1.total
        om = {x: (j.obj(aF.obj(x)), u1.obj(x)) for x in C.objects}
        am = {a: (j.arr(aF.arr(a)), u1.arr(a)) for a in C.arrows}
        to_pb = FibMap(F1, Pb, Functor(C, Pb.total, om, am), name="comparison")
        M, l, r = glued_middle(to_pb.functor)
        K = _fibred_middle(M, r, Pb, name="K")
        sF = counit_section(F, counter)
        vG = counit_v(G, counter)
        l_map = sF.then(FibMap(F1, K, l))
        r_map = FibMap(K, Pb, r).then(pH).then(vG)
        self.stackifications = (wF, wG)
        self.middle = K
        self.left = classify(FibMap(F, K, l_map.functor, name="left"), top)
        self.right = classify(FibMap(K, G, r_map.functor, name="right"), top)
        self.composite_ok = l_map.functor.then(r_map.functor).key == u.functor.key

    def certify(self, test_maps=(), counter=None):
        cert = {
            "composite": self.composite_ok,
            "middle_fibration": self.middle.is_fibration(),
            "left_cartesian": self.left.cartesian,
            "right_cartesian": self.right.cartesian,
            "left_cofibration": self.left.cofibration,
            "left_bicovering": self.left.bicovering,
            "right_c_local_fibration": self.right.c_local_fibration,
            "right_lifts_refinements": refinement_lifting_witness(self.right.map, self.top, counter) is None,
        }
        for k, i in enumerate(test_maps):
            ok, _, _ = lifting_holds(i, self.right.map, counter=counter)
            cert[f"right_lifts_test_{k}"] = ok
        return cert


def champ_factorize(u, top, test_maps=(), counter=None):
    cf = ChampFactorization(u, top, counter)
    cert = cf.certify(test_maps, counter)
    return FactorizationResult(cf.left, cf.right, cf.middle, "champ", cert)


def is_champ_fibrant(F, top, counter=None):
    """``F -> E`` is an isofibration with property P and lifts against refinements."""
    E = F.base
    terminal = base_as_fibred(E)
    to_E = FibMap(F, terminal, F.proj)
    c = classify(to_E, top)
    return c.c_local_fibration and refinement_lifting_witness(to_E, top, counter) is None


# -- the axiom suite -------------------------------------------------------------------------


@dataclass
class AxiomReport:
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def record(self, axiom, ok, witness=None):
        c = self.checks.setdefault(axiom, [0, 0])
        c[0] += 1
        if not ok:
            c[1] += 1
            self.violations.append({"axiom": axiom, "witness": witness})

    @property
    def ok(self):
        return not self.violations

    def as_dict(self):
        return {
            "checks": {k: {"instances": v[0], "violations": v[1]} for k, v in sorted(self.checks.items())},
            "violations": self.violations,
            "certification": "corpus-relative for localized fibrations",
        }


def verify_generalized_model_axioms(corpus, localized=True, square_limit=8, counter=None):
    """Check factorizations, lifting, two-out-of-three, limits and declared flags over a corpus."""
    rep = AxiomReport()
    for site_name, entry in corpus.items():
        top = entry.site
        maps = entry.maps
        for name, m in maps.items():
            c = classify(m.map, top)
            for flag, declared in m.declared.items():
                actual = c.flags(localized=True).get(flag) if flag in ("property_P", "bicovering", "c_local_fibration") \
                    else c.flags(localized=False).get(flag)
                rep.record("declared_flags", actual == declared, (site_name, name, flag))
            for system in ("cof_trivfib", "trivcof_fib"):
                r = nat_factorize(m.map, system)
                rep.record("natural_factorization", r.ok, (site_name, name, system,
                           [k for k, v in r.certificate.items() if not v]))
        tests = entry.test_maps()
        for name, m in maps.items():
            c = classify(m.map, top)
            for tname, i in tests:
                ci = classify(i, top)
                if ci.cofibration and c.trivial_fibration or ci.trivial_cofibration and c.isofibration:
                    ok, n, wit = lifting_holds(i, m.map, square_limit, counter)
                    rep.record("natural_lifting", ok, (site_name, tname, name))
        names = sorted(maps, key=okey)
        for a in names:
            for b in names:
                f, g = maps[a].map, maps[b].map
                if f.cod is not g.dom:
                    continue
                gf = f.then(g)
                w = [classify(x, top).E_equivalence for x in (f, g, gf)]
                rep.record("two_out_of_three", sum(w) != 2, (site_name, a, b, w))
                if localized:
                    wl = [classify(x, top).bicovering for x in (f, g, gf)]
                    rep.record("two_out_of_three_localized", sum(wl) != 2, (site_name, a, b, wl))
        for a in names:
            for b in names:
                u, v = maps[a].map, maps[b].map
                if u.cod is not v.cod or not classify(u, top).isofibration:
                    continue
                P, _, _ = fib_pullback(u, v)
                rep.record("pullback_fibration", P.is_fibration(), (site_name, a, b))
            for b in names:
                u, v = maps[a].map, maps[b].map
                if u.dom is not v.dom or not classify(u, top).cofibration:
                    continue
                try:
                    P, _, _ = fib_pushout(u, v)
                except SizeBudgetExceeded:
                    rep.record("pushout_exists", False, (site_name, a, b))
                    continue
                rep.record("pushout_fibration", P.is_fibration(), (site_name, a, b))
        if localized:
            for name, F in entry.fibred.items():
                st = is_stack(F, top)
                fib = is_champ_fibrant(F, top, counter)
                rep.record("fibrant_iff_stack", st == fib, (site_name, name, st, fib))
            for name in entry.champ_maps:
                r = champ_factorize(maps[name].map, top, [i for _, i in tests], counter)
                rep.record("champ_factorization", r.ok, (site_name, name,
                           [k for k, v in r.certificate.items() if not v]))
    return rep

import pytest

from fibstack.core import (
    arrow_category,
    discrete,
    functor_category,
    functor_flags,
    identity_functor,
    iso_groupoid,
    maximal_groupoid,
    poset_category,
    terminal,
)
from fibstack.core.category import Functor
from fibstack.errors import NotOverBase, PreconditionViolated, UnknownObject
from fibstack.fibred import (
    FibMap,
    FibredCategory,
    base_as_fibred,
    cart_hom,
    cart_subcat,
    cotensor,
    empty_fibred,
    fib_product,
    fib_pullback,
    fib_pushout,
    identity_map,
    internal_hom,
    is_cartesian_functor,
    is_fibred_in_groupoids,
    slice_fib,
    tensor,
)
from fibstack.groth import counit_v, grothendieck, sections
from fibstack.presheaf import discrete_presheaf

from .conftest import doubled_top, push_category

E = push_category()
J = iso_groupoid()


def same_shape(A, B):
    return (len(A.objects), len(A.arrows)) == (len(B.objects), len(B.arrows))


def two_over_poset():
    """``D2`` with both objects over ``S`` in the poset ``U <= S``: no lift of ``U -> S``."""
    B = poset_category(["U", "S"], {("U", "S")})
    D = discrete(["x", "y"])
    p = Functor(D, B, {"x": "S", "y": "S"}, {("id", "x"): ("S", "S"), ("id", "y"): ("S", "S")})
    return FibredCategory(D, B, p)


def arrow_over_point():
    """The walking arrow over the point: its nonidentity arrow is vertical but not invertible."""
    A = arrow_category()
    P = terminal()
    return FibredCategory(A, P, Functor(A, P, {0: "*", 1: "*"}, {a: "1" for a in A.arrows}))


class TestFibre:
    def test_base_over_itself(self):
        F = base_as_fibred(E)
        for S in E.objects:
            fib = F.fibre(S)
            assert len(fib.objects) == 1 and len(fib.arrows) == 1

    @pytest.mark.parametrize("T", ["W", "U", "V", "S"])
    def test_slice_fibre_is_discrete_hom(self, T):
        fib = slice_fib(E, "S").fibre(T)
        assert len(fib.objects) == len(E.hom(T, "S")) and len(fib.arrows) == len(fib.objects)

    def test_grothendieck_fibre(self, corpus):
        for X in corpus["push"].catpresheaves.values():
            F = grothendieck(X)
            for S in E.objects:
                assert same_shape(F.fibre(S), X.values[S])

    def test_unknown_object(self):
        with pytest.raises(UnknownObject):
            slice_fib(E, "S").fibre("Q")


class TestCartesian:
    def test_identities(self, corpus):
        for F in corpus["push"].fibred.values():
            assert all(F.is_cartesian(F.total.identity(x)) for x in F.total.objects)

    def test_vertical_non_iso(self):
        F = arrow_over_point()
        assert F.is_fibration()
        assert not F.compute_cartesian((0, 1))

    def test_slice_arrows(self):
        F = slice_fib(E, "S")
        assert all(F.compute_cartesian(a) for a in F.total.arrows)
        F.certify()


class TestFibration:
    def test_identity(self):
        assert base_as_fibred(E).is_fibration()

    @pytest.mark.parametrize("S", ["W", "U", "V", "S"])
    def test_slices(self, S):
        assert slice_fib(E, S).is_fibration()

    def test_two_over_poset(self):
        F = two_over_poset()
        assert not F.is_fibration()
        assert F.fibration_witness()[1] == ("U", "S")

    def test_corpus_fibred_categories(self, corpus):
        for entry in corpus.values():
            for F in entry.fibred.values():
                assert F.is_fibration(), F.name

    def test_trusted_hints_agree(self, corpus):
        for F in corpus["push"].fibred.values():
            if len(F.total.arrows) <= 20:
                F.certify()


class TestCartesianFunctor:
    def test_identity(self):
        assert is_cartesian_functor(identity_map(slice_fib(E, "S")))

    def test_counit(self, corpus):
        for F in list(corpus["push"].fibred.values())[:12]:
            assert is_cartesian_functor(counit_v(F))

    def test_cartesian_arrow_sent_to_a_non_cartesian_one(self):
        # 0 < 1 < 2 over 0 < 1 with 0, 1 in the lower fibre; 0 -> 2 is not cartesian
        B = arrow_category()
        F = FibredCategory(B, B, identity_functor(B))
        C = poset_category([0, 1, 2], {(0, 1), (1, 2), (0, 2)})
        G = FibredCategory(C, B, Functor(C, B, {0: 0, 1: 0, 2: 1},
                                          {(0, 0): (0, 0), (1, 1): (0, 0), (2, 2): (1, 1), (0, 1): (0, 0),
                                           (0, 2): (0, 1), (1, 2): (0, 1)}))
        u = FibMap(F, G, Functor(B, C, {0: 0, 1: 2}, {(0, 0): (0, 0), (1, 1): (2, 2), (0, 1): (0, 2)}))
        assert G.is_fibration()
        assert G.is_cartesian((1, 2)) and not G.is_cartesian((0, 2))
        assert not is_cartesian_functor(u)

    def test_not_over_base(self):
        F = slice_fib(E, "U")
        G = slice_fib(E, "S")
        u = FibMap(F, G, Functor(F.total, G.total, {f: ("S", "S") for f in F.total.objects},
                                 {a: (("S", "S"), ("S", "S")) for a in F.total.arrows}))
        with pytest.raises(NotOverBase):
            is_cartesian_functor(u)


class TestCartHom:
    def test_slice_contains_identity(self):
        sl = slice_fib(E, "S")
        C = cart_hom(sl, sl)
        assert identity_functor(sl.total) in C.objects

    def test_sections_agree(self, corpus):
        F = corpus["push"].fibred["D-P0"]
        X = sections(F)
        for S in E.objects:
            assert X.values[S].signature == cart_hom(slice_fib(E, S), F).signature

    def test_empty_source(self):
        C = cart_hom(empty_fibred(E), slice_fib(E, "S"))
        assert len(C.objects) == 1 and len(C.arrows) == 1


class TestTensorCotensor:
    def test_point(self):
        F = grothendieck(discrete_presheaf(doubled_top(E)))
        assert same_shape(tensor(terminal(), F).total, F.total)
        assert same_shape(cotensor(F, terminal()).total, F.total)

    def test_cotensor_fibre(self, corpus):
        F = corpus["push"].fibred["G-X0"]
        C = cotensor(F, J)
        for S in E.objects:
            assert same_shape(C.fibre(S), functor_category(J, F.fibre(S)))

    def test_adjunction_counts(self):
        F = slice_fib(E, "U")
        G = grothendieck(discrete_presheaf(doubled_top(E)))
        A = arrow_category()
        left = cart_hom(tensor(A, F), G)
        right = cart_hom(F, cotensor(G, A))
        assert len(left.objects) == len(right.objects)


class TestInternalHom:
    def test_from_terminal(self, corpus):
        G = corpus["push"].fibred["G-X1"]
        H = internal_hom(base_as_fibred(E), G)
        for S in E.objects:
            assert functor_flags(counit_v(G).fibre_functor(S)).equivalence
            assert len(set(H.fibre(S).iso_classes().values())) == len(set(G.fibre(S).iso_classes().values()))

    def test_fibre_formula(self):
        F = slice_fib(E, "U")
        G = grothendieck(discrete_presheaf(doubled_top(E)))
        H = internal_hom(F, G)
        for S in E.objects:
            prod, _, _ = fib_product(slice_fib(E, S), F)
            assert same_shape(H.fibre(S), cart_hom(prod, G))


class TestCartSubcat:
    def test_slice(self):
        F = slice_fib(E, "S")
        assert same_shape(cart_subcat(F).total, F.total)

    def test_fibre_is_maximal_groupoid(self, corpus):
        for name in ("G-X0", "G-X1", "G-X2", "thin-W"):
            F = corpus["push"].fibred[name]
            Fc = cart_subcat(F)
            for S in E.objects:
                assert Fc.fibre(S).signature == maximal_groupoid(F.fibre(S)).signature

    def test_discrete_is_groupoid_fibred(self, corpus):
        for P in corpus["push"].presheaves.values():
            assert is_fibred_in_groupoids(grothendieck(discrete_presheaf(P)))


class TestPullbackPushout:
    def test_pullback_along_identity(self):
        F = grothendieck(discrete_presheaf(doubled_top(E)))
        P, p1, p2 = fib_pullback(identity_map(F), identity_map(F))
        assert same_shape(P.total, F.total) and functor_flags(p1.functor).equivalence

    def test_pullback_needs_isofibration(self):
        F = base_as_fibred(E)
        G = tensor(J, F)
        u = FibMap(F, G, Functor(E, G.total, {x: (0, x) for x in E.objects},
                                 {a: ("1_0", a) for a in E.arrows}))
        with pytest.raises(PreconditionViolated):
            fib_pullback(u, u)

    def test_tensor_as_pullback(self):
        A = arrow_category()
        F = slice_fib(E, "S")
        T = tensor(A, F)
        tA = tensor(A, base_as_fibred(E))
        proj = FibMap(tA, base_as_fibred(E), Functor(tA.total, E, {o: o[1] for o in tA.total.objects},
                                                    {a: a[1] for a in tA.total.arrows}))
        to_E = FibMap(F, base_as_fibred(E), F.proj)
        P, _, _ = fib_pullback(proj, to_E)
        assert same_shape(P.total, T.total)

    def test_pushout_along_identity(self):
        H = grothendieck(discrete_presheaf(doubled_top(E)))
        F = slice_fib(E, "S")
        v = FibMap(F, H, Functor(F.total, H.total, {f: (E.src(f), "*" if E.src(f) != "S" else "a")
                                                      for f in F.total.objects},
                                  {a: (a[0], ("id", "*" if E.src(a[0]) != "S" else "a"),
                                       "*" if E.tgt(a[0]) != "S" else "a") for a in F.total.arrows}))
        v.functor.check()
        P, iG, iH = fib_pushout(identity_map(F), v)
        assert same_shape(P.total, H.total)

    def test_pushout_object_formula(self, corpus):
        n = 0
        for entry, m in ((e, m) for e in corpus.values() for m in e.maps.values()):
            u = m.map
            if not functor_flags(u.functor).injective_on_objects or len(u.cod.total.arrows) > 20:
                continue
            for w in entry.maps.values():
                v = w.map
                if v.dom is not u.dom or len(v.cod.total.arrows) > 20:
                    continue
                P, iG, iH = fib_pushout(u, v)
                G, H, F = u.cod, v.cod, u.dom
                assert len(P.total.objects) == len(H.total.objects) + len(G.total.objects) - len(F.total.objects)
                assert P.is_fibration()
                n += 1
        assert n >= 20

import pytest

from fibstack.core import (
    Square,
    arrow_category,
    budget_limit,
    cat_factorize,
    discrete,
    find_lift,
    functor_category,
    functor_flags,
    identity_functor,
    iso_comma,
    iso_groupoid,
    maximal_groupoid,
    poset_category,
    product,
    pushout,
    terminal,
    to_terminal,
    validate_category,
)
from fibstack.core.category import Functor, constant_functor
from fibstack.errors import AssociativityViolation, IdentityViolation, MissingComposite, SizeBudgetExceeded

from . import oracles

J = iso_groupoid()
POINT = terminal()


def point_to_J(end=0):
    return constant_functor(POINT, J, end)


def raw(objects, arrows, identities, compose):
    return {
        "objects": objects,
        "arrows": [{"id": a, "src": s, "tgt": t} for a, (s, t) in arrows.items()],
        "identities": identities,
        "compose": [{"first": f, "second": g, "result": r} for (f, g), r in compose.items()],
    }


class TestValidateCategory:
    def test_one_arrow_description_is_the_point(self):
        C = validate_category(raw(["x"], {"i": ("x", "x")}, {"x": "i"}, {}))
        assert len(C.objects) == 1 and C.arrows == ("i",)

    def test_poset_two(self):
        C = poset_category(["U", "S"], {("U", "S")})
        assert len(C.objects) == 2 and len(C.arrows) == 3

    def test_broken_associativity_is_named(self):
        # a monoid {1, e} with e;e = 1 except that one bracketing disagrees
        arrows = {"1": ("x", "x"), "e": ("x", "x"), "z": ("x", "x")}
        comp = {("e", "e"): "z", ("e", "z"): "e", ("z", "e"): "z", ("z", "z"): "z"}
        with pytest.raises(AssociativityViolation) as exc:
            validate_category(raw(["x"], arrows, {"x": "1"}, comp))
        assert len(exc.value.witness) == 3

    def test_missing_composite(self):
        arrows = {"1a": ("a", "a"), "1b": ("b", "b"), "1c": ("c", "c"), "f": ("a", "b"), "g": ("b", "c")}
        with pytest.raises(MissingComposite):
            validate_category(raw(["a", "b", "c"], arrows, {"a": "1a", "b": "1b", "c": "1c"}, {}))

    def test_bad_identity(self):
        with pytest.raises(IdentityViolation):
            validate_category(raw(["x", "y"], {"i": ("x", "x"), "f": ("x", "y")}, {"x": "i", "y": "f"}, {}))


class TestFlags:
    @pytest.mark.parametrize("A", [J, POINT, arrow_category(), discrete([1, 2])])
    def test_identity_has_every_flag(self, A):
        assert all(functor_flags(identity_functor(A)).as_dict().values())

    def test_J_to_point(self):
        fl = functor_flags(to_terminal(J))
        assert fl.surjective_equivalence and not fl.injective_on_objects

    def test_point_into_J(self):
        fl = functor_flags(point_to_J())
        assert fl.equivalence and not fl.isofibration

    def test_arrow_into_point_is_not_an_equivalence(self):
        fl = functor_flags(to_terminal(arrow_category()))
        assert fl.faithful and not fl.full
        assert not fl.equivalence and "equivalence" in fl.witnesses


class TestFunctorCategory:
    def test_from_point(self):
        B = arrow_category()
        C = functor_category(POINT, B)
        assert (len(C.objects), len(C.arrows)) == (len(B.objects), len(B.arrows))

    def test_J_J(self):
        C = functor_category(J, J)
        assert len(C.objects) == 4 == oracles.count_functors(J, J)
        assert all(C.hom(x, y) for x in C.objects for y in C.objects)

    def test_from_discrete_two(self):
        B = arrow_category()
        C = functor_category(discrete([0, 1]), B)
        P, _, _ = product(B, B)
        assert (len(C.objects), len(C.arrows)) == (len(P.objects), len(P.arrows))

    @pytest.mark.parametrize("A,B", [(arrow_category(), J), (J, arrow_category()), (arrow_category(), arrow_category())])
    def test_object_count_matches_brute_force(self, A, B):
        assert len(functor_category(A, B).objects) == oracles.count_functors(A, B)

    def test_budget(self):
        with budget_limit(3), pytest.raises(SizeBudgetExceeded):
            functor_category(J, J)


class TestMaximalGroupoid:
    def test_J(self):
        M = maximal_groupoid(J)
        assert M.signature == J.signature

    def test_poset(self):
        M = maximal_groupoid(arrow_category())
        assert len(M.arrows) == 2 and M.is_groupoid()

    def test_JJ(self):
        M = maximal_groupoid(functor_category(J, J))
        assert len(M.objects) == 4 and M.is_groupoid()


class TestIsoComma:
    def test_identities(self):
        A = arrow_category()
        C, p, q = iso_comma(identity_functor(A), identity_functor(A))
        assert len(C.objects) == len(A.objects)
        comparison = Functor(A, C, {a: (a, a, A.identity(a)) for a in A.objects},
                             {f: (f, f, A.identity(A.src(f)), A.identity(A.tgt(f))) for f in A.arrows})
        assert functor_flags(comparison.check()).equivalence

    def test_same_point_of_J(self):
        C, _, _ = iso_comma(point_to_J(0), point_to_J(0))
        assert len(C.objects) == 1 and len(C.arrows) == 1

    def test_disjoint_images(self):
        B = discrete([0, 1])
        u = constant_functor(POINT, B, 0)
        v = constant_functor(POINT, B, 1)
        C, _, _ = iso_comma(u, v)
        assert not C.objects

    def test_mapping_path_property(self):
        u = point_to_J()
        C, p, q = iso_comma(u, identity_functor(J))
        assert functor_flags(q).isofibration
        section = Functor(POINT, C, {"*": ("*", 0, J.identity(0))}, {"1": ("1", "1_0", "1_0", "1_0")})
        assert section.then(p).key == identity_functor(POINT).key


class TestFactorize:
    def test_identity_cof_trivfib(self):
        A = arrow_category()
        u = identity_functor(A)
        left, right = cat_factorize(u, "cof")
        assert functor_flags(left).injective_on_objects
        assert functor_flags(right).surjective_equivalence
        assert left.then(right).key == u.key

    def test_point_into_J_trivcof_fib(self):
        left, right = cat_factorize(point_to_J(), "trivcof")
        assert functor_flags(left).equivalence and functor_flags(left).injective_on_objects
        assert functor_flags(right).isofibration

    def test_J_to_point_middle(self):
        left, right = cat_factorize(to_terminal(J), "cof")
        assert len(left.cod.objects) == 3
        assert functor_flags(right).surjective_equivalence


class TestLift:
    def test_identity_left_edge(self):
        A = arrow_category()
        top = identity_functor(A)
        sq = Square(top, identity_functor(A), to_terminal(A), to_terminal(A))
        assert find_lift(sq).key == top.key

    def test_against_surjective_equivalence(self):
        i = point_to_J()
        p = to_terminal(J)
        sq = Square(point_to_J(1), i, p, p)
        d = find_lift(sq)
        assert d is not None and d.then(p).key == p.key

    def test_against_an_endpoint(self):
        i = point_to_J(0)
        p = point_to_J(0)
        sq = Square(identity_functor(POINT), i, p, identity_functor(J))
        assert find_lift(sq) is None


class TestPushout:
    def test_object_formula(self):
        A = arrow_category()
        u = constant_functor(POINT, A, 1)
        v = constant_functor(POINT, J, 0)
        P, iG, iH = pushout(u, v)
        assert len(P.objects) == len(A.objects) + len(J.objects) - 1
        assert u.then(iG).key == v.then(iH).key

    def test_along_identity(self):
        A = arrow_category()
        P, iG, iH = pushout(identity_functor(A), identity_functor(A))
        assert len(P.objects) == len(A.objects) and len(P.arrows) == len(A.arrows)

import pytest

from fibstack.cech import (
    CechObject,
    cech_applicable,
    cech_simplicial,
    constant_cosimplicial,
    constant_simplicial,
    homotopy_sheaf_check,
    homotopy_sheaf_report,
    latching,
    tot,
    wide_pullback,
)
from fibstack.core import arrow_category, iso_groupoid, terminal
from fibstack.errors import MissingPullback, PreconditionViolated
from fibstack.fibred import slice_fib
from fibstack.groth import grothendieck
from fibstack.presheaf import discrete_presheaf, terminal_presheaf
from fibstack.site import CoveringFamily, generated_sieve
from fibstack.stacks import is_stack

from .conftest import doubled_top, push_category

E = push_category()
PUSH = CoveringFamily("S", (("U", "S"), ("V", "S")))


@pytest.fixture(scope="module")
def cech():
    return CechObject(E, PUSH, 2)


class TestWidePullback:
    def test_push_square(self):
        P, legs = wide_pullback(E, [("U", "S"), ("V", "S")])
        assert P == "W" and legs == (("W", "U"), ("W", "V"))

    def test_repeated_member(self):
        P, _ = wide_pullback(E, [("U", "S"), ("U", "S")])
        assert P == "U"

    def test_vee_has_none(self, corpus):
        V = corpus["vee"].site.base
        with pytest.raises(MissingPullback):
            wide_pullback(V, [("a", "c"), ("b", "c")])


class TestCechObject:
    def test_level_sizes(self, cech):
        assert cech.sizes() == [(4, 6), (6, 8), (10, 12)]

    def test_simplicial_identities(self, cech):
        assert cech.simplicial_identity_witness() is None

    def test_levels_are_fibrations(self, cech):
        for L in cech.levels:
            assert L.is_fibration()

    def test_augmentation_image_is_generated_sieve(self, cech):
        image = set(cech.augmentation.functor.obj_map.values())
        assert image == set(generated_sieve(E, "S", PUSH.members).arrows)

    def test_augmentation_coequalizes_faces(self, cech):
        d0, d1 = cech.faces[1]
        assert d0.then(cech.augmentation).functor.obj_map == d1.then(cech.augmentation).functor.obj_map
        assert d0.then(cech.augmentation).functor.arr_map == d1.then(cech.augmentation).functor.arr_map

    def test_singleton_family_is_constant(self):
        C = cech_simplicial(E, ("S", [("U", "S")]))
        assert C.sizes() == [(2, 3)] * 3
        assert C.simplicial_identity_witness() is None

    def test_member_must_land_in_target(self):
        with pytest.raises(PreconditionViolated):
            cech_simplicial(E, ("S", [("W", "U")]))

    def test_constant(self):
        C = constant_simplicial(slice_fib(E, "U"))
        assert C.simplicial_identity_witness() is None


class TestApplicability:
    def test_pretopology_only(self, corpus):
        assert cech_applicable(corpus["push"].site)
        assert not cech_applicable(corpus["push-sieves"].site)


class TestTot:
    @pytest.mark.parametrize("A", [terminal(), arrow_category(), iso_groupoid()])
    def test_constant_recovers_category(self, A):
        T = tot(constant_cosimplicial(A))
        assert (len(T.objects), len(T.arrows)) == (len(A.objects), len(A.arrows))

    def test_identities(self):
        X = constant_cosimplicial(iso_groupoid())
        assert X.identity_witness() is None


class TestHomotopySheaf:
    def test_terminal(self):
        F = grothendieck(discrete_presheaf(terminal_presheaf(E)))
        r = homotopy_sheaf_report(F, PUSH)
        assert r.holds and r.agrees
        assert r.level_sizes == [(4, 6), (6, 8), (10, 12)]

    def test_doubled_point_fails(self):
        F = grothendieck(discrete_presheaf(doubled_top(E)))
        r = homotopy_sheaf_report(F, PUSH)
        assert not r and r.agrees
        assert not homotopy_sheaf_check(F, PUSH)

    def test_missing_pullback(self, corpus):
        F = corpus["vee"].fibred["E"]
        with pytest.raises(MissingPullback):
            homotopy_sheaf_report(F, CoveringFamily("c", (("a", "c"), ("b", "c"))))

    def test_agrees_with_sieve_on_push(self, corpus):
        entry = corpus["push"]
        for F in entry.fibred.values():
            held = all(homotopy_sheaf_check(F, fam)
                       for S in E.objects for fam in entry.site.covering_families(S))
            assert held == is_stack(F, entry.site), F.name

    def test_descent_comparison_is_equivalence_on_stackified(self, corpus):
        F = corpus["push"].fibred["D-aP0"]
        r = homotopy_sheaf_report(F, PUSH)
        assert r.holds and r.flags.full and r.flags.faithful and r.flags.essentially_surjective


class TestLatching:
    def test_level_zero_is_empty(self, cech):
        L = latching(cech, 0)
        assert not L.obj.total.objects and L.injective_on_objects

    def test_level_one(self, cech):
        L = latching(cech, 1)
        assert L.obj is cech.levels[0] and L.injective_on_objects

    def test_level_two_pushout(self, cech):
        L = latching(cech, 2)
        n0 = len(cech.levels[0].total.objects)
        n1 = len(cech.levels[1].total.objects)
        assert len(L.obj.total.objects) == 2 * n1 - n0
        assert L.injective_on_objects
        assert L.obj.is_fibration()

    def test_constant_level_one(self):
        F = slice_fib(E, "S")
        L = latching(constant_simplicial(F), 1)
        assert L.obj is F

    def test_out_of_range(self, cech):
        with pytest.raises(PreconditionViolated):
            latching(cech, 3)

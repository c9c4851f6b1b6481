import pytest

from fibstack.core import functor_flags
from fibstack.core.category import Functor
from fibstack.corpus import build_corpus
from fibstack.fibred import FibMap, identity_map, slice_fib
from fibstack.model import (
    champ_factorize,
    classify,
    homotopy_pullback_2,
    is_champ_fibrant,
    lifting_holds,
    mapping_path,
    nat_factorize,
    path_object,
    verify_generalized_model_axioms,
)
from fibstack.stacks import is_stack

from .conftest import push_category

E = push_category()


def slice_inclusion():
    """``E_/U -> E_/S`` by postcomposition with ``U -> S``."""
    F, G = slice_fib(E, "U"), slice_fib(E, "S")
    om = {f: (E.src(f), "S") for f in F.total.objects}
    am = {(h, f): (h, om[f]) for h, f in F.total.arrows}
    return FibMap(F, G, Functor(F.total, G.total, om, am))


@pytest.fixture(scope="module")
def small():
    return build_corpus(0, sites=["chain", "two-empty"])


class TestClassify:
    def test_identity(self, corpus):
        for F in list(corpus["push"].fibred.values())[:6]:
            c = classify(identity_map(F), corpus["push"].site)
            assert c.E_equivalence and c.trivial_fibration and c.trivial_cofibration and c.bicovering

    def test_slice_inclusion(self, push):
        c = classify(slice_inclusion(), push)
        # a poset slice has only identity isomorphisms, so every functor out of it is an isofibration
        assert c.cartesian and c.cofibration and c.isofibration
        assert not c.E_equivalence and not c.trivial_fibration

    def test_declared_flags(self, corpus):
        for entry in corpus.values():
            for name, m in entry.maps.items():
                c = classify(m.map, entry.site)
                for flag, want in m.declared.items():
                    assert getattr(c, flag) == want, (entry.name, name, flag)


class TestNaturalFactorization:
    @pytest.mark.parametrize("system", ["cof", "trivcof"])
    def test_identity(self, system):
        r = nat_factorize(identity_map(slice_fib(E, "S")), system)
        assert r.ok, r.certificate

    @pytest.mark.parametrize("system", ["cof", "trivcof"])
    def test_slice_inclusion(self, system):
        r = nat_factorize(slice_inclusion(), system)
        assert r.ok, r.certificate
        assert r.left.map.cod is r.middle and r.right.map.dom is r.middle

    def test_cof_system_flags(self):
        r = nat_factorize(slice_inclusion(), "cof")
        assert r.left.cofibration and r.right.trivial_fibration

    def test_trivcof_system_flags(self):
        r = nat_factorize(slice_inclusion(), "trivcof")
        assert r.left.trivial_cofibration and r.right.isofibration


class TestPathObjects:
    def test_path_object(self, corpus):
        for F in list(corpus["push"].fibred.values())[:6]:
            PJ, c, ev = path_object(F)
            assert PJ.is_fibration()
            assert classify(c).E_equivalence and classify(ev).isofibration

    def test_mapping_path(self):
        u = slice_inclusion()
        P, j, q = mapping_path(u)
        assert P.is_fibration()
        assert classify(j).E_equivalence and classify(q).isofibration
        assert j.then(q).functor.key == u.functor.key

    def test_homotopy_pullback_of_identity(self):
        F = slice_fib(E, "S")
        H, p1, _ = homotopy_pullback_2(identity_map(F), identity_map(F))
        assert H.is_fibration()
        assert functor_flags(p1.functor).equivalence


class TestLifting:
    def test_cofibration_against_trivial_fibration(self, corpus):
        entry = corpus["push"]
        i = entry.maps["incl-S-0"].map
        p = entry.maps["counit-D-P0"].map
        ok, tried, wit = lifting_holds(i, p, 8)
        assert ok and tried > 0 and wit is None

    def test_failure_has_witness(self, corpus):
        entry = corpus["push"]
        i = entry.maps["incl-S-0"].map
        p = entry.maps["proj-D-P0"].map
        assert not classify(p).trivial_fibration
        ok, _, wit = lifting_holds(i, p, 8)
        assert not ok and wit is not None


class TestChamp:
    def test_factorization_on_chain(self, small):
        entry = small["chain"]
        tests = [i for _, i in entry.test_maps()]
        for name in entry.champ_maps:
            r = champ_factorize(entry.maps[name].map, entry.site, tests)
            assert r.ok, (name, r.certificate)
            assert r.left.bicovering and r.right.c_local_fibration

    def test_factorization_on_push(self, corpus):
        entry = corpus["push"]
        r = champ_factorize(entry.maps["incl-S-0"].map, entry.site)
        assert r.ok, r.certificate

    def test_fibrant_iff_stack(self, small):
        for entry in small.values():
            for F in entry.fibred.values():
                assert is_champ_fibrant(F, entry.site) == is_stack(F, entry.site), F.name


class TestAxiomSuite:
    def test_natural(self, small):
        rep = verify_generalized_model_axioms(small, localized=False)
        assert rep.ok, rep.violations[:3]
        assert "champ_factorization" not in rep.checks
        assert rep.checks["natural_lifting"][0] > 0

    def test_localized(self, small):
        rep = verify_generalized_model_axioms(small, localized=True)
        assert rep.ok, rep.violations[:3]
        for axiom in ("fibrant_iff_stack", "champ_factorization", "two_out_of_three_localized"):
            assert rep.checks[axiom][0] > 0

    def test_flipped_flag_is_reported(self):
        bad = build_corpus(0, sites=["two-empty"])
        m = next(m for m in bad["two-empty"].maps.values() if m.declared)
        flag = sorted(m.declared)[0]
        m.declared[flag] = not m.declared[flag]
        rep = verify_generalized_model_axioms(bad, localized=False)
        assert len(rep.violations) == 1
        assert rep.violations[0]["axiom"] == "declared_flags"
        assert rep.as_dict()["checks"]["declared_flags"]["violations"] == 1

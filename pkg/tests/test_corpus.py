import os
import random

import pytest

from fibstack.corpus import (
    build_corpus,
    corpus_documents,
    corpus_generate,
    load_corpus,
    manifest_hash,
    random_presheaf,
    write_corpus,
)
from fibstack.documents import dumps, read_document
from fibstack.errors import ValidationError
from fibstack.model import classify

from .conftest import ROOT, push_category

# frozen from an earlier run; any change to generation or encoding moves it
SEED0_HASH = "5c0ef012988743258b2dcab3d38bec50628d31e7e2e7a71db13b86cf47433bf2"
SITES = {"push", "push-trivial", "chain", "two-empty", "vee", "pair-coarse", "push-sieves"}


def test_golden_hash():
    assert corpus_generate(0)["hash"] == SEED0_HASH


def test_shipped_manifests():
    man = read_document(os.path.join(ROOT, "corpus", "seed0", "manifest.json"))
    assert man["hash"] == SEED0_HASH and man["seed"] == 0
    neg = read_document(os.path.join(ROOT, "corpus", "negative", "manifest.json"))
    assert neg["negative_control"] and neg["expected_violations"] == 40
    assert neg["hash"] != SEED0_HASH


def test_deterministic():
    a, _ = corpus_documents(build_corpus(3, sites=["chain"]))
    b, _ = corpus_documents(build_corpus(3, sites=["chain"]))
    assert manifest_hash(a) == manifest_hash(b)


def test_seed_changes_content():
    assert corpus_generate(0)["hash"] != corpus_generate(1)["hash"]


def test_sites(corpus):
    assert set(corpus) == SITES
    assert sum(len(e.maps) for e in corpus.values()) >= 50
    assert not corpus["push-sieves"].site.pretopology


def test_caps_limit_site_size():
    small = build_corpus(0, caps=(2, 2))
    assert set(small) == {"two-empty", "pair-coarse"}
    for e in small.values():
        for P in e.presheaves.values():
            assert all(len(v) <= 2 for v in P.values.values())


def test_fibred_are_fibrations(corpus):
    for entry in corpus.values():
        for name, F in entry.fibred.items():
            assert F.is_fibration(), (entry.name, name)


def test_maps_are_over_the_base(corpus):
    for entry in corpus.values():
        for name, m in entry.maps.items():
            u = m.map
            u.functor.check()
            assert all(u.cod.p(u.obj(x)) == u.dom.p(x) for x in u.dom.total.objects), name


def test_declared_flags_hold(corpus):
    for entry in corpus.values():
        for name, m in entry.maps.items():
            c = classify(m.map, entry.site)
            assert all(getattr(c, k) == v for k, v in m.declared.items()), name


def test_random_presheaf_is_functorial():
    rng = random.Random(5)
    E = push_category()
    for _ in range(10):
        random_presheaf(E, rng).check()


def test_write_and_load(tmp_path):
    man = write_corpus(str(tmp_path), seed=2, caps=(3, 2))
    corpus, loaded = load_corpus(str(tmp_path))
    assert loaded == man
    files, _ = corpus_documents(corpus)
    assert manifest_hash(files) == man["hash"]
    for rel, doc in files.items():
        assert (tmp_path / rel).read_text(encoding="utf-8") == dumps(doc)


def test_negative_flips(tmp_path):
    man = write_corpus(str(tmp_path), seed=0, caps=(2, 2), negative=True)
    corpus, _ = load_corpus(str(tmp_path))
    wrong = 0
    for entry in corpus.values():
        for m in entry.maps.values():
            c = classify(m.map, entry.site)
            wrong += sum(getattr(c, k) != v for k, v in m.declared.items())
    assert wrong == man["expected_violations"] > 0


def test_unknown_reference(tmp_path):
    write_corpus(str(tmp_path), seed=0, caps=(2, 2))
    path = next((tmp_path / "two-empty" / "maps").iterdir())
    path.write_text(path.read_text().replace('"dom": "', '"dom": "missing-'))
    with pytest.raises(ValidationError):
        load_corpus(str(tmp_path))

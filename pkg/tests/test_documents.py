import json
import os

import pytest

from fibstack.core import iso_groupoid
from fibstack.corpus import corpus_documents, load_corpus
from fibstack.documents import (
    catpresheaf_doc,
    category_doc,
    dumps,
    encode_id,
    encoded_category,
    fibmap_doc,
    fibred_doc,
    load_catpresheaf,
    load_category,
    load_fibmap,
    load_fibred,
    load_presheaf,
    load_site,
    presheaf_doc,
    read_document,
    site_doc,
    write_document,
)
from fibstack.errors import ValidationError
from fibstack.fibred import slice_fib
from fibstack.groth import counit_v, sections_fibred

from .conftest import ROOT, doubled_top, push_category

E = push_category()
SEED0 = os.path.join(ROOT, "corpus", "seed0")


# documents carry string ids, so they are read against the string-encoded base
BASE = encoded_category(E)


def reread(doc):
    return json.loads(dumps(doc))


class TestRoundTrip:
    def test_category(self):
        J = iso_groupoid()
        doc = category_doc(J, name="J")
        assert dumps(category_doc(load_category(doc), name="J")) == dumps(doc)

    def test_site(self, push):
        doc = site_doc(push, name="push")
        T = load_site(reread(doc))
        assert dumps(site_doc(T, name="push")) == dumps(doc)
        assert [len(T.refinements(S)) for S in T.base.objects] == [len(push.refinements(S)) for S in E.objects]

    def test_presheaf(self):
        P = doubled_top(E)
        doc = presheaf_doc(P, name="P")
        assert dumps(presheaf_doc(load_presheaf(reread(doc), BASE), name="P")) == dumps(doc)

    def test_catpresheaf(self, corpus):
        for n, X in corpus["push"].catpresheaves.items():
            doc = catpresheaf_doc(X, name=n)
            assert dumps(catpresheaf_doc(load_catpresheaf(reread(doc), BASE), name=n)) == dumps(doc)

    def test_fibred_with_structured_ids(self, corpus):
        F = sections_fibred(corpus["push"].fibred["D-P0"])
        doc = fibred_doc(F, name="SF")
        G = load_fibred(reread(doc), BASE)
        assert dumps(fibred_doc(G, name="SF")) == dumps(doc)
        assert G.is_fibration()

    def test_map(self, corpus):
        F = corpus["push"].fibred["G-X0"]
        v = counit_v(F)
        doc = fibmap_doc(v, "SF", "F", name="v")
        SF = load_fibred(reread(fibred_doc(v.dom)), BASE)
        FF = load_fibred(reread(fibred_doc(F)), BASE)
        w = load_fibmap(reread(doc), SF, FF)
        assert dumps(fibmap_doc(w, "SF", "F", name="v")) == dumps(doc)

    def test_shipped_corpus_is_byte_identical(self):
        corpus, _ = load_corpus(SEED0)
        files, _ = corpus_documents(corpus)
        for rel, doc in files.items():
            with open(os.path.join(SEED0, rel), encoding="utf-8") as fh:
                assert fh.read() == dumps(doc), rel


class TestIdentifiers:
    def test_strings_kept(self):
        assert encode_id("S") == "S"

    def test_tuples_are_compact_json(self):
        assert encode_id(("W", "U")) == '["W","U"]'

    def test_unencodable(self):
        with pytest.raises(ValidationError):
            encode_id(1.5)


class TestFiles:
    def test_atomic_write(self, tmp_path):
        p = tmp_path / "x.json"
        write_document(str(p), {"b": 1, "a": [1, 2]})
        assert read_document(str(p)) == {"a": [1, 2], "b": 1}
        assert [f.name for f in tmp_path.iterdir()] == ["x.json"]

    def test_not_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(ValidationError):
            read_document(str(p))

    def test_bad_category_rejected(self):
        doc = category_doc(slice_fib(E, "S").total)
        doc["compose"] = doc.get("compose", [])[:1]
        with pytest.raises(ValidationError):
            load_category(doc)

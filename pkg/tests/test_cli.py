import io
import json
import os
import subprocess
import sys

import pytest

from fibstack.cli import BUDGET, FAILS, HOLDS, INVALID, run
from fibstack.documents import read_document

from .conftest import ROOT

SEED0 = os.path.join(ROOT, "corpus", "seed0")
PUSH_FAMILY = json.dumps(['["U","S"]', '["V","S"]'])


def doc(site, *parts):
    return os.path.join(SEED0, site, *parts)


def push(kind, name):
    return doc("push", kind, name + ".json")


def call(*argv):
    out = io.StringIO()
    code, rep = run(list(argv), out)
    return code, rep, out.getvalue()


SITE = doc("push", "site.json")


class TestVerdicts:
    def test_stack_holds(self):
        code, rep, text = call("stack", SITE, push("fibred", "D-aP0"))
        assert code == HOLDS and "verdict: holds" in text

    def test_stack_fails_with_witness(self):
        code, rep, _ = call("stack", SITE, push("fibred", "D-P0"))
        assert code == FAILS
        assert rep["witness"]["object"] == "S"
        assert rep["witness"]["flags"]["essentially_surjective"] is False

    def test_prestack(self):
        assert call("prestack", SITE, push("fibred", "D-P0"))[0] == HOLDS
        assert call("prestack", SITE, push("fibred", "D-P2"))[0] == FAILS

    def test_fibration(self):
        assert call("fibration", SITE, push("fibred", "thin-W"))[0] == HOLDS

    def test_bicovering(self):
        code, rep, _ = call("bicovering", SITE, push("fibred", "sieve-S-0"), push("fibred", "slice-S"),
                            push("maps", "incl-S-0"))
        assert code == HOLDS and rep["details"]["locally_fully_faithful"]

    def test_flags(self):
        code, rep, _ = call("flags", SITE, push("fibred", "D-P0"), push("fibred", "E"), push("maps", "proj-D-P0"))
        assert code == HOLDS and rep["details"]["isofibration"] is True

    def test_cart_hom(self):
        code, rep, _ = call("cart-hom", SITE, push("fibred", "slice-U"), push("fibred", "D-P0"))
        assert code == HOLDS and rep["details"]["objects"] >= 1

    def test_factorize(self, tmp_path):
        out = tmp_path / "mid.json"
        code, rep, _ = call("factorize", "--out", str(out), SITE, push("fibred", "D-P0"), push("fibred", "E"),
                            push("maps", "proj-D-P0"))
        assert code == HOLDS and all(rep["details"]["certificate"].values())
        assert read_document(str(out))["kind"] == "fibred"

    def test_stackify_writes_stack(self, tmp_path):
        out = tmp_path / "AF.json"
        site = doc("chain", "site.json")
        code, _, _ = call("stackify", "--out", str(out), site, doc("chain", "fibred", "D-P0.json"))
        assert code == HOLDS
        assert call("stack", site, str(out))[0] == HOLDS

    def test_sheafify(self, tmp_path):
        out = tmp_path / "aP.json"
        code, rep, _ = call("sheafify", "--out", str(out), SITE, push("presheaves", "P0"))
        assert code == HOLDS
        assert read_document(str(out))["kind"] == "presheaf"

    def test_property_p(self):
        assert call("property-p", SITE, push("fibred", "D-P0"), push("maps", "id-D-P0"))[0] == HOLDS

    def test_duplicate_names_rejected(self):
        assert call("stack", SITE, push("fibred", "D-P0"), push("fibred", "D-P0"))[0] == INVALID

    def test_hopullback(self):
        code, rep, _ = call("hopullback", SITE, push("fibred", "D-P0"), push("fibred", "E"), push("fibred", "D-P1"),
                            push("maps", "proj-D-P0"), push("maps", "proj-D-P1"))
        assert code == HOLDS and rep["details"]["objects"] > 0

    def test_path_object(self):
        assert call("path-object", SITE, push("fibred", "slice-U"))[0] == HOLDS

    def test_cech(self):
        code, rep, _ = call("cech", "--family", PUSH_FAMILY, SITE, push("fibred", "D-P0"))
        assert code == FAILS and rep["details"]["levels"] == [[4, 6], [6, 8], [10, 12]]
        assert rep["details"]["agrees_with_sieve"]
        assert call("cech", "--family", PUSH_FAMILY, SITE, push("fibred", "D-aP0"))[0] == HOLDS


class TestErrors:
    def test_cech_needs_families(self):
        code, rep, _ = call("cech", "--family", PUSH_FAMILY, doc("push-sieves", "site.json"),
                            doc("push-sieves", "fibred", "E.json"))
        assert code == INVALID and rep["verdict"] == "not-applicable"

    def test_cech_missing_pullback(self):
        fam = json.dumps(['["a","c"]', '["b","c"]'])
        code, rep, _ = call("cech", "--family", fam, doc("vee", "site.json"), doc("vee", "fibred", "E.json"))
        assert code == INVALID and rep["verdict"] == "not-applicable"

    def test_budget(self):
        code, rep, _ = call("--budget", "5", "stackify", SITE, push("fibred", "D-P0"))
        assert code == BUDGET and rep["verdict"] == "budget"

    def test_missing_file(self, tmp_path):
        assert call("stack", str(tmp_path / "nope.json"))[0] == INVALID

    def test_not_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("[")
        assert call("validate", str(p))[0] == INVALID

    def test_unknown_reference(self):
        assert call("bicovering", SITE, push("maps", "incl-S-0"))[0] == INVALID

    def test_bad_family(self):
        assert call("cech", "--family", '["nope"]', SITE, push("fibred", "E"))[0] == INVALID

    def test_unknown_verb(self):
        assert run(["frobnicate"], io.StringIO())[0] == INVALID

    def test_corpus_needs_out(self):
        assert call("corpus")[0] == INVALID


class TestOutput:
    def test_json_format(self):
        _, rep, text = call("--format", "json", "stack", SITE, push("fibred", "D-P0"))
        assert json.loads(text) == rep

    def test_report_round_trip(self, tmp_path):
        saved = tmp_path / "rep.json"
        code, rep, _ = call("stack", "--report-out", str(saved), SITE, push("fibred", "D-P0"))
        again, rep2, _ = call("report", str(saved))
        assert again == code == FAILS and rep2 == rep

    def test_validate_counts(self):
        code, rep, _ = call("validate", SITE, push("fibred", "E"), push("presheaves", "P0"))
        assert code == HOLDS
        assert rep["details"]["documents"]["fibred"] == 1


class TestCorpusVerbs:
    def test_corpus_and_verify(self, tmp_path):
        out = tmp_path / "c"
        code, rep, _ = call("corpus", "--seed", "0", "--caps", "2,2", "--out", str(out))
        assert code == HOLDS and rep["details"]["sites"] == ["pair-coarse", "two-empty"]
        code, rep, _ = call("verify-axioms", "--corpus", str(out))
        assert code == HOLDS and rep["details"]["violations"] == 0

    def test_negative_corpus(self, tmp_path):
        out = tmp_path / "n"
        code, rep, _ = call("corpus", "--caps", "2,2", "--negative", "--out", str(out))
        expected = rep["details"]["expected_violations"]
        code, rep, _ = call("verify-axioms", "--corpus", str(out))
        assert code == FAILS and rep["details"]["violations"] == expected == rep["details"]["expected_violations"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fibstack", "stack", SITE, push("fibred", "D-P0")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == FAILS and "verdict: fails" in proc.stdout


@pytest.mark.parametrize("verb", ["stack", "fibration", "prestack"])
def test_no_documents(verb):
    assert call(verb)[0] == INVALID

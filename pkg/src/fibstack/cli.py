"""Command line front end.

Exit codes: 0 the property holds or the construction succeeded, 1 the
property fails (a witness is reported), 2 invalid input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext

from .core.category import budget_limit
from .core.flags import functor_flags
from .corpus import DEFAULT_CAPS, load_corpus, write_corpus
from .documents import (
    catpresheaf_doc,
    dumps,
    encode_value,
    fibred_doc,
    load_catpresheaf,
    load_category,
    load_fibmap,
    load_fibred,
    load_functor,
    load_presheaf,
    load_site,
    presheaf_doc,
    read_document,
    write_document,
)
from .errors import FibstackError, MissingPullback, SizeBudgetExceeded, ValidationError
from .fibred import cart_hom
from .presheaf import is_sheaf, is_sheaf_of_categories, sheafify, sheafify_cat
from .site import CoveringFamily

HOLDS, FAILS, INVALID, BUDGET = 0, 1, 2, 3


class Workspace:
    """Named documents loaded from files; references between them are resolved by name."""

    def __init__(self):
        self.sites = {}
        self.categories = {}
        self.presheaves = {}
        self.catpresheaves = {}
        self.fibred = {}
        self.maps = {}
        self.functors = {}
        self.order = []

    @property
    def site(self):
        if not self.sites:
            raise ValidationError("no site document given")
        return next(iter(self.sites.values()))

    def _name(self, doc, path, table):
        name = doc.get("name") or os.path.splitext(os.path.basename(path))[0]
        if name in table:
            raise ValidationError(f"duplicate document name {name!r}", name)
        return name

    def load(self, path):
        doc = read_document(path)
        if not isinstance(doc, dict):
            raise ValidationError(f"{path}: a document must be a JSON object")
        kind = doc.get("kind") or ("category" if "objects" in doc else None)
        if kind == "site":
            name = self._name(doc, path, self.sites)
            self.sites[name] = load_site(doc, name=name)
        elif kind == "category":
            name = self._name(doc, path, self.categories)
            self.categories[name] = load_category(doc, name=name)
        elif kind == "presheaf":
            name = self._name(doc, path, self.presheaves)
            self.presheaves[name] = load_presheaf(doc, self.site.base, name=name)
        elif kind == "catpresheaf":
            name = self._name(doc, path, self.catpresheaves)
            self.catpresheaves[name] = load_catpresheaf(doc, self.site.base, name=name)
        elif kind == "fibred":
            name = self._name(doc, path, self.fibred)
            self.fibred[name] = load_fibred(doc, self.site.base, name=name)
        elif kind == "fibmap":
            name = self._name(doc, path, self.maps)
            self.maps[name] = load_fibmap(doc, self._fib_ref(doc.get("dom")), self._fib_ref(doc.get("cod")), name=name)
        elif kind == "functor":
            name = self._name(doc, path, self.functors)
            dom, cod = self._cat_ref(doc.get("dom")), self._cat_ref(doc.get("cod"))
            self.functors[name] = load_functor(doc, dom, cod)
        else:
            raise ValidationError(f"{path}: unknown document kind {kind!r}")
        self.order.append((kind, name))
        return kind, name

    def _fib_ref(self, ref):
        if isinstance(ref, dict):
            return load_fibred(ref, self.site.base)
        if ref not in self.fibred:
            raise ValidationError(f"unknown fibred category {ref!r}", ref)
        return self.fibred[ref]

    def _cat_ref(self, ref):
        if isinstance(ref, dict):
            return load_category(ref)
        if ref not in self.categories:
            raise ValidationError(f"unknown category {ref!r}", ref)
        return self.categories[ref]

    def nth(self, table, i, what):
        items = list(getattr(self, table).values())
        if len(items) <= i:
            raise ValidationError(f"expected at least {i + 1} {what} document(s)")
        return items[i]


def _report(verb, verdict, details=None, witness=None):
    return {"verb": verb, "verdict": verdict, "details": encode_value(details or {}), "witness": encode_value(witness)}


def _bool_report(verb, holds, details=None, witness=None):
    return _report(verb, "holds" if holds else "fails", details, None if holds else witness), (HOLDS if holds else FAILS)


def render_text(rep):
    lines = [f"verb: {rep.get('verb')}", f"verdict: {rep.get('verdict')}"]

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        else:
            lines.append(f"{prefix}: {json.dumps(v, sort_keys=True)}")

    walk("details", rep.get("details") or {})
    if rep.get("witness") is not None:
        lines.append(f"witness: {json.dumps(rep['witness'], sort_keys=True)}")
    if rep.get("error"):
        lines.append(f"error: {rep['error']}")
    return "\n".join(lines) + "\n"


# -- verbs ---------------------------------------------------------------------


def cmd_validate(ws, args):
    counts = {k: len(getattr(ws, k)) for k in ("sites", "categories", "presheaves", "catpresheaves", "fibred",
                                               "maps", "functors")}
    return _report("validate", "ok", {"documents": counts}), HOLDS


def cmd_flags(ws, args):
    if ws.maps:
        m = ws.nth("maps", 0, "map")
        fn = m.functor
    else:
        fn = ws.nth("functors", 0, "functor")
    fl = functor_flags(fn)
    return _report("flags", "ok", fl.as_dict()), HOLDS


def cmd_fibration(ws, args):
    F = ws.nth("fibred", 0, "fibred")
    w = F.fibration_witness()
    return _bool_report("fibration", w is None, {"objects": len(F.total.objects)},
                        {"object": w[0], "base_arrow": w[1]} if w else None)


def cmd_cart_hom(ws, args):
    F, G = ws.nth("fibred", 0, "fibred"), ws.nth("fibred", 1, "fibred")
    C = cart_hom(F, G)
    return _report("cart-hom", "ok", {"objects": len(C.objects), "arrows": len(C.arrows)}), HOLDS


def cmd_stack(ws, args):
    from .stacks import stack_witness

    w = stack_witness(ws.nth("fibred", 0, "fibred"), ws.site)
    return _bool_report("stack", w is None, {}, w and {"object": w[0], "sieve": w[1].arrows, "flags": w[2]})


def cmd_prestack(ws, args):
    from .stacks import prestack_witness

    w = prestack_witness(ws.nth("fibred", 0, "fibred"), ws.site)
    return _bool_report("prestack", w is None, {}, w and {"object": w[0], "sieve": w[1].arrows, "fails": w[2]})


def cmd_bicovering(ws, args):
    from .stacks import bicovering_report

    rep = bicovering_report(ws.nth("maps", 0, "map"), ws.site)
    return _bool_report("bicovering", rep.bicovering,
                        {"locally_fully_faithful": rep.locally_fully_faithful,
                         "locally_essentially_surjective": rep.locally_essentially_surjective},
                        rep.witness())


def cmd_property_p(ws, args):
    from .stacks import property_P_witness

    w = property_P_witness(ws.nth("maps", 0, "map"), ws.site)
    return _bool_report("property-p", w is None, {}, w and {"object": w[0], "sieve": w[1].arrows, "flags": w[2]})


def cmd_factorize(ws, args):
    from .model import champ_factorize, nat_factorize

    u = ws.nth("maps", 0, "map")
    kind = "cof_trivfib" if args.kind == "cof" else "trivcof_fib"
    if args.system == "champ" and args.kind == "trivcof":
        tests = list(ws.maps.values())[1:]
        r = champ_factorize(u, ws.site, tests)
    else:
        r = nat_factorize(u, kind, ws.site)
    details = {"system": args.system, "kind": args.kind, "certificate": r.certificate,
               "middle": {"objects": len(r.middle.total.objects), "arrows": len(r.middle.total.arrows)}}
    if args.out:
        write_document(args.out, fibred_doc(r.middle, name="middle"))
    failed = [k for k, v in r.certificate.items() if not v]
    return _bool_report("factorize", r.ok, details, failed)


def cmd_stackify(ws, args):
    from .stacks import certify_stackification, is_stack, stackify

    AF, w = stackify(ws.nth("fibred", 0, "fibred"), ws.site)
    legs = certify_stackification(w)
    ok = is_stack(AF, ws.site) and all((leg["bicovering"] if leg["forward"] else leg["trivial_fibration"])
                                        for leg in legs)
    if args.out:
        write_document(args.out, fibred_doc(AF, name="stack"))
    details = {"stack": {"objects": len(AF.total.objects), "arrows": len(AF.total.arrows)}, "legs": legs}
    return _bool_report("stackify", ok, details, legs)


def cmd_sheafify(ws, args):
    top = ws.site
    if ws.presheaves:
        P = ws.nth("presheaves", 0, "presheaf")
        aP, _ = sheafify(P, top)
        ok = is_sheaf(aP, top)
        out = presheaf_doc(aP, name=f"a{P.name}")
        details = {"input_sheaf": is_sheaf(P, top), "sizes": {S: len(v) for S, v in aP.values.items()}}
    else:
        X = ws.nth("catpresheaves", 0, "presheaf")
        aX, _ = sheafify_cat(X, top)
        ok = is_sheaf_of_categories(aX, top)
        out = catpresheaf_doc(aX, name=f"a{X.name}")
        details = {"input_sheaf": is_sheaf_of_categories(X, top)}
    if args.out:
        write_document(args.out, out)
    return _bool_report("sheafify", ok, details, None)


def cmd_path_object(ws, args):
    from .model import classify, path_object

    F = ws.nth("fibred", 0, "fibred")
    PJ, const, ends = path_object(F)
    a, b = classify(const), classify(ends)
    ok = a.E_equivalence and b.isofibration
    details = {"path_object": {"objects": len(PJ.total.objects), "arrows": len(PJ.total.arrows)},
               "constant_E_equivalence": a.E_equivalence, "ends_isofibration": b.isofibration}
    return _bool_report("path-object", ok, details, None)


def cmd_hopullback(ws, args):
    from .model import homotopy_pullback_2

    u, v = ws.nth("maps", 0, "map"), ws.nth("maps", 1, "map")
    P, p1, p2 = homotopy_pullback_2(u, v)
    ok = P.is_fibration()
    return _bool_report("hopullback", ok, {"objects": len(P.total.objects), "arrows": len(P.total.arrows)}, None)


def cmd_cech(ws, args):
    from .cech import cech_applicable, homotopy_sheaf_report
    from .stacks import is_stack

    top = ws.site
    if not cech_applicable(top):
        return _report("cech", "not-applicable", {"reason": "the site is given by sieves, not covering families"}), INVALID
    try:
        members = json.loads(args.family)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--family is not JSON: {exc}") from None
    E = top.base
    if not isinstance(members, list) or any(m not in E.arrows for m in members):
        raise ValidationError("--family must list arrow ids of the site", members)
    targets = {E.tgt(a) for a in members} or ({args.target} if args.target in E else set())
    if len(targets) != 1:
        raise ValidationError("family members must share one target (use --target for an empty family)")
    arrows, target = members, targets.pop()
    F = ws.nth("fibred", 0, "fibred")
    try:
        rep = homotopy_sheaf_report(F, CoveringFamily(target, tuple(arrows)))
    except MissingPullback as exc:
        return _report("cech", "not-applicable", {"reason": str(exc)}), INVALID
    details = {"levels": rep.level_sizes, "tot": rep.tot_size, "sieve_equivalence": rep.sieve_equivalence,
               "agrees_with_sieve": rep.agrees, "is_stack": is_stack(F, top)}
    return _bool_report("cech", rep.holds, details, rep.flags)


def cmd_verify_axioms(ws, args):
    from .model import verify_generalized_model_axioms

    corpus, manifest = load_corpus(args.corpus)
    out = {}
    total = 0
    for localized in (False, True):
        rep = verify_generalized_model_axioms(corpus, localized=localized)
        out["localized" if localized else "natural"] = rep.as_dict()["checks"]
        total = max(total, len(rep.violations))
        if rep.violations:
            out.setdefault("violations", rep.violations[:20])
    details = {"structures": out, "violations": total}
    if "expected_violations" in manifest:
        details["expected_violations"] = manifest["expected_violations"]
    return _bool_report("verify-axioms", total == 0, details, out.get("violations"))


def cmd_corpus(ws, args):
    caps = tuple(int(x) for x in args.caps.split(",")) if args.caps else DEFAULT_CAPS
    man = write_corpus(args.out, seed=args.seed, caps=caps, negative=args.negative)
    details = {"hash": man["hash"], "sites": sorted(man["sites"])}
    if args.negative:
        details["expected_violations"] = man["expected_violations"]
    return _report("corpus", "ok", details), HOLDS


def cmd_report(ws, args):
    rep = read_document(args.report)
    code = {"holds": HOLDS, "ok": HOLDS, "fails": FAILS, "invalid": INVALID, "not-applicable": INVALID,
            "budget": BUDGET}.get(rep.get("verdict"), INVALID)
    return rep, code


VERBS = {
    "validate": cmd_validate,
    "flags": cmd_flags,
    "fibration": cmd_fibration,
    "cart-hom": cmd_cart_hom,
    "stack": cmd_stack,
    "prestack": cmd_prestack,
    "bicovering": cmd_bicovering,
    "property-p": cmd_property_p,
    "factorize": cmd_factorize,
    "stackify": cmd_stackify,
    "sheafify": cmd_sheafify,
    "path-object": cmd_path_object,
    "hopullback": cmd_hopullback,
    "cech": cmd_cech,
    "verify-axioms": cmd_verify_axioms,
    "corpus": cmd_corpus,
    "report": cmd_report,
}

NO_DOCUMENTS = {"verify-axioms", "corpus", "report"}


def build_parser():
    def options(parser, default):
        def d(v):
            return argparse.SUPPRESS if default is argparse.SUPPRESS else v

        parser.add_argument("--budget", type=int, default=d(None), help="cap on enumerated candidates")
        parser.add_argument("--format", choices=("text", "json"), default=d("text"))
        parser.add_argument("--out", default=d(None), help="write the constructed document here")
        parser.add_argument("--report-out", default=d(None), help="also write the report document here")

    common = argparse.ArgumentParser(add_help=False)
    options(common, argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="fibstack", description="Finite fibred categories, stacks and descent.")
    options(p, None)
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sp = sub.add_parser(verb, parents=[common])
        if verb == "report":
            sp.add_argument("report")
        elif verb == "corpus":
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--caps", default=None, help="max base objects,max values per object")
            sp.add_argument("--negative", action="store_true", help="flip declared flags for a negative control")
        elif verb == "verify-axioms":
            sp.add_argument("--corpus", required=True)
        else:
            sp.add_argument("documents", nargs="+")
        if verb == "factorize":
            sp.add_argument("--system", choices=("natural", "champ"), default="natural")
            sp.add_argument("--kind", choices=("cof", "trivcof"), default="cof")
        if verb == "cech":
            sp.add_argument("--family", required=True, help="JSON list of arrow ids")
            sp.add_argument("--target", default=None, help="target object for an empty family")
    return p


def run(argv=None, stdout=None):
    """Parse ``argv``, dispatch, print the report; returns ``(exit_code, report)``."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (INVALID if exc.code else HOLDS), None
    if args.verb == "corpus" and not args.out:
        rep = {"verb": "corpus", "verdict": "invalid", "error": "corpus needs --out DIR"}
        stdout.write(render_text(rep))
        return INVALID, rep
    ws = Workspace()
    try:
        ctx = budget_limit(args.budget) if args.budget else nullcontext()
        with ctx:
            if args.verb not in NO_DOCUMENTS:
                for path in args.documents:
                    ws.load(path)
            rep, code = VERBS[args.verb](ws, args)
    except SizeBudgetExceeded as exc:
        rep, code = {"verb": args.verb, "verdict": "budget", "error": str(exc)}, BUDGET
    except (ValidationError, FibstackError, OSError, KeyError, TypeError) as exc:
        detail = exc.report() if isinstance(exc, ValidationError) else {"message": str(exc)}
        rep, code = {"verb": args.verb, "verdict": "invalid", "error": str(exc), "details": encode_value(detail)}, INVALID
    if args.report_out:
        write_document(args.report_out, rep)
    stdout.write(dumps(rep) if args.format == "json" else render_text(rep))
    return code, rep


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())

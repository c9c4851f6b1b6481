"""JSON documents for categories, functors, sites, presheaves, fibred categories and maps.

Identifiers inside documents are strings. Non-string identifiers produced by
constructions are written as compact JSON of their structure, so writing a
loaded document reproduces it byte for byte.
"""

from __future__ import annotations

import json
import os
import tempfile

from .core.category import Functor, NatTrans, okey, osorted
from .core.validate import validate_category, validate_functor
from .errors import ValidationError
from .fibred import FibMap, FibredCategory
from .presheaf import CatPresheaf, PresheafMap, SetPresheaf
from .site import validate_topology


def _structure(x):
    if isinstance(x, str):
        return x
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, tuple):
        return [_structure(e) for e in x]
    if isinstance(x, frozenset):
        return {"set": [_structure(e) for e in osorted(x)]}
    if isinstance(x, Functor):
        return {"functor": _structure(x.key)}
    if isinstance(x, NatTrans):
        return {"nat": _structure(x.key)}
    raise ValidationError(f"cannot encode identifier {x!r}", repr(x))


def encode_id(x):
    """Canonical string for an identifier; strings are kept as they are."""
    if isinstance(x, str):
        return x
    return json.dumps(_structure(x), separators=(",", ":"), sort_keys=True)


def dumps(doc):
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def write_document(path, doc):
    """Write atomically: a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
    os.replace(tmp, path)


def read_document(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not JSON ({exc})") from None


# -- categories and functors ----------------------------------------------------


def category_doc(C, name=None):
    e = encode_id
    doc = {
        "objects": sorted(e(x) for x in C.objects),
        "arrows": sorted(
            ({"id": e(a), "src": e(C.src(a)), "tgt": e(C.tgt(a))} for a in C.arrows), key=lambda r: r["id"]
        ),
        "identities": {e(x): e(C.identity(x)) for x in C.objects},
        "compose": sorted(
            (
                {"first": e(f), "second": e(g), "result": e(C.then(f, g))}
                for f, g in C.composable_pairs()
                if not (C.is_identity(f) or C.is_identity(g))
            ),
            key=lambda r: (r["first"], r["second"]),
        ),
    }
    if name or C.name:
        doc["name"] = name or C.name
    return doc


def load_category(doc, name=None):
    return validate_category(doc, name=name or doc.get("name"))


def functor_doc(F):
    e = encode_id
    return {
        "obj_map": {e(x): e(y) for x, y in F.obj_map.items()},
        "arr_map": {e(a): e(b) for a, b in F.arr_map.items()},
    }


def load_functor(doc, dom, cod):
    return validate_functor(doc, dom, cod)


def encoded_category(C):
    """``C`` with every identifier replaced by its string encoding."""
    return load_category(category_doc(C))


# -- sites ----------------------------------------------------------------------


def site_doc(T, name=None):
    e = encode_id
    if T.pretopology:
        mode = "pretopology"
        covers = {e(S): sorted(sorted(e(f) for f in fam.members) for fam in T.families.get(S, ()))
                  for S in T.base.objects}
    else:
        mode = "sieves"
        covers = {e(S): sorted(sorted(e(f) for f in R.arrows) for R in T.refinements(S)) for S in T.base.objects}
    doc = {"kind": "site", "category": category_doc(T.base), "topology": {"mode": mode, "covers": covers}}
    if name or T.name:
        doc["name"] = name or T.name
    return doc


def load_site(doc, name=None):
    try:
        E = load_category(doc["category"])
        return validate_topology(E, doc["topology"], name=name or doc.get("name"))
    except KeyError as exc:
        raise ValidationError(f"site document lacks {exc}") from None


# -- presheaves ------------------------------------------------------------------


def presheaf_doc(P, name=None):
    e = encode_id
    E = P.base
    doc = {
        "kind": "presheaf",
        "values": {e(S): sorted(e(x) for x in P.values[S]) for S in E.objects},
        "restrictions": {
            e(f): {e(x): e(y) for x, y in P.restr[f].items()} for f in E.arrows if not E.is_identity(f)
        },
    }
    if name or P.name:
        doc["name"] = name or P.name
    return doc


def load_presheaf(doc, E, name=None):
    try:
        P = SetPresheaf(E, doc["values"], doc["restrictions"], name=name or doc.get("name"))
    except KeyError as exc:
        raise ValidationError(f"presheaf document lacks {exc}") from None
    return P.check()


def presheaf_map_doc(phi):
    e = encode_id
    return {"kind": "presheaf_map", "components": {e(S): {e(x): e(y) for x, y in c.items()} for S, c in phi.comps.items()}}


def load_presheaf_map(doc, P, Q):
    return PresheafMap(P, Q, doc["components"]).check()


def catpresheaf_doc(X, name=None):
    e = encode_id
    E = X.base
    doc = {
        "kind": "catpresheaf",
        "values": {e(S): category_doc(X.values[S]) for S in E.objects},
        "restrictions": {e(f): functor_doc(X.restr[f]) for f in E.arrows if not E.is_identity(f)},
    }
    if name or X.name:
        doc["name"] = name or X.name
    return doc


def load_catpresheaf(doc, E, name=None):
    try:
        values = {S: load_category(d) for S, d in doc["values"].items()}
        restr = {}
        for f, fd in doc["restrictions"].items():
            T, S = E.ends(f)
            restr[f] = load_functor(fd, values[S], values[T])
    except KeyError as exc:
        raise ValidationError(f"presheaf document references unknown {exc}") from None
    return CatPresheaf(E, values, restr, name=name or doc.get("name")).check()


# -- fibred categories and maps -------------------------------------------------------


def fibred_doc(F, name=None, base_ref="site"):
    doc = {"kind": "fibred", "total": category_doc(F.total), "base": base_ref, "proj": functor_doc(F.proj)}
    if name or F.name:
        doc["name"] = name or F.name
    return doc


def load_fibred(doc, E, name=None):
    """Load over the base ``E``; an inline base must agree with ``E``."""
    try:
        base = doc.get("base")
        if isinstance(base, dict):
            inline = load_category(base)
            if inline.signature != E.signature:
                raise ValidationError("inline base differs from the site category")
        C = load_category(doc["total"])
        proj = load_functor(doc["proj"], C, E)
    except KeyError as exc:
        raise ValidationError(f"fibred document lacks {exc}") from None
    return FibredCategory(C, E, proj, name=name or doc.get("name"))


def fibmap_doc(u, dom_ref, cod_ref, name=None, declared=None, **extra):
    doc = {"kind": "fibmap", "dom": dom_ref, "cod": cod_ref, "functor": functor_doc(u.functor)}
    if name or u.name:
        doc["name"] = name or u.name
    if declared:
        doc["declared"] = dict(sorted(declared.items()))
    doc.update(extra)
    return doc


def load_fibmap(doc, F, G, name=None):
    fn = load_functor(doc["functor"], F.total, G.total)
    return FibMap(F, G, fn, name=name or doc.get("name"))


def encode_value(x):
    """JSON-friendly view of report values and witnesses."""
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, dict):
        return {encode_id(k) if not isinstance(k, str) else k: encode_value(v) for k, v in sorted(x.items(), key=lambda kv: okey(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [encode_value(e) for e in x]
    if isinstance(x, (frozenset, set)):
        return [encode_value(e) for e in osorted(x)]
    as_dict = getattr(x, "as_dict", None)
    if callable(as_dict):
        return encode_value(as_dict())
    try:
        return encode_id(x)
    except ValidationError:
        return repr(x)

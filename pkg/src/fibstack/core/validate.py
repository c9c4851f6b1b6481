"""Turning raw descriptions into validated categories and functors."""

from __future__ import annotations

from ..errors import FunctorViolation, IdentityViolation, MissingComposite, ValidationError
from .category import FinCategory, Functor


def validate_category(raw, name=None):
    """Build a :class:`FinCategory` from a raw document and check every law.

    ``raw`` has ``objects``, ``arrows`` (``{id, src, tgt}`` records),
    ``identities`` and ``compose`` (``{first, second, result}`` records).
    Composites with an identity may be omitted; they are filled in.
    """
    try:
        objects = list(raw["objects"])
        arrows = {}
        for rec in raw["arrows"]:
            if rec["id"] in arrows:
                raise ValidationError(f"duplicate arrow id {rec['id']!r}", rec["id"])
            arrows[rec["id"]] = (rec["src"], rec["tgt"])
        identities = dict(raw["identities"])
        table = {}
        for rec in raw.get("compose", ()):
            key = (rec["first"], rec["second"])
            if key in table and table[key] != rec["result"]:
                raise ValidationError(f"conflicting composites for {key!r}", key)
            table[key] = rec["result"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed category description: {exc}") from None
    objset = set(objects)
    for a, (s, t) in arrows.items():
        if s not in objset or t not in objset:
            raise ValidationError(f"arrow {a!r} has an unknown endpoint", a)
    for x in objects:
        i = identities.get(x)
        if i is None or arrows.get(i) != (x, x):
            raise IdentityViolation(f"object {x!r} has no valid identity", x)
    for (f, g), r in table.items():
        if f not in arrows or g not in arrows or r not in arrows:
            raise MissingComposite(f"composite {f!r} then {g!r} names an unknown arrow", (f, g))
    for a, (s, t) in arrows.items():
        table.setdefault((identities[s], a), a)
        table.setdefault((a, identities[t]), a)
    C = FinCategory(objects, arrows, identities, table, name=name or raw.get("name"))
    for (f, g) in table:
        if C.tgt(f) != C.src(g):
            raise MissingComposite(f"composite recorded for non-composable pair {(f, g)!r}", (f, g))
    return C.check()


def category_to_raw(C):
    return {
        "objects": list(C.objects),
        "arrows": [{"id": a, "src": C.src(a), "tgt": C.tgt(a)} for a in C.arrows],
        "identities": {x: C.identity(x) for x in C.objects},
        "compose": [
            {"first": f, "second": g, "result": C.then(f, g)}
            for f, g in C.composable_pairs()
        ],
    }


def validate_functor(raw, dom, cod):
    try:
        F = Functor(dom, cod, dict(raw["obj_map"]), dict(raw["arr_map"]))
    except (KeyError, TypeError) as exc:
        raise FunctorViolation(f"malformed functor description: {exc}") from None
    return F.check()


def functor_to_raw(F):
    return {"obj_map": dict(F.obj_map), "arr_map": dict(F.arr_map)}

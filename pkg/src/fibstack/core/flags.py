"""Decided properties of functors, each with a counterexample when it fails."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class FunctorFlags:
    full: bool
    faithful: bool
    essentially_surjective: bool
    injective_on_objects: bool
    isofibration: bool
    surjective_equivalence: bool
    equivalence: bool
    surjective_on_objects: bool = False
    witnesses: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        names = ("full", "faithful", "essentially_surjective", "injective_on_objects",
                 "isofibration", "surjective_equivalence", "equivalence")
        return {k: getattr(self, k) for k in names}


def full_faithful(u):
    """Return ``(full, faithful, witnesses)`` for ``u``."""
    A, B = u.dom, u.cod
    om, am = u.obj_map, u.arr_map
    images = {}
    wit = {}
    faithful = True
    for a in A.arrows:
        s, t = A.ends(a)
        seen = images.setdefault((s, t), {})
        b = am[a]
        if b in seen:
            if faithful:
                faithful = False
                wit["faithful"] = (seen[b], a)
        else:
            seen[b] = a
    full = True
    for x in A.objects:
        for y in A.objects:
            n = len(images.get((x, y), ()))
            if n != len(B.hom(om[x], om[y])):
                got = images.get((x, y), {})
                missing = next(b for b in B.hom(om[x], om[y]) if b not in got)
                full = False
                wit["full"] = (x, y, missing)
                break
        if not full:
            break
    return full, faithful, wit


def is_full_and_faithful(u):
    f, g, _ = full_faithful(u)
    return f and g


def essentially_surjective_witness(u):
    """An object of the codomain not isomorphic to any image, or None."""
    B = u.cod
    cls = B.iso_classes()
    hit = {cls[y] for y in u.obj_map.values()}
    for y in B.objects:
        if cls[y] not in hit:
            return y
    return None


def isofibration_witness(u):
    """``(a, beta)`` such that the iso ``beta`` out of ``u(a)`` has no iso lift at ``a``; or None."""
    A, B = u.dom, u.cod
    invA = A.inverses()
    invB = B.inverses()
    for a in A.objects:
        lifted = {u.arr_map[al] for al in A.out_arrows(a) if al in invA}
        for be in B.out_arrows(u.obj_map[a]):
            if be in invB and be not in lifted:
                return (a, be)
    return None


def is_isofibration(u):
    return isofibration_witness(u) is None


def is_equivalence(u):
    return is_full_and_faithful(u) and essentially_surjective_witness(u) is None


def functor_flags(u):
    full, faithful, wit = full_faithful(u)
    ess = essentially_surjective_witness(u)
    if ess is not None:
        wit["essentially_surjective"] = ess
    inj = True
    seen = {}
    for x in u.dom.objects:
        y = u.obj_map[x]
        if y in seen:
            inj = False
            wit["injective_on_objects"] = (seen[y], x)
            break
        seen[y] = x
    image = set(u.obj_map.values())
    miss = next((y for y in u.cod.objects if y not in image), None)
    surj = miss is None
    iso = isofibration_witness(u)
    if iso is not None:
        wit["isofibration"] = iso
    equiv = full and faithful and ess is None
    if not equiv:
        wit["equivalence"] = next(k for k in ("full", "faithful", "essentially_surjective") if k in wit)
    se = equiv and surj
    if not se:
        wit["surjective_equivalence"] = wit.get("equivalence") or ("not surjective on objects", miss)
    return FunctorFlags(
        full=full,
        faithful=faithful,
        essentially_surjective=ess is None,
        injective_on_objects=inj,
        isofibration=iso is None,
        surjective_equivalence=se,
        equivalence=equiv,
        surjective_on_objects=surj,
        witnesses=wit,
    )

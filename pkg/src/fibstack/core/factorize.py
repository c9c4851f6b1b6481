"""Factorizations and lifting search in CAT.

Two weak factorization systems: (injective on objects, surjective
equivalence) and (injective-on-objects equivalence, isofibration).
"""

from __future__ import annotations

from ..errors import PreconditionViolated
from .category import Counter, FinCategory, Functor
from .constructions import IsoComma
from .category import identity_functor
from .search import iter_functors

COF_TRIVFIB = "cof_trivfib"
TRIVCOF_FIB = "trivcof_fib"

_ALIASES = {
    "cof_trivfib": COF_TRIVFIB, "cof": COF_TRIVFIB, "CofTrivFib": COF_TRIVFIB,
    "trivcof_fib": TRIVCOF_FIB, "trivcof": TRIVCOF_FIB, "TrivCofFib": TRIVCOF_FIB,
}


def system_name(system):
    try:
        return _ALIASES[system]
    except KeyError:
        raise ValueError(f"unknown factorization system {system!r}") from None


def glued_middle(u):
    """Objects ``Ob A + Ob B`` with every hom taken from ``B`` through ``r``.

    Returns ``(M, left, right)`` where ``left`` is injective on objects and
    ``right`` a surjective equivalence.
    """
    A, B = u.dom, u.cod
    objs = [("A", a) for a in A.objects] + [("B", b) for b in B.objects]

    def r(x):
        return u.obj_map[x[1]] if x[0] == "A" else x[1]

    arrows = {}
    for x in objs:
        for y in objs:
            for g in B.hom(r(x), r(y)):
                arrows[x, y, g] = (x, y)
    ident = {x: (x, x, B.identity(r(x))) for x in objs}

    def rule(f, g):
        return (f[0], g[1], B.then(f[2], g[2]))

    M = FinCategory(objs, arrows, ident, rule, name="glued")
    left = Functor(
        A, M, {a: ("A", a) for a in A.objects},
        {al: (("A", A.src(al)), ("A", A.tgt(al)), u.arr_map[al]) for al in A.arrows},
    )
    right = Functor(M, B, {x: r(x) for x in objs}, {f: f[2] for f in arrows})
    return M, left, right


def mapping_path(u, name=None):
    """``A -> iso_comma(u, id_B) -> B``: injective-on-objects equivalence, then isofibration."""
    A, B = u.dom, u.cod
    ic = IsoComma(u, identity_functor(B), name=name or "mapping_path")
    M = ic.category
    left = Functor(
        A, M,
        {a: (a, u.obj_map[a], B.identity(u.obj_map[a])) for a in A.objects},
        {
            al: (al, u.arr_map[al], B.identity(u.obj_map[A.src(al)]), B.identity(u.obj_map[A.tgt(al)]))
            for al in A.arrows
        },
    )
    return M, left, ic.proj2


def cat_factorize(u, system):
    """Factor ``u = right o left`` in the chosen system; returns ``(left, right)``."""
    system = system_name(system)
    if system == COF_TRIVFIB:
        _, left, right = glued_middle(u)
    else:
        _, left, right = mapping_path(u)
    return left, right


class Square:
    """A commuting square ``top: A -> X``, ``left: A -> B``, ``right: X -> Y``, ``bottom: B -> Y``."""

    def __init__(self, top, left, right, bottom):
        self.top, self.left, self.right, self.bottom = top, left, right, bottom

    def commutes(self):
        return self.top.then(self.right).key == self.left.then(self.bottom).key


def find_lift(square, arr_filter=None, counter=None):
    """A diagonal ``d: B -> X`` with ``d o left = top`` and ``right o d = bottom``, or None.

    ``arr_filter(beta, h)`` can reject candidate images (e.g. to require
    cartesian arrows go to cartesian arrows).
    """
    top, left, right, bottom = square.top, square.left, square.right, square.bottom
    if not square.commutes():
        raise PreconditionViolated("lifting problem does not commute")
    A, B, X = left.dom, left.cod, top.cod
    forced_obj = {}
    for a in A.objects:
        b = left.obj_map[a]
        x = top.obj_map[a]
        if forced_obj.setdefault(b, x) != x:
            return None
    forced_arr = {}
    for al in A.arrows:
        be = left.arr_map[al]
        h = top.arr_map[al]
        if forced_arr.setdefault(be, h) != h:
            return None
    fibre = {}
    for x in X.objects:
        fibre.setdefault(right.obj_map[x], []).append(x)

    def objs(b):
        y = bottom.obj_map[b]
        if b in forced_obj:
            x = forced_obj[b]
            return (x,) if right.obj_map[x] == y else ()
        return tuple(fibre.get(y, ()))

    def arrs(be, s, t):
        want = bottom.arr_map[be]
        if be in forced_arr:
            h = forced_arr[be]
            cands = (h,) if X.ends(h) == (s, t) else ()
        else:
            cands = X.hom(s, t)
        return [h for h in cands if right.arr_map[h] == want and (arr_filter is None or arr_filter(be, h))]

    for d in iter_functors(B, X, objs, arrs, counter or Counter("lifting search")):
        return d
    return None

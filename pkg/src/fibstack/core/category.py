"""Finite categories, functors and natural transformations.

A :class:`FinCategory` stores its composition as a total table (possibly
filled lazily from a rule for derived categories).  Identifiers may be any
hashable value; every enumeration is ordered by :func:`okey` so results are
reproducible.
"""

from __future__ import annotations

import contextvars
from collections import defaultdict
from contextlib import contextmanager

from ..errors import (
    AssociativityViolation,
    FunctorViolation,
    IdentityViolation,
    MissingComposite,
    SizeBudgetExceeded,
    UnknownObject,
    ValidationError,
)

DEFAULT_BUDGET = 10**7

_budget = contextvars.ContextVar("fibstack_budget", default=DEFAULT_BUDGET)


def get_budget():
    return _budget.get()


def set_budget(n):
    """Set the candidate cap for the current context; returns a reset token."""
    return _budget.set(int(n))


@contextmanager
def budget_limit(n):
    token = _budget.set(int(n))
    try:
        yield
    finally:
        _budget.reset(token)


class Counter:
    """Counts candidate maps tried by one enumeration."""

    __slots__ = ("n", "cap", "what")

    def __init__(self, what="enumeration", cap=None):
        self.n = 0
        self.cap = get_budget() if cap is None else cap
        self.what = what

    def tick(self, k=1):
        self.n += k
        if self.n > self.cap:
            raise SizeBudgetExceeded(f"{self.what} exceeded budget of {self.cap} candidates")


_OKEY_MEMO = {}
_OKEY_MEMO_MAX = 1 << 20


def okey(x):
    """Total, deterministic sort key over identifiers of mixed type."""
    t = type(x)
    if t is str:
        return (1, x)
    if t is int or t is bool:
        return (0, int(x))
    if t is tuple or t is frozenset:
        # composite ids share most of their parts, so keys are memoized
        k = _OKEY_MEMO.get(x)
        if k is None:
            if t is tuple:
                k = (2, tuple(okey(e) for e in x))
            else:
                k = (3, tuple(sorted(okey(e) for e in x)))
            if len(_OKEY_MEMO) >= _OKEY_MEMO_MAX:
                _OKEY_MEMO.clear()
            _OKEY_MEMO[x] = k
        return k
    if x is None:
        return (-1,)
    k = getattr(x, "sort_key", None)
    if k is not None:
        return (4, k)
    return (9, repr(x))


def osorted(xs):
    return sorted(xs, key=okey)


class FinCategory:
    """A finite category with explicit objects, arrows and composition.

    ``arrows`` maps an arrow id to ``(src, tgt)``; ``identities`` maps each
    object to its identity arrow; ``compose`` is either a mapping
    ``(first, second) -> result`` (``result = second o first``) or a callable
    with the same signature used to fill the table on demand.
    """

    def __init__(self, objects, arrows, identities, compose, name=None):
        self.name = name
        self.objects = tuple(osorted(set(objects)))
        self._objset = frozenset(self.objects)
        self._ends = dict(arrows)
        self.arrows = tuple(osorted(self._ends))
        self._id = dict(identities)
        self._idset = frozenset(self._id.values())
        if callable(compose):
            self._rule = compose
            self._table = {}
        else:
            self._rule = None
            self._table = dict(compose)
        hom = defaultdict(list)
        out = defaultdict(list)
        inn = defaultdict(list)
        for a in self.arrows:
            s, t = self._ends[a]
            hom[s, t].append(a)
            out[s].append(a)
            inn[t].append(a)
        self._hom = {k: tuple(v) for k, v in hom.items()}
        self._out = {k: tuple(v) for k, v in out.items()}
        self._in = {k: tuple(v) for k, v in inn.items()}
        self._inverse = None
        self._sig = None
        self._pairs = None

    # -- basic structure ---------------------------------------------------
    def __repr__(self):
        label = self.name or "FinCategory"
        return f"<{label}: {len(self.objects)} objects, {len(self.arrows)} arrows>"

    def __contains__(self, x):
        return x in self._objset

    def has_arrow(self, a):
        return a in self._ends

    def src(self, a):
        return self._ends[a][0]

    def tgt(self, a):
        return self._ends[a][1]

    def ends(self, a):
        return self._ends[a]

    def identity(self, x):
        try:
            return self._id[x]
        except KeyError:
            raise UnknownObject(x) from None

    def is_identity(self, a):
        return a in self._idset

    def hom(self, x, y):
        return self._hom.get((x, y), ())

    def out_arrows(self, x):
        return self._out.get(x, ())

    def in_arrows(self, y):
        return self._in.get(y, ())

    def then(self, f, g):
        """Diagrammatic composite: first ``f`` then ``g``."""
        if f in self._idset:
            return g
        if g in self._idset:
            return f
        key = (f, g)
        r = self._table.get(key)
        if r is None:
            if self._ends[f][1] != self._ends[g][0]:
                raise ValueError(f"arrows {f!r} and {g!r} are not composable")
            if self._rule is None:
                raise MissingComposite(f"no composite recorded for {key!r}", key)
            r = self._rule(f, g)
            self._table[key] = r
        return r

    def comp(self, *arrows):
        """Applicative composite ``comp(g, f) = g o f`` (any number of arrows)."""
        r = arrows[-1]
        for a in reversed(arrows[:-1]):
            r = self.then(r, a)
        return r

    @property
    def signature(self):
        if self._sig is None:
            self._sig = (self.objects, tuple((a, self._ends[a]) for a in self.arrows))
        return self._sig

    def composable_pairs(self):
        if self._pairs is None:
            self._pairs = tuple((f, g) for f in self.arrows for g in self.out_arrows(self.tgt(f)))
        return self._pairs

    # -- isomorphisms ------------------------------------------------------
    def inverses(self):
        """Mapping from every invertible arrow to its inverse."""
        if self._inverse is None:
            inv = {}
            for f in self.arrows:
                if f in inv:
                    continue
                s, t = self._ends[f]
                for g in self.hom(t, s):
                    if self.then(f, g) == self._id[s] and self.then(g, f) == self._id[t]:
                        inv[f] = g
                        inv[g] = f
                        break
            self._inverse = inv
        return self._inverse

    def is_iso(self, f):
        return f in self.inverses()

    def inverse(self, f):
        return self.inverses()[f]

    def isos(self, x, y):
        inv = self.inverses()
        return tuple(a for a in self.hom(x, y) if a in inv)

    def iso_classes(self):
        """Mapping object -> canonical representative of its isomorphism class."""
        parent = {x: x for x in self.objects}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for f in self.inverses():
            a, b = find(self.src(f)), find(self.tgt(f))
            if a != b:
                if okey(a) < okey(b):
                    parent[b] = a
                else:
                    parent[a] = b
        return {x: find(x) for x in self.objects}

    def is_groupoid(self):
        return len(self.inverses()) == len(self.arrows)

    # -- derived categories ------------------------------------------------
    def subcategory(self, objects, arrows, name=None):
        objects = set(objects)
        arrows = set(arrows) | {self._id[x] for x in objects}
        return FinCategory(
            objects,
            {a: self._ends[a] for a in arrows},
            {x: self._id[x] for x in objects},
            self.then,
            name=name,
        )

    def full_subcategory(self, objects, name=None):
        objects = set(objects)
        arrows = [a for a in self.arrows if self._ends[a][0] in objects and self._ends[a][1] in objects]
        return self.subcategory(objects, arrows, name=name)

    def check(self):
        """Exhaustively verify identity and associativity laws; raise on failure."""
        for x in self.objects:
            i = self._id.get(x)
            if i is None or self._ends.get(i) != (x, x):
                raise IdentityViolation(f"object {x!r} has no valid identity", x)
        for f in self.arrows:
            s, t = self._ends[f]
            for g in self.out_arrows(t):
                r = self._raw(f, g)
                if r is None:
                    raise MissingComposite(f"missing composite of {f!r} then {g!r}", (f, g))
                if self._ends.get(r) != (s, self.tgt(g)):
                    raise MissingComposite(f"composite of {f!r} then {g!r} has wrong ends", (f, g))
        for f in self.arrows:
            s, t = self._ends[f]
            if self._raw(self._id[s], f) != f or self._raw(f, self._id[t]) != f:
                raise IdentityViolation(f"identity law fails at {f!r}", f)
        for f, g in self.composable_pairs():
            fg = self._raw(f, g)
            for h in self.out_arrows(self.tgt(g)):
                if self._raw(fg, h) != self._raw(f, self._raw(g, h)):
                    raise AssociativityViolation(
                        f"associativity fails for ({f!r}, {g!r}, {h!r})", (f, g, h)
                    )
        return self

    def _raw(self, f, g):
        r = self._table.get((f, g))
        if r is None and self._rule is not None:
            r = self._rule(f, g)
            self._table[f, g] = r
        return r


# -- small named categories --------------------------------------------------


def discrete(objects, name=None):
    objects = list(objects)
    return FinCategory(
        objects,
        {("id", x): (x, x) for x in objects},
        {x: ("id", x) for x in objects},
        {},
        name=name,
    )


def empty_category():
    return FinCategory((), {}, {}, {}, name="empty")


def terminal():
    return FinCategory(["*"], {"1": ("*", "*")}, {"*": "1"}, {("1", "1"): "1"}, name="*")


def poset_category(elements, leq, name=None):
    """The category of a finite preorder; ``leq`` is a set of pairs or a callable.

    The arrow ``x -> y`` (for ``x <= y``) has id ``(x, y)``.
    """
    elements = list(elements)
    rel = leq if callable(leq) else (lambda a, b, _s=set(leq): a == b or (a, b) in _s)
    arrows = {(a, b): (a, b) for a in elements for b in elements if a == b or rel(a, b)}
    for (a, b) in arrows:
        for c in elements:
            if (b, c) in arrows and (a, c) not in arrows:
                raise ValidationError(f"relation is not transitive at {(a, b, c)!r}", (a, b, c))
    ident = {a: (a, a) for a in elements}

    def rule(f, g):
        return (f[0], g[1])

    return FinCategory(elements, arrows, ident, rule, name=name)


def arrow_category():
    """The walking arrow 2 = {0 -> 1}."""
    return poset_category([0, 1], {(0, 1)}, name="2")


def iso_groupoid():
    """J: two objects and one isomorphism between them."""
    arrows = {"1_0": (0, 0), "1_1": (1, 1), "j": (0, 1), "j'": (1, 0)}
    table = {
        ("1_0", "1_0"): "1_0", ("1_1", "1_1"): "1_1",
        ("1_0", "j"): "j", ("j", "1_1"): "j", ("1_1", "j'"): "j'", ("j'", "1_0"): "j'",
        ("j", "j'"): "1_0", ("j'", "j"): "1_1",
    }
    return FinCategory([0, 1], arrows, {0: "1_0", 1: "1_1"}, table, name="J")


def parallel_pair():
    """Two objects with two parallel arrows a, b: 0 -> 1."""
    arrows = {"1_0": (0, 0), "1_1": (1, 1), "a": (0, 1), "b": (0, 1)}
    table = {("1_0", "1_0"): "1_0", ("1_1", "1_1"): "1_1", ("1_0", "a"): "a", ("a", "1_1"): "a",
             ("1_0", "b"): "b", ("b", "1_1"): "b"}
    return FinCategory([0, 1], arrows, {0: "1_0", 1: "1_1"}, table, name="P")


# -- functors and natural transformations ------------------------------------


class Functor:
    """A functor between finite categories given by object and arrow maps."""

    __slots__ = ("dom", "cod", "obj_map", "arr_map", "_key", "_hash", "_skey")

    def __init__(self, dom, cod, obj_map, arr_map):
        self.dom = dom
        self.cod = cod
        self.obj_map = obj_map
        self.arr_map = arr_map
        self._key = None
        self._hash = None
        self._skey = None

    def obj(self, x):
        return self.obj_map[x]

    def arr(self, a):
        return self.arr_map[a]

    __call__ = obj

    @property
    def key(self):
        if self._key is None:
            om, am = self.obj_map, self.arr_map
            self._key = (
                tuple(om[x] for x in self.dom.objects),
                tuple(am[a] for a in self.dom.arrows),
            )
        return self._key

    @property
    def sort_key(self):
        if self._skey is None:
            self._skey = okey(self.key)
        return self._skey

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Functor):
            return NotImplemented
        return self.key == other.key and (self.dom is other.dom or self.dom.signature == other.dom.signature)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        items = ", ".join(f"{x!r}->{self.obj_map[x]!r}" for x in self.dom.objects[:6])
        more = ", ..." if len(self.dom.objects) > 6 else ""
        return f"Functor({items}{more})"

    def then(self, other):
        """Diagrammatic composite: ``self`` followed by ``other``."""
        return Functor(
            self.dom,
            other.cod,
            {x: other.obj_map[y] for x, y in self.obj_map.items()},
            {a: other.arr_map[b] for a, b in self.arr_map.items()},
        )

    def restrict(self, sub):
        """Restriction to a subcategory ``sub`` of the domain."""
        return Functor(
            sub,
            self.cod,
            {x: self.obj_map[x] for x in sub.objects},
            {a: self.arr_map[a] for a in sub.arrows},
        )

    def check(self):
        """Exhaustively verify the functor laws; raise FunctorViolation on failure."""
        A, B = self.dom, self.cod
        for x in A.objects:
            if self.obj_map.get(x) not in B:
                raise FunctorViolation(f"object {x!r} has no valid image", x)
            if self.arr_map.get(A.identity(x)) != B.identity(self.obj_map[x]):
                raise FunctorViolation(f"identity of {x!r} not preserved", x)
        for a in A.arrows:
            b = self.arr_map.get(a)
            if b is None or not B.has_arrow(b):
                raise FunctorViolation(f"arrow {a!r} has no valid image", a)
            s, t = A.ends(a)
            if B.ends(b) != (self.obj_map[s], self.obj_map[t]):
                raise FunctorViolation(f"arrow {a!r} image has wrong ends", a)
        for f, g in A.composable_pairs():
            if self.arr_map[A.then(f, g)] != B.then(self.arr_map[f], self.arr_map[g]):
                raise FunctorViolation(f"composition of {f!r} then {g!r} not preserved", (f, g))
        return self


def identity_functor(A):
    return Functor(A, A, {x: x for x in A.objects}, {a: a for a in A.arrows})


def inclusion(sub, A):
    return Functor(sub, A, {x: x for x in sub.objects}, {a: a for a in sub.arrows})


def constant_functor(A, B, b):
    ib = B.identity(b)
    return Functor(A, B, {x: b for x in A.objects}, {a: ib for a in A.arrows})


def to_terminal(A, T=None):
    T = T or terminal()
    return constant_functor(A, T, T.objects[0])


class NatTrans:
    """A natural transformation ``src => tgt`` given by its components."""

    __slots__ = ("src", "tgt", "components", "_key", "_hash", "_skey")

    def __init__(self, src, tgt, components):
        self.src = src
        self.tgt = tgt
        self.components = components
        self._key = None
        self._hash = None
        self._skey = None

    @property
    def key(self):
        if self._key is None:
            self._key = (self.src.key, self.tgt.key, tuple(self.components[x] for x in self.src.dom.objects))
        return self._key

    @property
    def sort_key(self):
        if self._skey is None:
            self._skey = okey(self.key)
        return self._skey

    def __getitem__(self, x):
        return self.components[x]

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, NatTrans):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"NatTrans({self.components!r})"

    def check(self):
        B = self.src.cod
        for x in self.src.dom.objects:
            c = self.components[x]
            if B.ends(c) != (self.src.obj_map[x], self.tgt.obj_map[x]):
                raise FunctorViolation(f"component at {x!r} has wrong ends", x)
        for a in self.src.dom.arrows:
            s, t = self.src.dom.ends(a)
            lhs = B.then(self.components[s], self.tgt.arr_map[a])
            rhs = B.then(self.src.arr_map[a], self.components[t])
            if lhs != rhs:
                raise FunctorViolation(f"naturality fails at {a!r}", a)
        return self


def identity_nat(F):
    return NatTrans(F, F, {x: F.cod.identity(F.obj_map[x]) for x in F.dom.objects})


def vertical_compose(alpha, beta):
    """``alpha: F => G`` then ``beta: G => H``."""
    B = alpha.src.cod
    return NatTrans(
        alpha.src,
        beta.tgt,
        {x: B.then(alpha.components[x], beta.components[x]) for x in alpha.src.dom.objects},
    )

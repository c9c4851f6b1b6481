"""Sieves and Grothendieck topologies on a finite category.

A sieve on ``S`` is stored as the frozenset of its arrows (all with target
``S``).  Topologies obey the usual three axioms: the maximal sieve covers,
covers are stable under pullback, and a sieve that covers locally along a
cover is itself a cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from .core.category import Counter, okey, osorted
from .errors import AxiomViolation, UnknownObject, ValidationError


@dataclass(frozen=True)
class Sieve:
    base_object: object
    arrows: frozenset

    @property
    def sort_key(self):
        return (okey(self.base_object), len(self.arrows), okey(frozenset(self.arrows)))

    def __len__(self):
        return len(self.arrows)

    def __contains__(self, f):
        return f in self.arrows

    def __iter__(self):
        return iter(osorted(self.arrows))

    def __repr__(self):
        return f"Sieve({self.base_object!r}, {osorted(self.arrows)!r})"


@dataclass(frozen=True)
class CoveringFamily:
    target: object
    members: tuple

    def __repr__(self):
        return f"Family({self.target!r}: {list(self.members)!r})"


def is_sieve(E, S, arrows):
    arrows = frozenset(arrows)
    for f in arrows:
        if E.tgt(f) != S:
            return False
        for g in E.in_arrows(E.src(f)):
            if E.then(g, f) not in arrows:
                return False
    return True


def generated_sieve(E, S, family):
    """The smallest sieve on ``S`` containing every arrow of ``family``."""
    out = set()
    for m in family:
        if E.tgt(m) != S:
            raise ValidationError(f"arrow {m!r} does not end at {S!r}", m)
        for g in E.in_arrows(E.src(m)):
            out.add(E.then(g, m))
    return Sieve(S, frozenset(out))


def maximal_sieve(E, S):
    return Sieve(S, frozenset(E.in_arrows(S)))


def pullback_sieve(E, R, g):
    """``g*R = {h : h then g in R}`` for ``g: T -> S``."""
    T = E.src(g)
    arrows = R.arrows if isinstance(R, Sieve) else R
    return Sieve(T, frozenset(h for h in E.in_arrows(T) if E.then(h, g) in arrows))


def all_sieves(E, S, counter=None):
    """Every sieve on ``S`` (downward closed subsets of the arrows into ``S``)."""
    counter = counter or Counter("sieve enumeration")
    arrows = list(E.in_arrows(S))
    # closure of each arrow; a sieve is a union of principal sieves
    principal = {f: generated_sieve(E, S, [f]).arrows for f in arrows}
    found = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for f in arrows:
                if f in s:
                    continue
                counter.tick()
                t = s | principal[f]
                if t not in found:
                    found.add(t)
                    nxt.append(t)
        frontier = nxt
    return sorted((Sieve(S, a) for a in found), key=okey)


class SiteTopology:
    """A finite category with a Grothendieck topology ``covers[S]``.

    ``families`` (pretopology mode) keeps the generating covering families.
    """

    def __init__(self, base, covers, families=None, name=None, check=True):
        self.base = base
        self.covers = {S: frozenset(covers.get(S, ())) for S in base.objects}
        self.families = families
        self.name = name
        self._cover_sets = {S: frozenset(R.arrows for R in rs) for S, rs in self.covers.items()}
        self._induced = {}
        if check:
            verify_axioms(self)

    def __repr__(self):
        n = sum(len(v) for v in self.covers.values())
        return f"<Site {self.name or ''}: {len(self.base.objects)} objects, {n} covering sieves>"

    def is_cover(self, S, arrows):
        if isinstance(arrows, Sieve):
            arrows = arrows.arrows
        return frozenset(arrows) in self._cover_sets[S]

    def refinements(self, S):
        if S not in self.base:
            raise UnknownObject(S)
        return sorted(self.covers[S], key=okey)

    @property
    def pretopology(self):
        return self.families is not None

    @cached_property
    def all_sieves(self):
        return {S: all_sieves(self.base, S) for S in self.base.objects}

    def covering_families(self, S):
        """All families of arrows into ``S`` (as sorted tuples) whose sieve covers ``S``."""
        arrows = [f for f in self.base.in_arrows(S)]
        out = []
        for k in range(len(arrows) + 1):
            for fam in combinations(arrows, k):
                if self.is_cover(S, generated_sieve(self.base, S, fam)):
                    out.append(CoveringFamily(S, fam))
        return out


def verify_axioms(T):
    """Raise AxiomViolation if the topology breaks an axiom; return it otherwise."""
    E = T.base
    for S in E.objects:
        if not T.covers[S]:
            raise AxiomViolation("empty", f"no covering sieve on {S!r}", S)
        for R in T.covers[S]:
            if R.base_object != S or not is_sieve(E, S, R.arrows):
                raise AxiomViolation("sieve", f"{R!r} is not a sieve on {S!r}", R)
        if not T.is_cover(S, maximal_sieve(E, S)):
            raise AxiomViolation("maximal", f"the maximal sieve on {S!r} does not cover", S)
    for S in E.objects:
        for R in T.refinements(S):
            for g in E.in_arrows(S):
                if not T.is_cover(E.src(g), pullback_sieve(E, R, g)):
                    raise AxiomViolation("stability", f"pullback of {R!r} along {g!r} does not cover", (R, g))
    for S in E.objects:
        for R2 in T.all_sieves[S]:
            if T.is_cover(S, R2):
                continue
            for R in T.refinements(S):
                if all(T.is_cover(E.src(f), pullback_sieve(E, R2, f)) for f in R.arrows):
                    raise AxiomViolation(
                        "transitivity", f"{R2!r} covers locally along {R!r} but is not a cover", (R2, R)
                    )
    return T


def _saturate(E, covers):
    sieves = {S: all_sieves(E, S) for S in E.objects}
    changed = True
    while changed:
        changed = False
        for S in E.objects:
            for R in list(covers[S]):
                for g in E.in_arrows(S):
                    P = pullback_sieve(E, R, g)
                    if P.arrows not in covers[E.src(g)]:
                        covers[E.src(g)].add(P.arrows)
                        changed = True
        for S in E.objects:
            for R2 in sieves[S]:
                if R2.arrows in covers[S]:
                    continue
                for R in list(covers[S]):
                    if all(pullback_sieve(E, R2, f).arrows in covers[E.src(f)] for f in R):
                        covers[S].add(R2.arrows)
                        changed = True
                        break
    return {S: [Sieve(S, a) for a in v] for S, v in covers.items()}


def generate_topology(E, families, name=None):
    """Smallest topology in which every family (``S -> [arrows]``) covers."""
    covers = {S: {maximal_sieve(E, S).arrows} for S in E.objects}
    fams = {S: [] for S in E.objects}
    for S, fs in families.items():
        for fam in fs:
            fam = tuple(fam)
            covers[S].add(generated_sieve(E, S, fam).arrows)
            fams[S].append(CoveringFamily(S, fam))
    return SiteTopology(E, _saturate(E, covers), families=fams, name=name)


def discrete_topology(E, name="discrete"):
    """Only maximal sieves cover."""
    fams = {S: [CoveringFamily(S, (E.identity(S),))] for S in E.objects}
    return SiteTopology(E, {S: [maximal_sieve(E, S)] for S in E.objects}, families=fams, name=name)


def coarse_topology(E, name="coarse"):
    """Every sieve covers, the empty one included."""
    fams = {S: [CoveringFamily(S, ())] for S in E.objects}
    return SiteTopology(E, {S: all_sieves(E, S) for S in E.objects}, families=fams, name=name)


def sieve_topology(E, covers, name=None):
    """Explicit mode: ``covers`` maps objects to lists of arrow lists, each a full sieve."""
    out = {}
    for S, rs in covers.items():
        if S not in E:
            raise UnknownObject(S)
        out[S] = [Sieve(S, frozenset(r)) for r in rs]
    return SiteTopology(E, out, name=name)


def validate_topology(E, raw, name=None):
    mode = raw.get("mode", "sieves")
    covers = raw.get("covers", {})
    if mode == "sieves":
        return sieve_topology(E, covers, name=name)
    if mode == "pretopology":
        return generate_topology(E, covers, name=name)
    raise ValidationError(f"unknown topology mode {mode!r}", mode)


def induced_topology(T, S):
    """The topology on the total category of ``E_/S`` transported from ``E``.

    A sieve on ``f: U -> S`` is a set of slice arrows ``(g, f)``; it covers iff
    ``{g}`` covers ``U``.
    """
    hit = T._induced.get(S)
    if hit is not None:
        return hit
    from .fibred import slice_fib

    E = T.base
    C = slice_fib(E, S).total
    covers = {}
    for f in C.objects:
        covers[f] = [Sieve(f, frozenset((g, f) for g in R.arrows)) for R in T.covers[E.src(f)]]
    out = SiteTopology(C, covers, name=f"{T.name}/{S!r}", check=False)
    T._induced[S] = out
    return out


# -- local injectivity / surjectivity -----------------------------------------------


def equalizing_sieve(P, T, p, q):
    E = P.base
    return frozenset(g for g in E.in_arrows(T) if P.restrict(g, p) == P.restrict(g, q))


def locally_injective_witness(phi, top):
    P = phi.src
    for T in P.base.objects:
        vals = P.values[T]
        for i, p in enumerate(vals):
            for q in vals[i + 1:]:
                if phi(T, p) == phi(T, q) and not top.is_cover(T, equalizing_sieve(P, T, p, q)):
                    return (T, p, q)
    return None


def locally_surjective_witness(phi, top):
    Q = phi.tgt
    E = Q.base
    images = {T: {phi(T, p) for p in phi.src.values[T]} for T in E.objects}
    for T in E.objects:
        for q in Q.values[T]:
            sieve = frozenset(g for g in E.in_arrows(T) if Q.restrict(g, q) in images[E.src(g)])
            if not top.is_cover(T, sieve):
                return (T, q)
    return None


def is_locally_injective(phi, top):
    return locally_injective_witness(phi, top) is None


def is_locally_surjective(phi, top):
    return locally_surjective_witness(phi, top) is None


def is_local_iso(phi, top):
    return is_locally_injective(phi, top) and is_locally_surjective(phi, top)


def sieve_to_fib(E, R):
    """The full subcategory of ``E_/S`` on the arrows of ``R``, with its inclusion map."""
    from .fibred import FibMap, FibredCategory, _base_cache, slice_fib
    from .core.category import inclusion

    cache = _base_cache(E)
    key = ("sieve", R)
    if key in cache:
        return cache[key]
    sl = slice_fib(E, R.base_object)
    C = sl.total.full_subcategory(R.arrows, name=f"R{osorted(R.arrows)!r}")
    proj = sl.proj.restrict(C)
    F = FibredCategory(C, E, proj, name=C.name, cartesian=lambda a: True, cleavage=lambda y, g: (g, y))
    out = (F, FibMap(F, sl, inclusion(C, sl.total)))
    cache[key] = out
    return out

"""Standard constructions on finite categories.

Functor categories, maximal groupoids, products, strict pullbacks,
iso-commas, coproducts and finitely presented categories (used for
pushouts, which need not be finite: presentations are enumerated under the
candidate budget).
"""

from __future__ import annotations

from ..errors import PreconditionViolated, SizeBudgetExceeded
from .category import Counter, FinCategory, Functor
from .search import functor_category_from, iter_functors


def functor_category(A, B, counter=None):
    """The category ``[A, B]`` of functors and natural transformations."""
    counter = counter or Counter("functor category")
    functors = list(iter_functors(A, B, counter=counter))
    return functor_category_from(functors, A, B, counter=counter, name=f"[{A.name},{B.name}]")


def maximal_groupoid(A):
    """Same objects as ``A``; only the invertible arrows."""
    inv = A.inverses()
    arrows = [a for a in A.arrows if a in inv]
    return A.subcategory(A.objects, arrows, name=f"max({A.name})")


def product(A, B, name=None):
    objs = [(a, b) for a in A.objects for b in B.objects]
    arrows = {(f, g): ((A.src(f), B.src(g)), (A.tgt(f), B.tgt(g))) for f in A.arrows for g in B.arrows}
    ident = {(a, b): (A.identity(a), B.identity(b)) for a, b in objs}

    def rule(x, y):
        return (A.then(x[0], y[0]), B.then(x[1], y[1]))

    P = FinCategory(objs, arrows, ident, rule, name=name or f"{A.name}x{B.name}")
    p1 = Functor(P, A, {o: o[0] for o in objs}, {a: a[0] for a in arrows})
    p2 = Functor(P, B, {o: o[1] for o in objs}, {a: a[1] for a in arrows})
    return P, p1, p2


def strict_pullback(u, v, name=None):
    """``A x_C B`` for ``u: A -> C`` and ``v: B -> C`` with its two projections."""
    A, B = u.dom, v.dom
    by_img = {}
    for b in B.objects:
        by_img.setdefault(v.obj_map[b], []).append(b)
    objs = [(a, b) for a in A.objects for b in by_img.get(u.obj_map[a], ())]
    arr_by_img = {}
    for g in B.arrows:
        arr_by_img.setdefault(v.arr_map[g], []).append(g)
    arrows = {}
    for f in A.arrows:
        for g in arr_by_img.get(u.arr_map[f], ()):
            arrows[f, g] = ((A.src(f), B.src(g)), (A.tgt(f), B.tgt(g)))
    ident = {(a, b): (A.identity(a), B.identity(b)) for a, b in objs}

    def rule(x, y):
        return (A.then(x[0], y[0]), B.then(x[1], y[1]))

    P = FinCategory(objs, arrows, ident, rule, name=name)
    p1 = Functor(P, A, {o: o[0] for o in objs}, {a: a[0] for a in arrows})
    p2 = Functor(P, B, {o: o[1] for o in objs}, {a: a[1] for a in arrows})
    return P, p1, p2


def coproduct(cats, name=None):
    """Disjoint union of a mapping ``tag -> category``; ids become ``(tag, id)``."""
    objs = []
    arrows = {}
    ident = {}
    for tag, C in cats.items():
        for x in C.objects:
            objs.append((tag, x))
            ident[tag, x] = (tag, C.identity(x))
        for a in C.arrows:
            s, t = C.ends(a)
            arrows[tag, a] = ((tag, s), (tag, t))

    def rule(f, g):
        return (f[0], cats[f[0]].then(f[1], g[1]))

    return FinCategory(objs, arrows, ident, rule, name=name)


class IsoComma:
    """Iso-comma category of ``u: A -> C`` and ``v: B -> C`` with projections.

    Objects are triples ``(a, b, theta)`` with ``theta: u(a) -> v(b)`` an
    isomorphism of ``C``; arrows are ``(alpha, beta, theta, theta')``.
    """

    def __init__(self, u, v, vertical=None, name=None):
        A, B, C = u.dom, v.dom, u.cod
        objs = []
        for a in A.objects:
            for b in B.objects:
                for th in C.isos(u.obj_map[a], v.obj_map[b]):
                    if vertical is None or vertical(th):
                        objs.append((a, b, th))
        at = {}
        for o in objs:
            at.setdefault((o[0], o[1]), []).append(o)
        arrows = {}
        for (a, b, th) in objs:
            for al in A.out_arrows(a):
                ua = u.arr_map[al]
                for be in B.out_arrows(b):
                    rhs = C.then(th, v.arr_map[be])
                    for o2 in at.get((A.tgt(al), B.tgt(be)), ()):
                        if C.then(ua, o2[2]) == rhs:
                            arrows[al, be, th, o2[2]] = ((a, b, th), o2)
        ident = {o: (A.identity(o[0]), B.identity(o[1]), o[2], o[2]) for o in objs}

        def rule(x, y):
            return (A.then(x[0], y[0]), B.then(x[1], y[1]), x[2], y[3])

        self.category = FinCategory(objs, arrows, ident, rule, name=name or "iso_comma")
        P = self.category
        self.proj1 = Functor(P, A, {o: o[0] for o in objs}, {f: f[0] for f in arrows})
        self.proj2 = Functor(P, B, {o: o[1] for o in objs}, {f: f[1] for f in arrows})
        self.u, self.v = u, v


def iso_comma(u, v, name=None):
    """Return ``(category, proj1, proj2)`` for the iso-comma of ``u`` and ``v``."""
    if u.cod.signature != v.cod.signature:
        raise PreconditionViolated("iso_comma needs functors with a common codomain")
    ic = IsoComma(u, v, name=name)
    return ic.category, ic.proj1, ic.proj2


# -- finitely presented categories -------------------------------------------


class _Enumeration:
    """Right-regular enumeration of ``Hom(a, -)`` for one source object ``a``."""

    def __init__(self, a, gens_from, rels_at, counter):
        self.gens_from = gens_from
        self.rels_at = rels_at
        self.counter = counter
        self.parent = [0]
        self.target = [a]
        self.word = [()]
        self.edges = [{}]

    def find(self, n):
        p = self.parent
        while p[n] != n:
            p[n] = p[p[n]]
            n = p[n]
        return n

    def new(self, n, g, t):
        self.counter.tick()
        m = len(self.parent)
        self.parent.append(m)
        self.target.append(t)
        self.word.append(self.word[n] + (g,))
        self.edges.append({})
        self.edges[n][g] = m
        return m

    def step(self, n, g, t):
        n = self.find(n)
        m = self.edges[n].get(g)
        if m is None:
            return self.new(n, g, t)
        return self.find(m)

    def trace(self, n, word, tgt_of):
        for g in word:
            n = self.step(n, g, tgt_of[g])
        return n

    def merge(self, p, q):
        queue = [(p, q)]
        while queue:
            p, q = queue.pop()
            p, q = self.find(p), self.find(q)
            if p == q:
                continue
            if q < p:
                p, q = q, p
            self.parent[q] = p
            for g, m in self.edges[q].items():
                mp = self.edges[p].get(g)
                if mp is None:
                    self.edges[p][g] = m
                else:
                    queue.append((mp, m))
            self.edges[q] = {}

    def run(self, tgt_of):
        i = 0
        while i < len(self.parent):
            if self.find(i) == i:
                x = self.target[i]
                for w1, w2 in self.rels_at.get(x, ()):
                    e1 = self.trace(i, w1, tgt_of)
                    e2 = self.trace(self.find(i), w2, tgt_of)
                    if e1 != e2:
                        self.merge(e1, e2)
                    if self.find(i) != i:
                        break
                if self.find(i) == i:
                    for g in self.gens_from.get(x, ()):
                        self.step(i, g, tgt_of[g])
            i += 1
        return [n for n in range(len(self.parent)) if self.find(n) == n]


def present_category(objects, generators, relations, arrow_name=None, counter=None, name=None):
    """The category presented by generators and relations.

    ``generators`` maps a generator to ``(src, tgt)``; ``relations`` is a list
    of ``(src, word1, word2)`` with words as tuples of generators in
    diagrammatic order.  Returns ``(category, trace)`` where
    ``trace(src, word)`` gives the arrow a word denotes.  Infinite results
    exhaust the budget and raise SizeBudgetExceeded.
    """
    counter = counter or Counter("presentation")
    gens_from = {}
    for g, (s, t) in generators.items():
        gens_from.setdefault(s, []).append(g)
    tgt_of = {g: t for g, (s, t) in generators.items()}
    rels_at = {}
    for s, w1, w2 in relations:
        rels_at.setdefault(s, []).append((tuple(w1), tuple(w2)))
    enums = {}
    for a in objects:
        e = _Enumeration(a, gens_from, rels_at, counter)
        e.run(tgt_of)
        enums[a] = e
    names = {}
    arrows = {}
    ident = {}
    for a, e in enums.items():
        for n in range(len(e.parent)):
            if e.find(n) != n:
                continue
            w = e.word[n]
            nm = arrow_name(a, w) if arrow_name else (a, w)
            names[a, n] = nm
            arrows[nm] = (a, e.target[n])
        ident[a] = names[a, 0]
    info = {nm: (a, n) for (a, n), nm in names.items()}

    def trace(a, word):
        e = enums[a]
        return names[a, e.find(e.trace(0, tuple(word), tgt_of))]

    def rule(f, g):
        a, n = info[f]
        b, m = info[g]
        e = enums[a]
        end = e.find(e.trace(n, enums[b].word[m], tgt_of))
        return names[a, end]

    return FinCategory(objects, arrows, ident, rule, name=name), trace


def pushout(u, v, counter=None, name=None):
    """Pushout ``G u_F H`` of ``u: F -> G`` (injective on objects) and ``v: F -> H``.

    Objects are ``('H', y)`` for ``y`` in ``H`` and ``('G', x)`` for ``x`` in
    ``G`` outside the image of ``u``.  Returns ``(P, iG, iH)``.
    """
    F, G, H = u.dom, u.cod, v.cod
    pre = {}
    for z in F.objects:
        x = u.obj_map[z]
        if x in pre and v.obj_map[pre[x]] != v.obj_map[z]:
            raise PreconditionViolated("pushout needs u injective on objects")
        pre[x] = z
    if len(pre) != len(F.objects):
        raise PreconditionViolated("pushout needs u injective on objects")

    def rG(x):
        return ("H", v.obj_map[pre[x]]) if x in pre else ("G", x)

    objects = [("H", y) for y in H.objects] + [("G", x) for x in G.objects if x not in pre]
    gens = {}
    for h in H.arrows:
        if not H.is_identity(h):
            gens["H", h] = (("H", H.src(h)), ("H", H.tgt(h)))
    for g in G.arrows:
        if not G.is_identity(g):
            gens["G", g] = (rG(G.src(g)), rG(G.tgt(g)))

    def w(tag, C, a):
        return () if C.is_identity(a) else ((tag, a),)

    rels = []
    for C, tag, obj in ((H, "H", lambda y: ("H", y)), (G, "G", rG)):
        for f, g in C.composable_pairs():
            if C.is_identity(f) or C.is_identity(g):
                continue
            rels.append((obj(C.src(f)), ((tag, f), (tag, g)), w(tag, C, C.then(f, g))))
    for phi in F.arrows:
        if F.is_identity(phi):
            continue
        rels.append((rG(G.src(u.arr_map[phi])), w("G", G, u.arr_map[phi]), w("H", H, v.arr_map[phi])))

    def arrow_name(a, word):
        if not word:
            return ("id", a)
        if len(word) == 1:
            return word[0]
        return ("path",) + word

    try:
        P, trace = present_category(objects, gens, rels, arrow_name, counter, name=name)
    except SizeBudgetExceeded:
        raise SizeBudgetExceeded("pushout is infinite or exceeds the budget") from None
    iH = Functor(
        H, P, {y: ("H", y) for y in H.objects}, {h: trace(("H", H.src(h)), w("H", H, h)) for h in H.arrows}
    )
    iG = Functor(G, P, {x: rG(x) for x in G.objects}, {g: trace(rG(G.src(g)), w("G", G, g)) for g in G.arrows})
    return P, iG, iH


def induced_from_pushout(P, iG, iH, a, b):
    """The functor ``P -> K`` induced by ``a: G -> K`` and ``b: H -> K``."""
    K = a.cod
    om = {}
    for x, px in iG.obj_map.items():
        om[px] = a.obj_map[x]
    for y, py in iH.obj_map.items():
        om[py] = b.obj_map[y]
    am = {}
    for g, pg in iG.arr_map.items():
        am.setdefault(pg, a.arr_map[g])
    for h, ph in iH.arr_map.items():
        am.setdefault(ph, b.arr_map[h])
    for f in P.arrows:
        if f in am:
            continue
        if isinstance(f, tuple) and f and f[0] == "path":
            r = None
            for tag, g in f[1:]:
                img = a.arr_map[g] if tag == "G" else b.arr_map[g]
                r = img if r is None else K.then(r, img)
            am[f] = r
        elif isinstance(f, tuple) and f and f[0] == "id":
            am[f] = K.identity(om[f[1]])
    return Functor(P, K, om, am)


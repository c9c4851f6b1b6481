"""Deterministic test corpora: small poset sites with presheaves, fibred categories and maps.

Every map carries the flags that hold for it by construction (``declared``);
the axiom suite compares them with the decision procedures.  A negative
control copies a corpus and flips some declared flags.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass, field

from .core.category import (
    FinCategory,
    Functor,
    arrow_category,
    discrete,
    identity_functor,
    poset_category,
    terminal,
)
from .core.search import iter_functors
from .documents import (
    catpresheaf_doc,
    dumps,
    fibmap_doc,
    fibred_doc,
    load_catpresheaf,
    load_fibmap,
    load_fibred,
    load_presheaf,
    load_site,
    presheaf_doc,
    read_document,
    site_doc,
    write_document,
)
from .errors import FunctorViolation, ValidationError
from .fibred import FibMap, FibredCategory, base_as_fibred, slice_fib
from .groth import counit_v, grothendieck, grothendieck_map, sections_fibred
from .presheaf import (
    CatPresheaf,
    PresheafMap,
    SetPresheaf,
    discrete_presheaf,
    sheafify,
    terminal_presheaf,
)
from .site import (
    coarse_topology,
    discrete_topology,
    generate_topology,
    maximal_sieve,
    sieve_to_fib,
    sieve_topology,
)

ALL_FLAGS = ("cartesian", "E_equivalence", "isofibration", "cofibration", "trivial_fibration",
             "property_P", "c_local_fibration", "bicovering")
DEFAULT_CAPS = (4, 2)


@dataclass
class CorpusMap:
    map: FibMap
    dom: str
    cod: str
    declared: dict = field(default_factory=dict)
    test: bool = False


@dataclass
class SiteEntry:
    name: str
    site: object
    fibred: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    presheaves: dict = field(default_factory=dict)
    catpresheaves: dict = field(default_factory=dict)
    champ_maps: list = field(default_factory=list)

    def test_maps(self):
        return [(n, m.map) for n, m in self.maps.items() if m.test]

    def add_fibred(self, name, F):
        F.name = name
        self.fibred[name] = F
        return F

    def add_map(self, name, fmap, dom, cod, declared=(), test=False):
        assert fmap.dom is self.fibred[dom] and fmap.cod is self.fibred[cod], name
        fmap.name = name
        self.maps[name] = CorpusMap(fmap, dom, cod, dict(declared), test)


# -- sites -------------------------------------------------------------------------


def _push():
    return poset_category(["W", "U", "V", "S"], {("W", "U"), ("W", "V"), ("U", "S"), ("V", "S"), ("W", "S")},
                          name="PUSH")


def site_specs():
    """Named sites, each a poset with at most four objects."""
    E = _push()
    chain = poset_category(["0", "1", "2"], {("0", "1"), ("1", "2"), ("0", "2")}, name="chain")
    two = poset_category(["0", "1"], {("0", "1")}, name="2")
    vee = poset_category(["a", "b", "c"], {("a", "c"), ("b", "c")}, name="vee")
    pair = poset_category(["p", "q"], set(), name="pair")
    return {
        "push": lambda: generate_topology(E, {"S": [[("U", "S"), ("V", "S")]]}, name="push"),
        "push-trivial": lambda: discrete_topology(_push(), name="push-trivial"),
        "chain": lambda: generate_topology(chain, {"2": [[("1", "2")]], "1": [[("0", "1")]]}, name="chain"),
        "two-empty": lambda: generate_topology(two, {"1": [[]]}, name="two-empty"),
        "vee": lambda: generate_topology(vee, {"c": [[("a", "c"), ("b", "c")]]}, name="vee"),
        "pair-coarse": lambda: coarse_topology(pair, name="pair-coarse"),
        "push-sieves": lambda: _as_sieves(generate_topology(
            _push(), {"S": [[("U", "S"), ("V", "S")]], "U": [[("W", "U")]]}), "push-sieves"),
    }


def _as_sieves(top, name):
    """The same topology, described only by its covering sieves."""
    covers = {S: [list(R.arrows) for R in top.refinements(S)] for S in top.base.objects}
    return sieve_topology(top.base, covers, name=name)


# -- random presheaves ----------------------------------------------------------------


def _decompose(E, f):
    """A factorization ``f = g then h`` through non-identity arrows, or None."""
    T, S = E.ends(f)
    for g in E.out_arrows(T):
        if E.is_identity(g) or E.tgt(g) == S:
            continue
        for h in E.hom(E.tgt(g), S):
            if not E.is_identity(h) and E.then(g, h) == f:
                return g, h
    return None


def _generators(E):
    return [f for f in E.arrows if not E.is_identity(f) and _decompose(E, f) is None]


def _extend(E, gens, compose):
    """Restrictions along every arrow from those along the generating arrows."""
    out = dict(gens)

    def get(f):
        if f not in out:
            g, h = _decompose(E, f)
            out[f] = compose(get(h), get(g))
        return out[f]

    for f in E.arrows:
        if not E.is_identity(f):
            get(f)
    return out


def random_presheaf(E, rng, max_values=2, tries=200, name=None):
    """A set presheaf with at most ``max_values`` elements per object, by rejection sampling."""
    gens = _generators(E)
    for _ in range(tries):
        values = {S: [f"{S}{i}" for i in range(rng.randint(1, max_values))] for S in E.objects}
        g = {f: {x: rng.choice(values[E.src(f)]) for x in values[E.tgt(f)]} for f in gens}
        restr = _extend(E, g, lambda first, second: {x: second[y] for x, y in first.items()})
        try:
            return SetPresheaf(E, values, restr, name=name).check()
        except FunctorViolation:
            continue
    return None


def random_presheaf_map(P, Q, rng, tries=200):
    E = P.base
    for _ in range(tries):
        comps = {S: {x: rng.choice(Q.values[S]) for x in P.values[S]} for S in E.objects}
        try:
            return PresheafMap(P, Q, comps).check()
        except FunctorViolation:
            continue
    return None


def gaunt_fibres():
    """Small categories whose only isomorphisms are identities."""
    return [terminal(), arrow_category(), discrete(["x", "y"], name="d2")]


def _all_functors(A, B):
    return list(iter_functors(A, B, lambda x: B.objects, lambda a, s, t: B.hom(s, t)))


def random_catpresheaf(E, rng, pool=None, tries=200, name=None):
    pool = pool or gaunt_fibres()
    gens = _generators(E)
    functors = {}
    for _ in range(tries):
        values = {S: rng.choice(pool) for S in E.objects}
        g = {}
        for f in gens:
            T, S = E.ends(f)
            key = (id(values[S]), id(values[T]))
            if key not in functors:
                functors[key] = _all_functors(values[S], values[T])
            g[f] = rng.choice(functors[key])
        restr = _extend(E, g, lambda first, second: first.then(second))
        for S in E.objects:
            restr[E.identity(S)] = identity_functor(values[S])
        try:
            return CatPresheaf(E, values, restr, name=name).check()
        except FunctorViolation:
            continue
    return None


def thin_fibration(E, doubled, name=None):
    """A preorder over ``E`` with two isomorphic objects over ``doubled`` and one elsewhere.

    Every arrow between distinct fibres exists exactly when the base arrow does,
    so each arrow is cartesian and the projection is a fibration.
    """
    objs = []
    for S in E.objects:
        objs.extend([f"{S}.a", f"{S}.b"] if S == doubled else [f"{S}.o"])
    base_of = {x: x.split(".")[0] for x in objs}
    arrows = {}
    for x in objs:
        for y in objs:
            if E.hom(base_of[x], base_of[y]):
                arrows[f"{x}>{y}"] = (x, y)
    ident = {x: f"{x}>{x}" for x in objs}

    def rule(f, g):
        return f"{arrows[f][0]}>{arrows[g][1]}"

    C = FinCategory(objs, arrows, ident, rule, name=name)
    proj = Functor(
        C, E,
        {x: base_of[x] for x in objs},
        {a: E.hom(base_of[s], base_of[t])[0] for a, (s, t) in arrows.items()},
    )
    return FibredCategory(C, E, proj, name=name)


# -- corpus assembly ----------------------------------------------------------------


_ALL_TRUE = {f: True for f in ALL_FLAGS}


def build_site_entry(site_name, top, seed, caps=DEFAULT_CAPS):
    rng = random.Random(f"{seed}:{site_name}")
    E = top.base
    max_values = caps[1]
    entry = SiteEntry(site_name, top)
    base = entry.add_fibred("E", base_as_fibred(E))
    for S in E.objects:
        entry.add_fibred(f"slice-{S}", slice_fib(E, S))
    for S in E.objects:
        for k, R in enumerate(top.refinements(S)):
            if R.arrows == maximal_sieve(E, S).arrows:
                continue
            RF, inc = sieve_to_fib(E, R)
            rname = f"sieve-{S}-{k}"
            entry.add_fibred(rname, RF)
            entry.add_map(f"incl-{S}-{k}", inc, rname, f"slice-{S}",
                          {"cartesian": True, "cofibration": True, "bicovering": True}, test=True)

    n_presheaves = 10 if site_name.startswith("push") else 6
    presheaves = {"one": terminal_presheaf(E)}
    for i in range(n_presheaves):
        P = random_presheaf(E, rng, max_values, name=f"P{i}")
        if P is not None and all(P.key != Q.key for Q in presheaves.values()):
            presheaves[f"P{i}"] = P
    sheafified = {}
    for pname in list(presheaves)[:4]:
        aP, unit = sheafify(presheaves[pname], top)
        aP.name = f"a{pname}"
        presheaves[f"a{pname}"] = aP
        sheafified[pname] = unit
    entry.presheaves = presheaves
    phis = {}
    for pname, P in presheaves.items():
        F = entry.add_fibred(f"D-{pname}", grothendieck(discrete_presheaf(P)))
        phis[pname] = F
        entry.add_map(f"proj-D-{pname}", FibMap(F, base, F.proj), f"D-{pname}", "E",
                      {"cartesian": True, "isofibration": True})
    for pname, unit in sheafified.items():
        src, tgt = phis[pname], phis[f"a{pname}"]
        m = grothendieck_map(discrete_presheaf_map(unit), src, tgt)
        entry.add_map(f"unit-{pname}", m, f"D-{pname}", f"D-a{pname}",
                      {"cartesian": True, "isofibration": True, "bicovering": True})
    names = [n for n in presheaves if n != "one"]
    for i in range(4):
        if len(names) < 2:
            break
        a, b = rng.sample(names, 2)
        phi = random_presheaf_map(presheaves[a], presheaves[b], rng)
        if phi is None:
            continue
        m = grothendieck_map(discrete_presheaf_map(phi), phis[a], phis[b])
        entry.add_map(f"map-{a}-{b}", m, f"D-{a}", f"D-{b}", {"cartesian": True, "isofibration": True})
    first = names[0] if names else "one"
    entry.add_map(f"id-D-{first}", _identity(phis[first]), f"D-{first}", f"D-{first}", _ALL_TRUE, test=True)
    entry.add_map("id-E", _identity(base), "E", "E", _ALL_TRUE)

    n_cat = 4 if site_name.startswith("push") else 2
    for i in range(n_cat):
        X = random_catpresheaf(E, rng, name=f"X{i}")
        if X is None:
            continue
        entry.catpresheaves[f"X{i}"] = X
        F = entry.add_fibred(f"G-X{i}", grothendieck(X))
        entry.add_map(f"proj-G-X{i}", FibMap(F, base, F.proj), f"G-X{i}", "E",
                      {"cartesian": True, "isofibration": True})

    if site_name == "push":
        for S in ("W", "S"):
            entry.add_fibred(f"thin-{S}", thin_fibration(E, S, name=f"thin-{S}"))

    for fname in [f"D-{first}", "G-X0" if "G-X0" in entry.fibred else None]:
        if fname is None:
            continue
        F = entry.fibred[fname]
        v = counit_v(F)
        sname = f"SF-{fname}"
        entry.add_fibred(sname, sections_fibred(F))
        entry.add_map(f"counit-{fname}", v, sname, fname,
                      {"cartesian": True, "E_equivalence": True, "isofibration": True,
                       "trivial_fibration": True, "bicovering": True})
    if site_name in ("push", "chain"):
        inc = [n for n in entry.maps if n.startswith("incl-")]
        entry.champ_maps = [f"proj-D-{first}"] + inc[:1]
    return entry


def _identity(F):
    return FibMap(F, F, identity_functor(F.total))


def discrete_presheaf_map(phi):
    """``D(phi)`` between the discrete presheaves of categories."""
    from .presheaf import CatPresheafMap

    src, tgt = discrete_presheaf(phi.src), discrete_presheaf(phi.tgt)
    comps = {}
    for S in phi.src.base.objects:
        m = phi.comps[S]
        comps[S] = Functor(src.values[S], tgt.values[S], dict(m), {("id", x): ("id", y) for x, y in m.items()})
    return CatPresheafMap(src, tgt, comps)


def build_corpus(seed=0, caps=DEFAULT_CAPS, sites=None):
    """The corpus in memory: site name to :class:`SiteEntry`."""
    specs = site_specs()
    out = {}
    for name in sites or specs:
        top = specs[name]()
        if len(top.base.objects) > caps[0]:
            continue
        out[name] = build_site_entry(name, top, seed, caps)
    return out


# -- documents on disk ----------------------------------------------------------------


def _fname(name):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name) + ".json"


def corpus_documents(corpus):
    """Relative path to document, plus the manifest body."""
    files = {}
    index = {}
    for sname, entry in corpus.items():
        d = sname
        files[f"{d}/site.json"] = site_doc(entry.site, name=sname)
        idx = {"site": f"{d}/site.json", "fibred": {}, "maps": {}, "presheaves": {}, "catpresheaves": {},
               "champ_maps": list(entry.champ_maps)}
        for n, F in entry.fibred.items():
            p = f"{d}/fibred/{_fname(n)}"
            files[p] = fibred_doc(F, name=n)
            idx["fibred"][n] = p
        for n, m in entry.maps.items():
            p = f"{d}/maps/{_fname(n)}"
            files[p] = fibmap_doc(m.map, m.dom, m.cod, name=n, declared=m.declared, test=m.test)
            idx["maps"][n] = p
        for n, P in entry.presheaves.items():
            p = f"{d}/presheaves/{_fname(n)}"
            files[p] = presheaf_doc(P, name=n)
            idx["presheaves"][n] = p
        for n, X in entry.catpresheaves.items():
            p = f"{d}/catpresheaves/{_fname(n)}"
            files[p] = catpresheaf_doc(X, name=n)
            idx["catpresheaves"][n] = p
        index[sname] = idx
    return files, index


def manifest_hash(files):
    h = hashlib.sha256()
    for path in sorted(files):
        h.update(path.encode())
        h.update(b"\0")
        h.update(dumps(files[path]).encode())
    return h.hexdigest()


def corrupt(files, index, every=5):
    """Flip the first declared flag of every ``every``-th map; returns the flip count."""
    flips = 0
    k = 0
    for sname in sorted(index):
        for n in sorted(index[sname]["maps"]):
            doc = files[index[sname]["maps"][n]]
            declared = doc.get("declared") or {}
            if not declared:
                continue
            if k % every == 0:
                flag = sorted(declared)[0]
                declared[flag] = not declared[flag]
                flips += 1
            k += 1
    return flips


def write_corpus(out_dir, seed=0, caps=DEFAULT_CAPS, negative=False):
    corpus = build_corpus(seed, caps)
    files, index = corpus_documents(corpus)
    manifest = {"seed": seed, "caps": list(caps), "sites": index}
    if negative:
        manifest["expected_violations"] = corrupt(files, index)
        manifest["negative_control"] = True
    manifest["hash"] = manifest_hash(files)
    os.makedirs(out_dir, exist_ok=True)
    for rel, doc in files.items():
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        write_document(path, doc)
    write_document(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def corpus_generate(seed, caps=DEFAULT_CAPS, out_dir=None, negative=False):
    """Write a corpus directory (when ``out_dir`` is given) and return its manifest."""
    if out_dir is None:
        files, index = corpus_documents(build_corpus(seed, caps))
        return {"seed": seed, "caps": list(caps), "sites": index, "hash": manifest_hash(files)}
    return write_corpus(out_dir, seed, caps, negative)


def load_corpus(path):
    """Read a corpus directory back into :class:`SiteEntry` records."""
    manifest = read_document(os.path.join(path, "manifest.json"))
    out = {}
    for sname, idx in manifest["sites"].items():
        top = load_site(read_document(os.path.join(path, idx["site"])), name=sname)
        E = top.base
        entry = SiteEntry(sname, top)
        for n, p in idx["fibred"].items():
            entry.fibred[n] = load_fibred(read_document(os.path.join(path, p)), E, name=n)
        for n, p in idx["maps"].items():
            doc = read_document(os.path.join(path, p))
            try:
                F, G = entry.fibred[doc["dom"]], entry.fibred[doc["cod"]]
            except KeyError as exc:
                raise ValidationError(f"map {n!r} refers to unknown fibred category {exc}") from None
            entry.maps[n] = CorpusMap(load_fibmap(doc, F, G, name=n), doc["dom"], doc["cod"],
                                      dict(doc.get("declared", {})), bool(doc.get("test", False)))
        for n, p in idx.get("presheaves", {}).items():
            entry.presheaves[n] = load_presheaf(read_document(os.path.join(path, p)), E, name=n)
        for n, p in idx.get("catpresheaves", {}).items():
            entry.catpresheaves[n] = load_catpresheaf(read_document(os.path.join(path, p)), E, name=n)
        entry.champ_maps = list(idx.get("champ_maps", ()))
        out[sname] = entry
    return out, manifest

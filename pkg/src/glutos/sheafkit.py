"""Finite-set-valued presheaves and sheaves on a finite site.

Sections are stored as ordered tuples per object, restriction maps as dicts
per arrow (contravariant: the map attached to a: V -> W goes P(W) -> P(V)).
Sheafification runs the plus construction twice over generated covering
sieves, which keeps everything choice-free; the sheaf condition itself is
checked in equalizer form over coverings and their pairwise canonical
pullbacks.  A SheafFragment is a finite full subcategory of sheaves used as
the ambient universe by the closure and axiom modules: it is grown from
seeds, deduplicated up to isomorphism, and records (never hides) any
construction that left the bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence

from .fincat import FinCategory, FincatError
from .site import Pretopology, SiteError, SiteLike


class SheafError(FincatError):
    pass


class BoundExceeded(SheafError):
    def __init__(self, where: str, size: int, bound: int):
        self.where, self.size, self.bound = where, size, bound
        super().__init__(f"{where}: {size} section(s) exceed bound {bound}")


class NotASheaf(SheafError):
    def __init__(self, violations: Sequence[tuple]):
        self.violations = tuple(violations)
        super().__init__(f"sheaf condition fails: {self.violations[:3]!r}")


class NotAPresheaf(SheafError):
    def __init__(self, violations: Sequence[tuple]):
        self.violations = tuple(violations)
        super().__init__(f"not functorial: {self.violations[:3]!r}")


# ----------------------------------------------------------------------
# presheaves


@dataclass(frozen=True)
class Presheaf:
    base: FinCategory
    sections: Mapping[str, tuple]
    restrictions: Mapping[str, Mapping]

    def section(self, x: str) -> tuple:
        return self.sections[x]

    def restrict(self, a: str, el: Hashable) -> Hashable:
        return self.restrictions[a][el]

    def size(self) -> int:
        return sum(len(v) for v in self.sections.values())


def presheaf_violations(p: Presheaf) -> list[tuple]:
    c = p.base
    out: list[tuple] = []
    for x in c.objects:
        if x not in p.sections:
            out.append(("missing-object", x))
    for a in c.arrows:
        r = p.restrictions.get(a)
        if r is None:
            out.append(("missing-arrow", a))
            continue
        dom, cod = p.sections.get(c.dst(a), ()), p.sections.get(c.src(a), ())
        for el in dom:
            if el not in r:
                out.append(("partial-map", a, el))
            elif r[el] not in cod:
                out.append(("off-target", a, el))
    if out:
        return out
    for x in c.objects:
        i = c.identity(x)
        for el in p.sections[x]:
            if p.restrictions[i][el] != el:
                out.append(("identity", x, el))
    for (g, f), gf in c.table.items():
        # P(g.f) = P(f) . P(g): both map P(dst g) -> P(src f)
        for el in p.sections[c.dst(g)]:
            if p.restrictions[gf][el] != p.restrictions[f][p.restrictions[g][el]]:
                out.append(("functoriality", g, f, el))
    return out


def validate_presheaf(p: Presheaf) -> Presheaf:
    bad = presheaf_violations(p)
    if bad:
        raise NotAPresheaf(bad)
    return p


def canonicalize(p: Presheaf) -> tuple[Presheaf, dict[str, dict]]:
    """Rename every section element to "0", "1", ... in stored order.
    Returns the renamed presheaf and the per-object rename maps."""
    rename = {x: {el: str(i) for i, el in enumerate(els)} for x, els in p.sections.items()}
    q = Presheaf(
        p.base,
        {x: tuple(rename[x][el] for el in els) for x, els in p.sections.items()},
        {
            a: {
                rename[p.base.dst(a)][el]: rename[p.base.src(a)][val]
                for el, val in r.items()
            }
            for a, r in p.restrictions.items()
        },
    )
    return q, rename


# ----------------------------------------------------------------------
# natural transformations


@dataclass(frozen=True)
class NatTrans:
    source: Presheaf
    target: Presheaf
    components: Mapping[str, Mapping]

    def at(self, x: str, el: Hashable) -> Hashable:
        return self.components[x][el]

    def key(self) -> tuple:
        return tuple(
            (x, tuple((el, self.components[x][el]) for el in self.source.sections[x]))
            for x in self.source.base.objects
        )


def nat_violations(t: NatTrans) -> list[tuple]:
    c = t.source.base
    out = []
    for x in c.objects:
        comp = t.components.get(x, {})
        for el in t.source.sections[x]:
            if el not in comp:
                out.append(("partial", x, el))
            elif comp[el] not in t.target.sections[x]:
                out.append(("off-target", x, el))
    if out:
        return out
    for a in c.arrows:
        v, w = c.src(a), c.dst(a)
        for el in t.source.sections[w]:
            if t.at(v, t.source.restrict(a, el)) != t.target.restrict(a, t.at(w, el)):
                out.append(("naturality", a, el))
    return out


def identity_nat(p: Presheaf) -> NatTrans:
    return NatTrans(p, p, {x: {el: el for el in els} for x, els in p.sections.items()})


def compose_nat(g: NatTrans, f: NatTrans) -> NatTrans:
    return NatTrans(
        f.source,
        g.target,
        {
            x: {el: g.at(x, f.at(x, el)) for el in f.source.sections[x]}
            for x in f.source.base.objects
        },
    )


def is_iso_nat(t: NatTrans) -> bool:
    for x in t.source.base.objects:
        vals = [t.at(x, el) for el in t.source.sections[x]]
        if len(set(vals)) != len(vals) or len(vals) != len(t.target.sections[x]):
            return False
    return True


def invert_nat(t: NatTrans) -> NatTrans:
    return NatTrans(
        t.target,
        t.source,
        {
            x: {t.at(x, el): el for el in t.source.sections[x]}
            for x in t.source.base.objects
        },
    )


def nat_transformations(p: Presheaf, q: Presheaf, bijective: bool = False) -> list[NatTrans]:
    """All natural maps p -> q by object-order DFS with naturality pruning."""
    c = p.base
    objs = list(c.objects)
    chosen: dict[str, dict] = {}
    out: list[NatTrans] = []

    def candidates(x: str) -> Iterable[dict]:
        dom, cod = p.sections[x], q.sections[x]
        if bijective and len(dom) != len(cod):
            return
        for vals in iproduct(cod, repeat=len(dom)):
            if bijective and len(set(vals)) != len(vals):
                continue
            yield dict(zip(dom, vals))

    def natural_so_far(x: str) -> bool:
        for a in c.arrows:
            v, w = c.src(a), c.dst(a)
            if v not in chosen or w not in chosen:
                continue
            if v != x and w != x:
                continue
            for el in p.sections[w]:
                if chosen[v][p.restrict(a, el)] != q.restrict(a, chosen[w][el]):
                    return False
        return True

    def rec(i: int) -> None:
        if i == len(objs):
            out.append(NatTrans(p, q, {x: dict(m) for x, m in chosen.items()}))
            return
        x = objs[i]
        for cand in candidates(x):
            chosen[x] = cand
            if natural_so_far(x):
                rec(i + 1)
            del chosen[x]

    rec(0)
    return out


def presheaves_isomorphic(p: Presheaf, q: Presheaf) -> Optional[NatTrans]:
    for t in nat_transformations(p, q, bijective=True):
        return t
    return None


# ----------------------------------------------------------------------
# sheaf condition (equalizer form)


def sheaf_condition_violations(p: Presheaf, site: SiteLike) -> list[tuple]:
    from .fincat import pullback

    c = p.base
    out: list[tuple] = []
    for x in c.objects:
        for legs in site.coverings_of(x):
            ordered = sorted(legs)
            fams = []
            for combo in iproduct(*[p.sections[c.src(u)] for u in ordered]):
                ok = True
                for i, u in enumerate(ordered):
                    for j, v in enumerate(ordered):
                        pb = pullback(c, u, v)
                        if pb is None:
                            raise SiteError(f"covering leg without pullback: {u}, {v}")
                        if p.restrict(pb.p_f, combo[i]) != p.restrict(pb.p_g, combo[j]):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    fams.append(combo)
            image = [tuple(p.restrict(u, s) for u in ordered) for s in p.sections[x]]
            if len(set(image)) != len(image):
                out.append(("not-separated", x, tuple(ordered)))
            elif set(image) != set(fams):
                out.append(("no-amalgamation", x, tuple(ordered)))
    return out


def is_sheaf(p: Presheaf, site: SiteLike) -> bool:
    return not sheaf_condition_violations(p, site)


# ----------------------------------------------------------------------
# sieves and the plus construction


def sieve_from_sink(c: FinCategory, legs: Iterable[str]) -> frozenset[str]:
    got = set()
    for u in legs:
        for h in c.arrows_into(c.src(u)):
            got.add(c.compose(u, h))
    return frozenset(got)


def covering_sieves(site: SiteLike, x: str) -> tuple[frozenset[str], ...]:
    seen = {sieve_from_sink(site.base, legs) for legs in site.coverings_of(x)}
    return tuple(sorted(seen, key=lambda r: (len(r), sorted(r))))


def _matching_families(p: Presheaf, r: frozenset[str]) -> list[dict]:
    c = p.base
    arrows = sorted(r)
    idx = {f: i for i, f in enumerate(arrows)}
    fam: list = [None] * len(arrows)
    out: list[dict] = []

    def fits(i: int, f: str, val) -> bool:
        for g in c.arrows_into(c.src(f)):
            j = idx.get(c.compose(f, g))
            if j is None or j > i:
                continue
            want = p.restrict(g, val)
            if (fam[j] if j < i else val) != want:
                return False
        for j in range(i):
            f2 = arrows[j]
            for g in c.hom(c.src(f), c.src(f2)):
                if c.compose(f2, g) == f and p.restrict(g, fam[j]) != val:
                    return False
        return True

    def rec(i: int) -> None:
        if i == len(arrows):
            out.append(dict(zip(arrows, fam)))
            return
        f = arrows[i]
        for val in p.sections[c.src(f)]:
            if fits(i, f, val):
                fam[i] = val
                rec(i + 1)
                fam[i] = None

    if not arrows:
        return [{}]
    rec(0)
    return out


def _fam_key(p: Presheaf, c: FinCategory, r: frozenset[str], fam: Mapping) -> tuple:
    pos = {
        x: {el: i for i, el in enumerate(els)} for x, els in p.sections.items()
    }
    return (len(r),) + tuple((f, pos[c.src(f)][fam[f]]) for f in sorted(r))


@dataclass
class PlusData:
    presheaf: Presheaf  # sections are ints 0..k-1 per object
    unit: NatTrans  # source -> presheaf
    class_of: dict[str, dict[tuple, int]]
    reps: dict[str, list[tuple[frozenset[str], dict]]]


def plus(p: Presheaf, site: SiteLike) -> PlusData:
    c = p.base
    sieves = {x: covering_sieves(site, x) for x in c.objects}
    raw: dict[str, list[tuple[frozenset[str], dict]]] = {}
    for x in c.objects:
        items = []
        for r in sieves[x]:
            for fam in _matching_families(p, r):
                items.append((r, fam))
        raw[x] = items

    def same(x: str, a, b) -> bool:
        (r1, f1), (r2, f2) = a, b
        meet = r1 & r2
        for r in sieves[x]:
            if r <= meet and all(f1[f] == f2[f] for f in r):
                return True
        return False

    class_of: dict[str, dict[tuple, int]] = {}
    reps: dict[str, list[tuple[frozenset[str], dict]]] = {}
    for x in c.objects:
        items = raw[x]
        parent = list(range(len(items)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                if find(i) != find(j) and same(x, items[i], items[j]):
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(len(items)):
            groups.setdefault(find(i), []).append(i)
        keyed = sorted(
            groups.values(),
            key=lambda idxs: min(_fam_key(p, c, *items[i]) for i in idxs),
        )
        class_of[x] = {}
        reps[x] = []
        for n, idxs in enumerate(keyed):
            reps[x].append(items[min(idxs, key=lambda i: _fam_key(p, c, *items[i]))])
            for i in idxs:
                r, fam = items[i]
                class_of[x][(r, tuple(sorted(fam.items())))] = n

    def locate(x: str, r: frozenset[str], fam: Mapping) -> int:
        return class_of[x][(r, tuple(sorted(fam.items())))]

    restrictions: dict[str, dict] = {}
    for h in c.arrows:
        w, x = c.src(h), c.dst(h)
        m: dict = {}
        for n, (r, fam) in enumerate(reps[x]):
            pulled = frozenset(g for g in c.arrows_into(w) if c.compose(h, g) in r)
            r0 = next((s for s in sieves[w] if s <= pulled), None)
            if r0 is None:
                raise SiteError(f"no covering sieve inside the pullback of {sorted(r)} along {h}")
            m[n] = locate(w, r0, {g: fam[c.compose(h, g)] for g in r0})
        restrictions[h] = m

    plus_p = Presheaf(c, {x: tuple(range(len(reps[x]))) for x in c.objects}, restrictions)
    unit = NatTrans(
        p,
        plus_p,
        {
            x: {
                el: locate(
                    x,
                    sieve_from_sink(c, {c.identity(x)}),
                    {f: p.restrict(f, el) for f in sieve_from_sink(c, {c.identity(x)})},
                )
                for el in p.sections[x]
            }
            for x in c.objects
        },
    )
    return PlusData(plus_p, unit, class_of, reps)


def plus_map(t: NatTrans, dp: PlusData, dq: PlusData) -> NatTrans:
    """Functorial action of the plus construction on t: P -> Q."""
    c = t.source.base
    comps: dict[str, dict] = {}
    for x in c.objects:
        m = {}
        for n, (r, fam) in enumerate(dp.reps[x]):
            pushed = {f: t.at(c.src(f), fam[f]) for f in r}
            m[n] = dq.class_of[x][(r, tuple(sorted(pushed.items())))]
        comps[x] = m
    return NatTrans(dp.presheaf, dq.presheaf, comps)


@dataclass
class Sheafification:
    sheaf: Presheaf
    unit: NatTrans  # original presheaf -> sheaf
    stages: tuple[PlusData, PlusData]
    rename: dict[str, dict]


def sheafify(p: Presheaf, site: SiteLike, bound: Optional[int] = None) -> Sheafification:
    d1 = plus(p, site)
    d2 = plus(d1.presheaf, site)
    canon, rename = canonicalize(d2.presheaf)
    if bound is not None:
        for x, els in canon.sections.items():
            if len(els) > bound:
                raise BoundExceeded(f"sheafify at {x}", len(els), bound)
    raw_unit = compose_nat(d2.unit, d1.unit)
    unit = NatTrans(
        p,
        canon,
        {x: {el: rename[x][raw_unit.at(x, el)] for el in p.sections[x]} for x in p.base.objects},
    )
    bad = presheaf_violations(canon) or sheaf_condition_violations(canon, site)
    if bad:
        raise NotASheaf(bad)
    return Sheafification(canon, unit, (d1, d2), rename)


def sheafify_map(t: NatTrans, sp: Sheafification, sq: Sheafification) -> NatTrans:
    s1 = plus_map(t, sp.stages[0], sq.stages[0])
    s2 = plus_map(s1, sp.stages[1], sq.stages[1])
    c = t.source.base
    return NatTrans(
        sp.sheaf,
        sq.sheaf,
        {
            x: {
                sp.rename[x][el]: sq.rename[x][s2.at(x, el)]
                for el in sp.stages[1].presheaf.sections[x]
            }
            for x in c.objects
        },
    )


def factor_through_sheafification(t: NatTrans, sp: Sheafification) -> Optional[NatTrans]:
    """Unique map sheafify(P) -> F extending t: P -> F (F a sheaf)."""
    for cand in nat_transformations(sp.sheaf, t.target):
        if compose_nat(cand, sp.unit).key() == t.key():
            return cand
    return None


# ----------------------------------------------------------------------
# constructions on presheaves


def terminal_presheaf(c: FinCategory) -> Presheaf:
    return Presheaf(c, {x: ("*",) for x in c.objects}, {a: {"*": "*"} for a in c.arrows})


def product_presheaf(p: Presheaf, q: Presheaf) -> tuple[Presheaf, NatTrans, NatTrans]:
    c = p.base
    secs = {x: tuple(iproduct(p.sections[x], q.sections[x])) for x in c.objects}
    rest = {
        a: {
            (u, v): (p.restrict(a, u), q.restrict(a, v))
            for (u, v) in secs[c.dst(a)]
        }
        for a in c.arrows
    }
    prod = Presheaf(c, secs, rest)
    pi1 = NatTrans(prod, p, {x: {uv: uv[0] for uv in secs[x]} for x in c.objects})
    pi2 = NatTrans(prod, q, {x: {uv: uv[1] for uv in secs[x]} for x in c.objects})
    return prod, pi1, pi2


def pullback_presheaf(f: NatTrans, g: NatTrans) -> tuple[Presheaf, NatTrans, NatTrans]:
    """Pullback of the cospan f: P -> H <- Q :g, objectwise pairs."""
    p, q = f.source, g.source
    c = p.base
    secs = {
        x: tuple(
            (u, v)
            for u in p.sections[x]
            for v in q.sections[x]
            if f.at(x, u) == g.at(x, v)
        )
        for x in c.objects
    }
    rest = {
        a: {uv: (p.restrict(a, uv[0]), q.restrict(a, uv[1])) for uv in secs[c.dst(a)]}
        for a in c.arrows
    }
    pb = Presheaf(c, secs, rest)
    pi1 = NatTrans(pb, p, {x: {uv: uv[0] for uv in secs[x]} for x in c.objects})
    pi2 = NatTrans(pb, q, {x: {uv: uv[1] for uv in secs[x]} for x in c.objects})
    return pb, pi1, pi2


def coproduct_presheaf(ps: Sequence[Presheaf]) -> tuple[Presheaf, list[NatTrans]]:
    c = ps[0].base
    secs = {x: tuple((i, el) for i, p in enumerate(ps) for el in p.sections[x]) for x in c.objects}
    rest = {
        a: {(i, el): (i, ps[i].restrict(a, el)) for (i, el) in secs[c.dst(a)]}
        for a in c.arrows
    }
    cop = Presheaf(c, secs, rest)
    legs = [
        NatTrans(p, cop, {x: {el: (i, el) for el in p.sections[x]} for x in c.objects})
        for i, p in enumerate(ps)
    ]
    return cop, legs


def quotient_presheaf(p: Presheaf, pairs: Iterable[tuple[str, Hashable, Hashable]]) -> tuple[Presheaf, NatTrans]:
    """Quotient by the congruence generated by (object, a, b) pairs: the
    relation is closed under all restriction maps before quotienting."""
    c = p.base
    parent: dict[tuple[str, Hashable], tuple[str, Hashable]] = {
        (x, el): (x, el) for x in c.objects for el in p.sections[x]
    }

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def union(a, b) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
        return True

    for x, a, b in pairs:
        union((x, a), (x, b))
    changed = True
    while changed:
        changed = False
        for arr in c.arrows:
            w, x = c.src(arr), c.dst(arr)
            for e1 in p.sections[x]:
                for e2 in p.sections[x]:
                    if find((x, e1)) == find((x, e2)):
                        if union((w, p.restrict(arr, e1)), (w, p.restrict(arr, e2))):
                            changed = True

    index: dict[str, dict] = {x: {} for x in c.objects}
    order: dict[str, list] = {x: [] for x in c.objects}
    for x in c.objects:
        for el in p.sections[x]:
            root = find((x, el))
            if root not in index[x]:
                index[x][root] = len(order[x])
                order[x].append(root)
    secs = {x: tuple(range(len(order[x]))) for x in c.objects}
    rest = {}
    for arr in c.arrows:
        w, x = c.src(arr), c.dst(arr)
        m = {}
        for el in p.sections[x]:
            m[index[x][find((x, el))]] = index[w][find((w, p.restrict(arr, el)))]
        rest[arr] = m
    q = Presheaf(c, secs, rest)
    proj = NatTrans(
        p, q, {x: {el: index[x][find((x, el))] for el in p.sections[x]} for x in c.objects}
    )
    return q, proj


def presheaf_colimit(
    nodes: Mapping[str, Presheaf], edges: Iterable[tuple[str, str, NatTrans]]
) -> tuple[Presheaf, dict[str, NatTrans]]:
    """Colimit of a diagram of presheaves: edge (i, j, t) means t: nodes[i] -> nodes[j]."""
    names = list(nodes)
    cop, legs = coproduct_presheaf([nodes[n] for n in names])
    pos = {n: i for i, n in enumerate(names)}
    pairs = []
    c = cop.base
    for i, j, t in edges:
        for x in c.objects:
            for el in nodes[i].sections[x]:
                pairs.append((x, (pos[i], el), (pos[j], t.at(x, el))))
    q, proj = quotient_presheaf(cop, pairs)
    out_legs = {n: compose_nat(proj, legs[pos[n]]) for n in names}
    return q, out_legs


# ----------------------------------------------------------------------
# representables and Yoneda


def representable(c: FinCategory, x: str) -> Presheaf:
    secs = {w: tuple(c.hom(w, x)) for w in c.objects}
    rest = {a: {h: c.compose(h, a) for h in secs[c.dst(a)]} for a in c.arrows}
    return Presheaf(c, secs, rest)


def representable_map(c: FinCategory, f: str) -> NatTrans:
    src, dst = representable(c, c.src(f)), representable(c, c.dst(f))
    return NatTrans(
        src,
        dst,
        {w: {h: c.compose(f, h) for h in src.sections[w]} for w in c.objects},
    )


@dataclass
class YonedaImage:
    site: SiteLike
    sheaves: dict[str, Presheaf]  # base object -> sheafified representable
    arrow_maps: dict[str, NatTrans]  # base arrow -> map between those sheaves
    units: dict[str, Sheafification]

    def violations(self) -> list[tuple]:
        c = self.site.base
        out = []
        for x in c.objects:
            if self.arrow_maps[c.identity(x)].key() != identity_nat(self.sheaves[x]).key():
                out.append(("identity", x))
        for (g, f), gf in c.table.items():
            got = compose_nat(self.arrow_maps[g], self.arrow_maps[f])
            if got.key() != self.arrow_maps[gf].key():
                out.append(("composite", g, f))
        return out


def yoneda_embed(site: SiteLike, bound: Optional[int] = None) -> YonedaImage:
    c = site.base
    units = {x: sheafify(representable(c, x), site, bound) for x in c.objects}
    sheaves = {x: units[x].sheaf for x in c.objects}
    arrow_maps = {
        a: sheafify_map(representable_map(c, a), units[c.src(a)], units[c.dst(a)])
        for a in c.arrows
    }
    img = YonedaImage(site, sheaves, arrow_maps, units)
    bad = img.violations()
    if bad:
        raise SheafError(f"yoneda image not functorial: {bad[:3]!r}")
    return img


# ----------------------------------------------------------------------
# epi families of sheaf maps


def is_epi_family_sh(
    site: SiteLike, legs: Sequence[NatTrans], target: Optional[Presheaf] = None
) -> bool:
    """Joint local surjectivity: every section of the common target lands in
    the union of the leg images after restriction along some covering."""
    tgt = target
    for t in legs:
        if tgt is None:
            tgt = t.target
        elif t.target is not tgt and t.target != tgt:
            raise SheafError("legs must share a target")
    if tgt is None:
        raise SheafError("empty family needs an explicit target")
    c = site.base
    images = {
        x: {t.at(x, el) for t in legs for el in t.source.sections[x]} for x in c.objects
    }
    for x in c.objects:
        for s in tgt.sections[x]:
            found = False
            for cov in site.coverings_of(x):
                if all(tgt.restrict(u, s) in images[c.src(u)] for u in cov):
                    found = True
                    break
            if not found:
                return False
    return True


def is_categorical_epi_family(candidates: Sequence[Presheaf], legs: Sequence[NatTrans]) -> bool:
    """Joint epi by cancellation against the supplied test objects."""
    tgt = legs[0].target
    for g in candidates:
        for t1 in nat_transformations(tgt, g):
            for t2 in nat_transformations(tgt, g):
                if t1.key() == t2.key():
                    continue
                if all(
                    compose_nat(t1, leg).key() == compose_nat(t2, leg).key() for leg in legs
                ):
                    return False
    return True


# ----------------------------------------------------------------------
# sheaf fragments


@dataclass
class SheafFragment:
    site: SiteLike
    bound: int
    members: list[Presheaf] = field(default_factory=list)
    notes: list[tuple] = field(default_factory=list)
    frozen: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def name(self, i: int) -> str:
        return f"F{i}"

    def locate(self, p: Presheaf) -> Optional[tuple[int, NatTrans]]:
        """Member index and iso p -> member, if p is isomorphic to one."""
        for i, m in enumerate(self.members):
            t = presheaves_isomorphic(p, m)
            if t is not None:
                return i, t
        return None

    def add(self, p: Presheaf, origin: str = "seed") -> Optional[tuple[int, NatTrans]]:
        found = self.locate(p)
        if found is not None:
            return found
        if self.frozen:
            raise SheafError("fragment is frozen")
        canon, _ = canonicalize(p)
        if any(len(els) > self.bound for els in canon.sections.values()):
            self.notes.append(("bound-exceeded", origin, canon.size()))
            return None
        self.members.append(canon)
        return self.locate(p)

    # -- the fragment as a finite category ------------------------------

    def as_category(self) -> FinCategory:
        return self._materialize()[0]

    def nat_of(self, arrow_name: str) -> NatTrans:
        return self._materialize()[1][arrow_name]

    def name_of(self, t: NatTrans) -> str:
        cat, _, index = self._materialize()
        src = self.index_of_member(t.source)
        dst = self.index_of_member(t.target)
        return index[(src, dst, t.key())]

    def index_of_member(self, p: Presheaf) -> int:
        for i, m in enumerate(self.members):
            if m == p:
                return i
        raise SheafError("presheaf is not a fragment member")

    def _materialize(self):
        if "cat" in self._cache:
            return self._cache["cat"]
        self.frozen = True
        objs = [self.name(i) for i in range(len(self.members))]
        arrows = []
        nat_by_name: dict[str, NatTrans] = {}
        index: dict[tuple, str] = {}
        for i, p in enumerate(self.members):
            for j, q in enumerate(self.members):
                for k, t in enumerate(nat_transformations(p, q)):
                    n = f"n{i}>{j}.{k}"
                    arrows.append((n, self.name(i), self.name(j)))
                    nat_by_name[n] = t
                    index[(i, j, t.key())] = n
        table = {}
        for n1, t1 in nat_by_name.items():
            for n2, t2 in nat_by_name.items():
                if t2.target == t1.source:
                    comp = compose_nat(t1, t2)
                    i = self.index_of_member(t2.source)
                    j = self.index_of_member(t1.target)
                    table[(n1, n2)] = index[(i, j, comp.key())]
        ids = {
            self.name(i): index[(i, i, identity_nat(p).key())]
            for i, p in enumerate(self.members)
        }
        cat = FinCategory.build(objs, arrows, table, ids)
        self._cache["cat"] = (cat, nat_by_name, index)
        return self._cache["cat"]


def build_fragment(
    site: SiteLike,
    seeds: Sequence[Presheaf],
    close_under: Sequence[str] = ("terminal", "pullback"),
    bound: int = 8,
    max_members: int = 24,
) -> SheafFragment:
    """Grow a fragment from seed sheaves, closing under the requested
    canonical constructions; every refusal lands in fragment.notes."""
    frag = SheafFragment(site, bound)
    for s in seeds:
        bad = sheaf_condition_violations(s, site)
        if bad:
            raise NotASheaf(bad)
        frag.add(s)
    if "terminal" in close_under:
        frag.add(terminal_presheaf(site.base), origin="terminal")
    changed = True
    while changed:
        changed = False
        if "product" in close_under:
            snapshot = list(frag.members)
            for p in snapshot:
                for q in snapshot:
                    if len(frag.members) >= max_members:
                        frag.notes.append(("member-cap", max_members))
                        changed = False
                        break
                    prod, _, _ = product_presheaf(p, q)
                    before = len(frag.members)
                    frag.add(prod, origin="product")
                    changed = changed or len(frag.members) > before
        if "pullback" in close_under:
            snapshot = list(frag.members)
            grew = False
            for h in snapshot:
                for p in snapshot:
                    for q in snapshot:
                        for f in nat_transformations(p, h):
                            for g in nat_transformations(q, h):
                                if len(frag.members) >= max_members:
                                    frag.notes.append(("member-cap", max_members))
                                    grew = False
                                    break
                                pb, _, _ = pullback_presheaf(f, g)
                                before = len(frag.members)
                                frag.add(pb, origin="pullback")
                                grew = grew or len(frag.members) > before
            changed = changed or grew
    return frag


# ----------------------------------------------------------------------
# sheaf enumeration (small sites only)


def enumerate_all_sheaves(site: SiteLike, max_size: int) -> list[Presheaf]:
    """Every sheaf (canonical form) with all section sets of size <= max_size.
    Sizes forced to 1 by an empty covering are pruned up front."""
    c = site.base
    forced_single = {
        x for x in c.objects if any(len(s) == 0 for s in site.coverings_of(x))
    }
    objs = list(c.objects)
    out: list[Presheaf] = []
    nonid = [a for a in c.arrows if not c.is_identity(a)]

    def maps(dom: tuple, cod: tuple) -> Iterable[dict]:
        for vals in iproduct(cod, repeat=len(dom)):
            yield dict(zip(dom, vals))

    for sizes in iproduct(*[
        ((1,) if x in forced_single else tuple(range(max_size + 1))) for x in objs
    ]):
        secs = {x: tuple(str(i) for i in range(k)) for x, k in zip(objs, sizes)}
        rest_base = {c.identity(x): {el: el for el in secs[x]} for x in objs}

        def rec(i: int, rest: dict) -> None:
            if i == len(nonid):
                p = Presheaf(c, secs, dict(rest))
                if not presheaf_violations(p) and is_sheaf(p, site):
                    out.append(p)
                return
            a = nonid[i]
            for m in maps(secs[c.dst(a)], secs[c.src(a)]):
                rest[a] = m
                ok = True
                for (g, f), gf in c.table.items():
                    if g in rest and f in rest and gf in rest:
                        for el in secs[c.dst(g)]:
                            if rest[gf][el] != rest[f][rest[g][el]]:
                                ok = False
                                break
                    if not ok:
                        break
                if ok:
                    rec(i + 1, rest)
                del rest[a]

        rec(0, dict(rest_base))
    return out


# ----------------------------------------------------------------------
# JSON round trip


def sheaf_to_json(p: Presheaf) -> dict:
    return {
        "sections": {x: list(p.sections[x]) for x in p.base.objects},
        "restrictions": {a: dict(p.restrictions[a]) for a in p.base.arrows},
    }


def sheaf_from_json(doc: Mapping, base: FinCategory) -> Presheaf:
    p = Presheaf(
        base,
        {x: tuple(doc["sections"][x]) for x in base.objects},
        {a: dict(doc["restrictions"][a]) for a in base.arrows},
    )
    return validate_presheaf(p)

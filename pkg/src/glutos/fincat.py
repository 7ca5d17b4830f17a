"""Finite categories presented by explicit composition tables.

Everything downstream reduces to exhaustive search inside such presentations:
limits and colimits are found by enumerating cones, arrow classes by
quantifying over hom sets.  The representation is deliberately plain --
objects and arrows are strings, composition is a dict keyed by (g, f) --
and categories are immutable values once built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

DEFAULT_SHAPE_BOUND = 64


class FincatError(Exception):
    """Base class for errors raised by the category kernel."""


class InvalidCategory(FincatError):
    """Raised when a presentation violates the category laws."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = tuple(violations)
        shown = "; ".join(str(v) for v in self.violations[:4])
        extra = "" if len(self.violations) <= 4 else f" (+{len(self.violations) - 4} more)"
        super().__init__(f"not a category: {shown}{extra}")


class UnknownName(FincatError):
    pass


class ShapeTooLarge(FincatError):
    def __init__(self, size: int, bound: int):
        self.size, self.bound = size, bound
        super().__init__(f"diagram shape has {size} arrows, bound is {bound}")


@dataclass(frozen=True)
class Violation:
    """One broken law, with the witnessing names.

    law is one of: unknown-object, unknown-arrow, duplicate-name,
    bad-endpoints, missing-composite, stray-composite, bad-composite,
    non-associative, missing-identity, bad-identity.
    """

    law: str
    detail: tuple

    def __str__(self) -> str:
        return f"{self.law}{self.detail!r}"


@dataclass(frozen=True)
class Sink:
    """A family of arrows with common target."""

    apex: str
    legs: frozenset[str]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.legs))


@dataclass(frozen=True)
class FinCategory:
    """A finite category: never construct directly, use FinCategory.build
    or validate_category so the laws are checked once up front."""

    objects: tuple[str, ...]
    arrows: tuple[str, ...]
    src_map: Mapping[str, str]
    dst_map: Mapping[str, str]
    table: Mapping[tuple[str, str], str]
    identities: Mapping[str, str]
    _hom: dict = field(default_factory=dict, compare=False, repr=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # ------------------------------------------------------------------
    # construction

    @staticmethod
    def build(
        objects: Iterable[str],
        arrows: Iterable[tuple[str, str, str]],
        compose: Mapping[tuple[str, str], str] | Iterable[tuple[str, str, str]],
        identities: Mapping[str, str],
    ) -> "FinCategory":
        """arrows: (id, src, dst) triples; compose: (g, f) -> g after f."""
        objs = tuple(objects)
        src: dict[str, str] = {}
        dst: dict[str, str] = {}
        arr_list = []
        for a, s, d in arrows:
            arr_list.append(a)
            src[a] = s
            dst[a] = d
        if isinstance(compose, Mapping):
            table = dict(compose)
        else:
            table = {(g, f): gf for g, f, gf in compose}
        cat = FinCategory(objs, tuple(arr_list), src, dst, table, dict(identities))
        bad = category_violations(cat)
        if bad:
            raise InvalidCategory(bad)
        return cat

    # ------------------------------------------------------------------
    # basic queries

    def src(self, a: str) -> str:
        try:
            return self.src_map[a]
        except KeyError:
            raise UnknownName(f"arrow {a!r}") from None

    def dst(self, a: str) -> str:
        try:
            return self.dst_map[a]
        except KeyError:
            raise UnknownName(f"arrow {a!r}") from None

    def identity(self, x: str) -> str:
        try:
            return self.identities[x]
        except KeyError:
            raise UnknownName(f"object {x!r}") from None

    def is_identity(self, a: str) -> bool:
        return self.identities.get(self.src(a)) == a

    def compose(self, g: str, f: str) -> str:
        """g after f.  Raises if the pair is not composable."""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise UnknownName(f"no composite for ({g!r}, {f!r})") from None

    def compose_path(self, *path: str) -> str:
        """compose_path(h, g, f) = h after g after f."""
        out = path[-1]
        for a in reversed(path[:-1]):
            out = self.compose(a, out)
        return out

    def hom(self, x: str, y: str) -> tuple[str, ...]:
        if not self._hom:
            grouped: dict[tuple[str, str], list[str]] = {}
            for a in self.arrows:
                grouped.setdefault((self.src_map[a], self.dst_map[a]), []).append(a)
            for k, v in grouped.items():
                self._hom[k] = tuple(v)
        return self._hom.get((x, y), ())

    def arrows_into(self, y: str) -> tuple[str, ...]:
        key = ("into", y)
        if key not in self._cache:
            self._cache[key] = tuple(a for a in self.arrows if self.dst_map[a] == y)
        return self._cache[key]

    def arrows_out(self, x: str) -> tuple[str, ...]:
        key = ("out", x)
        if key not in self._cache:
            self._cache[key] = tuple(a for a in self.arrows if self.src_map[a] == x)
        return self._cache[key]

    # ------------------------------------------------------------------
    # derived categories

    def opposite(self) -> "FinCategory":
        key = ("op",)
        if key not in self._cache:
            op = FinCategory(
                self.objects,
                self.arrows,
                dict(self.dst_map),
                dict(self.src_map),
                {(g, f): gf for (f, g), gf in self.table.items()},
                dict(self.identities),
            )
            op._cache[key] = self
            self._cache[key] = op
        return self._cache[key]

    def relabel(self, obj_map: Mapping[str, str], arr_map: Mapping[str, str]) -> "FinCategory":
        return FinCategory(
            tuple(obj_map[x] for x in self.objects),
            tuple(arr_map[a] for a in self.arrows),
            {arr_map[a]: obj_map[s] for a, s in self.src_map.items()},
            {arr_map[a]: obj_map[d] for a, d in self.dst_map.items()},
            {(arr_map[g], arr_map[f]): arr_map[gf] for (g, f), gf in self.table.items()},
            {obj_map[x]: arr_map[a] for x, a in self.identities.items()},
        )


def category_violations(c: FinCategory) -> list[Violation]:
    out: list[Violation] = []
    objs = set(c.objects)
    arrs = set(c.arrows)
    if len(objs) != len(c.objects):
        out.append(Violation("duplicate-name", ("objects",)))
    if len(arrs) != len(c.arrows):
        out.append(Violation("duplicate-name", ("arrows",)))
    for a in c.arrows:
        s, d = c.src_map.get(a), c.dst_map.get(a)
        if s not in objs or d not in objs:
            out.append(Violation("bad-endpoints", (a, s, d)))
    if out:
        return out  # cannot meaningfully check laws on a broken carrier

    # identities exist and are endo
    for x in c.objects:
        i = c.identities.get(x)
        if i is None or i not in arrs:
            out.append(Violation("missing-identity", (x,)))
        elif not (c.src_map[i] == x and c.dst_map[i] == x):
            out.append(Violation("bad-identity", (x, i)))

    # table totality and endpoint sanity
    composable = {
        (g, f)
        for f in c.arrows
        for g in c.arrows
        if c.dst_map[f] == c.src_map[g]
    }
    for (g, f), gf in c.table.items():
        if g not in arrs or f not in arrs or gf not in arrs:
            out.append(Violation("unknown-arrow", (g, f, gf)))
            continue
        if (g, f) not in composable:
            out.append(Violation("stray-composite", (g, f)))
        elif not (c.src_map[gf] == c.src_map[f] and c.dst_map[gf] == c.dst_map[g]):
            out.append(Violation("bad-composite", (g, f, gf)))
    for pair in composable:
        if pair not in c.table:
            out.append(Violation("missing-composite", pair))
    if out:
        return out

    # unit laws
    for a in c.arrows:
        if c.table[(a, c.identities[c.src_map[a]])] != a:
            out.append(Violation("bad-identity", (c.src_map[a], a, "right")))
        if c.table[(c.identities[c.dst_map[a]], a)] != a:
            out.append(Violation("bad-identity", (c.dst_map[a], a, "left")))

    # associativity over all composable triples
    for f in c.arrows:
        for g in c.arrows:
            if c.src_map[g] != c.dst_map[f]:
                continue
            gf = c.table[(g, f)]
            for h in c.arrows:
                if c.src_map[h] != c.dst_map[g]:
                    continue
                if c.table[(h, gf)] != c.table[(c.table[(h, g)], f)]:
                    out.append(Violation("non-associative", (h, g, f)))
    return out


def validate_category(c: FinCategory) -> FinCategory:
    """Return c if it satisfies the category laws, else raise InvalidCategory
    carrying the full list of violations."""
    bad = category_violations(c)
    if bad:
        raise InvalidCategory(bad)
    return c


# ----------------------------------------------------------------------
# functors and diagrams


@dataclass(frozen=True)
class Functor:
    source: FinCategory
    target: FinCategory
    on_objects: Mapping[str, str]
    on_arrows: Mapping[str, str]

    def obj(self, x: str) -> str:
        return self.on_objects[x]

    def arr(self, a: str) -> str:
        return self.on_arrows[a]

    def violations(self) -> list[Violation]:
        out: list[Violation] = []
        for x in self.source.objects:
            if self.on_objects.get(x) not in set(self.target.objects):
                out.append(Violation("unknown-object", (x,)))
        for a in self.source.arrows:
            fa = self.on_arrows.get(a)
            if fa is None or fa not in set(self.target.arrows):
                out.append(Violation("unknown-arrow", (a,)))
        if out:
            return out
        for a in self.source.arrows:
            fa = self.on_arrows[a]
            if self.target.src(fa) != self.on_objects[self.source.src(a)] or self.target.dst(
                fa
            ) != self.on_objects[self.source.dst(a)]:
                out.append(Violation("bad-endpoints", (a, fa)))
        if out:
            return out
        for x in self.source.objects:
            if self.on_arrows[self.source.identity(x)] != self.target.identity(self.on_objects[x]):
                out.append(Violation("bad-identity", (x,)))
        for (g, f), gf in self.source.table.items():
            if self.target.compose(self.on_arrows[g], self.on_arrows[f]) != self.on_arrows[gf]:
                out.append(Violation("bad-composite", (g, f)))
        return out

    def check(self) -> "Functor":
        bad = self.violations()
        if bad:
            raise InvalidCategory(bad)
        return self

    def is_faithful(self) -> bool:
        for x in self.source.objects:
            for y in self.source.objects:
                seen: dict[str, str] = {}
                for a in self.source.hom(x, y):
                    fa = self.on_arrows[a]
                    if fa in seen and seen[fa] != a:
                        return False
                    seen[fa] = a
        return True

    def is_full(self) -> bool:
        for x in self.source.objects:
            for y in self.source.objects:
                image = {self.on_arrows[a] for a in self.source.hom(x, y)}
                for b in self.target.hom(self.on_objects[x], self.on_objects[y]):
                    if b not in image:
                        return False
        return True


Diagram = Functor  # a diagram is a functor from a shape category


def opposite_diagram(d: Diagram) -> Diagram:
    return Functor(d.source.opposite(), d.target.opposite(), d.on_objects, d.on_arrows)


# ----------------------------------------------------------------------
# cones, limits, colimits

Cone = tuple[str, tuple[str, ...]]  # (apex, legs aligned with shape.objects)


@dataclass(frozen=True)
class ConeWitness:
    """A universal (co)cone together with its universality certificate:
    for every competitor cone the unique mediating arrow.

    For kind == "limit", legs go apex -> d(X) and mediators go competitor
    apex -> apex.  For kind == "colimit" both directions flip.
    """

    kind: str
    apex: str
    legs: Mapping[str, str]
    mediators: Mapping[Cone, str]


def _cones(d: Diagram) -> list[Cone]:
    """All cones over d, in deterministic order."""
    c = d.target
    shape = d.source
    sobjs = shape.objects
    idx = {x: i for i, x in enumerate(sobjs)}
    n = len(sobjs)
    edges = [
        (idx[shape.src(a)], idx[shape.dst(a)], d.arr(a))
        for a in shape.arrows
        if not shape.is_identity(a)
    ]
    # Assign the slot with the most already-assigned neighbours first: a shape
    # arrow out of an assigned slot forces the leg here outright, and arrows
    # into assigned slots prune candidates before recursing.
    order: list[int] = []
    placed = [False] * n
    deg = [0] * n
    for _ in range(n):
        pick = max(
            (i for i in range(n) if not placed[i]),
            key=lambda i: (deg[i], -i),
        )
        placed[pick] = True
        order.append(pick)
        for s, t, _ in edges:
            if s == pick and not placed[t]:
                deg[t] += 1
            elif t == pick and not placed[s]:
                deg[s] += 1
    rank = {slot: r for r, slot in enumerate(order)}
    forcers: list[list[tuple[int, str]]] = [[] for _ in range(n)]
    checks: list[list[tuple[int, str]]] = [[] for _ in range(n)]
    loops: list[list[str]] = [[] for _ in range(n)]
    for s, t, a in edges:
        if s == t:
            loops[rank[s]].append(a)
        elif rank[s] < rank[t]:
            forcers[rank[t]].append((s, a))
        else:
            checks[rank[s]].append((t, a))
    compose = c.compose
    out: list[Cone] = []
    for apex in c.objects:
        homs = [c.hom(apex, d.obj(x)) for x in sobjs]
        pos = [{a: i for i, a in enumerate(h)} for h in homs]
        legs: list[Optional[str]] = [None] * n
        found: list[tuple[tuple[int, ...], Cone]] = []

        def admit(r: int, cand: str) -> bool:
            for t, a in checks[r]:
                if compose(a, cand) != legs[t]:
                    return False
            for a in loops[r]:
                if compose(a, cand) != cand:
                    return False
            return True

        def rec(r: int) -> None:
            if r == n:
                tup = tuple(legs)  # type: ignore[arg-type]
                found.append(
                    (tuple(pos[j][tup[j]] for j in range(n)), (apex, tup))
                )
                return
            slot = order[r]
            if forcers[r]:
                s0, a0 = forcers[r][0]
                cand = compose(a0, legs[s0])
                for s, a in forcers[r][1:]:
                    if compose(a, legs[s]) != cand:
                        return
                if admit(r, cand):
                    legs[slot] = cand
                    rec(r + 1)
                    legs[slot] = None
                return
            for cand in homs[slot]:
                if admit(r, cand):
                    legs[slot] = cand
                    rec(r + 1)
                    legs[slot] = None

        rec(0)
        # Emit in the lexicographic hom-position order the slots define, so
        # callers that pick the first certified candidate stay stable.
        found.sort(key=lambda kv: kv[0])
        out.extend(cone for _, cone in found)
    return out


def _diagram_key(d: Diagram) -> tuple:
    s = d.source
    return (
        s.objects,
        s.arrows,
        tuple(sorted(s.src_map.items())),
        tuple(sorted(s.dst_map.items())),
        tuple(sorted(s.table.items())),
        tuple(sorted(s.identities.items())),
        tuple(sorted(d.on_objects.items())),
        tuple(sorted(d.on_arrows.items())),
    )


def is_limit_cone(d: Diagram, apex: str, legs: Mapping[str, str]) -> bool:
    c = d.target
    aligned = tuple(legs[x] for x in d.source.objects)
    idx = {x: i for i, x in enumerate(d.source.objects)}
    for a in d.source.arrows:
        if d.source.is_identity(a):
            continue
        if c.compose(d.arr(a), aligned[idx[d.source.src(a)]]) != aligned[idx[d.source.dst(a)]]:
            return False
    w = finite_limit(d, max(DEFAULT_SHAPE_BOUND, len(d.source.arrows)))
    if w is None:
        return False
    wl = tuple(w.legs[x] for x in d.source.objects)
    found = None
    for m in c.hom(apex, w.apex):
        if all(c.compose(wl[i], m) == aligned[i] for i in range(len(aligned))):
            if found is not None:
                return False
            found = m
    return found is not None and is_iso(c, found)


def _certify(d: Diagram, cand: Cone, cones: list[Cone]) -> Optional[ConeWitness]:
    c = d.target
    apex, clegs = cand
    mediators: dict[Cone, str] = {}
    for k in cones:
        kapex, klegs = k
        found = None
        for m in c.hom(kapex, apex):
            if all(c.compose(clegs[i], m) == klegs[i] for i in range(len(clegs))):
                if found is not None:
                    return None  # mediator not unique
                found = m
        if found is None:
            return None
        mediators[k] = found
    return ConeWitness(
        "limit", apex, dict(zip(d.source.objects, clegs)), mediators
    )


def finite_limit(d: Diagram, bound: int = DEFAULT_SHAPE_BOUND) -> Optional[ConeWitness]:
    """Limit of a finite diagram by exhaustive cone search, or None.

    Returns the first universal cone in deterministic order, with the full
    certificate (unique mediator from every cone)."""
    if len(d.source.arrows) > bound:
        raise ShapeTooLarge(len(d.source.arrows), bound)
    key = ("lim", _diagram_key(d))
    if key in d.target._cache:
        return d.target._cache[key]
    cones = _cones(d)
    apexes_seen = {k[0] for k in cones}
    result = None
    for cand in cones:
        # quick reject: every cone apex must map into the candidate apex
        if any(not d.target.hom(a, cand[0]) for a in apexes_seen):
            continue
        w = _certify(d, cand, cones)
        if w is not None:
            result = w
            break
    d.target._cache[key] = result
    return result


def finite_colimit(d: Diagram, bound: int = DEFAULT_SHAPE_BOUND) -> Optional[ConeWitness]:
    """Colimit via the limit search in the opposite category.  Legs go
    d(X) -> apex and mediators go apex -> competitor apex."""
    w = finite_limit(opposite_diagram(d), bound)
    if w is None:
        return None
    return ConeWitness("colimit", w.apex, w.legs, w.mediators)


def is_colimit_cocone(d: Diagram, apex: str, legs: Mapping[str, str]) -> bool:
    return is_limit_cone(opposite_diagram(d), apex, legs)


def _single_shape() -> FinCategory:
    return FinCategory.build(["*"], [("i", "*", "*")], {("i", "i"): "i"}, {"*": "i"})


def _cospan_shape() -> FinCategory:
    arrows = [
        ("ia", "a", "a"), ("ib", "b", "b"), ("ic", "c", "c"),
        ("l", "a", "c"), ("r", "b", "c"),
    ]
    table = {}
    for x, i in (("a", "ia"), ("b", "ib"), ("c", "ic")):
        table[(i, i)] = i
    table[("ic", "l")] = "l"
    table[("l", "ia")] = "l"
    table[("ic", "r")] = "r"
    table[("r", "ib")] = "r"
    return FinCategory.build(["a", "b", "c"], arrows, table, {"a": "ia", "b": "ib", "c": "ic"})


_COSPAN = None


def cospan_diagram(c: FinCategory, f: str, g: str) -> Diagram:
    """Shape a -l-> c <-r- b labeled by the cospan (f, g)."""
    global _COSPAN
    if _COSPAN is None:
        _COSPAN = _cospan_shape()
    if c.dst(f) != c.dst(g):
        raise UnknownName(f"not a cospan: {f!r}, {g!r}")
    return Functor(
        _COSPAN,
        c,
        {"a": c.src(f), "b": c.src(g), "c": c.dst(f)},
        {
            "l": f, "r": g,
            "ia": c.identity(c.src(f)),
            "ib": c.identity(c.src(g)),
            "ic": c.identity(c.dst(f)),
        },
    )


@dataclass(frozen=True)
class PullbackSquare:
    """Canonical pullback of the cospan (f, g): p_f completes f's side,
    so  f . p_f = g . p_g  and (apex, p_f, p_g) is universal."""

    apex: str
    p_f: str
    p_g: str
    witness: ConeWitness


def pullback(c: FinCategory, f: str, g: str) -> Optional[PullbackSquare]:
    """Canonical (first-found) pullback of a cospan, memoized per category."""
    key = ("pb", f, g)
    if key not in c._cache:
        w = finite_limit(cospan_diagram(c, f, g))
        if w is None:
            c._cache[key] = None
        else:
            c._cache[key] = PullbackSquare(w.apex, w.legs["a"], w.legs["b"], w)
    return c._cache[key]


def is_pullback(c: FinCategory, f: str, g: str, p_f: str, p_g: str) -> bool:
    """Is (src(p_f), p_f, p_g) a pullback cone of the cospan (f, g)?"""
    if c.src(p_f) != c.src(p_g):
        return False
    if c.compose(f, p_f) != c.compose(g, p_g):
        return False
    d = cospan_diagram(c, f, g)
    apex = c.src(p_f)
    return is_limit_cone(d, apex, {"a": p_f, "b": p_g, "c": c.compose(f, p_f)})


def has_all_pullbacks_along(c: FinCategory, f: str) -> bool:
    """True if pullback of f exists along every arrow into dst(f)."""
    return all(pullback(c, f, h) is not None for h in c.arrows_into(c.dst(f)))


# ----------------------------------------------------------------------
# arrow classification


@dataclass(frozen=True)
class ArrowClass:
    mono: bool
    epi: bool
    split_mono: bool
    split_epi: bool
    iso: bool


def is_mono(c: FinCategory, f: str) -> bool:
    x = c.src(f)
    for w in c.objects:
        seen: dict[str, str] = {}
        for g in c.hom(w, x):
            fg = c.compose(f, g)
            if fg in seen and seen[fg] != g:
                return False
            seen[fg] = g
    return True


def is_epi(c: FinCategory, f: str) -> bool:
    return is_mono(c.opposite(), f)


def classify_arrow(c: FinCategory, f: str) -> ArrowClass:
    x, y = c.src(f), c.dst(f)
    split_epi = any(c.compose(f, s) == c.identity(y) for s in c.hom(y, x))
    split_mono = any(c.compose(r, f) == c.identity(x) for r in c.hom(y, x))
    mono = is_mono(c, f)
    epi = is_epi(c, f)
    iso = any(
        c.compose(f, s) == c.identity(y) and c.compose(s, f) == c.identity(x)
        for s in c.hom(y, x)
    )
    return ArrowClass(mono, epi, split_mono, split_epi, iso)


def is_iso(c: FinCategory, f: str) -> bool:
    x, y = c.src(f), c.dst(f)
    return any(
        c.compose(f, s) == c.identity(y) and c.compose(s, f) == c.identity(x)
        for s in c.hom(y, x)
    )


def inverse(c: FinCategory, f: str) -> Optional[str]:
    x, y = c.src(f), c.dst(f)
    for s in c.hom(y, x):
        if c.compose(f, s) == c.identity(y) and c.compose(s, f) == c.identity(x):
            return s
    return None


def jointly_monic(c: FinCategory, legs: Sequence[str]) -> bool:
    """Family with common source U is jointly monic: arrows into U are
    separated by postcomposition with the family."""
    u = {c.src(f) for f in legs}
    if len(u) != 1:
        raise UnknownName("jointly_monic expects a common source")
    (u0,) = u
    for w in c.objects:
        hw = c.hom(w, u0)
        for g in hw:
            for h in hw:
                if g < h and all(c.compose(f, g) == c.compose(f, h) for f in legs):
                    return False
    return True


# ----------------------------------------------------------------------
# effective-epi families


@dataclass(frozen=True)
class EffectiveEpiVerdict:
    status: str  # "pass" | "fail" | "inapplicable"
    witness: tuple = ()


def _kernel_diagram(c: FinCategory, sink: Sink) -> Optional[tuple[Diagram, dict[str, str], tuple]]:
    """Diagram of the legs with all ordered pairwise pullbacks, plus the
    canonical cocone legs; None (with the missing cospan) if some pullback
    is absent."""
    legs = sorted(sink.legs)
    sobjs: list[str] = []
    sarrs: list[tuple[str, str, str]] = []
    on_obj: dict[str, str] = {}
    on_arr: dict[str, str] = {}
    cocone: dict[str, str] = {}
    for i, u in enumerate(legs):
        node = f"L{i}"
        sobjs.append(node)
        on_obj[node] = c.src(u)
        cocone[node] = u
    for i, u in enumerate(legs):
        for j, v in enumerate(legs):
            pb = pullback(c, u, v)
            if pb is None:
                return None, {}, (u, v)
            node = f"P{i}.{j}"
            sobjs.append(node)
            on_obj[node] = pb.apex
            sarrs.append((f"p0_{i}.{j}", node, f"L{i}"))
            on_arr[f"p0_{i}.{j}"] = pb.p_f
            sarrs.append((f"p1_{i}.{j}", node, f"L{j}"))
            on_arr[f"p1_{i}.{j}"] = pb.p_g
            cocone[node] = c.compose(u, pb.p_f)
    # build the shape category (free on this graph: no composable non-identity pairs)
    arrows = [(f"id_{x}", x, x) for x in sobjs] + sarrs
    table: dict[tuple[str, str], str] = {}
    ids = {x: f"id_{x}" for x in sobjs}
    for x in sobjs:
        table[(ids[x], ids[x])] = ids[x]
    for a, s, d in sarrs:
        table[(a, ids[s])] = a
        table[(ids[d], a)] = a
    shape = FinCategory.build(sobjs, arrows, table, ids)
    for x in sobjs:
        on_arr[ids[x]] = c.identity(on_obj[x])
    return Functor(shape, c, on_obj, on_arr), cocone, ()


def is_effective_epi_family(
    c: FinCategory, sink: Sink, universal: bool = False
) -> EffectiveEpiVerdict:
    """Is the sink the colimit cocone of its own kernel (legs with all
    ordered pairwise pullbacks)?  With universal=True the pulled sink along
    every arrow into the apex must again be effective epi.

    Missing pairwise pullbacks of the legs make the question inapplicable;
    a missing pullback of a leg along a probe arrow is a failure of
    universality."""
    key = ("eff", sink.apex, sink.legs, universal)
    if key in c._cache:
        return c._cache[key]
    v = _effective_epi_uncached(c, sink, universal)
    c._cache[key] = v
    return v


def _effective_epi_uncached(
    c: FinCategory, sink: Sink, universal: bool
) -> EffectiveEpiVerdict:
    d, cocone, missing = _kernel_diagram(c, sink)
    if d is None:
        return EffectiveEpiVerdict("inapplicable", ("missing-pullback",) + missing)
    if not is_colimit_cocone(d, sink.apex, cocone):
        return EffectiveEpiVerdict("fail", ("not-colimit", sink.apex))
    if not universal:
        return EffectiveEpiVerdict("pass")
    for h in c.arrows_into(sink.apex):
        pulled = []
        for u in sorted(sink.legs):
            pb = pullback(c, u, h)
            if pb is None:
                return EffectiveEpiVerdict("fail", ("missing-pullback-along", h, u))
            pulled.append(pb.p_g)
        sub = is_effective_epi_family(c, Sink(c.src(h), frozenset(pulled)), universal=False)
        if sub.status != "pass":
            return EffectiveEpiVerdict("fail", ("not-stable-along", h) + sub.witness)
    return EffectiveEpiVerdict("pass")


# ----------------------------------------------------------------------
# JSON round trip

_JSON_KEYS = ("objects", "arrows", "compose", "identities")


def category_to_json(c: FinCategory) -> dict:
    return {
        "objects": list(c.objects),
        "arrows": [{"id": a, "src": c.src_map[a], "dst": c.dst_map[a]} for a in c.arrows],
        "compose": [{"g": g, "f": f, "gf": gf} for (g, f), gf in c.table.items()],
        "identities": dict(c.identities),
    }


def category_from_json(doc: Mapping) -> FinCategory:
    for k in _JSON_KEYS:
        if k not in doc:
            raise InvalidCategory([Violation("missing-field", (k,))])
    cat = FinCategory(
        tuple(doc["objects"]),
        tuple(a["id"] for a in doc["arrows"]),
        {a["id"]: a["src"] for a in doc["arrows"]},
        {a["id"]: a["dst"] for a in doc["arrows"]},
        {(e["g"], e["f"]): e["gf"] for e in doc["compose"]},
        dict(doc["identities"]),
    )
    if len(doc["compose"]) != len(cat.table):
        raise InvalidCategory([Violation("duplicate-name", ("compose",))])
    return validate_category(cat)

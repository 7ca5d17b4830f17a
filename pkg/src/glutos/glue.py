"""Gluing machinery over finite categories.

Gamma index shapes, gluing data (gluons) with certificate arrows for the
cocycle conditions GD1-GD4, equivalence-relation pairs and their inverse
images along an arrow, colimits of clopen gluons with effectivity and
universality checks, a local criterion for pullback squares in the set
model, and the realization of a sheaf on a finite frame as a glued
object over the frame's top element.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Optional, Sequence, Union

from .fincat import (
    ConeWitness,
    FinCategory,
    FincatError,
    Functor,
    UnknownName,
    finite_colimit,
    is_colimit_cocone,
    is_mono,
    is_pullback,
    jointly_monic,
    pullback,
)
from .sheafkit import (
    NatTrans,
    NotASheaf,
    Presheaf,
    Sheafification,
    compose_nat,
    factor_through_sheafification,
    is_iso_nat,
    nat_violations,
    presheaf_colimit,
    representable,
    sheaf_condition_violations,
    sheafify,
)
from .site import CloposStructure, SiteLike, clopen_arrows

__all__ = [
    "GlueError",
    "MissingPullback",
    "NoCoproduct",
    "NoCoequalizer",
    "EffectivityFailure",
    "PreconditionSquareNotPullback",
    "NotAFrame",
    "GammaShape",
    "build_gamma",
    "Gluon",
    "GluonVerdict",
    "validate_gluon",
    "validate_m_gluon",
    "expand_m_gluon",
    "canonical_gluon",
    "gluon_to_json",
    "gluon_from_json",
    "GLUON_FORMAT",
    "EqRelPair",
    "EqRelVerdict",
    "eqrel_violations",
    "eqrel_witnesses",
    "is_equivalence_relation",
    "InducedEqRel",
    "induced_eqrel",
    "is_jointly_epi",
    "is_o_coequalizable",
    "LocalCoequalization",
    "is_locally_o_coequalizable",
    "GluonColimitReport",
    "gluon_colimit",
    "SetMap",
    "set_compose",
    "set_pullback",
    "set_is_pullback",
    "set_jointly_surjective",
    "LocalPullbackVerdict",
    "check_local_pullback",
    "LocalInstance",
    "random_set_instance",
    "SheafGluonResult",
    "sheaf_to_gluon",
]


class GlueError(FincatError):
    pass


class MissingPullback(GlueError):
    def __init__(self, which: tuple):
        super().__init__(f"missing pullback of {which!r}")
        self.which = which


class NoCoproduct(GlueError):
    def __init__(self, which: str):
        super().__init__(f"no coproduct of the {which}")
        self.which = which


class NoCoequalizer(GlueError):
    def __init__(self, pair: tuple):
        super().__init__(f"no coequalizer of {pair!r}")
        self.pair = pair


class EffectivityFailure(GlueError):
    """The glued legs fail to recover an overlap as their pullback."""

    def __init__(self, i: str, j: str):
        super().__init__(f"overlap ({i}, {j}) is not the pullback of the glued legs")
        self.i, self.j = i, j


class PreconditionSquareNotPullback(GlueError):
    def __init__(self, which: tuple):
        super().__init__(f"supplied square {which!r} is not a pullback")
        self.which = which


class NotAFrame(GlueError):
    def __init__(self, reason: tuple):
        super().__init__(f"carrier is not a usable finite frame: {reason!r}")
        self.reason = reason


# ----------------------------------------------------------------------
# Gamma shapes

_RESERVED = ("|", ">")


def _check_index(index: Iterable[str]) -> tuple[str, ...]:
    out = tuple(index)
    seen = set()
    for i in out:
        if not isinstance(i, str) or not i or any(ch in i for ch in _RESERVED):
            raise GlueError(f"bad index label {i!r}")
        if i in seen:
            raise GlueError(f"duplicate index label {i!r}")
        seen.add(i)
    return out


@dataclass(frozen=True)
class GammaShape:
    """Index category of a gluing datum.

    full: objects are the one- and two-letter words over the index, with
    projections d0 (first letter) and d1 (second letter) out of every
    two-letter word; d0 and d1 are distinct arrows even on the squares ii.

    monoidal: objects are the nonempty subsets of the index of size at
    most degree, with a unique arrow M -> N whenever N is a subset of M.
    """

    index: tuple[str, ...]
    variant: str
    degree: int
    category: FinCategory

    def single(self, i: str) -> str:
        if i not in self.index:
            raise UnknownName(f"not an index label: {i!r}")
        return i

    def pair(self, i: str, j: str) -> str:
        self.single(i), self.single(j)
        if self.variant == "full":
            return f"{i}|{j}"
        return self.subset((i, j))

    def subset(self, members: Iterable[str]) -> str:
        if self.variant != "monoidal":
            raise GlueError("subsets name objects of monoidal shapes only")
        ms = sorted(set(members))
        for m in ms:
            self.single(m)
        if not ms or len(ms) > self.degree:
            raise UnknownName(f"no object for subset {ms!r}")
        return "|".join(ms)

    def d0(self, i: str, j: str) -> str:
        if self.variant != "full":
            raise GlueError("d0/d1 name arrows of full shapes only")
        return f"d0:{self.pair(i, j)}"

    def d1(self, i: str, j: str) -> str:
        if self.variant != "full":
            raise GlueError("d0/d1 name arrows of full shapes only")
        return f"d1:{self.pair(i, j)}"

    def proj(self, members: Iterable[str], sub: Iterable[str]) -> str:
        m, n = self.subset(members), self.subset(sub)
        if not set(n.split("|")) <= set(m.split("|")):
            raise UnknownName(f"no arrow {m!r} -> {n!r}")
        return f"{m}>{n}"


def build_gamma(index: Iterable[str], variant: str = "full", degree: int = 2) -> GammaShape:
    """Explicit finite index category for gluing data over the index."""
    idx = _check_index(index)
    if variant == "full":
        if degree != 2:
            raise GlueError("full shapes are fixed at degree 2")
        objects = list(idx) + [f"{i}|{j}" for i in idx for j in idx]
        ids = {x: f"id:{x}" for x in objects}
        arrows = [(ids[x], x, x) for x in objects]
        table = {(ids[x], ids[x]): ids[x] for x in objects}
        for i in idx:
            for j in idx:
                p = f"{i}|{j}"
                for name, t in ((f"d0:{p}", i), (f"d1:{p}", j)):
                    arrows.append((name, p, t))
                    table[(name, ids[p])] = name
                    table[(ids[t], name)] = name
        cat = FinCategory.build(objects, arrows, table, ids)
    elif variant == "monoidal":
        if degree < 1:
            raise GlueError("degree must be at least 1")
        subsets = [
            frozenset(s)
            for k in range(1, min(degree, len(idx)) + 1)
            for s in combinations(sorted(idx), k)
        ]
        name = {s: "|".join(sorted(s)) for s in subsets}
        objects = [name[s] for s in subsets]
        arrows = []
        ids = {}
        for m in subsets:
            for n in subsets:
                if n <= m:
                    arrows.append((f"{name[m]}>{name[n]}", name[m], name[n]))
                    if m == n:
                        ids[name[m]] = f"{name[m]}>{name[n]}"
        table = {}
        for m in subsets:
            for n in subsets:
                if not n <= m:
                    continue
                for p in subsets:
                    if p <= n:
                        table[(f"{name[n]}>{name[p]}", f"{name[m]}>{name[n]}")] = (
                            f"{name[m]}>{name[p]}"
                        )
        cat = FinCategory.build(objects, arrows, table, ids)
    else:
        raise GlueError(f"unknown shape variant {variant!r}")
    return GammaShape(idx, variant, degree, cat)


# ----------------------------------------------------------------------
# gluons


@dataclass(frozen=True)
class Gluon:
    """A gluing datum: a labeling of a Gamma shape in a carrier category.

    tau, sections and triples hold optional certificate arrows for the
    GD2, GD3 and GD4 conditions; validation verifies supplied
    certificates and searches for any that are missing.
    """

    shape: GammaShape
    carrier: FinCategory
    on_objects: Mapping[str, str]
    on_arrows: Mapping[str, str]
    tau: Mapping[tuple[str, str], str] = field(default_factory=dict)
    sections: Mapping[str, str] = field(default_factory=dict)
    triples: Mapping[tuple, tuple[str, str, str, str]] = field(default_factory=dict)

    @property
    def index(self) -> tuple[str, ...]:
        return self.shape.index

    def functor(self) -> Functor:
        sc = self.shape.category
        on_arr = dict(self.on_arrows)
        for x in sc.objects:
            on_arr.setdefault(sc.identity(x), self.carrier.identity(self.on_objects[x]))
        return Functor(sc, self.carrier, dict(self.on_objects), on_arr)

    def u(self, i: str) -> str:
        return self.on_objects[self.shape.single(i)]

    def u2(self, i: str, j: str) -> str:
        return self.on_objects[self.shape.pair(i, j)]

    def d0(self, i: str, j: str) -> str:
        if self.shape.variant == "full":
            return self.on_arrows[self.shape.d0(i, j)]
        if i == j:
            return self.carrier.identity(self.u(i))
        return self.on_arrows[self.shape.proj((i, j), (i,))]

    def d1(self, i: str, j: str) -> str:
        if self.shape.variant == "full":
            return self.on_arrows[self.shape.d1(i, j)]
        if i == j:
            return self.carrier.identity(self.u(i))
        return self.on_arrows[self.shape.proj((i, j), (j,))]


@dataclass
class GluonVerdict:
    ok: bool
    failures: tuple[tuple, ...]
    tau: dict[tuple[str, str], str]
    sections: dict[str, str]
    triples: dict[tuple, tuple[str, str, str, str]]


def _verify_or_search(
    given: Optional[str], candidates: Iterable[str], good: Callable[[str], bool]
) -> Optional[str]:
    if given is not None:
        return given if good(given) else None
    for t in candidates:
        if good(t):
            return t
    return None


def validate_gluon(g: Gluon) -> GluonVerdict:
    """Check GD1-GD4; the verdict carries the full certificate set found.

    Monoidal-variant gluons are checked for monic arrow images and for a
    pullback-respecting continuation on every three-element subset of the
    index instead.
    """
    if g.shape.variant == "monoidal":
        return validate_m_gluon(g)
    c = g.carrier
    bad = g.functor().violations()
    if bad:
        return GluonVerdict(
            False, tuple(("not-functorial", v.law) + tuple(v.detail) for v in bad), {}, {}, {}
        )
    fails: list[tuple] = []
    idx = g.shape.index

    for i in idx:
        for j in idx:
            if not jointly_monic(c, [g.d0(i, j), g.d1(i, j)]):
                fails.append(("GD1", i, j))

    tau: dict[tuple[str, str], str] = {}
    for i in idx:
        for j in idx:
            pool = c.hom(g.u2(i, j), g.u2(j, i))

            def swap_ok(t: str, i=i, j=j, pool=pool) -> bool:
                return (
                    t in pool
                    and c.compose(g.d0(j, i), t) == g.d1(i, j)
                    and c.compose(g.d1(j, i), t) == g.d0(i, j)
                )

            t = _verify_or_search(g.tau.get((i, j)), pool, swap_ok)
            if t is None:
                fails.append(("GD2", i, j))
            else:
                tau[(i, j)] = t

    sections: dict[str, str] = {}
    for i in idx:
        pool = c.hom(g.u(i), g.u2(i, i))
        ident = c.identity(g.u(i))

        def sec_ok(s: str, i=i, pool=pool, ident=ident) -> bool:
            return (
                s in pool
                and c.compose(g.d0(i, i), s) == ident
                and c.compose(g.d1(i, i), s) == ident
            )

        s = _verify_or_search(g.sections.get(i), pool, sec_ok)
        if s is None:
            fails.append(("GD3", i))
        else:
            sections[i] = s

    triples: dict[tuple, tuple[str, str, str, str]] = {}
    for i in idx:
        for j in idx:
            for k in idx:
                cert = g.triples.get((i, j, k))
                found = _triple_overlap(c, g, i, j, k, cert)
                if found is None:
                    fails.append(("GD4", i, j, k))
                else:
                    triples[(i, j, k)] = found

    return GluonVerdict(not fails, tuple(fails), tau, sections, triples)


def _triple_overlap(
    c: FinCategory, g: Gluon, i: str, j: str, k: str, cert: Optional[tuple]
) -> Optional[tuple[str, str, str, str]]:
    """A triple overlap for (i, j, k): an apex with legs p0, p, p1 to the
    overlaps ij, ik, jk making all three squares over the single objects
    pullbacks.  Searching over the canonical pullback of the left cospan
    is complete: any valid apex is isomorphic to it."""

    def all_squares(apex: str, p0: str, p: str, p1: str) -> bool:
        return (
            c.src(p0) == apex
            and c.src(p) == apex
            and c.src(p1) == apex
            and is_pullback(c, g.d0(i, j), g.d0(i, k), p0, p)
            and is_pullback(c, g.d1(i, j), g.d0(j, k), p0, p1)
            and is_pullback(c, g.d1(i, k), g.d1(j, k), p, p1)
        )

    if cert is not None:
        return cert if all_squares(*cert) else None
    pb = pullback(c, g.d0(i, j), g.d0(i, k))
    if pb is None:
        return None
    for p1 in c.hom(pb.apex, g.u2(j, k)):
        if all_squares(pb.apex, pb.p_f, pb.p_g, p1):
            return (pb.apex, pb.p_f, pb.p_g, p1)
    return None


def validate_m_gluon(g: Gluon) -> GluonVerdict:
    """Monoidal-variant validation: every arrow image monic, plus a
    continuation to triple overlaps respecting pullbacks, one for each
    three-element subset of the index."""
    if g.shape.variant != "monoidal":
        raise GlueError("expects a monoidal-variant gluon")
    if g.shape.degree != 2:
        raise GlueError("gluing data live on degree-2 shapes")
    c = g.carrier
    bad = g.functor().violations()
    if bad:
        return GluonVerdict(
            False, tuple(("not-functorial", v.law) + tuple(v.detail) for v in bad), {}, {}, {}
        )
    fails: list[tuple] = []
    sc = g.shape.category
    f = g.functor()
    for a in sc.arrows:
        if not sc.is_identity(a) and not is_mono(c, f.arr(a)):
            fails.append(("not-mono", a, f.arr(a)))

    triples: dict[tuple, tuple[str, str, str, str]] = {}
    for i, j, k in combinations(sorted(g.shape.index), 3):

        def all_squares(apex: str, t_ij: str, t_ik: str, t_jk: str, i=i, j=j, k=k) -> bool:
            return (
                c.src(t_ij) == apex
                and c.src(t_ik) == apex
                and c.src(t_jk) == apex
                and is_pullback(c, g.d0(i, j), g.d0(i, k), t_ij, t_ik)
                and is_pullback(c, g.d1(i, j), g.d0(j, k), t_ij, t_jk)
                and is_pullback(c, g.d1(i, k), g.d1(j, k), t_ik, t_jk)
            )

        cert = g.triples.get((i, j, k))
        if cert is not None:
            if all_squares(*cert):
                triples[(i, j, k)] = cert
            else:
                fails.append(("continuation", i, j, k))
            continue
        pb = pullback(c, g.d0(i, j), g.d0(i, k))
        found = None
        if pb is not None:
            for t_jk in c.hom(pb.apex, g.u2(j, k)):
                if all_squares(pb.apex, pb.p_f, pb.p_g, t_jk):
                    found = (pb.apex, pb.p_f, pb.p_g, t_jk)
                    break
        if found is None:
            fails.append(("continuation", i, j, k))
        else:
            triples[(i, j, k)] = found

    return GluonVerdict(not fails, tuple(fails), {}, {}, triples)


def expand_m_gluon(g: Gluon) -> Gluon:
    """The full-variant gluon of a monoidal one: squares ii become the
    single objects with identity projections, and both orders of a pair
    share the subset object, with identity swaps."""
    if g.shape.variant != "monoidal":
        raise GlueError("expects a monoidal-variant gluon")
    c = g.carrier
    idx = g.shape.index
    shape = build_gamma(idx, "full")
    on_objects: dict[str, str] = {}
    on_arrows: dict[str, str] = {}
    tau: dict[tuple[str, str], str] = {}
    sections: dict[str, str] = {}
    for i in idx:
        on_objects[i] = g.u(i)
        sections[i] = c.identity(g.u(i))
    for i in idx:
        for j in idx:
            on_objects[shape.pair(i, j)] = g.u2(i, j)
            on_arrows[shape.d0(i, j)] = g.d0(i, j)
            on_arrows[shape.d1(i, j)] = g.d1(i, j)
            tau[(i, j)] = c.identity(g.u2(i, j))
    return Gluon(shape, c, on_objects, on_arrows, tau, sections, {})


def canonical_gluon(
    c: FinCategory, legs: Sequence[str], labels: Optional[Sequence[str]] = None
) -> Gluon:
    """The gluing datum of a pullbackable family u_i: U_i -> X: overlaps
    are the canonical pairwise pullbacks with their projections."""
    if not legs:
        return Gluon(build_gamma(()), c, {}, {})
    if len({c.dst(u) for u in legs}) != 1:
        raise GlueError("legs must share a target")
    idx = _check_index(labels if labels is not None else (str(n) for n in range(len(legs))))
    if len(idx) != len(legs):
        raise GlueError("labels and legs disagree in length")
    shape = build_gamma(idx, "full")
    leg = dict(zip(idx, legs))
    on_objects = {i: c.src(leg[i]) for i in idx}
    on_arrows: dict[str, str] = {}
    for i in idx:
        for j in idx:
            pb = pullback(c, leg[i], leg[j])
            if pb is None:
                raise MissingPullback((leg[i], leg[j]))
            on_objects[shape.pair(i, j)] = pb.apex
            on_arrows[shape.d0(i, j)] = pb.p_f
            on_arrows[shape.d1(i, j)] = pb.p_g
    return Gluon(shape, c, on_objects, on_arrows)


GLUON_FORMAT = "glutos-gluon/1"


def gluon_to_json(g: Gluon) -> dict:
    return {
        "format": GLUON_FORMAT,
        "index": list(g.shape.index),
        "variant": g.shape.variant,
        "degree": g.shape.degree,
        "objects": dict(sorted(g.on_objects.items())),
        "arrows": dict(sorted(g.on_arrows.items())),
        "tau": sorted([i, j, t] for (i, j), t in g.tau.items()),
        "sections": dict(sorted(g.sections.items())),
        "triples": sorted([list(k), list(v)] for k, v in g.triples.items()),
    }


def gluon_from_json(doc: Mapping, carrier: FinCategory) -> Gluon:
    if doc.get("format") != GLUON_FORMAT:
        raise GlueError(f"unrecognized gluon document {doc.get('format')!r}")
    shape = build_gamma(doc["index"], doc.get("variant", "full"), int(doc.get("degree", 2)))
    on_objects = {str(k): str(v) for k, v in doc["objects"].items()}
    for x in shape.category.objects:
        if x not in on_objects:
            raise GlueError(f"missing object assignment for {x!r}")
    on_arrows = {str(k): str(v) for k, v in doc.get("arrows", {}).items()}
    tau = {(i, j): t for i, j, t in doc.get("tau", ())}
    sections = {str(k): str(v) for k, v in doc.get("sections", {}).items()}
    triples = {tuple(k): tuple(v) for k, v in doc.get("triples", ())}
    return Gluon(shape, carrier, on_objects, on_arrows, tau, sections, triples)


# ----------------------------------------------------------------------
# equivalence relations


@dataclass(frozen=True)
class EqRelPair:
    """Parallel pair d0, d1: U -> X with optional witness arrows:
    reflexivity r: X -> U equalizing both legs to the identity, symmetry
    s: U -> U swapping the legs, and transitivity t out of the canonical
    composable-pairs pullback."""

    d0: str
    d1: str
    reflexivity: Optional[str] = None
    symmetry: Optional[str] = None
    transitivity: Optional[str] = None


@dataclass(frozen=True)
class EqRelVerdict:
    ok: bool
    failures: tuple[tuple, ...]
    pair: EqRelPair


def _parallel(c: FinCategory, d0: str, d1: str) -> tuple[str, str]:
    if c.src(d0) != c.src(d1) or c.dst(d0) != c.dst(d1):
        raise GlueError(f"not a parallel pair: {d0!r}, {d1!r}")
    return c.src(d0), c.dst(d0)


def eqrel_violations(c: FinCategory, d0: str, d1: str) -> list[tuple]:
    """Pointwise checks: the pair is jointly monic and the induced
    relation on arrows W -> X is reflexive, symmetric and transitive for
    every probe object W."""
    u, x = _parallel(c, d0, d1)
    out: list[tuple] = []
    if not jointly_monic(c, [d0, d1]):
        out.append(("not-jointly-monic", d0, d1))
    for w in c.objects:
        rel = {(c.compose(d0, h), c.compose(d1, h)) for h in c.hom(w, u)}
        for a in c.hom(w, x):
            if (a, a) not in rel:
                out.append(("not-reflexive", w, a))
        for a, b in sorted(rel):
            if (b, a) not in rel:
                out.append(("not-symmetric", w, a, b))
        for a, b in sorted(rel):
            for b2, e in sorted(rel):
                if b == b2 and (a, e) not in rel:
                    out.append(("not-transitive", w, a, b, e))
    return out


def eqrel_witnesses(c: FinCategory, d0: str, d1: str) -> EqRelPair:
    u, x = _parallel(c, d0, d1)
    ident = c.identity(x)
    r = next(
        (h for h in c.hom(x, u) if c.compose(d0, h) == ident and c.compose(d1, h) == ident),
        None,
    )
    s = next(
        (h for h in c.hom(u, u) if c.compose(d0, h) == d1 and c.compose(d1, h) == d0),
        None,
    )
    t = None
    pb = pullback(c, d1, d0)
    if pb is not None:
        first, last = c.compose(d0, pb.p_f), c.compose(d1, pb.p_g)
        t = next(
            (h for h in c.hom(pb.apex, u) if c.compose(d0, h) == first and c.compose(d1, h) == last),
            None,
        )
    return EqRelPair(d0, d1, r, s, t)


def is_equivalence_relation(c: FinCategory, d0: str, d1: str) -> EqRelVerdict:
    bad = eqrel_violations(c, d0, d1)
    return EqRelVerdict(not bad, tuple(bad), eqrel_witnesses(c, d0, d1))


@dataclass(frozen=True)
class InducedEqRel:
    """Inverse image of an equivalence relation along an arrow f, built
    from three pullbacks; to_original is the comparison arrow from the
    new relation object back to the old one."""

    pair: EqRelPair
    apex: str
    to_original: str
    verdict: EqRelVerdict


def induced_eqrel(
    c: FinCategory, f: str, e: Union[EqRelPair, tuple[str, str]]
) -> InducedEqRel:
    d0, d1 = (e.d0, e.d1) if isinstance(e, EqRelPair) else e
    _parallel(c, d0, d1)
    pb0 = pullback(c, f, d0)
    if pb0 is None:
        raise MissingPullback((f, d0))
    pb1 = pullback(c, d1, f)
    if pb1 is None:
        raise MissingPullback((d1, f))
    pbm = pullback(c, pb0.p_g, pb1.p_f)
    if pbm is None:
        raise MissingPullback((pb0.p_g, pb1.p_f))
    q0, q1 = pbm.p_f, pbm.p_g
    nd0 = c.compose(pb0.p_f, q0)
    nd1 = c.compose(pb1.p_g, q1)
    v = is_equivalence_relation(c, nd0, nd1)
    return InducedEqRel(v.pair, pbm.apex, c.compose(pb0.p_g, q0), v)


# ----------------------------------------------------------------------
# coequalizability


def _normalize_opens(opens: Union[CloposStructure, Iterable[str]]) -> frozenset[str]:
    if isinstance(opens, CloposStructure):
        return opens.opens
    return frozenset(opens)


def is_jointly_epi(c: FinCategory, legs: Sequence[str]) -> bool:
    """Cancellation: postcomposition along the family is injective."""
    return jointly_monic(c.opposite(), list(legs))


def is_o_coequalizable(
    c: FinCategory, opens: Union[CloposStructure, Iterable[str]], d0: str, d1: str
) -> Optional[str]:
    """First open arrow out of the pair's target equalizing the legs."""
    _parallel(c, d0, d1)
    x = c.dst(d0)
    for q in sorted(_normalize_opens(opens)):
        if c.src(q) == x and c.compose(q, d0) == c.compose(q, d1):
            return q
    return None


@dataclass(frozen=True)
class LocalCoequalization:
    legs: tuple[str, ...]
    induced: Mapping[str, InducedEqRel]
    coeqs: Mapping[str, str]


def is_locally_o_coequalizable(
    c: FinCategory,
    opens: Union[CloposStructure, Iterable[str]],
    d0: str,
    d1: str,
    max_legs: Optional[int] = None,
) -> Optional[LocalCoequalization]:
    """Search for a finite jointly-epi family of open arrows into the
    pair's target along which every induced relation is coequalizable by
    an open arrow.  Families are tried smallest first."""
    ops = _normalize_opens(opens)
    _parallel(c, d0, d1)
    x = c.dst(d0)
    pool = sorted(u for u in ops if c.dst(u) == x)
    cap = len(pool) if max_legs is None else min(max_legs, len(pool))
    for k in range(1, cap + 1):
        for combo in combinations(pool, k):
            if not is_jointly_epi(c, combo):
                continue
            induced: dict[str, InducedEqRel] = {}
            coeqs: dict[str, str] = {}
            good = True
            for u in combo:
                try:
                    ind = induced_eqrel(c, u, (d0, d1))
                except MissingPullback:
                    good = False
                    break
                q = is_o_coequalizable(c, ops, ind.pair.d0, ind.pair.d1)
                if q is None:
                    good = False
                    break
                induced[u] = ind
                coeqs[u] = q
            if good:
                return LocalCoequalization(combo, induced, coeqs)
    return None


# ----------------------------------------------------------------------
# gluon colimits


def _discrete_diagram(c: FinCategory, assignment: Mapping[str, str]) -> Functor:
    objs = list(assignment)
    ids = {x: f"id:{x}" for x in objs}
    arrows = [(ids[x], x, x) for x in objs]
    table = {(ids[x], ids[x]): ids[x] for x in objs}
    shape = FinCategory.build(objs, arrows, table, ids)
    return Functor(
        shape, c, dict(assignment), {ids[x]: c.identity(v) for x, v in assignment.items()}
    )


_PARALLEL_SHAPE: Optional[FinCategory] = None


def _parallel_diagram(c: FinCategory, e0: str, e1: str) -> Functor:
    global _PARALLEL_SHAPE
    if _PARALLEL_SHAPE is None:
        arrows = [("ia", "a", "a"), ("ib", "b", "b"), ("e0", "a", "b"), ("e1", "a", "b")]
        table = {
            ("ia", "ia"): "ia",
            ("ib", "ib"): "ib",
            ("e0", "ia"): "e0",
            ("ib", "e0"): "e0",
            ("e1", "ia"): "e1",
            ("ib", "e1"): "e1",
        }
        _PARALLEL_SHAPE = FinCategory.build(["a", "b"], arrows, table, {"a": "ia", "b": "ib"})
    return Functor(
        _PARALLEL_SHAPE,
        c,
        {"a": c.src(e0), "b": c.dst(e0)},
        {"e0": e0, "e1": e1, "ia": c.identity(c.src(e0)), "ib": c.identity(c.dst(e0))},
    )


def _cocone_mediator(c: FinCategory, w: ConeWitness, cocone: Mapping[str, str], tgt: str) -> str:
    """Unique arrow out of a colimit apex commuting with a cocone; found
    by search so nothing depends on how the witness keys its mediators."""
    found = None
    for m in c.hom(w.apex, tgt):
        if all(c.compose(m, w.legs[n]) == cocone[n] for n in cocone):
            if found is not None:
                raise GlueError(f"mediator out of {w.apex!r} is not unique")
            found = m
    if found is None:
        raise GlueError(f"no mediator out of {w.apex!r}")
    return found


@dataclass
class GluonColimitReport:
    apex: str
    legs: dict[str, str]
    coequalizer: str
    witness: ConeWitness
    singles: ConeWitness
    pairs: ConeWitness
    pair_arrows: tuple[str, str]
    eqrel: EqRelVerdict
    pair_open: bool
    legs_clopen: bool
    effectivity: tuple[tuple, ...]
    universality: tuple[tuple, ...]
    local_coeq: Optional[LocalCoequalization]


def _pulled_coequalizer_note(
    c: FinCategory, d0: str, d1: str, q: str, h: str
) -> Optional[tuple]:
    pbq = pullback(c, q, h)
    if pbq is None:
        return ("universality-skipped", h, "no-pullback-of-coequalizer")
    pbe = pullback(c, c.compose(q, d0), h)
    if pbe is None:
        return ("universality-skipped", h, "no-pullback-of-composite")

    def induced(d: str) -> Optional[str]:
        want_f, want_g = c.compose(d, pbe.p_f), pbe.p_g
        found = None
        for m in c.hom(pbe.apex, pbq.apex):
            if c.compose(pbq.p_f, m) == want_f and c.compose(pbq.p_g, m) == want_g:
                if found is not None:
                    return None
                found = m
        return found

    nd0, nd1 = induced(d0), induced(d1)
    if nd0 is None or nd1 is None:
        return ("universality-skipped", h, "no-induced-pair")
    ok = is_colimit_cocone(
        _parallel_diagram(c, nd0, nd1),
        c.src(h),
        {"a": c.compose(pbq.p_g, nd0), "b": pbq.p_g},
    )
    return None if ok else ("universality-failed", h)


def gluon_colimit(
    g: Gluon, p: SiteLike, regime: str = "strong", strict: bool = True
) -> GluonColimitReport:
    """Glue a clopen gluon: coproducts of the pieces and the overlaps,
    the induced parallel pair, its coequalizer, and the checks that make
    the result a genuine gluing (open equivalence relation, clopen legs,
    stability of the coequalizer under pullback, and effectivity: every
    overlap is recovered as the pullback of its two legs).

    regime "weak" additionally requires the induced pair to be locally
    coequalizable by open arrows before gluing.  With strict=True any
    failed check raises; otherwise failures are collected in the report.
    """
    c = g.carrier
    if c != p.base:
        raise GlueError("gluon and site disagree on the carrier category")
    opens = clopen_arrows(p).opens
    f = g.functor()
    bad = f.violations()
    if bad:
        raise GlueError(("not-functorial", bad[0]))
    for a in g.shape.category.arrows:
        if f.arr(a) not in opens:
            raise GlueError(("not-clopen", a, f.arr(a)))
    idx = g.shape.index

    singles = finite_colimit(_discrete_diagram(c, {i: g.u(i) for i in idx}))
    if singles is None:
        raise NoCoproduct("pieces")
    pairs = finite_colimit(
        _discrete_diagram(c, {f"{i}|{j}": g.u2(i, j) for i in idx for j in idx})
    )
    if pairs is None:
        raise NoCoproduct("overlaps")
    inj = singles.legs
    d0_big = _cocone_mediator(
        c,
        pairs,
        {f"{i}|{j}": c.compose(inj[i], g.d0(i, j)) for i in idx for j in idx},
        singles.apex,
    )
    d1_big = _cocone_mediator(
        c,
        pairs,
        {f"{i}|{j}": c.compose(inj[j], g.d1(i, j)) for i in idx for j in idx},
        singles.apex,
    )

    eq = is_equivalence_relation(c, d0_big, d1_big)
    pair_open = d0_big in opens and d1_big in opens
    if strict and not (eq.ok and pair_open):
        raise GlueError(("pair-not-open-equivalence-relation", eq.failures, pair_open))

    local = None
    if regime == "weak":
        local = is_locally_o_coequalizable(c, opens, d0_big, d1_big)
        if local is None:
            raise GlueError(("not-locally-coequalizable", d0_big, d1_big))
    elif regime != "strong":
        raise GlueError(f"unknown regime {regime!r}")

    coeq = finite_colimit(_parallel_diagram(c, d0_big, d1_big))
    if coeq is None:
        raise NoCoequalizer((d0_big, d1_big))
    q = coeq.legs["b"]

    legs = {i: c.compose(q, inj[i]) for i in idx}
    legs_clopen = all(u in opens for u in legs.values())
    if strict and not legs_clopen:
        raise GlueError(("legs-not-clopen", legs))

    effectivity: list[tuple] = []
    for i in idx:
        for j in idx:
            if not is_pullback(c, legs[i], legs[j], g.d0(i, j), g.d1(i, j)):
                if strict:
                    raise EffectivityFailure(i, j)
                effectivity.append((i, j))

    universality: list[tuple] = []
    for h in c.arrows_into(coeq.apex):
        note = _pulled_coequalizer_note(c, d0_big, d1_big, q, h)
        if note is not None:
            if strict and note[0] == "universality-failed":
                raise GlueError(note)
            universality.append(note)

    return GluonColimitReport(
        apex=coeq.apex,
        legs=legs,
        coequalizer=q,
        witness=coeq,
        singles=singles,
        pairs=pairs,
        pair_arrows=(d0_big, d1_big),
        eqrel=eq,
        pair_open=pair_open,
        legs_clopen=legs_clopen,
        effectivity=tuple(effectivity),
        universality=tuple(universality),
        local_coeq=local,
    )


# ----------------------------------------------------------------------
# the set model and the local pullback criterion


@dataclass(frozen=True)
class SetMap:
    """Function between explicit finite sets; table[i] is the image of
    src[i].  Elements must be hashable and distinct within a set."""

    src: tuple
    dst: tuple
    table: tuple

    def __post_init__(self):
        if len(self.table) != len(self.src):
            raise GlueError("table length disagrees with the source")
        if len(set(self.src)) != len(self.src) or len(set(self.dst)) != len(self.dst):
            raise GlueError("duplicate elements")
        dst = set(self.dst)
        if any(v not in dst for v in self.table):
            raise GlueError("value outside the target")

    @staticmethod
    def of(src: Iterable, dst: Iterable, fn: Callable) -> "SetMap":
        s = tuple(src)
        return SetMap(s, tuple(dst), tuple(fn(x) for x in s))

    def __call__(self, x: Hashable) -> Hashable:
        return self.table[self.src.index(x)]


def set_compose(g: SetMap, f: SetMap) -> SetMap:
    if f.dst != g.src:
        raise GlueError("maps are not composable")
    return SetMap(f.src, g.dst, tuple(g(v) for v in f.table))


def set_pullback(f: SetMap, g: SetMap) -> tuple[tuple, SetMap, SetMap]:
    """Canonical pullback of a cospan: matched pairs with projections."""
    if f.dst != g.dst:
        raise GlueError("not a cospan")
    apex = tuple((x, y) for x in f.src for y in g.src if f(x) == g(y))
    p_f = SetMap(apex, f.src, tuple(x for x, _ in apex))
    p_g = SetMap(apex, g.src, tuple(y for _, y in apex))
    return apex, p_f, p_g


def set_is_pullback(f: SetMap, g: SetMap, p_f: SetMap, p_g: SetMap) -> bool:
    """A commuting square on the cospan (f, g) is a pullback iff its
    comparison with the canonical matched-pairs square is a bijection."""
    if p_f.src != p_g.src or p_f.dst != f.src or p_g.dst != g.src:
        return False
    if any(f(p_f(t)) != g(p_g(t)) for t in p_f.src):
        return False
    apex, _, _ = set_pullback(f, g)
    image = [(p_f(t), p_g(t)) for t in p_f.src]
    return len(set(image)) == len(image) and set(image) == set(apex)


def set_jointly_surjective(legs: Sequence[SetMap], target: tuple) -> bool:
    tgt = tuple(target)
    if any(leg.dst != tgt for leg in legs):
        return False
    return {v for leg in legs for v in leg.table} == set(tgt)


@dataclass(frozen=True)
class LocalPullbackVerdict:
    """Verdict of the local criterion: the candidate square is a
    pullback iff every ceiling square over the three covers is one; the
    direct check is carried alongside and the two always agree."""

    square: bool
    ceilings: Mapping[tuple[int, int, int], bool]
    agrees: bool

    def __bool__(self) -> bool:
        return all(self.ceilings.values())


def check_local_pullback(
    f: SetMap,
    g: SetMap,
    p_x: SetMap,
    p_y: SetMap,
    xs: Sequence[SetMap],
    ys: Sequence[SetMap],
    zs: Sequence[SetMap],
    pieces: Optional[Mapping[tuple, tuple[SetMap, SetMap]]] = None,
) -> LocalPullbackVerdict:
    """Local criterion for a candidate square over the cospan (f, g) in
    the set model.

    xs, ys, zs are jointly surjective covers of the three corners.  The
    ceiling over (i, k, j) sits above the side squares X_i x_Z Z_k and
    Z_k x_Z Y_j; the candidate is a pullback iff all ceilings are.
    Supplied side squares in pieces (keys ("X", i, k) and ("Y", k, j))
    are verified and must be pullbacks; the tower itself is always built
    canonically, which is harmless since the criterion is invariant
    under isomorphism of the squares.
    """
    if f.dst != g.dst:
        raise GlueError("not a cospan")
    if p_x.dst != f.src or p_y.dst != g.src or p_x.src != p_y.src:
        raise GlueError("bad candidate square legs")
    if any(f(p_x(t)) != g(p_y(t)) for t in p_x.src):
        raise GlueError("candidate square does not commute")
    for legs, tgt, label in ((xs, f.src, "X"), (ys, g.src, "Y"), (zs, f.dst, "Z")):
        if not set_jointly_surjective(legs, tgt):
            raise GlueError(f"{label} cover is not jointly surjective")
    if pieces:
        for key, (to_a, to_b) in pieces.items():
            if key[0] == "X":
                i, k = key[1], key[2]
                ok = set_is_pullback(set_compose(f, xs[i]), zs[k], to_a, to_b)
            elif key[0] == "Y":
                k, j = key[1], key[2]
                ok = set_is_pullback(zs[k], set_compose(g, ys[j]), to_a, to_b)
            else:
                raise GlueError(f"unknown piece {key!r}")
            if not ok:
                raise PreconditionSquareNotPullback(key)

    ceilings: dict[tuple[int, int, int], bool] = {}
    for i, xm in enumerate(xs):
        for k, zm in enumerate(zs):
            x_ik = tuple((a, e) for a in xm.src for e in zm.src if f(xm(a)) == zm(e))
            q_x = SetMap(x_ik, zm.src, tuple(e for _, e in x_ik))
            for j, ym in enumerate(ys):
                y_kj = tuple((e, b) for e in zm.src for b in ym.src if zm(e) == g(ym(b)))
                q_y = SetMap(y_kj, zm.src, tuple(e for e, _ in y_kj))
                apex = tuple(
                    (t, a, e, b)
                    for t in p_x.src
                    for a in xm.src
                    for e in zm.src
                    for b in ym.src
                    if xm(a) == p_x(t) and ym(b) == p_y(t) and zm(e) == f(p_x(t))
                )
                m_x = SetMap(apex, x_ik, tuple((a, e) for _, a, e, _ in apex))
                m_y = SetMap(apex, y_kj, tuple((e, b) for _, _, e, b in apex))
                ceilings[(i, k, j)] = set_is_pullback(q_x, q_y, m_x, m_y)

    square = set_is_pullback(f, g, p_x, p_y)
    agrees = square == all(ceilings.values())
    if not agrees:
        raise GlueError(("criterion-mismatch", square, ceilings))
    return LocalPullbackVerdict(square, ceilings, agrees)


@dataclass(frozen=True)
class LocalInstance:
    f: SetMap
    g: SetMap
    p_x: SetMap
    p_y: SetMap
    xs: tuple[SetMap, ...]
    ys: tuple[SetMap, ...]
    zs: tuple[SetMap, ...]


def _random_cover(rng: random.Random, base: tuple) -> tuple[SetMap, ...]:
    if not base:
        return ()
    k = rng.randint(1, 2)
    pieces: list[list] = [[] for _ in range(k)]
    for v in base:
        pieces[rng.randrange(k)].append(v)
    for piece in pieces:
        if not piece:
            piece.append(base[rng.randrange(len(base))])
    legs = [SetMap(tuple(piece), base, tuple(piece)) for piece in pieces]
    if rng.random() < 0.3:
        doubled = tuple(("q", v, r) for v in base for r in (0, 1))
        legs.append(SetMap(doubled, base, tuple(v for _, v, _ in doubled)))
    return tuple(legs)


def random_set_instance(rng: random.Random, max_size: int = 3) -> LocalInstance:
    """Seeded random cospan, candidate square and covers, for exercising
    the local criterion; roughly half the candidates are the canonical
    pullback, the rest are perturbed (subsets or duplicated rows)."""
    nz = rng.randint(1, max_size)
    zset = tuple(range(nz))
    nx, ny = rng.randint(0, max_size), rng.randint(0, max_size)
    xset, yset = tuple(range(nx)), tuple(range(ny))
    f = SetMap(xset, zset, tuple(rng.randrange(nz) for _ in xset))
    g = SetMap(yset, zset, tuple(rng.randrange(nz) for _ in yset))
    canon, cp_x, cp_y = set_pullback(f, g)
    mode = rng.random()
    if mode < 0.45 or not canon:
        p_x, p_y = cp_x, cp_y
    elif mode < 0.8:
        sub = tuple(t for t in canon if rng.random() < 0.6)
        p_x = SetMap(sub, xset, tuple(x for x, _ in sub))
        p_y = SetMap(sub, yset, tuple(y for _, y in sub))
    else:
        extra = canon[rng.randrange(len(canon))]
        apex = canon + (("dup", extra),)
        p_x = SetMap(apex, xset, cp_x.table + (extra[0],))
        p_y = SetMap(apex, yset, cp_y.table + (extra[1],))
    return LocalInstance(
        f, g, p_x, p_y, _random_cover(rng, xset), _random_cover(rng, yset), _random_cover(rng, zset)
    )


# ----------------------------------------------------------------------
# sheaves on finite frames as glued objects


@dataclass(frozen=True)
class FrameData:
    top: str
    bottom: str
    leq: Mapping[tuple[str, str], bool]
    meet: Mapping[tuple[str, str], str]
    join: Mapping[tuple[str, str], str]

    def arrow(self, c: FinCategory, a: str, b: str) -> str:
        hom = c.hom(a, b)
        if not hom:
            raise GlueError(f"no arrow {a!r} -> {b!r} in the frame")
        return hom[0]


def _frame_data(p: SiteLike) -> FrameData:
    c = p.base
    for x in c.objects:
        for y in c.objects:
            if len(c.hom(x, y)) > 1:
                raise NotAFrame(("not-thin", x, y))
    leq = {(x, y): bool(c.hom(x, y)) for x in c.objects for y in c.objects}
    for x in c.objects:
        for y in c.objects:
            if x != y and leq[(x, y)] and leq[(y, x)]:
                raise NotAFrame(("not-skeletal", x, y))
    tops = [t for t in c.objects if all(leq[(x, t)] for x in c.objects)]
    bottoms = [b for b in c.objects if all(leq[(b, x)] for x in c.objects)]
    if len(tops) != 1 or len(bottoms) != 1:
        raise NotAFrame(("not-bounded",))
    meet: dict[tuple[str, str], str] = {}
    join: dict[tuple[str, str], str] = {}
    for x in c.objects:
        for y in c.objects:
            lower = [w for w in c.objects if leq[(w, x)] and leq[(w, y)]]
            best = [w for w in lower if all(leq[(v, w)] for v in lower)]
            if len(best) != 1:
                raise NotAFrame(("no-meet", x, y))
            meet[(x, y)] = best[0]
            upper = [w for w in c.objects if leq[(x, w)] and leq[(y, w)]]
            least = [w for w in upper if all(leq[(w, v)] for v in upper)]
            if len(least) != 1:
                raise NotAFrame(("no-join", x, y))
            join[(x, y)] = least[0]
    for a in c.objects:
        for b in c.objects:
            for e in c.objects:
                if meet[(a, join[(b, e)])] != join[(meet[(a, b)], meet[(a, e)])]:
                    raise NotAFrame(("not-distributive", a, b, e))
    bottom = bottoms[0]
    if not p.is_covering(bottom, ()):
        raise NotAFrame(("no-empty-covering", bottom))
    for x in c.objects:
        for s in p.coverings_of(x):
            j = bottom
            for u in s:
                j = join[(j, c.src(u))]
            if j != x:
                raise NotAFrame(("covering-beyond-join", x, tuple(sorted(s))))
    return FrameData(tops[0], bottom, leq, meet, join)


def _frame_join(fd: FrameData, parts: Iterable[str]) -> str:
    out = fd.bottom
    for w in parts:
        out = fd.join[(out, w)]
    return out


@dataclass
class SheafGluonResult:
    """A sheaf on a finite frame realized as a glued object.

    index enumerates one gluing piece per section of the sheaf; meets
    sends each unordered pair of pieces to the piece over their
    agreement open.  The glued presheaf carries legs from each piece's
    representable, the canonical arrow to the representable of the top,
    and the comparison back to the sheaf, which is an isomorphism.
    """

    site: SiteLike
    sheaf: Presheaf
    index: tuple[str, ...]
    elements: dict[str, tuple[str, Hashable]]
    meets: dict[tuple[str, str], str]
    gluon: Gluon
    verdict: GluonVerdict
    sheafification: Sheafification
    glued: Presheaf
    legs: dict[str, NatTrans]
    to_base: NatTrans
    round_trip: NatTrans
    iso: bool


def sheaf_to_gluon(sheaf: Presheaf, site: SiteLike) -> SheafGluonResult:
    """Realize a sheaf on a finite frame as the gluing of one
    representable piece per section, overlapping along agreement opens.

    The pieces are indexed by pairs (open, section); the overlap of two
    pieces is the largest open below both on which the two sections
    restrict equally.  Gluing the monoidal datum of representables and
    sheafifying recovers the sheaf, and the verified isomorphism is
    returned."""
    c = site.base
    fd = _frame_data(site)
    bad = sheaf_condition_violations(sheaf, site)
    if bad:
        raise NotASheaf(bad)

    labels: list[str] = []
    elements: dict[str, tuple[str, Hashable]] = {}
    for u in c.objects:
        for x in sheaf.sections[u]:
            label = f"{u}@{x}"
            if label in elements:
                raise GlueError(f"section label collision at {label!r}")
            labels.append(label)
            elements[label] = (u, x)
    index = tuple(sorted(labels))

    def restrict_to(w: str, u: str, x: Hashable) -> Hashable:
        return sheaf.restrict(fd.arrow(c, w, u), x)

    meets: dict[tuple[str, str], str] = {}
    pair_open: dict[tuple[str, str], str] = {}
    for a, b in combinations(index, 2):
        (ua, xa), (ub, xb) = elements[a], elements[b]
        agree = [
            w
            for w in c.objects
            if fd.leq[(w, fd.meet[(ua, ub)])]
            and restrict_to(w, ua, xa) == restrict_to(w, ub, xb)
        ]
        w_star = _frame_join(fd, agree)
        if not site.is_covering(w_star, frozenset(fd.arrow(c, w, w_star) for w in agree)):
            raise NotAFrame(("missing-covering", w_star))
        if restrict_to(w_star, ua, xa) != restrict_to(w_star, ub, xb):
            raise GlueError(("separation-failed", a, b, w_star))
        z = restrict_to(w_star, ua, xa)
        meet_label = f"{w_star}@{z}"
        if meet_label not in elements:
            raise GlueError(("meet-not-indexed", a, b, meet_label))
        meets[(a, b)] = meet_label
        pair_open[(a, b)] = w_star

    shape = build_gamma(index, "monoidal")
    on_objects: dict[str, str] = {}
    on_arrows: dict[str, str] = {}
    for a in index:
        on_objects[a] = elements[a][0]
    for a, b in combinations(index, 2):
        pair = shape.pair(a, b)
        w = pair_open[(a, b)]
        on_objects[pair] = w
        on_arrows[shape.proj((a, b), (a,))] = fd.arrow(c, w, elements[a][0])
        on_arrows[shape.proj((a, b), (b,))] = fd.arrow(c, w, elements[b][0])
    gluon = Gluon(shape, c, on_objects, on_arrows)
    verdict = validate_m_gluon(gluon)
    if not verdict.ok:
        raise GlueError(("gluing-datum-invalid", verdict.failures))
    gluon = replace(gluon, triples=dict(verdict.triples))

    nodes = {n: representable(c, on_objects[n]) for n in shape.category.objects}
    edges = []
    for arr in shape.category.arrows:
        if shape.category.is_identity(arr):
            continue
        m, n = shape.category.src(arr), shape.category.dst(arr)
        base_arrow = fd.arrow(c, on_objects[m], on_objects[n])
        t = NatTrans(
            nodes[m],
            nodes[n],
            {
                v: {h: c.compose(base_arrow, h) for h in nodes[m].sections[v]}
                for v in c.objects
            },
        )
        edges.append((m, n, t))
    colim, colim_legs = presheaf_colimit(nodes, edges)
    sh = sheafify(colim, site)
    glued = sh.sheaf

    legs = {a: compose_nat(sh.unit, colim_legs[a]) for a in index}
    rep_top = representable(c, fd.top)
    to_base = NatTrans(
        glued,
        rep_top,
        {
            v: {el: rep_top.sections[v][0] for el in glued.sections[v]}
            for v in c.objects
        },
    )

    # comparison out of the raw colimit: a piece's representable maps to
    # the sheaf by restricting its section
    comp: dict[str, dict] = {v: {} for v in c.objects}
    for n in shape.category.objects:
        un = on_objects[n]
        first = n.split("|", 1)[0]
        sec = restrict_to(un, *elements[first])
        for v in c.objects:
            for h in nodes[n].sections[v]:
                cls = colim_legs[n].at(v, h)
                val = sheaf.restrict(h, sec)
                if comp[v].get(cls, val) != val:
                    raise GlueError(("comparison-mismatch", n, v, h))
                comp[v][cls] = val
    t = NatTrans(colim, sheaf, comp)
    if nat_violations(t):
        raise GlueError(("comparison-not-natural", nat_violations(t)[0]))
    round_trip = factor_through_sheafification(t, sh)
    if round_trip is None:
        raise GlueError("comparison does not factor through the glued sheaf")

    return SheafGluonResult(
        site=site,
        sheaf=sheaf,
        index=index,
        elements=elements,
        meets=meets,
        gluon=gluon,
        verdict=verdict,
        sheafification=sh,
        glued=glued,
        legs=legs,
        to_base=to_base,
        round_trip=round_trip,
        iso=is_iso_nat(round_trip),
    )

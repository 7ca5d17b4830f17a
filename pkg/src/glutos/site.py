"""Pretopologies on finite categories.

A presite is a finite category together with covering sinks subject to four
axioms: iso singletons cover (PT1), coverings pull back (PT2), coverings
compose (PT3), and any sink of open arrows dominated by a covering is itself
a covering (PT4, refinement completeness).  The arrows occurring as covering
legs are the open (equivalently clopen) arrows O_tau.

Two site flavors share one informal interface: `Pretopology` stores its
coverings explicitly, `PredicateSite` decides them lazily (needed when the
covering family is too large to materialize, e.g. jointly surjective
families of injections between bounded finite sets).  The operator and
completion functions require the explicit flavor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

from .fincat import (
    FinCategory,
    FincatError,
    Functor,
    Sink,
    has_all_pullbacks_along,
    is_effective_epi_family,
    is_iso,
    is_mono,
    pullback,
)

SINK_SPACE_CAP = 1 << 14


class SiteError(FincatError):
    pass


class NotAPretopology(SiteError):
    def __init__(self, failures: Sequence[tuple]):
        self.failures = tuple(failures)
        super().__init__(f"not a pretopology: {self.failures[:3]!r}")


# ----------------------------------------------------------------------
# explicit pretopologies


@dataclass(frozen=True)
class Pretopology:
    base: FinCategory
    coverings: Mapping[str, frozenset[frozenset[str]]]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @staticmethod
    def build(base: FinCategory, sinks: Iterable[Sink | tuple]) -> "Pretopology":
        cov: dict[str, set[frozenset[str]]] = {x: set() for x in base.objects}
        for s in sinks:
            apex, legs = (s.apex, s.legs) if isinstance(s, Sink) else s
            cov[apex].add(frozenset(legs))
        return Pretopology(base, {x: frozenset(v) for x, v in cov.items()})

    def is_covering(self, apex: str, legs: Iterable[str]) -> bool:
        return frozenset(legs) in self.coverings.get(apex, frozenset())

    def coverings_of(self, apex: str) -> tuple[frozenset[str], ...]:
        return tuple(
            sorted(self.coverings.get(apex, frozenset()), key=lambda s: (len(s), sorted(s)))
        )

    def iter_coverings(self, apex: str, max_legs: Optional[int] = None) -> Iterator[frozenset[str]]:
        for s in self.coverings_of(apex):
            if max_legs is None or len(s) <= max_legs:
                yield s

    def open_arrows(self) -> frozenset[str]:
        if "opens" not in self._cache:
            self._cache["opens"] = frozenset(
                u for sinks in self.coverings.values() for s in sinks for u in s
            )
        return self._cache["opens"]

    def opens_into(self, apex: str) -> tuple[str, ...]:
        opens = self.open_arrows()
        return tuple(a for a in self.base.arrows_into(apex) if a in opens)

    def all_sinks(self) -> Iterator[Sink]:
        for x in self.base.objects:
            for s in self.coverings_of(x):
                yield Sink(x, s)

    def with_sinks(self, extra: Iterable[Sink]) -> "Pretopology":
        return Pretopology.build(self.base, list(self.all_sinks()) + list(extra))

    @property
    def exhaustive(self) -> bool:
        return True


@dataclass(frozen=True)
class PredicateSite:
    """Coverings decided by a predicate over (apex, frozenset-of-legs).

    `coverings_of` enumerates sinks over the declared opens up to
    `max_legs`; quantifier-heavy callers must treat the result as a bounded
    sample, which is why verdicts derived from it say so."""

    base: FinCategory
    opens: frozenset[str]
    predicate: Callable[[str, frozenset[str]], bool]
    max_legs: Optional[int] = None
    name: str = ""

    def is_covering(self, apex: str, legs: Iterable[str]) -> bool:
        legs = frozenset(legs)
        if any(self.base.dst(u) != apex for u in legs):
            return False
        return bool(self.predicate(apex, legs))

    def open_arrows(self) -> frozenset[str]:
        return self.opens

    def opens_into(self, apex: str) -> tuple[str, ...]:
        return tuple(a for a in self.base.arrows_into(apex) if a in self.opens)

    def iter_coverings(self, apex: str, max_legs: Optional[int] = None) -> Iterator[frozenset[str]]:
        k = max_legs if max_legs is not None else self.max_legs
        if k is None:
            raise SiteError(f"site {self.name or '?'} needs an explicit leg bound to enumerate")
        into = sorted(self.opens_into(apex))
        for n in range(0, k + 1):
            for combo in combinations(into, n):
                s = frozenset(combo)
                if self.predicate(apex, s):
                    yield s

    def coverings_of(self, apex: str) -> tuple[frozenset[str], ...]:
        return tuple(self.iter_coverings(apex))

    @property
    def exhaustive(self) -> bool:
        return False


SiteLike = Pretopology | PredicateSite


# ----------------------------------------------------------------------
# refinements


@dataclass(frozen=True)
class Refinement:
    """refining's legs each factor through a leg of refined."""

    refined: Sink
    refining: Sink
    witness: Mapping[str, tuple[str, str]]  # refining leg -> (refined leg, factor)

    def violations(self, c: FinCategory) -> list[tuple]:
        out = []
        for r in self.refining.legs:
            got = self.witness.get(r)
            if got is None:
                out.append(("missing-witness", r))
                continue
            s, h = got
            if s not in self.refined.legs or c.compose(s, h) != r:
                out.append(("bad-witness", r, s, h))
        return out


def find_refinement(c: FinCategory, refined: Sink, refining: Sink) -> Optional[Refinement]:
    """Factor every leg of refining through some leg of refined, or None."""
    wit: dict[str, tuple[str, str]] = {}
    for r in sorted(refining.legs):
        for s in sorted(refined.legs):
            done = False
            for h in c.hom(c.src(r), c.src(s)):
                if c.compose(s, h) == r:
                    wit[r] = (s, h)
                    done = True
                    break
            if done:
                break
        else:
            return None
    return Refinement(refined, refining, wit)


def dominated(c: FinCategory, sink: Sink, coverings: Iterable[frozenset[str]]) -> Optional[frozenset[str]]:
    """First covering that refines the sink (its legs factor through sink's)."""
    for r in coverings:
        if find_refinement(c, sink, Sink(sink.apex, r)) is not None:
            return r
    return None


def _sink_candidates(pool: Sequence[str], cap: int = SINK_SPACE_CAP) -> Iterator[frozenset[str]]:
    pool = sorted(pool)
    if 2 ** len(pool) > cap:
        raise SiteError(f"sink space 2^{len(pool)} over {cap}, refusing to enumerate")
    for k in range(len(pool) + 1):
        for combo in combinations(pool, k):
            yield frozenset(combo)


# ----------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class SiteVerdict:
    ok: bool
    failures: tuple[tuple, ...]  # (axiom, witness...)
    notes: tuple[tuple, ...] = ()


def validate_pretopology(
    p: SiteLike,
    max_legs: Optional[int] = None,
    pt3_cap: int = 4096,
) -> SiteVerdict:
    """Check PT1-PT4, reporting one concrete counterexample per failure.

    On a PredicateSite the quantifiers run over sinks of at most max_legs
    legs and the verdict carries a bounded note."""
    c = p.base
    failures: list[tuple] = []
    notes: list[tuple] = []
    if not p.exhaustive:
        notes.append(("bounded", max_legs if max_legs is not None else p.max_legs))

    opens = p.open_arrows()
    for u in sorted(opens):
        if not has_all_pullbacks_along(c, u):
            failures.append(("pullbackable", u))
    if failures:
        return SiteVerdict(False, tuple(failures), tuple(notes))

    # PT1: iso singletons cover
    for f in c.arrows:
        if is_iso(c, f) and not p.is_covering(c.dst(f), {f}):
            failures.append(("PT1", f))

    # PT2: stability under pullback (canonical pullback legs)
    for x in c.objects:
        for s in p.iter_coverings(x, max_legs):
            for h in c.arrows_into(x):
                pulled = []
                for u in sorted(s):
                    pb = pullback(c, u, h)
                    if pb is None:
                        failures.append(("pullbackable", u, h))
                        pulled = None
                        break
                    pulled.append(pb.p_g)
                if pulled is not None and not p.is_covering(c.src(h), pulled):
                    failures.append(("PT2", x, tuple(sorted(s)), h))

    # PT3: composites of coverings cover
    for x in c.objects:
        for s in p.iter_coverings(x, max_legs):
            legs = sorted(s)
            fams = [tuple(p.iter_coverings(c.src(u), max_legs)) for u in legs]
            count = 1
            for f in fams:
                count *= max(len(f), 1)
            if count > pt3_cap:
                notes.append(("pt3-capped", x, tuple(legs), count))
                continue
            for choice in product(*fams):
                comp = frozenset(
                    c.compose(u, t) for u, tu in zip(legs, choice) for t in tu
                )
                if not p.is_covering(x, comp):
                    failures.append(("PT3", x, tuple(legs), tuple(map(tuple, map(sorted, choice)))))
                    break

    # PT4: open sinks dominated by a covering must cover
    for x in c.objects:
        into = p.opens_into(x)
        try:
            cands = list(_sink_candidates(into)) if max_legs is None else [
                frozenset(combo)
                for k in range(min(max_legs, len(into)) + 1)
                for combo in combinations(sorted(into), k)
            ]
        except SiteError:
            notes.append(("pt4-capped", x, len(into)))
            continue
        covs = tuple(p.iter_coverings(x, max_legs))
        for s in cands:
            if p.is_covering(x, s):
                continue
            r = dominated(c, Sink(x, s), covs)
            if r is not None:
                failures.append(("PT4", x, tuple(sorted(s)), tuple(sorted(r))))

    return SiteVerdict(not failures, tuple(failures), tuple(notes))


def pt4_complete(p: Pretopology) -> Pretopology:
    """Least refinement-complete extension; leaves O_tau unchanged."""
    c = p.base
    cov = {x: set(v) for x, v in p.coverings.items()}
    changed = True
    while changed:
        changed = False
        for x in c.objects:
            into = [a for a in c.arrows_into(x) if a in p.open_arrows()]
            for s in _sink_candidates(into):
                if s in cov[x]:
                    continue
                if dominated(c, Sink(x, s), tuple(sorted(cov[x], key=sorted))) is not None:
                    cov[x].add(s)
                    changed = True
    return Pretopology(c, {x: frozenset(v) for x, v in cov.items()})


# ----------------------------------------------------------------------
# clopen arrows / clopos structures


@dataclass(frozen=True)
class CloposStructure:
    base: FinCategory
    opens: frozenset[str]


def clopos_violations(s: CloposStructure) -> list[tuple]:
    """The four clauses of the open-arrow axiom: all isos, pullbackable,
    closed under composition, closed under taking pullback legs (every
    pullback cone, i.e. the canonical one and its iso conjugates)."""
    c = s.base
    out: list[tuple] = []
    for f in c.arrows:
        if is_iso(c, f) and f not in s.opens:
            out.append(("isos", f))
    for u in sorted(s.opens):
        if u not in c.src_map:
            out.append(("unknown-arrow", u))
            return out
    for u in sorted(s.opens):
        if not has_all_pullbacks_along(c, u):
            out.append(("pullbackable", u))
    for u in sorted(s.opens):
        for v in sorted(s.opens):
            if c.src(u) == c.dst(v) and c.compose(u, v) not in s.opens:
                out.append(("compose", u, v))
    for u in sorted(s.opens):
        for h in c.arrows_into(c.dst(u)):
            pb = pullback(c, u, h)
            if pb is None:
                continue  # already reported as pullbackable
            for w in c.objects:
                for phi in c.hom(w, pb.apex):
                    if is_iso(c, phi) and c.compose(pb.p_g, phi) not in s.opens:
                        out.append(("pullback", u, h, c.compose(pb.p_g, phi)))
    return out


def clopen_arrows(p: SiteLike) -> CloposStructure:
    """O_tau with its open-arrow structure; raises if the structure fails
    its own axiom, which signals an invalid input site."""
    s = CloposStructure(p.base, p.open_arrows())
    bad = clopos_violations(s)
    if bad:
        raise NotAPretopology(bad)
    return s


# ----------------------------------------------------------------------
# induced pretopologies, subcanonicity, locality


def induce_pretopology(f: Functor, target: SiteLike, cap: int = SINK_SPACE_CAP) -> Pretopology:
    """Biggest pretopology on f's source whose coverings push to coverings."""
    c = f.source
    sinks = []
    for x in c.objects:
        for s in _sink_candidates(c.arrows_into(x), cap):
            if target.is_covering(f.obj(x), {f.arr(u) for u in s}):
                sinks.append(Sink(x, s))
    out = Pretopology.build(c, sinks)
    v = validate_pretopology(out)
    if not v.ok:
        raise NotAPretopology(v.failures)
    return out


@dataclass(frozen=True)
class SubcanonicalVerdict:
    ok: bool
    witness: tuple = ()


def is_subcanonical(p: SiteLike, max_legs: Optional[int] = None) -> SubcanonicalVerdict:
    """Every covering a universal effective epi family."""
    c = p.base
    for x in c.objects:
        for s in p.iter_coverings(x, max_legs):
            v = is_effective_epi_family(c, Sink(x, s), universal=True)
            if v.status != "pass":
                return SubcanonicalVerdict(False, (x, tuple(sorted(s)), v.status) + v.witness)
    return SubcanonicalVerdict(True)


def is_locally(p: SiteLike, f: str, pred: Callable[[str], bool], max_legs: Optional[int] = None) -> bool:
    """Some covering of f's source makes every restriction f∘u satisfy pred."""
    c = p.base
    for s in p.iter_coverings(c.src(f), max_legs):
        if all(pred(c.compose(f, u)) for u in s):
            return True
    return False


# ----------------------------------------------------------------------
# the M / L / SG operators


def _operator_m(p: Pretopology) -> Pretopology:
    c = p.base
    keep = [
        Sink(x, s)
        for x in c.objects
        for s in p.coverings_of(x)
        if all(is_mono(c, u) for u in s)
    ]
    return pt4_complete(Pretopology.build(c, keep))


def _operator_l(p: Pretopology) -> Pretopology:
    c = p.base
    opens = p.open_arrows()
    loc = frozenset(
        g
        for g in c.arrows
        if has_all_pullbacks_along(c, g) and is_locally(p, g, opens.__contains__)
    )
    sinks = []
    for x in c.objects:
        covs = p.coverings_of(x)
        for s in _sink_candidates([a for a in c.arrows_into(x) if a in loc]):
            if dominated(c, Sink(x, s), covs) is not None:
                sinks.append(Sink(x, s))
    return pt4_complete(Pretopology.build(c, sinks))


def _operator_sg(p: Pretopology) -> Pretopology:
    lm = _operator_l(_operator_m(p))
    both = [
        Sink(x, s)
        for x in p.base.objects
        for s in p.coverings_of(x)
        if lm.is_covering(x, s)
    ]
    return pt4_complete(Pretopology.build(p.base, both))


_OPERATORS = {"M": _operator_m, "L": _operator_l, "SG": _operator_sg}


def apply_operator(op: str, p: Pretopology) -> Pretopology:
    """op in {M, L, SG}; the result is PT4-completed and re-validated."""
    if op not in _OPERATORS:
        raise SiteError(f"unknown operator {op!r}")
    out = _OPERATORS[op](p)
    v = validate_pretopology(out)
    if not v.ok:
        raise NotAPretopology(v.failures)
    return out


# Chains written leftmost-first: ("SG", "L") means SG after L.
OPERATOR_RELATIONS: tuple[tuple[str, tuple[str, ...], tuple[str, ...]], ...] = (
    ("M.M = M", ("M", "M"), ("M",)),
    ("SG.SG = SG", ("SG", "SG"), ("SG",)),
    ("L.L = L", ("L", "L"), ("L",)),
    ("(M.L).(M.L) = M.L", ("M", "L", "M", "L"), ("M", "L")),
    ("(L.M).(L.M) = L.M", ("L", "M", "L", "M"), ("L", "M")),
    ("SG.L = L.M.L", ("SG", "L"), ("L", "M", "L")),
    ("L.SG = L.M", ("L", "SG"), ("L", "M")),
    ("SG.M = M", ("SG", "M"), ("M",)),
    ("M.SG = M", ("M", "SG"), ("M",)),
)


def _apply_chain(ops: tuple[str, ...], p: Pretopology) -> Pretopology:
    for op in reversed(ops):
        p = apply_operator(op, p)
    return p


def operator_relations(p: Pretopology) -> tuple[tuple[str, bool], ...]:
    """Evaluate the nine composition identities of M, L and SG on p.

    Each entry of the result pairs the identity's label with whether
    both sides produced the same pretopology on p.
    """
    return tuple(
        (label, _apply_chain(lhs, p) == _apply_chain(rhs, p))
        for label, lhs, rhs in OPERATOR_RELATIONS
    )


# ----------------------------------------------------------------------
# the open-arrow slice, used when inducing along the source functor


def open_slice(p: SiteLike, x: str) -> tuple[FinCategory, Functor]:
    """Category of opens over x (objects: opens into x, arrows: factoring
    triangles) together with the source-object functor to the base."""
    c = p.base
    objs = sorted(p.opens_into(x))
    arrows = []
    table: dict[tuple[str, str], str] = {}
    names: dict[tuple[str, str, str], str] = {}
    for u in objs:
        for v in objs:
            for h in c.hom(c.src(u), c.src(v)):
                if c.compose(v, h) == u:
                    n = f"{h}:{u}>{v}"
                    names[(u, h, v)] = n
                    arrows.append((n, u, v))
    for (u, h, v), n in names.items():
        for (v2, k, w), m in names.items():
            if v2 == v:
                table[(m, n)] = names[(u, c.compose(k, h), w)]
    ids = {u: names[(u, c.identity(c.src(u)), u)] for u in objs}
    cat = FinCategory.build(objs, arrows, table, ids)
    d0 = Functor(
        cat,
        c,
        {u: c.src(u) for u in objs},
        {n: h for (u, h, v), n in names.items()},
    ).check()
    return cat, d0


# ----------------------------------------------------------------------
# JSON round trip


def presite_to_json(p: Pretopology) -> dict:
    from .fincat import category_to_json

    return {
        "category": category_to_json(p.base),
        "coverings": [
            {"apex": x, "legs": sorted(s)}
            for x in p.base.objects
            for s in p.coverings_of(x)
        ],
    }


def presite_from_json(doc: Mapping, validate: bool = True) -> Pretopology:
    from .fincat import category_from_json

    base = category_from_json(doc["category"])
    sinks = [Sink(e["apex"], frozenset(e["legs"])) for e in doc["coverings"]]
    for e, s in zip(doc["coverings"], sinks):
        for leg in s.legs:
            if base.dst(leg) != s.apex:
                raise NotAPretopology([("bad-leg", s.apex, leg)])
    p = Pretopology.build(base, sinks)
    if validate:
        v = validate_pretopology(p)
        if not v.ok:
            raise NotAPretopology(v.failures)
    return p

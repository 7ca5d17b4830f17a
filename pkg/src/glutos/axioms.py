"""Axiom checkers for open-arrow structures and gluing categories.

Checks come back as Verdict records: an axiom tag, a status, a witness
payload that replays the failure through the definitional predicate, and
a bound note whenever a quantifier ran under a cap.  Bounded carriers
(windows into a larger universe) are certified at their bound: existence
questions that leave the window become skip notes, never silent passes,
while every fail verdict carries a concrete in-window counterexample.

Suites check each axiom independently and return verdicts sorted by
axiom tag, so running the individual checks concurrently merges to the
same report.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Mapping, Optional, Union

from .fincat import (
    FinCategory,
    FincatError,
    Functor,
    Sink,
    finite_colimit,
    finite_limit,
    is_colimit_cocone,
    is_effective_epi_family,
    is_epi,
    is_iso,
    is_mono,
    is_pullback,
    pullback,
)
from .glue import (
    _cocone_mediator,
    _discrete_diagram,
    _parallel_diagram,
    _pulled_coequalizer_note,
    is_equivalence_relation,
    is_jointly_epi,
    is_locally_o_coequalizable,
)
from .sheafkit import representable, representable_map, is_epi_family_sh
from .site import (
    CloposStructure,
    Pretopology,
    SiteLike,
    clopen_arrows,
    clopos_violations,
    dominated,
    is_locally,
    is_subcanonical,
    open_slice,
    validate_pretopology,
)

__all__ = [
    "AxiomError",
    "NotMPresite",
    "NotSubcanonical",
    "PremiseFailed",
    "Verdict",
    "verdict_to_json",
    "verdicts_to_json",
    "GlutosCandidate",
    "make_candidate",
    "tau_from_opens",
    "candidate_slice",
    "OSieve",
    "osieve",
    "validate_osieve",
    "pullback_osieve",
    "maximal_osieve",
    "check_clopos",
    "check_preclopos",
    "check_o_topology",
    "check_glutos_suite",
    "check_nearly_glutos",
    "check_morphism",
    "check_universal_th3",
]

DEFAULT_BOUND = 64
DEFAULT_MAX_LEGS = 3


class AxiomError(FincatError):
    """Malformed input to an axiom checker."""


class NotMPresite(AxiomError):
    """Some covering has a non-monic leg."""


class NotSubcanonical(AxiomError):
    """Some covering is not a universal effective epi family."""


class PremiseFailed(AxiomError):
    """A premise of the universality criterion does not hold."""

    def __init__(self, which: str, detail: tuple = ()):
        super().__init__(f"premise failed: {which}")
        self.which = which
        self.detail = tuple(detail)


# ----------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Verdict:
    """Outcome of one axiom check.

    status is one of pass, fail, proxy-pass or inapplicable.  witness
    holds replayable counterexample tuples for a fail, and bound says
    which caps the quantifiers ran under (None means exhaustive)."""

    axiom: str
    status: str
    witness: tuple = ()
    bound: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "proxy-pass")


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def verdict_to_json(v: Verdict) -> dict:
    return {
        "axiom": v.axiom,
        "status": v.status,
        "witness": _jsonable(v.witness),
        "bound": v.bound,
    }


def verdicts_to_json(vs: Iterable[Verdict]) -> list[dict]:
    return [verdict_to_json(v) for v in vs]


# ----------------------------------------------------------------------
# candidates


@dataclass(frozen=True)
class GlutosCandidate:
    """A carrier with a clopen structure, a pretopology, and the knobs
    that control how the suite quantifies: elementary candidates treat a
    missing (co)limit as a refutation, bounded-U candidates treat it as
    an out-of-window skip; g5 picks the weak or strong reading of the
    quotient axiom; bound caps U-smallness counts."""

    carrier: FinCategory
    opens: CloposStructure
    pretopology: SiteLike
    regime: str = "elementary"
    g5: str = "strong"
    bound: int = DEFAULT_BOUND


def _opens_set(opens: Union[CloposStructure, Iterable[str]]) -> frozenset[str]:
    if isinstance(opens, CloposStructure):
        return opens.opens
    return frozenset(opens)


def _factors_through(c: FinCategory, v: str, legs: Iterable[str]) -> bool:
    return any(
        c.compose(u, h) == v
        for u in legs
        for h in c.hom(c.src(v), c.src(u))
    )


def _jointly_epi_family(c: FinCategory, x: str, legs: list[str]) -> bool:
    # the empty family is jointly epi iff no two distinct arrows leave x
    if legs:
        return is_jointly_epi(c, legs)
    return all(len(c.hom(x, w)) <= 1 for w in c.objects)


def tau_from_opens(
    carrier: FinCategory,
    opens: Union[CloposStructure, Iterable[str]],
    mode: str = "elementary",
) -> Pretopology:
    """The pretopology induced by a class of open arrows.

    elementary: a sink of opens covers when the open arrows factoring
    through it form a jointly epi family.  universal: a sink of opens
    covers when it is a universal effective epi family."""
    if mode not in ("elementary", "universal"):
        raise AxiomError(f"unknown tau mode {mode!r}")
    ops = _opens_set(opens)
    sinks = []
    for x in carrier.objects:
        pool = sorted(u for u in carrier.arrows_into(x) if u in ops)
        for k in range(len(pool) + 1):
            for combo in combinations(pool, k):
                if mode == "elementary":
                    closure = [v for v in pool if _factors_through(carrier, v, combo)]
                    good = _jointly_epi_family(carrier, x, closure)
                else:
                    s = Sink(x, frozenset(combo))
                    good = is_effective_epi_family(carrier, s, universal=True).status == "pass"
                if good:
                    sinks.append(Sink(x, frozenset(combo)))
    return Pretopology.build(carrier, sinks)


def make_candidate(
    carrier: Optional[FinCategory] = None,
    opens: Union[CloposStructure, Iterable[str], None] = None,
    pretopology: Optional[SiteLike] = None,
    regime: str = "elementary",
    g5: str = "strong",
    bound: int = DEFAULT_BOUND,
) -> GlutosCandidate:
    """Assemble and validate a candidate.

    Omitted opens default to the clopen arrows of the pretopology; an
    omitted pretopology is derived from the opens (elementary regime
    uses the epi-refinement reading, bounded-U the universal effective
    one).  The opens must satisfy the clopen axiom, except that bounded
    carriers may lack pullbacks of opens, and the pretopology must
    validate."""
    if regime not in ("elementary", "bounded-U"):
        raise AxiomError(f"unknown regime {regime!r}")
    if g5 not in ("weak", "strong"):
        raise AxiomError(f"unknown g5 flavour {g5!r}")
    if opens is None and pretopology is None:
        raise AxiomError("a candidate needs opens or a pretopology")
    if carrier is None:
        carrier = pretopology.base
    if opens is None:
        structure = clopen_arrows(pretopology)
    elif isinstance(opens, CloposStructure):
        structure = opens
    else:
        structure = CloposStructure(carrier, frozenset(opens))
    if structure.base != carrier:
        raise AxiomError("opens must live on the carrier")
    if pretopology is None:
        mode = "elementary" if regime == "elementary" else "universal"
        pretopology = tau_from_opens(carrier, structure, mode)
    bad = clopos_violations(structure)
    hard = [v for v in bad if not (regime == "bounded-U" and v[0] == "pullbackable")]
    if hard:
        raise AxiomError(f"opens violate the clopen axiom: {hard[0]!r}")
    sv = validate_pretopology(pretopology)
    if not sv.ok:
        raise AxiomError(f"invalid pretopology: {sv.failures[0]!r}")
    return GlutosCandidate(carrier, structure, pretopology, regime, g5, bound)


class _OpensView:
    """Just enough of the site protocol for slicing over a candidate."""

    def __init__(self, c: FinCategory, ops: frozenset[str]):
        self.base = c
        self._ops = ops

    def opens_into(self, x: str) -> tuple[str, ...]:
        return tuple(sorted(u for u in self._ops if self.base.dst(u) == x))


def candidate_slice(g: GlutosCandidate, x: str) -> tuple[FinCategory, Functor]:
    """Category of the candidate's opens over x (objects are open arrows
    into x, morphisms are factoring triangles) with the source-object
    functor back to the carrier."""
    return open_slice(_OpensView(g.carrier, g.opens.opens), x)


# ----------------------------------------------------------------------
# open sieves


@dataclass(frozen=True)
class OSieve:
    """A sieve generated by open arrows into an apex.  members is the
    full set of arrows factoring through some generator; witnesses maps
    each member to one factorization (member, generator, factor)."""

    apex: str
    generators: tuple[str, ...]
    members: frozenset[str]
    witnesses: tuple[tuple[str, str, str], ...]

    def witness_for(self, f: str) -> Optional[tuple[str, str]]:
        for member, gen, factor in self.witnesses:
            if member == f:
                return gen, factor
        return None


def _generated(c: FinCategory, apex: str, generators: Iterable[str]):
    members: set[str] = set()
    wit: dict[str, tuple[str, str]] = {}
    for f in c.arrows_into(apex):
        for g in generators:
            hit = next((h for h in c.hom(c.src(f), c.src(g)) if c.compose(g, h) == f), None)
            if hit is not None:
                members.add(f)
                wit[f] = (g, hit)
                break
    return frozenset(members), wit


def osieve(
    c: FinCategory,
    opens: Union[CloposStructure, Iterable[str]],
    apex: str,
    generators: Iterable[str],
) -> OSieve:
    """Build the open sieve generated by the family, with membership
    witnesses."""
    ops = _opens_set(opens)
    gens = tuple(sorted(set(generators)))
    for g in gens:
        if g not in c.src_map:
            raise AxiomError(f"unknown generator {g!r}")
        if c.dst(g) != apex:
            raise AxiomError(f"generator {g!r} does not land in {apex!r}")
        if g not in ops:
            raise AxiomError(f"generator {g!r} is not open")
    members, wit = _generated(c, apex, gens)
    return OSieve(apex, gens, members, tuple(sorted((f, g, h) for f, (g, h) in wit.items())))


def validate_osieve(
    c: FinCategory, opens: Union[CloposStructure, Iterable[str]], s: OSieve
) -> list[tuple]:
    """Clauses violated by the sieve: bad generators, membership not
    matching the generating-family criterion, or broken witnesses."""
    ops = _opens_set(opens)
    out: list[tuple] = []
    for g in s.generators:
        if g not in c.src_map:
            out.append(("unknown-generator", g))
            return out
        if c.dst(g) != s.apex:
            out.append(("generator-bad-target", g))
        if g not in ops:
            out.append(("generator-not-open", g))
    reference, _ = _generated(c, s.apex, s.generators)
    for f in sorted(reference - s.members):
        out.append(("missing-member", f))
    for f in sorted(s.members - reference):
        out.append(("extra-member", f))
    seen = set()
    for f, g, h in s.witnesses:
        seen.add(f)
        if g not in s.generators or f not in s.members or c.compose(g, h) != f:
            out.append(("bad-witness", f, g, h))
    for f in sorted(s.members - seen):
        out.append(("missing-witness", f))
    return out


def maximal_osieve(
    c: FinCategory, opens: Union[CloposStructure, Iterable[str]], apex: str
) -> OSieve:
    return osieve(c, opens, apex, (c.identity(apex),))


def pullback_osieve(
    c: FinCategory, opens: Union[CloposStructure, Iterable[str]], s: OSieve, f: str
) -> OSieve:
    """Inverse image of the sieve along f, which is again an open sieve
    (generated by its own open members); raises if that stability fails."""
    if c.dst(f) != s.apex:
        raise AxiomError(f"{f!r} does not land in {s.apex!r}")
    ops = _opens_set(opens)
    y = c.src(f)
    pulled = frozenset(g for g in c.arrows_into(y) if c.compose(f, g) in s.members)
    out = osieve(c, ops, y, sorted(pulled & ops))
    if out.members != pulled:
        raise AxiomError(
            f"pullback of the sieve on {s.apex!r} along {f!r} is not an open sieve"
        )
    return out


# ----------------------------------------------------------------------
# clopen structures and their weakening


def check_clopos(s: CloposStructure) -> Verdict:
    """All four clauses of the clopen-arrow axiom."""
    bad = tuple(clopos_violations(s))
    return Verdict("G1", "pass" if not bad else "fail", bad)


def check_preclopos(c: FinCategory, opens: Union[CloposStructure, Iterable[str]]) -> Verdict:
    """Isos and composites stay open, and every commutative square onto
    an open arrow admits an open filler: given u open and f with the
    same target, any pair u.a = f.b factors as a = w.m, b = v.m with
    v open and u.w = f.v."""
    ops = _opens_set(opens)
    failures: list[tuple] = []
    for u in sorted(ops):
        if u not in c.src_map:
            return Verdict("preclopos", "fail", (("unknown-arrow", u),))
    for f in c.arrows:
        if is_iso(c, f) and f not in ops:
            failures.append(("isos", f))
    for u in sorted(ops):
        for v in sorted(ops):
            if c.src(u) == c.dst(v) and c.compose(u, v) not in ops:
                failures.append(("compose", u, v))
    for u in sorted(ops):
        x = c.dst(u)
        for f in sorted(c.arrows_into(x)):
            for z in c.objects:
                for a in c.hom(z, c.src(u)):
                    for b in c.hom(z, c.src(f)):
                        if c.compose(u, a) != c.compose(f, b):
                            continue
                        if not _qp_filler(c, ops, u, f, a, b):
                            failures.append(("filler", u, f, a, b))
    return Verdict("preclopos", "pass" if not failures else "fail", tuple(failures))


def _qp_filler(c: FinCategory, ops: frozenset[str], u: str, f: str, a: str, b: str) -> bool:
    z = c.src(a)
    for v in sorted(ops):
        if c.dst(v) != c.src(f):
            continue
        mid = c.src(v)
        for w in c.hom(mid, c.src(u)):
            if c.compose(u, w) != c.compose(f, v):
                continue
            for m in c.hom(z, mid):
                if c.compose(w, m) == a and c.compose(v, m) == b:
                    return True
    return False


def check_o_topology(
    c: FinCategory,
    opens: Union[CloposStructure, Iterable[str]],
    sieves: Iterable[OSieve],
) -> Verdict:
    """GT1-GT3 for a family of open sieves: maximal sieves present,
    stability under pullback, and local character.  Every member must
    validate as an open sieve and pull back to open sieves; violations
    of those preconditions raise."""
    ops = _opens_set(opens)
    family = tuple(sieves)
    for s in family:
        bad = validate_osieve(c, ops, s)
        if bad:
            raise AxiomError(f"invalid member on {s.apex!r}: {bad[0]!r}")
    pulled: dict[tuple[frozenset[str], str], OSieve] = {}
    for s in family:
        for f in c.arrows_into(s.apex):
            pulled[(s.members, f)] = pullback_osieve(c, ops, s, f)
    tau: dict[str, set[frozenset[str]]] = {x: set() for x in c.objects}
    for s in family:
        tau[s.apex].add(s.members)
    failures: list[tuple] = []
    for x in sorted(c.objects):
        if frozenset(c.arrows_into(x)) not in tau[x]:
            failures.append(("GT1", x))
    for s in family:
        for f in sorted(c.arrows_into(s.apex)):
            if pulled[(s.members, f)].members not in tau[c.src(f)]:
                failures.append(("GT2", s.apex, s.generators, f))
    candidates = {x: _all_osieves(c, ops, x) for x in c.objects}
    for s in family:
        for other, gens in sorted(candidates[s.apex].items(), key=lambda kv: kv[1]):
            if other in tau[s.apex]:
                continue
            locally = all(
                frozenset(
                    g for g in c.arrows_into(c.src(v)) if c.compose(v, g) in other
                )
                in tau[c.src(v)]
                for v in sorted(s.members)
            )
            if locally:
                failures.append(("GT3", s.apex, s.generators, gens))
    return Verdict("GT", "pass" if not failures else "fail", tuple(failures))


def _all_osieves(c: FinCategory, ops: frozenset[str], x: str) -> dict[frozenset[str], tuple]:
    """Distinct open sieves on x, as member set -> one generating family."""
    pool = sorted(u for u in c.arrows_into(x) if u in ops)
    out: dict[frozenset[str], tuple] = {}
    for k in range(len(pool) + 1):
        for combo in combinations(pool, k):
            members, _ = _generated(c, x, combo)
            out.setdefault(members, combo)
    return out


# ----------------------------------------------------------------------
# the glutos suite


def _verdict(g: GlutosCandidate, axiom: str, failures: list, notes: list) -> Verdict:
    bits = []
    if g.regime == "bounded-U":
        bits.append(f"certified at bound {g.bound}")
    if notes:
        bits.append(f"{len(notes)} out-of-window points skipped")
    return Verdict(
        axiom,
        "pass" if not failures else "fail",
        tuple(failures),
        "; ".join(bits) if bits else None,
    )


def _skip(g: GlutosCandidate, failures: list, notes: list, item: tuple) -> None:
    (notes if g.regime == "bounded-U" else failures).append(item)


def _g1(g: GlutosCandidate):
    bad = clopos_violations(g.opens)
    failures, notes = [], []
    for v in bad:
        if g.regime == "bounded-U" and v[0] == "pullbackable":
            notes.append(v)
        else:
            failures.append(v)
    return failures, notes


def _g2(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures = []
    for (outer, inner), comp in sorted(c.table.items()):
        if comp in ops and outer in ops and inner not in ops:
            failures.append(("quotient-not-open", outer, inner, comp))
    return failures, []


def _initial(c: FinCategory):
    return finite_colimit(_discrete_diagram(c, {}))


def _iso_between(c: FinCategory, x: str, y: str) -> Optional[str]:
    return next((i for i in c.hom(x, y) if is_iso(c, i)), None)


def _g4a(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures: list[tuple] = []
    notes: list[tuple] = []
    ini = _initial(c)
    if ini is None:
        _skip(g, failures, notes, ("no-initial",))
    for x, y in combinations_with_replacement(sorted(c.objects), 2):
        w = finite_colimit(_discrete_diagram(c, {"a": x, "b": y}))
        if w is None:
            _skip(g, failures, notes, ("no-coproduct", x, y))
            continue
        ia, ib = w.legs["a"], w.legs["b"]
        for i in (ia, ib):
            if not is_mono(c, i):
                failures.append(("injection-not-monic", x, y, i))
            if i not in ops:
                failures.append(("injection-not-open", x, y, i))
        pb = pullback(c, ia, ib)
        if pb is None:
            _skip(g, failures, notes, ("no-injection-pullback", x, y))
        elif ini is not None and _iso_between(c, pb.apex, ini.apex) is None:
            failures.append(("not-disjoint", x, y, pb.apex))
        for h in sorted(c.arrows_into(w.apex)):
            pa, pb2 = pullback(c, ia, h), pullback(c, ib, h)
            if pa is None or pb2 is None:
                _skip(g, failures, notes, ("no-universality-pullback", x, y, h))
                continue
            dd = _discrete_diagram(c, {"a": pa.apex, "b": pb2.apex})
            if not is_colimit_cocone(dd, c.src(h), {"a": pa.p_g, "b": pb2.p_g}):
                failures.append(("not-universal", x, y, h))
    return failures, notes


def _g4b(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures: list[tuple] = []
    notes: list[tuple] = []
    for x in sorted(c.objects):
        pool = sorted(u for u in c.arrows_into(x) if u in ops)
        for k in range(min(len(pool), DEFAULT_MAX_LEGS) + 1):
            for combo in combinations(pool, k):
                nodes = {f"n{i}": c.src(u) for i, u in enumerate(combo)}
                w = finite_colimit(_discrete_diagram(c, nodes))
                if w is None:
                    _skip(g, failures, notes, ("no-open-coproduct", x, combo))
                    continue
                m = _cocone_mediator(c, w, {f"n{i}": u for i, u in enumerate(combo)}, x)
                if m not in ops:
                    failures.append(("colimit-arrow-not-open", x, combo, m))
    return failures, notes


def _g5a(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures: list[tuple] = []
    notes: list[tuple] = []
    for u in sorted(ops):
        if not is_epi(c, u):
            continue
        v = is_effective_epi_family(c, Sink(c.dst(u), frozenset((u,))))
        if v.status == "pass":
            continue
        if v.status == "inapplicable":
            _skip(g, failures, notes, ("no-kernel-pair", u) + v.witness)
        else:
            failures.append(("not-effective", u) + v.witness)
    return failures, notes


def _g5b(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures = []
    for (outer, inner), comp in sorted(c.table.items()):
        if comp in ops and inner in ops and is_epi(c, inner) and outer not in ops:
            failures.append(("descent-along-epi", outer, inner, comp))
    return failures, []


def _eqrel_pairs(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    for d0 in sorted(ops):
        for d1 in sorted(ops):
            if d1 < d0 or c.src(d0) != c.src(d1) or c.dst(d0) != c.dst(d1):
                continue
            if is_equivalence_relation(c, d0, d1).ok:
                yield d0, d1


def _g5c(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures: list[tuple] = []
    notes: list[tuple] = []
    for d0, d1 in _eqrel_pairs(g):
        if g.g5 == "weak":
            if is_locally_o_coequalizable(c, ops, d0, d1, DEFAULT_MAX_LEGS) is None:
                continue
        w = finite_colimit(_parallel_diagram(c, d0, d1))
        if w is None:
            _skip(g, failures, notes, ("no-coequalizer", d0, d1))
            continue
        q = w.legs["b"]
        if q not in ops:
            failures.append(("coequalizer-not-open", d0, d1, q))
        if not is_pullback(c, q, q, d0, d1):
            failures.append(("not-effective", d0, d1, q))
        for h in sorted(c.arrows_into(c.dst(q))):
            note = _pulled_coequalizer_note(c, d0, d1, q, h)
            if note is None:
                continue
            if note[0] == "universality-failed":
                failures.append(("not-universal", d0, d1) + note[1:])
            else:
                notes.append((d0, d1) + note)
    return failures, notes


def _g5p(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures = []
    epis = [r for r in sorted(ops) if is_epi(c, r)]
    for f in sorted(c.arrows):
        for k in sorted(c.arrows):
            if c.dst(f) != c.dst(k) or pullback(c, f, k) is not None:
                continue
            for r in epis:
                if c.dst(r) != c.src(k):
                    continue
                if pullback(c, f, c.compose(k, r)) is not None:
                    failures.append(("missing-pullback", f, k, r))
                    break
    return failures, []


def _g6(g: GlutosCandidate):
    failures = []
    sv = validate_pretopology(g.pretopology)
    if not sv.ok:
        failures.append(("not-a-pretopology",) + tuple(sv.failures[0]))
    sub = is_subcanonical(g.pretopology)
    if not sub.ok:
        failures.append(("not-subcanonical",) + tuple(sub.witness))
    return failures, list(sv.notes)


def _g9(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures = []
    for f in sorted(c.arrows):
        if f in ops:
            continue
        if is_locally(g.pretopology, f, ops.__contains__, DEFAULT_MAX_LEGS):
            failures.append(("locally-open-not-open", f))
    return failures, []


_SUITE = {
    "G1": _g1,
    "G2": _g2,
    "G4a": _g4a,
    "G4b": _g4b,
    "G5P": _g5p,
    "G5a": _g5a,
    "G5b": _g5b,
    "G5c": _g5c,
    "G6": _g6,
    "G9": _g9,
}


def check_glutos_suite(g: GlutosCandidate) -> tuple[Verdict, ...]:
    """One verdict per axiom, sorted by axiom tag."""
    out = []
    for axiom in sorted(_SUITE):
        failures, notes = _SUITE[axiom](g)
        out.append(_verdict(g, axiom, failures, notes))
    return tuple(out)


# ----------------------------------------------------------------------
# nearly-glutos presites


def _iso_classes_over(c: FinCategory, monos: list[str]) -> list[list[str]]:
    classes: list[list[str]] = []
    for u in monos:
        for cls in classes:
            v = cls[0]
            if any(
                is_iso(c, i) and c.compose(v, i) == u
                for i in c.hom(c.src(u), c.src(v))
            ):
                cls.append(u)
                break
        else:
            classes.append([u])
    return classes


def _ng1(g: GlutosCandidate):
    c, ops = g.carrier, g.opens.opens
    failures = []
    for x in sorted(c.objects):
        monos = [u for u in sorted(ops) if c.dst(u) == x and is_mono(c, u)]
        n = len(_iso_classes_over(c, monos))
        if n > g.bound:
            failures.append(("too-many-clopen-subobjects", x, n))
    return failures, []


def _ng2(g: GlutosCandidate):
    c, ops, p = g.carrier, g.opens.opens, g.pretopology
    failures: list[tuple] = []
    for x in sorted(c.objects):
        pool = [u for u in sorted(ops) if c.dst(u) == x and is_mono(c, u)]
        for k in range(1, min(len(pool), DEFAULT_MAX_LEGS) + 1):
            for fam in combinations(pool, k):
                if not _ng2_factors(c, ops, p, x, fam):
                    failures.append(("no-covering-factorization", x, fam))
    return failures, []


def _ng2_factors(c, ops, p, x, fam) -> bool:
    for m in sorted(ops):
        if c.dst(m) != x or not is_mono(c, m):
            continue
        w = c.src(m)
        rs = []
        for u in fam:
            r = next((h for h in c.hom(c.src(u), w) if c.compose(m, h) == u), None)
            if r is None:
                break
            rs.append(r)
        else:
            if p.is_covering(w, frozenset(rs)):
                return True
    return False


def _ng3(g: GlutosCandidate):
    c, ops, p = g.carrier, g.opens.opens, g.pretopology
    failures: list[tuple] = []
    for x in sorted(c.objects):
        pool = [u for u in sorted(ops) if c.dst(u) == x]
        tgt = representable(c, x)
        for k in range(1, min(len(pool), DEFAULT_MAX_LEGS) + 1):
            for fam in combinations(pool, k):
                if p.is_covering(x, frozenset(fam)):
                    continue
                legs = [representable_map(c, u) for u in fam]
                if is_epi_family_sh(p, legs, tgt):
                    failures.append(("epi-sink-not-covering", x, fam))
    return failures, []


_NEARLY = {
    "G4a": _g4a,
    "G4b": _g4b,
    "G5P": _g5p,
    "G5a": _g5a,
    "G5b": _g5b,
    "G5c": _g5c,
    "NG1": _ng1,
    "NG2": _ng2,
    "NG3": _ng3,
}


def check_nearly_glutos(g: GlutosCandidate) -> tuple[Verdict, ...]:
    """NG1-NG3 plus the coproduct and quotient axioms, for an M-presite
    with a subcanonical pretopology; raises NotMPresite or
    NotSubcanonical when those gates fail."""
    c, p = g.carrier, g.pretopology
    for x in c.objects:
        for cov in p.coverings_of(x):
            for u in sorted(cov):
                if not is_mono(c, u):
                    raise NotMPresite((x, tuple(sorted(cov)), u))
    sub = is_subcanonical(p)
    if not sub.ok:
        raise NotSubcanonical(sub.witness)
    out = []
    for axiom in sorted(_NEARLY):
        failures, notes = _NEARLY[axiom](g)
        out.append(_verdict(g, axiom, failures, notes))
    return tuple(out)


# ----------------------------------------------------------------------
# morphisms


def _image_cocone(f: Functor, w) -> dict[str, str]:
    return {n: f.arr(l) for n, l in w.legs.items()}


def _is_limit_cone(d: Functor, apex: str, legs: Mapping[str, str]) -> bool:
    dop = Functor(d.source.opposite(), d.target.opposite(), dict(d.on_objects), dict(d.on_arrows))
    return is_colimit_cocone(dop, apex, dict(legs))


def _parallel_arrow_pairs(c: FinCategory):
    for a in sorted(c.arrows):
        for b in sorted(c.arrows):
            if a < b and c.src(a) == c.src(b) and c.dst(a) == c.dst(b):
                yield a, b


def _mg2_proxy(f: Functor, cs: FinCategory, ct: FinCategory, bounded: bool):
    """Finite stand-in for the inverse-image condition: the functor must
    preserve whatever pullbacks, equalizers, initial objects, binary
    coproducts, coequalizers and universal effective epi families exist
    in the source.  On bounded carriers a broken image only refutes when
    the target window carries a (co)limit for the image diagram at all;
    otherwise the point is an out-of-window note."""
    failures: list[tuple] = []
    notes: list[tuple] = []

    def record(item: tuple, target_has: bool) -> None:
        if target_has or not bounded:
            failures.append(item)
        else:
            notes.append(item)

    for a in sorted(cs.arrows):
        for b in sorted(cs.arrows):
            if cs.dst(a) != cs.dst(b):
                continue
            pb = pullback(cs, a, b)
            if pb is None:
                continue
            if not is_pullback(ct, f.arr(a), f.arr(b), f.arr(pb.p_f), f.arr(pb.p_g)):
                record(("MG2-pullback", a, b), pullback(ct, f.arr(a), f.arr(b)) is not None)
    for a, b in _parallel_arrow_pairs(cs):
        d = _parallel_diagram(cs, a, b)
        img = _parallel_diagram(ct, f.arr(a), f.arr(b))
        w = finite_limit(d)
        if w is not None and not _is_limit_cone(img, f.obj(w.apex), _image_cocone(f, w)):
            record(("MG2-equalizer", a, b), finite_limit(img) is not None)
        wc = finite_colimit(d)
        if wc is not None and not is_colimit_cocone(img, f.obj(wc.apex), _image_cocone(f, wc)):
            record(("MG2-coequalizer", a, b), finite_colimit(img) is not None)
    ini = _initial(cs)
    if ini is not None and not is_colimit_cocone(
        _discrete_diagram(ct, {}), f.obj(ini.apex), {}
    ):
        record(("MG2-initial", ini.apex), _initial(ct) is not None)
    for x, y in combinations_with_replacement(sorted(cs.objects), 2):
        w = finite_colimit(_discrete_diagram(cs, {"a": x, "b": y}))
        if w is None:
            continue
        img = _discrete_diagram(ct, {"a": f.obj(x), "b": f.obj(y)})
        if not is_colimit_cocone(img, f.obj(w.apex), _image_cocone(f, w)):
            record(("MG2-coproduct", x, y), finite_colimit(img) is not None)
    for x in sorted(cs.objects):
        pool = sorted(cs.arrows_into(x))
        for k in (1, 2):
            for fam in combinations(pool, k):
                if is_effective_epi_family(cs, Sink(x, frozenset(fam)), universal=True).status != "pass":
                    continue
                im = Sink(f.obj(x), frozenset(f.arr(u) for u in fam))
                v = is_effective_epi_family(ct, im, universal=True)
                if v.status != "pass":
                    record(("MG2-epi-family", x, fam), v.status == "fail")
    return failures, notes


def check_morphism(f: Functor, src: GlutosCandidate, dst: GlutosCandidate) -> Verdict:
    """MG1 exhaustively (opens land in opens, pullbacks of opens are
    respected) and MG2 by the stated finite proxy; a clean run is a
    proxy-pass, never a full certification."""
    if f.source != src.carrier or f.target != dst.carrier:
        raise AxiomError("functor endpoints must match the candidates")
    bad = f.violations()
    if bad:
        w = tuple(("not-functorial", v.law) + tuple(v.detail) for v in bad)
        return Verdict("MG", "fail", w)
    failures: list[tuple] = []
    cs, ct = src.carrier, dst.carrier
    for u in sorted(src.opens.opens):
        fu = f.arr(u)
        if fu not in dst.opens.opens:
            failures.append(("MG1-open", u, fu))
    for u in sorted(src.opens.opens):
        for h in sorted(cs.arrows_into(cs.dst(u))):
            pb = pullback(cs, u, h)
            if pb is None:
                continue
            if not is_pullback(ct, f.arr(u), f.arr(h), f.arr(pb.p_f), f.arr(pb.p_g)):
                failures.append(("MG1-pullback", u, h))
    bounded = "bounded-U" in (src.regime, dst.regime)
    mg2_failures, notes = _mg2_proxy(f, cs, ct, bounded)
    failures.extend(mg2_failures)
    bits = ["MG2 by finite proxy", "epi families of at most 2 legs", f"bound {min(src.bound, dst.bound)}"]
    if notes:
        bits.append(f"{len(notes)} out-of-window points skipped")
    return Verdict(
        "MG",
        "fail" if failures else "proxy-pass",
        tuple(failures),
        "; ".join(bits),
    )


# ----------------------------------------------------------------------
# the universality criterion


def _covered_by_images(c: FinCategory, w: str, images: frozenset[str]) -> bool:
    return w in images or any(
        is_iso(c, i) for x in images for i in c.hom(w, x)
    )


def check_universal_th3(y: Functor, src_site: SiteLike, dst: GlutosCandidate) -> Verdict:
    """The four clauses characterizing a universal presite embedding:
    fully faithful, reflects coverings, locally reflects clopens, and
    every target object has a small covering by image objects.  The
    source must be a subcanonical M-presite and the target must pass the
    nearly-glutos gates, else PremiseFailed."""
    c = src_site.base
    if y.source != c or y.target != dst.carrier:
        raise AxiomError("functor endpoints must match the site and candidate")
    for x in c.objects:
        for cov in src_site.coverings_of(x):
            for u in sorted(cov):
                if not is_mono(c, u):
                    raise PremiseFailed("source-m-presite", (x, u))
    sub = is_subcanonical(src_site)
    if not sub.ok:
        raise PremiseFailed("source-subcanonical", sub.witness)
    try:
        near = check_nearly_glutos(dst)
    except NotMPresite as e:
        raise PremiseFailed("target-m-presite", e.args) from e
    except NotSubcanonical as e:
        raise PremiseFailed("target-subcanonical", e.args) from e
    bad = tuple(v.axiom for v in near if v.axiom.startswith("NG") and not v.ok)
    if bad:
        raise PremiseFailed("target-nearly-glutos", bad)
    failures: list[tuple] = []
    if not y.is_faithful():
        failures.append(("not-faithful",))
    if not y.is_full():
        failures.append(("not-full",))
    d_c, d_p = dst.carrier, dst.pretopology
    for x in sorted(c.objects):
        pool = sorted(c.arrows_into(x))
        for k in range(min(len(pool), DEFAULT_MAX_LEGS) + 1):
            for fam in combinations(pool, k):
                image = Sink(y.obj(x), frozenset(y.arr(u) for u in fam))
                if dominated(d_c, image, d_p.coverings_of(y.obj(x))) is None:
                    continue
                if dominated(c, Sink(x, frozenset(fam)), src_site.coverings_of(x)) is None:
                    failures.append(("not-reflected", x, fam))
    o_c = clopen_arrows(src_site).opens
    o_d = dst.opens.opens
    for a in sorted(c.arrows):
        if y.arr(a) not in o_d or a in o_c:
            continue
        if not is_locally(src_site, a, o_c.__contains__, DEFAULT_MAX_LEGS):
            failures.append(("not-locally-clopen", a))
    images = frozenset(y.obj(x) for x in c.objects)
    for z in sorted(d_c.objects):
        good = any(
            len(cov) <= dst.bound
            and all(_covered_by_images(d_c, d_c.src(u), images) for u in cov)
            for cov in d_p.iter_coverings(z)
        )
        if not good:
            failures.append(("no-image-covering", z))
    return Verdict(
        "universality",
        "pass" if not failures else "fail",
        tuple(failures),
        f"sinks of at most {DEFAULT_MAX_LEGS} legs; bound {dst.bound}",
    )

"""Inference-rule saturation over a bounded universe of sheaves.

The engine is generic: rules match against the current element set and
only ever select data already present in the ambient universe, so a
saturated state is a sub-closure-system of that universe.  On top of
the engine sits the subcanonical completion: the least subpresite of
the sheaf universe containing the Yoneda image and closed under
composition, pullbacks of open arrows, covering pullback and
composition, refinement completeness and gluing.  Everything derived
carries a proof object, and the proof-theoretic metadata (plain and
semiplain arrows, tails, heights, biheights) is recomputed from the
minimality definitions rather than read off the proofs.

Elements are tagged tuples over a labeled copy of the sheaf fragment:

    ("obj", label)            an object of the closure
    ("arrow", name)           an arrow of the labeled universe
    ("open", name)            the same arrow, asserted open
    ("cov", label, legs)      a covering sink (legs: frozenset of names)

Labels keep images of distinct source objects distinct even when their
sheaves are isomorphic and the fragment stores them once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .axioms import Verdict
from .fincat import FinCategory, FincatError, Functor, is_iso, is_pullback, pullback
from .sheafkit import Presheaf, SheafFragment, build_fragment, yoneda_embed
from .sheafkit import compose_nat, invert_nat, is_epi_family_sh
from .site import Pretopology, SiteLike, validate_pretopology

__all__ = [
    "ClosureError",
    "BoundExceeded",
    "DepthBoundHit",
    "NotDerived",
    "Element",
    "Proof",
    "Ambient",
    "ClosureState",
    "InferenceRule",
    "standard_rules",
    "saturate",
    "yoneda_ambient",
    "initial_state",
    "TsubClosure",
    "tsub_closure",
    "proof_metrics",
    "reflects_coverings_check",
    "closure_to_json",
    "element_id",
]

SUBSET_CAP = 1 << 12


class ClosureError(FincatError):
    pass


class BoundExceeded(ClosureError):
    """A construction refused to exceed its size bound."""


class DepthBoundHit(ClosureError):
    """Saturation ran out of rounds; args carry the pending frontier."""

    def __init__(self, frontier: tuple, rounds: int):
        super().__init__(f"no fixpoint after {rounds} rounds")
        self.frontier = frontier
        self.rounds = rounds


class NotDerived(ClosureError):
    pass


Element = tuple


# ----------------------------------------------------------------------
# the ambient universe


@dataclass(frozen=True)
class Ambient:
    """A labeled copy of a sheaf fragment together with the Yoneda image
    of the source presite.  Arrows are named "src|dst|f" where f is the
    underlying fragment arrow; one fragment member may sit under several
    labels."""

    site: SiteLike
    fragment: SheafFragment
    category: FinCategory
    member_of: Mapping[str, str]
    canon_label: Mapping[str, str]
    y_objects: Mapping[str, str]
    y_arrows: Mapping[str, str]
    y_opens: frozenset[str]
    y_coverings: tuple[tuple[str, frozenset[str]], ...]

    def frag_arrow(self, name: str) -> str:
        return name.rsplit("|", 1)[1]

    def lift(self, src: str, dst: str, frag_arrow: str) -> str:
        return f"{src}|{dst}|{frag_arrow}"

    def pull(self, u: str, g: str) -> Optional[tuple[str, str, str]]:
        """Lifted pullback of u along g (same labeled codomain): apex
        label, top arrow into src(u), pulled arrow onto src(g)."""
        L = self.category
        pb = pullback(self.fragment.as_category(), self.frag_arrow(u), self.frag_arrow(g))
        if pb is None:
            return None
        apex = self.canon_label[pb.apex]
        top = self.lift(apex, L.src(u), pb.p_f)
        pulled = self.lift(apex, L.src(g), pb.p_g)
        return apex, top, pulled

    def member_presheaf(self, label: str) -> Presheaf:
        return self.fragment.members[int(self.member_of[label][1:])]


def _labeled_category(frag_cat: FinCategory, labels: Sequence[str], member_of: Mapping[str, str]) -> FinCategory:
    arrows = []
    for x in labels:
        for y in labels:
            for f in frag_cat.hom(member_of[x], member_of[y]):
                arrows.append((f"{x}|{y}|{f}", x, y))
    ids = {x: f"{x}|{x}|{frag_cat.identity(member_of[x])}" for x in labels}
    table = {}
    for n2, x2, y2 in arrows:
        for n1, x1, y1 in arrows:
            if y1 != x2:
                continue
            comp = frag_cat.compose(n2.rsplit("|", 1)[1], n1.rsplit("|", 1)[1])
            table[(n2, n1)] = f"{x1}|{y2}|{comp}"
    return FinCategory.build(list(labels), arrows, table, ids)


def yoneda_ambient(p: SiteLike, bound: int = 8, max_members: int = 24) -> Ambient:
    """Sheafified Yoneda image of p inside a pullback-closed fragment,
    with one label per source object and one per leftover member."""
    img = yoneda_embed(p)
    c = p.base
    seeds = [img.sheaves[x] for x in sorted(c.objects)]
    frag = build_fragment(p, seeds, close_under=("pullback",), bound=bound, max_members=max_members)
    member_name: dict[str, str] = {}
    iso = {}
    for x in sorted(c.objects):
        found = frag.locate(img.sheaves[x])
        if found is None:
            raise BoundExceeded(("seed", x, bound))
        idx, t = found
        member_name[x] = frag.name(idx)
        iso[x] = t
    imaged = set(member_name.values())
    labels = sorted(f"y:{x}" for x in c.objects) + sorted(
        f"s:{frag.name(i)}" for i in range(len(frag.members)) if frag.name(i) not in imaged
    )
    member_of = {f"y:{x}": member_name[x] for x in c.objects}
    member_of.update({lab: lab[2:] for lab in labels if lab.startswith("s:")})
    canon: dict[str, str] = {}
    for lab in labels:
        canon.setdefault(member_of[lab], lab)
    y_arrows = {}
    for a in c.arrows:
        x, y = c.src(a), c.dst(a)
        t = compose_nat(iso[y], compose_nat(img.arrow_maps[a], invert_nat(iso[x])))
        y_arrows[a] = f"y:{x}|y:{y}|{frag.name_of(t)}"
    covs = tuple(
        (f"y:{x}", frozenset(y_arrows[u] for u in cov))
        for x in sorted(c.objects)
        for cov in p.coverings_of(x)
    )
    return Ambient(
        site=p,
        fragment=frag,
        category=_labeled_category(frag.as_category(), labels, member_of),
        member_of=member_of,
        canon_label=canon,
        y_objects={x: f"y:{x}" for x in c.objects},
        y_arrows=y_arrows,
        y_opens=frozenset(y_arrows[u] for u in p.open_arrows()),
        y_coverings=covs,
    )


# ----------------------------------------------------------------------
# states and proofs


@dataclass(frozen=True)
class Proof:
    rule: str
    premises: tuple
    round: int


@dataclass
class ClosureState:
    ambient: Ambient
    proofs: dict[Element, Proof]
    fixpoint: bool = False

    def has(self, e: Element) -> bool:
        return e in self.proofs

    def elements(self) -> frozenset:
        return frozenset(self.proofs)

    @property
    def axioms(self) -> frozenset:
        return frozenset(e for e, p in self.proofs.items() if p.rule == "axiom")

    def objects(self) -> list[str]:
        return sorted(e[1] for e in self.proofs if e[0] == "obj")

    def arrows(self) -> list[str]:
        return sorted(e[1] for e in self.proofs if e[0] == "arrow")

    def opens(self) -> frozenset[str]:
        return frozenset(e[1] for e in self.proofs if e[0] == "open")

    def coverings(self) -> dict[str, list[frozenset[str]]]:
        out: dict[str, list[frozenset[str]]] = {}
        for e in sorted(self.proofs, key=element_id):
            if e[0] == "cov":
                out.setdefault(e[1], []).append(e[2])
        return out

    def replay_violations(self) -> list[tuple]:
        """Structural replay: every non-axiom proof cites strictly earlier
        elements that are present in the state."""
        bad = []
        for e, pr in self.proofs.items():
            if pr.rule == "axiom":
                continue
            for q in pr.premises:
                if q not in self.proofs:
                    bad.append(("missing-premise", element_id(e), element_id(q)))
                elif self.proofs[q].round >= pr.round:
                    bad.append(("late-premise", element_id(e), element_id(q)))
        return bad


def element_id(e: Element) -> str:
    if e[0] == "cov":
        return f"cov:{e[1]}:[{','.join(sorted(e[2]))}]"
    return f"{e[0]}:{e[1]}"


def initial_state(ambient: Ambient) -> ClosureState:
    proofs: dict[Element, Proof] = {}

    def ax(e: Element) -> None:
        proofs.setdefault(e, Proof("axiom", (), 0))

    for x in sorted(ambient.y_objects):
        ax(("obj", ambient.y_objects[x]))
    for a in sorted(ambient.y_arrows):
        ax(("arrow", ambient.y_arrows[a]))
    for u in sorted(ambient.y_opens):
        ax(("open", u))
    for apex, legs in ambient.y_coverings:
        ax(("cov", apex, legs))
    return ClosureState(ambient, proofs)


# ----------------------------------------------------------------------
# inference rules


class InferenceRule:
    """A rule selects ambient data: instances() yields (premises,
    conclusions) pairs valid against the current state, in a
    deterministic order, and conclusions never leave the ambient."""

    rule_id: str = "?"
    premise_pattern: str = ""
    conclusion_pattern: str = ""

    def __init__(self, ambient: Ambient):
        self.ambient = ambient

    def instances(self, state: ClosureState) -> Iterator[tuple[tuple, tuple]]:
        raise NotImplementedError


class ComposeRule(InferenceRule):
    rule_id = "C"
    premise_pattern = "f: X->Y, g: Y->Z"
    conclusion_pattern = "g.f (open when both factors are)"

    def instances(self, state):
        L = self.ambient.category
        opens = state.opens()
        arrows = state.arrows()
        for f in arrows:
            for g in arrows:
                if L.src(g) != L.dst(f):
                    continue
                h = L.compose(g, f)
                if f in opens and g in opens:
                    yield (("open", f), ("open", g)), (("arrow", h), ("open", h))
                else:
                    yield (("arrow", f), ("arrow", g)), (("arrow", h),)


class OpenIsArrowRule(InferenceRule):
    rule_id = "O"
    premise_pattern = "open u"
    conclusion_pattern = "arrow u"

    def instances(self, state):
        for u in sorted(state.opens()):
            yield (("open", u),), (("arrow", u),)


class IdentityRule(InferenceRule):
    rule_id = "ID"
    premise_pattern = "object X"
    conclusion_pattern = "identity of X"

    def instances(self, state):
        L = self.ambient.category
        for x in state.objects():
            yield (("obj", x),), (("arrow", L.identity(x)),)


class IsoCoverRule(InferenceRule):
    rule_id = "PT1"
    premise_pattern = "iso w"
    conclusion_pattern = "singleton covering {w}, w open"

    def instances(self, state):
        L = self.ambient.category
        for w in state.arrows():
            if is_iso(L, w):
                yield (("arrow", w),), (
                    ("open", w),
                    ("cov", L.dst(w), frozenset({w})),
                )


class PullbackRule(InferenceRule):
    rule_id = "PB"
    premise_pattern = "open u into X, arrow g into X"
    conclusion_pattern = "apex, top arrow, pulled arrow open"

    def instances(self, state):
        L = self.ambient.category
        arrows = state.arrows()
        for u in sorted(state.opens()):
            for g in arrows:
                if L.dst(g) != L.dst(u):
                    continue
                res = self.ambient.pull(u, g)
                if res is None:
                    continue
                apex, top, pulled = res
                yield (("open", u), ("arrow", g)), (
                    ("obj", apex),
                    ("arrow", top),
                    ("arrow", pulled),
                    ("open", pulled),
                )


class CoverPullbackRule(InferenceRule):
    rule_id = "COV-PB"
    premise_pattern = "covering of X, arrow g: Z->X"
    conclusion_pattern = "pulled covering of Z"

    def instances(self, state):
        L = self.ambient.category
        covs = [(e[1], e[2]) for e in sorted(state.proofs, key=element_id) if e[0] == "cov"]
        arrows = state.arrows()
        for apex, legs in covs:
            for g in arrows:
                if L.dst(g) != apex:
                    continue
                pulled: list[tuple[str, str, str]] = []
                for u in sorted(legs):
                    res = self.ambient.pull(u, g)
                    if res is None:
                        pulled = None
                        break
                    pulled.append(res)
                if pulled is None:
                    continue
                concs: list[Element] = [("cov", L.src(g), frozenset(r[2] for r in pulled))]
                for a, top, pl in pulled:
                    concs += [("obj", a), ("arrow", top), ("arrow", pl), ("open", pl)]
                yield (("cov", apex, legs), ("arrow", g)), tuple(concs)


class CoverComposeRule(InferenceRule):
    rule_id = "COV-COMP"
    premise_pattern = "covering of X, coverings of every leg source"
    conclusion_pattern = "composite covering of X"

    def instances(self, state):
        L = self.ambient.category
        by_apex = state.coverings()
        covs = [(e[1], e[2]) for e in sorted(state.proofs, key=element_id) if e[0] == "cov"]
        for apex, legs in covs:
            legs_sorted = sorted(legs)
            fams = [by_apex.get(L.src(u), []) for u in legs_sorted]
            if any(not f for f in fams):
                continue
            count = 1
            for f in fams:
                count *= len(f)
            if count > 256:
                continue
            for choice in product(*fams):
                comp = frozenset(
                    L.compose(u, v) for u, sub in zip(legs_sorted, choice) for v in sub
                )
                prem = [("cov", apex, legs)]
                prem += [("cov", L.src(u), sub) for u, sub in zip(legs_sorted, choice)]
                concs: list[Element] = [("cov", apex, comp)]
                for w in sorted(comp):
                    concs += [("open", w), ("arrow", w)]
                yield tuple(prem), tuple(concs)


class RefineRule(InferenceRule):
    rule_id = "PT4"
    premise_pattern = "covering S of X, derived open sink W refined by S"
    conclusion_pattern = "W is a covering"

    def instances(self, state):
        L = self.ambient.category
        opens = state.opens()
        arrows = state.arrows()
        by_apex = state.coverings()
        for x in state.objects():
            pool = sorted(u for u in opens if L.dst(u) == x)
            if (1 << len(pool)) > SUBSET_CAP:
                continue
            covs = by_apex.get(x, [])
            if not covs:
                continue
            for k in range(len(pool) + 1):
                for combo in combinations(pool, k):
                    w = frozenset(combo)
                    for s in covs:
                        factors = self._refines(L, arrows, s, combo)
                        if factors is None:
                            continue
                        prem = [("cov", x, s)] + [("open", v) for v in combo]
                        prem += [("arrow", h) for h in factors]
                        yield tuple(prem), (("cov", x, w),)
                        break

    def _refines(self, L, arrows, s, combo):
        factors = []
        for u in sorted(s):
            hit = None
            for v in combo:
                for h in L.hom(L.src(u), L.src(v)):
                    if h in arrows and L.compose(v, h) == u:
                        hit = h
                        break
                if hit is not None:
                    break
            if hit is None:
                return None
            factors.append(hit)
        return factors


class GlueRule(InferenceRule):
    rule_id = "S"
    premise_pattern = "covering of X, arrow restrictions f.u for every leg"
    conclusion_pattern = "the glued arrow f"

    def instances(self, state):
        a = self.ambient
        L = a.category
        frag_cat = a.fragment.as_category()
        arrows = state.arrows()
        covs = [(e[1], e[2]) for e in sorted(state.proofs, key=element_id) if e[0] == "cov"]
        for apex, legs in covs:
            for y in state.objects():
                for f in frag_cat.hom(a.member_of[apex], a.member_of[y]):
                    name = a.lift(apex, y, f)
                    if name in arrows:
                        continue
                    restrictions = [L.compose(name, u) for u in sorted(legs)]
                    if all(r in arrows for r in restrictions):
                        prem = [("cov", apex, legs), ("obj", y)]
                        prem += [("arrow", r) for r in restrictions]
                        yield tuple(prem), (("arrow", name),)


def standard_rules(ambient: Ambient) -> tuple[InferenceRule, ...]:
    return (
        ComposeRule(ambient),
        OpenIsArrowRule(ambient),
        IdentityRule(ambient),
        IsoCoverRule(ambient),
        PullbackRule(ambient),
        CoverPullbackRule(ambient),
        CoverComposeRule(ambient),
        RefineRule(ambient),
        GlueRule(ambient),
    )


# ----------------------------------------------------------------------
# saturation


def saturate(
    rules: Sequence[InferenceRule], state: ClosureState, depth: int = 16
) -> ClosureState:
    """Least fixpoint of the rules over the state, with one proof per new
    element; rounds are deterministic, so reruns agree.  Raises
    DepthBoundHit with the pending frontier when depth runs out."""
    cur = state
    for r in range(1, depth + 2):
        batch: dict[Element, Proof] = {}
        for rule in rules:
            for prem, concs in rule.instances(cur):
                for e in concs:
                    if e not in cur.proofs and e not in batch:
                        batch[e] = Proof(rule.rule_id, tuple(prem), r)
        if not batch:
            return ClosureState(cur.ambient, dict(cur.proofs), fixpoint=True)
        if r > depth:
            raise DepthBoundHit(tuple(sorted(batch, key=element_id)), depth)
        cur = ClosureState(cur.ambient, {**cur.proofs, **batch})
    raise AssertionError("unreachable")


# ----------------------------------------------------------------------
# the subcanonical closure


@dataclass
class TsubClosure:
    state: ClosureState
    category: FinCategory
    opens: frozenset[str]
    pretopology: Pretopology
    y_prime: Functor

    @property
    def ambient(self) -> Ambient:
        return self.state.ambient


def tsub_closure(
    p: SiteLike, bound: int = 8, depth: int = 12, max_members: int = 24
) -> TsubClosure:
    """Saturate the Yoneda image under the standard rules and package the
    result as a presite with the universal arrow into it.  The structural
    clauses (tails, semiplain opens, fullness, image-source coverings)
    are asserted at bound and any failure raises."""
    ambient = yoneda_ambient(p, bound, max_members)
    state = saturate(standard_rules(ambient), initial_state(ambient), depth)
    L = ambient.category
    objs = state.objects()
    arrows = [a for a in state.arrows() if L.src(a) in objs and L.dst(a) in objs]
    table = {
        (g, f): L.compose(g, f)
        for f in arrows
        for g in arrows
        if L.src(g) == L.dst(f)
    }
    cat = FinCategory.build(
        objs,
        [(a, L.src(a), L.dst(a)) for a in arrows],
        table,
        {x: L.identity(x) for x in objs},
    )
    tau = Pretopology.build(
        cat, [(x, legs) for x, sinks in state.coverings().items() for legs in sinks]
    )
    v = validate_pretopology(tau)
    if not v.ok:
        raise ClosureError(("tau-sub-invalid",) + tuple(v.failures[:3]))
    y_prime = Functor(
        p.base,
        cat,
        dict(ambient.y_objects),
        dict(ambient.y_arrows),
    )
    bad = y_prime.violations()
    if bad:
        raise ClosureError(("y-prime-invalid", bad[0].law, *bad[0].detail))
    out = TsubClosure(state, cat, state.opens(), tau, y_prime)
    _assert_structure(out)
    return out


def _assert_structure(t: TsubClosure) -> None:
    state = t.state
    heights = _open_heights(state)
    for e in sorted(state.proofs, key=element_id):
        if e[0] == "open" and heights.get(e[1]) is None:
            raise ClosureError(("not-semiplain", e[1]))
    for x in state.objects():
        if _object_height(x, state, heights)[0] is None:
            raise ClosureError(("no-tail", x))
    by_apex = state.coverings()
    for x in state.objects():
        generated = any(
            all(t.category.src(u).startswith("y:") for u in legs)
            for legs in by_apex.get(x, [])
        )
        if not generated:
            raise ClosureError(("no-image-covering", x))
    ambient = state.ambient
    arrows = set(state.arrows())
    for x in state.objects():
        for y in state.objects():
            for a in ambient.category.hom(x, y):
                if a not in arrows:
                    raise ClosureError(("not-full", x, y, a))


# ----------------------------------------------------------------------
# proof-theoretic metrics


def _plain_opens(state: ClosureState) -> frozenset[str]:
    """Derived opens presentable in one step: a pullback of an image open
    along a derived arrow into an image object."""
    a = state.ambient
    L = a.category
    arrows = state.arrows()
    out = set()
    for u in sorted(state.opens()):
        x = L.dst(u)
        found = False
        for f in arrows:
            if L.src(f) != x or not L.dst(f).startswith("y:"):
                continue
            for yv in sorted(a.y_opens):
                if L.dst(yv) != L.dst(f):
                    continue
                for h in L.hom(L.src(u), L.src(yv)):
                    if is_pullback(L, yv, f, h, u):
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if found:
            out.add(u)
    return frozenset(out)


def _open_heights(state: ClosureState) -> dict[str, Optional[int]]:
    """Minimal plain-decomposition lengths, by relaxation: height 1 for
    plain opens, and u gets h(w)+1 whenever u = w . p with p plain."""
    L = state.ambient.category
    opens = sorted(state.opens())
    plain = _plain_opens(state)
    heights: dict[str, Optional[int]] = {u: (1 if u in plain else None) for u in opens}
    for _ in range(len(opens)):
        changed = False
        for p in plain:
            for w in opens:
                if L.src(w) != L.dst(p):
                    continue
                comp = L.compose(w, p)
                if comp not in heights or heights[w] is None:
                    continue
                cand = heights[w] + 1
                if heights[comp] is None or cand < heights[comp]:
                    heights[comp] = cand
                    changed = True
        if not changed:
            break
    return heights


def _object_height(
    x: str, state: ClosureState, heights: dict[str, Optional[int]]
) -> tuple[Optional[int], Optional[str]]:
    if x.startswith("y:"):
        return 0, None
    L = state.ambient.category
    best: tuple[Optional[int], Optional[str]] = (None, None)
    for u in sorted(state.opens()):
        if L.src(u) != x or not L.dst(u).startswith("y:"):
            continue
        h = heights.get(u)
        if h is not None and (best[0] is None or h < best[0]):
            best = (h, u)
    return best


def proof_metrics(e: Element, state: ClosureState) -> dict:
    """Height, biheight, tail and plainness data for a derived element,
    recomputed from the minimality definitions."""
    if e not in state.proofs:
        raise NotDerived(element_id(e))
    if e[0] == "cov":
        raise ClosureError("coverings carry proofs, not heights")
    L = state.ambient.category
    heights = _open_heights(state)
    if e[0] == "obj":
        h, tail = _object_height(e[1], state, heights)
        return {"height": h, "biheight": None, "tail": tail, "plain": None, "semiplain": None}
    name = e[1]
    hs = _object_height(L.src(name), state, heights)[0]
    hd = _object_height(L.dst(name), state, heights)[0]
    if e[0] == "open":
        h = heights.get(name)
        return {
            "height": h,
            "biheight": (h, hd),
            "tail": None,
            "plain": name in _plain_opens(state),
            "semiplain": h is not None,
        }
    return {"height": None, "biheight": (hs, hd), "tail": None, "plain": None, "semiplain": None}


# ----------------------------------------------------------------------
# covering reflection


def reflects_coverings_check(state: ClosureState, verbose_cap: int = 8) -> Verdict:
    """At fixpoint, a derived open family is a derived covering iff it is
    an epi family of sheaves; mismatches are reported either way."""
    if not state.fixpoint:
        raise DepthBoundHit((), 0)
    a = state.ambient
    L = a.category
    by_apex = state.coverings()
    mismatches: list[tuple] = []
    checked = 0
    for x in state.objects():
        pool = sorted(u for u in state.opens() if L.dst(u) == x)
        if (1 << len(pool)) > SUBSET_CAP:
            raise DepthBoundHit((("pool", x, len(pool)),), 0)
        target = a.member_presheaf(x)
        sinks = frozenset(by_apex.get(x, []))
        for k in range(len(pool) + 1):
            for combo in combinations(pool, k):
                fam = frozenset(combo)
                covering = fam in sinks
                legs = [a.fragment.nat_of(a.frag_arrow(u)) for u in combo]
                epi = is_epi_family_sh(a.site, legs, target=target)
                checked += 1
                if covering != epi:
                    mismatches.append((x, tuple(combo), covering, epi))
    return Verdict(
        "reflects-coverings",
        "pass" if not mismatches else "fail",
        tuple(mismatches[:verbose_cap]),
        f"{checked} open families checked",
    )


# ----------------------------------------------------------------------
# reporting


def closure_to_json(state: ClosureState) -> dict:
    heights = _open_heights(state)
    out = {"objects": [], "arrows": [], "opens": [], "coverings": []}
    for e in sorted(state.proofs, key=element_id):
        pr = state.proofs[e]
        rec = {
            "id": element_id(e),
            "proof": {
                "rule": pr.rule,
                "premises": [element_id(q) for q in pr.premises],
                "round": pr.round,
            },
        }
        if e[0] == "obj":
            h, tail = _object_height(e[1], state, heights)
            rec.update(height=h, tail=tail)
            out["objects"].append(rec)
        elif e[0] == "open":
            rec.update(height=heights.get(e[1]))
            out["opens"].append(rec)
        elif e[0] == "arrow":
            out["arrows"].append(rec)
        else:
            rec.update(apex=e[1], legs=sorted(e[2]))
            out["coverings"].append(rec)
    return out

"""Charts-and-atlases completion of a presite embedding.

Given a faithful functor J from a presite C into a presite D that is
continuous (images of coverings cover) and reflects coverings, an atlas
on a D-object X is a covering by charts u_i: JU_i -> X whose pairwise
overlaps are presented by pullback squares with both projections images
of clopen C-arrows.  Atlases on X fall into compatibility classes (A and
A' are compatible when the union sink is again an atlas), and the pairs
(X, [A]) are the objects of a new presite C_J: its arrows are the
D-arrows admitting chart-wise pullback presentations, its clopen arrows
are the monic ones whose presentations are clopen on both sides, and a
sink covers exactly when its image covers in D.  J then factors as
J' . J_C through C_J, and when D passes the nearly-glutos gates the
universality checker is run on J_C and reported.

Only the completion by atlases is constructed here.  The first
completion step, closing under unions of clopen subobjects, appears as
a precondition: `dg_violations` demands that every bounded family of
clopen monos into an object factor through a single clopen mono via a
covering, including the empty family.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Mapping, Optional, Union

from .axioms import (
    DEFAULT_BOUND,
    DEFAULT_MAX_LEGS,
    PremiseFailed,
    Verdict,
    check_nearly_glutos,
    check_universal_th3,
    make_candidate,
    verdict_to_json,
)
from .closure import BoundExceeded
from .fincat import (
    FinCategory,
    FincatError,
    Functor,
    is_mono,
    pullback,
    is_pullback,
)
from .site import (
    PredicateSite,
    SiteLike,
    clopen_arrows,
    is_subcanonical,
    validate_pretopology,
)

ATLAS_POOL_CAP = 12  # chart pools beyond 2^cap subsets refuse enumeration
DEFAULT_OBJECT_BOUND = 200


class AtlasError(FincatError):
    pass


class NotACovering(AtlasError):
    """The candidate charts do not form a covering of their carrier."""


class NoOverlapPresentation(AtlasError):
    """Some chart pair has no clopen pullback presentation."""

    def __init__(self, i: str, j: str):
        self.pair = (i, j)
        super().__init__(f"no overlap presentation for charts ({i!r}, {j!r})")


class MissingPullback(AtlasError):
    """The target category lacks a pullback needed to decide admissibility."""


# ----------------------------------------------------------------------
# context


@dataclass(frozen=True)
class JContext:
    """A presite embedding candidate: J: source -> target.

    The dataclass itself is passive; `context_violations` checks that J
    is a valid faithful functor, continuous and covering-reflecting, and
    that both presites are subcanonical M-presites with the clopen
    factorization property (`dg_violations`).  Constructions taking a
    context state its validity as a precondition."""

    source: SiteLike
    target: SiteLike
    functor: Functor
    max_legs: int = DEFAULT_MAX_LEGS


def _image_objects(ctx: JContext) -> frozenset[str]:
    return frozenset(ctx.functor.obj(x) for x in ctx.source.base.objects)


def dg_violations(p: SiteLike, max_legs: int = DEFAULT_MAX_LEGS) -> list[tuple]:
    """Families of clopen monos that fail to factor through one clopen mono.

    Every family {f_i} into x, up to max_legs legs and including the
    empty family, must factor as f_i = m . r_i with m a clopen mono and
    {r_i} a covering of src(m); the empty case demands a clopen bottom
    under x."""
    c = p.base
    ops = clopen_arrows(p).opens
    out: list[tuple] = []
    for x in sorted(c.objects):
        pool = sorted(u for u in c.arrows_into(x) if u in ops and is_mono(c, u))
        for k in range(min(len(pool), max_legs) + 1):
            for fam in combinations(pool, k):
                if not _dg_factors(p, c, fam, pool):
                    out.append(("unfactored", x, fam))
    return out


def _dg_factors(p: SiteLike, c: FinCategory, fam: tuple, monos: list[str]) -> bool:
    for m in monos:
        w = c.src(m)
        rs = []
        for f in fam:
            r = next((h for h in c.hom(c.src(f), w) if c.compose(m, h) == f), None)
            if r is None:
                break
            rs.append(r)
        else:
            if p.is_covering(w, frozenset(rs)):
                return True
    return False


def _m_presite_violations(p: SiteLike) -> list[tuple]:
    c = p.base
    out = []
    for x in sorted(c.objects):
        for cov in p.iter_coverings(x):
            for u in sorted(cov):
                if not is_mono(c, u):
                    out.append((x, u))
    return out


def context_violations(ctx: JContext, max_legs: Optional[int] = None) -> list[tuple]:
    """Everything wrong with a candidate embedding, in a fixed order:
    functor defects, faithfulness, continuity, covering reflection over
    bounded clopen sinks, then per side the M-presite, subcanonicity and
    clopen-factorization requirements."""
    k = ctx.max_legs if max_legs is None else max_legs
    j = ctx.functor
    c, d = ctx.source.base, ctx.target.base
    out: list[tuple] = []
    if j.source != c or j.target != d:
        return [("functor-endpoints",)]
    out += [("functor", v.law, v.detail) for v in j.violations()]
    if out:
        return out
    if not j.is_faithful():
        out.append(("not-faithful",))
    for x in sorted(c.objects):
        for cov in ctx.source.iter_coverings(x):
            img = frozenset(j.arr(u) for u in cov)
            if not ctx.target.is_covering(j.obj(x), img):
                out.append(("not-continuous", x, tuple(sorted(cov))))
    ops_c = clopen_arrows(ctx.source).opens
    for x in sorted(c.objects):
        pool = sorted(u for u in c.arrows_into(x) if u in ops_c)
        for n in range(min(len(pool), k) + 1):
            for fam in combinations(pool, n):
                img = frozenset(j.arr(u) for u in fam)
                if ctx.target.is_covering(j.obj(x), img) and not ctx.source.is_covering(
                    x, frozenset(fam)
                ):
                    out.append(("not-covering-reflecting", x, fam))
    for side, p in (("source", ctx.source), ("target", ctx.target)):
        out += [(f"{side}-not-m-presite",) + w for w in _m_presite_violations(p)]
        sub = is_subcanonical(p)
        if not sub.ok:
            out.append((f"{side}-not-subcanonical",) + tuple(sub.witness[:1]))
        out += [(f"{side}-not-dg",) + v for v in dg_violations(p, k)]
    return out


# ----------------------------------------------------------------------
# atlases


@dataclass(frozen=True)
class OverlapCert:
    """Source-side presentation of one chart overlap: the image of apex
    is the pullback of the two charts, via the images of left and right."""

    apex: str
    left: str
    right: str


@dataclass(frozen=True)
class JAtlas:
    """A covering of carrier whose charts start at image objects.

    certificates holds one flattened overlap presentation per unordered
    chart pair; it is derived data and excluded from equality."""

    carrier: str
    charts: frozenset[str]
    certificates: tuple = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class AtlasClass:
    """A compatibility class of atlases on one carrier.

    The representative is recomputed as the union of all members and
    re-validated, never trusted from input."""

    carrier: str
    representative: JAtlas
    members: tuple[JAtlas, ...]


def _presentations(
    ctx: JContext, f: str, g: str, left_clopen: bool, right_clopen: bool
) -> Optional[tuple[str, str, str]]:
    """First (W, a, b) whose images form a pullback square over the
    cospan (f, g), with a landing at src(f) and b at src(g); clopen
    flags constrain the respective source arrows."""
    d = ctx.target.base
    c = ctx.source.base
    j = ctx.functor
    ops = clopen_arrows(ctx.source).opens
    if pullback(d, f, g) is None:
        return None
    sf, sg = d.src(f), d.src(g)
    for w in sorted(c.objects):
        lefts = [
            a
            for a in sorted(c.arrows_out(w))
            if d.dst(j.arr(a)) == sf and (not left_clopen or a in ops)
        ]
        if not lefts:
            continue
        rights = [
            b
            for b in sorted(c.arrows_out(w))
            if d.dst(j.arr(b)) == sg and (not right_clopen or b in ops)
        ]
        for a in lefts:
            ja = j.arr(a)
            for b in rights:
                if is_pullback(d, f, g, ja, j.arr(b)):
                    return (w, a, b)
    return None


def _certify_atlas(ctx: JContext, carrier: str, charts: frozenset[str]) -> Optional[JAtlas]:
    if not ctx.target.is_covering(carrier, charts):
        return None
    certs = []
    for ui, uj in combinations_with_replacement(sorted(charts), 2):
        pres = _presentations(ctx, ui, uj, True, True)
        if pres is None:
            return None
        certs.append((ui, uj) + pres)
    return JAtlas(carrier, frozenset(charts), tuple(certs))


def validate_atlas(a: JAtlas, ctx: JContext) -> Verdict:
    """Covering check plus exhaustive overlap-presentation search.

    Raises NotACovering or NoOverlapPresentation; a pass verdict carries
    the certificates (u_i, u_j, apex, left, right) as witness."""
    d = ctx.target.base
    ims = _image_objects(ctx)
    for u in sorted(a.charts):
        if d.dst(u) != a.carrier:
            raise AtlasError(f"chart {u!r} does not land on {a.carrier!r}")
        if d.src(u) not in ims:
            raise AtlasError(f"chart {u!r} does not start at an image object")
    if not ctx.target.is_covering(a.carrier, a.charts):
        raise NotACovering((a.carrier, tuple(sorted(a.charts))))
    certs = []
    for ui, uj in combinations_with_replacement(sorted(a.charts), 2):
        pres = _presentations(ctx, ui, uj, True, True)
        if pres is None:
            raise NoOverlapPresentation(ui, uj)
        certs.append((ui, uj) + pres)
    return Verdict("atlas", "pass", tuple(certs))


def atlases_on(ctx: JContext, x: str, cap: int = ATLAS_POOL_CAP) -> tuple[JAtlas, ...]:
    """Every atlas on x whose charts come from the clopen arrows out of
    image objects, smallest chart sets first."""
    d = ctx.target.base
    ims = _image_objects(ctx)
    opens = ctx.target.open_arrows()
    pool = sorted(u for u in d.arrows_into(x) if u in opens and d.src(u) in ims)
    if len(pool) > cap:
        raise BoundExceeded(("atlas-pool", x, len(pool), cap))
    out = []
    for k in range(len(pool) + 1):
        for combo in combinations(pool, k):
            a = _certify_atlas(ctx, x, frozenset(combo))
            if a is not None:
                out.append(a)
    return tuple(out)


def compatible(ctx: JContext, a: JAtlas, b: JAtlas) -> bool:
    """Atlases are compatible when their union sink is again an atlas."""
    if a.carrier != b.carrier:
        return False
    return _certify_atlas(ctx, a.carrier, a.charts | b.charts) is not None


def atlas_classes(
    ctx: JContext, x: str, cap: int = ATLAS_POOL_CAP
) -> tuple[tuple[AtlasClass, ...], tuple[tuple, ...]]:
    """Compatibility classes of the atlases on x, plus finding notes.

    Classes are connected components of the compatibility relation; the
    claimed equivalence laws are re-checked inside each component and a
    failure is reported as a note, not an error."""
    atlases = atlases_on(ctx, x, cap)
    n = len(atlases)
    comp = [[False] * n for _ in range(n)]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        comp[i][i] = True
        for j in range(i + 1, n):
            if compatible(ctx, atlases[i], atlases[j]):
                comp[i][j] = comp[j][i] = True
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    notes: list[tuple] = []
    classes: list[AtlasClass] = []
    for root in groups:
        members = sorted(groups[root], key=lambda i: (len(atlases[i].charts), tuple(sorted(atlases[i].charts))))
        for i, j in combinations(members, 2):
            if not comp[i][j]:
                notes.append(
                    (
                        "compatibility-not-transitive",
                        x,
                        tuple(sorted(atlases[i].charts)),
                        tuple(sorted(atlases[j].charts)),
                    )
                )
        union = frozenset().union(*(atlases[i].charts for i in members))
        rep = _certify_atlas(ctx, x, union)
        if rep is None:
            notes.append(("union-not-atlas", x, tuple(sorted(union))))
            rep = atlases[members[-1]]
        classes.append(AtlasClass(x, rep, tuple(atlases[i] for i in members)))
    classes.sort(key=lambda cl: (len(cl.representative.charts), tuple(sorted(cl.representative.charts))))
    return tuple(classes), tuple(notes)


# ----------------------------------------------------------------------
# admissibility


def is_admissible(
    ctx: JContext,
    f: str,
    a: Union[AtlasClass, JAtlas],
    b: Union[AtlasClass, JAtlas],
) -> Verdict:
    """Chart-wise pullback presentations for f against two atlases.

    For every chart u of a and v of b the pullback of v along f . u must
    be presented by images of source arrows, clopen on the u side.
    Classes are checked through their representatives.  Raises
    MissingPullback when the target lacks one of the pullbacks."""
    rep_a = a.representative if isinstance(a, AtlasClass) else a
    rep_b = b.representative if isinstance(b, AtlasClass) else b
    d = ctx.target.base
    if d.src(f) != rep_a.carrier or d.dst(f) != rep_b.carrier:
        raise AtlasError(f"{f!r} does not run between the atlas carriers")
    fails: list[tuple] = []
    wits: list[tuple] = []
    for u in sorted(rep_a.charts):
        g = d.compose(f, u)
        for v in sorted(rep_b.charts):
            if pullback(d, v, g) is None:
                raise MissingPullback((f, u, v))
            pres = _presentations(ctx, v, g, False, True)
            if pres is None:
                fails.append(("no-presentation", u, v))
            else:
                wits.append((u, v) + pres)
    if fails:
        return Verdict("admissible", "fail", tuple(fails))
    return Verdict("admissible", "pass", tuple(wits))


def _j_clopen(ctx: JContext, cat: FinCategory, name: str, f: str, rep_a: JAtlas, rep_b: JAtlas) -> bool:
    """Monic with presentations clopen on both sides, for every chart pair."""
    if not is_mono(cat, name):
        return False
    d = ctx.target.base
    for u in sorted(rep_a.charts):
        g = d.compose(f, u)
        for v in sorted(rep_b.charts):
            if _presentations(ctx, v, g, True, True) is None:
                return False
    return True


# ----------------------------------------------------------------------
# the completed presite


@dataclass(frozen=True)
class CJResult:
    """The completed presite with its bookkeeping.

    classes maps each object label "carrier@i" to its atlas class;
    admissibility lists every candidate triple (f, src label, dst label,
    admitted); th3 is the universality verdict, or None with a note when
    the target failed its gates."""

    context: JContext
    category: FinCategory
    presite: PredicateSite
    classes: Mapping[str, AtlasClass]
    j_c: Functor
    j_prime: Functor
    admissibility: tuple[tuple[str, str, str, bool], ...]
    th3: Optional[Verdict]
    notes: tuple[tuple, ...]


def _max_covering_legs(p: SiteLike) -> int:
    if isinstance(p, PredicateSite):
        return p.max_legs if p.max_legs is not None else DEFAULT_MAX_LEGS
    sizes = [len(cov) for x in p.base.objects for cov in p.coverings_of(x)]
    return max(sizes, default=1)


def build_cj(
    ctx: JContext,
    bound: int = DEFAULT_OBJECT_BOUND,
    regime: str = "elementary",
    pool_cap: int = ATLAS_POOL_CAP,
    candidate_bound: int = DEFAULT_BOUND,
) -> CJResult:
    """Assemble the presite of atlas classes over a validated context.

    Objects are pairs (X, [A]) labelled "X@i", arrows are the admissible
    D-arrows between them, coverings are the sinks of clopen-presented
    monos whose image covers in D.  Asserts the factorization of the
    embedding through the result and, when the target passes the
    nearly-glutos gates, runs the universality checker on it."""
    viol = context_violations(ctx)
    if viol:
        raise PremiseFailed("context", tuple(viol[:4]))
    d = ctx.target.base
    j = ctx.functor
    notes: list[tuple] = []
    labels: dict[str, AtlasClass] = {}
    by_carrier: dict[str, list[str]] = {}
    for x in sorted(d.objects):
        classes, cnotes = atlas_classes(ctx, x, pool_cap)
        notes.extend(cnotes)
        if not classes:
            notes.append(("no-atlas", x))
        for i, cl in enumerate(classes):
            lab = f"{x}@{i}"
            labels[lab] = cl
            by_carrier.setdefault(x, []).append(lab)
        if len(labels) > bound:
            raise BoundExceeded(("cj-objects", len(labels), bound))

    arrow_of: dict[str, tuple[str, str, str]] = {}
    matrix: list[tuple[str, str, str, bool]] = []
    for f in sorted(d.arrows):
        for la in by_carrier.get(d.src(f), ()):
            for lb in by_carrier.get(d.dst(f), ()):
                ok = is_admissible(ctx, f, labels[la], labels[lb]).ok
                matrix.append((f, la, lb, ok))
                if ok:
                    arrow_of[f"{la}|{f}|{lb}"] = (la, f, lb)

    identities: dict[str, str] = {}
    for lab, cl in labels.items():
        idname = f"{lab}|{d.identity(cl.carrier)}|{lab}"
        if idname not in arrow_of:
            raise AtlasError(f"identity arrow on {lab!r} is not admissible")
        identities[lab] = idname
    table: dict[tuple[str, str], str] = {}
    for gname, (gs, gf, gd) in arrow_of.items():
        for fname, (fs, ff, fd) in arrow_of.items():
            if fd != gs:
                continue
            comp = f"{fs}|{d.compose(gf, ff)}|{gd}"
            if comp not in arrow_of:
                raise AtlasError(f"composite of {gname!r} after {fname!r} is not admissible")
            table[(gname, fname)] = comp
    cat = FinCategory.build(
        sorted(labels),
        [(n, arrow_of[n][0], arrow_of[n][2]) for n in sorted(arrow_of)],
        table,
        identities,
    )

    jclopens = frozenset(
        name
        for name, (la, f, lb) in arrow_of.items()
        if _j_clopen(ctx, cat, name, f, labels[la].representative, labels[lb].representative)
    )
    carrier_of = {lab: cl.carrier for lab, cl in labels.items()}
    image_of = {name: f for name, (_, f, _) in arrow_of.items()}

    def covers(apex: str, legs: frozenset[str]) -> bool:
        if not legs <= jclopens:
            return False
        return ctx.target.is_covering(
            carrier_of[apex], frozenset(image_of[n] for n in legs)
        )

    presite = PredicateSite(
        cat, jclopens, covers, _max_covering_legs(ctx.target), name="tau-cj"
    )
    sv = validate_pretopology(presite)
    if not sv.ok:
        raise AtlasError(f"derived coverings are not a pretopology: {sv.failures[0]!r}")

    j_prime = Functor(cat, d, dict(carrier_of), dict(image_of))
    if j_prime.violations():
        raise AtlasError("projection to the target is not a functor")
    c = ctx.source.base
    jc_obj: dict[str, str] = {}
    for x in c.objects:
        jx = j.obj(x)
        ident = frozenset({d.identity(jx)})
        lab = next(
            (
                lb
                for lb in by_carrier.get(jx, ())
                if any(m.charts == ident for m in labels[lb].members)
            ),
            None,
        )
        if lab is None:
            raise AtlasError(f"no identity atlas class on image object {jx!r}")
        jc_obj[x] = lab
    jc_arr: dict[str, str] = {}
    for a in c.arrows:
        name = f"{jc_obj[c.src(a)]}|{j.arr(a)}|{jc_obj[c.dst(a)]}"
        if name not in arrow_of:
            raise AtlasError(f"image of {a!r} is not admissible")
        jc_arr[a] = name
    j_c = Functor(c, cat, jc_obj, jc_arr)
    if j_c.violations():
        raise AtlasError("embedding into the completion is not a functor")
    for x in c.objects:
        if j_prime.obj(j_c.obj(x)) != j.obj(x):
            raise AtlasError(f"factorization broken on object {x!r}")
    for a in c.arrows:
        if j_prime.arr(j_c.arr(a)) != j.arr(a):
            raise AtlasError(f"factorization broken on arrow {a!r}")

    th3: Optional[Verdict] = None
    gate = _nearly_gate(ctx.target, regime, candidate_bound)
    if gate is not None:
        notes.append(("th3-skipped",) + gate)
    else:
        cj_cand = make_candidate(
            pretopology=presite, regime=regime, bound=candidate_bound
        )
        try:
            th3 = check_universal_th3(j_c, ctx.source, cj_cand)
        except PremiseFailed as e:
            notes.append(("th3-premise", e.which) + e.detail)
    return CJResult(
        ctx,
        cat,
        presite,
        labels,
        j_c,
        j_prime,
        tuple(matrix),
        th3,
        tuple(sorted(notes)),
    )


def _nearly_gate(target: SiteLike, regime: str, bound: int) -> Optional[tuple]:
    """None when the target passes its nearly-glutos gates, else the reason."""
    try:
        cand = make_candidate(pretopology=target, regime=regime, bound=bound)
        near = check_nearly_glutos(cand)
    except FincatError as e:
        return ("target-gate", str(e))
    bad = tuple(v.axiom for v in near if v.axiom.startswith("NG") and not v.ok)
    if bad:
        return ("target-not-nearly-glutos",) + bad
    return None


def cj_to_json(r: CJResult) -> dict:
    """Deterministic report: objects with their atlas representatives,
    the admissibility matrix, clopen arrows and derived coverings."""
    objects = [
        {
            "label": lab,
            "carrier": cl.carrier,
            "atlas": sorted(cl.representative.charts),
            "members": len(cl.members),
        }
        for lab, cl in sorted(r.classes.items())
    ]
    arrows = [
        {"name": n, "src": r.category.src(n), "dst": r.category.dst(n), "image": r.j_prime.arr(n)}
        for n in sorted(r.category.arrows)
    ]
    coverings = {
        lab: sorted(sorted(cov) for cov in r.presite.iter_coverings(lab))
        for lab in sorted(r.classes)
    }
    return {
        "schema": "glutos-cj/1",
        "objects": objects,
        "arrows": arrows,
        "admissibility": [list(row) for row in r.admissibility],
        "opens": sorted(r.presite.opens),
        "coverings": coverings,
        "notes": [list(n) for n in r.notes],
        "th3": None if r.th3 is None else verdict_to_json(r.th3),
    }

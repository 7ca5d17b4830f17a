"""Atlas completion: contexts, atlas validation, compatibility classes,
admissibility, and the completed presite with its embedding."""
import json

import pytest

from glutos.atlas import (
    AtlasClass,
    AtlasError,
    BoundExceeded,
    JAtlas,
    JContext,
    MissingPullback,
    NoOverlapPresentation,
    NotACovering,
    atlas_classes,
    atlases_on,
    build_cj,
    cj_to_json,
    compatible,
    context_violations,
    dg_violations,
    is_admissible,
    validate_atlas,
)
from glutos.axioms import PremiseFailed
from glutos.fincat import Functor
from glutos.fixtures import (
    disc2_frame_site,
    finset_pretopology,
    finset_site,
    frame_site,
    minimal_pretopology,
    parallel_pair_category,
    terminal_site,
)
from glutos.site import Pretopology


def identity_ctx() -> JContext:
    p = disc2_frame_site()
    c = p.base
    j = Functor(c, c, {x: x for x in c.objects}, {a: a for a in c.arrows})
    return JContext(p, p, j)


def pointframe_ctx() -> JContext:
    """The one-point frame mapped onto the open point l of the two-point space."""
    chain2 = frame_site(("bot", "top"), lambda a, b: a == "bot" or b == "top")
    d = disc2_frame_site()
    j = Functor(
        chain2.base,
        d.base,
        {"bot": "bot", "top": "l"},
        {"bot:bot": "bot:bot", "top:top": "l:l", "bot:top": "bot:l"},
    )
    return JContext(chain2, d, j)


def finset_ctx() -> JContext:
    """Sets of size at most 1 included into sets of size at most 2."""
    cs = finset_pretopology([0, 1])
    ds = finset_site([0, 1, 2], max_legs=3)
    j = Functor(
        cs.base, ds.base, {x: x for x in cs.base.objects}, {a: a for a in cs.base.arrows}
    )
    return JContext(cs, ds, j)


def mixed_ctx() -> JContext:
    """Diamond frame into a frame where two chart sources meet strictly
    below every image object, so overlaps have no presentation."""
    cle = {
        ("b", "b"), ("b", "x"), ("b", "y"), ("b", "t"),
        ("x", "x"), ("x", "t"), ("y", "y"), ("y", "t"), ("t", "t"),
    }
    c = frame_site(("b", "x", "y", "t"), lambda a, b: (a, b) in cle)
    dle = {
        ("0", "0"), ("0", "m"), ("0", "p"), ("0", "q"), ("0", "1"),
        ("m", "m"), ("m", "p"), ("m", "q"), ("m", "1"),
        ("p", "p"), ("p", "1"), ("q", "q"), ("q", "1"), ("1", "1"),
    }
    d = frame_site(("0", "m", "p", "q", "1"), lambda a, b: (a, b) in dle)
    ob = {"b": "0", "x": "p", "y": "q", "t": "1"}
    j = Functor(
        c.base,
        d.base,
        ob,
        {a: f"{ob[a.split(':')[0]]}:{ob[a.split(':')[1]]}" for a in c.base.arrows},
    )
    return JContext(c, d, j)


def parallel_ctx() -> JContext:
    pp = parallel_pair_category()
    d = Pretopology.build(
        pp,
        [
            ("A", frozenset({"iA"})),
            ("B", frozenset({"iB"})),
            ("B", frozenset({"p"})),
            ("B", frozenset({"q"})),
        ],
    )
    ts = terminal_site()
    j = Functor(ts.base, pp, {ts.base.objects[0]: "A"}, {ts.base.arrows[0]: "iA"})
    return JContext(ts, d, j)


@pytest.fixture(scope="module")
def cj_identity():
    return build_cj(identity_ctx())


@pytest.fixture(scope="module")
def cj_pointframe():
    return build_cj(pointframe_ctx())


@pytest.fixture(scope="module")
def cj_finset():
    return build_cj(finset_ctx())


class TestContext:
    def test_identity_context_clean(self):
        assert context_violations(identity_ctx()) == []

    def test_pointframe_context_clean(self):
        assert context_violations(pointframe_ctx()) == []

    def test_finset_context_clean(self):
        assert context_violations(finset_ctx()) == []

    def test_mixed_context_clean(self):
        assert context_violations(mixed_ctx()) == []

    def test_non_continuous_target_reported(self):
        p = disc2_frame_site()
        tgt = minimal_pretopology(p.base)
        c = p.base
        j = Functor(c, c, {x: x for x in c.objects}, {a: a for a in c.arrows})
        viol = context_violations(JContext(p, tgt, j))
        assert any(v[0] == "not-continuous" for v in viol)

    def test_dg_needs_clopen_bottom(self):
        chain2 = frame_site(("bot", "top"), lambda a, b: a == "bot" or b == "top")
        bad = dg_violations(minimal_pretopology(chain2.base))
        assert any(v[0] == "unfactored" and v[2] == () for v in bad)

    def test_dg_holds_on_fixtures(self):
        assert dg_violations(disc2_frame_site()) == []
        assert dg_violations(finset_site([0, 1, 2], max_legs=3)) == []


class TestValidateAtlas:
    def test_identity_atlas_valid_everywhere(self):
        ctx = identity_ctx()
        c = ctx.target.base
        for x in c.objects:
            v = validate_atlas(JAtlas(x, frozenset({c.identity(x)})), ctx)
            assert v.status == "pass"

    def test_point_charts_valid_with_empty_overlaps(self):
        ctx = finset_ctx()
        v = validate_atlas(JAtlas("s2", frozenset({"F1>2:0", "F1>2:1"})), ctx)
        assert v.status == "pass"
        assert ("F1>2:0", "F1>2:1", "s0", "F0>1:-", "F0>1:-") in v.witness

    def test_non_covering_raises(self):
        with pytest.raises(NotACovering):
            validate_atlas(JAtlas("s2", frozenset({"F1>2:0"})), finset_ctx())

    def test_chart_from_non_image_raises(self):
        ctx = pointframe_ctx()
        with pytest.raises(AtlasError, match="image object"):
            validate_atlas(JAtlas("top", frozenset({"r:top", "l:top"})), ctx)

    def test_chart_on_wrong_carrier_raises(self):
        with pytest.raises(AtlasError, match="land"):
            validate_atlas(JAtlas("s1", frozenset({"F1>2:0"})), finset_ctx())

    def test_overlap_without_presentation_raises(self):
        ctx = mixed_ctx()
        with pytest.raises(NoOverlapPresentation) as ei:
            validate_atlas(JAtlas("1", frozenset({"p:1", "q:1"})), ctx)
        assert ei.value.pair == ("p:1", "q:1")


class TestEnumerationAndClasses:
    def test_atlases_on_top(self):
        assert len(atlases_on(identity_ctx(), "top")) == 10

    def test_pool_cap_refuses(self):
        with pytest.raises(BoundExceeded):
            atlases_on(identity_ctx(), "top", cap=3)

    def test_uncoverable_object_has_no_atlas(self):
        ctx = pointframe_ctx()
        assert atlases_on(ctx, "r") == ()
        assert atlases_on(ctx, "top") == ()

    def test_empty_atlas_covers_bottom(self):
        charts = [a.charts for a in atlases_on(identity_ctx(), "bot")]
        assert frozenset() in charts

    def test_compatibility_is_equivalence_on_top(self):
        ctx = identity_ctx()
        ats = atlases_on(ctx, "top")
        for a in ats:
            assert compatible(ctx, a, a)
            for b in ats:
                assert compatible(ctx, a, b)
                assert compatible(ctx, b, a)

    def test_single_class_with_union_representative(self):
        classes, notes = atlas_classes(identity_ctx(), "top")
        assert notes == ()
        assert len(classes) == 1
        assert sorted(classes[0].representative.charts) == [
            "bot:top", "l:top", "r:top", "top:top",
        ]
        assert len(classes[0].members) == 10

    def test_transitivity_failure_is_reported(self):
        classes, notes = atlas_classes(mixed_ctx(), "1")
        kinds = {n[0] for n in notes}
        assert "compatibility-not-transitive" in kinds
        assert "union-not-atlas" in kinds
        assert len(classes) == 1
        assert sorted(classes[0].representative.charts) == ["0:1", "1:1", "q:1"]

    def test_finset_point_classes(self):
        classes, notes = atlas_classes(finset_ctx(), "s2")
        assert notes == ()
        assert len(classes) == 1
        assert sorted(classes[0].representative.charts) == [
            "F0>2:-", "F1>2:0", "F1>2:1",
        ]
        assert len(classes[0].members) == 2


class TestAdmissibility:
    def test_identity_arrows_admissible(self):
        ctx = identity_ctx()
        for x in ctx.target.base.objects:
            cl = atlas_classes(ctx, x)[0][0]
            v = is_admissible(ctx, ctx.target.base.identity(x), cl, cl)
            assert v.ok

    def test_all_two_two_functions_admissible(self):
        ctx = finset_ctx()
        cl = atlas_classes(ctx, "s2")[0][0]
        for f in ("F2>2:00", "F2>2:01", "F2>2:10", "F2>2:11"):
            assert is_admissible(ctx, f, cl, cl).ok

    def test_presentation_failure_has_witness(self):
        ctx = mixed_ctx()
        cl_p = atlas_classes(ctx, "p")[0][0]
        v = is_admissible(ctx, "p:1", cl_p, JAtlas("1", frozenset({"1:1", "q:1"})))
        assert v.status == "fail"
        assert ("no-presentation", "p:p", "q:1") in v.witness

    def test_missing_pullback_raises(self):
        ctx = parallel_ctx()
        with pytest.raises(MissingPullback) as ei:
            is_admissible(
                ctx, "iB", JAtlas("B", frozenset({"p"})), JAtlas("B", frozenset({"q"}))
            )
        assert ei.value.args[0] == ("iB", "p", "q")

    def test_carrier_mismatch_raises(self):
        ctx = finset_ctx()
        cl = atlas_classes(ctx, "s2")[0][0]
        with pytest.raises(AtlasError, match="carrier"):
            is_admissible(ctx, "F1>2:0", cl, cl)

    def test_verdict_independent_of_representatives(self):
        ctx = finset_ctx()
        d = ctx.target.base
        classes = {x: atlas_classes(ctx, x)[0][0] for x in d.objects}
        for f in d.arrows:
            a, b = classes[d.src(f)], classes[d.dst(f)]
            expected = is_admissible(ctx, f, a, b).ok
            for ma in a.members:
                for mb in b.members:
                    assert is_admissible(ctx, f, ma, mb).ok == expected

    def test_admissibility_closed_under_composition(self):
        ctx = identity_ctx()
        d = ctx.target.base
        classes = {x: atlas_classes(ctx, x)[0][0] for x in d.objects}
        ok = {
            f: is_admissible(ctx, f, classes[d.src(f)], classes[d.dst(f)]).ok
            for f in d.arrows
        }
        for g in d.arrows:
            for f in d.arrows:
                if d.src(g) != d.dst(f):
                    continue
                if ok[f] and ok[g]:
                    assert ok[d.compose(g, f)]


class TestBuildCJ:
    def test_identity_completion_mirrors_target(self, cj_identity):
        r = cj_identity
        d = disc2_frame_site()
        assert sorted(r.classes) == ["bot@0", "l@0", "r@0", "top@0"]
        assert len(r.category.arrows) == len(d.base.arrows)
        assert r.notes == ()
        assert r.th3 is not None and r.th3.status == "pass"

    def test_identity_coverings_mirror_target(self, cj_identity):
        r = cj_identity
        d = disc2_frame_site()
        for lab, cl in r.classes.items():
            got = {
                frozenset(r.j_prime.arr(u) for u in cov)
                for cov in r.presite.iter_coverings(lab)
            }
            assert got == set(d.coverings_of(cl.carrier))

    def test_pointframe_completion(self, cj_pointframe):
        r = cj_pointframe
        assert sorted(r.classes) == ["bot@0", "l@0"]
        assert sorted(r.category.arrows) == [
            "bot@0|bot:bot|bot@0", "bot@0|bot:l|l@0", "l@0|l:l|l@0",
        ]
        assert r.notes == (("no-atlas", "r"), ("no-atlas", "top"))
        assert r.th3 is not None and r.th3.status == "pass"

    def test_finset_completion(self, cj_finset):
        r = cj_finset
        d = finset_site([0, 1, 2], max_legs=3)
        assert sorted(cl.carrier for cl in r.classes.values()) == sorted(d.base.objects)
        assert len(r.category.arrows) == len(d.base.arrows)
        assert r.th3 is not None and r.th3.status == "pass"
        assert r.th3.witness == ()

    def test_factorization_holds(self, cj_identity, cj_pointframe, cj_finset):
        for r in (cj_identity, cj_pointframe, cj_finset):
            j = r.context.functor
            for x in j.source.objects:
                assert r.j_prime.obj(r.j_c.obj(x)) == j.obj(x)
            for a in j.source.arrows:
                assert r.j_prime.arr(r.j_c.arr(a)) == j.arr(a)

    def test_admissibility_matrix_covers_all_arrows(self, cj_identity):
        rows = cj_identity.admissibility
        assert len(rows) == len(disc2_frame_site().base.arrows)
        assert all(ok for _, _, _, ok in rows)

    def test_mixed_fixture_refuses_completion(self):
        with pytest.raises(AtlasError, match="not admissible"):
            build_cj(mixed_ctx())

    def test_object_bound_refuses(self):
        with pytest.raises(BoundExceeded):
            build_cj(identity_ctx(), bound=2)

    def test_invalid_context_refused(self):
        p = disc2_frame_site()
        c = p.base
        j = Functor(c, c, {x: x for x in c.objects}, {a: a for a in c.arrows})
        with pytest.raises(PremiseFailed):
            build_cj(JContext(p, minimal_pretopology(c), j))


class TestReport:
    def test_report_shape(self, cj_identity):
        doc = cj_to_json(cj_identity)
        assert doc["schema"] == "glutos-cj/1"
        assert [o["label"] for o in doc["objects"]] == ["bot@0", "l@0", "r@0", "top@0"]
        assert doc["objects"][3]["atlas"] == ["bot:top", "l:top", "r:top", "top:top"]
        assert doc["th3"]["status"] == "pass"
        assert [] in doc["coverings"]["bot@0"]

    def test_report_deterministic(self):
        a = json.dumps(cj_to_json(build_cj(identity_ctx())), sort_keys=True)
        b = json.dumps(cj_to_json(build_cj(identity_ctx())), sort_keys=True)
        assert a == b

"""Saturation engine and subcanonical completion tests.

Every height and biheight asserted here is cross-checked against an
independent exhaustive search over plain-factor chains (the oracle at
the top of the file), not against the module's own relaxation pass.
"""
from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glutos.closure import (
    Ambient,
    BoundExceeded,
    ClosureError,
    ClosureState,
    DepthBoundHit,
    NotDerived,
    Proof,
    closure_to_json,
    element_id,
    initial_state,
    proof_metrics,
    reflects_coverings_check,
    saturate,
    standard_rules,
    tsub_closure,
    yoneda_ambient,
)
from glutos.closure import GlueRule
from glutos.fincat import FinCategory, is_pullback
from glutos.fixtures import arrow_site, disc2_frame_site, parallel_pair_category, terminal_site
from glutos.sheafkit import is_epi_family_sh, presheaves_isomorphic, terminal_presheaf
from glutos.site import Pretopology, validate_pretopology


# ----------------------------------------------------------------------
# oracle: exhaustive plain-chain search, independent of the module's
# relaxation pass


def oracle_plain(state: ClosureState, u: str) -> bool:
    L = state.ambient.category
    for f in state.arrows():
        if L.src(f) != L.dst(u) or not L.dst(f).startswith("y:"):
            continue
        for yv in sorted(state.ambient.y_opens):
            if L.dst(yv) != L.dst(f):
                continue
            for h in L.hom(L.src(u), L.src(yv)):
                if is_pullback(L, yv, f, h, u):
                    return True
    return False


def oracle_height(state: ClosureState, u: str, max_len: int = 4) -> int | None:
    """Breadth-first search over composites of plain opens."""
    L = state.ambient.category
    plains = [p for p in sorted(state.opens()) if oracle_plain(state, p)]
    level = set(plains)
    seen = set(plains)
    for n in range(1, max_len + 1):
        if u in level:
            return n
        nxt = set()
        for c in level:
            for p in plains:
                if L.dst(p) != L.src(c):
                    continue
                comp = L.compose(c, p)
                if comp not in seen:
                    nxt.add(comp)
                    seen.add(comp)
        level = nxt
    return None


def chain_state() -> ClosureState:
    """A crafted three-object universe where the composite open has no
    one-step pullback presentation, so its height is exactly two."""
    cat = FinCategory.build(
        ["y:V", "y:M", "y:Y"],
        [
            ("v", "y:V", "y:M"),
            ("m", "y:M", "y:Y"),
            ("u", "y:V", "y:Y"),
            ("1V", "y:V", "y:V"),
            ("1M", "y:M", "y:M"),
            ("1Y", "y:Y", "y:Y"),
        ],
        {
            ("m", "v"): "u",
            ("u", "1V"): "u",
            ("1Y", "u"): "u",
            ("v", "1V"): "v",
            ("1M", "v"): "v",
            ("m", "1M"): "m",
            ("1Y", "m"): "m",
            ("1V", "1V"): "1V",
            ("1M", "1M"): "1M",
            ("1Y", "1Y"): "1Y",
        },
        {"y:V": "1V", "y:M": "1M", "y:Y": "1Y"},
    )
    ambient = Ambient(
        site=None,
        fragment=None,
        category=cat,
        member_of={},
        canon_label={},
        y_objects={"V": "y:V", "M": "y:M", "Y": "y:Y"},
        y_arrows={},
        y_opens=frozenset({"v", "m"}),
        y_coverings=(),
    )
    proofs: dict = {}
    for x in cat.objects:
        proofs[("obj", x)] = Proof("axiom", (), 0)
    for a in cat.arrows:
        proofs[("arrow", a)] = Proof("axiom", (), 0)
    for o in ("v", "m"):
        proofs[("open", o)] = Proof("axiom", (), 0)
    proofs[("open", "u")] = Proof("C", (("open", "v"), ("open", "m")), 1)
    return ClosureState(ambient, proofs, fixpoint=True)


BACK = "y:b|y:a|n0>0.0"


@pytest.fixture(scope="module")
def arrow_closure():
    return tsub_closure(arrow_site(), bound=4, depth=8)


@pytest.fixture(scope="module")
def disc2_closure():
    return tsub_closure(disc2_frame_site(), bound=8, depth=10)


class TestSaturateEngine:
    def test_empty_rule_set_leaves_the_state_unchanged(self):
        s0 = initial_state(yoneda_ambient(arrow_site(), bound=4))
        s1 = saturate((), s0, depth=3)
        assert s1.elements() == s0.elements()
        assert s1.fixpoint

    def test_gluing_rule_alone_derives_the_backward_arrow(self):
        ambient = yoneda_ambient(arrow_site(), bound=4)
        s0 = initial_state(ambient)
        s1 = saturate((GlueRule(ambient),), s0, depth=4)
        assert s1.elements() - s0.elements() == {("arrow", BACK)}
        pr = s1.proofs[("arrow", BACK)]
        assert pr.rule == "S"
        assert pr.premises[0] == ("cov", "y:b", frozenset({"y:a|y:b|n0>0.0"}))
        assert ("arrow", "y:a|y:a|n0>0.0") in pr.premises

    def test_saturation_is_idempotent(self):
        ambient = yoneda_ambient(arrow_site(), bound=4)
        rules = standard_rules(ambient)
        s1 = saturate(rules, initial_state(ambient), depth=8)
        s2 = saturate(rules, s1, depth=8)
        assert s1.elements() == s2.elements()
        assert {e: p.round for e, p in s2.proofs.items() if p.rule == "axiom"} == {
            e: 0 for e in s1.axioms
        }

    def test_saturation_is_deterministic(self):
        runs = [
            saturate(
                standard_rules(a := yoneda_ambient(arrow_site(), bound=4)),
                initial_state(a),
                depth=8,
            )
            for _ in range(2)
        ]
        assert runs[0].proofs == runs[1].proofs

    def test_depth_zero_reports_the_frontier(self):
        ambient = yoneda_ambient(arrow_site(), bound=4)
        with pytest.raises(DepthBoundHit) as err:
            saturate(standard_rules(ambient), initial_state(ambient), depth=0)
        assert err.value.rounds == 0
        assert ("arrow", BACK) in err.value.frontier

    def test_proofs_replay(self, arrow_closure, disc2_closure):
        assert arrow_closure.state.replay_violations() == []
        assert disc2_closure.state.replay_violations() == []

    def test_deleting_a_derived_element_and_resaturating_rederives_it(self, arrow_closure):
        state = arrow_closure.state
        derived = [e for e in sorted(state.proofs, key=element_id) if state.proofs[e].rule != "axiom"]
        assert derived
        for victim in derived:
            damaged = ClosureState(
                state.ambient, {e: p for e, p in state.proofs.items() if e != victim}
            )
            healed = saturate(standard_rules(state.ambient), damaged, depth=6)
            assert victim in healed.proofs
            assert healed.elements() == state.elements()

    @settings(max_examples=25, deadline=None)
    @given(picks=st.sets(st.integers(min_value=0, max_value=8)))
    def test_rule_subsets_stay_below_the_full_closure(self, picks):
        ambient = yoneda_ambient(arrow_site(), bound=4)
        rules = standard_rules(ambient)
        subset = tuple(rules[i] for i in sorted(picks))
        s_sub = saturate(subset, initial_state(ambient), depth=8)
        s_full = saturate(rules, initial_state(ambient), depth=8)
        assert s_sub.elements() <= s_full.elements()
        assert saturate(subset, s_sub, depth=8).elements() == s_sub.elements()

    def test_intersection_of_two_saturated_states_is_saturated(self):
        ambient = yoneda_ambient(disc2_frame_site(), bound=8)
        rules = standard_rules(ambient)
        base = initial_state(ambient)
        top_pair = [
            e
            for e in base.proofs
            if e[0] == "cov" and e[1] == "y:top" and ambient.y_arrows["top:top"] not in e[2]
        ]
        bot_empty = ("cov", "y:bot", frozenset())
        seed_a = ClosureState(
            ambient, {e: p for e, p in base.proofs.items() if e not in top_pair}
        )
        seed_b = ClosureState(
            ambient, {e: p for e, p in base.proofs.items() if e != bot_empty}
        )
        s_a = saturate(rules, seed_a, depth=8)
        s_b = saturate(rules, seed_b, depth=8)
        assert s_a.elements() != s_b.elements()
        common = s_a.elements() & s_b.elements()
        inter = ClosureState(ambient, {e: Proof("axiom", (), 0) for e in common})
        assert saturate(rules, inter, depth=8).elements() == common


class TestTerminalClosure:
    def test_fixpoint_at_depth_zero(self):
        t = tsub_closure(terminal_site(), bound=4, depth=4)
        assert t.state.fixpoint
        assert {p.round for p in t.state.proofs.values()} == {0}
        assert t.category.objects == ("y:*",)


class TestArrowClosure:
    def test_collapses_onto_one_member_with_two_labels(self, arrow_closure):
        t = arrow_closure
        assert t.category.objects == ("y:a", "y:b")
        assert len(t.category.arrows) == 4
        assert t.ambient.member_of["y:a"] == t.ambient.member_of["y:b"]

    def test_both_images_are_terminal_sheaves(self, arrow_closure):
        base = arrow_site().base
        term = terminal_presheaf(base)
        for lab in ("y:a", "y:b"):
            member = arrow_closure.ambient.member_presheaf(lab)
            assert presheaves_isomorphic(member, term) is not None

    def test_universal_arrow_is_injective_on_objects_but_not_full(self, arrow_closure):
        yp = arrow_closure.y_prime
        assert yp.obj("a") != yp.obj("b")
        assert yp.is_faithful()
        assert not yp.is_full()

    def test_derived_coverings(self, arrow_closure):
        covs = arrow_closure.state.coverings()
        fwd = "y:a|y:b|n0>0.0"
        ida = "y:a|y:a|n0>0.0"
        idb = "y:b|y:b|n0>0.0"
        assert set(covs["y:a"]) == {
            frozenset({ida}),
            frozenset({BACK}),
            frozenset({ida, BACK}),
        }
        assert set(covs["y:b"]) == {
            frozenset({idb}),
            frozenset({fwd}),
            frozenset({idb, fwd}),
        }
        assert validate_pretopology(arrow_closure.pretopology).ok
        assert arrow_closure.pretopology.is_covering("y:a", frozenset({BACK}))


class TestDisc2Closure:
    def test_nothing_new_is_derived_over_a_complete_frame(self, disc2_closure):
        assert all(p.rule == "axiom" for p in disc2_closure.state.proofs.values())
        assert disc2_closure.state.fixpoint

    def test_universal_arrow_is_fully_faithful_and_bijective_on_objects(self, disc2_closure):
        t = disc2_closure
        src = disc2_frame_site().base
        yp = t.y_prime
        assert sorted(yp.obj(x) for x in src.objects) == list(t.category.objects)
        assert yp.is_full() and yp.is_faithful()
        for x in src.objects:
            for y in src.objects:
                assert len(src.hom(x, y)) == len(t.category.hom(yp.obj(x), yp.obj(y)))

    def test_coverings_match_the_source_frame(self, disc2_closure):
        p = disc2_frame_site()
        covs = disc2_closure.state.coverings()
        for x in p.base.objects:
            lifted = {
                frozenset(disc2_closure.y_prime.arr(u) for u in cov)
                for cov in p.coverings_of(x)
            }
            assert set(covs[f"y:{x}"]) == lifted

    def test_seed_larger_than_the_bound_is_refused(self):
        c = parallel_pair_category()
        p = Pretopology.build(c, [(x, [c.identity(x)]) for x in c.objects])
        with pytest.raises(BoundExceeded):
            tsub_closure(p, bound=1, depth=4)


class TestProofMetrics:
    def test_image_objects_have_height_zero(self, disc2_closure):
        m = proof_metrics(("obj", "y:top"), disc2_closure.state)
        assert m == {"height": 0, "biheight": None, "tail": None, "plain": None, "semiplain": None}

    def test_image_opens_are_plain_of_height_one(self, disc2_closure):
        u = disc2_closure.y_prime.arr("bot:top")
        m = proof_metrics(("open", u), disc2_closure.state)
        assert m["height"] == 1
        assert m["plain"] and m["semiplain"]
        assert m["biheight"] == (1, 0)

    def test_crafted_composite_has_height_two(self):
        state = chain_state()
        m = proof_metrics(("open", "u"), state)
        assert m == {
            "height": 2,
            "biheight": (2, 0),
            "tail": None,
            "plain": False,
            "semiplain": True,
        }
        assert proof_metrics(("open", "m"), state)["height"] == 1
        assert proof_metrics(("arrow", "u"), state)["biheight"] == (0, 0)

    def test_heights_match_the_exhaustive_chain_search(self, arrow_closure, disc2_closure):
        for state in (arrow_closure.state, disc2_closure.state, chain_state()):
            for u in sorted(state.opens()):
                reported = proof_metrics(("open", u), state)
                assert reported["height"] == oracle_height(state, u)
                assert reported["plain"] == oracle_plain(state, u)

    def test_underived_elements_are_rejected(self, disc2_closure):
        with pytest.raises(NotDerived):
            proof_metrics(("open", "nonsense"), disc2_closure.state)
        cov = next(e for e in disc2_closure.state.proofs if e[0] == "cov")
        with pytest.raises(ClosureError):
            proof_metrics(cov, disc2_closure.state)


class TestReflectsCoverings:
    def test_passes_on_both_closure_fixtures(self, arrow_closure, disc2_closure):
        for t in (arrow_closure, disc2_closure):
            v = reflects_coverings_check(t.state)
            assert v.axiom == "reflects-coverings"
            assert v.status == "pass"
            assert v.witness == ()

    def test_example_families(self, disc2_closure):
        t = disc2_closure
        a = t.ambient
        covs = {legs for legs in t.state.coverings()["y:top"]}

        def epi(names):
            legs = [a.fragment.nat_of(a.frag_arrow(u)) for u in sorted(names)]
            return is_epi_family_sh(a.site, legs, target=a.member_presheaf("y:top"))

        idt = t.y_prime.arr("top:top")
        pair = frozenset({t.y_prime.arr("l:top"), t.y_prime.arr("r:top")})
        from_bot = frozenset({t.y_prime.arr("bot:top")})
        assert frozenset({idt}) in covs and epi({idt})
        assert pair in covs and epi(pair)
        assert from_bot not in covs and not epi(from_bot)

    def test_requires_a_fixpoint(self, disc2_closure):
        stale = ClosureState(disc2_closure.ambient, dict(disc2_closure.state.proofs))
        with pytest.raises(DepthBoundHit):
            reflects_coverings_check(stale)


class TestStructuralInvariants:
    def test_every_ambient_arrow_between_images_is_covered_into_the_image(
        self, arrow_closure, disc2_closure
    ):
        for t in (arrow_closure, disc2_closure):
            L = t.ambient.category
            images = set(t.ambient.y_arrows.values())
            covs = t.state.coverings()
            for x in t.ambient.y_objects.values():
                for y in t.ambient.y_objects.values():
                    for f in L.hom(x, y):
                        assert any(
                            all(L.compose(f, u) in images for u in legs)
                            for legs in covs.get(x, [])
                        ), f
                        assert ("arrow", f) in t.state.proofs

    def test_derived_opens_have_finite_heights(self, arrow_closure, disc2_closure):
        for t in (arrow_closure, disc2_closure):
            for u in sorted(t.opens):
                assert proof_metrics(("open", u), t.state)["semiplain"]


class TestClosureReport:
    def test_report_shape_and_determinism(self, arrow_closure):
        rep = closure_to_json(arrow_closure.state)
        assert sorted(rep) == ["arrows", "coverings", "objects", "opens"]
        again = closure_to_json(tsub_closure(arrow_site(), bound=4, depth=8).state)
        assert json.dumps(rep, sort_keys=True) == json.dumps(again, sort_keys=True)
        by_id = {r["id"]: r for r in rep["arrows"]}
        back = by_id[f"arrow:{BACK}"]
        assert back["proof"]["rule"] == "S"
        assert f"cov:y:b:[y:a|y:b|n0>0.0]" in back["proof"]["premises"]
        for r in rep["objects"]:
            assert r["height"] == 0 and r["tail"] is None
        for r in rep["coverings"]:
            assert r["apex"].startswith("y:")
            assert r["legs"] == sorted(r["legs"])

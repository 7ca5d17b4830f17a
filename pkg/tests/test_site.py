from __future__ import annotations

import json

import pytest

from glutos.fincat import Functor, Sink, is_mono
from glutos.site import (
    CloposStructure,
    NotAPretopology,
    Pretopology,
    apply_operator,
    clopen_arrows,
    clopos_violations,
    dominated,
    find_refinement,
    induce_pretopology,
    is_locally,
    is_subcanonical,
    open_slice,
    operator_relations,
    presite_from_json,
    presite_to_json,
    pt4_complete,
    validate_pretopology,
)
from glutos.fixtures import (
    arrow_site,
    chain3_frame_site,
    disc2_frame_site,
    finset_pretopology,
    finset_site,
    minimal_pretopology,
    terminal_site,
)


# ----------------------------------------------------------------------
# validation


def test_disc2_frame_validates_with_expected_sizes():
    p = disc2_frame_site()
    assert validate_pretopology(p).ok
    sizes = {x: len(p.coverings[x]) for x in p.base.objects}
    assert sizes == {"bot": 2, "l": 2, "r": 2, "top": 10}


def test_chain3_frame_validates():
    p = chain3_frame_site()
    assert validate_pretopology(p).ok
    assert len(p.coverings["1"]) == 4
    assert p.is_covering("0", frozenset())


def test_arrow_site_validates():
    assert validate_pretopology(arrow_site()).ok


def test_removing_refinement_closure_breaks_pt4():
    p = disc2_frame_site()
    big = frozenset({"l:top", "r:top", "bot:top"})
    assert p.is_covering("top", big)
    weakened = Pretopology.build(
        p.base, [s for s in p.all_sinks() if not (s.apex == "top" and s.legs == big)]
    )
    v = validate_pretopology(weakened)
    assert not v.ok
    assert any(f[0] == "PT4" and f[1] == "top" for f in v.failures)


def test_missing_iso_singleton_breaks_pt1():
    p = disc2_frame_site()
    weakened = Pretopology.build(
        p.base,
        [s for s in p.all_sinks() if not (s.apex == "l" and s.legs == frozenset({"l:l"}))],
    )
    v = validate_pretopology(weakened)
    assert any(f[0] in ("PT1", "PT4") for f in v.failures)


def test_pt4_completion_restores_and_preserves_opens():
    p = disc2_frame_site()
    big = frozenset({"l:top", "r:top", "bot:top"})
    weakened = Pretopology.build(
        p.base, [s for s in p.all_sinks() if not (s.apex == "top" and s.legs == big)]
    )
    completed = pt4_complete(weakened)
    assert completed == p
    assert completed.open_arrows() == weakened.open_arrows()


def test_pt4_completion_preserves_opens_on_all_fixtures():
    for p in (terminal_site(), arrow_site(), disc2_frame_site(), chain3_frame_site()):
        assert pt4_complete(p).open_arrows() == p.open_arrows()
        assert pt4_complete(p) == p  # fixtures ship complete


def test_finset1_pretopology_validates():
    p = finset_pretopology([0, 1])
    assert validate_pretopology(p).ok
    # the empty sink covers the empty set
    assert p.is_covering("s0", frozenset())


def test_finset2_pretopology_validates():
    p = finset_pretopology([0, 1, 2])
    assert validate_pretopology(p).ok


def test_finset3_site_validates_at_bound():
    s = finset_site([0, 1, 2, 3], max_legs=2)
    v = validate_pretopology(s, max_legs=2)
    assert v.ok
    assert ("bounded", 2) in v.notes


# ----------------------------------------------------------------------
# clopen arrows


def test_clopen_arrows_terminal():
    assert clopen_arrows(terminal_site()).opens == frozenset({"*:*"})


def test_clopen_arrows_disc2_all():
    p = disc2_frame_site()
    assert clopen_arrows(p).opens == frozenset(p.base.arrows)


def test_clopen_arrows_arrow_site_all_three():
    p = arrow_site()
    assert clopen_arrows(p).opens == frozenset({"a:a", "b:b", "a:b"})


def test_clopos_violations_flag_missing_iso():
    p = disc2_frame_site()
    s = CloposStructure(p.base, frozenset({"l:top"}))
    laws = {v[0] for v in clopos_violations(s)}
    assert "isos" in laws


def test_clopos_violations_flag_composition_gap():
    p = disc2_frame_site()
    opens = frozenset(a for a in p.base.arrows if a != "bot:top")
    # bot:l composed with l:top is bot:top, which was removed
    laws = clopos_violations(CloposStructure(p.base, opens))
    assert any(l[0] == "compose" for l in laws)


# ----------------------------------------------------------------------
# refinements


def test_refinement_found_and_checks():
    c = disc2_frame_site().base
    fine = Sink("top", frozenset({"bot:top"}))
    coarse = Sink("top", frozenset({"l:top"}))
    r = find_refinement(c, coarse, fine)
    assert r is not None and r.violations(c) == []
    assert r.witness["bot:top"] == ("l:top", "bot:l")


def test_refinement_absent():
    c = disc2_frame_site().base
    assert find_refinement(c, Sink("top", frozenset({"l:top"})), Sink("top", frozenset({"r:top"}))) is None


def test_dominated_picks_a_covering():
    p = disc2_frame_site()
    got = dominated(p.base, Sink("top", frozenset({"l:top", "r:top", "top:top"})), p.coverings_of("top"))
    assert got is not None


# ----------------------------------------------------------------------
# induced pretopologies


def test_induce_along_identity_is_same():
    p = disc2_frame_site()
    f = Functor(p.base, p.base, {x: x for x in p.base.objects}, {a: a for a in p.base.arrows}).check()
    assert induce_pretopology(f, p) == p


def test_induce_along_open_slice_source_functor():
    p = disc2_frame_site()
    sl, d0 = open_slice(p, "top")
    q = induce_pretopology(d0, p)
    assert validate_pretopology(q).ok
    # the slice object l:top is covered by its own identity triangle
    assert any(q.coverings[x] for x in sl.objects)


def test_induce_along_chain_inclusion():
    p = disc2_frame_site()
    from glutos.fixtures import poset_category

    chain = poset_category(["bot", "top"], lambda x, y: x == y or x == "bot")
    inc = Functor(
        chain, p.base,
        {"bot": "bot", "top": "top"},
        {"bot:bot": "bot:bot", "top:top": "top:top", "bot:top": "bot:top"},
    ).check()
    q = induce_pretopology(inc, p)
    assert q.is_covering("top", frozenset({"top:top"}))
    assert not q.is_covering("top", frozenset({"bot:top"}))
    assert q.is_covering("bot", frozenset())


# ----------------------------------------------------------------------
# subcanonicity


def test_disc2_subcanonical():
    assert is_subcanonical(disc2_frame_site()).ok


def test_terminal_subcanonical():
    assert is_subcanonical(terminal_site()).ok


def test_arrow_site_not_subcanonical():
    v = is_subcanonical(arrow_site())
    assert not v.ok
    assert v.witness[0] == "b"


# ----------------------------------------------------------------------
# locality


def test_locally_via_identity_covering():
    p = disc2_frame_site()
    opens = p.open_arrows()
    assert is_locally(p, "l:top", opens.__contains__)


def test_bot_to_top_locally_clopen_mono():
    p = disc2_frame_site()
    c = p.base
    opens = p.open_arrows()
    assert is_locally(p, "bot:top", lambda a: a in opens and is_mono(c, a))


def test_locally_false_when_predicate_never_holds():
    p = disc2_frame_site()
    # top is not covered by the empty sink, so no vacuous pass
    assert not is_locally(p, "top:top", lambda a: False)
    # but bot is, and locality over the empty covering is vacuously true
    assert is_locally(p, "bot:bot", lambda a: False)


# ----------------------------------------------------------------------
# operators


def test_m_fixes_poset_sites():
    for p in (arrow_site(), disc2_frame_site(), chain3_frame_site()):
        assert apply_operator("M", p) == p


def test_l_fixes_arrow_site():
    p = arrow_site()
    assert apply_operator("L", p) == p


def test_operator_chain_inclusions():
    for p in (arrow_site(), disc2_frame_site(), chain3_frame_site()):
        m, sg, l = apply_operator("M", p), apply_operator("SG", p), apply_operator("L", p)
        for x in p.base.objects:
            assert m.coverings[x] <= sg.coverings[x]
            assert sg.coverings[x] <= p.coverings[x]
            assert p.coverings[x] <= l.coverings[x]


def test_operator_results_validate():
    for p in (arrow_site(), disc2_frame_site()):
        for op in ("M", "L", "SG"):
            assert validate_pretopology(apply_operator(op, p)).ok


def test_operator_relations_hold_on_fixture_sites():
    for p in (arrow_site(), disc2_frame_site(), chain3_frame_site()):
        assert all(ok for _, ok in operator_relations(p))


def test_operator_relations_labels_and_count():
    rels = operator_relations(terminal_site())
    assert len(rels) == 9
    assert [lab for lab, _ in rels] == [
        "M.M = M",
        "SG.SG = SG",
        "L.L = L",
        "(M.L).(M.L) = M.L",
        "(L.M).(L.M) = L.M",
        "SG.L = L.M.L",
        "L.SG = L.M",
        "SG.M = M",
        "M.SG = M",
    ]


def test_intersection_of_pretopologies_validates():
    p = disc2_frame_site()
    q = minimal_pretopology(p.base)
    meet = pt4_complete(
        Pretopology(p.base, {x: p.coverings[x] & q.coverings[x] for x in p.base.objects})
    )
    assert validate_pretopology(meet).ok
    assert meet == q  # the minimal one is the bottom of the closure system


# ----------------------------------------------------------------------
# JSON


def test_presite_round_trip():
    p = disc2_frame_site()
    doc = presite_to_json(p)
    q = presite_from_json(doc)
    assert q == p
    assert json.dumps(doc) == json.dumps(presite_to_json(q))


def test_presite_from_json_rejects_invalid():
    p = arrow_site()
    doc = presite_to_json(p)
    doc["coverings"] = [e for e in doc["coverings"] if e["legs"] != ["a:a"]]
    with pytest.raises(NotAPretopology):
        presite_from_json(doc)

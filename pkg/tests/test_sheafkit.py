"""Sheaf machinery against hand-checked finite models.

Expected counts that are not immediate are recomputed inline from a
closed-form classification (the independent oracle) rather than hard-coded
from a prior run of the code under test.
"""
from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glutos.fincat import category_violations
from glutos.fixtures import (
    arrow_site,
    chain3_frame_site,
    disc2_frame_site,
    terminal_site,
)
from glutos.sheafkit import (
    NatTrans,
    NotAPresheaf,
    Presheaf,
    build_fragment,
    canonicalize,
    compose_nat,
    coproduct_presheaf,
    covering_sieves,
    enumerate_all_sheaves,
    factor_through_sheafification,
    identity_nat,
    invert_nat,
    is_categorical_epi_family,
    is_epi_family_sh,
    is_iso_nat,
    is_sheaf,
    nat_transformations,
    nat_violations,
    presheaf_colimit,
    presheaf_violations,
    presheaves_isomorphic,
    product_presheaf,
    pullback_presheaf,
    representable,
    representable_map,
    sheaf_condition_violations,
    sheaf_from_json,
    sheaf_to_json,
    sheafify,
    sheafify_map,
    sieve_from_sink,
    terminal_presheaf,
    yoneda_embed,
)

DISC2 = disc2_frame_site()
CHAIN3 = chain3_frame_site()
ARROW = arrow_site()


def const_presheaf(c, sizes: dict[str, int]) -> Presheaf:
    """Presheaf with the given section sizes and restrictions collapsing
    everything to element "0"; only valid when targets are nonempty."""
    secs = {x: tuple(str(i) for i in range(sizes[x])) for x in c.objects}
    rest = {}
    for a in c.arrows:
        if c.is_identity(a):
            rest[a] = {el: el for el in secs[c.dst(a)]}
        else:
            rest[a] = {el: "0" for el in secs[c.dst(a)]}
    return Presheaf(c, secs, rest)


# ----------------------------------------------------------------------
# presheaf basics


def test_representables_are_presheaves():
    for site in (DISC2, CHAIN3, ARROW):
        for x in site.base.objects:
            assert presheaf_violations(representable(site.base, x)) == []


def test_presheaf_violations_detect_broken_functoriality():
    c = DISC2.base
    p = representable(c, "top")
    rest = {a: dict(m) for a, m in p.restrictions.items()}
    rest["bot:top"] = {"top:top": "bot:l"}  # wrong target object element
    bad = presheaf_violations(Presheaf(c, p.sections, rest))
    assert any(v[0] == "off-target" for v in bad)


def test_disc2_representables_are_sheaves():
    for x in DISC2.base.objects:
        assert is_sheaf(representable(DISC2.base, x), DISC2)


def test_arrow_representable_a_is_not_a_sheaf():
    # {a:b} covers b but hom(-, a) has no section at b to amalgamate to
    p = representable(ARROW.base, "a")
    bad = sheaf_condition_violations(p, ARROW)
    assert ("no-amalgamation", "b", ("a:b",)) in bad


def test_non_separated_presheaf_detected():
    q = const_presheaf(DISC2.base, {"bot": 1, "l": 1, "r": 1, "top": 2})
    bad = sheaf_condition_violations(q, DISC2)
    assert any(v[0] == "not-separated" for v in bad)


# ----------------------------------------------------------------------
# sieves


def test_covering_sieves_disc2_top():
    sieves = covering_sieves(DISC2, "top")
    r3 = frozenset({"bot:top", "l:top", "r:top"})
    full = r3 | {"top:top"}
    assert set(sieves) == {r3, full}


def test_sieve_from_sink_closes_under_precomposition():
    c = DISC2.base
    s = sieve_from_sink(c, {"l:top"})
    assert s == frozenset({"l:top", "bot:top"})


def test_covering_sieves_arrow_b():
    sieves = covering_sieves(ARROW, "b")
    assert set(sieves) == {frozenset({"a:b"}), frozenset({"a:b", "b:b"})}


# ----------------------------------------------------------------------
# sheafification


def test_sheafify_collapses_non_separated_to_terminal():
    q = const_presheaf(DISC2.base, {"bot": 1, "l": 1, "r": 1, "top": 2})
    res = sheafify(q, DISC2)
    assert all(len(res.sheaf.sections[x]) == 1 for x in DISC2.base.objects)
    assert nat_violations(res.unit) == []


def test_sheafify_fills_missing_amalgamation_arrow_site():
    p = representable(ARROW.base, "a")
    res = sheafify(p, ARROW)
    assert [len(res.sheaf.sections[x]) for x in ("a", "b")] == [1, 1]
    assert presheaves_isomorphic(res.sheaf, terminal_presheaf(ARROW.base))


def test_sheafify_is_idempotent_on_sheaves():
    for site in (DISC2, CHAIN3, ARROW):
        for x in site.base.objects:
            res = sheafify(representable(site.base, x), site)
            again = sheafify(res.sheaf, site)
            assert is_iso_nat(again.unit)


def test_sheafify_forces_singleton_under_empty_covering():
    p = const_presheaf(CHAIN3.base, {"0": 3, "u": 1, "1": 1})
    res = sheafify(p, CHAIN3)
    assert len(res.sheaf.sections["0"]) == 1


def test_unit_factorization_is_found_and_unique():
    q = const_presheaf(DISC2.base, {"bot": 1, "l": 1, "r": 1, "top": 2})
    res = sheafify(q, DISC2)
    t = NatTrans(
        q,
        terminal_presheaf(DISC2.base),
        {x: {el: "*" for el in q.sections[x]} for x in DISC2.base.objects},
    )
    fac = factor_through_sheafification(t, res)
    assert fac is not None
    assert compose_nat(fac, res.unit).key() == t.key()


def test_sheafify_map_is_functorial():
    c = ARROW.base
    p = representable(c, "a")
    q = representable(c, "b")
    sp, sq = sheafify(p, ARROW), sheafify(q, ARROW)
    t = representable_map(c, "a:b")
    st_ = sheafify_map(t, sp, sq)
    assert nat_violations(st_) == []
    # unit square commutes
    assert compose_nat(st_, sp.unit).key() == compose_nat(sq.unit, t).key()
    ids = sheafify_map(identity_nat(p), sp, sp)
    assert ids.key() == identity_nat(sp.sheaf).key()


# ----------------------------------------------------------------------
# Yoneda


def test_yoneda_disc2_matches_poset():
    img = yoneda_embed(DISC2)
    assert img.violations() == []
    for x in DISC2.base.objects:
        assert is_iso_nat(img.units[x].unit)  # subcanonical: nothing changes
    # hom counts reproduce the poset order
    c = DISC2.base
    for x in c.objects:
        for y in c.objects:
            n = len(nat_transformations(img.sheaves[x], img.sheaves[y]))
            assert n == len(c.hom(x, y))


def test_yoneda_arrow_site_collapses_both_objects():
    img = yoneda_embed(ARROW)
    t = terminal_presheaf(ARROW.base)
    assert presheaves_isomorphic(img.sheaves["a"], t)
    assert presheaves_isomorphic(img.sheaves["b"], t)
    assert is_iso_nat(img.arrow_maps["a:b"])


def test_yoneda_lemma_for_presheaf_maps():
    c = DISC2.base
    for g_obj in ("l", "top"):
        g = representable(c, g_obj)
        for x in c.objects:
            assert len(nat_transformations(representable(c, x), g)) == len(
                g.sections[x]
            )


def test_no_maps_between_incomparable_opens():
    c = DISC2.base
    assert nat_transformations(representable(c, "l"), representable(c, "r")) == []


# ----------------------------------------------------------------------
# limits and colimits of presheaves


def test_product_and_pullback_presheaves():
    c = DISC2.base
    yl, yr, yt = (representable(c, o) for o in ("l", "r", "top"))
    prod, p1, p2 = product_presheaf(yl, yr)
    assert [len(prod.sections[x]) for x in c.objects] == [1, 0, 0, 0]
    assert nat_violations(p1) == [] and nat_violations(p2) == []
    f = nat_transformations(yl, yt)[0]
    g = nat_transformations(yr, yt)[0]
    pb, q1, q2 = pullback_presheaf(f, g)
    assert presheaves_isomorphic(pb, representable(c, "bot"))


def test_pushout_of_opens_then_sheafify_gives_union():
    c = DISC2.base
    yb, yl, yr = (representable(c, o) for o in ("bot", "l", "r"))
    i_l = nat_transformations(yb, yl)[0]
    i_r = nat_transformations(yb, yr)[0]
    colim, legs = presheaf_colimit(
        {"b": yb, "l": yl, "r": yr}, [("b", "l", i_l), ("b", "r", i_r)]
    )
    assert presheaf_violations(colim) == []
    sizes = {x: len(colim.sections[x]) for x in c.objects}
    assert sizes == {"bot": 1, "l": 1, "r": 1, "top": 0}
    for t in legs.values():
        assert nat_violations(t) == []
    res = sheafify(colim, DISC2)
    assert presheaves_isomorphic(res.sheaf, representable(c, "top"))


def test_coproduct_presheaf_sizes():
    c = CHAIN3.base
    p = representable(c, "u")
    cop, legs = coproduct_presheaf([p, p])
    assert all(len(cop.sections[x]) == 2 * len(p.sections[x]) for x in c.objects)
    assert all(nat_violations(t) == [] for t in legs)


# ----------------------------------------------------------------------
# epi families


def test_joint_cover_is_epi_family():
    img = yoneda_embed(DISC2)
    legs = [img.arrow_maps["l:top"], img.arrow_maps["r:top"]]
    assert is_epi_family_sh(DISC2, legs)
    assert not is_epi_family_sh(DISC2, [img.arrow_maps["l:top"]])


def test_epi_family_matches_categorical_cancellation():
    img = yoneda_embed(DISC2)
    c = DISC2.base
    # a sheaf whose restriction to l is not injective, so cancellation bites
    probe = Presheaf(
        c,
        {"bot": ("*",), "l": ("0",), "r": ("0", "1"), "top": ("p0", "p1")},
        {
            "bot:bot": {"*": "*"},
            "l:l": {"0": "0"},
            "r:r": {"0": "0", "1": "1"},
            "top:top": {"p0": "p0", "p1": "p1"},
            "bot:l": {"0": "*"},
            "bot:r": {"0": "*", "1": "*"},
            "bot:top": {"p0": "*", "p1": "*"},
            "l:top": {"p0": "0", "p1": "0"},
            "r:top": {"p0": "0", "p1": "1"},
        },
    )
    assert is_sheaf(probe, DISC2)
    candidates = list(img.sheaves.values()) + [probe]
    good = [img.arrow_maps["l:top"], img.arrow_maps["r:top"]]
    bad = [img.arrow_maps["l:top"]]
    assert is_categorical_epi_family(candidates, good)
    assert not is_categorical_epi_family(candidates, bad)


def test_empty_family_epi_iff_empty_cover():
    c = CHAIN3.base
    y0 = representable(c, "0")
    assert is_epi_family_sh(CHAIN3, [], target=y0)
    y1 = representable(c, "1")
    assert not is_epi_family_sh(CHAIN3, [], target=y1)


# ----------------------------------------------------------------------
# fragments


def test_fragment_closure_recovers_whole_poset():
    c = DISC2.base
    frag = build_fragment(DISC2, [representable(c, "l"), representable(c, "r")])
    assert len(frag.members) == 4
    cat = frag.as_category()
    assert category_violations(cat) == []
    assert len(cat.arrows) == 9  # one arrow per comparable pair in disc2
    assert frag.notes == []


def test_fragment_records_bound_refusals():
    c = CHAIN3.base
    big = const_presheaf(c, {"0": 1, "u": 3, "1": 3})
    frag = build_fragment(CHAIN3, [], bound=2)
    frag.add(big, origin="manual")
    assert ("bound-exceeded", "manual", 7) in frag.notes


def test_fragment_name_round_trip():
    c = DISC2.base
    frag = build_fragment(DISC2, [representable(c, "l"), representable(c, "r")])
    cat = frag.as_category()
    for a in cat.arrows:
        t = frag.nat_of(a)
        assert frag.name_of(t) == a


# ----------------------------------------------------------------------
# enumeration, with closed-form oracles


def test_enumerate_sheaves_disc2():
    found = enumerate_all_sheaves(DISC2, 3)
    expect = sum(
        math.factorial(a * b) for a in range(4) for b in range(4) if a * b <= 3
    )
    assert len(found) == expect
    assert all(is_sheaf(p, DISC2) for p in found)
    assert len({repr(sheaf_to_json(p)) for p in found}) == len(found)


def test_enumerate_sheaves_chain3():
    found = enumerate_all_sheaves(CHAIN3, 3)
    expect = sum(m**n for m in range(4) for n in range(4))
    assert len(found) == expect


def test_enumerate_sheaves_terminal_site():
    found = enumerate_all_sheaves(terminal_site(), 3)
    assert len(found) == 4  # one per section size 0..3


# ----------------------------------------------------------------------
# json


def test_sheaf_json_round_trip():
    c = DISC2.base
    p, _ = canonicalize(representable(c, "top"))
    doc = sheaf_to_json(p)
    q = sheaf_from_json(doc, c)
    assert q == p


def test_sheaf_json_rejects_non_functorial():
    c = ARROW.base
    doc = {
        "sections": {"a": ["0", "1"], "b": ["0"]},
        "restrictions": {
            "a:a": {"0": "1", "1": "0"},
            "b:b": {"0": "0"},
            "a:b": {"0": "0"},
        },
    }
    with pytest.raises(NotAPresheaf):
        sheaf_from_json(doc, c)


# ----------------------------------------------------------------------
# properties


@st.composite
def chain3_presheaves(draw):
    c = CHAIN3.base
    n0 = draw(st.integers(min_value=1, max_value=2))
    nu = draw(st.integers(min_value=0, max_value=2))
    n1 = draw(st.integers(min_value=0, max_value=2))
    secs = {
        "0": tuple(str(i) for i in range(n0)),
        "u": tuple(str(i) for i in range(nu)),
        "1": tuple(str(i) for i in range(n1)),
    }
    to0 = {el: draw(st.sampled_from(secs["0"])) for el in secs["u"]}
    to_u = (
        {el: draw(st.sampled_from(secs["u"])) for el in secs["1"]}
        if nu
        else {el: None for el in ()}
    )
    if n1 and not nu:
        n1 = 0
        secs = dict(secs, **{"1": ()})
    rest = {
        "0:0": {el: el for el in secs["0"]},
        "u:u": {el: el for el in secs["u"]},
        "1:1": {el: el for el in secs["1"]},
        "0:u": to0,
        "u:1": {el: to_u[el] for el in secs["1"]},
        "0:1": {el: to0[to_u[el]] for el in secs["1"]},
    }
    return Presheaf(c, secs, rest)


@settings(max_examples=40, deadline=None)
@given(chain3_presheaves())
def test_sheafify_properties_chain3(p):
    assert presheaf_violations(p) == []
    res = sheafify(p, CHAIN3)
    assert is_sheaf(res.sheaf, CHAIN3)
    assert nat_violations(res.unit) == []
    assert is_iso_nat(sheafify(res.sheaf, CHAIN3).unit)


@settings(max_examples=20, deadline=None)
@given(chain3_presheaves(), chain3_presheaves())
def test_sheafify_preserves_products_chain3(p, q):
    prod, _, _ = product_presheaf(p, q)
    lhs = sheafify(prod, CHAIN3).sheaf
    rp, rq = sheafify(p, CHAIN3).sheaf, sheafify(q, CHAIN3).sheaf
    rhs, _, _ = product_presheaf(rp, rq)
    assert presheaves_isomorphic(lhs, rhs) is not None


def test_invert_nat_round_trip():
    c = DISC2.base
    p = representable(c, "top")
    q, _ = canonicalize(p)
    iso = presheaves_isomorphic(p, q)
    assert iso is not None
    back = invert_nat(iso)
    assert compose_nat(back, iso).key() == identity_nat(p).key()

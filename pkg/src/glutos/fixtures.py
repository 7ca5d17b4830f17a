"""Built-in categories and sites used by tests, demos, and the CLI.

Poset arrows are named "x:y" for x <= y, so "x:x" is the identity.
Finite-set objects are size skeletons: object "s2" is the set {0,1}, and
the arrow "F2>3:01" is the function 0|->0, 1|->1 into {0,1,2}.
"""
from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Optional, Sequence

from .fincat import FinCategory, Sink
from .site import Pretopology, PredicateSite, SiteLike


# ----------------------------------------------------------------------
# posets and frames


def poset_category(elems: Sequence[str], leq: Callable[[str, str], bool]) -> FinCategory:
    arrows = [(f"{x}:{y}", x, y) for x in elems for y in elems if leq(x, y)]
    table = {}
    for x in elems:
        for y in elems:
            if not leq(x, y):
                continue
            for z in elems:
                if leq(y, z):
                    table[(f"{y}:{z}", f"{x}:{y}")] = f"{x}:{z}"
    return FinCategory.build(elems, arrows, table, {x: f"{x}:{x}" for x in elems})


def frame_site(elems: Sequence[str], leq: Callable[[str, str], bool]) -> Pretopology:
    """Join coverings: a sink over y covers iff the join of its sources is y.
    The empty sink covers the bottom element."""
    c = poset_category(elems, leq)

    def lub(sources: Iterable[str]) -> Optional[str]:
        ub = [z for z in elems if all(leq(s, z) for s in sources)]
        for z in ub:
            if all(leq(z, w) for w in ub):
                return z
        return None

    sinks = []
    for y in elems:
        down = [x for x in elems if leq(x, y)]
        for k in range(2 ** len(down)):
            chosen = [x for i, x in enumerate(down) if k >> i & 1]
            if lub(chosen) == y:
                sinks.append(Sink(y, frozenset(f"{x}:{y}" for x in chosen)))
    return Pretopology.build(c, sinks)


def terminal_category() -> FinCategory:
    return poset_category(["*"], lambda x, y: True)


def terminal_site() -> Pretopology:
    c = terminal_category()
    return Pretopology.build(c, [Sink("*", frozenset({"*:*"}))])


def arrow_category() -> FinCategory:
    return poset_category(["a", "b"], lambda x, y: x == y or (x, y) == ("a", "b"))


def arrow_site() -> Pretopology:
    """The deliberately non-subcanonical site: {a -> b} covers b."""
    c = arrow_category()
    return Pretopology.build(
        c,
        [
            Sink("a", frozenset({"a:a"})),
            Sink("b", frozenset({"b:b"})),
            Sink("b", frozenset({"a:b"})),
            Sink("b", frozenset({"a:b", "b:b"})),
        ],
    )


DISC2 = ("bot", "l", "r", "top")


def _disc2_leq(x: str, y: str) -> bool:
    return x == y or x == "bot" or y == "top"


def disc2_frame_site() -> Pretopology:
    """Opens of the 2-point discrete space: bot < l, r < top."""
    return frame_site(DISC2, _disc2_leq)


CHAIN3 = ("0", "u", "1")


def _chain3_leq(x: str, y: str) -> bool:
    return CHAIN3.index(x) <= CHAIN3.index(y)


def chain3_frame_site() -> Pretopology:
    """Opens of the Sierpinski-like chain 0 < u < 1."""
    return frame_site(CHAIN3, _chain3_leq)


# ----------------------------------------------------------------------
# skeletal finite-set categories


def _fun_name(n: int, m: int, t: tuple[int, ...]) -> str:
    return f"F{n}>{m}:" + ("".join(map(str, t)) if t else "-")


def finset_category(sizes: Sequence[int]) -> FinCategory:
    """One object per listed size; arrows are all functions, identified by
    their value tuples."""
    sizes = list(sizes)
    objs = [f"s{n}" for n in sizes]
    arrows = []
    funs: dict[str, tuple[int, int, tuple[int, ...]]] = {}
    for n in sizes:
        for m in sizes:
            for t in product(range(m), repeat=n):
                name = _fun_name(n, m, t)
                arrows.append((name, f"s{n}", f"s{m}"))
                funs[name] = (n, m, t)
    table = {}
    for f, (n, m, t) in funs.items():
        for g, (m2, k, u) in funs.items():
            if m2 == m:
                table[(g, f)] = _fun_name(n, k, tuple(u[t[i]] for i in range(n)))
    ids = {f"s{n}": _fun_name(n, n, tuple(range(n))) for n in sizes}
    return FinCategory.build(objs, arrows, table, ids)


def fun_tuple(name: str) -> tuple[int, int, tuple[int, ...]]:
    """Inverse of the finset arrow naming scheme."""
    head, _, vals = name.partition(":")
    n, m = head[1:].split(">")
    t = () if vals == "-" else tuple(int(d) for d in vals)
    return int(n), int(m), t


def _is_injection(name: str) -> bool:
    _, _, t = fun_tuple(name)
    return len(set(t)) == len(t)


def _jointly_surjective(apex: str, legs: frozenset[str]) -> bool:
    m = int(apex[1:])
    hit = set()
    for leg in legs:
        hit.update(fun_tuple(leg)[2])
    return hit == set(range(m))


def finset_site(sizes: Sequence[int], max_legs: Optional[int] = None) -> PredicateSite:
    """Coverings: jointly surjective families of injections."""
    c = finset_category(sizes)
    opens = frozenset(a for a in c.arrows if _is_injection(a))

    def pred(apex: str, legs: frozenset[str]) -> bool:
        return all(leg in opens for leg in legs) and _jointly_surjective(apex, legs)

    k = max_legs if max_legs is not None else max(sizes) + 1
    return PredicateSite(c, opens, pred, max_legs=k, name=f"finset{max(sizes)}")


def finset_pretopology(sizes: Sequence[int]) -> Pretopology:
    """Explicit materialization of finset_site; only sane for tiny sizes."""
    s = finset_site(sizes)
    c = s.base
    sinks = [
        Sink(x, legs)
        for x in c.objects
        for legs in s.iter_coverings(x, max_legs=len(s.opens_into(x)))
    ]
    return Pretopology.build(c, sinks)


def parallel_pair_category() -> FinCategory:
    """Two non-identity arrows p, q: A -> B; p has no pullback along q."""
    arrows = [("iA", "A", "A"), ("iB", "B", "B"), ("p", "A", "B"), ("q", "A", "B")]
    table = {
        ("iA", "iA"): "iA",
        ("iB", "iB"): "iB",
        ("p", "iA"): "p",
        ("iB", "p"): "p",
        ("q", "iA"): "q",
        ("iB", "q"): "q",
    }
    return FinCategory.build(["A", "B"], arrows, table, {"A": "iA", "B": "iB"})


def minimal_pretopology(c: FinCategory) -> Pretopology:
    """Iso singletons only, refinement-completed."""
    from .fincat import is_iso
    from .site import pt4_complete

    return pt4_complete(
        Pretopology.build(c, [Sink(c.dst(f), frozenset({f})) for f in c.arrows if is_iso(c, f)])
    )


def terminal_fragment():
    """Sheaves of sizes 0, 1 and 2 on the one-point site, bounded at 4.

    The fragment doubles as a bounded window into finite sets: isos,
    injections and empty maps are the eventual opens, collapses are not.
    """
    from .sheafkit import Presheaf, SheafFragment

    ts = terminal_site()
    tc = ts.base
    obj = tc.objects[0]
    frag = SheafFragment(ts, bound=4)
    for els in ((), ("0",), ("0", "1")):
        frag.add(Presheaf(tc, {obj: els}, {tc.identity(obj): {e: e for e in els}}))
    return frag


# ----------------------------------------------------------------------
# registry for the CLI


BUILTIN_SITES: dict[str, Callable[[], SiteLike]] = {
    "terminal": terminal_site,
    "arrow": arrow_site,
    "disc2": disc2_frame_site,
    "chain3": chain3_frame_site,
    "finset1": lambda: finset_pretopology([0, 1]),
    "finset2": lambda: finset_pretopology([0, 1, 2]),
    "finset3": lambda: finset_site([0, 1, 2, 3], max_legs=3),
}

BUILTIN_CATEGORIES: dict[str, Callable[[], FinCategory]] = {
    "terminal": terminal_category,
    "arrow": arrow_category,
    "disc2": lambda: disc2_frame_site().base,
    "chain3": lambda: chain3_frame_site().base,
    "finset12": lambda: finset_category([1, 2]),
    "finset3": lambda: finset_category([0, 1, 2, 3]),
    "parallel": parallel_pair_category,
}

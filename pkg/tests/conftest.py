"""Shared builders for the test suite.

The terminal fragment is the category of the three sheaves of sizes
0, 1 and 2 on the one-point site; it doubles as a bounded window into
the category of all finite sets.  Its mono pretopology makes isos,
injections and empty maps open while keeping the collapses non-open.
"""

from glutos.fincat import is_iso
from glutos.sheafkit import SheafFragment
from glutos.site import Pretopology, pt4_complete
from glutos.fixtures import terminal_fragment


def make_terminal_fragment() -> SheafFragment:
    return terminal_fragment()


def make_fragment_site() -> Pretopology:
    c = make_terminal_fragment().as_category()
    injections = sorted(a for a in c.arrows if c.src(a) == "F1" and c.dst(a) == "F2")
    swap = next(
        a
        for a in c.arrows
        if c.src(a) == "F2" and c.dst(a) == "F2" and is_iso(c, a) and not c.is_identity(a)
    )
    base = Pretopology.build(
        c,
        [
            ("F0", [c.identity("F0")]),
            ("F1", [c.identity("F1")]),
            ("F1", [c.identity("F1"), "n0>1.0"]),
            ("F2", [c.identity("F2")]),
            ("F2", [swap]),
            ("F2", [c.identity("F2"), "n0>2.0"]),
            ("F2", injections),
        ],
    )
    return pt4_complete(base)

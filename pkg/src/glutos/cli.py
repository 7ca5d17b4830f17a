"""Command line front end for the glutos toolkit.

A workspace is a set of JSON files declaring named categories, presites,
functors, gluons and sheaves, plus global bounds.  Everything is
validated while loading: a command never sees a category that breaks the
composition laws or a presite that fails PT1-PT4.  Commands dispatch to
the library modules and emit reports that are byte-stable for a fixed
workspace, bounds and seed; the exit status is 0 exactly when every
requested verdict passes ("proxy-pass" counts only under --allow-proxy,
"inapplicable" never blocks).

Workspace file shape::

    {
      "bounds":     {"bound": 8, "depth": 12, "shape": 64},
      "categories": {"name": {objects, arrows, compose, identities}},
      "presites":   {"name": {"category": "...", "coverings":
                               {"x": [["f", "g"], ...]},
                               "complete": false}},
      "functors":   {"name": {"source": presite, "target": presite,
                               "on_objects": {...}, "on_arrows": {...}}},
      "gluons":     {"name": {"site": presite, ...gluon document...}},
      "sheaves":    {"name": {"site": presite, "sections": {...},
                               "restrictions": {...}}}
    }

Presites, gluons and sheaves may also name one of the built-in sites
(terminal, arrow, disc2, chain3, finset1, finset2, finset3); the check
commands additionally accept the built-in target "fragment", the
three-sheaf window on the one-point site.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .atlas import JContext, build_cj, cj_to_json
from .axioms import (
    DEFAULT_BOUND,
    GlutosCandidate,
    Verdict,
    check_glutos_suite,
    check_nearly_glutos,
    make_candidate,
    tau_from_opens,
    verdicts_to_json,
)
from .closure import closure_to_json, reflects_coverings_check, tsub_closure
from .fincat import FinCategory, FincatError, Functor, category_from_json
from .fixtures import BUILTIN_SITES, terminal_fragment
from .glue import (
    Gluon,
    check_local_pullback,
    gluon_colimit,
    gluon_from_json,
    random_set_instance,
    validate_gluon,
    validate_m_gluon,
)
from .sheafkit import Presheaf, presheaf_violations, sheaf_condition_violations
from .site import (
    Pretopology,
    SiteLike,
    apply_operator,
    operator_relations,
    presite_to_json,
    pt4_complete,
    validate_pretopology,
)

SCHEMA = "glutos-report/1"
DEFAULT_FRAGMENT_BOUND = 8
DEFAULT_DEPTH = 12
DEFAULT_SHAPE = 64


class CliError(Exception):
    """Base for workspace and dispatch failures."""


class ParseError(CliError):
    """A workspace file is missing, malformed, or has the wrong shape."""


class ValidationError(CliError):
    """A loaded value fails its module validator; carries the verdict."""

    def __init__(self, message: str, verdict: object = None):
        super().__init__(message)
        self.verdict = verdict


class UnresolvedName(CliError):
    """A cross reference names nothing in the workspace or built-ins."""


class UnknownCommand(CliError):
    """No such subcommand, or its flags do not parse."""


# ----------------------------------------------------------------------
# workspace


@dataclass(frozen=True)
class Bounds:
    """Global size knobs: fragment bound, saturation depth, shape cap.

    bound is None until the environment, a workspace file, or --bound
    sets it; each command then falls back to its own default.
    """

    bound: Optional[int] = None
    depth: int = DEFAULT_DEPTH
    shape: int = DEFAULT_SHAPE


def default_bounds() -> Bounds:
    raw = os.environ.get("GLUTOS_BOUND")
    if raw is None:
        return Bounds()
    try:
        return Bounds(bound=int(raw))
    except ValueError:
        raise ParseError(f"GLUTOS_BOUND must be an integer, got {raw!r}")


@dataclass(frozen=True)
class FunctorEntry:
    functor: Functor
    source: SiteLike
    target: SiteLike


@dataclass(frozen=True)
class GluonEntry:
    gluon: Gluon
    site: SiteLike


@dataclass(frozen=True)
class SheafEntry:
    presheaf: Presheaf
    site: SiteLike


@dataclass(frozen=True)
class Workspace:
    categories: Mapping[str, FinCategory] = field(default_factory=dict)
    presites: Mapping[str, Pretopology] = field(default_factory=dict)
    functors: Mapping[str, FunctorEntry] = field(default_factory=dict)
    gluons: Mapping[str, GluonEntry] = field(default_factory=dict)
    sheaves: Mapping[str, SheafEntry] = field(default_factory=dict)
    bounds: Bounds = field(default_factory=default_bounds)


_SECTIONS = ("bounds", "categories", "presites", "functors", "gluons", "sheaves")


def _load_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror or e}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}: {e.msg}")
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: workspace document must be a JSON object")
    for section, items in doc.items():
        if section not in _SECTIONS:
            raise ParseError(f"{path}: unknown section {section!r}")
        if not isinstance(items, dict):
            raise ParseError(f"{path}: section {section!r} must be an object")
    return doc


def resolve_site(ws: Workspace, name: str) -> SiteLike:
    """Workspace presites shadow the built-in ones."""
    if name in ws.presites:
        return ws.presites[name]
    if name in BUILTIN_SITES:
        return BUILTIN_SITES[name]()
    raise UnresolvedName(f"unknown presite {name!r}")


def _require(doc: Mapping, key: str, where: str) -> object:
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _build_category(name: str, doc: Mapping, where: str) -> FinCategory:
    try:
        return category_from_json(doc)
    except FincatError as e:
        raise ValidationError(f"{where}: category {name!r}: {e}", verdict=e.args)
    except (KeyError, TypeError, AttributeError) as e:
        raise ParseError(f"{where}: category {name!r} has the wrong shape: {e!r}")


def _build_presite(
    name: str, doc: Mapping, categories: Mapping[str, FinCategory], where: str
) -> Pretopology:
    catname = _require(doc, "category", where)
    if catname not in categories:
        raise UnresolvedName(f"{where}: presite {name!r} references unknown category {catname!r}")
    coverings = doc.get("coverings", {})
    try:
        sinks = [(apex, legs) for apex, fams in coverings.items() for legs in fams]
        p = Pretopology.build(categories[catname], sinks)
        if doc.get("complete", False):
            p = pt4_complete(p)
    except FincatError as e:
        raise ValidationError(f"{where}: presite {name!r}: {e}", verdict=e.args)
    v = validate_pretopology(p)
    if not v.ok:
        raise ValidationError(
            f"{where}: presite {name!r} fails {v.failures[0][0]}", verdict=v
        )
    return p


def _build_functor(name: str, doc: Mapping, ws: Workspace, where: str) -> FunctorEntry:
    src = resolve_site(ws, str(_require(doc, "source", where)))
    dst = resolve_site(ws, str(_require(doc, "target", where)))
    try:
        f = Functor(
            src.base,
            dst.base,
            dict(_require(doc, "on_objects", where)),
            dict(doc.get("on_arrows", {})),
        )
        bad = f.violations()
    except FincatError as e:
        raise ValidationError(f"{where}: functor {name!r}: {e}", verdict=e.args)
    if bad:
        raise ValidationError(
            f"{where}: functor {name!r} breaks {bad[0].law}", verdict=tuple(bad)
        )
    return FunctorEntry(f, src, dst)


def _build_gluon(name: str, doc: Mapping, ws: Workspace, where: str) -> GluonEntry:
    site = resolve_site(ws, str(_require(doc, "site", where)))
    body = {k: v for k, v in doc.items() if k != "site"}
    try:
        g = gluon_from_json(body, site.base)
        v = validate_gluon(g)
    except FincatError as e:
        raise ValidationError(f"{where}: gluon {name!r}: {e}", verdict=e.args)
    if not v.ok:
        raise ValidationError(
            f"{where}: gluon {name!r} fails {v.failures[0][0]}", verdict=v
        )
    return GluonEntry(g, site)


def _build_sheaf(name: str, doc: Mapping, ws: Workspace, where: str) -> SheafEntry:
    site = resolve_site(ws, str(_require(doc, "site", where)))
    sections = {x: tuple(els) for x, els in _require(doc, "sections", where).items()}
    restrictions = {a: dict(m) for a, m in _require(doc, "restrictions", where).items()}
    try:
        p = Presheaf(site.base, sections, restrictions)
        bad = presheaf_violations(p)
    except FincatError as e:
        raise ValidationError(f"{where}: sheaf {name!r}: {e}", verdict=e.args)
    if bad:
        raise ValidationError(
            f"{where}: sheaf {name!r} breaks {bad[0][0]}", verdict=tuple(bad)
        )
    gaps = sheaf_condition_violations(p, site)
    if gaps:
        raise ValidationError(
            f"{where}: sheaf {name!r} fails the sheaf condition", verdict=tuple(gaps)
        )
    return SheafEntry(p, site)


def parse_workspace(paths: Sequence[str], bounds: Optional[Bounds] = None) -> Workspace:
    """Load and merge workspace files; any invalid value is fatal."""
    merged: dict[str, dict[str, tuple[dict, str]]] = {
        s: {} for s in _SECTIONS if s != "bounds"
    }
    base = default_bounds() if bounds is None else bounds
    bdict = {"bound": base.bound, "depth": base.depth, "shape": base.shape}
    for path in paths:
        doc = _load_file(str(path))
        for section, items in doc.items():
            if section == "bounds":
                bdict.update(items)
                continue
            for name, value in items.items():
                if name in merged[section]:
                    raise ParseError(f"{path}: duplicate {section[:-1]} {name!r}")
                merged[section][name] = (value, str(path))
    try:
        bound = None if bdict["bound"] is None else int(bdict["bound"])
        got = Bounds(bound, int(bdict["depth"]), int(bdict["shape"]))
    except (TypeError, ValueError):
        raise ParseError(f"bounds must be integers, got {bdict!r}")

    categories = {
        name: _build_category(name, doc, src)
        for name, (doc, src) in merged["categories"].items()
    }
    presites = {
        name: _build_presite(name, doc, categories, src)
        for name, (doc, src) in merged["presites"].items()
    }
    ws = Workspace(categories, presites, {}, {}, {}, got)
    functors = {
        name: _build_functor(name, doc, ws, src)
        for name, (doc, src) in merged["functors"].items()
    }
    gluons = {
        name: _build_gluon(name, doc, ws, src)
        for name, (doc, src) in merged["gluons"].items()
    }
    sheaves = {
        name: _build_sheaf(name, doc, ws, src)
        for name, (doc, src) in merged["sheaves"].items()
    }
    return Workspace(categories, presites, functors, gluons, sheaves, got)


# ----------------------------------------------------------------------
# command plumbing


@dataclass(frozen=True)
class Options:
    bound: Optional[int]
    depth: int
    seed: int
    fmt: str
    allow_proxy: bool

    def effective_bound(self, fallback: int) -> int:
        return fallback if self.bound is None else self.bound


def _verdict_passes(v: Verdict, allow_proxy: bool) -> bool:
    if v.status in ("pass", "inapplicable"):
        return True
    return allow_proxy and v.status == "proxy-pass"


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text", dest="fmt")
    p.add_argument("--allow-proxy", action="store_true")


def _candidate(ws: Workspace, name: str, args: argparse.Namespace, opts: Options) -> GlutosCandidate:
    if name == "fragment":
        fc = terminal_fragment().as_category()
        opens = frozenset(fc.arrows)
        tau = tau_from_opens(fc, opens, "universal")
        return make_candidate(
            carrier=fc, opens=opens, pretopology=tau, regime="bounded-U", bound=4
        )
    p = resolve_site(ws, name)
    return make_candidate(
        pretopology=p,
        regime=args.regime,
        g5=args.g5,
        bound=opts.effective_bound(DEFAULT_BOUND),
    )


def _explicit_pretopology(ws: Workspace, name: str) -> Pretopology:
    p = resolve_site(ws, name)
    if not isinstance(p, Pretopology):
        raise ValidationError(
            f"{name!r} is predicate-backed; operators need explicit coverings"
        )
    return p


# ----------------------------------------------------------------------
# subcommands


def _cmd_check(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    cand = _candidate(ws, args.target, args, opts)
    report["target"] = args.target
    report["suite"] = args.suite
    report["summary"] = [
        f"target: {args.target}",
        f"carrier objects: {len(cand.carrier.objects)}",
        f"regime: {cand.regime}",
    ]
    if args.suite == "glutos":
        return check_glutos_suite(cand)
    return check_nearly_glutos(cand)


def _cmd_nglu(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    cand = _candidate(ws, args.target, args, opts)
    report["target"] = args.target
    report["summary"] = [f"target: {args.target}", f"regime: {cand.regime}"]
    return check_nearly_glutos(cand)


def _cmd_complete_sub(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    p = resolve_site(ws, args.site)
    t = tsub_closure(
        p,
        bound=opts.effective_bound(DEFAULT_FRAGMENT_BOUND),
        depth=opts.depth,
        max_members=args.max_members,
    )
    members = {lab: t.ambient.member_of[lab] for lab in t.category.objects}
    rounds = max((pr.round for pr in t.state.proofs.values()), default=0)
    report["site"] = args.site
    report["objects"] = sorted(t.category.objects)
    report["members"] = dict(sorted(members.items()))
    report["distinct_members"] = len(set(members.values()))
    report["arrows"] = len(t.category.arrows)
    report["opens"] = sorted(t.opens)
    report["y_prime"] = {
        "injective_on_objects": len(set(t.y_prime.on_objects.values()))
        == len(t.y_prime.on_objects),
        "faithful": t.y_prime.is_faithful(),
        "full": t.y_prime.is_full(),
    }
    report["closure"] = closure_to_json(t.state)
    report["summary"] = [
        f"site: {args.site}",
        f"objects: {', '.join(sorted(t.category.objects))}",
        f"distinct members: {report['distinct_members']}",
        f"rounds: {rounds}",
    ]
    fix = Verdict(
        "fixpoint",
        "pass" if t.state.fixpoint else "fail",
        witness=(rounds,),
        bound=f"depth {opts.depth}",
    )
    return (fix, reflects_coverings_check(t.state))


def _colimit_verdict(rep) -> Verdict:
    checks = (
        ("eqrel", rep.eqrel.ok),
        ("pair-open", rep.pair_open),
        ("legs-clopen", rep.legs_clopen),
        ("effectivity", rep.effectivity == ()),
        ("universality", not any(n[0] == "universality-failed" for n in rep.universality)),
    )
    bad = tuple(tag for tag, ok in checks if not ok)
    return Verdict("gluing", "fail" if bad else "pass", witness=bad)


def _cmd_glue(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    if (args.gluon is None) == (args.pull_trials is None):
        raise UnknownCommand("glue needs exactly one of --gluon or --pull-trials")
    if args.pull_trials is not None:
        rng = random.Random(opts.seed)
        disagreements = []
        for i in range(args.pull_trials):
            inst = random_set_instance(rng)
            v = check_local_pullback(
                inst.f, inst.g, inst.p_x, inst.p_y, inst.xs, inst.ys, inst.zs
            )
            if not v.agrees:
                disagreements.append(i)
        report["trials"] = args.pull_trials
        report["disagreements"] = disagreements
        report["summary"] = [
            f"trials: {args.pull_trials}",
            f"seed: {opts.seed}",
            f"disagreements: {len(disagreements)}",
        ]
        status = "fail" if disagreements else "pass"
        return (
            Verdict(
                "local-pullback",
                status,
                witness=tuple(disagreements[:8]),
                bound=f"{args.pull_trials} trials, seed {opts.seed}",
            ),
        )
    if args.gluon not in ws.gluons:
        raise UnresolvedName(f"unknown gluon {args.gluon!r}")
    entry = ws.gluons[args.gluon]
    v = validate_m_gluon(entry.gluon) if args.m else validate_gluon(entry.gluon)
    tag = "m-gluon-laws" if args.m else "gluon-laws"
    verdicts = [Verdict(tag, "pass" if v.ok else "fail", witness=tuple(v.failures[:4]))]
    report["gluon"] = args.gluon
    report["summary"] = [f"gluon: {args.gluon}", f"pieces: {len(entry.gluon.shape.index)}"]
    if args.colimit:
        rep = gluon_colimit(entry.gluon, entry.site, regime=args.regime, strict=False)
        report["colimit"] = {
            "apex": rep.apex,
            "legs": dict(sorted(rep.legs.items())),
            "coequalizer": rep.coequalizer,
        }
        report["summary"].append(f"apex: {rep.apex}")
        verdicts.append(_colimit_verdict(rep))
    return tuple(verdicts)


def _cmd_atlas(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    if args.functor not in ws.functors:
        raise UnresolvedName(f"unknown functor {args.functor!r}")
    entry = ws.functors[args.functor]
    ctx = JContext(entry.source, entry.target, entry.functor)
    r = build_cj(
        ctx,
        regime=args.regime,
        pool_cap=args.pool_cap,
        candidate_bound=opts.effective_bound(DEFAULT_BOUND),
    )
    report["functor"] = args.functor
    report["cj"] = cj_to_json(r)
    report["summary"] = [
        f"functor: {args.functor}",
        f"objects: {len(r.category.objects)}",
        f"arrows: {len(r.category.arrows)}",
        f"notes: {len(r.notes)}",
    ]
    built = Verdict(
        "cj-construction",
        "pass",
        witness=(len(r.category.objects), len(r.category.arrows)),
    )
    return (built,) if r.th3 is None else (built, r.th3)


def _cmd_operators(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    if args.verify_rels == (args.op is not None):
        raise UnknownCommand("operators needs exactly one of --verify-rels or --op")
    p = _explicit_pretopology(ws, args.site)
    report["site"] = args.site
    if args.verify_rels:
        rels = operator_relations(p)
        report["relations"] = [{"label": lab, "holds": ok} for lab, ok in rels]
        report["summary"] = [f"site: {args.site}", f"identities: {len(rels)}"]
        return tuple(
            Verdict(lab, "pass" if ok else "fail") for lab, ok in rels
        )
    q = apply_operator(args.op, p)
    report["operator"] = args.op
    report["presite"] = presite_to_json(q)
    report["summary"] = [
        f"site: {args.site}",
        f"operator: {args.op}",
        f"fixed: {q == p}",
    ]
    return (Verdict(f"operator-{args.op}", "pass", witness=(("fixed", q == p),)),)


def _cmd_report(ws: Workspace, args, opts: Options, report: dict) -> tuple[Verdict, ...]:
    report["bounds"] = {
        "bound": ws.bounds.bound,
        "depth": ws.bounds.depth,
        "shape": ws.bounds.shape,
    }
    report["builtin_sites"] = sorted(BUILTIN_SITES)
    report["summary"] = []
    verdicts = []
    kinds = (
        ("categories", "category"),
        ("presites", "presite"),
        ("functors", "functor"),
        ("gluons", "gluon"),
        ("sheaves", "sheaf"),
    )
    for kind, singular in kinds:
        names = sorted(getattr(ws, kind))
        report[kind] = names
        report["summary"].append(f"{kind}: {', '.join(names) if names else '(none)'}")
        verdicts.extend(Verdict(f"{singular}:{n}", "pass") for n in names)
    return tuple(verdicts)


_Runner = Callable[[Workspace, argparse.Namespace, Options, dict], tuple[Verdict, ...]]


class _Parser(argparse.ArgumentParser):
    """argparse funnels every parse failure through error(); raise
    instead of printing usage and exiting."""

    def error(self, message: str):
        raise UnknownCommand(f"{self.prog}: {message}")


def _parser(name: str) -> argparse.ArgumentParser:
    p = _Parser(prog=name, add_help=False)
    _common_flags(p)
    if name == "check":
        p.add_argument("--suite", choices=("glutos", "nearly"), required=True)
        p.add_argument("--target", required=True)
        p.add_argument("--regime", choices=("elementary", "bounded-U"), default="elementary")
        p.add_argument("--g5", choices=("weak", "strong"), default="strong")
    elif name == "nglu":
        p.add_argument("--target", required=True)
        p.add_argument("--regime", choices=("elementary", "bounded-U"), default="elementary")
        p.add_argument("--g5", choices=("weak", "strong"), default="strong")
    elif name == "complete-sub":
        p.add_argument("--site", required=True)
        p.add_argument("--max-members", type=int, default=24)
    elif name == "glue":
        p.add_argument("--gluon", default=None)
        p.add_argument("--m", action="store_true")
        p.add_argument("--colimit", action="store_true")
        p.add_argument("--regime", choices=("strong", "weak"), default="strong")
        p.add_argument("--pull-trials", type=int, default=None)
    elif name == "atlas":
        p.add_argument("--functor", required=True)
        p.add_argument("--regime", choices=("elementary", "bounded-U"), default="elementary")
        p.add_argument("--pool-cap", type=int, default=12)
    elif name == "operators":
        p.add_argument("--site", required=True)
        p.add_argument("--verify-rels", action="store_true")
        p.add_argument("--op", choices=("M", "L", "SG"), default=None)
    return p


_COMMANDS: dict[str, _Runner] = {
    "check": _cmd_check,
    "complete-sub": _cmd_complete_sub,
    "glue": _cmd_glue,
    "atlas": _cmd_atlas,
    "operators": _cmd_operators,
    "nglu": _cmd_nglu,
    "report": _cmd_report,
}


def run_command(ws: Workspace, cmd: Sequence[str]) -> tuple[dict, int]:
    """Dispatch one subcommand; returns the report and the exit status."""
    cmd = list(cmd)
    if not cmd:
        raise UnknownCommand(f"no command given; expected one of {sorted(_COMMANDS)}")
    name, rest = cmd[0], cmd[1:]
    if name not in _COMMANDS:
        raise UnknownCommand(f"unknown command {name!r}; expected one of {sorted(_COMMANDS)}")
    args = _parser(name).parse_args(rest)
    opts = Options(
        bound=ws.bounds.bound if args.bound is None else args.bound,
        depth=ws.bounds.depth if args.depth is None else args.depth,
        seed=args.seed,
        fmt=args.fmt,
        allow_proxy=args.allow_proxy,
    )
    report: dict = {
        "schema": SCHEMA,
        "command": name,
        "options": {
            "bound": opts.bound,
            "depth": opts.depth,
            "seed": opts.seed,
            "format": opts.fmt,
            "allow_proxy": opts.allow_proxy,
        },
    }
    verdicts = _COMMANDS[name](ws, args, opts, report)
    report["verdicts"] = verdicts_to_json(verdicts)
    ok = all(_verdict_passes(v, opts.allow_proxy) for v in verdicts)
    report["result"] = "pass" if ok else "fail"
    return report, 0 if ok else 1


def render_report(report: Mapping) -> str:
    if report["options"]["format"] == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines = [f"{report['schema']}  command: {report['command']}"]
    lines.extend(report.get("summary", ()))
    for v in report["verdicts"]:
        lines.append(f"verdict {v['axiom']}: {v['status']}")
        if v["status"] == "fail" and v["witness"]:
            lines.append(f"  witness: {json.dumps(v['witness'], sort_keys=True)}")
    lines.append(f"result: {report['result']}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# entry point


def _split_workspace_args(argv: Sequence[str]) -> tuple[list[str], list[str]]:
    paths: list[str] = []
    rest: list[str] = []
    it = iter(argv)
    for a in it:
        if a in ("-w", "--workspace"):
            try:
                paths.append(next(it))
            except StopIteration:
                raise UnknownCommand(f"{a} needs a file path")
        elif a.startswith("--workspace="):
            paths.append(a.split("=", 1)[1])
        else:
            rest.append(a)
    return paths, rest


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        paths, rest = _split_workspace_args(argv)
        ws = parse_workspace(paths)
        report, code = run_command(ws, rest)
    except (CliError, FincatError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(render_report(report))
    return code


if __name__ == "__main__":
    sys.exit(main())

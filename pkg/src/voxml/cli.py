"""Command-line surface: validate, lint, lookup, stats, eval, simulate, mes.

Exit codes: 0 success; 1 validation or lint errors present; 2 parse error;
3 grounding or simulation failure; 4 bad invocation.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from . import io
from .interpreter import (
    GroundingError,
    Outcome,
    SimParams,
    SimulationError,
    ground,
    run,
)
from .model import VoxemeKind, validate
from .spatial import Tolerances, minimal_embedding_space
from .terms import TermSyntaxError, format_vector, print_term
from .voxicon import lint as lint_voxicon
from .voxicon import stats as voxicon_stats

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_PARSE = 2
EXIT_RUNTIME = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad invocation is exit 4, not argparse's 2
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _default_data(name: str) -> str:
    return str(resources.files("voxml").joinpath("data", name))


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror or e}") from e


def _load_voxicon(path: str):
    return io.parse_voxicon(_read(path))


def _load_scene(path: str):
    return io.parse_scene(_read(path)).to_state()


def _tolerances(args) -> Tolerances:
    return Tolerances(
        contact_eps=args.eps,
        align_tol_deg=args.align_tol,
        dim_ratio=args.ratio,
    )


def _add_tolerance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=Tolerances.contact_eps,
                   help="contact tolerance in world units (default %(default)s)")
    p.add_argument("--align-tol", type=float, default=Tolerances.align_tol_deg,
                   help="alignment tolerance in degrees (default %(default)s)")
    p.add_argument("--ratio", type=float, default=Tolerances.dim_ratio,
                   help="dimensional-dominance ratio (default %(default)s)")


def _add_inputs(p: argparse.ArgumentParser, scene: bool = True) -> None:
    p.add_argument("--voxicon", default=_default_data("voxicon.vox"),
                   help="voxicon file (default: bundled voxicon)")
    if scene:
        p.add_argument("--scene", default=_default_data("scene.scene"),
                       help="scene file (default: bundled scene)")


def cmd_validate(args) -> int:
    try:
        voxicon = _load_voxicon(args.file)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    any_errors = False
    for voxeme in voxicon:
        report = validate(voxeme)
        status = "ok" if report.ok else f"{len(report.errors)} error(s)"
        if report.warnings:
            status += f", {len(report.warnings)} warning(s)"
        print(f"{voxeme.kind.value} {voxeme.lex.pred}: {status}")
        for issue in report.issues:
            print(f"  {issue}")
        any_errors = any_errors or not report.ok
    return EXIT_FINDINGS if any_errors else EXIT_OK


def cmd_lint(args) -> int:
    try:
        voxicon = _load_voxicon(args.voxicon)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    diags = lint_voxicon(voxicon)
    for d in diags:
        print(d)
    if not diags:
        print("clean: no diagnostics")
    return EXIT_FINDINGS if any(d.severity == "error" for d in diags) else EXIT_OK


def cmd_lookup(args) -> int:
    try:
        voxicon = _load_voxicon(args.voxicon)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.kind:
        voxeme = voxicon.lookup(args.pred, VoxemeKind(args.kind))
        matches = [voxeme] if voxeme is not None else []
    else:
        matches = voxicon.lookup_any(args.pred)
    if not matches:
        kind = f" ({args.kind})" if args.kind else ""
        print(f"not found: {args.pred}{kind}", file=sys.stderr)
        return EXIT_FINDINGS
    sys.stdout.write("\n".join(io.serialize_voxeme(v) for v in matches))
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        voxicon = _load_voxicon(args.voxicon)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    counts = voxicon_stats(voxicon)
    print(f"entries = {len(voxicon)}")
    for group in ("kind", "head", "program_head", "scale"):
        for name in sorted(counts[group]):
            print(f"{group} {name} = {counts[group][name]}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        lf = io.parse_logical_form(args.lf)
    except TermSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        voxicon = _load_voxicon(args.voxicon)
        scene = _load_scene(args.scene)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        grounding = ground(lf, voxicon, scene, _tolerances(args))
    except GroundingError as e:
        print(f"grounding error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(print_term(grounding.term))
    for i, entry in enumerate(grounding.log, start=1):
        print(f"  {i}. {entry}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        lf = io.parse_logical_form(args.lf)
    except TermSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        voxicon = _load_voxicon(args.voxicon)
        scene = _load_scene(args.scene)
    except (io.VoxmlSyntaxError, io.VoxiconLoadError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    params = SimParams(
        speed=args.speed,
        max_ticks=args.max_ticks,
        at_eps=args.at_eps,
        tolerances=_tolerances(args),
    )
    try:
        trace = run(lf, voxicon, scene, params)
    except SimulationError as e:
        print(f"simulation error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    text = io.serialize_trace(trace)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        summary_stream = sys.stdout
    else:
        sys.stdout.write(text)
        summary_stream = sys.stderr
    facts = ", ".join(sorted(print_term(f) for f in trace.final.facts)) or "-"
    print(f"outcome: {trace.outcome.value}", file=summary_stream)
    print(f"ticks: {trace.final.tick}", file=summary_stream)
    print(f"transitions: {len(trace.transitions)}", file=summary_stream)
    print(f"facts: {facts}", file=summary_stream)
    return EXIT_OK if trace.outcome is Outcome.COMPLETED else EXIT_RUNTIME


def cmd_mes(args) -> int:
    try:
        scene = _load_scene(args.scene)
    except io.VoxmlSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if not scene.objects:
        print("empty scene: minimal embedding space is undefined", file=sys.stderr)
        return EXIT_RUNTIME
    box = minimal_embedding_space(scene.objects.values(), args.margin)
    print(f"mes = {format_vector(box.lo.as_tuple())} .. {format_vector(box.hi.as_tuple())}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="voxml", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", help="validate voxeme entries in a file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lint", help="cross-entry diagnostics over a voxicon")
    _add_inputs(p, scene=False)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("lookup", help="print a voxeme by predicate")
    p.add_argument("pred")
    p.add_argument("--kind", choices=[k.value for k in VoxemeKind], default=None)
    _add_inputs(p, scene=False)
    p.set_defaults(func=cmd_lookup)

    p = sub.add_parser("stats", help="voxicon counts by kind, head, and scale")
    _add_inputs(p, scene=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="ground a logical form against the scene")
    p.add_argument("lf")
    _add_inputs(p)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="run a logical form as a simulation")
    p.add_argument("lf")
    _add_inputs(p)
    _add_tolerance_flags(p)
    p.add_argument("--speed", type=float, default=SimParams.speed,
                   help="move speed in world units per tick (default %(default)s)")
    p.add_argument("--max-ticks", type=int, default=SimParams.max_ticks,
                   help="tick budget (default %(default)s)")
    p.add_argument("--at-eps", type=float, default=SimParams.at_eps,
                   help="arrival tolerance for at() (default %(default)s)")
    p.add_argument("--out", default=None, help="write the trace to a file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mes", help="minimal embedding space of a scene")
    p.add_argument("--scene", default=_default_data("scene.scene"),
                   help="scene file (default: bundled scene)")
    p.add_argument("--margin", type=float, default=0.0,
                   help="inflate the box on all sides (default %(default)s)")
    p.set_defaults(func=cmd_mes)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

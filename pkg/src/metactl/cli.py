"""Command-line interface.

Exit codes: 0 success, 1 validation/scenario failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys

from . import archmodel, harness, reasoner
from .mapek import Diagnostic, MapeLoop
from .tomasys import kb_init


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2 already,
        self.print_usage(sys.stderr)    # but make the synopsis explicit
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metactl",
                     description="Metacontrol experiment toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an .archmodel file")
    p.add_argument("file")

    p = sub.add_parser("generate-nav-model",
                       help="emit the 27-design navigation model")
    p.add_argument("--out", default=None, help="write to file instead of "
                   "stdout")

    p = sub.add_parser("mission", help="run a single mission")
    p.add_argument("--config", default="C4",
                   choices=sorted(harness.INITIAL_CONFIGS))
    p.add_argument("--clutter", default="none",
                   choices=harness.CLUTTER_LEVELS)
    p.add_argument("--power", type=float, default=0.0,
                   help="power increase in percent (e.g. 50)")
    p.add_argument("--mode", default="mros", choices=("base", "mros"))
    p.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
    p.add_argument("--trajectory", default=None,
                   help="write the trajectory CSV to this path")

    p = sub.add_parser("matrix", help="run the full experiment matrix")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out", default="runs.csv")

    p = sub.add_parser("summarize", help="aggregate a matrix CSV")
    p.add_argument("csv")
    p.add_argument("--out-dir", default=None,
                   help="also write per-figure CSV files here")

    sub.add_parser("pyramid", help="run the manipulator failure scenarios")

    p = sub.add_parser("reason", help="run inference over a KB snapshot "
                       "(diagnostics JSONL) and print the report")
    p.add_argument("snapshot")
    p.add_argument("--model", default=None,
                   help=".archmodel file (default: generated nav model)")
    p.add_argument("--grounding", action="append", default=[],
                   metavar="OBJECTIVE=DESIGN",
                   help="initial grounding (repeatable)")

    return parser


def _cmd_validate(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        model = archmodel.parse_model(source)
    except archmodel.ModelError as exc:
        for diag in exc.diagnostics:
            print(diag)
        return 1
    warnings = [d for d in archmodel.validate(model)
                if d.severity == "warning"]
    for diag in warnings:
        print(diag)
    print(f"{args.file}: ok ({len(model.designs)} designs, "
          f"{len(model.objectives)} objectives)")
    return 0


def _cmd_generate_nav_model(args) -> int:
    text = archmodel.print_model(archmodel.generate_nav_model())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_mission(args) -> int:
    case = harness.TestCase(
        args.config,
        harness.ContingencySpec(args.clutter, args.power / 100.0),
        args.mode, args.seed)
    metrics, logs = harness.run_mission(case)
    if args.trajectory:
        with open(args.trajectory, "w", encoding="utf-8") as fh:
            fh.write("t,x,y,v,safety,energy,design\n")
            for s in logs.trajectory:
                fh.write(f"{s.t:.3f},{s.x:.4f},{s.y:.4f},{s.v:.4f},"
                         f"{s.safety:.4f},{s.energy:.4f},{s.design}\n")
    for command in logs.commands:
        print(command.to_json())
    print(f"outcome={metrics.outcome} mission_time={metrics.mission_time:.2f}"
          f" t_safety_viol={metrics.time_safety_violation:.2f}"
          f" t_energy_viol={metrics.time_energy_violation:.2f}"
          f" reconfig_count={metrics.reconfig_count}")
    return 0 if metrics.outcome == "complete" else 1


def _cmd_matrix(args) -> int:
    spec = harness.MatrixSpec(seeds_per_cell=args.seeds)

    def progress(row_id, metrics):
        print(" ".join(row_id), metrics.outcome,
              f"{metrics.mission_time:.1f}s", flush=True)

    written = harness.run_matrix(spec, args.out, progress=progress)
    print(f"{written} new rows -> {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    try:
        text, _ = harness.summarize(args.csv, out_dir=args.out_dir)
    except harness.MalformedCsvError as exc:
        print(f"malformed csv: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return 0


def _cmd_pyramid(args) -> int:
    results = harness.run_pyramid_scenarios()
    failed = False
    for result in results:
        status = "pass" if result.passed else "FAIL"
        print(f"{status} {result.name}: {result.detail}")
        for command in result.commands:
            print(f"  {command.to_json()}")
        failed = failed or not result.passed
    return 1 if failed else 0


def _cmd_reason(args) -> int:
    if args.model:
        with open(args.model, encoding="utf-8") as fh:
            model = archmodel.parse_model(fh.read())
    else:
        model = archmodel.generate_nav_model()
    groundings = {}
    for item in args.grounding:
        objective, _, design = item.partition("=")
        if not design:
            print(f"bad --grounding {item!r} (want OBJECTIVE=DESIGN)",
                  file=sys.stderr)
            return 2
        groundings[objective] = design
    kb = kb_init(model, groundings)
    loop = MapeLoop(kb, lambda name: True)
    with open(args.snapshot, encoding="utf-8") as fh:
        batch = [Diagnostic.from_json(line) for line in fh
                 if line.strip()]
    loop.ingest(batch)
    report = reasoner.infer(kb)
    print(f"iterations={report.iterations} "
          f"derived={len(report.derived)} facts")
    trace = report.trace()
    if trace:
        print(trace)
    for objective in model.objectives:
        print(f"objective {objective.id}: "
              f"{reasoner.objective_status(kb, objective.id)}")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "generate-nav-model": _cmd_generate_nav_model,
    "mission": _cmd_mission,
    "matrix": _cmd_matrix,
    "summarize": _cmd_summarize,
    "pyramid": _cmd_pyramid,
    "reason": _cmd_reason,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

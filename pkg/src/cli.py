import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from data.casas import DatasetParseError, builtin_scripts, compile_script, parse_dataset, parse_run_text, scenario, write_run
from src.config import Settings, configure_logging, get_settings
from src.network import NetworkDefinitionError
from src.recognition_metrics import export
from src.recognition_metrics.export import ExportError
from src.replay import VirtualClock, WallClock, build_pipeline, build_plan, run_replay
from src.rules import ModelError, load_model

logger = logging.getLogger("fluentnet.cli")


def _replay_and_export(runs, settings: Settings, args) -> int:
    plan = build_plan(runs, gap=settings.gap_ms, seed=settings.seed, speed=settings.speed, shuffle=not args.keep_order)
    pipeline = build_pipeline(
        settings.network, poll_hz=settings.poll_hz, complexity_bound=settings.complexity_bound, idle_ms=settings.idle_ms
    )
    clock = VirtualClock(settings.speed) if args.virtual else WallClock(settings.speed)
    logger.info(f"Replaying {len(plan.runs)} run(s) over {plan.duration / 1000:.0f}s of timeline at speed {settings.speed}")
    report = asyncio.run(run_replay(plan, pipeline, clock, settings.buffer))
    totals = {**report.totals(), "runs": len(plan.runs), "speed": settings.speed, "seed": settings.seed}
    export(
        settings.results_dir,
        report.records,
        report.samples,
        plan.label_windows(),
        settings.grace_ms,
        node=args.node,
        totals=totals,
        plots=args.plots,
    )
    print(f"{len(report.records)} recognition(s), {report.dropped} dropped event(s); results in {settings.results_dir}")
    return 0


def cmd_replay(args) -> int:
    settings = _settings(args)
    if args.dataset:
        runs = parse_dataset(args.dataset, args.variant, args.pattern)
    else:
        runs = scenario(args.scenario)
    return _replay_and_export(runs, settings, args)


def cmd_synth(args) -> int:
    script = Path(args.script)
    if not script.exists():
        scripts = builtin_scripts()
        if args.script not in scripts:
            raise DatasetParseError(f"no script file '{args.script}', bundled: {sorted(scripts)}")
        script = scripts[args.script]
    text = compile_script(script.read_text(encoding="utf-8"), source=str(script))
    written = write_run(text, args.compile_only)
    if written is not None:
        print(f"Compiled {script} to {written}")
        return 0
    run = parse_run_text(text, script.stem, str(script))
    args.keep_order = True
    return _replay_and_export([run], _settings(args), args)


def cmd_validate_models(args) -> int:
    files = sorted(Path(args.directory).glob("*.fluent"))
    if not files:
        print(f"No .fluent files in {args.directory}", file=sys.stderr)
        return 1
    failed = 0
    for path in files:
        try:
            model = load_model(path)
            print(f"{path.name}: ok ({model.final_name}, {len(model.rules)} rule(s))")
        except (OSError, ModelError) as e:
            failed += 1
            print(f"{path.name}: {e}", file=sys.stderr)
    return 1 if failed else 0


def cmd_calibrate(args) -> int:
    from src.calibrate import calibrate, write_calibration

    settings = _settings(args)
    runs = parse_dataset(args.dataset, args.variant, args.pattern) if args.dataset else scenario(args.scenario)
    df = calibrate(
        runs,
        settings.network,
        activities=args.activity or None,
        points=args.points,
        span=args.span,
        gap_ms=settings.gap_ms,
        grace_ms=settings.grace_ms,
        seed=settings.seed,
        idle_ms=settings.idle_ms,
    )
    path = write_calibration(df, settings.results_dir)
    print(f"Calibration of {df['threshold'].nunique()} threshold(s) written to {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from src.services.fluentnet_api import app

    app.state.results_dir = _settings(args).results_dir
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _settings(args) -> Settings:
    return get_settings(
        poll_hz=getattr(args, "poll_hz", None),
        gap_ms=getattr(args, "gap", None),
        idle_ms=getattr(args, "idle", None),
        speed=getattr(args, "speed", None),
        seed=getattr(args, "seed", None),
        buffer=getattr(args, "buffer", None),
        grace_ms=getattr(args, "grace", None),
        network=getattr(args, "network", None),
        results_dir=getattr(args, "out", None),
        log_level=getattr(args, "log_level", None),
    )


def _replay_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--speed", type=float, help="replay speed factor (default FLUENTNET_SPEED or 1)")
    parser.add_argument("--gap", help="gap between concatenated runs, e.g. 3min")
    parser.add_argument("--idle", help="input silence after which model nodes are emptied, e.g. 2min")
    parser.add_argument("--seed", type=int, help="seed of the run order shuffle")
    parser.add_argument("--buffer", type=int, help="replay queue capacity in events")
    parser.add_argument("--poll-hz", dest="poll_hz", type=int, help="condition polling frequency")
    parser.add_argument("--network", help="network definition file")
    parser.add_argument("--out", help="results directory")
    parser.add_argument("--grace", help="how long after a label window a recognition still matches it, e.g. 60s")
    parser.add_argument("--node", help="restrict eval_trace.csv to one node, e.g. O0")
    parser.add_argument("--plots", action="store_true", help="render trace.png and scatter.png (needs matplotlib)")
    parser.add_argument("--virtual", action="store_true", help="do not sleep; report the wall time the replay would take")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluentnet", description="Fluent statement networks for activity recognition")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    replay = sub.add_parser("replay", help="replay CASAS runs through the network and export metrics")
    replay.add_argument("--dataset", help="run file or directory of run files (default: bundled scenario)")
    replay.add_argument("--variant", choices=["interwoven", "sequential"], default="interwoven")
    replay.add_argument("--pattern", help="glob selecting run files, overrides --variant")
    replay.add_argument("--scenario", default="interwoven", help="bundled scenario used without --dataset")
    replay.add_argument("--keep-order", dest="keep_order", action="store_true", help="do not shuffle the runs")
    _replay_options(replay)
    replay.set_defaults(func=cmd_replay)

    synth = sub.add_parser("synth", help="compile a synthetic script and replay it")
    synth.add_argument("--script", required=True, help="script file or bundled script name, e.g. a1_medication")
    synth.add_argument("--compile-only", dest="compile_only", metavar="FILE", help="write the CASAS run file and stop")
    _replay_options(synth)
    synth.set_defaults(func=cmd_synth)

    validate = sub.add_parser("validate-models", help="parse every .fluent model of a directory")
    validate.add_argument("directory")
    validate.set_defaults(func=cmd_validate_models)

    calibrate = sub.add_parser("calibrate", help="sweep model thresholds against labelled runs")
    calibrate.add_argument("--dataset", help="run file or directory (default: bundled scenario)")
    calibrate.add_argument("--variant", choices=["interwoven", "sequential"], default="interwoven")
    calibrate.add_argument("--pattern")
    calibrate.add_argument("--scenario", default="interwoven")
    calibrate.add_argument("--activity", type=int, action="append", help="activity index to sweep (repeatable)")
    calibrate.add_argument("--points", type=int, default=7, help="grid points per threshold")
    calibrate.add_argument("--span", type=float, default=4.0, help="grid spans default/span .. default*span")
    calibrate.add_argument("--gap")
    calibrate.add_argument("--idle")
    calibrate.add_argument("--seed", type=int)
    calibrate.add_argument("--grace")
    calibrate.add_argument("--network")
    calibrate.add_argument("--out")
    calibrate.set_defaults(func=cmd_calibrate)

    serve = sub.add_parser("serve", help="serve an export directory over HTTP")
    serve.add_argument("--out", help="results directory to serve")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configure_logging(_settings(args).log_level)
        return args.func(args)
    except (DatasetParseError, NetworkDefinitionError, ModelError, ExportError, ValueError) as e:
        logger.error(str(e))
        print(f"fluentnet: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: train-gp, run, serve, replay."""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, gpr, sim, simlog
from .config import bundle_to_dict, load_scenario
from .errors import HandoverError

log = logging.getLogger("handover_mpc")


def _setup_logging():
    level = os.environ.get("HANDOVER_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(message)s")


def _load(args):
    bundle = load_scenario(args.scenario)
    if args.seed is not None:
        import dataclasses

        bundle = dataclasses.replace(
            bundle, scenario=dataclasses.replace(bundle.scenario, seed=args.seed)
        )
    return bundle


def _train(bundle, out_dir):
    X, goals = sim.generate_training_data(bundle.scenario.training, bundle.scenario.seed)
    models = gpr.fit_axis_models(X, goals, bundle.gp)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "gp_dataset.csv"
    gpr.write_training_csv(csv_path, X, goals)
    info = {
        "n_samples": int(X.shape[0]),
        "dataset": csv_path.name,
        "seed": bundle.scenario.seed,
        "hyperparameters": bundle_to_dict(bundle)["gp"],
        "log_marginal_likelihood": [gpr.log_marginal_likelihood(m) for m in models],
    }
    (out / "gp_model.json").write_text(json.dumps(info, indent=2), encoding="utf-8")
    return models, csv_path


def cmd_train_gp(args):
    bundle = _load(args)
    models, csv_path = _train(bundle, args.out)
    log.info("wrote %s (%d rows) and gp_model.json", csv_path, len(models[0].data.y))
    return 0


def cmd_run(args):
    bundle = _load(args)
    out = Path(args.out)
    csv_path = out / "gp_dataset.csv"
    if csv_path.exists():
        X, goals = gpr.read_training_csv(csv_path)
        models = gpr.fit_axis_models(X, goals, bundle.gp)
        log.info("reusing training data from %s", csv_path)
    else:
        models, _ = _train(bundle, out)
    run_log = sim.run_closed_loop(bundle, models)
    path = simlog.write_log(run_log, out, deterministic=not args.wall_times)
    status = "grasp" if run_log.grasped else "timeout"
    log.info(
        "%s: %s after %d steps (t=%.1f s); log at %s",
        bundle.scenario.name,
        status,
        len(run_log.rows) - 1,
        run_log.rows[-1].t,
        path,
    )
    return 0 if run_log.grasped else 2


def cmd_serve(args):
    from . import bridge

    bundle = _load(args)
    bridge.serve_session(args.port, bundle)
    return 0


def cmd_replay(args):
    from . import bridge

    csv_path = Path(args.out) / "log.csv"
    if not csv_path.exists():
        log.error("no log.csv under %s; run a scenario first", args.out)
        return 2
    bridge.serve_replay(args.port, csv_path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="handover-mpc", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--scenario", default="nominal", help="scenario file or bundled name")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        if needs_out:
            p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("train-gp", help="generate training data and fit the predictor")
    common(p)
    p.set_defaults(func=cmd_train_gp)

    p = sub.add_parser("run", help="run a scenario closed-loop and write the log")
    common(p)
    p.add_argument(
        "--wall-times",
        action="store_true",
        help="put measured solve times in the CSV (breaks byte-reproducibility)",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="interactive planner session over WebSocket")
    common(p, needs_out=False)
    p.add_argument("--port", type=int, default=8732)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="stream a recorded log to the UI")
    common(p)
    p.add_argument("--port", type=int, default=8732)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HandoverError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

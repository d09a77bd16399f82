"""Command-line interface: scene generation, trials, batches, the gateway
server and audit replay."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import SwarmSarError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="swarmsar")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scene", help="generate a scene and print its JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--obstacles", type=int, default=None)
    p.add_argument("--survivors", type=int, default=None)
    p.add_argument("--wind-zones", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("run-trial", help="run one mission")
    _trial_args(p)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("run-batch", help="run a batch of missions across seeds")
    _trial_args(p)
    p.add_argument("--seeds", default="0-9", help="e.g. 0-49 or 1,2,3")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON config file (overrides flags)")

    p = sub.add_parser("serve", help="serve the operator gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--pace", type=float, default=4.0,
                   help="sim seconds per wall second (0 = unlimited)")

    p = sub.add_parser("replay", help="re-run a trial from its audit log")
    p.add_argument("audit", help="path to a trial audit JSON")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except SwarmSarError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def _trial_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="Full",
                   choices=["Manual", "LlmDirect", "NoFeedback", "Full"])
    p.add_argument("--reasoner", default="Rule", choices=["Rule", "Remote"])
    p.add_argument("--policy", default="wind_aware",
                   choices=["auto_approve", "wind_aware"])
    p.add_argument("--wind-zones", type=int, default=None)
    p.add_argument("--obstacles", type=int, default=None)
    p.add_argument("--survivors", type=int, default=None)
    p.add_argument("--utterance", default=None)
    p.add_argument("--program", default=None, help="program file for Manual")
    p.add_argument("--output", default=None, help="results JSON-lines path")
    p.add_argument("--audit-dir", default=None)
    p.add_argument("--trajectory-log", default=None,
                   help="per-tick JSON-lines log (single trial)")


def _config_from_args(args, seeds) -> "TrialConfig":
    from .orchestrator.config import trial_config_from_dict

    return trial_config_from_dict(
        {
            "seeds": seeds,
            "method": args.method,
            "reasoner": args.reasoner,
            "policy": args.policy,
            "wind_zone_count": args.wind_zones,
            "obstacle_count": args.obstacles,
            "survivor_count": args.survivors,
            "utterance": args.utterance,
            "program_file": args.program,
            "output": args.output,
            "audit_dir": args.audit_dir,
            "trajectory_log": getattr(args, "trajectory_log", None),
            "workers": getattr(args, "workers", 1),
        }
    )


def _parse_seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part and not part.startswith("-"):
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _dispatch(args) -> int:
    if args.command == "gen-scene":
        from .scene import generate_scene, scene_to_json

        scene = generate_scene(
            args.seed,
            obstacle_count=args.obstacles,
            survivor_count=args.survivors,
            wind_zone_count=args.wind_zones,
        )
        text = scene_to_json(scene)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(text)
            print(f"wrote {args.out}")
        else:
            print(text, end="")
        return 0

    if args.command == "run-trial":
        from .orchestrator.batch import run_trial

        config = _config_from_args(args, [args.seed])
        result = run_trial(args.seed, config)
        print(json.dumps(result.to_dict(), indent=2))
        return 0 if result.success else 1

    if args.command == "run-batch":
        from .orchestrator.batch import render_table, run_batch
        from .orchestrator.config import load_trial_config

        if args.config:
            config = load_trial_config(args.config)
        else:
            config = _config_from_args(args, _parse_seeds(args.seeds))
        results, agg = run_batch(config)
        print(render_table(agg))
        if config.output:
            print(f"\nresults written to {config.output}")
        return 0

    if args.command == "serve":
        from .orchestrator.gateway import serve_gateway

        print(f"gateway on http://{args.host}:{args.port} (pace {args.pace}x)")
        serve_gateway(host=args.host, port=args.port, pace=args.pace)
        return 0

    if args.command == "replay":
        from .orchestrator.batch import replay_trial

        original, replayed, match = replay_trial(args.audit)
        print(json.dumps({
            "original": original.to_dict(),
            "replayed": replayed.to_dict(),
            "match": match,
        }, indent=2))
        return 0 if match else 1

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())

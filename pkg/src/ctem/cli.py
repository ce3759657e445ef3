"""Command-line entry points: the deterministic simulator and the service."""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

from .engine import Engine, EngineConfig, write_trajectory
from .errors import ConfigError, CtemError
from .simulate import ScriptRunner, UserScript, format_summary, summarize_records


def _build_config(args: argparse.Namespace) -> EngineConfig:
    if args.config:
        config = EngineConfig.load(args.config)
    else:
        config = EngineConfig()
    if args.persona:
        config.persona_path = args.persona
    if args.pool:
        config.pool_path = args.pool
    if args.seed is not None:
        config.rng_seed = args.seed
    config.check_paths()
    return config


def _run_one(config: EngineConfig, args: argparse.Namespace, out_path: Path) -> str:
    engine = Engine(config)
    script = UserScript.load(args.user_script) if args.user_script else UserScript()
    runner = ScriptRunner(engine, script)
    records = runner.run_days(args.days)
    write_trajectory(records, out_path)
    if args.snapshot_out:
        engine.save_snapshot(args.snapshot_out)
    return format_summary(summarize_records([json.loads(r.to_json()) for r in records]))


def sim_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ctem-sim", description="Run a deterministic agent simulation."
    )
    parser.add_argument("--days", type=float, required=True, help="simulated days to run")
    parser.add_argument("--persona", help="persona JSON file")
    parser.add_argument("--pool", help="behavior pool JSON file")
    parser.add_argument("--seed", type=int, help="64-bit RNG seed")
    parser.add_argument("--user-script", help="scripted user events JSON file")
    parser.add_argument("--config", help="engine config file (JSON or TOML)")
    parser.add_argument("--out", required=True, help="trajectory JSONL output path")
    parser.add_argument("--snapshot-out", help="write a terminal snapshot here")
    parser.add_argument("--summary", action="store_true", help="print summary statistics")
    parser.add_argument(
        "--parallel", type=int, default=1, help="run this many consecutive seeds concurrently"
    )
    args = parser.parse_args(argv)

    try:
        config = _build_config(args)
        if args.user_script and not Path(args.user_script).exists():
            raise ConfigError(
                f"user script does not exist: {args.user_script}", path=args.user_script
            )

        if args.parallel <= 1:
            summary = _run_one(config, args, Path(args.out))
            if args.summary:
                print(summary)
        else:
            jobs = []
            with concurrent.futures.ThreadPoolExecutor(max_workers=args.parallel) as pool:
                for i in range(args.parallel):
                    cfg = EngineConfig.from_dict(
                        {**config.to_dict(), "rng_seed": config.rng_seed + i}
                    )
                    out = Path(args.out).with_suffix(f".seed{cfg.rng_seed}.jsonl")
                    jobs.append((cfg.rng_seed, pool.submit(_run_one, cfg, args, out)))
            for seed, job in jobs:
                summary = job.result()
                if args.summary:
                    print(f"--- seed {seed} ---")
                    print(summary)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CtemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def serve_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="ctem-serve", description="Run the live chat service.")
    parser.add_argument("--config", help="engine config file (JSON or TOML)")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--data-dir", help="session snapshot directory")
    args = parser.parse_args(argv)

    try:
        config = EngineConfig.load(args.config) if args.config else EngineConfig()
        if args.data_dir:
            config.data_dir = args.data_dir
        config.check_paths()
    except (ConfigError, CtemError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    import uvicorn

    from .service import create_app

    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(sim_main())

"""Command-line entry points: simulate, serve, analyze, replay."""

from __future__ import annotations

import argparse
import glob as globmod
import json
import sys
import time
from pathlib import Path

from . import logio, metrics
from .config import default_config_path, load_session_config
from .operators import NATURAL_MODE, PolicyKind, run_trial
from .control import Mode, ModeConfig


def _policy_kind(name: str) -> PolicyKind:
    for kind in PolicyKind:
        if kind.value == name:
            return kind
    raise argparse.ArgumentTypeError(f"unknown policy {name!r} (choose from {[k.value for k in PolicyKind]})")


def cmd_simulate(args) -> int:
    cfg = load_session_config(args.config)
    kind = _policy_kind(args.policy)
    mode = Mode(args.mode) if args.mode else NATURAL_MODE[kind]
    mode_cfg = ModeConfig(
        mode=mode,
        joystick_gain=cfg.mode.joystick_gain,
        joystick_max_speed=cfg.mode.joystick_max_speed,
        dead_zone=cfg.mode.dead_zone,
    )
    out = Path(args.out)
    written = []
    for i in range(args.trials):
        seed = args.seed + i
        policy = cfg.policy(kind, seed=seed)
        sid = f"{kind.value}-{mode.value}-t{i + 1:02d}-s{seed}"
        result = run_trial(
            policy,
            cfg.trial,
            cfg.arm,
            cfg.servo,
            mode_cfg,
            home_angles=cfg.home_angles,
            body_start=cfg.body_start,
            tick_rate=cfg.tick_rate_control,
            timeout=args.timeout,
            session_id=sid,
            config_digest=cfg.digest,
        )
        ev_path = out / f"{sid}_events.jsonl"
        tm_path = out / f"{sid}_telemetry.jsonl"
        logio.write_jsonl(
            ev_path,
            [logio.event_header(sid, cfg.digest, cfg.trial, mode.value, kind.value, seed)] + result.events,
        )
        logio.write_jsonl(
            tm_path,
            [logio.telemetry_header(sid, cfg.digest, mode.value, kind.value, seed, cfg.tick_rate_control)]
            + result.telemetry,
        )
        written.append(ev_path)
        print(f"{sid}: {len(result.events)} events, {len(result.telemetry)} telemetry rows, "
              f"{result.duration:.1f}s simulated -> {ev_path}")
    return 0


def cmd_serve(args) -> int:
    from .service import LiveServer

    cfg = load_session_config(args.config)
    server = LiveServer(
        cfg,
        host=args.host,
        port=args.port,
        out_dir=args.out,
        max_seconds=args.max_seconds,
    )
    print(f"listening on ws://{args.host}:{server.port} (session {server.session_id})", flush=True)
    try:
        server.run()
    except KeyboardInterrupt:
        server.stop()
    return 0


def _pair_paths(patterns) -> list:
    events = []
    for pattern in patterns:
        events.extend(sorted(globmod.glob(pattern)))
    pairs = []
    for ev in events:
        if ev.endswith("_events.jsonl"):
            tm = ev.replace("_events.jsonl", "_telemetry.jsonl")
            if Path(tm).exists():
                pairs.append((ev, tm))
            else:
                raise FileNotFoundError(f"telemetry file missing for {ev}")
    if not pairs:
        raise FileNotFoundError(f"no *_events.jsonl files matched {patterns}")
    return pairs


def cmd_analyze(args) -> int:
    pairs = _pair_paths(args.logs)
    runs = [metrics.load_run(ev, tm) for ev, tm in pairs]
    report = metrics.analyze_runs(runs, force=args.force)
    written = metrics.write_report(report, args.out)
    print(f"analyzed {len(runs)} runs -> " + ", ".join(str(p) for p in written))
    return 0


def cmd_replay(args) -> int:
    from .replay import iter_stream

    events_path = Path(args.events)
    telemetry_path = Path(args.telemetry) if args.telemetry else Path(str(events_path).replace("_events.jsonl", "_telemetry.jsonl"))
    n = 0
    for item in iter_stream(events_path, telemetry_path, speed=args.speed):
        if not args.no_pacing and item.delay > 0:
            time.sleep(item.delay)
        sys.stdout.write(logio.dump_row(item.payload) + "\n")
        n += 1
    print(f"replayed {n} items", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bodylink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run scripted-operator trials and write logs")
    p.add_argument("--config", default=str(default_config_path()), help="session config JSON")
    p.add_argument("--policy", required=True, help="body-only | joystick-only | sequential-dual")
    p.add_argument("--mode", default=None, help="override control mode (joystick | body | dual)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=60.0, help="per-target watchdog, simulated seconds")
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("serve", help="serve a live session over the wire protocol")
    p.add_argument("--config", default=str(default_config_path()))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8701)
    p.add_argument("--out", default=None, help="directory for session logs")
    p.add_argument("--max-seconds", type=float, default=None)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("analyze", help="compute metrics and statistics over logs")
    p.add_argument("--logs", nargs="+", required=True, help="glob(s) for *_events.jsonl files")
    p.add_argument("--out", default="report")
    p.add_argument("--force", action="store_true", help="allow mixed config hashes")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("replay", help="re-emit a recorded session as a snapshot stream")
    p.add_argument("--events", required=True)
    p.add_argument("--telemetry", default=None)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--no-pacing", action="store_true", help="emit without wall-clock pacing")
    p.set_defaults(fn=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (FileNotFoundError, ValueError, metrics.MetricsParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Deterministic re-emission of recorded sessions for console playback."""

from __future__ import annotations

from dataclasses import dataclass

from . import logio


@dataclass(frozen=True)
class ReplayItem:
    t: float  # session time of the original row
    delay: float  # wall delay before emitting, already divided by speed
    payload: dict


def iter_stream(events_path, telemetry_path, speed: float = 1.0):
    """Merged snapshot+event stream in session-time order.

    Telemetry rows become snapshot payloads (one per row), events are re-emitted
    as-is; ``speed`` scales the pacing only, never the ordering or timestamps.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    ev_header, ev_rows = logio.split_header(logio.read_jsonl(events_path), str(events_path))
    tm_header, tm_rows = logio.split_header(logio.read_jsonl(telemetry_path), str(telemetry_path))

    items = [(row["t"], 1, {"type": "event", **row}) for row in ev_rows]
    items += [(row["t"], 0, {"type": "snapshot_replay", **row}) for row in tm_rows]
    # stable order: time, then snapshots before events emitted at the same tick
    items.sort(key=lambda it: (it[0], it[1]))
    prev_t = items[0][0] if items else 0.0
    for t, _, payload in items:
        delay = max(0.0, (t - prev_t) / speed)
        prev_t = t
        yield ReplayItem(t=t, delay=delay, payload=payload)


def count_snapshots(telemetry_path) -> int:
    _, rows = logio.split_header(logio.read_jsonl(telemetry_path), str(telemetry_path))
    return len(rows)

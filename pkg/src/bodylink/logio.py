"""JSONL session logs: headers, writing, schema-checked reading."""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


class LogSchemaError(ValueError):
    pass


def event_header(session_id: str, config_digest: str, spec, mode: str, policy: str, seed: int) -> dict:
    return {
        "kind": "header",
        "log": "events",
        "schema": SCHEMA_VERSION,
        "session": session_id,
        "config_hash": config_digest,
        "spec": spec.to_json(),
        "mode": mode,
        "policy": policy,
        "seed": seed,
    }


def telemetry_header(session_id: str, config_digest: str, mode: str, policy: str, seed: int, tick_rate: float) -> dict:
    return {
        "kind": "header",
        "log": "telemetry",
        "schema": SCHEMA_VERSION,
        "session": session_id,
        "config_hash": config_digest,
        "mode": mode,
        "policy": policy,
        "seed": seed,
        "tick_rate": tick_rate,
    }


def dump_row(row: dict) -> str:
    return json.dumps(row, separators=(",", ":"))


def write_jsonl(path, rows) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(dump_row(row))
            f.write("\n")


def read_jsonl(path) -> list:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def split_header(rows, path="log") -> tuple:
    """Validate and split off the header row; raises on schema mismatch."""
    if not rows or rows[0].get("kind") != "header":
        raise LogSchemaError(f"{path}: missing header line")
    header = rows[0]
    version = header.get("schema")
    if version != SCHEMA_VERSION:
        raise LogSchemaError(f"{path}: schema version {version} != supported {SCHEMA_VERSION}")
    return header, rows[1:]

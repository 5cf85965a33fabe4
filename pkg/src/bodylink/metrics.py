"""Metrics over session logs and the statistical comparison pipeline.

Three metric families per validated target: completion time (shown to
validated), total body displacement (componentwise absolute translation and
rotation-vector of the relative body transform between those instants), and,
for dual-mode sessions, the per-axis body/joystick contribution split of the
virtual-effector displacement. Axes whose total displacement stays below the
task tolerance are masked out of the contribution distributions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import logio, se3, stats
from .se3 import Transform
from .trial import EVENT_TARGET_SHOWN, EVENT_TARGET_VALIDATED


class MetricsParseError(ValueError):
    pass


@dataclass(frozen=True)
class TargetResult:
    target_index: int
    completion_time: float
    mode: str
    trial_id: str
    participant_id: str
    t_shown: float
    t_validated: float


@dataclass(frozen=True)
class BodyDisplacement:
    """Componentwise absolute body displacement over a reach (m, m, m, rad, rad, rad)."""

    dx: float
    dy: float
    dz: float
    dalpha: float
    dbeta: float
    dgamma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz, self.dalpha, self.dbeta, self.dgamma])


@dataclass(frozen=True)
class ContributionSeries:
    """Per-axis contributions over one reach; axes with final displacement
    below the mask threshold are invalid."""

    t: np.ndarray  # (n,)
    b: np.ndarray  # (n, 3) body contribution per axis
    j: np.ndarray  # (n, 3) joystick contribution per axis
    valid: np.ndarray  # (3,) bool
    delta_final: np.ndarray  # (3,) total displacement in the reach-start body frame
    target_index: int = -1


def completion_times(rows: list, mode: str = "", trial_id: str = "", participant_id: str = "") -> list:
    """One TargetResult per validated target; rows are event rows in file order
    (line numbers in errors assume a header line before them)."""
    shown: dict = {}
    results = []
    for i, row in enumerate(rows):
        line = i + 2
        kind = row.get("kind")
        if kind == EVENT_TARGET_SHOWN:
            shown[row["target_index"]] = row["t"]
        elif kind == EVENT_TARGET_VALIDATED:
            idx = row["target_index"]
            if idx not in shown:
                raise MetricsParseError(f"line {line}: TargetValidated for target {idx} without TargetShown")
            results.append(
                TargetResult(
                    target_index=int(idx),
                    completion_time=float(row["t"]) - float(shown[idx]),
                    mode=mode,
                    trial_id=trial_id,
                    participant_id=participant_id,
                    t_shown=float(shown[idx]),
                    t_validated=float(row["t"]),
                )
            )
    return results


def reaches(rows: list) -> list:
    """(target_index, t_shown, t_validated) per validated target."""
    out = []
    shown: dict = {}
    for row in rows:
        if row.get("kind") == EVENT_TARGET_SHOWN:
            shown[row["target_index"]] = row["t"]
        elif row.get("kind") == EVENT_TARGET_VALIDATED:
            idx = row["target_index"]
            if idx in shown:
                out.append((int(idx), float(shown[idx]), float(row["t"])))
    return out


def total_body_displacement(body_at_t0: Transform, body_at_tf: Transform) -> BodyDisplacement:
    """Componentwise absolute translation and rotation vector of the relative
    transform from the reach-start body frame to the reach-end body frame."""
    rel = se3.compose(se3.inverse(body_at_t0), body_at_tf)
    rot = se3.angle_axis(rel.rotation)
    t = np.abs(rel.translation)
    r = np.abs(rot)
    return BodyDisplacement(float(t[0]), float(t[1]), float(t[2]), float(r[0]), float(r[1]), float(r[2]))


def body_path_length(telemetry: list, t0: float, tf: float) -> float:
    """Optional path-length variant (translation only); distinct from the
    endpoint-displacement measure and never substituted for it."""
    pts = [np.asarray(r["body"]["translation"], dtype=float) for r in telemetry
           if r.get("body") is not None and t0 <= r["t"] <= tf]
    if len(pts) < 2:
        return 0.0
    pts = np.stack(pts)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def contribution_series(telemetry: list, t0: float, tf: float, mask_threshold: float = 0.02,
                        target_index: int = -1) -> ContributionSeries:
    """Per-axis split of the virtual-effector displacement over [t0, tf].

    The joystick share is the change of the body-frame link vector; the total
    is the world displacement rotated into the body frame captured at t0; the
    body share is their difference. Shares are normalized by the final total
    per axis; axes with |final| below the mask threshold are invalid.
    """
    sel = [r for r in telemetry if t0 <= r["t"] <= tf and r.get("link_body") is not None]
    if len(sel) < 2:
        raise MetricsParseError(f"no telemetry rows cover reach [{t0}, {tf}]")
    t = np.array([r["t"] for r in sel])
    link = np.array([r["link_body"] for r in sel])
    x = np.array([r["virtual"]["translation"] for r in sel])
    if sel[0].get("body") is None:
        raise MetricsParseError("reach-start telemetry row has no body pose")
    r0 = np.array(sel[0]["body"]["rotation"], dtype=float).reshape(3, 3)
    delta_j = link - link[0]
    delta = (x - x[0]) @ r0  # row-vector form of R0^T (x - x0)
    delta_b = delta - delta_j
    final = delta[-1]
    valid = np.abs(final) >= mask_threshold
    b = np.full_like(delta_b, np.nan)
    j = np.full_like(delta_j, np.nan)
    for axis in range(3):
        if valid[axis]:
            b[:, axis] = delta_b[:, axis] / final[axis]
            j[:, axis] = delta_j[:, axis] / final[axis]
    return ContributionSeries(t=t, b=b, j=j, valid=valid, delta_final=final, target_index=target_index)


def trial_contributions(event_rows: list, telemetry: list, mask_threshold: float = 0.02) -> list:
    return [
        contribution_series(telemetry, t0, tf, mask_threshold, target_index=idx)
        for idx, t0, tf in reaches(event_rows)
    ]


def median_contribution_curves(series: list, n_grid: int = 101, min_reaches: int = 3) -> dict:
    """Median b(t) and j(t) curves per axis over normalized reach time.

    Each reach is resampled onto a common [0, 1] grid; the median is taken
    across reaches whose axis is unmasked. Axes with fewer than ``min_reaches``
    valid reaches are reported invalid.
    """
    grid = np.linspace(0.0, 1.0, n_grid)
    med_b = np.full((n_grid, 3), np.nan)
    med_j = np.full((n_grid, 3), np.nan)
    axis_valid = np.zeros(3, dtype=bool)
    counts = np.zeros(3, dtype=int)
    for axis in range(3):
        bs, js = [], []
        for s in series:
            if not s.valid[axis] or s.t[-1] <= s.t[0]:
                continue
            u = (s.t - s.t[0]) / (s.t[-1] - s.t[0])
            bs.append(np.interp(grid, u, s.b[:, axis]))
            js.append(np.interp(grid, u, s.j[:, axis]))
        counts[axis] = len(bs)
        if len(bs) >= min_reaches:
            axis_valid[axis] = True
            med_b[:, axis] = np.median(np.stack(bs), axis=0)
            med_j[:, axis] = np.median(np.stack(js), axis=0)
    return {"grid": grid, "median_b": med_b, "median_j": med_j, "axis_valid": axis_valid, "counts": counts}


def crossing_index(curve: np.ndarray, fraction: float = 0.5) -> int:
    """First grid index where the curve reaches ``fraction`` of its final value."""
    final = curve[-1]
    threshold = fraction * final
    if final >= 0:
        hits = np.nonzero(curve >= threshold)[0]
    else:
        hits = np.nonzero(curve <= threshold)[0]
    return int(hits[0]) if hits.size else len(curve)


# --- whole-run analysis -----------------------------------------------------


@dataclass(frozen=True)
class RunData:
    events_path: str
    telemetry_path: str
    header: dict
    events: list
    telemetry: list


def load_run(events_path, telemetry_path) -> RunData:
    ev_header, ev_rows = logio.split_header(logio.read_jsonl(events_path), str(events_path))
    tm_header, tm_rows = logio.split_header(logio.read_jsonl(telemetry_path), str(telemetry_path))
    if ev_header.get("config_hash") != tm_header.get("config_hash"):
        raise MetricsParseError(f"event/telemetry config hashes differ for {events_path}")
    return RunData(str(events_path), str(telemetry_path), ev_header, ev_rows, tm_rows)


def _body_pose_at(telemetry: list, t: float) -> Transform:
    for row in telemetry:
        if row["t"] >= t - 1e-9 and row.get("body") is not None:
            return se3.transform_from_json(row["body"])
    raise MetricsParseError(f"no telemetry row at or after t={t}")


def analyze_runs(runs: list, force: bool = False) -> dict:
    """Aggregate per-target results, contributions and pairwise mode tests."""
    if not runs:
        raise MetricsParseError("no runs to analyze")
    hashes = {r.header.get("config_hash") for r in runs}
    if len(hashes) > 1 and not force:
        raise MetricsParseError(f"mixed config hashes {sorted(hashes)}; pass force to combine")

    targets = []
    contributions = []
    for run in runs:
        mode = run.header.get("mode", "")
        sid = run.header.get("session", "")
        tolerance = float(run.header.get("spec", {}).get("tolerance_radius", 0.02))
        results = completion_times(run.events, mode=mode, trial_id=sid, participant_id=run.header.get("policy", ""))
        for res in results:
            body0 = _body_pose_at(run.telemetry, res.t_shown)
            bodyf = _body_pose_at(run.telemetry, res.t_validated)
            tbd = total_body_displacement(body0, bodyf)
            targets.append((run, res, tbd))
        if mode == "dual":
            for series in trial_contributions(run.events, run.telemetry, tolerance):
                contributions.append((run, series))

    by_mode: dict = {}
    for _, res, _ in targets:
        by_mode.setdefault(res.mode, []).append(res.completion_time)

    summary_rows = []
    for mode in sorted(by_mode):
        s = stats.summarize(by_mode[mode])
        summary_rows.append({"group": mode, "metric": "completion_time", **_summary_dict(s)})
    tbd_components = ["dx", "dy", "dz", "dalpha", "dbeta", "dgamma"]
    tbd_by_mode: dict = {}
    for _, res, tbd in targets:
        tbd_by_mode.setdefault(res.mode, []).append(tbd.as_array())
    for mode in sorted(tbd_by_mode):
        arr = np.stack(tbd_by_mode[mode])
        for ci, comp in enumerate(tbd_components):
            s = stats.summarize(arr[:, ci])
            summary_rows.append({"group": mode, "metric": f"tbd_{comp}", **_summary_dict(s)})

    test_rows = []
    modes = sorted(by_mode)
    for i in range(len(modes)):
        for k in range(i + 1, len(modes)):
            a, b = by_mode[modes[i]], by_mode[modes[k]]
            res = stats.mann_whitney_u(a, b)
            test_rows.append(
                {
                    "metric": "completion_time",
                    "group_a": modes[i],
                    "group_b": modes[k],
                    "n_a": len(a),
                    "n_b": len(b),
                    "u": res.u,
                    "p_raw": res.p,
                    "p_bonferroni": stats.bonferroni(res.p, 2),
                    "method": res.method,
                }
            )

    target_rows = []
    for run, res, tbd in targets:
        target_rows.append(
            {
                "session": run.header.get("session", ""),
                "mode": res.mode,
                "policy": run.header.get("policy", ""),
                "target_index": res.target_index,
                "t_shown": res.t_shown,
                "t_validated": res.t_validated,
                "completion_time": res.completion_time,
                "tbd_dx": tbd.dx,
                "tbd_dy": tbd.dy,
                "tbd_dz": tbd.dz,
                "tbd_dalpha": tbd.dalpha,
                "tbd_dbeta": tbd.dbeta,
                "tbd_dgamma": tbd.dgamma,
            }
        )

    contribution_rows = []
    for run, series in contributions:
        for axis, name in enumerate("xyz"):
            contribution_rows.append(
                {
                    "session": run.header.get("session", ""),
                    "target_index": series.target_index,
                    "axis": name,
                    "valid": bool(series.valid[axis]),
                    "delta_final": float(series.delta_final[axis]),
                    "b_final": float(series.b[-1, axis]) if series.valid[axis] else "",
                    "j_final": float(series.j[-1, axis]) if series.valid[axis] else "",
                }
            )

    return {
        "n_runs": len(runs),
        "config_hashes": sorted(hashes),
        "targets": target_rows,
        "contributions": contribution_rows,
        "summary": summary_rows,
        "tests": test_rows,
    }


def _summary_dict(s: stats.SummaryStats) -> dict:
    return {
        "n": s.n,
        "median": s.median,
        "q25": s.q25,
        "q75": s.q75,
        "whisker_low": s.whisker_low,
        "whisker_high": s.whisker_high,
        "mean": s.mean,
        "std": s.std,
        "degenerate": s.degenerate,
    }


def write_report(report: dict, out_dir) -> list:
    """Write the CSV tables and the JSON report; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in ("targets", "contributions", "summary", "tests"):
        rows = report[name]
        path = out / f"{name}.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            if rows:
                writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
        written.append(path)
    path = out / "report.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    written.append(path)
    return written

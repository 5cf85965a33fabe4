import json
import math
from pathlib import Path

import numpy as np
import pytest

import helpers
from bodylink import logio, metrics, se3
from bodylink.control import Mode, ModeConfig
from bodylink.metrics import (
    BodyDisplacement,
    MetricsParseError,
    completion_times,
    contribution_series,
    crossing_index,
    median_contribution_curves,
    total_body_displacement,
    trial_contributions,
)
from bodylink.operators import PolicyKind, run_trial
from bodylink.se3 import Transform
from bodylink.trial import TrialSpec


def mode_cfg(mode: Mode) -> ModeConfig:
    return ModeConfig(mode=mode, joystick_gain=0.25, joystick_max_speed=0.25, dead_zone=0.02)


def simulate(session_cfg, kind, mode, n_pairs=2, seed=0, body_start=None, sid=None):
    return run_trial(
        session_cfg.policy(kind, seed=seed),
        TrialSpec(center=session_cfg.trial.center, sphere_radius=0.15, n_pairs=n_pairs),
        session_cfg.arm,
        session_cfg.servo,
        mode_cfg(mode),
        home_angles=session_cfg.home_angles,
        body_start=body_start if body_start is not None else session_cfg.body_start,
        session_id=sid or f"m-{kind.value}-{mode.value}-{seed}",
        config_digest=session_cfg.digest,
    )


@pytest.fixture(scope="module")
def runs(session_cfg):
    """One small run per policy plus the degenerate dual pairings."""
    return {
        "body": simulate(session_cfg, PolicyKind.BODY_ONLY, Mode.BODY),
        "joystick": simulate(session_cfg, PolicyKind.JOYSTICK_ONLY, Mode.JOYSTICK),
        "dual": simulate(session_cfg, PolicyKind.SEQUENTIAL_DUAL, Mode.DUAL, n_pairs=3),
        "body_in_dual": simulate(session_cfg, PolicyKind.BODY_ONLY, Mode.DUAL),
        "joystick_in_dual_origin": simulate(
            session_cfg, PolicyKind.JOYSTICK_ONLY, Mode.DUAL, body_start=se3.identity()
        ),
    }


class TestCompletionTimes:
    def test_synthetic_log(self):
        rows = [
            {"t": 3.0, "kind": "TargetShown", "target_index": 0, "effector": [0, 0, 0]},
            {"t": 8.4, "kind": "TargetValidated", "target_index": 0, "effector": [0, 0, 0]},
        ]
        out = completion_times(rows, mode="body")
        assert len(out) == 1
        assert out[0].completion_time == pytest.approx(5.4, abs=1e-12)

    def test_dwell_is_the_lower_bound(self, runs):
        for res in runs.values():
            for r in completion_times(res.events):
                assert r.completion_time >= 1.0

    def test_counts_match_protocol_length(self, runs):
        assert len(completion_times(runs["dual"].events)) == 6
        assert len(completion_times(runs["body"].events)) == 4

    def test_malformed_log_names_line(self):
        rows = [{"t": 1.0, "kind": "TargetValidated", "target_index": 3, "effector": [0, 0, 0]}]
        with pytest.raises(MetricsParseError, match="line 2"):
            completion_times(rows)


class TestTotalBodyDisplacement:
    def test_no_motion_all_zero(self, rng):
        t = Transform(helpers.random_rotation(rng), rng.normal(size=3))
        np.testing.assert_array_equal(total_body_displacement(t, t).as_array(), np.zeros(6))

    def test_pure_translation_componentwise_abs(self):
        t0 = se3.identity()
        tf = Transform(np.eye(3), np.array([-0.03, 0.04, 0.0]))
        d = total_body_displacement(t0, tf)
        np.testing.assert_allclose(d.as_array(), [0.03, 0.04, 0.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_pure_rotation_quaternion_oracle(self):
        rz = se3.from_angle_axis([0.0, 0.0, 0.2])
        d = total_body_displacement(se3.identity(), Transform(rz, np.zeros(3)))
        oracle = np.abs(helpers.quat_log_rotvec(rz))
        np.testing.assert_allclose(d.as_array()[3:], oracle, atol=1e-12)
        np.testing.assert_allclose(d.as_array(), [0, 0, 0, 0, 0, 0.2], atol=1e-12)

    def test_translation_expressed_in_start_body_frame(self):
        # a start pose yawed 90 deg sees a world +x move as body-frame -y
        rz = se3.from_angle_axis([0.0, 0.0, math.pi / 2])
        t0 = Transform(rz, np.zeros(3))
        tf = Transform(rz, np.array([0.1, 0.0, 0.0]))
        d = total_body_displacement(t0, tf)
        np.testing.assert_allclose(d.as_array()[:3], [0.0, 0.1, 0.0], atol=1e-12)

    def test_components_bounded_by_norm(self, rng):
        for _ in range(50):
            t0 = Transform(helpers.random_rotation(rng), rng.normal(size=3))
            tf = Transform(helpers.random_rotation(rng), rng.normal(size=3))
            d = total_body_displacement(t0, tf).as_array()
            rel = se3.compose(se3.inverse(t0), tf)
            assert np.all(d[:3] <= np.linalg.norm(rel.translation) + 1e-12)
            assert np.all(d >= 0.0)

    def test_path_length_at_least_endpoint(self, runs):
        res = runs["body"]
        for idx, t0, tf in metrics.reaches(res.events):
            body0 = metrics._body_pose_at(res.telemetry, t0)
            bodyf = metrics._body_pose_at(res.telemetry, tf)
            endpoint = np.linalg.norm(total_body_displacement(body0, bodyf).as_array()[:3])
            assert metrics.body_path_length(res.telemetry, t0, tf) >= endpoint - 1e-9


class TestContributions:
    def test_body_only_reach_is_pure_body(self, runs):
        series = trial_contributions(runs["body_in_dual"].events, runs["body_in_dual"].telemetry)
        assert series
        for s in series:
            for axis in range(3):
                if s.valid[axis]:
                    assert s.b[-1, axis] == 1.0  # exact: the link never moves
                    assert s.j[-1, axis] == 0.0
                    assert np.all(s.j[:, axis] == 0.0)

    def test_joystick_only_reach_is_pure_joystick(self, runs):
        res = runs["joystick_in_dual_origin"]
        series = trial_contributions(res.events, res.telemetry)
        assert series
        for s in series:
            for axis in range(3):
                if s.valid[axis]:
                    assert s.j[-1, axis] == 1.0  # exact with the identity body start
                    assert s.b[-1, axis] == 0.0

    def test_identity_b_plus_j(self, runs):
        series = trial_contributions(runs["dual"].events, runs["dual"].telemetry)
        checked = 0
        for s in series:
            for axis in range(3):
                if s.valid[axis]:
                    assert abs(s.b[-1, axis] + s.j[-1, axis] - 1.0) <= 1e-9
                    checked += 1
        assert checked > 0

    def test_sequential_dual_body_dominates_lateral(self, runs):
        series = trial_contributions(runs["dual"].events, runs["dual"].telemetry)
        lateral_checked = 0
        for s in series:
            for axis in (1, 2):  # y, z: the lever-served directions
                if s.valid[axis]:
                    assert s.b[-1, axis] > 0.5
                    lateral_checked += 1
        assert lateral_checked > 0

    def test_mask_threshold(self):
        # synthetic telemetry: x displacement 1 cm (below the 2 cm mask), y 10 cm
        rows = []
        ident = [1.0, 0, 0, 0, 1.0, 0, 0, 0, 1.0]
        for i in range(11):
            u = i / 10.0
            rows.append(
                {
                    "t": float(i),
                    "link_body": [0.5 + 0.01 * u, 0.1 * u, 0.0],
                    "virtual": {"rotation": ident, "translation": [0.5 + 0.01 * u, 0.1 * u, 0.0]},
                    "body": {"rotation": ident, "translation": [0.0, 0.0, 0.0]},
                }
            )
        s = contribution_series(rows, 0.0, 10.0)
        assert not s.valid[0] and s.valid[1] and not s.valid[2]
        assert np.isnan(s.b[-1, 0])
        assert s.j[-1, 1] == pytest.approx(1.0, abs=1e-12)

    def test_median_curves_and_crossing(self):
        # synthetic early-body / late-joystick shapes
        t = np.linspace(0.0, 1.0, 50)
        b = np.clip(t * 4.0, 0.0, 0.8)[:, None] @ np.ones((1, 3))
        j = np.clip((t - 0.75) * 0.8, 0.0, 0.2)[:, None] @ np.ones((1, 3))
        series = [
            metrics.ContributionSeries(t=t, b=b, j=j, valid=np.array([True] * 3),
                                       delta_final=np.full(3, 0.1), target_index=i)
            for i in range(4)
        ]
        curves = median_contribution_curves(series)
        assert curves["axis_valid"].all()
        for axis in range(3):
            ib = crossing_index(curves["median_b"][:, axis])
            ij = crossing_index(curves["median_j"][:, axis])
            assert ib < ij

    def test_too_few_rows_raises(self):
        with pytest.raises(MetricsParseError):
            contribution_series([], 0.0, 1.0)


class TestAnalyzePipeline:
    @pytest.fixture()
    def log_dir(self, tmp_path, session_cfg, runs):
        for name, res in runs.items():
            if name.endswith("origin"):
                continue
            mode = {"body": "body", "joystick": "joystick", "dual": "dual", "body_in_dual": "dual"}[name]
            sid = f"run-{name}"
            logio.write_jsonl(
                tmp_path / f"{sid}_events.jsonl",
                [logio.event_header(sid, session_cfg.digest, session_cfg.trial, mode, name, 0)] + res.events,
            )
            logio.write_jsonl(
                tmp_path / f"{sid}_telemetry.jsonl",
                [logio.telemetry_header(sid, session_cfg.digest, mode, name, 0, 100.0)] + res.telemetry,
            )
        return tmp_path

    def test_end_to_end_report(self, log_dir):
        pairs = sorted(log_dir.glob("*_events.jsonl"))
        runs_loaded = [metrics.load_run(ev, str(ev).replace("_events", "_telemetry")) for ev in pairs]
        report = metrics.analyze_runs(runs_loaded)
        assert report["n_runs"] == 4
        modes = {row["group"] for row in report["summary"]}
        assert {"body", "joystick", "dual"} <= modes
        assert report["tests"], "pairwise mode tests expected"
        for row in report["tests"]:
            assert 0.0 <= row["p_raw"] <= 1.0
            assert row["p_bonferroni"] == pytest.approx(min(1.0, 2 * row["p_raw"]), abs=1e-12)
        out = metrics.write_report(report, log_dir / "report")
        names = {p.name for p in out}
        assert names == {"targets.csv", "contributions.csv", "summary.csv", "tests.csv", "report.json"}
        parsed = json.loads((log_dir / "report" / "report.json").read_text())
        assert parsed["n_runs"] == 4

    def test_mixed_hash_refused_unless_forced(self, log_dir, session_cfg):
        ev = sorted(log_dir.glob("*_events.jsonl"))[0]
        tm = Path(str(ev).replace("_events", "_telemetry"))
        rows = logio.read_jsonl(ev)
        rows[0]["config_hash"] = "deadbeef"
        logio.write_jsonl(log_dir / "alien_events.jsonl", rows)
        trows = logio.read_jsonl(tm)
        trows[0]["config_hash"] = "deadbeef"
        logio.write_jsonl(log_dir / "alien_telemetry.jsonl", trows)
        loaded = [
            metrics.load_run(p, str(p).replace("_events", "_telemetry"))
            for p in sorted(log_dir.glob("*_events.jsonl"))
        ]
        with pytest.raises(MetricsParseError, match="mixed config hashes"):
            metrics.analyze_runs(loaded)
        report = metrics.analyze_runs(loaded, force=True)
        assert len(report["config_hashes"]) == 2

    def test_schema_version_checked(self, log_dir):
        ev = sorted(log_dir.glob("*_events.jsonl"))[0]
        rows = logio.read_jsonl(ev)
        rows[0]["schema"] = 99
        bad = log_dir / "bad_events.jsonl"
        logio.write_jsonl(bad, rows)
        with pytest.raises(logio.LogSchemaError, match="99"):
            logio.split_header(logio.read_jsonl(bad), str(bad))

    def test_pipeline_closure_on_all_logs(self, runs):
        # every log the simulator can produce parses clean through the metrics
        for res in runs.values():
            out = completion_times(res.events)
            assert out and all(r.completion_time > 0 for r in out)

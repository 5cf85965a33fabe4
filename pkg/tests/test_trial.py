import itertools
import math

import numpy as np
import pytest

from bodylink.trial import (
    EVENT_TARGET_SHOWN,
    EVENT_TARGET_VALIDATED,
    EVENT_TOLERANCE_ENTERED,
    EVENT_TOLERANCE_EXITED,
    EVENT_TRIAL_COMPLETED,
    TrialSequenceError,
    TrialSpec,
    TrialState,
    build_sequence,
    fibonacci_sphere,
    update,
)

CENTER = np.array([0.0, 0.0, 0.0])


def spec(n_pairs=1, **kw) -> TrialSpec:
    args = dict(center=CENTER, sphere_radius=0.15, n_pairs=n_pairs, tolerance_radius=0.02, dwell_time=1.0)
    args.update(kw)
    return TrialSpec(**args)


class TestFibonacciSphere:
    def test_single_point_on_x_axis(self):
        pts = fibonacci_sphere(1, 0.15, CENTER)
        # i=0, n=1: z = 0, azimuth 0 -> radius along +x
        np.testing.assert_allclose(pts[0], [0.15, 0.0, 0.0], atol=1e-15)

    def test_all_on_sphere(self):
        pts = fibonacci_sphere(15, 0.15, np.array([0.3, -0.2, 0.5]))
        r = np.linalg.norm(pts - np.array([0.3, -0.2, 0.5]), axis=1)
        np.testing.assert_allclose(r, 0.15, atol=1e-12)

    def test_uniformity_brute_force(self):
        pts = fibonacci_sphere(15, 1.0, CENTER)
        min_sep = min(
            math.acos(np.clip(np.dot(a, b), -1.0, 1.0))
            for a, b in itertools.combinations(pts, 2)
        )
        assert min_sep > 0.5
        assert np.linalg.norm(pts.mean(axis=0)) < 0.05

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            fibonacci_sphere(0, 0.15, CENTER)


class TestBuildSequence:
    def test_single_pair(self):
        seq = build_sequence(spec(n_pairs=1))
        assert len(seq) == 2
        assert seq.kinds == ("surface", "center")
        np.testing.assert_allclose(np.linalg.norm(seq.positions[0] - CENTER), 0.15, atol=1e-12)
        np.testing.assert_array_equal(seq.positions[1], CENTER)

    def test_thirty_targets(self):
        seq = build_sequence(spec(n_pairs=15))
        assert len(seq) == 30
        # odd entries are exactly the center, even entries on the sphere
        for i in range(30):
            if i % 2 == 1:
                np.testing.assert_array_equal(seq.positions[i], CENTER)
            else:
                assert np.linalg.norm(seq.positions[i] - CENTER) == pytest.approx(0.15, abs=1e-9)

    def test_alternation(self):
        seq = build_sequence(spec(n_pairs=5))
        for a, b in zip(seq.kinds, seq.kinds[1:]):
            assert (a == "center") != (b == "center")


class TestUpdate:
    def run_timeline(self, state, samples):
        events = []
        for t, pos in samples:
            events.extend((t, e) for e in state.update(pos, t))
        return events

    def test_exact_dwell_validation(self):
        s = spec()
        state = TrialState(s)
        target = state.current_target()
        far = CENTER + np.array([0.1, 0.0, 0.0])
        timeline = [(0.0, far)]  # first call shows the target
        timeline += [(round(0.01 * i, 10), target) for i in range(100, 201)]
        events = self.run_timeline(state, timeline)
        kinds = [(t, e.kind) for t, e in events]
        assert kinds[0] == (0.0, EVENT_TARGET_SHOWN)
        assert (1.0, EVENT_TOLERANCE_ENTERED) in kinds
        validated = [t for t, e in events if e.kind == EVENT_TARGET_VALIDATED]
        assert validated == [2.0]

    def test_exit_resets_dwell_timer(self):
        s = spec()
        state = TrialState(s)
        target = state.current_target()
        outside = target + np.array([0.05, 0.0, 0.0])
        timeline = [(-0.01, outside)]  # show
        for i in range(0, 80):  # inside 0.0 .. 0.79
            timeline.append((round(0.01 * i, 10), target))
        for i in range(80, 100):  # outside 0.8 .. 0.99
            timeline.append((round(0.01 * i, 10), outside))
        for i in range(100, 210):  # inside from 1.0
            timeline.append((round(0.01 * i, 10), target))
        events = self.run_timeline(state, timeline)
        entered = [t for t, e in events if e.kind == EVENT_TOLERANCE_ENTERED]
        exited = [t for t, e in events if e.kind == EVENT_TOLERANCE_EXITED]
        validated = [t for t, e in events if e.kind == EVENT_TARGET_VALIDATED]
        assert entered == [0.0, 1.0]
        assert exited == [0.8]
        assert validated == [2.0]  # timer restarted at the re-entry

    def test_boundary_is_closed_ball(self):
        s = spec()
        state = TrialState(s)
        target = state.current_target()  # (0.15, 0, 0), exact in floats? use center target
        state.update(target, 0.0)  # show surface target
        boundary = target + np.array([0.0, s.tolerance_radius, 0.0])
        events = state.update(boundary, 0.01)
        assert [e.kind for e in events] == [EVENT_TOLERANCE_ENTERED]

    def test_non_monotone_rejected(self):
        state = TrialState(spec())
        state.update(CENTER, 0.0)
        state.update(CENTER, 0.5)
        with pytest.raises(TrialSequenceError):
            state.update(CENTER, 0.5)
        with pytest.raises(TrialSequenceError):
            state.update(CENTER, 0.4)

    def test_full_trial_event_inventory(self):
        s = spec(n_pairs=2)
        state = TrialState(s)
        t = [0.0]

        def dwell_at(pos):
            for _ in range(150):
                t[0] = round(t[0] + 0.01, 10)
                for e in state.update(pos, t[0]):
                    yield e

        events = list(dwell_at(state.sequence.positions[0]))
        events += list(dwell_at(state.sequence.positions[1]))
        events += list(dwell_at(state.sequence.positions[2]))
        events += list(dwell_at(state.sequence.positions[3]))
        kinds = [e.kind for e in events]
        assert kinds.count(EVENT_TARGET_VALIDATED) == 4
        assert kinds.count(EVENT_TRIAL_COMPLETED) == 1
        assert kinds[-1] == EVENT_TRIAL_COMPLETED
        # per-target ordering: Shown < Entered* < Validated
        for idx in range(4):
            per = [e for e in events if e.target_index == idx]
            assert per[0].kind == EVENT_TARGET_SHOWN or idx == 0
            order = [e.kind for e in per]
            assert order.index(EVENT_TARGET_SHOWN) < order.index(EVENT_TARGET_VALIDATED)
        # completion time is at least the dwell time
        shown = {e.target_index: e.timestamp for e in events if e.kind == EVENT_TARGET_SHOWN}
        for e in events:
            if e.kind == EVENT_TARGET_VALIDATED:
                assert e.timestamp - shown[e.target_index] >= s.dwell_time

    def test_replay_reproduces_identical_events(self, rng):
        s = spec(n_pairs=2)
        trajectory = []
        t = 0.0
        for target in build_sequence(s).positions:
            for _ in range(130):
                t = round(t + 0.01, 10)
                trajectory.append((t, target + rng.normal(size=3) * 0.001))
        def run():
            state = TrialState(s)
            rows = []
            for t, pos in trajectory:
                rows.extend(e.to_row() for e in state.update(pos, t))
            return rows
        assert run() == run()

    def test_functional_wrapper_checks_spec(self):
        s = spec()
        state = TrialState(s)
        _, events = update(state, s, CENTER, 0.0)
        assert events[0].kind == EVENT_TARGET_SHOWN
        with pytest.raises(ValueError):
            update(state, spec(n_pairs=3), CENTER, 1.0)


class TestSpecValidation:
    def test_tolerance_below_radius(self):
        with pytest.raises(ValueError):
            TrialSpec(center=CENTER, sphere_radius=0.15, tolerance_radius=0.2)

    def test_n_pairs_positive(self):
        with pytest.raises(ValueError):
            TrialSpec(center=CENTER, n_pairs=0)

    def test_dwell_positive(self):
        with pytest.raises(ValueError):
            TrialSpec(center=CENTER, dwell_time=0.0)

    def test_json_round_trip(self):
        s = spec(n_pairs=4, seed=9)
        back = TrialSpec.from_json(s.to_json())
        np.testing.assert_array_equal(back.center, s.center)
        assert (back.sphere_radius, back.n_pairs, back.tolerance_radius, back.dwell_time, back.seed) == (
            s.sphere_radius, s.n_pairs, s.tolerance_radius, s.dwell_time, s.seed)

// Scene-graph assertions: the rendered scene carries the link segment, both
// effector spheres and the target with its dwell ring, all placed from the
// latest snapshot.

import * as THREE from 'three';
import { describe, expect, it } from 'vitest';

import { buildScene, lerpPosition, updateScene, STALE_AFTER_MS } from '../src/scene';
import { ConsoleState } from '../src/state';
import type { Snapshot } from '../src/types';

const IDENT = [1, 0, 0, 0, 1, 0, 0, 0, 1];

function snapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    type: 'snapshot',
    seq: 1,
    t: 1.0,
    mode: 'dual',
    q: [0, 0, 0, 0, 0, 0, 0],
    effector: { rotation: IDENT, translation: [0.58, 0.01, 0.47] },
    virtual: { rotation: IDENT, translation: [0.6, 0.0, 0.48] },
    body: { rotation: IDENT, translation: [-0.4, 0, 0.48] },
    link_body: [1, 0, 0],
    joint_points: [
      [0, 0, 0], [0, 0, 0.16], [0, 0, 0.29], [0.1, 0, 0.45], [0.2, 0, 0.55],
      [0.35, 0, 0.6], [0.45, 0, 0.55], [0.5, 0, 0.5], [0.6, 0, 0.48],
    ],
    target: { index: 0, position: [0.7, 0.05, 0.5], tolerance: 0.02, dwell_progress: 0.5 },
    trial: { phase: 'running', validated: 0, total: 30 },
    sphere: { center: [0.6, 0, 0.48], radius: 0.15 },
    flags: 0,
    warnings: [],
    session: 's',
    config_hash: 'h',
    ...overrides,
  };
}

describe('scene', () => {
  it('contains the link segment, both effector spheres and the target with dwell ring', () => {
    const cs = buildScene();
    updateScene(cs, snapshot());
    const names = ['linkSegment', 'virtualEffector', 'realEffector', 'target', 'dwellRing'];
    for (const name of names) {
      const obj = cs.scene.getObjectByName(name);
      expect(obj, name).toBeDefined();
      expect(obj!.visible, name).toBe(true);
    }
  });

  it('places objects from the snapshot', () => {
    const cs = buildScene();
    const snap = snapshot();
    updateScene(cs, snap);
    expect(cs.virtualEffector.position.toArray()).toEqual(snap.virtual.translation);
    expect(cs.realEffector.position.toArray()).toEqual(snap.effector.translation);
    expect(cs.target.position.toArray()).toEqual(snap.target!.position);
    expect(cs.bodyMarker.position.toArray()).toEqual(snap.body!.translation);
    // geometry buffers are float32: compare at that precision
    const link = cs.linkSegment.geometry.getAttribute('position');
    [link.getX(0), link.getY(0), link.getZ(0)].forEach((v, i) =>
      expect(v).toBeCloseTo(snap.body!.translation[i], 6),
    );
    [link.getX(1), link.getY(1), link.getZ(1)].forEach((v, i) =>
      expect(v).toBeCloseTo(snap.virtual.translation[i], 6),
    );
  });

  it('coincident effectors render at the same spot', () => {
    const cs = buildScene();
    const pose = { rotation: IDENT, translation: [0.6, 0, 0.48] };
    updateScene(cs, snapshot({ effector: pose, virtual: pose }));
    expect(cs.realEffector.position.distanceTo(cs.virtualEffector.position)).toBe(0);
  });

  it('dwell ring arc follows progress', () => {
    const cs = buildScene();
    updateScene(cs, snapshot());
    let ring = cs.dwellRing.geometry as THREE.RingGeometry;
    expect(ring.parameters.thetaLength).toBeCloseTo(Math.PI, 6); // progress 0.5
    updateScene(cs, snapshot({ target: { index: 0, position: [0.7, 0.05, 0.5], tolerance: 0.02, dwell_progress: 0 } }));
    expect(cs.dwellRing.visible).toBe(false);
    updateScene(cs, snapshot({ target: { index: 0, position: [0.7, 0.05, 0.5], tolerance: 0.02, dwell_progress: 1 } }));
    ring = cs.dwellRing.geometry as THREE.RingGeometry;
    expect(ring.parameters.thetaLength).toBeCloseTo(2 * Math.PI, 6);
  });

  it('repositions the target when the next snapshot names a new one', () => {
    const cs = buildScene();
    updateScene(cs, snapshot());
    updateScene(
      cs,
      snapshot({ seq: 2, t: 1.033, target: { index: 1, position: [0.6, 0, 0.48], tolerance: 0.02, dwell_progress: 0 } }),
    );
    expect(cs.target.position.toArray()).toEqual([0.6, 0, 0.48]);
  });

  it('hides the link when no body pose is known', () => {
    const cs = buildScene();
    updateScene(cs, snapshot({ body: null }));
    expect(cs.linkSegment.visible).toBe(false);
    expect(cs.bodyMarker.visible).toBe(false);
  });
});

describe('console state', () => {
  it('is latest-wins and atomic', () => {
    const state = new ConsoleState();
    const a = snapshot();
    const b = snapshot({ seq: 2, t: 1.033 });
    state.accept(a, 100);
    state.accept(b, 133);
    expect(state.latest).toBe(b);
    expect(state.previous).toBe(a);
  });

  it('flags staleness after the threshold', () => {
    const state = new ConsoleState();
    state.accept(snapshot(), 1000);
    expect(state.isStale(1000 + STALE_AFTER_MS - 1)).toBe(false);
    expect(state.isStale(1000 + STALE_AFTER_MS + 1)).toBe(true);
    expect(state.hud(1000 + STALE_AFTER_MS + 1).stale).toBe(true);
  });

  it('hud reflects the latest snapshot', () => {
    const state = new ConsoleState();
    state.accept(snapshot(), 50);
    const hud = state.hud(60);
    expect(hud.phase).toBe('running');
    expect(hud.total).toBe(30);
    expect(hud.dwellProgress).toBe(0.5);
  });

  it('interpolation is display-only and clamped', () => {
    expect(lerpPosition([0, 0, 0], [1, 2, 3], 0.5)).toEqual([0.5, 1, 1.5]);
    expect(lerpPosition([0, 0, 0], [1, 2, 3], 2.0)).toEqual([1, 2, 3]);
  });
});

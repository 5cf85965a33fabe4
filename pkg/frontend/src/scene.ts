// The 3D scene: robot chain, real (red) and virtual (light blue) effector
// spheres, the light-blue body-to-target link segment, the black reference
// sphere with the blue target and its dwell-progress ring. Pure scene-graph
// work, renderer-free, so it runs headless in tests.

import * as THREE from 'three';

import type { Snapshot } from './types';

export const COLOR_VIRTUAL = 0x7fd4ff; // light blue
export const COLOR_REAL = 0xe03131; // red
export const COLOR_TARGET = 0x2b6fe0; // blue
export const COLOR_SPHERE = 0x111111; // black reference sphere
export const STALE_AFTER_MS = 500;

export interface ConsoleScene {
  scene: THREE.Scene;
  robotChain: THREE.Line;
  joints: THREE.Group;
  realEffector: THREE.Mesh;
  virtualEffector: THREE.Mesh;
  linkSegment: THREE.Line;
  bodyMarker: THREE.AxesHelper;
  referenceSphere: THREE.Mesh;
  target: THREE.Mesh;
  dwellRing: THREE.Mesh;
}

function namedSphere(name: string, radius: number, color: number, opacity = 1.0): THREE.Mesh {
  const material = new THREE.MeshBasicMaterial({ color, transparent: opacity < 1, opacity });
  const mesh = new THREE.Mesh(new THREE.SphereGeometry(radius, 24, 16), material);
  mesh.name = name;
  return mesh;
}

export function buildScene(): ConsoleScene {
  const scene = new THREE.Scene();

  const chainMaterial = new THREE.LineBasicMaterial({ color: 0xbbbbbb });
  const robotChain = new THREE.Line(new THREE.BufferGeometry(), chainMaterial);
  robotChain.name = 'robotChain';
  scene.add(robotChain);

  const joints = new THREE.Group();
  joints.name = 'joints';
  for (let i = 0; i < 9; i++) {
    joints.add(namedSphere(`joint${i}`, 0.012, 0x888888));
  }
  scene.add(joints);

  const realEffector = namedSphere('realEffector', 0.02, COLOR_REAL);
  scene.add(realEffector);
  const virtualEffector = namedSphere('virtualEffector', 0.02, COLOR_VIRTUAL, 0.85);
  scene.add(virtualEffector);

  const linkSegment = new THREE.Line(
    new THREE.BufferGeometry(),
    new THREE.LineBasicMaterial({ color: COLOR_VIRTUAL }),
  );
  linkSegment.name = 'linkSegment';
  scene.add(linkSegment);

  const bodyMarker = new THREE.AxesHelper(0.15);
  bodyMarker.name = 'bodyMarker';
  scene.add(bodyMarker);

  const referenceSphere = new THREE.Mesh(
    new THREE.SphereGeometry(1, 32, 24),
    new THREE.MeshBasicMaterial({ color: COLOR_SPHERE, wireframe: true, transparent: true, opacity: 0.25 }),
  );
  referenceSphere.name = 'referenceSphere';
  scene.add(referenceSphere);

  const target = namedSphere('target', 1, COLOR_TARGET, 0.9); // scaled per snapshot
  scene.add(target);

  const dwellRing = new THREE.Mesh(
    new THREE.RingGeometry(1.2, 1.5, 32, 1, 0, 0),
    new THREE.MeshBasicMaterial({ color: COLOR_TARGET, side: THREE.DoubleSide }),
  );
  dwellRing.name = 'dwellRing';
  target.add(dwellRing);

  return {
    scene,
    robotChain,
    joints,
    realEffector,
    virtualEffector,
    linkSegment,
    bodyMarker,
    referenceSphere,
    target,
    dwellRing,
  };
}

function setVec(obj: THREE.Object3D, p: number[]): void {
  obj.position.set(p[0], p[1], p[2]);
}

function rotationFromRowMajor(obj: THREE.Object3D, r: number[]): void {
  const m = new THREE.Matrix4();
  m.set(r[0], r[1], r[2], 0, r[3], r[4], r[5], 0, r[6], r[7], r[8], 0, 0, 0, 0, 1);
  obj.setRotationFromMatrix(m);
}

/** Apply one snapshot to the scene graph. */
export function updateScene(cs: ConsoleScene, snap: Snapshot): void {
  const pts = snap.joint_points.map((p) => new THREE.Vector3(p[0], p[1], p[2]));
  cs.robotChain.geometry.dispose();
  cs.robotChain.geometry = new THREE.BufferGeometry().setFromPoints(pts);
  cs.joints.children.forEach((joint, i) => {
    if (i < pts.length) joint.position.copy(pts[i]);
    joint.visible = i < pts.length;
  });

  setVec(cs.realEffector, snap.effector.translation);
  setVec(cs.virtualEffector, snap.virtual.translation);

  if (snap.body) {
    cs.bodyMarker.visible = true;
    setVec(cs.bodyMarker, snap.body.translation);
    rotationFromRowMajor(cs.bodyMarker, snap.body.rotation);
    const ends = [
      new THREE.Vector3(...(snap.body.translation as [number, number, number])),
      new THREE.Vector3(...(snap.virtual.translation as [number, number, number])),
    ];
    cs.linkSegment.geometry.dispose();
    cs.linkSegment.geometry = new THREE.BufferGeometry().setFromPoints(ends);
    cs.linkSegment.visible = true;
  } else {
    cs.bodyMarker.visible = false;
    cs.linkSegment.visible = false;
  }

  setVec(cs.referenceSphere, snap.sphere.center);
  cs.referenceSphere.scale.setScalar(snap.sphere.radius);

  if (snap.target) {
    cs.target.visible = true;
    setVec(cs.target, snap.target.position);
    cs.target.scale.setScalar(snap.target.tolerance);
    const arc = Math.max(1e-4, snap.target.dwell_progress * Math.PI * 2);
    cs.dwellRing.geometry.dispose();
    cs.dwellRing.geometry = new THREE.RingGeometry(1.2, 1.5, 32, 1, 0, arc);
    cs.dwellRing.visible = snap.target.dwell_progress > 0;
  } else {
    cs.target.visible = false;
  }
}

/** Display-only interpolation between the two latest snapshots. */
export function lerpPosition(prev: number[], next: number[], alpha: number): number[] {
  const a = Math.max(0, Math.min(1, alpha));
  return [0, 1, 2].map((i) => prev[i] + (next[i] - prev[i]) * a);
}

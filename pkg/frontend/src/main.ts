// Browser entry: connect to a bodylink session (host/port from URL params),
// render the scene, and stream inputs at a fixed 30 Hz timer.

import * as THREE from 'three';

import { InputRig } from './input';
import { buildScene, lerpPosition, updateScene } from './scene';
import { ConsoleState } from './state';
import { SessionLink, sessionUrl } from './wire';
import type { WebSocketCtor } from './wire';

const INPUT_RATE_HZ = 30;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const state = new ConsoleState();
  const cs = buildScene();
  const rig = new InputRig(() => performance.now() / 1000);

  const canvas = el('view') as HTMLCanvasElement;
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  const camera = new THREE.PerspectiveCamera(50, 1, 0.01, 20);
  camera.position.set(1.6, -1.2, 1.1);
  camera.up.set(0, 0, 1);
  camera.lookAt(0.5, 0, 0.5);
  cs.scene.background = new THREE.Color(0xf4f4f4);

  function resize(): void {
    const w = canvas.clientWidth || window.innerWidth;
    const h = canvas.clientHeight || window.innerHeight;
    renderer.setSize(w, h, false);
    camera.aspect = w / h;
    camera.updateProjectionMatrix();
  }
  window.addEventListener('resize', resize);
  resize();

  const link = new SessionLink(WebSocket as unknown as WebSocketCtor);
  link.onSnapshot = (snap) => {
    state.accept(snap, performance.now());
    rig.noteTrialPhase(snap.trial.phase);
    updateScene(cs, snap);
  };
  link.onClose = () => {
    state.connection = 'disconnected';
  };

  try {
    const info = await link.connect(sessionUrl(params));
    state.connection = `session ${info.session}`;
  } catch (err) {
    el('status').textContent = String(err);
    return;
  }

  // --- inputs ------------------------------------------------------------
  window.addEventListener('keydown', (e) => rig.keyDown(e.code));
  window.addEventListener('keyup', (e) => rig.keyUp(e.code));
  let dragging = false;
  canvas.addEventListener('pointerdown', () => (dragging = true));
  window.addEventListener('pointerup', () => (dragging = false));
  window.addEventListener('pointermove', (e) => {
    if (dragging) rig.dragBody(e.movementX, e.movementY, e.shiftKey);
  });
  canvas.addEventListener('wheel', (e) => rig.wheelBody(e.deltaY), { passive: true });
  el('start').addEventListener('click', () => link.send(rig.startTrial()));
  (el('mode') as HTMLSelectElement).addEventListener('change', (e) => {
    const msg = rig.setMode((e.target as HTMLSelectElement).value);
    if (msg) link.send(msg);
  });

  setInterval(() => {
    const pads = navigator.getGamepads?.() ?? [];
    const pad = pads.find((p) => p);
    if (pad) rig.setGamepadAxes([pad.axes[1] ?? 0, pad.axes[0] ?? 0, pad.axes[3] ?? 0]);
    for (const msg of rig.tick()) link.send(msg);
  }, 1000 / INPUT_RATE_HZ);

  // --- render loop ---------------------------------------------------------
  function frame(): void {
    const now = performance.now();
    const hud = state.hud(now);
    el('status').textContent =
      `${hud.connection} | mode ${hud.mode} | ${hud.phase} ` +
      `${hud.validated}/${hud.total} | t=${hud.elapsed.toFixed(1)}s`;
    el('overlay').style.display = hud.stale ? 'flex' : 'none';
    el('dwell').style.width = `${Math.round(hud.dwellProgress * 100)}%`;
    if (state.latest && state.previous) {
      // display-only smoothing between snapshots; never fed back
      const alpha = state.interpolationAlpha(now);
      const v = lerpPosition(state.previous.virtual.translation, state.latest.virtual.translation, alpha);
      cs.virtualEffector.position.set(v[0], v[1], v[2]);
      const r = lerpPosition(state.previous.effector.translation, state.latest.effector.translation, alpha);
      cs.realEffector.position.set(r[0], r[1], r[2]);
    }
    renderer.render(cs.scene, camera);
    requestAnimationFrame(frame);
  }
  frame();
}

start();

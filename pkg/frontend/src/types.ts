// Wire protocol types: JSON messages exchanged with a bodylink session server.

export interface TransformJson {
  rotation: number[]; // 9 numbers, row-major
  translation: number[]; // 3 numbers, meters
}

export interface SnapshotTarget {
  index: number;
  position: number[];
  tolerance: number;
  dwell_progress: number;
}

export interface Snapshot {
  type: 'snapshot';
  seq: number;
  t: number;
  mode: string;
  q: number[];
  effector: TransformJson;
  virtual: TransformJson;
  body: TransformJson | null;
  link_body: number[] | null;
  joint_points: number[][];
  target: SnapshotTarget | null;
  trial: { phase: string; validated: number; total: number };
  sphere: { center: number[]; radius: number };
  flags: number;
  warnings: string[];
  session: string;
  config_hash: string;
}

export interface HelloMessage {
  type: 'hello';
  version: number;
  session?: string;
  config_hash?: string;
}

export interface BodyPoseMessage {
  type: 'body_pose';
  t: number;
  position: number[];
  q: { w: number; x: number; y: number; z: number };
}

export interface JoystickMessage {
  type: 'joystick';
  t: number;
  deflection: number[];
}

export interface SetModeMessage {
  type: 'set_mode';
  t: number;
  mode: string;
}

export interface StartTrialMessage {
  type: 'start_trial';
  t: number;
}

export interface HeartbeatMessage {
  type: 'heartbeat';
  t: number;
}

export type OutboundMessage =
  | HelloMessage
  | BodyPoseMessage
  | JoystickMessage
  | SetModeMessage
  | StartTrialMessage
  | HeartbeatMessage;

export const WIRE_VERSION = 1;

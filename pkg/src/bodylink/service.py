"""Live networked sessions: the wall-clock control loop behind ``serve``.

One loop owns the SessionCore; reader threads push inbound messages onto an
ordered queue and the loop samples latest-wins per stream at each 100 Hz tick
(a zero-order hold). Snapshots fan out read-only to every connected console at
the telemetry rate. Integration dt always comes from the tick schedule.
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from pathlib import Path

import numpy as np

from . import logio, se3, wire
from .config import SessionConfig
from .control import BodyState, Mode, velocity_from_deflection
from .se3 import Transform
from .session import BODY_STALE_AFTER, SessionCore


class _Client:
    def __init__(self, conn: wire.WebSocketConnection, name: str):
        self.conn = conn
        self.name = name
        self.out: queue.Queue = queue.Queue(maxsize=64)
        self.alive = True

    def enqueue(self, msg: dict) -> None:
        # latest-wins: drop the oldest snapshot when the console lags
        try:
            self.out.put_nowait(msg)
        except queue.Full:
            try:
                self.out.get_nowait()
            except queue.Empty:
                pass
            try:
                self.out.put_nowait(msg)
            except queue.Full:
                pass


class LiveServer:
    """Serves one session to any number of consoles over the wire protocol."""

    def __init__(self, cfg: SessionConfig, host: str = "127.0.0.1", port: int = 0,
                 out_dir=None, max_seconds: float = None, session_id: str = None):
        self.cfg = cfg
        self.host = host
        self.out_dir = Path(out_dir) if out_dir else None
        self.max_seconds = max_seconds
        self.session_id = session_id or f"live-{int(time.time())}"
        self.core = SessionCore(
            arm=cfg.arm,
            servo_cfg=cfg.servo,
            mode_cfg=cfg.mode,
            trial_spec=cfg.trial,
            home_angles=cfg.home_angles,
            session_id=self.session_id,
            config_digest=cfg.digest,
        )
        self._inbound: queue.Queue = queue.Queue()
        self._clients: list = []
        self._clients_lock = threading.Lock()
        self._stop = threading.Event()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(8)
        self.port = self._listener.getsockname()[1]
        self._threads: list = []
        self.event_rows: list = []
        self.telemetry_rows: list = []

    # --- threads ---------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            try:
                conn = wire.accept_websocket(sock)
                conn.send_json(wire.server_hello(self.session_id, self.cfg.digest))
                hello = conn.recv_json(timeout=5.0)
                wire.check_client_hello(hello)
            except (wire.WireClosed, OSError, ValueError) as exc:
                try:
                    sock.close()
                except OSError:
                    pass
                continue
            client = _Client(conn, f"{addr[0]}:{addr[1]}")
            with self._clients_lock:
                self._clients.append(client)
            self._threads.append(_spawn(self._reader_loop, client))
            self._threads.append(_spawn(self._writer_loop, client))

    def _reader_loop(self, client: _Client) -> None:
        while not self._stop.is_set() and client.alive:
            try:
                msg = client.conn.recv_json()
            except (wire.WireClosed, OSError, ValueError):
                client.alive = False
                self._inbound.put(("disconnect", client.name, None))
                return
            self._inbound.put(("msg", client.name, msg))

    def _writer_loop(self, client: _Client) -> None:
        while not self._stop.is_set() and client.alive:
            try:
                msg = client.out.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                client.conn.send_json(msg)
            except (wire.WireClosed, OSError):
                client.alive = False
                return

    def _broadcast(self, msg: dict) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for c in clients:
            if c.alive:
                c.enqueue(msg)

    # --- session loop ------------------------------------------------------

    def run(self) -> None:
        """Blocks until the trial completes, every client leaves mid-trial,
        max_seconds elapses, or stop() is called."""
        self._threads.append(_spawn(self._accept_loop))
        cfg = self.cfg
        dt = 1.0 / cfg.tick_rate_control
        self.telemetry_rows.append(
            logio.telemetry_header(self.session_id, cfg.digest, self.core.mode_cfg.mode.value, "live", 0, cfg.tick_rate_control)
        )
        self.event_rows.append(
            logio.event_header(self.session_id, cfg.digest, cfg.trial, self.core.mode_cfg.mode.value, "live", 0)
        )
        body = BodyState(cfg.body_start, 0.0)
        last_body_wall = None
        deflection = np.zeros(3)
        had_client = False
        start_wall = time.perf_counter()
        tick = 0
        done_linger = None
        while not self._stop.is_set():
            now = time.perf_counter()
            t = tick * dt
            # drain inbound, latest-wins per stream
            while True:
                try:
                    kind, name, msg = self._inbound.get_nowait()
                except queue.Empty:
                    break
                if kind == "disconnect":
                    with self._clients_lock:
                        self._clients = [c for c in self._clients if c.alive]
                    continue
                mtype = msg.get("type")
                if mtype == "body_pose":
                    rot = se3.quat_to_matrix(
                        float(msg["q"]["w"]), float(msg["q"]["x"]), float(msg["q"]["y"]), float(msg["q"]["z"])
                    )
                    body = BodyState(Transform(rot, np.asarray(msg["position"], dtype=float)), t)
                    last_body_wall = now
                elif mtype == "joystick":
                    deflection = np.asarray(msg["deflection"], dtype=float)
                elif mtype == "set_mode":
                    self.core.set_mode(Mode(msg["mode"]))
                elif mtype == "start_trial":
                    if self.core.phase in ("idle",) and body is not None:
                        self.core.start_trial(t, BodyState(body.pose, t))
                elif mtype == "heartbeat":
                    self._broadcast({"type": "heartbeat_ack", "t_client": msg.get("t"), "t_session": t})

            with self._clients_lock:
                n_clients = sum(1 for c in self._clients if c.alive)
            if n_clients:
                had_client = True
            stale = (
                self.core.mode_cfg.mode in (Mode.BODY, Mode.DUAL)
                and last_body_wall is not None
                and (now - last_body_wall) > BODY_STALE_AFTER
            )
            velocity = velocity_from_deflection(self.core.mode_cfg, deflection)
            events, row = self.core.tick(t, body, velocity, body_stale=stale)
            self.event_rows.extend(events)
            self.telemetry_rows.append(row)
            for ev in events:
                self._broadcast({"type": "event", **ev})
            if int(t * cfg.tick_rate_telemetry) != int((t + dt) * cfg.tick_rate_telemetry):
                self._broadcast(self.core.snapshot(t))

            if self.core.phase == "done":
                if done_linger is None:
                    done_linger = now + 1.0
                elif now > done_linger:
                    break
            if had_client and n_clients == 0:
                if self.core.phase == "running":
                    self.event_rows.append(self.core.abort(t, "all consoles disconnected"))
                break
            if self.max_seconds is not None and (now - start_wall) > self.max_seconds:
                if self.core.phase == "running":
                    self.event_rows.append(self.core.abort(t, "session time limit"))
                break
            tick += 1
            next_wall = start_wall + tick * dt
            delay = next_wall - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
        self._write_logs()
        self.stop()

    def _write_logs(self) -> None:
        if self.out_dir is None:
            return
        logio.write_jsonl(self.out_dir / f"{self.session_id}_events.jsonl", self.event_rows)
        logio.write_jsonl(self.out_dir / f"{self.session_id}_telemetry.jsonl", self.telemetry_rows)

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._clients_lock:
            for c in self._clients:
                c.alive = False
                c.conn.close()
            self._clients = []


def _spawn(fn, *args) -> threading.Thread:
    t = threading.Thread(target=fn, args=args, daemon=True)
    t.start()
    return t

"""Wire protocol: JSON messages as WebSocket text frames.

A deliberately small RFC 6455 subset (no extensions, no compression) so the
browser console connects natively and synthetic Python clients need nothing
beyond the standard library. Every frame carries one JSON document; the
application handshake is a hello exchange carrying the protocol version and
the session config hash.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading

WIRE_VERSION = 1
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WireClosed(ConnectionError):
    pass


def _encode_frame(opcode: int, payload: bytes, mask: bool) -> bytes:
    head = bytes([0x80 | opcode])
    length = len(payload)
    mask_bit = 0x80 if mask else 0
    if length < 126:
        head += bytes([mask_bit | length])
    elif length < 1 << 16:
        head += bytes([mask_bit | 126]) + struct.pack(">H", length)
    else:
        head += bytes([mask_bit | 127]) + struct.pack(">Q", length)
    if mask:
        key = os.urandom(4)
        head += key
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return head + payload


class WebSocketConnection:
    """One upgraded socket; thread-safe sends, single-reader receives.

    ``initial`` carries bytes that arrived bundled with the HTTP handshake.
    """

    def __init__(self, sock: socket.socket, mask_outgoing: bool, initial: bytes = b""):
        self._sock = sock
        self._mask = mask_outgoing
        self._send_lock = threading.Lock()
        self._fragments: list = []
        self._buffer = initial
        self.closed = False

    def _recv_exact(self, n: int) -> bytes:
        while len(self._buffer) < n:
            chunk = self._sock.recv(4096)
            if not chunk:
                raise WireClosed("socket closed")
            self._buffer += chunk
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def _decode_frame(self) -> tuple:
        b0, b1 = self._recv_exact(2)
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        if length == 126:
            (length,) = struct.unpack(">H", self._recv_exact(2))
        elif length == 127:
            (length,) = struct.unpack(">Q", self._recv_exact(8))
        key = self._recv_exact(4) if masked else None
        payload = self._recv_exact(length) if length else b""
        if key:
            payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        return fin, opcode, payload

    def send_json(self, obj) -> None:
        self.send_text(json.dumps(obj, separators=(",", ":")))

    def send_text(self, text: str) -> None:
        frame = _encode_frame(OP_TEXT, text.encode("utf-8"), self._mask)
        with self._send_lock:
            if self.closed:
                raise WireClosed("connection closed")
            self._sock.sendall(frame)

    def recv_json(self, timeout: float = None):
        """Next JSON message; answers pings, raises WireClosed on close."""
        self._sock.settimeout(timeout)
        while True:
            fin, opcode, payload = self._decode_frame()
            if opcode == OP_PING:
                with self._send_lock:
                    self._sock.sendall(_encode_frame(OP_PONG, payload, self._mask))
                continue
            if opcode == OP_PONG:
                continue
            if opcode == OP_CLOSE:
                self.close()
                raise WireClosed("peer closed")
            if opcode in (OP_TEXT, OP_CONT):
                self._fragments.append(payload)
                if not fin:
                    continue
                data = b"".join(self._fragments)
                self._fragments = []
                return json.loads(data.decode("utf-8"))

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        try:
            with self._send_lock:
                self._sock.sendall(_encode_frame(OP_CLOSE, b"", self._mask))
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass


def _http_headers(raw: bytes) -> dict:
    headers = {}
    for line in raw.split(b"\r\n")[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.decode("latin1").strip().lower()] = v.decode("latin1").strip()
    return headers


def accept_websocket(sock: socket.socket) -> WebSocketConnection:
    """Perform the server side of the HTTP upgrade on a fresh TCP connection."""
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise WireClosed("client vanished during handshake")
        data += chunk
    head, _, leftover = data.partition(b"\r\n\r\n")
    headers = _http_headers(head)
    key = headers.get("sec-websocket-key")
    if headers.get("upgrade", "").lower() != "websocket" or key is None:
        sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        sock.close()
        raise WireClosed("not a websocket upgrade")
    accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
    sock.sendall(
        (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        ).encode()
    )
    return WebSocketConnection(sock, mask_outgoing=False, initial=leftover)


def connect_websocket(host: str, port: int, path: str = "/", timeout: float = 5.0) -> WebSocketConnection:
    """Client side of the upgrade."""
    sock = socket.create_connection((host, port), timeout=timeout)
    key = base64.b64encode(os.urandom(16)).decode()
    sock.sendall(
        (
            f"GET {path} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n\r\n"
        ).encode()
    )
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise WireClosed("server vanished during handshake")
        data += chunk
    head, _, leftover = data.partition(b"\r\n\r\n")
    status = head.split(b"\r\n", 1)[0]
    if b"101" not in status:
        sock.close()
        raise WireClosed(f"upgrade refused: {status.decode('latin1')}")
    expected = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
    if _http_headers(head).get("sec-websocket-accept") != expected:
        sock.close()
        raise WireClosed("bad Sec-WebSocket-Accept")
    sock.settimeout(None)
    return WebSocketConnection(sock, mask_outgoing=True, initial=leftover)


def server_hello(session_id: str, config_digest: str) -> dict:
    return {"type": "hello", "version": WIRE_VERSION, "session": session_id, "config_hash": config_digest}


def check_client_hello(msg: dict) -> None:
    if msg.get("type") != "hello":
        raise WireClosed(f"expected hello, got {msg.get('type')!r}")
    if msg.get("version") != WIRE_VERSION:
        raise WireClosed(f"wire version {msg.get('version')} != supported {WIRE_VERSION}")

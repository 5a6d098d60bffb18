"""Client for an external probability-model server.

Wire protocol (shared with any conforming server): every frame is a
u32-LE payload length, one type byte, then the payload; all integers are
little-endian.

  INIT      (1)  client->server, empty payload
  INFO      (2)  u32 vocab_size, u32 max_context, u8 precision_bits, u64 fingerprint
  PREDICT   (3)  u32 context_len, context token ids as u32 each
  PMF       (4)  vocab_size u32 frequencies summing to 2**precision_bits
  SCORE_SEQ (5)  u32 len, token ids; server replies len PMF frames, frame k
                 conditioned on tokens before position k
  ERROR     (255) u16 code, UTF-8 message

Token ids are the Unicode code points of the serialized text, so a client
can tokenize without a round trip; servers advertise vocab_size covering
the code points they model. Requests are strictly sequential per
connection; parallel workers open one connection each.

Endpoints: ``host:port``, ``tcp:host:port``, or ``stdio:<command line>``
(frames over the child's stdin/stdout). The ``LMGC_BRIDGE`` environment
variable supplies the default.
"""

from __future__ import annotations

import os
import shlex
import socket
import struct
import subprocess

import numpy as np

from ..errors import BridgeUnavailableError, ConfigError, WindowFullError
from .builtin import MODEL_ID_BRIDGE, _SessionBase
from .pmf import QuantizedPMF

MSG_INIT = 1
MSG_INFO = 2
MSG_PREDICT = 3
MSG_PMF = 4
MSG_SCORE_SEQ = 5
MSG_ERROR = 255

ENDPOINT_ENV_VAR = "LMGC_BRIDGE"


class _SocketTransport:
    def __init__(self, host: str, port: int):
        try:
            self._sock = socket.create_connection((host, port), timeout=300)
        except OSError as exc:
            raise BridgeUnavailableError(f"cannot connect to {host}:{port}: {exc}") from exc

    def send(self, data: bytes) -> None:
        try:
            self._sock.sendall(data)
        except OSError as exc:
            raise BridgeUnavailableError(f"send failed: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        chunks = []
        while n:
            try:
                chunk = self._sock.recv(min(n, 1 << 20))
            except OSError as exc:
                raise BridgeUnavailableError(f"recv failed: {exc}") from exc
            if not chunk:
                raise BridgeUnavailableError("server closed the connection mid-frame")
            chunks.append(chunk)
            n -= len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class _StdioTransport:
    def __init__(self, command: str):
        try:
            self._proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as exc:
            raise BridgeUnavailableError(f"cannot spawn {command!r}: {exc}") from exc

    def send(self, data: bytes) -> None:
        try:
            self._proc.stdin.write(data)
            self._proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise BridgeUnavailableError(f"stdio send failed: {exc}") from exc

    def recv_exact(self, n: int) -> bytes:
        data = self._proc.stdout.read(n)
        if data is None or len(data) != n:
            raise BridgeUnavailableError("stdio server closed mid-frame")
        return data

    def close(self) -> None:
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        self._proc.terminate()
        self._proc.wait(timeout=10)


def _open_transport(endpoint: str):
    if endpoint.startswith("stdio:"):
        return _StdioTransport(endpoint[len("stdio:"):])
    hostport = endpoint[len("tcp:"):] if endpoint.startswith("tcp:") else endpoint
    host, sep, port = hostport.rpartition(":")
    if not sep:
        raise ConfigError(f"bridge endpoint {endpoint!r} is not host:port or stdio:<cmd>")
    return _SocketTransport(host or "127.0.0.1", int(port))


class BridgeModel:
    """Connects at construction, performs INIT, then serves sessions."""

    kind = "bridge"

    def __init__(self, endpoint: str | None = None):
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise BridgeUnavailableError(
                f"no bridge endpoint (flag or {ENDPOINT_ENV_VAR} environment variable)"
            )
        self.endpoint = endpoint
        self._transport = _open_transport(endpoint)
        self.model_id = MODEL_ID_BRIDGE
        self._request(MSG_INIT, b"")
        kind, payload = self._read_frame()
        if kind != MSG_INFO or len(payload) != 17:
            raise BridgeUnavailableError(f"bad INIT reply (type {kind}, {len(payload)} bytes)")
        self.vocab_size, self.max_context, self.precision_bits, self.fingerprint = struct.unpack(
            "<IIBQ", payload
        )
        if self.vocab_size < 2 or self.precision_bits > 30:
            raise BridgeUnavailableError("implausible INFO frame")

    # -- framing ----------------------------------------------------------

    def _request(self, kind: int, payload: bytes) -> None:
        self._transport.send(struct.pack("<IB", len(payload), kind) + payload)

    def _read_frame(self) -> tuple[int, bytes]:
        head = self._transport.recv_exact(5)
        length, kind = struct.unpack("<IB", head)
        payload = self._transport.recv_exact(length) if length else b""
        if kind == MSG_ERROR:
            code = struct.unpack("<H", payload[:2])[0] if len(payload) >= 2 else 0
            raise BridgeUnavailableError(
                f"server error {code}: {payload[2:].decode('utf-8', 'replace')}"
            )
        return kind, payload

    def _read_pmf(self) -> np.ndarray:
        kind, payload = self._read_frame()
        if kind != MSG_PMF or len(payload) != 4 * self.vocab_size:
            raise BridgeUnavailableError(f"bad PMF frame (type {kind}, {len(payload)} bytes)")
        freqs = np.frombuffer(payload, dtype="<u4").astype(np.int64)
        if int(freqs.sum()) != 1 << self.precision_bits or int(freqs.min()) < 1:
            raise BridgeUnavailableError("PMF frame does not sum to 2**precision_bits with min 1")
        return freqs

    # -- model API ---------------------------------------------------------

    def predict(self, context) -> np.ndarray:
        ids = np.asarray(context, dtype="<u4")
        self._request(MSG_PREDICT, struct.pack("<I", ids.size) + ids.tobytes())
        return self._read_pmf()

    def score_sequence(self, tokens) -> list[np.ndarray]:
        ids = np.asarray(tokens, dtype="<u4")
        self._request(MSG_SCORE_SEQ, struct.pack("<I", ids.size) + ids.tobytes())
        return [self._read_pmf() for _ in range(ids.size)]

    def open_session(self, window_size: int) -> "BridgeSession":
        if window_size > self.max_context:
            raise ConfigError(
                f"window_size {window_size} exceeds server max_context {self.max_context}"
            )
        return BridgeSession(self, window_size)

    def close(self) -> None:
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class BridgeSession(_SessionBase):
    def __init__(self, model: BridgeModel, window_size: int):
        super().__init__(window_size)
        self.model = model
        self._context: list[int] = []

    def pmf_next(self) -> QuantizedPMF:
        self._check_window()
        return QuantizedPMF(self.model.predict(self._context), self.model.precision_bits)

    def advance(self, token: int) -> None:
        token = int(token)
        if not 0 <= token < self.model.vocab_size:
            raise ValueError(f"token {token} out of range for vocab {self.model.vocab_size}")
        self._check_window()
        self._context.append(token)
        self.in_window += 1

    def reset(self) -> None:
        self._context.clear()
        self.in_window = 0

    def score_window(self, tokens) -> list[np.ndarray]:
        """Teacher-forced frequencies for a whole window (encode fast path)."""
        if len(tokens) > self.window_size:
            raise WindowFullError("window longer than window_size")
        return self.model.score_sequence(tokens)

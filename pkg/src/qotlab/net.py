"""Duplex framed channels: in-process pipes and stream sockets.

Both kinds speak the same bytes: a ``QOTF`` hello with a u16 version, then
frames from :mod:`qotlab.wire`. Frames are buffered by ``send`` and written
by ``flush``, which closes the current protocol message.
"""

from __future__ import annotations

import queue
import socket
import threading
import time
from dataclasses import dataclass

from . import wire
from .errors import HandshakeError, ProtocolError, QotError
from .wire import FrameType

DEFAULT_TIMEOUT = 60.0


class PeerAbort(QotError):
    """The peer sent an ABORT frame."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class FrameRecord:
    direction: str  # "out" or "in"
    message: int
    ftype: FrameType
    payload: bytes

    @property
    def byte_length(self) -> int:
        return wire.HEADER_SIZE + len(self.payload)


class Channel:
    """Base class: framing, message boundaries and a per-endpoint log."""

    def __init__(self, timeout: float = DEFAULT_TIMEOUT):
        self.timeout = timeout
        self.log: list[FrameRecord] = []
        self._pending: list[tuple[FrameType, bytes]] = []
        self._msg_counter = 0
        self._in_message_open = False
        self._current_in_msg = -1
        self.closed = False

    # transport hooks
    def _write(self, data: bytes) -> None:
        raise NotImplementedError

    def _read_exact(self, n: int) -> bytes:
        raise NotImplementedError

    def close(self) -> None:
        self.closed = True

    # framing
    def handshake(self) -> None:
        self._write(wire.hello())
        wire.check_hello(self._read_exact(wire.HELLO_SIZE))

    def send(self, ftype: FrameType, payload: bytes) -> None:
        if len(payload) > wire.MAX_FRAME:
            raise wire.FrameTooLarge(f"payload of {len(payload)} bytes exceeds cap")
        self._pending.append((FrameType(ftype), bytes(payload)))

    def flush(self) -> None:
        if not self._pending:
            return
        msg = self._msg_counter
        self._msg_counter += 1
        chunks = []
        for i, (ftype, payload) in enumerate(self._pending):
            chunks.append(wire.encode_frame(ftype, payload, last=i == len(self._pending) - 1))
            self.log.append(FrameRecord("out", msg, ftype, payload))
        self._pending.clear()
        self._write(b"".join(chunks))

    def recv(self) -> tuple[FrameType, bytes]:
        length, ftype, last = wire.decode_header(self._read_exact(wire.HEADER_SIZE))
        payload = self._read_exact(length) if length else b""
        if not self._in_message_open:
            self._current_in_msg = self._msg_counter
            self._msg_counter += 1
            self._in_message_open = True
        self.log.append(FrameRecord("in", self._current_in_msg, ftype, payload))
        if last:
            self._in_message_open = False
        return ftype, payload

    def recv_expect(self, ftype: FrameType) -> bytes:
        got, payload = self.recv()
        if got is FrameType.ABORT:
            raise PeerAbort(payload.decode(errors="replace"))
        if got is not ftype:
            raise ProtocolError(f"expected {ftype.name}, got {got.name}")
        return payload

    def send_abort(self, reason: str) -> None:
        self._pending.clear()
        self.send(FrameType.ABORT, reason.encode())
        self.flush()

    @property
    def message_count(self) -> int:
        return self._msg_counter


class _BytePipe:
    """One direction of an in-process byte stream."""

    def __init__(self):
        self._q: queue.Queue[bytes] = queue.Queue()
        self._buf = bytearray()

    def write(self, data: bytes) -> None:
        self._q.put(bytes(data))

    def read_exact(self, n: int, timeout: float) -> bytes:
        deadline = time.monotonic() + timeout
        while len(self._buf) < n:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError(f"no data from peer within {timeout}s")
            try:
                self._buf.extend(self._q.get(timeout=remaining))
            except queue.Empty:
                raise TimeoutError(f"no data from peer within {timeout}s") from None
        out = bytes(self._buf[:n])
        del self._buf[:n]
        return out


class MemChannel(Channel):
    def __init__(self, outgoing: _BytePipe, incoming: _BytePipe, timeout: float = DEFAULT_TIMEOUT):
        super().__init__(timeout)
        self._out = outgoing
        self._in = incoming

    def _write(self, data: bytes) -> None:
        self._out.write(data)

    def _read_exact(self, n: int) -> bytes:
        return self._in.read_exact(n, self.timeout)


def mem_pair(timeout: float = DEFAULT_TIMEOUT, handshake: bool = True) -> tuple[MemChannel, MemChannel]:
    """Two connected in-process endpoints (``mem:``)."""
    a_to_b, b_to_a = _BytePipe(), _BytePipe()
    a = MemChannel(a_to_b, b_to_a, timeout)
    b = MemChannel(b_to_a, a_to_b, timeout)
    if handshake:
        # hellos are buffered by the pipes, so the two sides can run sequentially
        a._write(wire.hello())
        b._write(wire.hello())
        wire.check_hello(a._read_exact(wire.HELLO_SIZE))
        wire.check_hello(b._read_exact(wire.HELLO_SIZE))
    return a, b


class SocketChannel(Channel):
    def __init__(self, sock: socket.socket, timeout: float = DEFAULT_TIMEOUT):
        super().__init__(timeout)
        self.sock = sock
        self.sock.settimeout(timeout)

    def _write(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise ProtocolError(f"socket write failed: {exc}") from exc

    def _read_exact(self, n: int) -> bytes:
        chunks = bytearray()
        while len(chunks) < n:
            try:
                part = self.sock.recv(n - len(chunks))
            except socket.timeout as exc:
                raise TimeoutError(f"no data from peer within {self.timeout}s") from exc
            except OSError as exc:
                raise ProtocolError(f"socket read failed: {exc}") from exc
            if not part:
                raise ProtocolError("peer closed the connection")
            chunks.extend(part)
        return bytes(chunks)

    def close(self) -> None:
        super().close()
        try:
            self.sock.close()
        except OSError:
            pass


def parse_endpoint(endpoint: str) -> tuple[str, int] | None:
    """``"mem:"`` -> None, ``"host:port"`` -> (host, port)."""
    if endpoint == "mem:":
        return None
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"cannot parse endpoint {endpoint!r}; use host:port or mem:")
    return host, int(port)


def serve(endpoint: str, timeout: float = DEFAULT_TIMEOUT, ready: threading.Event | None = None,
          bound: list | None = None) -> SocketChannel:
    """Accept one connection and perform the hello exchange."""
    host, port = parse_endpoint(endpoint) or ("127.0.0.1", 0)
    with socket.create_server((host, port)) as srv:
        srv.settimeout(timeout)
        if bound is not None:
            bound.append(srv.getsockname()[1])
        if ready is not None:
            ready.set()
        conn, _ = srv.accept()
    chan = SocketChannel(conn, timeout)
    chan.handshake()
    return chan


def connect(endpoint: str, timeout: float = DEFAULT_TIMEOUT, retries: int = 50) -> SocketChannel:
    addr = parse_endpoint(endpoint)
    if addr is None:
        raise ValueError("connect() needs host:port; use mem_pair() for in-process channels")
    last_exc: Exception | None = None
    for _ in range(retries):
        try:
            sock = socket.create_connection(addr, timeout=timeout)
            break
        except OSError as exc:
            last_exc = exc
            time.sleep(0.1)
    else:
        raise ProtocolError(f"could not connect to {endpoint}: {last_exc}")
    chan = SocketChannel(sock, timeout)
    chan.handshake()
    return chan


def socket_pair(timeout: float = DEFAULT_TIMEOUT) -> tuple[SocketChannel, SocketChannel]:
    """Two connected localhost TCP endpoints, hello already exchanged."""
    ready = threading.Event()
    bound: list[int] = []
    result: dict[str, object] = {}

    def _server():
        try:
            result["server"] = serve("127.0.0.1:0", timeout, ready, bound)
        except Exception as exc:  # surfaced below
            result["error"] = exc
            ready.set()

    t = threading.Thread(target=_server, daemon=True)
    t.start()
    if not ready.wait(timeout):
        raise HandshakeError("server did not start")
    if "error" in result:
        raise result["error"]  # type: ignore[misc]
    client = connect(f"127.0.0.1:{bound[0]}", timeout)
    t.join(timeout)
    if "error" in result:
        raise result["error"]  # type: ignore[misc]
    return result["server"], client  # type: ignore[return-value]

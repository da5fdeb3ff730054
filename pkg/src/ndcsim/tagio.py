"""Bit-exact persistence and network transport for tag streams.

File layout: a fixed 38-byte little-endian header followed by the tags as
signed 64-bit femtosecond values.  Wire layout: the same header once per
connection, then length-prefixed frames of consecutive tags, terminated by a
zero-length sentinel frame.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    ParameterError,
    TagFormatError,
    TransportError,
    TruncatedFileError,
    UnsortedTagsError,
    VersionMismatchError,
)
from .streams import TagStream

MAGIC = b"NDCTAG01"
VERSION = 1

_HEADER = struct.Struct("<8sHIQQQ")
HEADER_SIZE = _HEADER.size  # 8 + 2 + 4 + 8 + 8 + 8 = 38 bytes

_FRAME_LEN = struct.Struct("<I")
DEFAULT_BATCH = 4096


@dataclass(frozen=True)
class TagFileHeader:
    site_id: int
    resolution_fs: int
    tag_count: int
    acquisition_span_fs: int

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC, VERSION, self.site_id, self.resolution_fs,
            self.tag_count, self.acquisition_span_fs,
        )

    @classmethod
    def unpack(cls, raw: bytes) -> "TagFileHeader":
        if len(raw) < HEADER_SIZE:
            raise TruncatedFileError(
                f"header truncated: expected {HEADER_SIZE} bytes, got {len(raw)}"
            )
        magic, version, site_id, resolution, count, span = _HEADER.unpack(raw[:HEADER_SIZE])
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise VersionMismatchError(f"unsupported version {version}, expected {VERSION}")
        return cls(site_id, resolution, count, span)


def _header_for(stream: TagStream) -> TagFileHeader:
    return TagFileHeader(
        site_id=stream.site_id,
        resolution_fs=stream.resolution_fs,
        tag_count=len(stream),
        acquisition_span_fs=stream.acquisition_span_fs,
    )


def write_tags(stream: TagStream, destination) -> int:
    """Serialize a stream; returns the byte count written.

    ``destination`` is a path or a writable binary file object.
    """
    payload = stream.tags.astype("<i8").tobytes()
    raw = _header_for(stream).pack() + payload
    if hasattr(destination, "write"):
        destination.write(raw)
    else:
        with open(destination, "wb") as f:
            f.write(raw)
    return len(raw)


def read_tags(source) -> TagStream:
    """Parse and validate a serialized stream; rejects rather than repairs."""
    if hasattr(source, "read"):
        raw = source.read()
    else:
        with open(source, "rb") as f:
            raw = f.read()
    header = TagFileHeader.unpack(raw)
    payload = raw[HEADER_SIZE:]
    expected = header.tag_count * 8
    if len(payload) != expected:
        raise TruncatedFileError(
            f"payload truncated: expected {header.tag_count} tags "
            f"({expected} bytes), got {len(payload) // 8} ({len(payload)} bytes)"
        )
    tags = np.frombuffer(payload, dtype="<i8").astype(np.int64)
    return TagStream(
        tags=tags,
        resolution_fs=header.resolution_fs,
        site_id=header.site_id,
        acquisition_span_fs=header.acquisition_span_fs,
    )


# ---------------------------------------------------------------------------
# Wire transport


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        try:
            chunk = sock.recv(n - len(buf))
        except OSError as exc:
            raise TransportError(f"connection error: {exc}") from exc
        if not chunk:
            raise TransportError(
                f"connection closed mid-message: expected {n} bytes, got {len(buf)}"
            )
        buf.extend(chunk)
    return bytes(buf)


def site_send(stream: TagStream, connection: socket.socket, batch: int = DEFAULT_BATCH) -> None:
    """Send one stream: header, <= batch tags per frame, zero-length sentinel."""
    if batch <= 0:
        raise ParameterError("batch must be > 0")
    try:
        connection.sendall(_header_for(stream).pack())
        tags = stream.tags.astype("<i8")
        for start in range(0, tags.size, batch):
            chunk = tags[start : start + batch].tobytes()
            connection.sendall(_FRAME_LEN.pack(len(chunk)) + chunk)
        connection.sendall(_FRAME_LEN.pack(0))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def receive_stream(connection: socket.socket) -> TagStream:
    """Receive one stream; validates framing and per-frame monotonicity."""
    header = TagFileHeader.unpack(_recv_exact(connection, HEADER_SIZE))
    chunks: list[np.ndarray] = []
    last = None
    total = 0
    while True:
        (length,) = _FRAME_LEN.unpack(_recv_exact(connection, _FRAME_LEN.size))
        if length == 0:
            break
        if length % 8 != 0:
            raise TransportError(f"frame length {length} not a multiple of 8")
        frame = np.frombuffer(_recv_exact(connection, length), dtype="<i8").astype(np.int64)
        if frame.size > 1 and np.any(np.diff(frame) < 0):
            raise TransportError("frame payload not nondecreasing")
        if last is not None and frame.size and frame[0] < last:
            raise TransportError("tags decrease across frame boundary")
        if frame.size:
            last = int(frame[-1])
        total += frame.size
        chunks.append(frame)
    if total != header.tag_count:
        raise TagFormatError(
            f"tag count mismatch: header says {header.tag_count}, received {total}"
        )
    tags = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    return TagStream(
        tags=tags,
        resolution_fs=header.resolution_fs,
        site_id=header.site_id,
        acquisition_span_fs=header.acquisition_span_fs,
    )


def send_to_terminal(stream: TagStream, address: tuple[str, int], batch: int = DEFAULT_BATCH) -> None:
    """Connect to a terminal and send one stream."""
    try:
        with socket.create_connection(address, timeout=30.0) as sock:
            site_send(stream, sock, batch)
            # Wait for the terminal to acknowledge or reject the stream.
            verdict = _recv_exact(sock, 1)
    except OSError as exc:
        raise TransportError(f"cannot reach terminal at {address[0]}:{address[1]}: {exc}") from exc
    if verdict != b"A":
        raise TransportError("terminal rejected the stream (duplicate site?)")


class Terminal:
    """Accepts one connection per site and collects their tag streams.

    A second connection presenting an already-seen site id is rejected.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._server = socket.create_server((host, port))
        self._server.settimeout(60.0)
        self.streams: dict[int, TagStream] = {}

    @property
    def port(self) -> int:
        return self._server.getsockname()[1]

    def collect(self, n_sites: int = 2) -> dict[int, TagStream]:
        """Block until ``n_sites`` distinct sites delivered their streams."""
        try:
            while len(self.streams) < n_sites:
                conn, _addr = self._server.accept()
                with conn:
                    stream = receive_stream(conn)
                    if stream.site_id in self.streams:
                        conn.sendall(b"R")
                        continue
                    self.streams[stream.site_id] = stream
                    conn.sendall(b"A")
        except socket.timeout as exc:
            raise TransportError("timed out waiting for site connections") from exc
        finally:
            self.close()
        return self.streams

    def close(self) -> None:
        try:
            self._server.close()
        except OSError:
            pass

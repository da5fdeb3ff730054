"""Serialization and transport tests: byte-exact round trips, framing, errors."""

import io
import socket
import struct
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndcsim.errors import (
    BadMagicError,
    TagFormatError,
    TransportError,
    TruncatedFileError,
    UnsortedTagsError,
    VersionMismatchError,
)
from ndcsim.streams import TagStream
from ndcsim.tagio import (
    HEADER_SIZE,
    MAGIC,
    Terminal,
    TagFileHeader,
    read_tags,
    receive_stream,
    send_to_terminal,
    site_send,
    write_tags,
)


def stream_of(tags, resolution_fs=1000, site_id=0, span=None):
    tags = np.asarray(tags, dtype=np.int64)
    if span is None:
        span = int(tags[-1]) if tags.size else 0
    return TagStream(tags=tags, resolution_fs=resolution_fs, site_id=site_id,
                     acquisition_span_fs=span)


class TestFileFormat:
    def test_header_size(self):
        assert HEADER_SIZE == 38

    def test_empty_stream_is_header_only(self):
        buf = io.BytesIO()
        n = write_tags(stream_of([]), buf)
        assert n == 38
        assert len(buf.getvalue()) == 38

    def test_round_trip_bytes_identical(self):
        s = stream_of([0, 1000, 5000, 5000, 123456789], site_id=7, span=10**9)
        buf = io.BytesIO()
        write_tags(s, buf)
        raw1 = buf.getvalue()
        back = read_tags(io.BytesIO(raw1))
        assert back == s
        assert back.site_id == 7
        assert back.acquisition_span_fs == 10**9
        buf2 = io.BytesIO()
        write_tags(back, buf2)
        assert buf2.getvalue() == raw1

    def test_path_round_trip(self, tmp_path):
        s = stream_of(np.arange(1000) * 12345, site_id=3)
        p = tmp_path / "a.tags"
        write_tags(s, p)
        assert p.stat().st_size == 38 + 8 * 1000
        assert read_tags(p) == s

    @settings(max_examples=50, deadline=None)
    @given(
        tags=st.lists(st.integers(0, 2**62), max_size=200),
        site=st.integers(0, 2**32 - 1),
        res=st.integers(1, 10**6),
    )
    def test_round_trip_hypothesis(self, tags, site, res):
        s = stream_of(sorted(tags), resolution_fs=res, site_id=site,
                      span=max(tags, default=0))
        buf = io.BytesIO()
        write_tags(s, buf)
        assert read_tags(io.BytesIO(buf.getvalue())) == s

    def test_bad_magic(self):
        raw = b"XXXXXXXX" + bytes(30)
        with pytest.raises(BadMagicError):
            read_tags(io.BytesIO(raw))

    def test_version_mismatch(self):
        raw = MAGIC + struct.pack("<H", 99) + bytes(28)
        with pytest.raises(VersionMismatchError):
            read_tags(io.BytesIO(raw))

    def test_truncated_header(self):
        with pytest.raises(TruncatedFileError):
            read_tags(io.BytesIO(MAGIC + b"\x01"))

    def test_truncated_payload_names_counts(self):
        s = stream_of([1, 2, 3, 4, 5])
        buf = io.BytesIO()
        write_tags(s, buf)
        raw = buf.getvalue()[:-16]  # drop the last two tags
        with pytest.raises(TruncatedFileError) as err:
            read_tags(io.BytesIO(raw))
        assert "5" in str(err.value)
        assert "3" in str(err.value)

    def test_unsorted_payload_names_index(self):
        header = TagFileHeader(site_id=0, resolution_fs=1000, tag_count=3,
                               acquisition_span_fs=100)
        payload = np.array([10, 5, 20], dtype="<i8").tobytes()
        with pytest.raises(UnsortedTagsError) as err:
            read_tags(io.BytesIO(header.pack() + payload))
        assert "1" in str(err.value)


class TestWireTransport:
    def _loopback(self, stream, batch=4096):
        a, b = socket.socketpair()
        received = {}

        def rx():
            with b:
                received["stream"] = receive_stream(b)

        t = threading.Thread(target=rx)
        t.start()
        with a:
            site_send(stream, a, batch=batch)
        t.join(timeout=10)
        return received["stream"]

    def test_loopback_round_trip(self):
        s = stream_of(np.cumsum(np.arange(10_000, dtype=np.int64)), site_id=2)
        assert self._loopback(s, batch=1024) == s

    def test_zero_tags_sentinel_only(self):
        s = stream_of([], site_id=4, span=5 * 10**15)
        back = self._loopback(s)
        assert len(back) == 0
        assert back.acquisition_span_fs == 5 * 10**15

    def test_bad_frame_length(self):
        a, b = socket.socketpair()
        header = TagFileHeader(0, 1000, 1, 100).pack()
        with a:
            a.sendall(header + struct.pack("<I", 7) + b"1234567")
        with b, pytest.raises(TransportError):
            receive_stream(b)

    def test_count_mismatch(self):
        a, b = socket.socketpair()
        header = TagFileHeader(0, 1000, 5, 100).pack()
        frame = np.array([1, 2], dtype="<i8").tobytes()
        with a:
            a.sendall(header + struct.pack("<I", len(frame)) + frame
                      + struct.pack("<I", 0))
        with b, pytest.raises(TagFormatError):
            receive_stream(b)

    def test_decreasing_across_frames(self):
        a, b = socket.socketpair()
        header = TagFileHeader(0, 1000, 2, 100).pack()
        f1 = np.array([50], dtype="<i8").tobytes()
        f2 = np.array([10], dtype="<i8").tobytes()
        with a:
            a.sendall(header
                      + struct.pack("<I", 8) + f1
                      + struct.pack("<I", 8) + f2
                      + struct.pack("<I", 0))
        with b, pytest.raises(TransportError):
            receive_stream(b)

    def test_connection_closed_mid_message(self):
        a, b = socket.socketpair()
        with a:
            a.sendall(TagFileHeader(0, 1000, 3, 100).pack()
                      + struct.pack("<I", 24) + b"\x00" * 8)
        with b, pytest.raises(TransportError):
            receive_stream(b)


class TestTerminal:
    def test_two_sites_collected(self):
        terminal = Terminal()
        port = terminal.port
        sa = stream_of(np.arange(100) * 1000, site_id=0)
        sb = stream_of(np.arange(50) * 2000, site_id=1)
        result = {}

        def collect():
            result["streams"] = terminal.collect(n_sites=2)

        t = threading.Thread(target=collect)
        t.start()
        send_to_terminal(sa, ("127.0.0.1", port))
        send_to_terminal(sb, ("127.0.0.1", port))
        t.join(timeout=30)
        assert result["streams"][0] == sa
        assert result["streams"][1] == sb

    def test_duplicate_site_rejected(self):
        terminal = Terminal()
        port = terminal.port
        sa = stream_of(np.arange(10) * 1000, site_id=0)
        dup = stream_of(np.arange(20) * 500, site_id=0)
        sb = stream_of(np.arange(10) * 3000, site_id=1)
        result = {}

        def collect():
            result["streams"] = terminal.collect(n_sites=2)

        t = threading.Thread(target=collect)
        t.start()
        send_to_terminal(sa, ("127.0.0.1", port))
        with pytest.raises(TransportError):
            send_to_terminal(dup, ("127.0.0.1", port))
        send_to_terminal(sb, ("127.0.0.1", port))
        t.join(timeout=30)
        assert set(result["streams"]) == {0, 1}
        assert result["streams"][0] == sa

    def test_unreachable_terminal(self):
        s = stream_of([1000])
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            free_port = probe.getsockname()[1]
        with pytest.raises(TransportError):
            send_to_terminal(s, ("127.0.0.1", free_port))

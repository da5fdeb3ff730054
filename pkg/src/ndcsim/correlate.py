"""Nonlocal coincidence detection over two independent tag streams.

Two stages: a coarse FFT cross-correlation recovers the unknown relative
offset (group delays displace the peak by hundreds of microseconds), then a
two-pointer sweep builds the fine coincidence histogram around that offset.
Both stages are O(n log n) or better; nothing here is ever O(|a|*|b|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.fft import next_fast_len, rfft, irfft

from .errors import NoPeakError, ParameterError
from .streams import TagStream

FS_PER_PS = 1e3
FS_PER_NS = 1e6
FS_PER_MS = 1e12

# Cap on the coarse binned-array length; keeps the FFT stage at ~4M bins.
_MAX_COARSE_BINS = 1 << 22
# Chunk of source tags processed per two-pointer step (bounds peak memory).
_DIFF_CHUNK = 1 << 20


@dataclass(frozen=True)
class Histogram:
    """Binned coincidence counts versus time difference t_b - t_a - offset."""

    bin_width_ps: float
    origin_ps: float
    counts: np.ndarray = field(repr=False)
    total_pairs: int
    offset_applied_fs: int

    def __post_init__(self):
        if self.bin_width_ps <= 0:
            raise ParameterError("bin_width must be > 0")
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if np.any(counts < 0) or int(counts.sum()) != self.total_pairs:
            raise ParameterError("counts must be >= 0 and sum to total_pairs")

    @property
    def bin_centers_ps(self) -> np.ndarray:
        return self.origin_ps + (np.arange(self.counts.size) + 0.5) * self.bin_width_ps


def _check_sorted(stream: TagStream, name: str) -> np.ndarray:
    tags = stream.tags
    if tags.size == 0:
        raise ParameterError(f"stream {name} is empty")
    return tags


def window_diffs(
    a: np.ndarray, b: np.ndarray, offset_fs: int, window_fs: float, chunk: int = _DIFF_CHUNK
) -> Iterator[np.ndarray]:
    """Yield all differences b - a - offset with |diff| <= window, chunked.

    Two-pointer over the sorted arrays via searchsorted; cost is
    O(|a| log |b| + pairs_in_window) and memory is bounded by the chunk size.
    """
    lo_edge = np.int64(offset_fs - math.ceil(window_fs))
    hi_edge = np.int64(offset_fs + math.ceil(window_fs))
    for start in range(0, a.size, chunk):
        a_chunk = a[start : start + chunk]
        lo = np.searchsorted(b, a_chunk + lo_edge, side="left")
        hi = np.searchsorted(b, a_chunk + hi_edge, side="right")
        counts = hi - lo
        total = int(counts.sum())
        if total == 0:
            continue
        # Flat indices into b for every (a_i, b_j) pair in the window.
        starts = np.zeros(a_chunk.size, dtype=np.int64)
        np.cumsum(counts[:-1], out=starts[1:])
        flat = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(lo, counts)
        diffs = b[flat] - np.repeat(a_chunk, counts) - np.int64(offset_fs)
        # The integer edges above may over-include by < 1 fs for fractional windows.
        d = diffs.astype(np.float64)
        yield diffs[(d >= -window_fs) & (d <= window_fs)]


def fine_histogram(
    a: TagStream,
    b: TagStream,
    offset_fs: int,
    bin_width_ps: float,
    window_ps: float,
) -> Histogram:
    """Histogram of pair differences t_b - t_a - offset within +/- window.

    Half-open bins [left, right) starting at -window; a difference exactly on
    the +window boundary falls into the last bin.
    """
    tags_a = _check_sorted(a, "a")
    tags_b = _check_sorted(b, "b")
    if bin_width_ps <= 0:
        raise ParameterError("bin_width must be > 0")
    if window_ps < bin_width_ps:
        raise ParameterError("window must be >= bin_width")

    nbins = int(math.ceil(2.0 * window_ps / bin_width_ps))
    counts = np.zeros(nbins, dtype=np.int64)
    inv_bw_fs = 1.0 / (bin_width_ps * FS_PER_PS)
    origin_fs = -window_ps * FS_PER_PS
    for diffs in window_diffs(tags_a, tags_b, offset_fs, window_ps * FS_PER_PS):
        idx = np.floor((diffs - origin_fs) * inv_bw_fs).astype(np.int64)
        np.clip(idx, 0, nbins - 1, out=idx)
        counts += np.bincount(idx, minlength=nbins)
    return Histogram(
        bin_width_ps=bin_width_ps,
        origin_ps=-window_ps,
        counts=counts,
        total_pairs=int(counts.sum()),
        offset_applied_fs=int(offset_fs),
    )


def coarse_offset(
    a: TagStream,
    b: TagStream,
    coarse_bin_ns: float = 1.0,
    search_span_ms: float = 1.0,
) -> int:
    """Recover the relative offset t_b - t_a of the coincidence peak (fs).

    Bins both streams onto a common grid, FFT cross-correlates, and takes the
    most significant lag within +/- search_span; a second two-pointer pass
    refines the estimate down to the coarse bin.  Raises NoPeakError when the
    correlogram maximum is below mean + 5*std.
    """
    tags_a = _check_sorted(a, "a")
    tags_b = _check_sorted(b, "b")
    if coarse_bin_ns <= 0 or search_span_ms <= 0:
        raise ParameterError("coarse_bin and search_span must be > 0")
    coarse_bin_fs = int(round(coarse_bin_ns * FS_PER_NS))
    span_fs = search_span_ms * FS_PER_MS

    t0 = int(min(tags_a[0], tags_b[0]))
    t1 = int(max(tags_a[-1], tags_b[-1]))
    duration_fs = max(t1 - t0, 1)

    bin1_fs = max(coarse_bin_fs, -(-duration_fs // _MAX_COARSE_BINS))
    nbins = duration_fs // bin1_fs + 1
    span_bins = max(1, int(math.ceil(span_fs / bin1_fs)))

    ha = np.bincount((tags_a - t0) // bin1_fs, minlength=nbins).astype(np.float64)
    hb = np.bincount((tags_b - t0) // bin1_fs, minlength=nbins).astype(np.float64)
    n_fft = next_fast_len(int(nbins + span_bins + 1))
    corr = irfft(np.conj(rfft(ha, n_fft)) * rfft(hb, n_fft), n_fft)

    lags = np.arange(-span_bins, span_bins + 1)
    vals = corr[np.mod(lags, n_fft)]
    peak = float(vals.max())
    if peak < float(vals.mean()) + 5.0 * float(vals.std()):
        raise NoPeakError(
            "no significant coincidence peak within +/- %.3f ms" % search_span_ms
        )
    est_fs = int(lags[int(np.argmax(vals))]) * bin1_fs

    if bin1_fs <= coarse_bin_fs:
        return est_fs

    # Refine to the requested coarse bin with a bounded two-pointer histogram.
    # Bins are centred on multiples of the coarse bin so that a constructed
    # shift (or identical streams) is recovered exactly.
    refine_window_fs = 2.0 * bin1_fs
    half = max(1, int(math.ceil(refine_window_fs / coarse_bin_fs)))
    nref = 2 * half + 1
    counts = np.zeros(nref, dtype=np.int64)
    for diffs in window_diffs(tags_a, tags_b, est_fs, refine_window_fs):
        idx = (diffs + coarse_bin_fs // 2) // coarse_bin_fs + half
        idx = np.clip(idx, 0, nref - 1).astype(np.int64)
        counts += np.bincount(idx, minlength=nref)
    if counts.sum() == 0:
        raise NoPeakError("no tag pairs near the coarse correlation peak")
    best = int(np.argmax(counts))
    return est_fs + (best - half) * coarse_bin_fs


def g2_normalize(
    h: Histogram, rate_a_hz: float, rate_b_hz: float, duration_s: float
) -> np.ndarray:
    """Counts divided by the accidental level R_a*R_b*T*bin; baseline -> 1."""
    if rate_a_hz <= 0 or rate_b_hz <= 0 or duration_s <= 0:
        raise ParameterError("rates and duration must be > 0")
    accidental = rate_a_hz * rate_b_hz * duration_s * (h.bin_width_ps * 1e-12)
    return h.counts.astype(np.float64) / accidental


def write_histogram_csv(h: Histogram, path, g2: np.ndarray | None = None) -> None:
    """CSV with columns bin_center_ps, counts, g2_normalized."""
    centers = h.bin_centers_ps
    g2_col = g2 if g2 is not None else np.zeros_like(centers)
    with open(path, "w") as f:
        f.write("bin_center_ps,counts,g2_normalized\n")
        for c, n, g in zip(centers, h.counts, g2_col):
            f.write(f"{c:.6f},{int(n)},{g:.8g}\n")


def read_histogram_csv(path, offset_fs: int = 0) -> tuple[Histogram, np.ndarray]:
    """Inverse of write_histogram_csv (bin geometry inferred from centers)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    centers = data[:, 0]
    counts = data[:, 1].astype(np.int64)
    if centers.size < 2:
        raise ParameterError("histogram CSV needs at least two bins")
    bw = float(np.median(np.diff(centers)))
    origin = float(centers[0] - 0.5 * bw)
    h = Histogram(
        bin_width_ps=bw,
        origin_ps=origin,
        counts=counts,
        total_pairs=int(counts.sum()),
        offset_applied_fs=offset_fs,
    )
    return h, data[:, 2]

"""Timestamp stream container shared by simulation, correlation and I/O."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsortedTagsError


@dataclass(frozen=True)
class TagStream:
    """Sorted int64 femtosecond timestamps from one detector/event-timer site."""

    tags: np.ndarray
    resolution_fs: int
    site_id: int
    acquisition_span_fs: int

    def __post_init__(self):
        tags = np.ascontiguousarray(self.tags, dtype=np.int64)
        object.__setattr__(self, "tags", tags)
        if tags.size > 1:
            bad = np.nonzero(np.diff(tags) < 0)[0]
            if bad.size:
                raise UnsortedTagsError(
                    f"tags not sorted: first offending index {int(bad[0]) + 1}"
                )

    def __len__(self) -> int:
        return int(self.tags.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TagStream):
            return NotImplemented
        return (
            self.resolution_fs == other.resolution_fs
            and self.site_id == other.site_id
            and self.acquisition_span_fs == other.acquisition_span_fs
            and np.array_equal(self.tags, other.tags)
        )

    @property
    def duration_s(self) -> float:
        return self.acquisition_span_fs * 1e-15

    def rate_hz(self) -> float:
        """Mean tag rate over the acquisition span."""
        if self.acquisition_span_fs <= 0:
            return 0.0
        return self.tags.size / self.duration_s

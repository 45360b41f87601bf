"""Line-granular contents of both memory tiers.

Values are 64-bit integers, one per cache line. Unwritten lines read as zero.
Keys are packed into a single int so the hot read/write paths stay one dict
operation each.
"""
from __future__ import annotations

from .geometry import PhysicalFrame, Tier


class FrameStore:
    def __init__(self, lines_per_page: int):
        self.lines_per_page = lines_per_page
        self._shift = (lines_per_page - 1).bit_length()
        self._data: dict[int, int] = {}

    def _key(self, frame: PhysicalFrame, line: int) -> int:
        tier_bit = 1 if frame.tier is Tier.SLOW else 0
        return (tier_bit << 62) | (frame.frame << self._shift) | line

    def read_line(self, frame: PhysicalFrame, line: int) -> int:
        return self._data.get(self._key(frame, line), 0)

    def write_line(self, frame: PhysicalFrame, line: int, value: int) -> None:
        self._data[self._key(frame, line)] = value

    def fill_page(self, frame: PhysicalFrame, value: int) -> None:
        """Set every line of a frame to the same value (test scaffolding)."""
        for line in range(self.lines_per_page):
            self.write_line(frame, line, value)

    def take_page(self, frame: PhysicalFrame) -> dict[int, int]:
        """Remove and return a frame's written lines ({line: value}).

        The frame reads all-zero afterwards; lines never written are absent
        from the result.
        """
        out: dict[int, int] = {}
        pop = self._data.pop
        for line in range(self.lines_per_page):
            value = pop(self._key(frame, line), None)
            if value is not None:
                out[line] = value
        return out

"""Greenwald-Khanna streaming quantile sketch.

Deterministic and single-pass: for any q in [0, 1], the returned value's true
rank differs from q*N by at most eps*N. Backs the opt-in approximate
selection mode; the exact two-pass selection never uses it.
"""

from __future__ import annotations

import math
from bisect import bisect_right


class GKSketch:
    def __init__(self, eps: float = 0.001):
        if not 0 < eps < 1:
            raise ValueError("eps must be in (0, 1)")
        self.eps = eps
        self.n = 0
        self._values: list[float] = []  # kept parallel to _entries, sorted
        self._entries: list[tuple[int, int]] = []  # (g, delta) per value
        self._compress_every = max(1, int(1.0 / (2.0 * eps)))

    def insert(self, value: float) -> None:
        idx = bisect_right(self._values, value)
        if idx == 0 or idx == len(self._values):
            entry = (1, 0)
        else:
            entry = (1, math.floor(2 * self.eps * self.n))
        self._values.insert(idx, value)
        self._entries.insert(idx, entry)
        self.n += 1
        if self.n % self._compress_every == 0:
            self._compress()

    def _compress(self) -> None:
        if len(self._values) < 3:
            return
        cap = math.floor(2 * self.eps * self.n)
        values = [self._values[0]]
        entries = [self._entries[0]]
        for i in range(1, len(self._values) - 1):
            g, delta = self._entries[i]
            pg, _ = entries[-1]
            if len(entries) > 1 and pg + g + delta <= cap:
                values[-1] = self._values[i]
                entries[-1] = (pg + g, delta)
            else:
                values.append(self._values[i])
                entries.append((g, delta))
        values.append(self._values[-1])
        entries.append(self._entries[-1])
        self._values = values
        self._entries = entries

    def query(self, q: float) -> float:
        if self.n == 0:
            raise ValueError("empty sketch")
        if not 0.0 <= q <= 1.0:
            raise ValueError("quantile must be in [0, 1]")
        rank = max(1, math.ceil(q * self.n))
        allowed = self.eps * self.n
        r_min = 0
        for value, (g, delta) in zip(self._values, self._entries):
            r_min += g
            if rank - r_min <= allowed and r_min + delta - rank <= allowed:
                return value
        return self._values[-1]

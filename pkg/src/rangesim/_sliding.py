"""Incrementally maintained sorted windows for per-lane trimmed means.

The optimizer needs, at every iteration and for every (agent, coordinate)
lane, the mean of the entries nearest the median of that lane's last
``window`` values. Recomputing median and cut radius from scratch is the
dominant cost of a run, so this module keeps each lane's window sorted and
updates it by one deletion plus one insertion per step. Results match
``estimator.trimmed_mean`` on the window ordered newest-first (ties at the
cut radius go to the newest entries), up to float summation order.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _push(ring, svals, stime, new, t, count):
    lanes, m = ring.shape
    slot = t % m
    for g in range(lanes):
        value = new[g]
        if count == m:
            old = ring[g, slot]
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) // 2
                if svals[g, mid] < old:
                    lo = mid + 1
                else:
                    hi = mid
            pos = lo
            while stime[g, pos] != t - m:
                pos += 1
                if pos >= m:
                    raise ValueError("sliding window state corrupted (value not found)")
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) // 2
                if svals[g, mid] < value:
                    lo = mid + 1
                else:
                    hi = mid
            ins = lo
            if ins <= pos:
                for i in range(pos, ins, -1):
                    svals[g, i] = svals[g, i - 1]
                    stime[g, i] = stime[g, i - 1]
                svals[g, ins] = value
                stime[g, ins] = t
            else:
                for i in range(pos, ins - 1):
                    svals[g, i] = svals[g, i + 1]
                    stime[g, i] = stime[g, i + 1]
                svals[g, ins - 1] = value
                stime[g, ins - 1] = t
        else:
            lo, hi = 0, count
            while lo < hi:
                mid = (lo + hi) // 2
                if svals[g, mid] < value:
                    lo = mid + 1
                else:
                    hi = mid
            ins = lo
            for i in range(count, ins, -1):
                svals[g, i] = svals[g, i - 1]
                stime[g, i] = stime[g, i - 1]
            svals[g, ins] = value
            stime[g, ins] = t
        ring[g, slot] = value


@njit(cache=True)
def _trimmed_mean(svals, stime, count, kept, out, cand_val, cand_time):
    lanes = svals.shape[0]
    k = count
    mid = k // 2
    for g in range(lanes):
        u = svals[g]
        if kept == k:
            total = 0.0
            for i in range(k):
                total += u[i]
            out[g] = total / k
            continue
        if k % 2 == 1:
            med = u[mid]
            center = mid
        else:
            med = 0.5 * (u[mid - 1] + u[mid])
            # rounding can make either middle entry the nearest one
            center = mid - 1 if abs(u[mid - 1] - med) < abs(u[mid] - med) else mid
        # cut radius = kept-th smallest |u - med|; distances are V-shaped over
        # the sorted values, so walk outward from the valley
        li = center - 1
        ri = center + 1
        radius = abs(u[center] - med)
        for _ in range(kept - 1):
            dl = abs(u[li] - med) if li >= 0 else np.inf
            dr = abs(u[ri] - med) if ri < k else np.inf
            if dl <= dr:
                radius = dl
                li -= 1
            else:
                radius = dr
                ri += 1
        # contiguous run with distance strictly inside the radius
        total = 0.0
        n_in = 0
        i = center
        j = center - 1
        if abs(u[center] - med) < radius:
            j = center
            while i > 0 and abs(u[i - 1] - med) < radius:
                i -= 1
            while j < k - 1 and abs(u[j + 1] - med) < radius:
                j += 1
            n_in = j - i + 1
            for p in range(i, j + 1):
                total += u[p]
        need = kept - n_in
        if need > 0:
            n_cand = 0
            p = i - 1
            while p >= 0 and abs(u[p] - med) == radius:
                cand_val[n_cand] = u[p]
                cand_time[n_cand] = stime[g, p]
                n_cand += 1
                p -= 1
            p = j + 1
            while p < k and abs(u[p] - med) == radius:
                cand_val[n_cand] = u[p]
                cand_time[n_cand] = stime[g, p]
                n_cand += 1
                p += 1
            if n_cand == need:
                for c in range(n_cand):
                    total += cand_val[c]
            else:
                # newest entries win ties (smallest window index)
                for _ in range(need):
                    best = -1
                    best_t = np.int64(-1)
                    for c in range(n_cand):
                        if cand_time[c] > best_t:
                            best_t = cand_time[c]
                            best = c
                    if best < 0:
                        raise ValueError("sliding window state corrupted (tie fill)")
                    total += cand_val[best]
                    cand_time[best] = np.int64(-1)
        out[g] = total / kept


class SlidingWindows:
    """Fixed-size value windows over ``lanes`` parallel streams."""

    def __init__(self, lanes: int, window: int):
        if lanes < 1 or window < 1:
            raise ValueError("lanes and window must be positive")
        self.window = window
        self.pushes = 0
        self.ring = np.zeros((lanes, window))
        self._svals = np.zeros((lanes, window))
        self._stime = np.zeros((lanes, window), dtype=np.int64)
        self._cand_val = np.empty(window)
        self._cand_time = np.empty(window, dtype=np.int64)

    @property
    def count(self) -> int:
        return min(self.pushes, self.window)

    def push(self, values: np.ndarray) -> None:
        """Append one value per lane, evicting the oldest once full."""
        values = np.ascontiguousarray(values, dtype=np.float64).reshape(self.ring.shape[0])
        _push(self.ring, self._svals, self._stime, values, self.pushes, self.count)
        self.pushes += 1

    def trimmed_mean(self, kept: int, out: np.ndarray | None = None) -> np.ndarray:
        """Per-lane mean of the ``kept`` entries nearest the window median."""
        if not 1 <= kept <= self.count:
            raise ValueError(f"kept must be in [1, {self.count}], got {kept}")
        if out is None:
            out = np.empty(self.ring.shape[0])
        _trimmed_mean(self._svals, self._stime, self.count, kept, out,
                      self._cand_val, self._cand_time)
        return out

    def lane_window(self, lane: int) -> np.ndarray:
        """Current window content for one lane, newest first."""
        n = self.count
        m = self.window
        slots = (self.pushes - 1 - np.arange(n)) % m
        return self.ring[lane, slots].copy()

"""Operator-window and column-availability arithmetic.

All times are integer minutes counted from the plan origin (negative values
are allowed).  Windows and bookings are half-open intervals [a, b) so
back-to-back placements never collide.  Column availability is a
piecewise-constant count of free units of one column type; a placement is
feasible when at least one unit is free over its whole occupation interval.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CapacityError, NoSlotError

MINUTES_PER_DAY = 1440
MINUTES_PER_WEEK = 7 * MINUTES_PER_DAY

#: Default search span for earliest-start queries, in days past t_min.
DEFAULT_SEARCH_DAYS = 366

#: Day 0 of the plan is a Monday.
WEEKDAY_NAMES = ("MON", "TUE", "WED", "THU", "FRI", "SAT", "SUN")

_NEG_INF = float("-inf")


def _normalize_windows(windows):
    """Sort, drop empties and merge overlapping or adjacent intervals."""
    cleaned = []
    for a, b in windows:
        if b < a:
            raise ValueError(f"window end {b} before start {a}")
        if a != b:
            cleaned.append((a, b))
    cleaned.sort()
    merged: list[tuple] = []
    for a, b in cleaned:
        if merged and a <= merged[-1][1]:
            prev_a, prev_b = merged[-1]
            merged[-1] = (prev_a, max(prev_b, b))
        else:
            merged.append((a, b))
    return tuple(merged)


@dataclass(frozen=True)
class TimeWindowSet:
    """Sorted, disjoint, non-adjacent half-open windows; ends may be +inf."""

    windows: tuple[tuple[int, int | float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "windows", _normalize_windows(self.windows))

    @classmethod
    def empty(cls) -> "TimeWindowSet":
        return cls(())

    @classmethod
    def always(cls, start: int | float = _NEG_INF) -> "TimeWindowSet":
        """Windows covering [start, +inf)."""
        return cls(((start, math.inf),))

    @cached_property
    def _starts(self) -> list:
        return [w[0] for w in self.windows]

    @cached_property
    def _ends(self) -> list:
        return [w[1] for w in self.windows]

    @property
    def is_empty(self) -> bool:
        return not self.windows

    def __iter__(self):
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)

    def contains(self, t) -> bool:
        i = bisect_right(self._starts, t) - 1
        return i >= 0 and t < self._ends[i]

    def next_point(self, t):
        """Smallest point >= t inside the set, or None if none exists."""
        i = bisect_right(self._starts, t) - 1
        if i >= 0 and t < self._ends[i]:
            return t
        if i + 1 < len(self.windows):
            return self._starts[i + 1]
        return None

    def intersect(self, other: "TimeWindowSet") -> "TimeWindowSet":
        """Exact set intersection."""
        out = []
        i = j = 0
        a, b = self.windows, other.windows
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return TimeWindowSet(tuple(out))


def _normalize_steps(capacity, times, levels):
    """Drop breakpoints that do not change the level."""
    out_t, out_l = [], []
    prev = capacity
    for t, l in zip(times, levels):
        if l != prev:
            out_t.append(t)
            out_l.append(l)
            prev = l
    return tuple(out_t), tuple(out_l)


@dataclass(frozen=True)
class CapacityProfile:
    """Free-unit count of one column type over time.

    The level is `capacity` before the first breakpoint and `levels[i]` on
    [times[i], times[i+1]).  `reserve` and `release` return new profiles;
    callers that need to restore prior state keep the old value.
    """

    capacity: int
    times: tuple[int, ...] = ()
    levels: tuple[int, ...] = ()

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if len(self.times) != len(self.levels):
            raise ValueError("times and levels length mismatch")
        if any(self.times[i] >= self.times[i + 1] for i in range(len(self.times) - 1)):
            raise ValueError("breakpoints must be strictly increasing")
        t, l = _normalize_steps(self.capacity, self.times, self.levels)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "levels", l)

    def _arrays(self) -> tuple[list, list[int]]:
        return [_NEG_INF, *self.times], [self.capacity, *self.levels]

    def level_at(self, t: int) -> int:
        i = bisect_right(self.times, t) - 1
        return self.capacity if i < 0 else self.levels[i]

    def min_level(self, start: int, end: int) -> tuple[int, int]:
        """Minimum level over [start, end) and the first instant attaining it."""
        if start >= end:
            raise ValueError("empty interval")
        times, levels = self._arrays()
        i = bisect_right(times, start) - 1
        best, at = levels[i], start
        j = i
        while j + 1 < len(times) and times[j + 1] < end:
            j += 1
            if levels[j] < best:
                best, at = levels[j], times[j]
        return best, at

    def reserve(self, start: int, end: int) -> "CapacityProfile":
        """One unit booked over [start, end); fails if none is free throughout."""
        level, at = self.min_level(start, end)
        if level < 1:
            raise CapacityError(at, level)
        times, levels = self._arrays()
        reserve_step(times, levels, start, end)
        return CapacityProfile(self.capacity, tuple(times[1:]), tuple(levels[1:]))

    def release(self, start: int, end: int) -> "CapacityProfile":
        """Exact inverse of `reserve`; trusts the caller (see `first_breach`)."""
        if start >= end:
            raise ValueError("empty interval")
        times, levels = self._arrays()
        release_step(times, levels, start, end)
        return CapacityProfile(self.capacity, tuple(times[1:]), tuple(levels[1:]))

    def first_breach(self):
        """First (time, level) with level < 0 or > capacity, else None.

        An over-released profile shows up here rather than at release time.
        """
        for t, l in zip(self.times, self.levels):
            if l < 0 or l > self.capacity:
                return (t, l)
        return None

    def earliest_available(self, t_min: int, duration: int, horizon=None) -> int:
        """Smallest t >= t_min with a free unit over all of [t, t+duration)."""
        times, levels = self._arrays()
        return find_earliest(None, None, times, levels, t_min, duration, horizon)


# ---------------------------------------------------------------------------
# Low-level step-function kernels.  These operate on list pairs whose first
# entry is a -inf sentinel carrying the base level; the solver engine runs
# them directly on its own mutable arrays.


def reserve_step(times: list, levels: list[int], start: int, end: int) -> None:
    """Decrement the level by one over [start, end), in place."""
    i = bisect_right(times, start) - 1
    if times[i] < start:
        i += 1
        times.insert(i, start)
        levels.insert(i, levels[i - 1])
    j = i
    n = len(times)
    while j < n and times[j] < end:
        j += 1
    if j == n or times[j] > end:
        times.insert(j, end)
        levels.insert(j, levels[j - 1])
    for k in range(i, j):
        levels[k] -= 1


def release_step(times: list, levels: list[int], start: int, end: int) -> None:
    """Increment the level by one over [start, end), in place."""
    i = bisect_right(times, start) - 1
    if times[i] < start:
        i += 1
        times.insert(i, start)
        levels.insert(i, levels[i - 1])
    j = i
    n = len(times)
    while j < n and times[j] < end:
        j += 1
    if j == n or times[j] > end:
        times.insert(j, end)
        levels.insert(j, levels[j - 1])
    for k in range(i, j):
        levels[k] += 1


def find_earliest(wstarts, wends, times, levels, t_min: int, duration: int,
                  horizon=None):
    """Smallest t >= t_min with a free unit over [t, t+duration).

    When `wstarts`/`wends` are given, t itself must additionally fall inside
    one of those windows (the occupation interval need not).  Raises
    NoSlotError past `horizon` (default t_min + DEFAULT_SEARCH_DAYS days).
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if horizon is None:
        horizon = t_min + DEFAULT_SEARCH_DAYS * MINUTES_PER_DAY
    n = len(times)
    nw = len(wstarts) if wstarts is not None else 0
    t = t_min
    while t <= horizon:
        if wstarts is not None:
            i = bisect_right(wstarts, t) - 1
            if i < 0 or t >= wends[i]:
                i += 1
                if i >= nw:
                    raise NoSlotError(t_min, horizon, "operator windows exhausted")
                t = wstarts[i]
                if t > horizon:
                    break
        j = bisect_right(times, t) - 1
        if levels[j] < 1:
            j += 1
            while j < n and levels[j] < 1:
                j += 1
            if j >= n:
                raise NoSlotError(t_min, horizon, "column booked out")
            t = times[j]
            continue
        end = t + duration
        k = j
        feasible = True
        while k + 1 < n and times[k + 1] < end:
            k += 1
            if levels[k] < 1:
                k += 1
                while k < n and levels[k] < 1:
                    k += 1
                if k >= n:
                    raise NoSlotError(t_min, horizon, "column booked out")
                t = times[k]
                feasible = False
                break
        if feasible:
            return t
    raise NoSlotError(t_min, horizon)


# ---------------------------------------------------------------------------
# Public earliest-start queries.


def earliest_start_with_setup(t_min: int, setup: int, processing: int,
                              operator_windows: TimeWindowSet,
                              column: CapacityProfile, horizon=None) -> int:
    """Earliest start of a setup-then-process placement.

    The setup must start inside an operator window; the column must have a
    free unit over the full [t, t+setup+processing) occupation.
    """
    if setup < 0 or processing <= 0:
        raise ValueError("need setup >= 0 and processing > 0")
    if operator_windows.is_empty:
        raise NoSlotError(t_min, t_min, "operator windows empty")
    times, levels = column._arrays()
    return find_earliest(operator_windows._starts, operator_windows._ends,
                         times, levels, t_min, setup + processing, horizon)


def earliest_start_without_setup(t_min: int, processing: int,
                                 column: CapacityProfile, horizon=None) -> int:
    """Earliest start when no setup is needed (runs unattended)."""
    if processing <= 0:
        raise ValueError("processing must be positive")
    return column.earliest_available(t_min, processing, horizon)


# ---------------------------------------------------------------------------
# Weekly recurring windows.


def _parse_minute_of_day(value) -> int:
    if isinstance(value, int):
        minute = value
    else:
        hh, _, mm = str(value).partition(":")
        minute = int(hh) * 60 + int(mm or 0)
    if not 0 <= minute <= MINUTES_PER_DAY:
        raise ValueError(f"minute of day out of range: {value!r}")
    return minute


def _parse_weekday(value) -> int:
    if isinstance(value, int):
        day = value
    else:
        name = str(value).upper()[:3]
        if name not in WEEKDAY_NAMES:
            raise ValueError(f"unknown weekday {value!r}")
        day = WEEKDAY_NAMES.index(name)
    if not 0 <= day <= 6:
        raise ValueError(f"weekday out of range: {value!r}")
    return day


def weekly_windows(days: Iterable, start, end, horizon_start: int,
                   horizon_end: int) -> TimeWindowSet:
    """Expand a weekly pattern (e.g. MON-FRI 08:00-18:00) over a horizon.

    Day 0 of the plan is a Monday; any daily window overlapping
    [horizon_start, horizon_end) is included whole.
    """
    daily_start = _parse_minute_of_day(start)
    daily_end = _parse_minute_of_day(end)
    if daily_end <= daily_start:
        raise ValueError("daily end must be after daily start")
    weekdays = {_parse_weekday(d) for d in days}
    first_day = horizon_start // MINUTES_PER_DAY - 1
    last_day = -(-horizon_end // MINUTES_PER_DAY) + 1
    out = []
    for day in range(first_day, last_day):
        if day % 7 not in weekdays:
            continue
        a = day * MINUTES_PER_DAY + daily_start
        b = day * MINUTES_PER_DAY + daily_end
        if b > horizon_start and a < horizon_end:
            out.append((a, b))
    return TimeWindowSet(tuple(out))


WORKDAYS = ("MON", "TUE", "WED", "THU", "FRI")

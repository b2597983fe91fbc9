"""Duration rendering with fixed unit conversions.

Month and year lengths are pinned (30.44 and 365.25 days) so that rendered
reports are stable enough for golden tests.
"""

from __future__ import annotations

__all__ = ["UNITS", "UNIT_SECONDS", "humanize_duration"]

# Unit name -> length in seconds, largest first.
UNIT_SECONDS: dict[str, float] = {
    "years": 365.25 * 86400.0,
    "months": 30.44 * 86400.0,
    "weeks": 7 * 86400.0,
    "days": 86400.0,
    "hours": 3600.0,
    "mins": 60.0,
    "secs": 1.0,
}

UNITS = ("auto",) + tuple(UNIT_SECONDS)


def humanize_duration(duration_ms: float, unit: str = "auto") -> str:
    """Render a non-negative duration as e.g. "43.4 weeks" or "250 ms".

    An explicit unit renders the value in that unit with one decimal. "auto"
    picks the largest unit whose value is >= 1.0; sub-second durations render
    as integer milliseconds.
    """
    if duration_ms < 0:
        raise ValueError("duration must be non-negative")
    seconds = duration_ms / 1000.0
    if unit != "auto":
        if unit not in UNIT_SECONDS:
            raise ValueError(f"unknown unit {unit!r}")
        return f"{seconds / UNIT_SECONDS[unit]:.1f} {unit}"
    if seconds < 1.0:
        return f"{round(duration_ms)} ms"
    for name, size in UNIT_SECONDS.items():
        value = seconds / size
        if value >= 1.0:
            return f"{value:.1f} {name}"
    raise AssertionError("unreachable: secs always matches")

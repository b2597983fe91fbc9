"""Regenerate tests/data/textile.csv, the committed textile-process fixture.

The log has 33 cases and 443 events with fixed per-activity counts, dealt
round-robin across cases in process order, with deterministic timestamp
gaps. The overall span is pinned to 2019-01-01T01:00:00Z ..
2021-06-05T19:12:00Z.
"""

from datetime import datetime, timedelta, timezone
from pathlib import Path

ACTIVITY_COUNTS = [
    ("Raw wool receiving", 8),
    ("Blending", 13),
    ("Washing", 13),
    ("Dying", 17),
    ("Drawing", 25),
    ("Fine spinning", 23),
    ("Twisting", 23),
    ("Winding stage", 23),
    ("Assembly winding", 23),
    ("Reeling", 23),
    ("Silver package", 24),
    ("Weaving", 162),
    ("Sample testing", 41),
    ("Final shape", 25),
]

CASES = 33
SPAN_START = datetime(2019, 1, 1, 1, 0, 0, tzinfo=timezone.utc)
SPAN_END = datetime(2021, 6, 5, 19, 12, 0, tzinfo=timezone.utc)


def main() -> None:
    pool = [name for name, count in ACTIVITY_COUNTS for _ in range(count)]
    assert len(pool) == 443
    sequences = [pool[j::CASES] for j in range(CASES)]

    rows = []
    for j, activities in enumerate(sequences):
        t = SPAN_START + timedelta(days=20 * j)
        for i, activity in enumerate(activities):
            if i > 0:
                t += timedelta(hours=50 + (j * 13 + i * 29) % 300)
            if j == CASES - 1 and i == len(activities) - 1:
                t = SPAN_END  # pin the global end
            rows.append((f"case_{j + 1}", activity, t))

    lines = ["case_id,activity,timestamp"]
    for case_id, activity, t in rows:
        stamp = t.strftime("%Y-%m-%dT%H:%M:%SZ")
        field = f'"{activity}"' if "," in activity else activity
        lines.append(f"{case_id},{field},{stamp}")

    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "textile.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(rows)} events, {CASES} cases)")


if __name__ == "__main__":
    main()

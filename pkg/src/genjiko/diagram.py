"""Deterministic Genji-mon diagram layout and export.

Each round is a vertical line; rounds judged to share a scent are joined by
a horizontal connector at the top.  Columns read right to left in the
traditional order: round 1 sits at x=4, round 5 at x=0.  Verticals span
y=0..10; connector heights start at 10 and step down one unit whenever two
connectors' column spans overlap, processing groups by leftmost column.

One extra rule keeps the rendering injective: a connector at full height
also steps down when an ungrouped round's column lies strictly inside its
span.  The crossing vertical rises to 10, so without the step-down its top
would land exactly on the bar and the segment set could not distinguish
"member of the group" from "singleton passing through".
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .genjimon import MAX_ROUNDS, Partition

FULL_HEIGHT = 10
SVG_STROKE = 0.12
SVG_VIEWBOX = (0, 0, MAX_ROUNDS, FULL_HEIGHT + 1)


@dataclass(frozen=True)
class Segment:
    """One line segment in abstract diagram units."""

    x1: int
    y1: int
    x2: int
    y2: int

    def to_json(self) -> list[int]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class PatternDiagram:
    """Laid-out Genji-mon: segment set plus the round -> x column map."""

    segments: frozenset[Segment]
    columns: tuple[int, ...]  # columns[r - 1] is round r's x coordinate

    @property
    def rounds(self) -> int:
        return len(self.columns)

    def sorted_segments(self) -> list[Segment]:
        return sorted(self.segments, key=lambda s: (s.x1, s.y1, s.x2, s.y2))

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "columns": {str(r + 1): x for r, x in enumerate(self.columns)},
            "segments": [seg.to_json() for seg in self.sorted_segments()],
        }


def column_x(round_no: int) -> int:
    return MAX_ROUNDS - round_no


def render_pattern(partition: Partition) -> PatternDiagram:
    """Lay out a partition of 1..n rounds (n <= 5) as a segment set.

    Full games render all five columns; in-game prefixes render only the
    columns of the rounds seen so far, at the positions they will keep in
    the finished diagram.
    """
    n = partition.n
    columns = tuple(column_x(r) for r in range(1, n + 1))
    col_of = {r: column_x(r) for r in range(1, n + 1)}

    groups = [g for g in partition.groups() if len(g) >= 2]
    singleton_cols = {
        col_of[g[0]] for g in partition.groups() if len(g) == 1
    }

    # (span_lo, span_hi, height, members) per connector
    bars: list[tuple[int, int, int, tuple[int, ...]]] = []
    for group in sorted(groups, key=lambda g: min(col_of[r] for r in g)):
        xs = [col_of[r] for r in group]
        lo, hi = min(xs), max(xs)
        height = FULL_HEIGHT
        while True:
            clash = any(
                h == height and not (hi < b_lo or b_hi < lo)
                for b_lo, b_hi, h, _ in bars
            )
            if height == FULL_HEIGHT and any(lo < c < hi for c in singleton_cols):
                clash = True
            if not clash:
                break
            height -= 1
        if height < 1:
            raise DomainError(f"no connector height left for partition {partition.key()}")
        bars.append((lo, hi, height, group))

    tops = {r: FULL_HEIGHT for r in range(1, n + 1)}
    for _, _, height, group in bars:
        for r in group:
            tops[r] = height

    segments = {
        Segment(col_of[r], 0, col_of[r], tops[r]) for r in range(1, n + 1)
    }
    segments |= {Segment(lo, h, hi, h) for lo, hi, h, _ in bars}
    return PatternDiagram(segments=frozenset(segments), columns=columns)


def diagram_to_svg(diagram: PatternDiagram) -> str:
    """Serialize a diagram to a standalone SVG document.

    Abstract coordinates map into the fixed viewBox: columns shift half a
    unit right so all five land inside the width-5 box, and y flips so the
    connectors sit at the top with half a unit of margin.
    """
    x0, y0, w, h = SVG_VIEWBOX
    lines = []
    for seg in diagram.sorted_segments():
        x1, y1 = seg.x1 + 0.5, FULL_HEIGHT + 0.5 - seg.y1
        x2, y2 = seg.x2 + 0.5, FULL_HEIGHT + 0.5 - seg.y2
        lines.append(
            f'  <line x1="{x1:g}" y1="{y1:g}" x2="{x2:g}" y2="{y2:g}"/>'
        )
    body = "\n".join(lines)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{x0} {y0} {w} {h}">\n'
        f'<g stroke="currentColor" stroke-width="{SVG_STROKE}" '
        f'stroke-linecap="square" fill="none">\n'
        f"{body}\n"
        f"</g>\n"
        f"</svg>\n"
    )

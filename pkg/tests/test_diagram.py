"""Genji-mon layout determinism, injectivity, and export."""

import json

import pytest

from genjiko.diagram import (
    FULL_HEIGHT,
    PatternDiagram,
    Segment,
    diagram_to_svg,
    render_pattern,
)
from genjiko.genjimon import Partition, enumerate_partitions


def segments_by_column(diagram):
    vert = {}
    for seg in diagram.segments:
        if seg.x1 == seg.x2:
            vert[seg.x1] = (min(seg.y1, seg.y2), max(seg.y1, seg.y2))
    return vert


def connectors(diagram):
    return sorted(
        (seg.y1, min(seg.x1, seg.x2), max(seg.x1, seg.x2))
        for seg in diagram.segments
        if seg.y1 == seg.y2
    )


class TestLayout:
    def test_all_distinct_no_connectors(self):
        d = render_pattern(Partition((0, 1, 2, 3, 4)))
        assert len(d.segments) == 5
        assert connectors(d) == []
        assert all(span == (0, FULL_HEIGHT) for span in segments_by_column(d).values())

    def test_all_same_single_top_connector(self):
        d = render_pattern(Partition((0,) * 5))
        assert connectors(d) == [(FULL_HEIGHT, 0, 4)]
        assert all(span == (0, FULL_HEIGHT) for span in segments_by_column(d).values())

    def test_interleaved_groups_stack_heights(self):
        # groups {1,3} and {2,4} overlap: leftmost-column group takes 10, the other 9
        d = render_pattern(Partition((0, 1, 0, 1, 2)))
        assert connectors(d) == [(9, 2, 4), (10, 1, 3)]
        vert = segments_by_column(d)
        assert vert[3][1] == 10 and vert[1][1] == 10  # rounds 2, 4
        assert vert[4][1] == 9 and vert[2][1] == 9  # rounds 1, 3
        assert vert[0][1] == 10  # round 5, ungrouped, crosses above the 9-bar

    def test_columns_read_right_to_left(self):
        d = render_pattern(Partition((0, 1, 2, 3, 4)))
        assert d.columns == (4, 3, 2, 1, 0)

    def test_exactly_five_verticals_at_most_two_connectors(self):
        for p in enumerate_partitions(5):
            d = render_pattern(p)
            verticals = [s for s in d.segments if s.x1 == s.x2]
            bars = [s for s in d.segments if s.y1 == s.y2]
            assert len(verticals) == 5
            assert len(bars) <= 2

    def test_singleton_crossing_forces_bar_below_top(self):
        # round 4 sits inside the {2,5} span; its full-height vertical must
        # cross above that group's bar, so the bar drops to 9
        d = render_pattern(Partition((0, 1, 0, 2, 1)))
        assert (9, 0, 3) in connectors(d)
        assert segments_by_column(d)[1] == (0, FULL_HEIGHT)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_injective_over_all_partitions(self, n):
        seen = {}
        for p in enumerate_partitions(n):
            key = render_pattern(p).segments
            assert key not in seen, f"{p.key()} collides with {seen[key]}"
            seen[key] = p.key()

    def test_deterministic(self):
        p = Partition((0, 1, 0, 1, 2))
        assert render_pattern(p) == render_pattern(p)

    def test_prefix_uses_final_columns(self):
        d = render_pattern(Partition((0, 0)))
        assert d.columns == (4, 3)
        assert connectors(d) == [(FULL_HEIGHT, 3, 4)]


class TestExport:
    def test_json_is_stable_and_parseable(self):
        d = render_pattern(Partition((0, 0, 1, 0, 1)))
        blob = json.dumps(d.to_json())
        parsed = json.loads(blob)
        assert parsed["rounds"] == 5
        assert parsed["columns"]["1"] == 4
        assert parsed["segments"] == sorted(parsed["segments"])

    def test_svg_viewbox_and_stroke(self):
        svg = diagram_to_svg(render_pattern(Partition((0,) * 5)))
        assert 'viewBox="0 0 5 11"' in svg
        assert 'stroke-width="0.12"' in svg
        assert svg.count("<line") == 6

    def test_svg_coordinates_inside_viewbox(self):
        for p in enumerate_partitions(5):
            svg = diagram_to_svg(render_pattern(p))
            for part in svg.split():
                for attr in ("x1", "x2", "y1", "y2"):
                    if part.startswith(f'{attr}="'):
                        value = float(part.split('"')[1].rstrip('"/>'))
                        limit = 5 if attr.startswith("x") else 11
                        assert 0 <= value <= limit

    def test_segment_json(self):
        assert Segment(0, 10, 4, 10).to_json() == [0, 10, 4, 10]

    def test_diagram_equaliy_is_set_based(self):
        d = render_pattern(Partition((0, 1)))
        same = PatternDiagram(segments=frozenset(d.segments), columns=d.columns)
        assert d == same

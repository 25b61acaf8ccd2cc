import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from drowsy.errors import GeometryError, PerclosUndefinedError, StreamOrderError
from drowsy.landmarks import SemanticPoints, to_semantic
from drowsy.metrics import (
    PerclosWindow,
    compute_binocular_ear,
    compute_ear,
    compute_head_drop,
    compute_mar,
    metric_sample,
    perclos,
)

from conftest import hexagon, semantic_frame

# Frozen hand-arithmetic oracle values, computed coordinate by coordinate
# before the implementation existed (sqrt of explicit squared differences).
EAR_ORACLE_POINTS = ((0.0, 0.0), (0.8, 0.22), (2.0, 0.25), (3.0, 0.0), (2.1, -0.15), (0.9, -0.18))
EAR_ORACLE_VALUE = 0.13743685418725538
MAR_ORACLE_POINTS = ((10.0, 5.0), (11.2, 3.9), (12.6, 3.7), (14.1, 5.2), (12.7, 6.8), (11.3, 6.4))
MAR_ORACLE_VALUE = 0.6825556782170636


class TestEar:
    def test_symmetric_configuration_is_half(self):
        eye = ((0.0, 0.0), (1.0, 1.0), (3.0, 1.0), (4.0, 0.0), (3.0, -1.0), (1.0, -1.0))
        assert compute_ear(eye) == 0.5

    def test_closed_eye_is_zero(self):
        eye = ((0.0, 0.0), (1.0, 0.3), (3.0, 0.4), (4.0, 0.0), (3.0, 0.4), (1.0, 0.3))
        assert compute_ear(eye) == 0.0

    def test_hand_arithmetic_oracle(self):
        assert compute_ear(EAR_ORACLE_POINTS) == pytest.approx(EAR_ORACLE_VALUE, abs=1e-12)

    def test_coincident_corners_degenerate(self):
        eye = ((1.0, 1.0), (1.2, 2.0), (1.4, 2.0), (1.0, 1.0), (1.4, 0.0), (1.2, 0.0))
        with pytest.raises(GeometryError):
            compute_ear(eye)


class TestBinocularEar:
    def test_mean_of_equal_eyes(self):
        sp = to_semantic(semantic_frame(ear=0.5))
        assert compute_binocular_ear(sp) == pytest.approx(0.5, abs=1e-12)

    def test_one_closed_one_open(self):
        left = hexagon(4.0, 0.0)
        right = hexagon(4.0, 4.0 * 0.5, x0=10.0)
        sp = SemanticPoints(
            left_eye=left,
            right_eye=right,
            mouth=hexagon(6.0, 3.0, y0=20.0),
            nose_tip=(7.0, 10.0),
            left_eye_outer_corner=left[0],
            right_eye_outer_corner=right[3],
        )
        assert compute_binocular_ear(sp) == pytest.approx(0.25, abs=1e-12)

    def test_composes_single_eye_results(self):
        rng = random.Random(7)
        for _ in range(50):
            left = hexagon(rng.uniform(2, 8), rng.uniform(0.1, 3), x0=rng.uniform(-5, 5))
            right = hexagon(rng.uniform(2, 8), rng.uniform(0.1, 3), x0=rng.uniform(10, 20))
            sp = SemanticPoints(
                left_eye=left,
                right_eye=right,
                mouth=hexagon(6.0, 3.0, y0=30.0),
                nose_tip=(7.0, 12.0),
                left_eye_outer_corner=left[0],
                right_eye_outer_corner=right[3],
            )
            expected = (compute_ear(left) + compute_ear(right)) / 2.0
            assert compute_binocular_ear(sp) == expected


class TestMar:
    def test_symmetric_configuration_is_half(self):
        mouth = ((0.0, 0.0), (1.8, 1.0), (2.2, 1.0), (4.0, 0.0), (2.2, -1.0), (1.8, -1.0))
        assert compute_mar(mouth) == 0.5

    def test_shut_mouth_is_zero(self):
        mouth = ((0.0, 0.0), (1.8, 0.2), (2.2, 0.2), (4.0, 0.0), (2.2, 0.2), (1.8, 0.2))
        assert compute_mar(mouth) == 0.0

    def test_hand_arithmetic_oracle(self):
        assert compute_mar(MAR_ORACLE_POINTS) == pytest.approx(MAR_ORACLE_VALUE, abs=1e-12)

    def test_coincident_corners_degenerate(self):
        mouth = ((2.0, 2.0), (2.0, 3.0), (2.5, 3.0), (2.0, 2.0), (2.5, 1.0), (2.0, 1.0))
        with pytest.raises(GeometryError):
            compute_mar(mouth)


class TestHeadDrop:
    def test_unit_inter_ocular(self):
        sp = to_semantic(semantic_frame(head_drop=1.0, inter_ocular=1.0))
        assert compute_head_drop(sp) == pytest.approx(1.0, abs=1e-12)

    def test_nose_on_eye_line_is_zero(self):
        sp = to_semantic(semantic_frame(head_drop=0.0))
        assert compute_head_drop(sp) == 0.0

    def test_uniform_scaling_invariance(self):
        frame = semantic_frame(head_drop=0.62)
        scaled = frame.points
        scaled = tuple((3.7 * x, 3.7 * y) for x, y in scaled)
        frame_scaled = frame.__class__(
            t=frame.t, scheme=frame.scheme, points=scaled, face_present=True
        )
        a = compute_head_drop(to_semantic(frame))
        b = compute_head_drop(to_semantic(frame_scaled))
        assert b == pytest.approx(a, abs=1e-12)

    def test_coincident_eye_corners_degenerate(self):
        sp = to_semantic(semantic_frame())
        broken = SemanticPoints(
            left_eye=sp.left_eye,
            right_eye=sp.right_eye,
            mouth=sp.mouth,
            nose_tip=sp.nose_tip,
            left_eye_outer_corner=(1.0, 1.0),
            right_eye_outer_corner=(1.0, 1.0),
        )
        with pytest.raises(GeometryError):
            compute_head_drop(broken)


def rigid_transform(points, angle, scale, dx, dy):
    c, s = math.cos(angle), math.sin(angle)
    return tuple(
        (scale * (c * x - s * y) + dx, scale * (s * x + c * y) + dy) for x, y in points
    )


@given(
    width=st.floats(min_value=1.0, max_value=50.0),
    opening=st.floats(min_value=0.0, max_value=40.0),
    angle=st.floats(min_value=-math.pi, max_value=math.pi),
    scale=st.floats(min_value=0.25, max_value=4.0),
    dx=st.floats(min_value=-100.0, max_value=100.0),
    dy=st.floats(min_value=-100.0, max_value=100.0),
)
def test_aspect_ratio_rigid_invariance(width, opening, angle, scale, dx, dy):
    pts = hexagon(width, opening)
    moved = rigid_transform(pts, angle, scale, dx, dy)
    assert compute_ear(moved) == pytest.approx(compute_ear(pts), abs=1e-9)
    assert compute_mar(moved) == pytest.approx(compute_mar(pts), abs=1e-9)


def test_aspect_ratio_vertical_pair_swap_symmetry():
    rng = random.Random(11)
    for _ in range(100):
        p = [(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(6)]
        if p[0] == p[3]:
            continue
        swapped = (p[0], p[2], p[1], p[3], p[5], p[4])  # (2,6) <-> (3,5)
        assert compute_ear(tuple(p)) == compute_ear(swapped)


class TestMetricSample:
    def test_absent_exactly_when_faceless(self, neutral_frame):
        present = metric_sample(neutral_frame)
        assert present.face_present
        assert None not in (present.ear, present.mar, present.head_drop)
        gone = metric_sample(
            neutral_frame.__class__(t=1.0, scheme="semantic", points=(), face_present=False)
        )
        assert not gone.face_present
        assert (gone.ear, gone.mar, gone.head_drop) == (None, None, None)

    def test_non_negative(self, neutral_frame):
        s = metric_sample(neutral_frame)
        assert s.ear >= 0.0 and s.mar >= 0.0


def brute_force_perclos(samples):
    """Independent duration re-summation over (t, closed, monitored) triples."""
    ts = [round(t * 1000.0) for t, _, _ in samples]
    total = closed = 0
    for i, (_, is_closed, monitored) in enumerate(samples):
        if i + 1 < len(samples):
            dur = ts[i + 1] - ts[i]
        else:
            dur = ts[i] - ts[i - 1]
        if monitored:
            total += dur
            if is_closed:
                closed += dur
    if total == 0:
        return None
    return 100.0 * closed / total


class TestPerclos:
    def build(self, triples, duration_s=1e6):
        w = PerclosWindow(duration_s)
        for t, closed, monitored in triples:
            w.append(t, closed, monitored)
        return w

    def test_all_closed_is_100(self):
        w = self.build([(i * 0.1, True, True) for i in range(10)])
        assert perclos(w) == 100.0

    def test_none_closed_is_0(self):
        w = self.build([(i * 0.1, False, True) for i in range(10)])
        assert perclos(w) == 0.0

    def test_three_of_ten_is_30(self):
        triples = [(i * 0.1, i in (2, 5, 9), True) for i in range(10)]
        w = self.build(triples)
        assert perclos(w) == 30.0

    def test_matches_brute_force_on_random_windows(self):
        rng = random.Random(23)
        for _ in range(300):
            t = 0.0
            triples = []
            for _ in range(rng.randrange(2, 40)):
                t += rng.randrange(1, 200) / 1000.0
                monitored = rng.random() > 0.2
                closed = monitored and rng.random() > 0.5
                triples.append((round(t, 3), closed, monitored))
            expected = brute_force_perclos(triples)
            w = self.build(triples)
            if expected is None:
                with pytest.raises(PerclosUndefinedError):
                    perclos(w)
            else:
                assert perclos(w) == expected
                assert 0.0 <= perclos(w) <= 100.0

    def test_eviction_keeps_window_bounded_and_consistent(self):
        w = PerclosWindow(1.0)
        rng = random.Random(5)
        t = 0.0
        for _ in range(500):
            t += rng.randrange(10, 100) / 1000.0
            monitored = rng.random() > 0.1
            w.append(round(t, 3), monitored and rng.random() > 0.6, monitored)
            assert w.samples[0][0] >= round(t, 3) - 1.0
            expected = brute_force_perclos(w.samples)
            if expected is None:
                with pytest.raises(PerclosUndefinedError):
                    w.perclos()
            else:
                assert w.perclos() == expected

    def test_insufficient_data(self):
        w = PerclosWindow(10.0)
        with pytest.raises(PerclosUndefinedError):
            w.perclos()
        w.append(0.0, False, True)
        with pytest.raises(PerclosUndefinedError):
            w.perclos()
        # two samples, neither monitored: still undefined
        w2 = self.build([(0.0, False, False), (0.1, False, False)])
        with pytest.raises(PerclosUndefinedError):
            w2.perclos()

    def test_out_of_order_rejected(self):
        w = self.build([(0.0, False, True), (0.1, False, True)])
        with pytest.raises(StreamOrderError):
            w.append(0.1, False, True)

    def test_closed_requires_monitored(self):
        w = PerclosWindow(10.0)
        with pytest.raises(ValueError):
            w.append(0.0, True, False)

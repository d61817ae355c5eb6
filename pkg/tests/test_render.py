import numpy as np
import pytest

from hypatt.lorentz import PlaneCircle, random_disjoint_caps, stereographic
from hypatt.patterns import build_ideal_pattern, build_pattern_from_caps
from hypatt.render import RenderStyle, _rotation_to_north, projection_pole, render_svg


def test_default_pole_is_in_first_interstice():
    for seed in range(10):
        p = build_pattern_from_caps(random_disjoint_caps(4 + seed % 7, seed))
        x = projection_pole(p)
        assert p.caps[0].contains(x)
        assert all(not c.contains(x, strict=False) for c in p.circles)


def test_default_view_has_only_circles():
    p = build_pattern_from_caps(random_disjoint_caps(8, 3))
    moved = p.transformed(_rotation_to_north(projection_pole(p)))
    assert all(isinstance(stereographic(c), PlaneCircle) for c in moved.circles + moved.caps)
    svg = render_svg(p)
    assert svg.count("<circle") == len(p.circles) + len(p.caps)


def test_rotation_sends_pole_north(rng):
    for _ in range(20):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        np.testing.assert_allclose(_rotation_to_north(x).apply_point(x), (0, 0, 1), atol=1e-12)
    np.testing.assert_allclose(_rotation_to_north(np.array([0, 0, -1.0])).apply_point([0, 0, -1]), (0, 0, 1), atol=1e-12)


def test_ideal_pattern_marks_points():
    p = build_ideal_pattern(np.vstack([np.eye(3), -np.eye(3)]))
    svg = render_svg(p)
    # the point sent to the pole is not drawn
    assert svg.count('class="point"') == 5
    assert svg.count('class="circle"') == 8


def test_style_validation():
    with pytest.raises(ValueError):
        RenderStyle(width_px=0)
    with pytest.raises(ValueError):
        RenderStyle(project_from="east")
    assert 'width="300"' in render_svg(build_pattern_from_caps(random_disjoint_caps(5, 1)), RenderStyle(width_px=300))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pwot.errors import ConfigurationError
from pwot.geometry import Rect, intersection_area
from pwot.grid import (
    PRESETS,
    CenterSet,
    LayerSpec,
    LayoutSpec,
    fit_to_frame,
    instantiate_layer,
    preset,
    roi_of,
)

PUBLISHED_COUNTS = {
    "GP1": 144, "GP2": 400, "GP3": 900, "GP4": 400, "GP5": 400, "GP6": 500,
    "GP7": 500, "GP8": 500, "GP9": 425, "GP10": 800, "GP11": 500,
}


@pytest.mark.parametrize("name, count", PUBLISHED_COUNTS.items())
def test_preset_counts(name, count):
    layout = preset(name)
    assert layout.center_count == count
    assert sum(len(instantiate_layer(l, (300, 200))) for l in layout.layers) == count


def test_layer_structure():
    assert [l.size for l in preset("GP7").layers] == [400, 100]
    assert [l.size for l in preset("GP11").layers] == [400, 25, 25, 25, 25]
    assert [l.anchor for l in preset("GP11").layers] == ["predicted", "predicted", "top1", "top2", "top3"]
    assert not preset("GP4").predictor and preset("GP5").predictor
    assert preset("gp3") is PRESETS["GP3"]


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        preset("GP12")


def test_single_cell():
    assert instantiate_layer(LayerSpec(1, 1, 7, 3), (50, 60)).points.tolist() == [[50, 60]]


def test_three_by_three():
    pts = instantiate_layer(LayerSpec(3, 3, 2, 2), (10, 10)).points
    assert sorted(map(tuple, pts.tolist())) == [(x, y) for x in (8, 10, 12) for y in (8, 10, 12)]
    # row-major: x varies fastest
    assert pts[:3, 1].tolist() == [8, 8, 8]


def test_twenty_by_twenty_span():
    pts = instantiate_layer(LayerSpec(20, 20, 5, 5), (100, 100)).points
    assert np.ptp(pts[:, 0]) == 95 and np.ptp(pts[:, 1]) == 95


def test_roi():
    assert roi_of(CenterSet(np.array([[30, 40]])), (40, 20)) == Rect(10, 30, 40, 20)
    roi = roi_of(instantiate_layer(LayerSpec(20, 20, 5, 5), (100, 100)), (40, 17))
    assert (roi.w, roi.h) == (135, 112)
    coarse = instantiate_layer(LayerSpec(20, 20, 5, 5), (100, 100))
    dense = instantiate_layer(LayerSpec(10, 10, 2, 2), (100, 100))
    assert roi_of(CenterSet.concat([coarse, dense]), (40, 20)) == roi_of(coarse, (40, 20))


@given(
    rows=st.integers(1, 12), cols=st.integers(1, 12), sx=st.integers(1, 6), sy=st.integers(1, 6),
    ax=st.integers(-50, 50), ay=st.integers(-50, 50), dx=st.integers(-30, 30), dy=st.integers(-30, 30),
)
def test_translation_equivariance(rows, cols, sx, sy, ax, ay, dx, dy):
    layer = LayerSpec(rows, cols, sx, sy)
    a = instantiate_layer(layer, (ax, ay)).points
    b = instantiate_layer(layer, (ax + dx, ay + dy)).points
    assert np.array_equal(b - a, np.tile([dx, dy], (len(a), 1)))
    assert len(a) == rows * cols


@given(spacing=st.integers(1, 12), w=st.integers(2, 12))
def test_neighbour_overlap(spacing, w):
    pts = instantiate_layer(LayerSpec(1, 2, spacing, 1), (50, 50)).points
    a, b = (Rect.centered(int(x), int(y), w, 6) for x, y in pts)
    assert (intersection_area(a, b) > 0) == (spacing < w)


class TestFitToFrame:
    def test_shifted_inward_keeps_shape(self):
        c = instantiate_layer(LayerSpec(20, 20, 5, 5), (10, 10))
        fitted = fit_to_frame(c, (40, 20), (320, 240))
        d = fitted.points - c.points
        assert (d == d[0]).all()
        assert fitted.points[:, 0].min() == 20 and fitted.points[:, 1].min() == 10

    def test_untouched_when_inside(self):
        c = instantiate_layer(LayerSpec(5, 5, 1, 1), (160, 120))
        assert np.array_equal(fit_to_frame(c, (40, 20), (320, 240)).points, c.points)

    def test_clamped_when_too_wide(self):
        c = instantiate_layer(LayerSpec(20, 20, 5, 5), (30, 30))
        fitted = fit_to_frame(c, (40, 20), (60, 200))
        assert len(fitted) == 400
        assert fitted.points[:, 0].min() >= 20 and fitted.points[:, 0].max() <= 40

    def test_window_larger_than_frame(self):
        c = instantiate_layer(LayerSpec(2, 2, 1, 1), (5, 5))
        assert len(fit_to_frame(c, (40, 20), (30, 30))) == 0

    @given(ax=st.integers(-200, 500), ay=st.integers(-200, 400))
    def test_regions_inside(self, ax, ay):
        fitted = fit_to_frame(instantiate_layer(LayerSpec(20, 20, 5, 5), (ax, ay)), (40, 20), (320, 240))
        for x, y in fitted.points.tolist():
            assert Rect.centered(x, y, 40, 20).inside(320, 240)


def test_layout_round_trip():
    layout = preset("GP10")
    assert LayoutSpec.from_dict(layout.to_dict()) == layout


def test_layout_validation():
    with pytest.raises(ConfigurationError):
        LayoutSpec("x", (LayerSpec(2, 2, 1, 1, "top1"),))
    with pytest.raises(ConfigurationError):
        LayerSpec(2, 2, 0, 1)
    with pytest.raises(ConfigurationError):
        LayerSpec(2, 2, 1, 1, "top4")

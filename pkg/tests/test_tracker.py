import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwot import tracker as trk
from pwot.errors import ConfigurationError, DimensionError
from pwot.geometry import Rect
from pwot.quantizer import CorruptionSpec
from pwot.synthetic import SyntheticSpec, generate_synthetic_sequence


def sequence(frames=8, path=((0, 160, 120), (59, 160, 120)), seed=0, **kw):
    return generate_synthetic_sequence(SyntheticSpec(frame_count=frames, path=path, seed=seed, **kw))


@pytest.fixture(scope="module")
def static():
    # noise-free, so the true centre is the only position that reproduces the model exactly
    return sequence(background_std=(0, 0, 0), target_std=(0, 0, 0), noise_std=0.0)


def test_init_self_recognition(static):
    frames, truth = static
    state = trk.init(frames[0], truth[0], trk.TrackerConfig(layout="GP5"))
    copies = state.model.copies
    assert copies == 400
    pats = np.tile(state.pattern.ravel(), (copies, 1))
    assert (state.model.respond_many(pats, np.arange(copies)) == state.node_count).all()


def test_init_anchor_and_predictor_at_slw_centre(static):
    frames, truth = static
    state = trk.init(frames[0], truth[0])
    assert state.anchor == truth[0].center
    assert state.kalman.position == truth[0].center
    assert list(state.history.entries) == [(0, *truth[0].center)]


def test_init_deterministic(static):
    frames, truth = static
    cfg = trk.TrackerConfig(layout="GP7", seed=3)
    assert trk.init(frames[0], truth[0], cfg).digest() == trk.init(frames[0], truth[0], cfg).digest()
    other = trk.TrackerConfig(layout="GP7", seed=4)
    assert trk.init(frames[0], truth[0], cfg).digest() != trk.init(frames[0], truth[0], other).digest()


@pytest.mark.parametrize("layout", ["GP9", "GP11"])
def test_static_target_found_exactly(static, layout):
    # an odd 1-pixel dense layer puts a search region on the anchor itself
    frames, truth = static
    state = trk.init(frames[0], truth[0], trk.TrackerConfig(layout=layout))
    for f in frames[1:]:
        state, res = trk.step(state, f)
        assert res.winner == truth[0].center
        assert res.r1 == state.node_count
        assert res.confidence is not None and res.confidence > 0
        assert res.box == truth[0]


@pytest.mark.parametrize("layout, spacing", [("GP1", 2), ("GP5", 5), ("GP7", 2)])
def test_static_target_nearest_lattice_point(static, layout, spacing):
    # even lattices have no point on the anchor; the best one is a neighbour
    frames, truth = static
    cx, cy = truth[0].center
    state = trk.init(frames[0], truth[0], trk.TrackerConfig(layout=layout))
    for f in frames[1:]:
        state, res = trk.step(state, f)
        assert abs(res.winner[0] - cx) < spacing and abs(res.winner[1] - cy) < spacing
        assert not trk.is_failure(res.box, truth[0])


def test_uniform_frame_is_ambiguous():
    frame = np.full((120, 160, 3), 100, np.uint8)
    slw = Rect(60, 50, 40, 20)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        state = trk.init(frame, slw, trk.TrackerConfig(layout="GP5"))
    assert any("uniform" in str(w.message) for w in caught)
    state, res = trk.step(state, frame)
    assert res.r1 == res.r2 == state.node_count
    assert res.confidence == 0.0 and res.low_confidence
    # coasting: no measurement was recorded
    assert len(state.history) == 1


def test_moving_target_gp5():
    frames, truth = sequence(20, ((0, 100, 120), (19, 138, 120)))
    state = trk.init(frames[0], truth[0], trk.TrackerConfig(layout="GP5", colorspace="ycbcr"))
    for f, t in zip(frames[1:], truth[1:]):
        state, res = trk.step(state, f)
        assert not trk.is_failure(res.box, t)


def test_dense_layers_reported(static):
    frames, truth = static
    state = trk.init(frames[0], truth[0], trk.TrackerConfig(layout="GP11"))
    state, res = trk.step(state, frames[1])
    assert len(res.layer_winners) == 5
    assert res.winner == truth[0].center


def test_history_bounded_and_box_in_frame():
    frames, truth = sequence(30, ((0, 40, 30), (29, 280, 210)))
    cfg = trk.TrackerConfig(layout="GP5", history=4)
    state = trk.init(frames[0], truth[0], cfg)
    accepted = 0
    for f in frames[1:]:
        state, res = trk.step(state, f, CorruptionSpec(0.3, 1))
        accepted += not res.low_confidence
        assert len(state.history) == min(4, 1 + accepted)
        assert res.box.inside(320, 240) and (res.box.w, res.box.h) == (40, 20)


def test_corruption_is_deterministic(static):
    frames, truth = static
    cfg = trk.TrackerConfig(layout="GP7")

    def run():
        state = trk.init(frames[0], truth[0], cfg)
        out = []
        for f in frames[1:]:
            state, res = trk.step(state, f, CorruptionSpec(0.2, 9))
            out.append((res.winner, res.r1, res.r2))
        return out

    assert run() == run()


def test_frame_size_checked(static):
    frames, truth = static
    state = trk.init(frames[0], truth[0])
    with pytest.raises(DimensionError):
        trk.step(state, frames[1][:100])


def test_memory_budget(static):
    frames, truth = static
    cfg = trk.TrackerConfig(layout="GP5", node_size=20, memory_budget_bits=1 << 30)
    with pytest.raises(ConfigurationError, match="budget"):
        trk.init(frames[0], truth[0], cfg)
    assert trk.model_footprint(cfg, truth[0]) == 400 * 40 * 2**20


def test_parallel_model(static):
    frames, truth = static
    cfg = trk.TrackerConfig(layout="GP9", parallel=True, central_fraction=0.4)
    state = trk.init(frames[0], truth[0], cfg)
    assert state.model.footprint_bits == trk.model_footprint(cfg, truth[0]) * 400 // 425
    state, res = trk.step(state, frames[1])
    assert res.winner == truth[0].center


class TestConfidence:
    def test_examples(self):
        assert trk.confidence([10, 5, 1]) == 0.5
        assert trk.confidence([7, 7, 2]) == 0.0
        assert trk.confidence([0, 0]) is None
        with pytest.raises(ValueError):
            trk.confidence([3])

    @given(st.lists(st.integers(1, 1000), min_size=2, max_size=20), st.integers(1, 50))
    def test_scale_invariant(self, values, c):
        a = trk.confidence(values)
        b = trk.confidence([v * c for v in values])
        assert a == pytest.approx(b)
        assert int(np.argmax(values)) == int(np.argmax([v * c for v in values]))


class TestConfig:
    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            trk.TrackerConfig.from_dict({"nodesize": 3})

    def test_round_trip(self):
        cfg = trk.TrackerConfig(layout="GP11", parallel=True, threshold_scale=(1, 2, 0.5))
        assert trk.TrackerConfig.from_dict(cfg.to_dict()) == cfg

    def test_custom_layout(self):
        layout = {"name": "mine", "layers": [{"rows": 3, "cols": 3, "sxp": 4, "syp": 4}]}
        assert trk.TrackerConfig(layout=layout).layout_spec.center_count == 9

    def test_colorspace_default(self):
        assert trk.TrackerConfig(layout="GP5").resolved_colorspace == "rgb"
        assert trk.TrackerConfig(layout="GP11").resolved_colorspace == "ycbcr"
        assert trk.TrackerConfig(layout="GP5", colorspace="ycbcr").resolved_colorspace == "ycbcr"

    @pytest.mark.parametrize("kw", [{"c_min": 1.0}, {"node_size": 0}, {"colorspace": "hsv"}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigurationError):
            trk.TrackerConfig(**kw)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_results_repeat_for_any_seed(seed):
    frames, truth = sequence(4, ((0, 150, 110), (3, 156, 112)), seed=seed)
    cfg = trk.TrackerConfig(layout="GP5", seed=seed)
    results = []
    for _ in range(2):
        state = trk.init(frames[0], truth[0], cfg)
        results.append([trk.step(state, f)[1].winner for f in frames[1:]])
    assert results[0] == results[1]

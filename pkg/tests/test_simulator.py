import numpy as np
import pytest

from adaptreid.simulator import ScenarioConfig, ScenarioError, generate, inject_distractor_swap, lab_default


def frame_bytes(scenario):
    return b"".join(
        np.int64([d.frame_index, d.track_id, d.person_id]).tobytes() + d.feature.tobytes()
        for frame in scenario.frames
        for d in frame
    )


def test_noiseless_single_person():
    sc = generate(ScenarioConfig(seed=4, num_frames=50, num_persons=1, feature_dim=8, drift_sd=0.0, obs_noise_sd=0.0))
    first = sc.frames[0][0]
    for frame in sc.frames:
        assert len(frame) == 1
        assert frame[0].track_id == first.track_id
        assert np.array_equal(frame[0].feature, first.feature)


def test_occlusion_gap_and_fresh_id():
    sc = generate(ScenarioConfig(seed=1, num_frames=200, num_persons=2, feature_dim=8, occlusion_events=((0, 100, 30),)))
    before = sc.track_id_of(99, 0)
    for f in range(100, 130):
        assert not sc.visible(f, 0)
    after = sc.track_id_of(130, 0)
    assert after is not None and after != before
    assert sc.track_id_of(130, 1) == sc.track_id_of(0, 1)


def test_no_fresh_id_when_disabled():
    sc = generate(ScenarioConfig(seed=1, num_frames=60, num_persons=1, feature_dim=4,
                                 occlusion_events=((0, 10, 5),), id_switch_on_reentry=False))
    assert sc.track_id_of(20, 0) == sc.track_id_of(0, 0)


def test_same_seed_is_bit_identical():
    cfg = ScenarioConfig(seed=12, num_frames=120, feature_dim=16, occlusion_events=((1, 30, 10),),
                         appearance_changes=((2, 50, 3.0),))
    assert frame_bytes(generate(cfg)) == frame_bytes(generate(cfg))
    other = ScenarioConfig(**{**cfg.to_dict(), "seed": 13})
    assert frame_bytes(generate(other)) != frame_bytes(generate(cfg))


def test_centers_respect_separation():
    cfg = ScenarioConfig(seed=2, num_frames=1, num_persons=4, feature_dim=32, drift_sd=0.0,
                         obs_noise_sd=0.5, base_separation=6.0)
    from adaptreid.rng import Xoshiro256StarStar
    from adaptreid.simulator import _centers

    c = _centers(Xoshiro256StarStar(cfg.seed), cfg)
    dists = [np.linalg.norm(c[i] - c[j]) for i in range(4) for j in range(i + 1, 4)]
    assert min(dists) >= 6.0 * 0.5 - 1e-9


def test_ground_truth_consistency_and_unique_ids():
    sc = generate(lab_default(seed=0, feature_dim=16))
    seen = {p: set() for p in range(3)}
    truth = sc.ground_truth
    for f, frame in enumerate(sc.frames):
        ids = [d.track_id for d in frame]
        assert len(ids) == len(set(ids)) and ids == sorted(ids)
        assert set(truth[f]) == {d.person_id for d in frame}
        for d in frame:
            if f > 0 and d.person_id not in truth[f - 1]:
                assert d.track_id not in seen[d.person_id]
            seen[d.person_id].add(d.track_id)


def test_appearance_jump_magnitude():
    cfg = ScenarioConfig(seed=5, num_frames=3, num_persons=1, feature_dim=64, drift_sd=0.0, obs_noise_sd=0.0,
                         appearance_changes=((0, 2, 7.5),))
    sc = generate(cfg)
    assert np.linalg.norm(sc.frames[2][0].feature - sc.frames[1][0].feature) == pytest.approx(7.5)


def test_empirical_mean_converges():
    from adaptreid.rng import Xoshiro256StarStar
    from adaptreid.simulator import _centers

    cfg = ScenarioConfig(seed=8, num_frames=10_000, num_persons=1, feature_dim=4, drift_sd=0.0, obs_noise_sd=1.0)
    feats = np.array([frame[0].feature for frame in generate(cfg).frames])
    expected = _centers(Xoshiro256StarStar(cfg.seed), cfg)[0]
    assert np.all(np.abs(feats.mean(axis=0) - expected) <= 5 * 1.0 / np.sqrt(10_000))


def test_config_validation_lists_every_problem():
    cfg = ScenarioConfig(num_frames=10, num_persons=2, feature_dim=4, fps=0,
                         occlusion_events=((5, 3, 1), (0, 20, 0)), appearance_changes=((0, 99, 1.0),))
    with pytest.raises(ScenarioError) as err:
        generate(cfg)
    msg = str(err.value)
    for fragment in ("fps", "unknown person 5", "start frame 20", "duration", "frame 99"):
        assert fragment in msg


def test_swap_exchanges_ids_from_frame_on():
    sc = generate(ScenarioConfig(seed=3, num_frames=20, num_persons=3, feature_dim=4))
    a0, b0 = sc.track_id_of(10, 0), sc.track_id_of(10, 1)
    sw = inject_distractor_swap(sc, 10, 0, 1)
    assert sw.track_id_of(9, 0) == a0
    assert sw.track_id_of(10, 0) == b0 and sw.track_id_of(10, 1) == a0
    assert sw.track_id_of(19, 0) == b0
    assert sw.track_id_of(10, 2) == sc.track_id_of(10, 2)
    assert sw.swaps == [(10, 0, 1)]


def test_swap_then_occlusion_toy_trace():
    # hand trace: frame 0 ids a=1, b=2; swap at 1 -> a=2, b=1; a hidden at 2 -> b keeps 1;
    # a returns at 3 with a fresh id 3
    cfg = ScenarioConfig(seed=0, num_frames=4, num_persons=2, feature_dim=2, occlusion_events=((0, 2, 1),))
    sw = inject_distractor_swap(generate(cfg), 1, 0, 1)
    assert [sw.ground_truth[f] for f in range(4)] == [{0: 1, 1: 2}, {0: 2, 1: 1}, {1: 1}, {0: 3, 1: 1}]


def test_swap_with_self_is_identity():
    sc = generate(ScenarioConfig(seed=3, num_frames=10, num_persons=2, feature_dim=4))
    assert frame_bytes(inject_distractor_swap(sc, 4, 1, 1)) == frame_bytes(sc)


def test_swap_requires_visibility():
    sc = generate(ScenarioConfig(seed=3, num_frames=10, num_persons=2, feature_dim=4, occlusion_events=((0, 4, 2),)))
    with pytest.raises(ScenarioError, match="person 0 not visible"):
        inject_distractor_swap(sc, 5, 0, 1)

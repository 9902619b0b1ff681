import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nllrtc.exceptions import DegenerateGroupError, ShapeError
from nllrtc.rearrange import WorkingTensor
from nllrtc.similarity import (PatchRef, SearchConfig, candidate_anchors, group_patches, ncc,
                               search_similar)
from nllrtc.tensor import unfold


def ncc_oracle(a, b, mask=None):
    """Plain loops over the jointly observed entries."""
    a, b = np.ravel(a), np.ravel(b)
    keep = np.ones(a.size, bool) if mask is None else np.ravel(mask).astype(bool)
    xs = [float(a[i]) for i in range(a.size) if keep[i]]
    ys = [float(b[i]) for i in range(b.size) if keep[i]]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = math.sqrt(sum((x - mx) ** 2 for x in xs)) * math.sqrt(sum((y - my) ** 2 for y in ys))
    return num / den


def working(values, times, mask=None):
    values = np.asarray(values, dtype=float)
    if mask is None:
        mask = np.ones(values.shape, dtype=np.uint8)
    m, cols, b = values.shape
    return WorkingTensor(values, mask, (m, cols // times, b, times), 1.0)


def test_ncc_self(rng):
    p = rng.random((4, 4, 3))
    assert ncc(p, p) == pytest.approx(1.0, abs=1e-14)


def test_ncc_negated_and_shifted(rng):
    p = rng.random((4, 4, 3))
    assert ncc(p, -p + 7.0) == pytest.approx(-1.0, abs=1e-14)


def test_ncc_fixed_pair_against_oracle():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
    b = np.array([[2.0, 3.0], [5.0, 6.0]])[:, :, None]
    expected = ncc_oracle(a, b)
    assert expected == pytest.approx(7 / math.sqrt(50), abs=1e-15)
    assert ncc(a, b) == pytest.approx(expected, abs=1e-14)


def test_ncc_uses_joint_entries_only(rng):
    a, b = rng.random((4, 4, 2)), rng.random((4, 4, 2))
    ma = (rng.random(a.shape) > 0.2).astype(np.uint8)
    mb = (rng.random(a.shape) > 0.2).astype(np.uint8)
    b_garbage = np.where(mb == 1, b, 1e6)
    expected = ncc_oracle(a, b, ma & mb)
    assert ncc(a, b_garbage, ma, mb, min_fraction=0.3) == pytest.approx(expected, abs=1e-12)


def test_ncc_undefined_cases(rng):
    p = rng.random((4, 4, 1))
    assert ncc(p, np.full_like(p, 3.0)) is None
    sparse = np.zeros(p.shape, dtype=np.uint8)
    sparse[:2, :2] = 1
    assert ncc(p, p, sparse, None, min_fraction=0.5) is None
    with pytest.raises(ShapeError):
        ncc(p, p[:2])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), shift=st.floats(-50, 50), scale=st.floats(0.01, 100))
def test_ncc_symmetry_and_invariance(seed, shift, scale):
    r = np.random.default_rng(seed)
    a, b = r.random((4, 4, 3)), r.random((4, 4, 3))
    q = ncc(a, b)
    assert abs(q) <= 1 + 1e-12
    assert ncc(b, a) == pytest.approx(q, abs=1e-12)
    assert ncc(a + shift, b) == pytest.approx(q, abs=1e-9)
    assert ncc(a, scale * b) == pytest.approx(q, abs=1e-9)


def test_search_on_repeated_patch_field(rng):
    tile = rng.random((4, 4, 2))
    w = working(np.tile(tile, (5, 6, 1)), times=4)
    cfg = SearchConfig(patch_width=4, radius=8, step=4, min_group=1)
    target = PatchRef(8, 8, 4)
    refs = search_similar(w, target, cfg)
    rows, cols = candidate_anchors(w.values.shape, target, 4, cfg)
    assert len(refs) == len(rows) * len(cols) == 5 * 5
    assert refs[0] == target
    for ref in refs:
        np.testing.assert_array_equal(w.values[ref.row:ref.row + 4, ref.col:ref.col + 4], tile)


def test_search_keeps_planted_duplicate_and_drops_noise(rng):
    values = rng.random((12, 24, 2))
    target = PatchRef(0, 0, 4)
    patch = values[0:4, 0:4].copy()
    noise = rng.standard_normal(patch.shape)
    noise -= noise.mean()
    noise -= (noise * (patch - patch.mean())).sum() / ((patch - patch.mean()) ** 2).sum() * (patch - patch.mean())
    # orthogonal noise scaled for a correlation of 0.95 with the target
    c = 0.95
    dev = patch - patch.mean()
    noise *= np.sqrt((dev**2).sum() * (1 - c**2) / c**2 / (noise**2).sum())
    duplicate = patch + noise
    values[8:12, 8:12] = duplicate
    w = working(values, times=4)
    assert ncc_oracle(patch, duplicate) == pytest.approx(0.95, abs=1e-12)
    noise_q = ncc_oracle(patch, values[4:8, 4:8])
    assert noise_q < 0.91

    refs = search_similar(w, target, SearchConfig(radius=12, step=4, min_group=1))
    assert PatchRef(8, 8, 4) in refs
    assert PatchRef(4, 4, 4) not in refs


def test_search_window_smaller_than_step(rng):
    w = working(rng.random((8, 16, 1)), times=4)
    target = PatchRef(2, 4, 4)
    assert search_similar(w, target, SearchConfig(radius=1, step=2, min_group=10)) == [target]


def test_search_backfills_to_min_group(rng):
    w = working(rng.random((16, 32, 2)), times=4)
    target = PatchRef(4, 8, 4)
    refs = search_similar(w, target, SearchConfig(radius=8, step=2, min_group=6, threshold=0.999))
    assert len(refs) == 6 and refs[0] == target


def test_search_rejects_unobserved_target(rng):
    values = rng.random((8, 16, 1))
    mask = np.ones(values.shape, dtype=np.uint8)
    mask[0:4, 0:4] = 0
    with pytest.raises(DegenerateGroupError):
        search_similar(working(values, 4, mask), PatchRef(0, 0, 4), SearchConfig(radius=4))


def test_search_rejects_misaligned_target(rng):
    w = working(rng.random((8, 16, 1)), times=4)
    with pytest.raises(ShapeError):
        search_similar(w, PatchRef(0, 2, 4), SearchConfig())


def test_search_output_contains_target_property(rng):
    for seed in range(10):
        r = np.random.default_rng(seed)
        values = r.random((12, 24, 2))
        mask = (r.random(values.shape) > 0.2).astype(np.uint8)
        w = working(values, 4, mask)
        target = PatchRef(4, 8, 4)
        cfg = SearchConfig(radius=6, step=2, min_group=5)
        try:
            refs = search_similar(w, target, cfg)
        except DegenerateGroupError:
            continue
        assert refs[0] == target
        assert len(refs) == len(set(refs))
        assert len(refs) >= min(cfg.min_group, 1)


def test_group_single_ref(rng):
    w = working(rng.random((8, 8, 3)), times=4)
    g = group_patches(w, [PatchRef(2, 4, 4)])
    assert g.values.shape == (4, 4, 3, 1)
    np.testing.assert_array_equal(g.values[..., 0], w.values[2:6, 4:8])


def test_group_of_48_patches(rng):
    w = working(rng.random((40, 40, 3)), times=4)
    refs = [PatchRef(r, c, 4) for r in range(0, 24, 4) for c in range(0, 32, 4)]
    g = group_patches(w, refs)
    assert g.values.shape == (4, 4, 3, 48)
    assert unfold(g.values, 3).shape == (48, 48)
    for p, ref in enumerate(refs):
        np.testing.assert_array_equal(g.values[..., p], w.values[ref.row:ref.row + 4, ref.col:ref.col + 4])
        np.testing.assert_array_equal(g.mask[..., p], w.mask[ref.row:ref.row + 4, ref.col:ref.col + 4])


def test_group_duplicate_refs(rng):
    w = working(rng.random((8, 8, 2)), times=4)
    g = group_patches(w, [PatchRef(0, 0, 4), PatchRef(0, 0, 4)])
    u = unfold(g.values, 3)
    np.testing.assert_array_equal(u[0], u[1])


def test_group_out_of_bounds(rng):
    w = working(rng.random((8, 8, 2)), times=4)
    with pytest.raises(ShapeError):
        group_patches(w, [PatchRef(6, 0, 4)])

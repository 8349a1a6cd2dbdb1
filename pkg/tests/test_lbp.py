import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import rotations, transitions
from ringworm.imageio import BoundsError, GrayImage, rotate90ccw
from ringworm.lbp import (
    BASIC,
    BILINEAR,
    GRID_SNAP,
    RIU2,
    ROTATION_INVARIANT,
    LbpParams,
    compute_lbp_map,
    lbp_code,
    neighbor_offsets,
    riu2_code,
    ror,
    rotation_invariant_code,
    sample_neighbors,
    sign,
    uniformity,
)

codes8 = st.integers(0, 255)
small_images = st.tuples(st.integers(3, 14), st.integers(3, 14)).flatmap(
    lambda hw: arrays(np.uint8, hw, elements=st.integers(0, 200)).map(GrayImage.from_array)
)


def test_sign():
    assert (sign(0), sign(-5), sign(50)) == (0, 0, 1)


def test_params_validation():
    for bad in (dict(P=1), dict(P=25), dict(R=0), dict(sampling="x"), dict(variant="y")):
        with pytest.raises(ValueError):
            LbpParams(**bad)
    assert LbpParams(R=1.5).margin == 2
    assert LbpParams().bin_count == 10
    assert LbpParams(variant=BASIC).bin_count == 256


def test_offsets_quarter_angles():
    got = neighbor_offsets(LbpParams(P=4, R=1))
    np.testing.assert_allclose(got, [(0, 1), (-1, 0), (0, -1), (1, 0)], atol=1e-15)


def test_offset_p8_diagonal():
    dx, dy = neighbor_offsets(LbpParams(P=8, R=1))[1]
    assert dx == pytest.approx(-math.sqrt(2) / 2, abs=1e-12)
    assert dy == pytest.approx(math.sqrt(2) / 2, abs=1e-12)


@pytest.mark.parametrize("P,R", [(4, 1), (8, 1), (8, 2.5), (16, 2), (24, 3)])
def test_offsets_on_circle(P, R):
    for dx, dy in neighbor_offsets(LbpParams(P=P, R=R)):
        assert math.hypot(dx, dy) == pytest.approx(R, abs=1e-12)


@pytest.mark.parametrize("sampling", [GRID_SNAP, BILINEAR])
def test_sample_constant(sampling):
    img = GrayImage(5, 5, [7] * 25)
    vals = sample_neighbors(img, (2, 2), LbpParams(P=8, R=1, sampling=sampling))
    assert vals == pytest.approx([7.0] * 8)


def test_grid_snap_is_3x3_ring():
    img = GrayImage.from_array(np.arange(9).reshape(3, 3))
    vals = sample_neighbors(img, (1, 1), LbpParams(sampling=GRID_SNAP))
    # neighbor order starts straight below the center and turns toward the left
    # (offset i = (-sin, cos) in (col, row))
    assert vals == [7, 6, 3, 0, 1, 2, 5, 8]


def test_integer_offsets_agree_between_modes():
    rng = np.random.default_rng(3)
    img = GrayImage.from_array(rng.integers(0, 256, (7, 7)))
    for P, R in ((4, 1), (4, 2)):
        a = sample_neighbors(img, (3, 3), LbpParams(P=P, R=R, sampling=GRID_SNAP))
        b = sample_neighbors(img, (3, 3), LbpParams(P=P, R=R, sampling=BILINEAR))
        assert a == b


def test_bilinear_diagonal_value():
    img = GrayImage.from_array([[0, 0, 0], [0, 0, 0], [100, 0, 0]])
    vals = sample_neighbors(img, (1, 1), LbpParams(sampling=BILINEAR))
    # neighbor 1 sits at (-0.7071, +0.7071): weight of the lower-left pixel
    w = (math.sqrt(2) / 2) ** 2
    assert vals[1] == pytest.approx(100 * w)


def test_sample_near_border():
    img = GrayImage(5, 5, [0] * 25)
    with pytest.raises(BoundsError):
        sample_neighbors(img, (0, 2), LbpParams())


def test_lbp_code_examples():
    assert lbp_code(100, [120, 90, 100, 101, 99, 150, 100, 80]) == 41
    assert lbp_code(5, [5] * 8) == 0
    assert lbp_code(5, [6] * 8) == 255
    with pytest.raises(ValueError):
        lbp_code(5, [6] * 7, P=8)


def test_ror_examples():
    assert ror(0b0001, 1, 4) == 0b1000
    assert ror(0b11001011, 2, 8) == 0b11110010
    with pytest.raises(ValueError):
        ror(16, 1, 4)


@given(codes8, st.integers(0, 40))
def test_ror_matches_string_rotation(c, k):
    assert ror(c, k, 8) == rotations(c, 8)[k % 8]
    assert ror(c, 8, 8) == c


def test_rotation_invariant_examples():
    assert rotation_invariant_code(0b11001011, 8) == 47
    assert sorted(rotations(0b11001011, 8)) == sorted([203, 229, 242, 121, 188, 94, 47, 151])
    assert rotation_invariant_code(0, 8) == 0
    assert rotation_invariant_code(255, 8) == 255
    with pytest.raises(ValueError):
        rotation_invariant_code(256, 8)


@given(codes8, st.integers(0, 7))
def test_rotation_invariant_orbit(c, k):
    ri = rotation_invariant_code(c, 8)
    assert rotation_invariant_code(ror(c, k, 8), 8) == ri
    assert rotation_invariant_code(ri, 8) == ri


@pytest.mark.parametrize("P", [4, 8])
def test_rotation_invariant_matches_brute_force(P):
    for c in range(1 << P):
        assert rotation_invariant_code(c, P) == min(rotations(c, P))


def test_uniformity_examples():
    assert uniformity(0, 8) == 0
    assert uniformity(0b00001111, 8) == 2
    assert uniformity(0b01010101, 8) == 8


@pytest.mark.parametrize("P", [3, 4, 8, 12])
def test_uniformity_matches_transitions(P):
    for c in range(1 << P):
        u = uniformity(c, P)
        assert u == transitions(c, P)
        assert u % 2 == 0


def test_riu2_examples():
    assert riu2_code(255, 8) == 8
    assert riu2_code(0, 8) == 0
    assert riu2_code(0b01010101, 8) == 9


@given(codes8, st.integers(0, 7))
def test_riu2_rotation_law(c, k):
    r = riu2_code(c, 8)
    assert riu2_code(ror(c, k, 8), 8) == r
    assert 0 <= r <= 9


@pytest.mark.parametrize("P", [4, 8, 16])
def test_uniform_census(P):
    count = sum(transitions(c, P) <= 2 for c in range(1 << P))
    assert count == P * (P - 1) + 2
    assert sum(uniformity(c, P) <= 2 for c in range(1 << P)) == count


@pytest.mark.parametrize("variant", [BASIC, ROTATION_INVARIANT, RIU2])
@pytest.mark.parametrize("sampling", [GRID_SNAP, BILINEAR])
def test_constant_image_codes_zero(variant, sampling):
    m = compute_lbp_map(GrayImage(6, 5, [90] * 30), LbpParams(sampling=sampling, variant=variant))
    assert m.codes.shape == (3, 4)
    assert not m.codes.any()


def test_interior_size_paper_image():
    m = compute_lbp_map(GrayImage(144, 144, [0] * 144 * 144))
    assert m.codes.size == 142 * 142 == 20164
    assert m.margin == 1


def test_map_matches_per_pixel_path():
    rng = np.random.default_rng(11)
    img = GrayImage.from_array(rng.integers(0, 256, (9, 10)))
    for params in (
        LbpParams(variant=BASIC),
        LbpParams(P=8, R=1.5, sampling=BILINEAR, variant=BASIC),
        LbpParams(P=12, R=2, sampling=BILINEAR, variant=BASIC),
    ):
        m = compute_lbp_map(img, params)
        k = params.margin
        for r in range(m.codes.shape[0]):
            for c in range(m.codes.shape[1]):
                center = int(img.pixels[r + k, c + k])
                nb = sample_neighbors(img, (c + k, r + k), params)
                assert m.codes[r, c] == lbp_code(center, nb, params.P)


def test_variant_maps_consistent():
    rng = np.random.default_rng(5)
    img = GrayImage.from_array(rng.integers(0, 256, (12, 12)))
    basic = compute_lbp_map(img, LbpParams(variant=BASIC)).codes
    ri = compute_lbp_map(img, LbpParams(variant=ROTATION_INVARIANT)).codes
    riu = compute_lbp_map(img, LbpParams(variant=RIU2)).codes
    assert basic.max() < 256
    assert all(ri.flat[i] == rotation_invariant_code(int(basic.flat[i]), 8) for i in range(basic.size))
    assert all(riu.flat[i] == riu2_code(int(basic.flat[i]), 8) for i in range(basic.size))


def test_large_P_map():
    rng = np.random.default_rng(2)
    img = GrayImage.from_array(rng.integers(0, 256, (10, 10)))
    m = compute_lbp_map(img, LbpParams(P=24, R=3, sampling=BILINEAR))
    assert m.codes.shape == (4, 4)
    assert m.codes.max() <= 25


def test_image_too_small():
    with pytest.raises(ValueError):
        compute_lbp_map(GrayImage(2, 5, [0] * 10))


@settings(max_examples=60)
@given(small_images, st.integers(0, 55), st.sampled_from([GRID_SNAP, BILINEAR]))
def test_gray_shift_invariance(img, c, sampling):
    params = LbpParams(sampling=sampling, variant=BASIC)
    shifted = GrayImage.from_array(img.pixels.astype(int) + c)
    assert compute_lbp_map(shifted, params) == compute_lbp_map(img, params)


@settings(max_examples=60)
@given(small_images, st.data())
def test_monotone_invariance_grid_snap(img, data):
    levels = sorted(data.draw(st.sets(st.integers(0, 255), min_size=201, max_size=201)))
    remap = np.asarray(levels)
    mapped = GrayImage.from_array(remap[img.pixels])
    params = LbpParams(variant=BASIC)
    assert compute_lbp_map(mapped, params) == compute_lbp_map(img, params)


@settings(max_examples=40)
@given(st.integers(3, 16).flatmap(lambda n: arrays(np.uint8, (n, n))))
def test_quarter_turn_preserves_riu2_multiset(px):
    img = GrayImage.from_array(px)
    a = compute_lbp_map(img).codes
    b = compute_lbp_map(rotate90ccw(img)).codes
    # the interior rotates with the image, so codes match pixel for pixel
    assert np.array_equal(np.rot90(a), b)
    assert np.array_equal(np.bincount(a.ravel(), minlength=10), np.bincount(b.ravel(), minlength=10))

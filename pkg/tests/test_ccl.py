import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hwseg.ccl import BBox, Component, filter_by_area, label_components, labels_to_pgm
from hwseg.raster import BinaryMask, load_gray

from oracles import NEIGHBORS_8, flood_fill_labels, same_partition

masks = st.tuples(st.integers(1, 20), st.integers(1, 20)).flatmap(
    lambda hw: arrays(np.bool_, hw)
).map(BinaryMask)


def comp(cid, area):
    return Component(cid, area, BBox(0, 0, 0, 0))


def test_empty_mask():
    labels, comps = label_components(BinaryMask(np.zeros((4, 5), bool)))
    assert comps == []
    assert not labels.label.any()


def test_diagonal_pixels_connect():
    fg = np.zeros((3, 3), bool)
    fg[0, 0] = fg[1, 1] = True
    labels, comps = label_components(BinaryMask(fg))
    assert len(comps) == 1
    assert comps[0].area == 2
    assert comps[0].bbox == BBox(0, 1, 0, 1)
    assert labels.label[0, 0] == labels.label[1, 1] == 1


def test_anti_diagonal_and_u_shape():
    # a U shape is joined only through its bottom row; labels merge late
    fg = np.array(
        [
            [1, 0, 0, 0, 1],
            [1, 0, 0, 0, 1],
            [0, 1, 1, 1, 0],
            [0, 0, 0, 0, 0],
            [0, 0, 1, 0, 0],
            [0, 1, 0, 0, 0],
        ],
        bool,
    )
    labels, comps = label_components(BinaryMask(fg))
    assert [c.area for c in comps] == [7, 2]
    assert comps[0].bbox == BBox(0, 4, 0, 2)
    assert comps[1].bbox == BBox(1, 2, 4, 5)


def test_ids_follow_raster_first_encounter():
    fg = np.zeros((5, 6), bool)
    fg[3, 0] = True  # first seen third
    fg[0, 5] = True  # first seen first
    fg[1, 2] = fg[4, 4] = True
    labels, comps = label_components(BinaryMask(fg))
    assert [c.id for c in comps] == [1, 2, 3, 4]
    assert labels.label[0, 5] == 1
    assert labels.label[1, 2] == 2
    assert labels.label[3, 0] == 3
    assert labels.label[4, 4] == 4


@pytest.mark.parametrize("fill", [0.05, 0.2, 0.5, 0.7])
def test_matches_flood_fill(fill):
    rng = np.random.default_rng(int(fill * 100))
    for _ in range(40):
        fg = rng.random((64, 64)) < fill
        labels, comps = label_components(BinaryMask(fg))
        ref, k = flood_fill_labels(fg)
        assert len(comps) == k
        assert same_partition(labels.label, ref)


@settings(max_examples=200)
@given(masks)
def test_partition_properties(mask):
    labels, comps = label_components(mask)
    lab = labels.label
    fg = mask.foreground
    # every foreground pixel labelled, labels contiguous 1..K
    assert np.array_equal(lab > 0, fg)
    assert sorted(set(lab[fg].tolist())) == list(range(1, len(comps) + 1))
    assert sum(c.area for c in comps) == int(fg.sum())
    assert same_partition(lab, flood_fill_labels(fg)[0])

    h, w = fg.shape
    # maximality: 8-adjacent foreground pixels share a label
    for dy, dx in NEIGHBORS_8:
        a = lab[max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)]
        b = lab[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)]
        both = (a > 0) & (b > 0)
        assert np.array_equal(a[both], b[both])

    for c in comps:
        ys, xs = np.nonzero(lab == c.id)
        assert c.area == ys.size >= 1
        # tight box
        assert (c.bbox.x_min, c.bbox.x_max) == (xs.min(), xs.max())
        assert (c.bbox.y_min, c.bbox.y_max) == (ys.min(), ys.max())
        assert c.area <= c.bbox.area
        assert c.center_y == (c.bbox.y_min + c.bbox.y_max) / 2

    again, comps2 = label_components(mask)
    assert again == labels and comps2 == comps


def test_large_single_component():
    fg = np.ones((300, 400), bool)
    _, comps = label_components(BinaryMask(fg))
    assert len(comps) == 1 and comps[0].area == 120000


def test_filter_by_area():
    comps = [comp(1, 1), comp(2, 20), comp(3, 500)]
    assert [c.area for c in filter_by_area(comps, 5)] == [20, 500]
    assert filter_by_area(comps, 1) == comps
    comps = [comp(1, 3), comp(2, 15), comp(3, 16)]
    assert [c.area for c in filter_by_area(comps, 15, 15)] == [15]


def test_filter_by_area_bad_params():
    with pytest.raises(ValueError):
        filter_by_area([], 10, 5)
    with pytest.raises(ValueError):
        filter_by_area([], 0)


def test_label_debug_pgm():
    fg = np.zeros((1, 600), bool)
    fg[0, ::2] = True  # 300 isolated pixels
    labels, comps = label_components(BinaryMask(fg))
    img = load_gray(labels_to_pgm(labels)).data
    assert img[0, 1] == 0
    assert img[0, 0] == 2  # label 1
    assert img[0, 2 * 253] == 255  # label 254
    assert img[0, 2 * 254] == 1  # label 255 -> 0 + 1
    assert img[0, 2 * 255] == 2  # label 256 -> 1 + 1


def test_bbox_helpers():
    b = BBox(2, 5, 1, 3)
    assert b.as_xyxy() == [2, 1, 5, 3]
    assert BBox.from_xyxy(b.as_xyxy()) == b
    assert (b.width, b.height, b.area) == (4, 3, 12)
    with pytest.raises(ValueError):
        BBox(3, 2, 0, 0)

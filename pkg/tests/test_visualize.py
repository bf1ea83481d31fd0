import numpy as np

from salientrank.core import InstanceMap, SaliencyMap
from salientrank.ranking import RankVector
from salientrank.visualize import (
    BORDER_CORRECT,
    BORDER_INCORRECT,
    RANK_PALETTE,
    ranks_match,
    render_rank_overlay,
)


def hex_rgb(code):
    code = code.lstrip("#")
    return tuple(int(code[i : i + 2], 16) for i in (0, 2, 4))


def test_palette_snapshot():
    assert len(RANK_PALETTE) == 12
    assert RANK_PALETTE[0] == "#882E72"
    assert RANK_PALETTE[-1] == "#DC050C"
    assert len(set(RANK_PALETTE)) == 12


def test_single_instance_blue_border():
    sal = SaliencyMap(np.full((8, 8), 0.5))
    inst = InstanceMap(np.pad(np.ones((2, 2), dtype=int), 3))
    gt = RankVector(((1, 1.0),))
    image = render_rank_overlay(sal, inst, gt)
    assert image.shape == (8, 8, 3)
    assert tuple(image[0, 0]) == hex_rgb(BORDER_CORRECT)
    assert tuple(image[4, 4]) == hex_rgb(RANK_PALETTE[0])


def test_reversed_prediction_red_border():
    sal = SaliencyMap(np.array([[0.2, 0.2, 0.0, 0.9, 0.9]] * 5))
    labels = np.zeros((5, 5), dtype=int)
    labels[:, :2] = 1
    labels[:, 3:] = 2
    inst = InstanceMap(labels)
    gt = RankVector(((1, 1.0), (2, 2.0)))  # truth says 1 beats 2; saliency disagrees
    image = render_rank_overlay(sal, inst, gt, border=1)
    assert tuple(image[0, 0]) == hex_rgb(BORDER_INCORRECT)
    # most salient instance (2) wears the first palette entry (interior pixels)
    assert tuple(image[2, 3]) == hex_rgb(RANK_PALETTE[0])
    assert tuple(image[2, 1]) == hex_rgb(RANK_PALETTE[1])


def test_ranks_match_requires_exact_tie_structure():
    a = RankVector(((1, 1.5), (2, 1.5)))
    b = RankVector(((1, 1.0), (2, 2.0)))
    assert ranks_match(a, a)
    assert not ranks_match(a, b)


def test_render_is_deterministic():
    rng = np.random.Generator(np.random.PCG64(0))
    sal = SaliencyMap(rng.uniform(size=(16, 16)))
    labels = np.zeros((16, 16), dtype=int)
    labels[2:6, 2:6] = 1
    labels[9:14, 9:14] = 2
    inst = InstanceMap(labels)
    gt = RankVector(((1, 1.0), (2, 2.0)))
    a = render_rank_overlay(sal, inst, gt)
    b = render_rank_overlay(sal, inst, gt)
    assert np.array_equal(a, b)

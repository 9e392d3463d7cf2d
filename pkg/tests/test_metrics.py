import numpy as np
import pytest

from covletnet.metrics import (accuracy, confusion_matrix, format_mean_std, macro_precision,
                               macro_recall)


def test_hand_confusion_matrix():
    y = [0, 0, 0, 1, 1, 2]
    pred = [0, 1, 0, 1, 2, 2]
    cm = confusion_matrix(y, pred, 3)
    assert cm.tolist() == [[2, 1, 0], [0, 1, 1], [0, 0, 1]]
    # precision per class: 2/2, 1/2, 1/2 ; recall: 2/3, 1/2, 1/1
    assert macro_precision(y, pred, 3) == pytest.approx((1 + 0.5 + 0.5) / 3)
    assert macro_recall(y, pred, 3) == pytest.approx((2 / 3 + 0.5 + 1) / 3)
    assert accuracy(y, pred) == pytest.approx(4 / 6)


@pytest.mark.parametrize("C", [2, 3, 4])
def test_constant_predictor_recall(C):
    y = np.repeat(np.arange(C), 3)
    assert macro_recall(y, np.zeros_like(y), C) == pytest.approx(1 / C)
    # never-predicted classes count as zero precision (0/0 -> 0)
    assert macro_precision(y, np.zeros_like(y), C) == pytest.approx((1 / C) / C)


def test_perfect_predictor():
    y = [0, 1, 2, 1]
    assert accuracy(y, y) == macro_precision(y, y, 3) == macro_recall(y, y, 3) == 1.0


def test_mean_std_format():
    assert format_mean_std([0.85, 0.86, 0.87]) == "0.860±0.008"

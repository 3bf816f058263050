import numpy as np
import pytest

from woundseg.errors import ContractError
from woundseg.metrics import MetricsReport, compute_micro_metrics

from oracles import reference_pixel_counts


def random_mask_pair(rng, h=8, w=8):
    return (
        (rng.random((h, w)) < 0.5).astype(np.uint8),
        (rng.random((h, w)) < 0.5).astype(np.uint8),
    )


class TestComputeMicroMetrics:
    def test_perfect_prediction(self):
        gt = np.zeros((6, 6), np.uint8)
        gt[2:4, 2:5] = 1
        report = compute_micro_metrics([gt], [gt])
        assert report.iou == report.dsc == report.prc == report.rec == 1.0

    def test_worked_four_by_four_example(self):
        gt = np.zeros((4, 4), np.uint8)
        gt[0, 0:4] = 1  # 4 foreground pixels
        pred = np.zeros((4, 4), np.uint8)
        pred[0, 0:2] = 1  # overlap 2
        pred[1, 0:2] = 1  # 2 false positives
        report = compute_micro_metrics([pred], [gt])
        assert (report.tp, report.fp, report.fn) == (2, 2, 2)
        assert report.iou == pytest.approx(1 / 3)
        assert report.dsc == pytest.approx(1 / 2)
        assert report.prc == pytest.approx(1 / 2)
        assert report.rec == pytest.approx(1 / 2)
        assert (report.tp, report.fp, report.fn, report.tn) == reference_pixel_counts(pred, gt)

    def test_micro_differs_from_macro(self):
        # one perfect image with 10 foreground pixels plus the 4x4 case:
        # micro accumulates counts first -> iou = 12/16 = 0.75
        perfect = np.zeros((5, 5), np.uint8)
        perfect.flat[:10] = 1
        gt = np.zeros((4, 4), np.uint8)
        gt[0, 0:4] = 1
        pred = np.zeros((4, 4), np.uint8)
        pred[0, 0:2] = 1
        pred[1, 0:2] = 1
        report = compute_micro_metrics([perfect, pred], [perfect, gt])
        assert (report.tp, report.fp, report.fn) == (12, 2, 2)
        assert report.iou == pytest.approx(0.75)
        macro_mean = (1.0 + 1 / 3) / 2
        assert report.iou != pytest.approx(macro_mean)

    def test_counts_match_oracle_on_random_pairs(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            pred, gt = random_mask_pair(rng)
            report = compute_micro_metrics([pred], [gt])
            assert (report.tp, report.fp, report.fn, report.tn) == \
                reference_pixel_counts(pred, gt)

    def test_dice_iou_identity(self):
        rng = np.random.default_rng(23)
        preds, gts = [], []
        for _ in range(50):
            pred, gt = random_mask_pair(rng)
            preds.append(pred)
            gts.append(gt)
        report = compute_micro_metrics(preds, gts)
        assert abs(report.dsc - 2 * report.iou / (1 + report.iou)) < 1e-12
        assert report.dsc >= report.iou
        for value in (report.iou, report.dsc, report.prc, report.rec):
            assert 0.0 <= value <= 1.0

    def test_empty_split_rejected(self):
        with pytest.raises(ValueError):
            compute_micro_metrics([], [])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ContractError):
            compute_micro_metrics([np.zeros((4, 4))], [np.zeros((5, 5))])

    def test_nonbinary_mask_rejected(self):
        with pytest.raises(ContractError):
            compute_micro_metrics([np.full((4, 4), 2)], [np.zeros((4, 4))])

    def test_counts_are_python_ints(self):
        pred = np.ones((512, 512), np.uint8)
        report = compute_micro_metrics([pred] * 3, [pred] * 3)
        assert isinstance(report.tp, int)
        assert report.tp == 3 * 512 * 512


class TestMetricsReport:
    def test_formulas(self):
        report = MetricsReport(tp=6, fp=2, fn=4, tn=88)
        assert report.iou == pytest.approx(6 / 12)
        assert report.dsc == pytest.approx(12 / 18)
        assert report.prc == pytest.approx(6 / 8)
        assert report.rec == pytest.approx(6 / 10)

    def test_as_dict_round(self):
        report = MetricsReport(tp=1, fp=0, fn=0, tn=3)
        d = report.as_dict()
        assert d["iou"] == 1.0 and d["tn"] == 3

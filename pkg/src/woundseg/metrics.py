"""Micro-averaged segmentation metrics over the foreground class.

Pixel-level TP/FP/FN/TN are accumulated across every image of a split
before any ratio is formed, so the result is the micro average rather
than a mean of per-image scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def iou(self) -> float:
        return self._ratio(self.tp, self.tp + self.fp + self.fn)

    @property
    def dsc(self) -> float:
        return self._ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)

    @property
    def prc(self) -> float:
        return self._ratio(self.tp, self.tp + self.fp)

    @property
    def rec(self) -> float:
        return self._ratio(self.tp, self.tp + self.fn)

    @staticmethod
    def _ratio(num: int, den: int) -> float:
        # an empty union (no foreground predicted or annotated) counts as
        # perfect agreement
        return num / den if den else 1.0

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "iou": self.iou, "dsc": self.dsc, "prc": self.prc, "rec": self.rec,
        }


def compute_micro_metrics(pred_masks, gt_masks) -> MetricsReport:
    """Accumulate pixel counts over all (pred, gt) binary mask pairs."""
    tp = fp = fn = tn = 0
    pairs = 0
    for pred, gt in zip(pred_masks, gt_masks, strict=True):
        pred = np.asarray(pred)
        gt = np.asarray(gt)
        if pred.shape != gt.shape:
            raise ContractError(
                f"prediction shape {pred.shape} != ground truth {gt.shape}"
            )
        p = pred.astype(bool)
        g = gt.astype(bool)
        if ((pred != 0) & (pred != 1)).any() or ((gt != 0) & (gt != 1)).any():
            raise ContractError("masks must be binary (values in {0, 1})")
        tp += int(np.count_nonzero(p & g))
        fp += int(np.count_nonzero(p & ~g))
        fn += int(np.count_nonzero(~p & g))
        tn += int(np.count_nonzero(~p & ~g))
        pairs += 1
    if pairs == 0:
        raise ValueError("cannot compute metrics over an empty split")
    return MetricsReport(tp=tp, fp=fp, fn=fn, tn=tn)

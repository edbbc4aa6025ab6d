"""
Binary detection metrics (Malicious is the positive class)
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Sequence

from ..core.errors import LengthMismatch
from ..core.types import Label


@dataclass(frozen=True)
class EvalMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    degenerate: bool

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "EvalMetrics":
        """Zero denominators give 0.0; f1 with a zero denominator is flagged degenerate"""
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        denominator = 2 * tp + fp + fn
        return cls(
            tp=tp, fp=fp, fn=fn, tn=tn,
            precision=precision,
            recall=recall,
            f1=2 * tp / denominator if denominator else 0.0,
            degenerate=denominator == 0,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalMetrics":
        return cls.from_counts(int(data['tp']), int(data['fp']), int(data['fn']), int(data['tn']))


def f1(preds: Sequence[Label], truths: Sequence[Label]) -> EvalMetrics:
    """Confusion counts and F1 over paired predictions and ground truth"""
    if len(preds) != len(truths):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(truths)} truths")
    tp = fp = fn = tn = 0
    for pred, truth in zip(preds, truths):
        if pred is Label.MALICIOUS:
            if truth is Label.MALICIOUS:
                tp += 1
            else:
                fp += 1
        elif truth is Label.MALICIOUS:
            fn += 1
        else:
            tn += 1
    return EvalMetrics.from_counts(tp, fp, fn, tn)

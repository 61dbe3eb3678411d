"""Pixel-level scoring of predicted vessel masks against expert truth.

Counts the 2x2 contingency over the whole raster (no field-of-view
masking, so dark borders count as true negatives; the reports say so) and
derives the three rates:

* tpr = tp / (tp + fn)   sensitivity over true vessel pixels
* fpr = fp / (fp + tn)   fall-out over non-vessel pixels
* acc = (tp + tn) / all  whole-image accuracy

Dataset aggregation is the unweighted per-image mean. Reports serialize
to CSV (one row per image plus a means row), JSON (with the full
parameter snapshot), and a plain-text comparison table.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ImageError, ParameterError
from .imagecore import check_mask

#: Caveats attached to every report.
REPORT_NOTES = (
    "accuracy counts every raster pixel; no field-of-view mask is applied, "
    "so border background counts as true negatives",
    "DRIVE scores use the 20-image test split",
    "STARE truth is the first observer's annotation (*.ah files)",
)


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel counts of the four prediction/truth combinations."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(pred: np.ndarray, truth: np.ndarray) -> ConfusionCounts:
    """Count tp/tn/fp/fn between two masks of identical shape."""
    p = check_mask(pred, "pred")
    t = check_mask(truth, "truth")
    if p.shape != t.shape:
        raise ImageError(f"mask shapes differ: pred {p.shape} vs truth {t.shape}")
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


@dataclass(frozen=True)
class MetricsRecord:
    """Per-image rates plus the counts they came from.

    degenerate_tpr / degenerate_fpr flag rates whose denominator was zero
    (reported as 0 by convention).
    """

    image_id: str
    tpr: float
    fpr: float
    acc: float
    counts: ConfusionCounts
    degenerate_tpr: bool = False
    degenerate_fpr: bool = False


def metrics(c: ConfusionCounts, image_id: str = "") -> MetricsRecord:
    """Derive tpr/fpr/acc from counts; zero-total counts are rejected."""
    if c.total <= 0:
        raise ParameterError("confusion counts sum to zero; nothing to score")
    pos = c.tp + c.fn
    neg = c.fp + c.tn
    tpr = c.tp / pos if pos > 0 else 0.0
    fpr = c.fp / neg if neg > 0 else 0.0
    acc = (c.tp + c.tn) / c.total
    return MetricsRecord(
        image_id=image_id,
        tpr=tpr,
        fpr=fpr,
        acc=acc,
        counts=c,
        degenerate_tpr=pos == 0,
        degenerate_fpr=neg == 0,
    )


@dataclass(frozen=True)
class DatasetReport:
    """Per-image records with their unweighted means and the run parameters."""

    dataset: str
    params: dict
    records: tuple[MetricsRecord, ...]
    mean_tpr: float
    mean_fpr: float
    mean_acc: float
    notes: tuple[str, ...] = field(default=REPORT_NOTES)


def aggregate(records, dataset: str, params: dict) -> DatasetReport:
    """Fold per-image records into a DatasetReport with arithmetic means."""
    recs = tuple(records)
    if not recs:
        raise ParameterError("cannot aggregate an empty record list")
    n = len(recs)
    return DatasetReport(
        dataset=dataset,
        params=dict(params),
        records=recs,
        mean_tpr=sum(r.tpr for r in recs) / n,
        mean_fpr=sum(r.fpr for r in recs) / n,
        mean_acc=sum(r.acc for r in recs) / n,
    )


_CSV_HEADER = ("image_id", "tp", "tn", "fp", "fn", "tpr", "fpr", "acc")


def write_csv(report: DatasetReport, path) -> Path:
    """One row per image, then a means row; rates fixed to 6 decimals."""
    out = Path(path)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for r in report.records:
            writer.writerow(
                (
                    r.image_id,
                    r.counts.tp,
                    r.counts.tn,
                    r.counts.fp,
                    r.counts.fn,
                    f"{r.tpr:.6f}",
                    f"{r.fpr:.6f}",
                    f"{r.acc:.6f}",
                )
            )
        writer.writerow(
            (
                "mean",
                "",
                "",
                "",
                "",
                f"{report.mean_tpr:.6f}",
                f"{report.mean_fpr:.6f}",
                f"{report.mean_acc:.6f}",
            )
        )
    return out


def _record_to_dict(r: MetricsRecord) -> dict:
    return {
        "image_id": r.image_id,
        "tpr": r.tpr,
        "fpr": r.fpr,
        "acc": r.acc,
        "counts": {"tp": r.counts.tp, "tn": r.counts.tn, "fp": r.counts.fp, "fn": r.counts.fn},
        "degenerate_tpr": r.degenerate_tpr,
        "degenerate_fpr": r.degenerate_fpr,
    }


def write_json(report: DatasetReport, path) -> Path:
    """Structured report: dataset, params snapshot, notes, means, records."""
    out = Path(path)
    payload = {
        "dataset": report.dataset,
        "params": report.params,
        "notes": list(report.notes),
        "means": {"tpr": report.mean_tpr, "fpr": report.mean_fpr, "acc": report.mean_acc},
        "records": [_record_to_dict(r) for r in report.records],
    }
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return out


def comparison_table(reports: dict[str, DatasetReport]) -> str:
    """Methods-by-rates text table for side-by-side comparison."""
    if not reports:
        raise ParameterError("no reports to tabulate")
    first = next(iter(reports.values()))
    lines = [
        f"dataset: {first.dataset} ({len(first.records)} images)",
        f"{'method':<10} {'TPR':>8} {'FPR':>8} {'ACC':>8}",
    ]
    for method, rep in reports.items():
        lines.append(
            f"{method:<10} {rep.mean_tpr:>8.4f} {rep.mean_fpr:>8.4f} {rep.mean_acc:>8.4f}"
        )
    lines.append("note: " + first.notes[0])
    return "\n".join(lines)

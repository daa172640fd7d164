"""Per-trial records and their aggregation into sweep summaries.

Aggregation only sums, so any partitioning of the records over workers gives
the same summary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from scipy.stats import beta

SUMMARY_COLUMNS = ["variant", "ebn0_db", "frames", "block_errors", "bler", "bler_ci", "mean_tests",
                   "mean_eta", "eta_samples", "mean_adjust_iters", "mean_elapsed_us"]


@dataclass
class TrialRecord:
    ebn0_db: float
    variant: str
    status: str
    tests_used: int
    block_error: bool
    eta_sample: float | None = None
    positions: tuple = ()
    elapsed_us: float | None = None
    adjust_iters: int = 0

    def __post_init__(self):
        if self.tests_used < 1:
            raise ValueError("tests_used must be >= 1")


@dataclass
class CellStats:
    """Running sums for one (variant, ebn0) cell."""

    frames: int = 0
    block_errors: int = 0
    tests_sum: int = 0
    tests_sq_sum: int = 0
    eta_sum: float = 0.0
    eta_samples: int = 0
    adjust_sum: int = 0
    elapsed_sum: float = 0.0
    timed: int = 0

    def add(self, r: TrialRecord) -> None:
        self.frames += 1
        self.block_errors += int(r.block_error)
        self.tests_sum += r.tests_used
        self.tests_sq_sum += r.tests_used * r.tests_used
        self.adjust_sum += r.adjust_iters
        if r.eta_sample is not None:
            self.eta_sum += r.eta_sample
            self.eta_samples += 1
        if r.elapsed_us is not None:
            self.elapsed_sum += r.elapsed_us
            self.timed += 1

    def merge(self, other: "CellStats") -> "CellStats":
        out = CellStats()
        for k in out.__dataclass_fields__:
            setattr(out, k, getattr(self, k) + getattr(other, k))
        return out

    @property
    def bler(self) -> float:
        return self.block_errors / self.frames

    @property
    def mean_tests(self) -> float:
        return self.tests_sum / self.frames

    @property
    def tests_ci(self) -> float:
        n = self.frames
        if n < 2:
            return float("nan")
        var = (self.tests_sq_sum - self.tests_sum**2 / n) / (n - 1)
        return 1.96 * math.sqrt(max(var, 0.0) / n)

    @property
    def mean_eta(self) -> float:
        return self.eta_sum / self.eta_samples if self.eta_samples else float("nan")

    @property
    def mean_adjust_iters(self) -> float:
        return self.adjust_sum / self.frames

    @property
    def mean_elapsed_us(self) -> float | None:
        return self.elapsed_sum / self.timed if self.timed else None


def bler_halfwidth(errors: int, frames: int, exact: bool = False, level: float = 0.95) -> float:
    """95% half-width of the BLER estimate; Clopper-Pearson when ``exact``."""
    p = errors / frames
    if not exact:
        return 1.96 * math.sqrt(p * (1.0 - p) / frames)
    a = 1.0 - level
    lo = 0.0 if errors == 0 else beta.ppf(a / 2, errors, frames - errors + 1)
    hi = 1.0 if errors == frames else beta.ppf(1 - a / 2, errors + 1, frames - errors)
    return float(max(p - lo, hi - p))


@dataclass
class SweepSummary:
    cells: dict = field(default_factory=dict)
    exact_ci: bool = False

    def cell(self, variant: str, ebn0_db: float) -> CellStats:
        return self.cells[(variant, float(ebn0_db))]

    def rows(self) -> list:
        out = []
        for (variant, eb) in sorted(self.cells):
            c = self.cells[(variant, eb)]
            out.append({
                "variant": variant,
                "ebn0_db": eb,
                "frames": c.frames,
                "block_errors": c.block_errors,
                "bler": c.bler,
                "bler_ci": bler_halfwidth(c.block_errors, c.frames, self.exact_ci),
                "mean_tests": c.mean_tests,
                "mean_eta": c.mean_eta,
                "eta_samples": c.eta_samples,
                "mean_adjust_iters": c.mean_adjust_iters,
                "mean_elapsed_us": c.mean_elapsed_us,
            })
        return out


def accumulate(records, cells: dict | None = None) -> dict:
    cells = {} if cells is None else cells
    for r in records:
        key = (r.variant, float(r.ebn0_db))
        cells.setdefault(key, CellStats()).add(r)
    return cells


def merge_cells(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k].merge(v) if k in out else v
    return out


def aggregate(records, exact_ci: bool = False, expected=None) -> SweepSummary:
    """Sum records per (variant, ebn0). ``expected`` cells with no record raise."""
    cells = accumulate(records)
    if not cells:
        raise ValueError("no records to aggregate")
    for key in expected or ():
        if (key[0], float(key[1])) not in cells:
            raise ValueError(f"empty cell {key}")
    return SweepSummary(cells, exact_ci)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def summary_csv(summary: SweepSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in summary.rows():
        w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def summary_jsonl(summary: SweepSummary) -> str:
    lines = []
    for row in summary.rows():
        clean = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()}
        lines.append(json.dumps(clean, sort_keys=False))
    return "\n".join(lines) + "\n"


def write_rows(rows: list, columns: list, path, fmt: str = "csv") -> str:
    """Serialise generic row dicts as CSV or JSON lines; returns the text written."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
        text = buf.getvalue()
    elif fmt == "jsonl":
        text = "".join(json.dumps({c: row[c] for c in columns}) + "\n" for row in rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text

"""Seeded Monte-Carlo experiments over (N, c, alpha) grids."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import InfeasibleCell, SumphaseError, TooLarge
from .forms import LinearForm, new_linear_form
from .poisson import EmpiricalPmf, mean_count, tv_to_poisson
from .seeding import derive_seed
from .sets import SubsetBitVector, complement_size, evaluate_image, representation_count, sample_subset
from .theory import RegimeSpec, predict

__all__ = [
    "derive_seed",
    "ExperimentConfig",
    "Cell",
    "TrialRecord",
    "QuantityStats",
    "CellSummary",
    "run_trials",
    "run_cell",
    "sweep",
    "mstd_compare",
    "mstd_frequency",
    "records_csv",
    "summaries_json",
    "write_outputs",
]

SCHEMA_VERSION = 1
QUANTITIES = ("image_size", "complement_size", "W_k", "tv_diagnostics")
DEFAULT_MEMORY_CAP = 1 << 30
Z95 = 1.96


def _parse_alpha(a):
    if isinstance(a, str):
        return Fraction(a)
    return a


@dataclass(frozen=True)
class Cell:
    cell_id: int
    N: int
    c: float
    alpha: float | Fraction


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a form, a grid of (N, c, alpha) cells, and what to record.

    ``k_values`` lists offsets for W_k; the string ``"mid"`` stands for mN/2
    (rounded down). ``tv_diagnostics`` adds, per listed k, the empirical
    total variation distance of W_k to Po(mu_k).
    """

    form: LinearForm
    N_values: tuple
    c_values: tuple = (1.0,)
    alpha_values: tuple = (0.5,)
    trials: int = 10
    master_seed: int = 0
    quantities: tuple = ("image_size", "complement_size")
    k_values: tuple = ()
    output_csv: Optional[str] = None
    output_json: Optional[str] = None
    memory_cap: int = DEFAULT_MEMORY_CAP
    distinct: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.N_values or not self.c_values or not self.alpha_values:
            raise ValueError("the (N, c, alpha) grid must be nonempty")
        bad = set(self.quantities) - set(QUANTITIES)
        if bad:
            raise ValueError(f"unknown quantities {sorted(bad)}; choose from {QUANTITIES}")

    def cells(self) -> list[Cell]:
        out = []
        for N in self.N_values:
            for c in self.c_values:
                for a in self.alpha_values:
                    out.append(Cell(len(out), int(N), float(c), a))
        return out

    def resolve_k(self, N: int) -> list[int]:
        return [self.form.m * N // 2 if k == "mid" else int(k) for k in self.k_values]

    @property
    def wants_image(self) -> bool:
        return "image_size" in self.quantities or "complement_size" in self.quantities

    @property
    def wants_w(self) -> bool:
        return bool(self.k_values) and ("W_k" in self.quantities or "tv_diagnostics" in self.quantities)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "form": list(self.form.coeffs),
            "N": list(self.N_values),
            "c": list(self.c_values),
            "alpha": [str(a) if isinstance(a, Fraction) else a for a in self.alpha_values],
            "trials": self.trials,
            "master_seed": self.master_seed,
            "quantities": list(self.quantities),
            "k": list(self.k_values),
            "output_csv": self.output_csv,
            "output_json": self.output_json,
            "memory_cap": self.memory_cap,
            "distinct": self.distinct,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {doc.get('schema')!r}; expected {SCHEMA_VERSION}")
        form = doc["form"]
        form = new_linear_form([int(x) for x in form.split(",")] if isinstance(form, str) else form)

        def seq(x):
            return tuple(x) if isinstance(x, (list, tuple)) else (x,)

        return cls(
            form=form,
            N_values=tuple(int(float(n)) for n in seq(doc["N"])),
            c_values=tuple(float(c) for c in seq(doc.get("c", 1.0))),
            alpha_values=tuple(_parse_alpha(a) for a in seq(doc.get("alpha", 0.5))),
            trials=int(doc.get("trials", 10)),
            master_seed=int(doc.get("master_seed", 0)),
            quantities=tuple(doc.get("quantities", ("image_size", "complement_size"))),
            k_values=tuple(doc.get("k", ())),
            output_csv=doc.get("output_csv"),
            output_json=doc.get("output_json"),
            memory_cap=int(doc.get("memory_cap", DEFAULT_MEMORY_CAP)),
            distinct=bool(doc.get("distinct", False)),
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class TrialRecord:
    cell_id: int
    trial: int
    seed: int
    subset_size: int
    image_size: Optional[int] = None
    complement_size: Optional[int] = None
    w: dict = field(default_factory=dict)


@dataclass(frozen=True)
class QuantityStats:
    mean: float
    sd: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]

    @classmethod
    def of(cls, values) -> "QuantityStats":
        x = np.asarray(values, dtype=float)
        mean = math.fsum(x) / x.size
        if x.size < 2:
            return cls(mean, None, None, None)
        sd = float(np.std(x, ddof=1))
        half = Z95 * sd / math.sqrt(x.size)
        return cls(mean, sd, mean - half, mean + half)

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CellSummary:
    cell: Cell
    p: float
    classification: Optional[str]
    trials: int
    stats: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    tv: dict = field(default_factory=dict)
    error: Optional[str] = None

    def ratio(self, quantity: str) -> Optional[float]:
        """Observed mean over prediction, or None when no positive prediction exists."""
        pred = self.predicted.get(quantity)
        if pred is None or not pred > 0 or quantity not in self.stats:
            return None
        return self.stats[quantity].mean / pred

    def to_json(self) -> dict:
        c = self.cell
        return {
            "cell_id": c.cell_id,
            "N": c.N,
            "c": c.c,
            "alpha": str(c.alpha) if isinstance(c.alpha, Fraction) else c.alpha,
            "p": self.p,
            "classification": self.classification,
            "trials": self.trials,
            "stats": {q: s.to_json() for q, s in self.stats.items()},
            "predicted": self.predicted,
            "ratio": {q: self.ratio(q) for q in self.predicted},
            "tv": self.tv,
            "error": self.error,
        }


# -- trial execution -----------------------------------------------------------


def _one_trial(form, N, p, master_seed, cell_id, i, want_image, ks, distinct) -> TrialRecord:
    seed = derive_seed(master_seed, cell_id, i)
    subset = sample_subset(N, p, seed)
    img = comp = None
    if want_image:
        image = evaluate_image(form, subset, distinct=distinct)
        img, comp = image.size, complement_size(image)
    w = {k: representation_count(form, subset, k, distinct=distinct) for k in ks}
    return TrialRecord(cell_id, i, seed, subset.cardinality, img, comp, w)


def _trial_batch(args) -> list[TrialRecord]:
    form, N, p, master_seed, cell_id, indices, want_image, ks, distinct = args
    return [_one_trial(form, N, p, master_seed, cell_id, i, want_image, ks, distinct) for i in indices]


def run_trials(form: LinearForm, N: int, p: float, trials: int, master_seed: int, cell_id: int = 0,
               want_image: bool = True, ks=(), distinct: bool = False, workers: int = 1) -> list[TrialRecord]:
    """Trial records in trial order; independent of ``workers``."""
    ks = tuple(ks)
    if workers <= 1 or trials < 2:
        return _trial_batch((form, N, p, master_seed, cell_id, range(trials), want_image, ks, distinct))
    chunks = [range(j, trials, workers) for j in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_trial_batch, [(form, N, p, master_seed, cell_id, ch, want_image, ks, distinct) for ch in chunks])
        records = [r for part in parts for r in part]
    return sorted(records, key=lambda r: r.trial)


def _check_feasible(config: ExperimentConfig, cell: Cell, p: float) -> None:
    if not 0 < p < 1:
        raise InfeasibleCell(f"p(N) = {p!r} is outside (0, 1)")
    if not cell.N * p > 1:
        raise InfeasibleCell(f"N p(N) = {cell.N * p!r} is not above 1")
    need = config.form.m * cell.N / 8
    if need > config.memory_cap:
        raise InfeasibleCell(f"image vector needs {need:.3g} bytes, above the cap {config.memory_cap}")


def _summarize(config, cell, p, regime, records) -> CellSummary:
    form = config.form
    summary = CellSummary(cell, p, regime.classification, len(records))
    summary.stats["subset_size"] = QuantityStats.of([r.subset_size for r in records])
    if config.wants_image:
        preds = predict(form, cell.N, regime)
        for q in ("image_size", "complement_size"):
            if q in config.quantities:
                summary.stats[q] = QuantityStats.of([getattr(r, q) for r in records])
                summary.predicted[q] = None if preds[q] is None else preds[q].value
    if config.wants_w:
        for k in config.resolve_k(cell.N):
            key = f"W_{k}"
            try:
                mu = float(mean_count(form, cell.N, k, p))
            except TooLarge:
                mu = None
            if "W_k" in config.quantities:
                summary.stats[key] = QuantityStats.of([r.w[k] for r in records])
                summary.predicted[key] = mu
            if "tv_diagnostics" in config.quantities and mu is not None:
                pmf = EmpiricalPmf()
                for r in records:
                    pmf.add(r.w[k])
                summary.tv[key] = {"mu": mu, "tv": tv_to_poisson(pmf, mu)}
    return summary


def run_cell(config: ExperimentConfig, cell: Cell, workers: int = 1,
             return_records: bool = False):
    """Run ``config.trials`` trials of one cell and summarize them against theory.

    Raises InfeasibleCell when p(N) is outside (0, 1), N p(N) <= 1, or the
    image vector would exceed the memory cap.
    """
    regime = RegimeSpec(cell.c, cell.alpha, config.form.h)
    p = regime.p(cell.N)
    _check_feasible(config, cell, p)
    for k in config.resolve_k(cell.N):
        config.form.check_offset(cell.N, k)
    records = run_trials(config.form, cell.N, p, config.trials, config.master_seed, cell.cell_id,
                         config.wants_image, config.resolve_k(cell.N) if config.wants_w else (),
                         config.distinct, workers)
    summary = _summarize(config, cell, p, regime, records)
    return (summary, records) if return_records else summary


def sweep(config: ExperimentConfig, workers: int = 1):
    """Run every cell; failing cells get a summary carrying the error message.

    Returns (summaries, records), both ordered by cell id then trial.
    """
    summaries, records = [], []
    for cell in config.cells():
        try:
            s, recs = run_cell(config, cell, workers=workers, return_records=True)
        except (SumphaseError, ValueError) as exc:
            try:
                p = RegimeSpec(cell.c, cell.alpha, config.form.h).p(cell.N)
                cls = RegimeSpec(cell.c, cell.alpha, config.form.h).classification
            except ValueError:
                p, cls = float("nan"), None
            s, recs = CellSummary(cell, p, cls, 0, error=f"{type(exc).__name__}: {exc}"), []
        summaries.append(s)
        records.extend(recs)
    return summaries, records


# -- MSTD ----------------------------------------------------------------------

_SUM = new_linear_form([1, 1])
_DIFF = new_linear_form([1, -1])


def mstd_compare(subset: SubsetBitVector) -> tuple[int, int]:
    """(|A+A|, |A-A|)."""
    return evaluate_image(_SUM, subset).size, evaluate_image(_DIFF, subset).size


def mstd_frequency(N: int, p: float, trials: int, master_seed: int) -> float:
    """Fraction of sampled sets with |A+A| > |A-A|; trial i uses derive_seed(master_seed, 0, i)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    hits = 0
    for i in range(trials):
        s, d = mstd_compare(sample_subset(N, p, derive_seed(master_seed, 0, i)))
        hits += s > d
    return hits / trials


# -- output --------------------------------------------------------------------

RECORD_COLUMNS = ["cell_id", "N", "c", "alpha", "p", "trial", "seed", "subset_size", "image_size", "complement_size"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_csv(config: ExperimentConfig, summaries, records) -> str:
    """One row per trial; W_k columns are named W_<k>."""
    cells = {s.cell.cell_id: s for s in summaries}
    ks = sorted({k for r in records for k in r.w})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS + [f"W_{k}" for k in ks])
    for r in sorted(records, key=lambda r: (r.cell_id, r.trial)):
        s = cells[r.cell_id]
        row = [r.cell_id, s.cell.N, s.cell.c, s.cell.alpha, s.p, r.trial, r.seed, r.subset_size,
               r.image_size, r.complement_size] + [r.w.get(k) for k in ks]
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def summaries_json(config: ExperimentConfig, summaries) -> str:
    doc = {"config": config.to_json(), "cells": [s.to_json() for s in sorted(summaries, key=lambda s: s.cell.cell_id)]}
    return json.dumps(doc, indent=2, default=str) + "\n"


def write_outputs(config: ExperimentConfig, summaries, records, csv_path=None, json_path=None) -> list[str]:
    written = []
    for path, text in ((csv_path or config.output_csv, lambda: records_csv(config, summaries, records)),
                       (json_path or config.output_json, lambda: summaries_json(config, summaries))):
        if path:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            with open(path, "w") as fh:
                fh.write(text())
            written.append(path)
    return written

"""Flat output records and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Optional

from .engine import BASIS
from .observables import DualityReport
from .stochastic import SweepRow

PAIRS = BASIS  # alpha_gamma, alpha_delta, beta_gamma, beta_delta

RECORD_KEYS = (
    ["parameter", "value", "leads", "source",
     "p_alpha", "p_beta", "p_gamma", "p_delta"]
    + [f"p_{k}" for k in PAIRS]
    + [f"s_{k}" for k in PAIRS]
    + ["visibility", "distinguishability", "sum_of_squares", "shots"]
    + [f"n_{k}" for k in PAIRS]
    + [f"est_p_{k}" for k in PAIRS]
    + [f"se_p_{k}" for k in PAIRS]
    + [f"est_s_{k}" for k in PAIRS]
    + [f"se_s_{k}" for k in PAIRS]
)


def blank_record() -> dict:
    return dict.fromkeys(RECORD_KEYS)


def _duality_fields(rec: dict, rep: Optional[DualityReport]):
    if rep is None:
        return
    rec["visibility"] = rep.visibility
    rec["distinguishability"] = rep.distinguishability
    rec["sum_of_squares"] = rep.sum_of_squares
    rec["leads"] = ",".join(rep.leads)


def row_to_record(row: SweepRow, parameter: Optional[str] = None) -> dict:
    rec = blank_record()
    rec["parameter"] = parameter
    rec["value"] = None if parameter is None else row.value
    rec["source"] = "analytic"
    for lead in ("alpha", "beta", "gamma", "delta"):
        rec[f"p_{lead}"] = row.single[lead]
    for k in PAIRS:
        pair = tuple(k.split("_"))
        rec[f"p_{k}"] = row.joint[pair]
        rec[f"s_{k}"] = row.cross[pair]
    _duality_fields(rec, row.duality)
    if row.estimate is not None:
        rec["source"] = "analytic+estimated"
        rec["shots"] = row.shots
        for k in PAIRS:
            pair = tuple(k.split("_"))
            rec[f"n_{k}"] = row.counts[pair]
            rec[f"est_p_{k}"] = row.estimate.joint[pair]
            rec[f"se_p_{k}"] = row.estimate.se_joint[pair]
            if row.est_cross is not None:
                rec[f"est_s_{k}"], rec[f"se_s_{k}"] = row.est_cross[pair]
    return rec


def duality_record(rep: DualityReport) -> dict:
    rec = blank_record()
    rec["source"] = rep.source
    _duality_fields(rec, rep)
    return rec


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def emit(records: Iterable[dict], fmt: str = "csv") -> bytes:
    """Serialize records; every record must share the first record's keys."""
    records = list(records)
    if not records:
        raise ValueError("nothing to emit")
    keys = list(records[0])
    for i, r in enumerate(records):
        if list(r) != keys:
            raise ValueError(f"record {i} has a different key set")
    if fmt == "json":
        clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()}
                 for r in records]
        return (json.dumps(clean, indent=1) + "\n").encode("utf-8")
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in records:
        w.writerow([_fmt(r[k]) for k in keys])
    return buf.getvalue().encode("utf-8")


def write_output(data: bytes, path: Optional[str]) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    if path is None or path == "-":
        import sys

        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc

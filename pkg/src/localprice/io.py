"""Serialisation of run records to CSV, JSON and gnuplot data files.

Files written per record ``<stem>``:

``<stem>.series.csv``      header ``abscissa,value,series,replica_pool``
``<stem>.histograms.csv``  header ``bin_center,count,checkpoint`` (only if the record has histograms)
``<stem>.json``            full record with embedded config (format json/both)
``<stem>.dat``             gnuplot blocks, one per series, separated by two blank lines

``replica_pool`` is the number of replicas aggregated into the value, or
``r<k>`` for a single-replica record.  Reals are written with ``repr`` so
they parse back to the identical double.  ``manifest.json`` lists every
file with the 64-bit BLAKE2b hash of its record's config.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import RunRecord, SimConfig
from .observables import Histogram

FORMATS = ("csv", "json", "both")


class OutputError(RuntimeError):
    """Output could not be written."""


@dataclass(frozen=True)
class OutputSpec:
    directory: Path
    format: str = "csv"
    emit_plot_data: bool = False
    force: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        object.__setattr__(self, "directory", Path(self.directory))


def config_hash(config: SimConfig) -> str:
    """Hex BLAKE2b-64 of the canonical (sorted-key, compact) JSON of ``config``."""
    text = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


def _pool_label(record: RunRecord) -> str:
    return f"r{record.replica}" if record.replica is not None else str(record.config.replicas)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def series_csv(record: RunRecord) -> str:
    pool = _pool_label(record)
    rows = [(_num(x), _num(y), name, pool)
            for name, points in record.series.items() for x, y in points]
    return _csv_text(("abscissa", "value", "series", "replica_pool"), rows)


def histogram_csv(record: RunRecord) -> str:
    rows = []
    for checkpoint, h in record.histograms:
        for c, n in zip(h.centers, h.counts):
            rows.append((_num(float(c)), _num(n), str(checkpoint)))
    return _csv_text(("bin_center", "count", "checkpoint"), rows)


def plot_data(record: RunRecord) -> str:
    blocks = []
    for name, points in record.series.items():
        lines = [f"# {name}"] + [f"{_num(x)} {_num(y)}" for x, y in points]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def record_to_json(record: RunRecord) -> dict:
    return _jsonable({
        "label": record.label,
        "replica": record.replica,
        "config": record.config.to_dict(),
        "config_hash": config_hash(record.config),
        "series": {name: [[x, y] for x, y in pts] for name, pts in record.series.items()},
        "histograms": [
            {"checkpoint": c, "bin_width": h.bin_width, "origin": h.origin, "counts": h.counts}
            for c, h in record.histograms
        ],
        "meta": record.meta,
    })


def record_from_json(doc: dict) -> RunRecord:
    return RunRecord(
        config=SimConfig.from_dict(doc["config"]),
        series={k: [(float(x), float(y)) for x, y in v] for k, v in doc["series"].items()},
        histograms=[(h["checkpoint"], Histogram(h["bin_width"], h["origin"], np.array(h["counts"])))
                    for h in doc["histograms"]],
        replica=doc.get("replica"),
        label=doc.get("label", ""),
        meta=doc.get("meta", {}),
    )


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "-", text).strip("-").lower() or "record"


def write_records(records: list[RunRecord], spec: OutputSpec, prefix: str = "run") -> list[Path]:
    """Write every record plus ``manifest.json``; returns the written paths (manifest last).

    Refuses to overwrite existing files unless ``spec.force`` is set; the
    check covers all targets before anything is written.
    """
    if not records:
        raise ValueError("no records to write")
    files: dict[Path, tuple[str, RunRecord, str]] = {}
    for k, rec in enumerate(records):
        stem = f"{prefix}-{k:02d}-{_slug(rec.label)}"
        if spec.format in ("csv", "both"):
            files[spec.directory / f"{stem}.series.csv"] = ("series-csv", rec, series_csv(rec))
            if rec.histograms:
                files[spec.directory / f"{stem}.histograms.csv"] = ("histogram-csv", rec, histogram_csv(rec))
        if spec.format in ("json", "both"):
            text = json.dumps(record_to_json(rec), indent=1, sort_keys=True) + "\n"
            files[spec.directory / f"{stem}.json"] = ("json", rec, text)
        if spec.emit_plot_data:
            files[spec.directory / f"{stem}.dat"] = ("gnuplot", rec, plot_data(rec))

    manifest_path = spec.directory / "manifest.json"
    try:
        spec.directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {spec.directory}: {exc}") from exc
    if not spec.force:
        clashes = [p for p in [*files, manifest_path] if p.exists()]
        if clashes:
            raise OutputError(f"refusing to overwrite {len(clashes)} existing file(s), "
                              f"e.g. {clashes[0]}; pass --force")

    manifest = []
    written = []
    for path, (kind, rec, text) in files.items():
        _write(path, text)
        written.append(path)
        manifest.append({"file": path.name, "kind": kind, "label": rec.label,
                         "config_hash": config_hash(rec.config)})
    _write(manifest_path, json.dumps({"files": manifest}, indent=1, sort_keys=True) + "\n")
    written.append(manifest_path)
    return written


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc

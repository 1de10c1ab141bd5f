"""Seeded experiment drivers, one per figure-level question.

Conventions shared by every driver:

* distributional statistics (histograms, variance, kurtosis) pool the
  final-checkpoint prices of all replicas;
* peak prices are computed per replica and summarised by the median of
  ``|peak|`` (the growing mode of a replica may sit on either side of 0);
* histograms use the Freedman-Diaconis width unless ``bin_width`` is given.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ConfigError, RunRecord, SimConfig, dimension_to_mq, log_checkpoints, run_ensemble
from .observables import (DEFAULT_PROMINENCE, DEFAULT_SMOOTH_WINDOW, Histogram, PowerLawFit,
                          auto_bin_width, count_domain_walls, excess_kurtosis, find_modes, fit_loglog,
                          modality, peak_price, price_histogram, variance)

FIG1_DIMENSIONS = (1.0, 1.2, 2.2)
FIG6_SIZES = (256, 512, 1024, 2048)
# dense near the integer dimensions 2 and 3
FIG7_DIMENSIONS = (1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 1.95, 2.0, 2.05, 2.1, 2.2,
                   2.4, 2.6, 2.8, 2.9, 2.95, 3.0, 3.05, 3.1, 3.2)


@dataclass(frozen=True)
class Estimator:
    """Histogram and mode-finding settings.  ``bin_width=None`` selects Freedman-Diaconis."""

    bin_width: int | None = None
    window: int = DEFAULT_SMOOTH_WINDOW
    prominence: float = DEFAULT_PROMINENCE

    def histogram(self, prices) -> Histogram:
        w = self.bin_width if self.bin_width is not None else auto_bin_width(prices)
        return price_histogram(prices, w)

    def modes(self, prices) -> list[float]:
        return find_modes(self.histogram(prices), self.window, self.prominence)

    def peak(self, prices) -> float:
        return peak_price(self.histogram(prices), self.window)


DEFAULT_ESTIMATOR = Estimator()


@dataclass(frozen=True)
class DimensionPoint:
    d: float
    m: int
    q: float
    risk: float


@dataclass
class DimensionPDF:
    d: float
    histogram: Histogram
    modality: str
    modes: list[float]
    excess_kurtosis: float
    replica_modalities: list[str]
    config: SimConfig


def config_for_dimension(base: SimConfig, d: float) -> SimConfig:
    """``base`` with ``(m, q)`` from the dimension factorisation and geometric offsets."""
    m, q = dimension_to_mq(d)
    if abs(1.0 + q * m / 2.0 - d) > 1e-12:
        raise ConfigError(f"dimension {d!r} is not representable as 1 + q*m/2 with q in [0, 1]")
    return dataclasses.replace(base, m_extra=m, q=q, offsets=None)


def _require_1d(config: SimConfig) -> None:
    if config.m_extra != 0:
        raise ConfigError(f"this experiment needs a one-dimensional ring (m=0), got m={config.m_extra}")


def final_prices(records: list[RunRecord]) -> list[np.ndarray]:
    return [r.snapshots[-1].prices for r in records]


def pooled_final_prices(records: list[RunRecord]) -> np.ndarray:
    return np.concatenate(final_prices(records))


def _safe_kurtosis(prices) -> float:
    return excess_kurtosis(prices) if np.ptp(prices) > 0 else math.nan


def experiment_pdf_vs_dimension(base: SimConfig, d_values, estimator: Estimator = DEFAULT_ESTIMATOR,
                                workers: int = 1) -> list[DimensionPDF]:
    """Pooled final price distribution and its modality for each dimension."""
    configs = [config_for_dimension(base, d) for d in d_values]
    out = []
    for d, cfg in zip(d_values, configs):
        records = run_ensemble(cfg, workers)
        pooled = pooled_final_prices(records)
        modes = estimator.modes(pooled)
        out.append(DimensionPDF(
            d=float(d),
            histogram=estimator.histogram(pooled),
            modality=modality(modes),
            modes=modes,
            excess_kurtosis=_safe_kurtosis(pooled),
            replica_modalities=[modality(estimator.modes(p)) for p in final_prices(records)],
            config=cfg,
        ))
    return out


def experiment_pdf_evolution(config: SimConfig, estimator: Estimator = DEFAULT_ESTIMATOR,
                             workers: int = 1) -> RunRecord:
    """Pooled price histogram at every checkpoint of a 1D ensemble.

    Also records the position (``|peak|``) and height (fraction of samples
    per price unit at the peak bin) of the pooled histogram's peak.
    """
    _require_1d(config)
    records = run_ensemble(config, workers)
    out = RunRecord(config=config, label="pdf evolution")
    for k, sweep in enumerate(config.checkpoints):
        pooled = np.concatenate([r.snapshots[k].prices for r in records])
        h = estimator.histogram(pooled)
        out.histograms.append((sweep, h))
        peak = peak_price(h, estimator.window)
        height = h.counts[int(np.argmin(np.abs(h.centers - peak)))] / (pooled.size * h.bin_width)
        out.add_point("peak_price", sweep, abs(peak))
        out.add_point("peak_density", sweep, height)
    return out


def peak_series(records: list[RunRecord], estimator: Estimator = DEFAULT_ESTIMATOR) -> list[tuple[int, float]]:
    checkpoints = [s.sweep for s in records[0].snapshots]
    series = []
    for k, sweep in enumerate(checkpoints):
        peaks = [abs(estimator.peak(r.snapshots[k].prices)) for r in records]
        series.append((sweep, float(np.median(peaks))))
    return series


def experiment_peak_vs_time(config: SimConfig, estimator: Estimator = DEFAULT_ESTIMATOR,
                            workers: int = 1) -> list[tuple[int, float]]:
    """Replica-median ``|peak price|`` at each checkpoint of a 1D ensemble."""
    _require_1d(config)
    return peak_series(run_ensemble(config, workers), estimator)


def domain_series(records: list[RunRecord]) -> list[tuple[int, float]]:
    checkpoints = [s.sweep for s in records[0].snapshots]
    return [(sweep, float(np.mean([count_domain_walls(r.snapshots[k].spins) for r in records])))
            for k, sweep in enumerate(checkpoints)]


def fit_domain_decay(series, fit_from: int = 10) -> PowerLawFit:
    """Log-log fit of mean domain count over checkpoints ``>= fit_from`` with a nonzero count."""
    pts = [(x, y) for x, y in series if x >= fit_from and y > 0]
    if len(pts) < 3:
        raise ConfigError(f"need at least 3 decaying checkpoints at or after sweep {fit_from}, got {len(pts)}")
    xs, ys = zip(*pts)
    return fit_loglog(xs, ys)


def experiment_domains_vs_time(config: SimConfig, fit_from: int = 10,
                               workers: int = 1) -> tuple[list[tuple[int, float]], PowerLawFit]:
    """Ensemble-mean domain-wall count per checkpoint and its power-law fit."""
    _require_1d(config)
    series = domain_series(run_ensemble(config, workers))
    return series, fit_domain_decay(series, fit_from)


def experiment_peak_vs_size(base: SimConfig, sizes, estimator: Estimator = DEFAULT_ESTIMATOR,
                            workers: int = 1) -> list[tuple[int, float]]:
    """Replica-median ``|peak price|`` after ``base.sweeps`` sweeps, one entry per size (input order)."""
    _require_1d(base)
    out = []
    for n in sizes:
        cfg = dataclasses.replace(base, n_nodes=int(n), offsets=None)
        records = run_ensemble(cfg, workers)
        peaks = [abs(estimator.peak(p)) for p in final_prices(records)]
        out.append((int(n), float(np.median(peaks))))
    return out


def experiment_risk_vs_dimension(base: SimConfig, d_grid, workers: int = 1) -> list[DimensionPoint]:
    """Pooled final price variance for each dimension, sorted by dimension."""
    configs = [(float(d), config_for_dimension(base, d)) for d in d_grid]
    points = []
    for d, cfg in sorted(configs, key=lambda t: t[0]):
        risk = variance(pooled_final_prices(run_ensemble(cfg, workers)))
        points.append(DimensionPoint(d=d, m=cfg.m_extra, q=cfg.q, risk=risk))
    return points


# RunRecord adapters used by the command line.

def pdf_vs_dimension_records(results: list[DimensionPDF]) -> list[RunRecord]:
    records = []
    for r in results:
        rec = RunRecord(config=r.config, label=f"pdf d={r.d:g}",
                        histograms=[(r.config.sweeps, r.histogram)])
        rec.meta.update(dimension=r.d, modality=r.modality, modes=r.modes,
                        excess_kurtosis=r.excess_kurtosis, replica_modalities=r.replica_modalities)
        records.append(rec)
    return records


def series_record(config: SimConfig, name: str, points, label: str = "", **meta) -> RunRecord:
    rec = RunRecord(config=config, label=label or name, meta=dict(meta))
    seen = {}
    for x, y in points:
        seen.setdefault(x, y)
    for x in sorted(seen):
        rec.add_point(name, x, seen[x])
    return rec


def risk_record(base: SimConfig, points: list[DimensionPoint]) -> RunRecord:
    rec = series_record(base, "risk", [(p.d, p.risk) for p in points], label="risk vs dimension")
    rec.meta["points"] = [dataclasses.asdict(p) for p in points]
    return rec


def ensemble_record(config: SimConfig, workers: int = 1,
                    estimator: Estimator = DEFAULT_ESTIMATOR) -> RunRecord:
    """Summary of a plain ensemble run: walls, variance, median |peak|, pooled histograms."""
    records = run_ensemble(config, workers)
    rec = RunRecord(config=config, label="ensemble")
    for (sweep, walls), (_, peak) in zip(domain_series(records), peak_series(records, estimator)):
        pooled = np.concatenate([r.snapshots[len(rec.histograms)].prices for r in records])
        rec.add_point("domain_walls", sweep, walls)
        rec.add_point("price_variance", sweep, variance(pooled))
        rec.add_point("peak_price", sweep, peak)
        rec.histograms.append((sweep, estimator.histogram(pooled)))
    rec.meta["dimension"] = config.dimension
    return rec


__all__ = [
    "DimensionPDF", "DimensionPoint", "Estimator", "FIG1_DIMENSIONS", "FIG6_SIZES", "FIG7_DIMENSIONS",
    "config_for_dimension", "experiment_domains_vs_time", "experiment_pdf_evolution",
    "experiment_pdf_vs_dimension", "experiment_peak_vs_size", "experiment_peak_vs_time",
    "experiment_risk_vs_dimension", "log_checkpoints",
]

"""Time evolution: single asynchronous steps, sweeps, and seeded replica ensembles.

One sweep is ``n_nodes`` pair interactions.  Replica ``r`` of an ensemble is
seeded with ``mix_seed(config.seed, r)``, so its trajectory does not depend on
how replicas are scheduled.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernel
from .model import ModelError, ModelState, Topology, build_topology, interact, select_pair
from .observables import Histogram, count_domain_walls, variance
from .rng import MASK64, mix_seed

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid simulation configuration."""


def log_checkpoints(sweeps: int, per_decade: int = 2, include_zero: bool = True) -> tuple[int, ...]:
    """Checkpoints ``10**(k/per_decade)`` for k >= per_decade (i.e. from 10), capped by ``sweeps``.

    ``sweeps`` itself is always the last checkpoint.
    """
    points = {0} if include_zero else set()
    k = per_decade
    while True:
        c = int(round(10 ** (k / per_decade)))
        if c >= sweeps:
            break
        points.add(c)
        k += 1
    points.add(sweeps)
    return tuple(sorted(points))


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 1024
    m_extra: int = 0
    q: float = 0.0
    sweeps: int = 10_000
    seed: int = 0
    replicas: int = 16
    checkpoints: tuple[int, ...] = ()
    offsets: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.sweeps < 1:
            raise ConfigError(f"sweeps must be positive, got {self.sweeps}")
        if self.replicas < 1:
            raise ConfigError(f"replicas must be positive, got {self.replicas}")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.checkpoints:
            object.__setattr__(self, "checkpoints", log_checkpoints(self.sweeps))
        cps = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if any(c < 0 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError(f"checkpoints must be nonnegative and strictly increasing, got {list(cps)}")
        if cps[-1] > self.sweeps:
            raise ConfigError(f"last checkpoint {cps[-1]} exceeds sweeps={self.sweeps}")
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))
        try:
            self.topology()
        except ModelError as exc:
            raise ConfigError(str(exc)) from exc

    def topology(self) -> Topology:
        return build_topology(self.n_nodes, self.m_extra, self.q, self.offsets)

    @property
    def dimension(self) -> float:
        return 1.0 + self.q * self.m_extra / 2.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checkpoints"] = list(self.checkpoints)
        d["offsets"] = None if self.offsets is None else list(self.offsets)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        d = dict(d)
        d["checkpoints"] = tuple(d.get("checkpoints") or ())
        if d.get("offsets") is not None:
            d["offsets"] = tuple(d["offsets"])
        return cls(**d)


@dataclass(frozen=True)
class Snapshot:
    sweep: int
    prices: np.ndarray
    spins: np.ndarray


@dataclass
class RunRecord:
    """Output of a run or experiment.

    ``series`` maps a label to ``(abscissa, value)`` pairs with strictly
    increasing abscissae.  ``meta`` carries scalar results (fits, modality)
    and ``snapshots`` raw replica states; snapshots are not serialised.
    """

    config: SimConfig
    series: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    histograms: list[tuple[int, Histogram]] = field(default_factory=list)
    replica: int | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)
    snapshots: list[Snapshot] = field(default_factory=list, repr=False)

    def add_point(self, name: str, x: float, y: float) -> None:
        points = self.series.setdefault(name, [])
        if points and not x > points[-1][0]:
            raise ValueError(f"series {name!r}: abscissa {x} not after {points[-1][0]}")
        points.append((float(x), float(y)))


Recorder = Callable[[Snapshot], None]


def take_snapshot(state: ModelState) -> Snapshot:
    return Snapshot(state.interactions_done // state.n_nodes, state.prices.copy(), state.spins.copy())


def apply_step(state: ModelState) -> None:
    """One asynchronous pair interaction (pure-Python reference path)."""
    i, j = select_pair(state)
    out = interact(state.spins[i], state.spins[j], state.rng)
    state.prices[i] += out.dprice_first
    state.prices[j] += out.dprice_second
    state.spins[i] = out.new_spin_first
    state.spins[j] = out.new_spin_second
    state.interactions_done += 1


def _advance(state: ModelState, n_steps: int) -> None:
    if n_steps <= 0:
        return
    deltas, cumulative = state.topology.selection_table
    words = state.rng.state
    _kernel.run_steps(state.spins, state.prices, deltas, cumulative, words, n_steps)
    state.rng.state = words
    state.interactions_done += n_steps


def run_sweeps(state: ModelState, n_sweeps: int, recorder: Recorder | None = None,
               checkpoints: Sequence[int] = ()) -> None:
    """Advance ``n_sweeps * n_nodes`` steps with the compiled kernel.

    ``recorder`` receives a snapshot whenever the run reaches a checkpoint
    (absolute sweep count) inside ``(start, start + n_sweeps]``.  Snapshots
    are taken between steps.
    """
    if n_sweeps < 0:
        raise ValueError(f"n_sweeps must be nonnegative, got {n_sweeps}")
    n = state.n_nodes
    start = state.interactions_done
    end = start + n_sweeps * n
    for c in sorted(checkpoints):
        target = c * n
        if not start < target <= end:
            continue
        _advance(state, target - state.interactions_done)
        if recorder is not None:
            recorder(take_snapshot(state))
    _advance(state, end - state.interactions_done)


def initial_state(config: SimConfig, replica: int = 0) -> ModelState:
    return ModelState.initial(config.topology(), mix_seed(config.seed, replica))


def run_replica(config: SimConfig, replica: int, recorder: Recorder | None = None) -> RunRecord:
    """Run one replica and keep a snapshot at every checkpoint (including 0 if listed)."""
    state = initial_state(config, replica)
    record = RunRecord(config=config, replica=replica, label=f"replica {replica}")

    def keep(snap: Snapshot) -> None:
        record.snapshots.append(snap)
        record.add_point("domain_walls", snap.sweep, count_domain_walls(snap.spins))
        record.add_point("price_variance", snap.sweep, variance(snap.prices))
        if recorder is not None:
            recorder(snap)

    if config.checkpoints and config.checkpoints[0] == 0:
        keep(take_snapshot(state))
    run_sweeps(state, config.sweeps, keep, config.checkpoints)
    return record


def run_ensemble(config: SimConfig, workers: int = 1) -> list[RunRecord]:
    """Run every replica of ``config``; output ordered by replica index.

    ``workers > 1`` runs replicas on a thread pool (the kernel releases the
    GIL).  Output is identical for any worker count.
    """
    if not isinstance(config, SimConfig):
        raise ConfigError("run_ensemble expects a SimConfig")
    log.debug("ensemble N=%d m=%d q=%g sweeps=%d replicas=%d", config.n_nodes, config.m_extra,
              config.q, config.sweeps, config.replicas)
    indices = range(config.replicas)
    if workers <= 1:
        return [run_replica(config, r) for r in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: run_replica(config, r), indices))


def dimension_to_mq(d: float) -> tuple[int, float]:
    """Factor ``d = 1 + q*m/2``: smallest integer ``m >= 2(d-1)`` (at least 1 when d > 1), ``q = 2(d-1)/m``."""
    if not math.isfinite(d) or d < 1.0:
        raise ConfigError(f"dimension {d!r} is not representable (need d >= 1)")
    excess = 2.0 * (d - 1.0)
    if excess == 0.0:
        return 0, 0.0
    m = max(1, math.ceil(excess - 1e-12))
    q = excess / m
    return m, min(q, 1.0)

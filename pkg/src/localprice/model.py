"""Spin-pair local-price model: node states, ring topology, pair rule.

Nodes sit on a periodic ring.  Every node has the two nearest neighbours
``i - 1`` and ``i + 1`` (weight 1) and, for each long-range offset ``o``, the
two neighbours ``i - o`` and ``i + o`` (weight ``q``).  The second node of a
pair is drawn with probability proportional to these weights, which gives an
effective neighbour count ``2 + q*M`` and dimension ``1 + q*M/2``.

Prices are signed integers read as log-prices.  Node state is stored as two
numpy arrays (``spins`` as int8, ``prices`` as int64) rather than as objects,
so that the sweep kernel can work on them in place.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol

import numpy as np

from .rng import Xoshiro256


class ModelError(ValueError):
    """Invalid model parameters (domain or construction error)."""


class Spin(enum.IntEnum):
    BUYER = 1
    SELLER = -1

    @classmethod
    def from_bit(cls, bit: int) -> Spin:
        """Reset convention: bit 1 is a buyer, bit 0 a seller."""
        return cls.BUYER if bit else cls.SELLER


@dataclass(frozen=True)
class NodeState:
    spin: Spin
    price: int = 0


@dataclass(frozen=True)
class InteractionOutcome:
    dprice_first: int
    dprice_second: int
    new_spin_first: Spin
    new_spin_second: Spin


def effective_dimension(m: int, q: float) -> float:
    """Dimension ``1 + q*m/2`` of a ring with ``m`` long-range offsets of weight ``q``."""
    if m < 0:
        raise ModelError(f"number of long-range offsets must be >= 0, got {m}")
    if not 0.0 <= q <= 1.0:
        raise ModelError(f"long-range weight q must lie in [0, 1], got {q}")
    return 1.0 + q * m / 2.0


@dataclass(frozen=True)
class Topology:
    n_nodes: int
    long_range_offsets: tuple[int, ...] = ()
    long_range_weight: float = 0.0

    def __post_init__(self):
        n = self.n_nodes
        if n < 3:
            raise ModelError(f"a ring needs at least 3 nodes, got {n}")
        if not 0.0 <= self.long_range_weight <= 1.0:
            raise ModelError(f"long-range weight q must lie in [0, 1], got {self.long_range_weight}")
        offsets = tuple(int(o) for o in self.long_range_offsets)
        object.__setattr__(self, "long_range_offsets", offsets)
        for o in offsets:
            if not 2 <= o <= n // 2:
                raise ModelError(f"offset {o} outside [2, {n // 2}] for a ring of {n} nodes")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ModelError(f"offsets must be strictly increasing, got {list(offsets)}")

    @property
    def m(self) -> int:
        return len(self.long_range_offsets)

    @property
    def dimension(self) -> float:
        return effective_dimension(self.m, self.long_range_weight)

    @cached_property
    def selection_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Relative neighbour displacements and their cumulative weights.

        Order is ``-1, +1, -o1, +o1, -o2, +o2, ...``.  When ``2*o == n`` the
        two displacements hit the same node; they are merged into one entry
        (at the position of ``-o``) carrying weight ``2*q``.  Both the Python
        reference path and the sweep kernel draw from this one table.
        """
        n = self.n_nodes
        q = float(self.long_range_weight)
        deltas: list[int] = [-1, 1]
        weights: list[float] = [1.0, 1.0]
        for o in self.long_range_offsets:
            if 2 * o == n:
                deltas.append(-o)
                weights.append(q + q)
            else:
                deltas.extend((-o, o))
                weights.extend((q, q))
        cumulative = np.cumsum(np.array(weights, dtype=np.float64))
        return np.array(deltas, dtype=np.int64), cumulative

    @cached_property
    def _selection_lists(self) -> tuple[list[int], list[float]]:
        deltas, cumulative = self.selection_table
        return deltas.tolist(), cumulative.tolist()


def offset_capacity(n: int) -> int:
    """Number of distinct valid long-range offsets (2 .. n//2) on a ring of ``n``."""
    return max(n // 2 - 1, 0)


def geometric_offsets(n: int, m: int) -> tuple[int, ...]:
    """Hierarchy ``g_k = max(g_{k-1} + 1, floor(c**k))`` with ``c = (n/2)**(1/(m+1))``.

    ``g_0 = 1``.  Each ``g_k`` is clamped to ``[2, n//2 - (m - k)]`` so the
    remaining offsets always fit.  A ``1e-9`` slack on the floor absorbs
    rounding in ``c**k`` (so 512**(1/3) gives 8, not 7).
    """
    if m == 0:
        return ()
    if m > offset_capacity(n):
        raise ModelError(f"cannot fit {m} distinct offsets on a ring of {n} nodes "
                         f"(at most {offset_capacity(n)})")
    c = (n / 2) ** (1.0 / (m + 1))
    half = n // 2
    offsets = []
    prev = 1
    for k in range(1, m + 1):
        g = max(prev + 1, math.floor(c ** k + 1e-9))
        g = min(max(g, 2), half - (m - k))
        offsets.append(g)
        prev = g
    return tuple(offsets)


def build_topology(n: int, m: int, q: float, offsets: tuple[int, ...] | None = None) -> Topology:
    """Ring of ``n`` nodes with ``m`` long-range offsets selected with weight ``q``.

    ``offsets`` overrides the geometric rule; its length must equal ``m``.
    """
    if n < 3:
        raise ModelError(f"a ring needs at least 3 nodes, got {n}")
    effective_dimension(m, q)  # validates m and q
    if offsets is None:
        offsets = geometric_offsets(n, m)
    elif len(offsets) != m:
        raise ModelError(f"{len(offsets)} explicit offsets given but m={m}")
    return Topology(n, tuple(offsets), float(q))


def neighbor_weights(topology: Topology, i: int) -> list[tuple[int, float]]:
    """Candidate partners of node ``i`` with their (unnormalised) weights."""
    n = topology.n_nodes
    if not 0 <= i < n:
        raise ModelError(f"node index {i} outside [0, {n})")
    deltas, cumulative = topology.selection_table
    weights = np.diff(cumulative, prepend=0.0)
    return [(int((i + d) % n), float(w)) for d, w in zip(deltas, weights)]


class PairRNG(Protocol):
    def index(self, n: int) -> int: ...
    def uniform(self) -> float: ...
    def bit(self) -> int: ...


@dataclass
class ModelState:
    """Mutable simulation state.  Owned by one thread at a time."""

    topology: Topology
    spins: np.ndarray
    prices: np.ndarray
    rng: PairRNG
    interactions_done: int = 0

    def __post_init__(self):
        n = self.topology.n_nodes
        self.spins = np.asarray(self.spins, dtype=np.int8)
        self.prices = np.asarray(self.prices, dtype=np.int64)
        if self.spins.shape != (n,) or self.prices.shape != (n,):
            raise ModelError(f"spin and price arrays must have length {n}")
        if not np.all(np.abs(self.spins) == 1):
            raise ModelError("spins must be +1 or -1")

    @classmethod
    def initial(cls, topology: Topology, seed: int) -> ModelState:
        """Fresh state: prices 0, spins from one ``bit()`` per node in index order."""
        rng = Xoshiro256(seed)
        spins = np.array([Spin.from_bit(rng.bit()) for _ in range(topology.n_nodes)], dtype=np.int8)
        return cls(topology, spins, np.zeros(topology.n_nodes, dtype=np.int64), rng)

    @property
    def n_nodes(self) -> int:
        return self.topology.n_nodes

    @property
    def nodes(self) -> list[NodeState]:
        return [NodeState(Spin(int(s)), int(p)) for s, p in zip(self.spins, self.prices)]

    def copy(self) -> ModelState:
        return ModelState(self.topology, self.spins.copy(), self.prices.copy(),
                          self.rng.copy(), self.interactions_done)


def select_pair(state: ModelState) -> tuple[int, int]:
    """Draw the interacting pair: ``i`` uniform, then ``j`` by neighbour weight.

    Consumes ``rng.index(n)`` then ``rng.uniform()``; ``j`` is the first
    table entry whose cumulative weight exceeds ``u * total``.
    """
    n = state.n_nodes
    deltas, cumulative = state.topology._selection_lists
    i = state.rng.index(n)
    target = state.rng.uniform() * cumulative[-1]
    # u < 1 keeps k in range except under rounding at the very top
    k = min(bisect.bisect_right(cumulative, target), len(cumulative) - 1)
    j = (i + deltas[k]) % n
    assert j != i
    return i, j


def interact(spin_i: Spin, spin_j: Spin, rng: PairRNG) -> InteractionOutcome:
    """Like spins move both prices by the shared spin; unlike spins deal and re-draw."""
    if spin_i == spin_j:
        d = int(spin_i)
        return InteractionOutcome(d, d, Spin(spin_i), Spin(spin_j))
    first = Spin.from_bit(rng.bit())
    second = Spin.from_bit(rng.bit())
    return InteractionOutcome(0, 0, first, second)

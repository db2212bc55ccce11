"""Set-function oracles, marginal gains and evaluation accounting.

Every oracle is normalized at construction so that ``f(()) == 0.0`` exactly,
and counts how many times it was asked for a value.  Algorithms only talk to
oracles through :meth:`SetFunction.value` and :meth:`SetFunction.gains`, so
the counter is the cost model used throughout the package.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

# monotonicity slack is relative to max(1, |f(T)|)
TAU_MONO = 1e-9
TAU_EQ = 1e-9


@dataclass(frozen=True)
class GroundSet:
    """Indices ``0 .. d-1``."""

    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"ground set size must be a positive integer, got {self.d!r}")

    def check(self, S: Iterable[int]) -> tuple[int, ...]:
        """Validate a candidate subset and return it as a sorted tuple."""
        items = tuple(int(j) for j in S)
        for j in items:
            if j < 0 or j >= self.d:
                raise DomainError(f"element {j} out of range for ground set of size {self.d}")
        if len(set(items)) != len(items):
            raise DomainError(f"subset {items} contains duplicate elements")
        return tuple(sorted(items))

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(range(self.d))


class SetFunction:
    """Base class for monotone set functions over ``GroundSet(d)``.

    Subclasses implement :meth:`_raw`; the value at the empty set is
    subtracted once here.  Subclasses may override :meth:`_gains` with a
    vectorized version, but must keep the results deterministic per
    candidate (the value for ``j`` may not depend on which other candidates
    are in the batch).
    """

    def __init__(self, d: int):
        self.ground = GroundSet(d)
        self._lock = threading.Lock()
        self._evals = 0
        self._offset = float(self._raw(()))

    @property
    def d(self) -> int:
        return self.ground.d

    def _raw(self, S: tuple[int, ...]) -> float:
        raise NotImplementedError

    def _normalized(self, S: tuple[int, ...]) -> float:
        if not S:
            return 0.0
        return float(self._raw(S)) - self._offset

    def _count(self, n: int) -> None:
        with self._lock:
            self._evals += n

    @property
    def evaluations(self) -> int:
        return self._evals

    def reset_counter(self) -> None:
        with self._lock:
            self._evals = 0

    def evaluate(self, S: Iterable[int]) -> float:
        """Return ``f(S)``; costs one evaluation."""
        S = self.ground.check(S)
        self._count(1)
        return self._normalized(S)

    __call__ = evaluate

    def value(self, S: Sequence[int]) -> float:
        """Unvalidated, counted evaluation used on algorithm hot paths."""
        self._count(1)
        return self._normalized(tuple(sorted(S)))

    def marginal_gain(self, S: Iterable[int], j: int, base: float | None = None) -> float:
        S = self.ground.check(S)
        (j,) = self.ground.check([j])
        if j in S:
            raise DomainError(f"element {j} already in {S}")
        return float(self.gains(S, [j], base)[0])

    def gains(self, S: Sequence[int], candidates: Sequence[int], base: float | None = None) -> np.ndarray:
        """Marginal gains ``f(S + j) - f(S)`` for every ``j`` in ``candidates``.

        Costs ``len(candidates)`` evaluations, plus one when ``base`` (the
        cached value of ``f(S)``) is not supplied.
        """
        S = tuple(sorted(S))
        if base is None:
            base = self.value(S)
        if len(candidates) == 0:
            return np.zeros(0)
        self._count(len(candidates))
        return self._gains(S, list(candidates), base)

    def _gains(self, S: tuple[int, ...], candidates: list[int], base: float) -> np.ndarray:
        return np.array([self._normalized(tuple(sorted(S + (j,)))) - base for j in candidates])


def evaluate(oracle: SetFunction, S: Iterable[int]) -> float:
    return oracle.evaluate(S)


def marginal_gain(oracle: SetFunction, S: Iterable[int], j: int, base: float | None = None) -> float:
    return oracle.marginal_gain(S, j, base)


class ModularFunction(SetFunction):
    """``f(S) = sum of w[j]`` for ``j`` in ``S``; submodular and additive."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.ndim != 1:
            raise DomainError("weights must be one-dimensional")
        super().__init__(len(self.weights))

    def _raw(self, S):
        return float(sum(self.weights[j] for j in S)) if S else 0.0


class CardinalityFunction(SetFunction):
    def _raw(self, S):
        return float(len(S))


class CoverageFunction(SetFunction):
    """Number (or total weight) of items covered by the union of the chosen sets."""

    def __init__(self, sets, item_weights=None):
        self.sets = [frozenset(s) for s in sets]
        self.item_weights = dict(item_weights or {})
        super().__init__(len(self.sets))

    def _raw(self, S):
        covered = set().union(*(self.sets[j] for j in S)) if S else set()
        return float(sum(self.item_weights.get(x, 1.0) for x in covered))


def _mask(S: Iterable[int]) -> int:
    m = 0
    for j in S:
        m |= 1 << j
    return m


class TabulatedFunction(SetFunction):
    """A set function stored as a table over all ``2**d`` bitmasks.

    ``from_function`` copies another oracle's values exactly, which makes
    Monte-Carlo runs of the randomized algorithms cheap on small instances.
    """

    def __init__(self, table):
        table = np.asarray(table, dtype=float)
        d = int(round(np.log2(len(table))))
        if len(table) != 1 << d:
            raise DomainError("table length must be a power of two")
        self.table = table - table[0]
        super().__init__(d)

    @classmethod
    def from_function(cls, oracle: SetFunction) -> "TabulatedFunction":
        d = oracle.d
        if d > 20:
            raise DomainError(f"refusing to tabulate a ground set of size {d}")
        table = np.zeros(1 << d)
        for mask in range(1, 1 << d):
            S = tuple(j for j in range(d) if mask >> j & 1)
            table[mask] = oracle.value(S)
        return cls(table)

    def _raw(self, S):
        return float(self.table[_mask(S)])

    def _gains(self, S, candidates, base):
        m = _mask(S)
        idx = m | (1 << np.asarray(candidates, dtype=np.int64))
        return self.table[idx] - base


@dataclass(frozen=True)
class SelectionStep:
    element: int
    gain: float
    value: float
    evaluations: int
    # selected with no gain beyond TAU_EQ, e.g. a column already in the span
    degenerate: bool = False


@dataclass
class SelectionTrace:
    """Ordered record of the elements picked by a selection algorithm."""

    steps: list[SelectionStep] = field(default_factory=list)

    @property
    def selected(self) -> list[int]:
        return [s.element for s in self.steps]

    @property
    def value(self) -> float:
        return self.steps[-1].value if self.steps else 0.0

    @property
    def evaluations(self) -> int:
        return sum(s.evaluations for s in self.steps)

    def __len__(self):
        return len(self.steps)

    def prefix(self, i: int) -> "SelectionTrace":
        return SelectionTrace(list(self.steps[:i]))


def subsets(elements: Sequence[int], max_size: int | None = None, min_size: int = 0):
    """All subsets of ``elements`` in order of size, then lexicographically."""
    top = len(elements) if max_size is None else min(max_size, len(elements))
    for r in range(min_size, top + 1):
        yield from combinations(elements, r)

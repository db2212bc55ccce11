"""Greedy, stochastic greedy and distributed greedy maximization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .setfunc import TAU_EQ, SelectionStep, SelectionTrace, SetFunction


class RandomSource:
    """Seeded, splittable randomness.

    Wraps a :class:`numpy.random.SeedSequence`; ``spawn`` hands out
    independent children so parallel work never shares a stream.
    """

    def __init__(self, seed: int | np.random.SeedSequence = 0):
        if isinstance(seed, np.random.SeedSequence):
            self.seed_seq = seed
        else:
            if int(seed) < 0 or int(seed) >= 2**64:
                raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
            self.seed_seq = np.random.SeedSequence(int(seed))
        self.generator = np.random.default_rng(self.seed_seq)

    def spawn(self, n: int) -> list["RandomSource"]:
        return [RandomSource(s) for s in self.seed_seq.spawn(n)]


def _as_rng(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    return RandomSource(0 if rng is None else rng)


def _candidates(oracle: SetFunction, candidates) -> list[int]:
    if candidates is None:
        return list(range(oracle.d))
    return list(oracle.ground.check(candidates))


def _check_k(k, available: int) -> None:
    if int(k) != k or k <= 0:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if k > available:
        raise ConfigError(f"k={k} exceeds the {available} available candidates")


def _select(oracle: SetFunction, candidates: list[int], k: int, pool_for_step) -> SelectionTrace:
    selected: list[int] = []
    remaining = list(candidates)
    value = 0.0
    trace = SelectionTrace()
    for _ in range(k):
        pool = list(pool_for_step(remaining))
        gains = oracle.gains(selected, pool, base=value)
        # pools are sorted, so argmax breaks ties towards the lowest index
        best = int(np.argmax(gains))
        j, gain = pool[best], float(gains[best])
        value = value + gain
        selected.append(j)
        remaining.remove(j)
        trace.steps.append(SelectionStep(j, gain, value, len(pool), degenerate=gain <= TAU_EQ))
    return trace


def greedy(oracle: SetFunction, candidates: Sequence[int] | None, k: int) -> SelectionTrace:
    """Pick ``k`` elements, each maximizing the marginal gain over the rest.

    Uses ``k*d - k*(k-1)/2`` evaluations for ``d`` candidates: ``f(())`` is
    zero by construction and each step's base value is carried over from
    the previous winner.
    """
    cands = _candidates(oracle, candidates)
    _check_k(k, len(cands))
    return _select(oracle, cands, k, lambda remaining: remaining)


def subsample_size(d: int, k: int, delta: float) -> int:
    """``ceil(d * ln(1/delta) / k)``."""
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    x = d * math.log(1.0 / delta) / k
    # absorb rounding in log() so exact integers are not bumped up by one
    return max(1, math.ceil(x - 1e-12 * max(1.0, x)))


def subsample(remaining: Sequence[int], d: int, k: int, delta: float, rng: RandomSource) -> list[int]:
    """Uniform sample without replacement of ``min(C, len(remaining))`` elements, sorted."""
    size = subsample_size(d, k, delta)
    remaining = list(remaining)
    if not remaining:
        raise ConfigError("cannot subsample from an empty candidate set")
    if size >= len(remaining):
        return sorted(remaining)
    picked = rng.generator.choice(len(remaining), size=size, replace=False)
    return sorted(remaining[i] for i in picked)


def stochastic_greedy(oracle: SetFunction, candidates: Sequence[int] | None, k: int,
                      delta: float, rng=None) -> SelectionTrace:
    """Greedy where each step only scans a fresh random subsample of the remaining candidates."""
    cands = _candidates(oracle, candidates)
    _check_k(k, len(cands))
    rng = _as_rng(rng)
    d = len(cands)
    subsample_size(d, k, delta)  # validates delta before any work
    return _select(oracle, cands, k, lambda remaining: subsample(remaining, d, k, delta, rng))


def partition_uniform(candidates: Sequence[int], l: int, rng=None, *, balanced: bool = False) -> list[list[int]]:
    """Split ``candidates`` into ``l`` disjoint parts.

    By default every candidate is sent to a part drawn independently and
    uniformly from ``range(l)``, so parts may be empty.  ``balanced=True``
    shuffles and deals the candidates into parts whose sizes differ by at
    most one.
    """
    if int(l) != l or l <= 0:
        raise ConfigError(f"number of parts must be a positive integer, got {l!r}")
    candidates = list(candidates)
    if l > len(candidates):
        raise ConfigError(f"cannot split {len(candidates)} candidates into {l} parts")
    rng = _as_rng(rng)
    if l == 1:
        return [sorted(candidates)]
    parts: list[list[int]] = [[] for _ in range(l)]
    if balanced:
        order = rng.generator.permutation(len(candidates))
        for pos, i in enumerate(order):
            parts[pos % l].append(candidates[i])
    else:
        owner = rng.generator.integers(0, l, size=len(candidates))
        for c, o in zip(candidates, owner):
            parts[o].append(c)
    return [sorted(p) for p in parts]


Solver = Callable[[SetFunction, Sequence[int], int, RandomSource], SelectionTrace]


def _greedy_solver(oracle, candidates, k, rng):
    return greedy(oracle, candidates, k)


@dataclass
class DistributedResult:
    parts: list[list[int]]
    local: list[SelectionTrace]
    aggregated: SelectionTrace
    best_local: int
    selected: list[int]
    value: float
    from_aggregate: bool

    @property
    def evaluations(self) -> int:
        return self.aggregated.evaluations + sum(t.evaluations for t in self.local)


def distributed(oracle: SetFunction, candidates: Sequence[int] | None, l: int, k: int, rng=None,
                *, solver: Solver = _greedy_solver, balanced: bool = False, executor=None,
                parts: Sequence[Sequence[int]] | None = None) -> DistributedResult:
    """Partition, solve each part, re-solve on the union of local answers, keep the best.

    ``solver`` is any selection routine with the ``(oracle, candidates, k,
    rng)`` signature; parts with fewer than ``k`` candidates get a solution
    of size ``len(part)``.  ``executor`` (a ``concurrent.futures``
    executor) runs the local solves in parallel; each one gets its own
    spawned random stream, so results do not depend on scheduling.
    A precomputed partition may be passed as ``parts``.
    """
    cands = _candidates(oracle, candidates)
    if not cands:
        raise ConfigError("empty candidate set")
    if int(k) != k or k <= 0:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    rng = _as_rng(rng)
    if parts is None:
        parts = partition_uniform(cands, l, rng, balanced=balanced)
    else:
        parts = [sorted(p) for p in parts]
        if len(parts) != l or sorted(j for p in parts for j in p) != cands:
            raise ConfigError("parts must be a partition of the candidates into l pieces")
    streams = rng.spawn(l + 1)

    def solve(args):
        part, stream = args
        if not part:
            return SelectionTrace()
        return solver(oracle, part, min(k, len(part)), stream)

    jobs = list(zip(parts, streams[:l]))
    local = list(executor.map(solve, jobs)) if executor is not None else [solve(j) for j in jobs]

    union = sorted(set().union(*(t.selected for t in local)))
    aggregated = solver(oracle, union, min(k, len(union)), streams[l])
    values = [t.value for t in local]
    best = int(np.argmax(values))
    if aggregated.value >= values[best]:
        chosen, value, from_agg = aggregated.selected, aggregated.value, True
    else:
        chosen, value, from_agg = local[best].selected, values[best], False
    return DistributedResult(parts, local, aggregated, best, list(chosen), value, from_agg)


def distributed_greedy(oracle: SetFunction, candidates: Sequence[int] | None, l: int, k: int, rng=None,
                       *, balanced: bool = False, executor=None) -> DistributedResult:
    return distributed(oracle, candidates, l, k, rng, balanced=balanced, executor=executor)

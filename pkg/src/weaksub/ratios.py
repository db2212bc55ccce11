"""Exact submodularity / subadditivity ratios and approximation certificates.

Everything here enumerates subsets, so it is only meant for small ground
sets (``d <= D_MAX_BRUTEFORCE``).  Values are tabulated once per call and
minima are reduced deterministically: the first witness in lexicographic
order wins ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegenerateDataError, DomainError, ResourceError
from .setfunc import TAU_EQ, SetFunction, TabulatedFunction, subsets

D_MAX_BRUTEFORCE = 14
ENUMERATION_BUDGET = 10**6
# (L, S) pairs scanned by the vectorized gamma search
PAIR_BUDGET = 5 * 10**7


@dataclass(frozen=True)
class RatioReport:
    """A ratio value together with the sets that attain it.

    ``witness`` is ``(L, S)`` for submodularity ratios and ``(A, B)`` for
    subadditivity ratios.
    """

    kind: str
    value: float
    witness: tuple[tuple[int, ...], tuple[int, ...]]
    scope: str

    def lines(self, prefix: str = "") -> list[str]:
        L, S = self.witness
        return [
            f"{prefix}kind={self.kind}",
            f"{prefix}scope={self.scope}",
            f"{prefix}value={self.value:.12g}",
            f"{prefix}witness_1={','.join(map(str, L))}",
            f"{prefix}witness_2={','.join(map(str, S))}",
        ]


def _ratio(num: float, den: float) -> float:
    # 0/0 witnesses nothing (ratio 1); x/0 can never attain a finite minimum
    if den <= TAU_EQ:
        return 1.0 if num <= TAU_EQ else math.inf
    return num / den


def _mask(S) -> int:
    m = 0
    for j in S:
        m |= 1 << j
    return m


def tabulate(oracle: SetFunction) -> np.ndarray:
    """Values of ``oracle`` on all ``2**d`` subsets, indexed by bitmask."""
    if oracle.d > D_MAX_BRUTEFORCE:
        raise ResourceError(
            f"ground set of size {oracle.d} exceeds d_max_bruteforce={D_MAX_BRUTEFORCE}")
    if isinstance(oracle, TabulatedFunction):
        return oracle.table
    return TabulatedFunction.from_function(oracle).table


def submodularity_ratio_pair(oracle: SetFunction, L: Sequence[int], S: Sequence[int]) -> float:
    """``sum_j [f(L+j) - f(L)] / [f(L+S) - f(L)]`` for disjoint ``L`` and nonempty ``S``."""
    L = oracle.ground.check(L)
    S = oracle.ground.check(S)
    if set(L) & set(S):
        raise DomainError(f"L={L} and S={S} overlap")
    if not S:
        raise DomainError("S must be nonempty")
    f_L = oracle.value(L)
    num = sum(oracle.value(L + (j,)) - f_L for j in S)
    den = oracle.value(L + S) - f_L
    return _ratio(num, den)


def _gamma_scan(oracle: SetFunction, L_family: list[tuple[int, ...]], k: int, scope: str) -> RatioReport:
    if int(k) != k or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    d = oracle.d
    S_family = sorted(subsets(range(d), max_size=k, min_size=1))
    if len(L_family) * len(S_family) > PAIR_BUDGET:
        raise ResourceError(
            f"{len(L_family) * len(S_family)} (L, S) pairs exceed the budget of {PAIR_BUDGET}")
    table = tabulate(oracle)
    S_masks = np.array([_mask(S) for S in S_family], dtype=np.int64)
    membership = np.zeros((len(S_family), d))
    for row, S in enumerate(S_family):
        membership[row, list(S)] = 1.0
    singles = np.int64(1) << np.arange(d, dtype=np.int64)

    best_value, best_witness = math.inf, None
    for L in sorted(L_family):
        lm = _mask(L)
        valid = (S_masks & lm) == 0
        f_L = table[lm]
        g = table[lm | singles] - f_L
        g[list(L)] = 0.0
        num = membership[valid] @ g
        den = table[lm | S_masks[valid]] - f_L
        ratios = np.where(den > TAU_EQ, num / np.where(den > TAU_EQ, den, 1.0),
                          np.where(num <= TAU_EQ, 1.0, np.inf))
        if ratios.size == 0:
            continue
        i = int(np.argmin(ratios))
        if ratios[i] < best_value:
            best_value = float(ratios[i])
            best_witness = (L, S_family[int(np.flatnonzero(valid)[i])])
    if best_witness is None:
        raise DegenerateDataError(f"no admissible (L, S) pair for {scope}")
    return RatioReport("gamma", best_value, best_witness, scope)


def submodularity_ratio_uk(oracle: SetFunction, U: Sequence[int], k: int) -> RatioReport:
    """``min gamma_{L,S}`` over ``L`` inside ``U`` and disjoint ``S`` with ``1 <= |S| <= k``."""
    U = oracle.ground.check(U)
    return _gamma_scan(oracle, list(subsets(U)), k, f"set-vs-k U={','.join(map(str, U))} k={k}")


def uniform_submodularity_ratio(oracle: SetFunction, max_l: int, k: int) -> RatioReport:
    """``min gamma_{L,S}`` over every ``L`` with ``|L| <= max_l`` and ``1 <= |S| <= k``.

    Lower-bounds ``gamma_{U,k}`` for every ``U`` of size at most ``max_l``,
    which makes it usable when ``U`` is the (random) output of a randomized
    algorithm.
    """
    return _gamma_scan(oracle, list(subsets(range(oracle.d), max_size=max_l)), k,
                       f"k-uniform |L|<={max_l} k={k}")


def _local_masks(elems: tuple[int, ...]) -> np.ndarray:
    """Global bitmask of every subset of ``elems``, indexed by local bitmask."""
    local = np.arange(1 << len(elems), dtype=np.int64)
    glob = np.zeros_like(local)
    for pos, e in enumerate(elems):
        glob |= ((local >> pos) & 1) << e
    return glob


def _nu_from_local(values: np.ndarray, elems: tuple[int, ...]) -> tuple[float, tuple, tuple]:
    """``values[m]`` is f of the subset of ``elems`` selected by local mask ``m``."""
    full = len(values) - 1
    f_S = values[full]
    if f_S <= TAU_EQ:
        raise DegenerateDataError(f"f(S)={f_S:.3g} is not positive for S={elems}")
    masks = np.arange(len(values))
    ratios = (values + values[full ^ masks]) / f_S
    i = int(np.argmin(ratios))
    A = tuple(e for pos, e in enumerate(elems) if i >> pos & 1)
    B = tuple(e for pos, e in enumerate(elems) if not i >> pos & 1)
    return float(ratios[i]), A, B


def subadditivity_ratio_set(oracle: SetFunction, S: Sequence[int]) -> RatioReport:
    """``min (f(A) + f(B)) / f(S)`` over all splits ``A | B`` of ``S`` (including ``(), S``)."""
    S = oracle.ground.check(S)
    if len(S) > D_MAX_BRUTEFORCE:
        raise ResourceError(f"|S|={len(S)} exceeds d_max_bruteforce={D_MAX_BRUTEFORCE}")
    if not S:
        raise DegenerateDataError("subadditivity ratio of the empty set is undefined")
    if isinstance(oracle, TabulatedFunction):
        values = oracle.table[_local_masks(S)]
    else:
        values = np.array([0.0] + [oracle.value(tuple(e for pos, e in enumerate(S) if m >> pos & 1))
                                   for m in range(1, 1 << len(S))])
    value, A, B = _nu_from_local(values, S)
    return RatioReport("nu", value, (A, B), f"set S={','.join(map(str, S))}")


def subadditivity_ratio_k(oracle: SetFunction, k: int) -> RatioReport:
    """``min nu_S`` over every ``S`` of size exactly ``k``."""
    d = oracle.d
    if int(k) != k or not 1 <= k <= d:
        raise ConfigError(f"k must lie in [1, {d}], got {k!r}")
    cost = math.comb(d, k) * (1 << k)
    if cost > ENUMERATION_BUDGET:
        raise ResourceError(f"nu_k needs {cost} set evaluations, budget is {ENUMERATION_BUDGET}")
    table = tabulate(oracle) if d <= D_MAX_BRUTEFORCE else None
    best = (math.inf, (), ())
    for S in combinations(range(d), k):
        if table is None:
            rep = subadditivity_ratio_set(oracle, S)
            value, (A, B) = rep.value, rep.witness
        else:
            value, A, B = _nu_from_local(table[_local_masks(S)], S)
        if value < best[0]:
            best = (value, A, B)
    value, A, B = best
    return RatioReport("nu", value, (A, B), f"k-uniform k={k}")


def brute_force_opt(oracle: SetFunction, k: int) -> tuple[tuple[int, ...], float]:
    """Best set of size ``k`` (lexicographically first among ties) and its value.

    Only size-``k`` sets are scanned; for monotone ``f`` they dominate smaller ones.
    """
    d = oracle.d
    if int(k) != k or not 1 <= k <= d:
        raise ConfigError(f"k must lie in [1, {d}], got {k!r}")
    if math.comb(d, k) > ENUMERATION_BUDGET:
        raise ResourceError(f"C({d},{k}) exceeds the enumeration budget {ENUMERATION_BUDGET}")
    best_set, best_value = None, -math.inf
    for S in combinations(range(d), k):
        v = oracle.value(S)
        if v > best_value:
            best_set, best_value = S, v
    return best_set, best_value


TAGS = ("greedy", "stochastic", "distributed")


@dataclass(frozen=True)
class BoundCertificate:
    tag: str
    gamma: float
    factor: float
    nu: float | None = None
    delta: float | None = None
    opt_value: float | None = None
    note: str = ""

    @property
    def bound(self) -> float | None:
        """Guaranteed value ``factor * OPT`` when OPT is known."""
        return None if self.opt_value is None else self.factor * self.opt_value

    def lines(self) -> list[str]:
        fields = {"tag": self.tag, "gamma": self.gamma, "nu": self.nu, "delta": self.delta,
                  "factor": self.factor, "opt": self.opt_value, "bound": self.bound}
        out = [f"{k}={'na' if v is None else (v if isinstance(v, str) else f'{v:.12g}')}"
               for k, v in fields.items()]
        if self.note:
            out.append(f"note={self.note}")
        return out


def make_certificate(tag: str, gamma: float, nu: float | None = None, delta: float | None = None,
                     opt_value: float | None = None, note: str = "") -> BoundCertificate:
    """Instantiate an approximation factor from its closed form.

    greedy ``1 - e^-gamma``; stochastic ``1 - e^-gamma - delta``;
    distributed ``nu/2 * (1 - e^-gamma)``.  Factors are clamped to [0, 1].
    """
    if tag not in TAGS:
        raise ConfigError(f"unknown certificate tag {tag!r}; expected one of {TAGS}")
    if not gamma >= 0:
        raise DomainError(f"gamma must be nonnegative, got {gamma}")
    base = -math.expm1(-gamma)
    if tag == "greedy":
        factor = base
    elif tag == "stochastic":
        if delta is None:
            raise ConfigError("stochastic certificate needs delta")
        if not 0 < delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {delta}")
        factor = base - delta
    else:
        if nu is None:
            raise ConfigError("distributed certificate needs nu")
        if nu < 0:
            raise DomainError(f"nu must be nonnegative, got {nu}")
        factor = 0.5 * nu * base
    factor = min(1.0, max(0.0, factor))
    return BoundCertificate(tag, float(gamma), factor, nu, delta, opt_value, note)

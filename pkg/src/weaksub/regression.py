"""The R^2 set function for sparse linear regression.

``f(S) = ||P_S y||^2`` where ``P_S`` projects onto the span of the columns
``X[:, S]``.  Values and marginal gains are computed from the Gram matrix
``C = X^T X`` and ``b = X^T y`` with a Cholesky factor of ``C[S, S]`` built
one column at a time, so a full greedy sweep never touches ``X`` itself.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateDataError, DomainError, ResourceError
from .setfunc import TAU_EQ, SelectionStep, SelectionTrace, SetFunction

# squared pivot, relative to the column's own squared norm, below which a
# column is treated as lying in the span of those already chosen
PIVOT_TOL = 1e-10
ENUMERATION_BUDGET = 10**6


@dataclass
class RegressionInstance:
    """Design ``X`` (n x d) and response ``y``.

    ``col_scale`` and ``y_scale`` record what :func:`normalize` divided out,
    so that coefficients can be mapped back to raw units.
    """

    X: np.ndarray
    y: np.ndarray
    col_scale: np.ndarray | None = None
    y_scale: float = 1.0
    names: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise DomainError(f"X {self.X.shape} and y {self.y.shape} are incompatible")
        if self.col_scale is None:
            self.col_scale = np.ones(self.X.shape[1])

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @cached_property
    def C(self) -> np.ndarray:
        C = self.X.T @ self.X
        return 0.5 * (C + C.T)

    @cached_property
    def b(self) -> np.ndarray:
        return self.X.T @ self.y

    def raw_coefficients(self, S: Sequence[int], beta: np.ndarray) -> np.ndarray:
        """Map coefficients fitted on normalized columns back to raw units (length d)."""
        full = np.zeros(self.d)
        full[list(S)] = np.asarray(beta) * self.y_scale / self.col_scale[list(S)]
        return full


def normalize(instance: RegressionInstance) -> RegressionInstance:
    """Scale every column of ``X`` and the response to unit Euclidean norm.

    Columns already within 1e-12 of unit norm are left untouched, which
    makes the operation idempotent bit for bit.
    """
    X = instance.X.copy()
    norms = np.linalg.norm(X, axis=0)
    for j, nrm in enumerate(norms):
        if nrm == 0.0:
            name = instance.names[j] if instance.names else str(j)
            raise DegenerateDataError(f"column {name} is identically zero")
    scale = np.where(np.abs(norms - 1.0) <= 1e-12, 1.0, norms)
    X /= scale
    y_norm = float(np.linalg.norm(instance.y))
    if y_norm == 0.0:
        raise DegenerateDataError("response vector is identically zero")
    y_scale = 1.0 if abs(y_norm - 1.0) <= 1e-12 else y_norm
    return RegressionInstance(X, instance.y / y_scale, instance.col_scale * scale,
                              instance.y_scale * y_scale, instance.names)


class _Factor:
    """Cholesky factor of ``C[S, S]`` over the columns of ``S`` that pivot."""

    def __init__(self, C: np.ndarray, b: np.ndarray, S: Sequence[int]):
        m = len(S)
        self.L = np.zeros((m, m))
        self.kept: list[int] = []
        self.skipped: list[int] = []
        self.z = np.zeros(m)
        for j in S:
            self._extend(C, b, j)
        r = len(self.kept)
        self.L = self.L[:r, :r]
        self.z = self.z[:r]

    def _extend(self, C, b, j):
        r = len(self.kept)
        w = self.solve_lower(C[self.kept, j]) if r else np.zeros(0)
        p2 = C[j, j] - float(w @ w)
        if p2 <= PIVOT_TOL * C[j, j]:
            self.skipped.append(j)
            return
        piv = math.sqrt(p2)
        self.L[r, :r] = w
        self.L[r, r] = piv
        self.z[r] = (b[j] - float(w @ self.z[:r])) / piv
        self.kept.append(j)

    def solve_lower(self, rhs: np.ndarray) -> np.ndarray:
        """Forward substitution, row by row.

        Written with elementwise products and axis-0 sums so every column
        of a 2-D ``rhs`` is computed independently of the others.
        """
        r = len(self.kept)
        rhs = np.asarray(rhs, dtype=float)
        out = np.zeros((r, *rhs.shape[1:]))
        for i in range(r):
            if i:
                acc = (self.L[i, :i].reshape((i,) + (1,) * (rhs.ndim - 1)) * out[:i]).sum(axis=0)
                out[i] = (rhs[i] - acc) / self.L[i, i]
            else:
                out[i] = rhs[i] / self.L[i, i]
        return out

    @property
    def value(self) -> float:
        return float(self.z @ self.z)

    def coefficients(self) -> np.ndarray:
        """Least-squares coefficients on ``kept`` (back substitution)."""
        r = len(self.kept)
        beta = np.zeros(r)
        for i in range(r - 1, -1, -1):
            beta[i] = (self.z[i] - float(self.L[i + 1:, i] @ beta[i + 1:])) / self.L[i, i]
        return beta


def r2_value(instance: RegressionInstance, S: Sequence[int], return_skipped: bool = False):
    """``||P_S y||^2``; columns already in the span of earlier ones add nothing."""
    S = list(S)
    for j in S:
        if not 0 <= j < instance.d:
            raise DomainError(f"column {j} out of range")
    fac = _Factor(instance.C, instance.b, S)
    if return_skipped:
        return fac.value, fac.skipped
    return fac.value


def r2_reference(instance: RegressionInstance, S: Sequence[int]) -> float:
    """From-scratch least-squares R^2, used to check :func:`r2_value`."""
    S = list(S)
    if not S:
        return 0.0
    XS = instance.X[:, S]
    beta, *_ = np.linalg.lstsq(XS, instance.y, rcond=None)
    fit = XS @ beta
    return float(fit @ fit)


class R2Function(SetFunction):
    """The R^2 statistic as a set function over the columns of ``instance``."""

    def __init__(self, instance: RegressionInstance):
        self.instance = instance
        super().__init__(instance.d)

    def _raw(self, S):
        return r2_value(self.instance, S)

    def _gains(self, S, candidates, base):
        inst = self.instance
        C, b = inst.C, inst.b
        fac = _Factor(C, b, S)
        cands = np.asarray(candidates)
        if fac.kept:
            W = fac.solve_lower(C[np.ix_(fac.kept, cands)])
            p2 = C[cands, cands] - (W * W).sum(axis=0)
            num = b[cands] - (W * fac.z[:, None]).sum(axis=0)
        else:
            p2 = C[cands, cands].copy()
            num = b[cands].copy()
        ok = p2 > PIVOT_TOL * C[cands, cands]
        gains = np.zeros(len(cands))
        gains[ok] = num[ok] ** 2 / p2[ok]
        # base is the caller's cached f(S); fold the difference in so gains
        # stay consistent with it
        return gains + (fac.value - base)


@dataclass(frozen=True)
class SparseEigenBounds:
    k: int
    lam_min: float
    lam_max: float
    min_support: tuple[int, ...]
    max_support: tuple[int, ...]


def sparse_eigenvalues(C: np.ndarray, k: int, budget: int = ENUMERATION_BUDGET) -> SparseEigenBounds:
    """Extreme eigenvalues over all ``k x k`` principal submatrices of ``C``."""
    C = np.asarray(C, dtype=float)
    d = C.shape[0]
    if C.shape != (d, d):
        raise DomainError("C must be square")
    if int(k) != k or not 1 <= k <= d:
        raise DomainError(f"sparsity k must lie in [1, {d}], got {k!r}")
    total = math.comb(d, k)
    if total > budget:
        raise ResourceError(
            f"C({d},{k})={total} principal submatrices exceed the budget {budget}; "
            "supply restricted strong concavity/smoothness constants instead")
    lo, hi = math.inf, -math.inf
    lo_s = hi_s = None
    chunk = max(1, 200_000 // (k * k))
    it = combinations(range(d), k)
    while True:
        block = [s for _, s in zip(range(chunk), it)]
        if not block:
            break
        idx = np.array(block)
        subs = C[idx[:, :, None], idx[:, None, :]]
        ev = np.linalg.eigvalsh(subs)
        i_lo = int(np.argmin(ev[:, 0]))
        i_hi = int(np.argmax(ev[:, -1]))
        if ev[i_lo, 0] < lo:
            lo, lo_s = float(ev[i_lo, 0]), block[i_lo]
        if ev[i_hi, -1] > hi:
            hi, hi_s = float(ev[i_hi, -1]), block[i_hi]
    return SparseEigenBounds(k, lo, hi, lo_s, hi_s)


def gamma_lower_bound_regression(instance: RegressionInstance, S: Sequence[int], k: int) -> float:
    """``lambda_min(C, k + |S|)``, a lower bound on ``gamma_{S,k}`` for unit-norm columns.

    The order is capped at ``d``.
    """
    order = min(int(k) + len(S), instance.d)
    return sparse_eigenvalues(instance.C, order).lam_min


def nu_lower_bound_regression(instance: RegressionInstance, S: Sequence[int]) -> float:
    """``lambda_min(C_S) / lambda_max(C_S)``, a lower bound on ``nu_S``."""
    S = list(S)
    if not S:
        raise DomainError("S must be nonempty")
    ev = np.linalg.eigvalsh(instance.C[np.ix_(S, S)])
    if ev[-1] <= TAU_EQ:
        raise DegenerateDataError(f"C_S is numerically zero for S={S}")
    return float(max(ev[0], 0.0) / ev[-1])


def omp_select(instance: RegressionInstance, k: int, candidates: Sequence[int] | None = None) -> SelectionTrace:
    """Orthogonal matching pursuit: pick the column most correlated with the residual, refit.

    Each step costs one refit, recorded as one evaluation.
    """
    C, b = instance.C, instance.b
    remaining = list(range(instance.d)) if candidates is None else sorted(candidates)
    if int(k) != k or not 1 <= k <= len(remaining):
        raise DomainError(f"k must lie in [1, {len(remaining)}], got {k!r}")
    S: list[int] = []
    trace = SelectionTrace()
    value = 0.0
    beta = np.zeros(0)
    kept: list[int] = []
    for _ in range(k):
        cands = np.asarray(remaining)
        corr = b[cands] - (C[np.ix_(cands, kept)] @ beta if kept else 0.0)
        best = int(np.argmax(np.abs(corr)))
        j = int(cands[best])
        S.append(j)
        remaining.remove(j)
        fac = _Factor(C, b, S)
        kept, beta = fac.kept, fac.coefficients()
        new = fac.value
        trace.steps.append(SelectionStep(j, new - value, new, 1, degenerate=new - value <= TAU_EQ))
        value = new
    return trace


def fit_coefficients(instance: RegressionInstance, S: Sequence[int]) -> tuple[list[int], np.ndarray]:
    """Least-squares coefficients on the pivoting columns of ``S``."""
    fac = _Factor(instance.C, instance.b, list(S))
    return fac.kept, fac.coefficients()


def load_csv(path) -> RegressionInstance:
    """Read a CSV with a header row, one column per feature and a final ``y`` column."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if not header or header[-1].strip() != "y":
        raise DomainError(f"{path}: last column must be named 'y', got {header[-1:]!r}")
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DomainError(f"{path}: ragged rows")
    return RegressionInstance(data[:, :-1], data[:, -1], names=[h.strip() for h in header[:-1]])


def save_csv(path, X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None) -> None:
    X = np.asarray(X)
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["y"])
        for row, t in zip(X, np.asarray(y).ravel()):
            w.writerow([repr(float(v)) for v in row] + [repr(float(t))])


def write_support(path, S: Sequence[int]) -> None:
    Path(path).write_text(",".join(str(int(j)) for j in S) + "\n")


def read_support(path) -> list[int]:
    text = Path(path).read_text().strip()
    return [int(t) for t in text.split(",")] if text else []

"""Support selection for smooth concave objectives.

The set function is ``f(S) = max_{supp(x) in S} g(x) - g(0)``.  Two
objectives are provided: a concave quadratic (solved exactly) and the
logistic log-likelihood (solved by Newton's method restricted to the
support).  Restricted strong concavity / smoothness constants ``(m, L)``
turn into lower bounds on both ratios, and from there into certificates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit

from .errors import ConvergenceError, DegenerateDataError, DomainError
from .ratios import BoundCertificate, make_certificate
from .regression import sparse_eigenvalues
from .setfunc import SetFunction

EPS_INNER = 1e-8
MAX_ITERS = 200


@dataclass
class InnerSolveReport:
    beta: np.ndarray
    value: float
    iterations: int
    grad_norm: float


class SmoothObjective:
    """A concave, smooth ``g: R^d -> R`` with value and gradient maps.

    ``constants`` maps a sparsity level to a known ``(m, L)`` pair.
    """

    d: int
    constants: dict

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def solve_support(self, S: Sequence[int], x0: np.ndarray | None = None) -> InnerSolveReport:
        raise NotImplementedError


class QuadraticObjective(SmoothObjective):
    """``g(x) = -x^T A x / 2 + b^T x`` with ``A`` symmetric positive semidefinite."""

    def __init__(self, A, b):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T, atol=1e-12, rtol=0):
            raise DomainError("A must be a symmetric square matrix")
        self.A = 0.5 * (A + A.T)
        self.b = np.asarray(b, dtype=float)
        self.d = self.A.shape[0]
        self.constants = {}

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(-0.5 * x @ self.A @ x + self.b @ x)

    def gradient(self, x):
        return self.b - self.A @ np.asarray(x, dtype=float)

    def solve_support(self, S, x0=None):
        S = list(S)
        beta = np.zeros(self.d)
        if S:
            try:
                beta[S] = np.linalg.solve(self.A[np.ix_(S, S)], self.b[S])
            except np.linalg.LinAlgError as exc:
                raise DegenerateDataError(f"A restricted to {S} is singular") from exc
        grad = self.gradient(beta)[S] if S else np.zeros(0)
        return InnerSolveReport(beta, self.value(beta), 1, float(np.linalg.norm(grad)))


class LogisticObjective(SmoothObjective):
    """Mean log-likelihood of a logistic model, labels in {-1, +1}.

    ``g(x) = -(1/n) sum_i log(1 + exp(-t_i z_i^T x))``; ``g(0) = -log 2``.
    """

    def __init__(self, Z, labels, eps: float = EPS_INNER, max_iters: int = MAX_ITERS):
        self.Z = np.asarray(Z, dtype=float)
        self.t = np.asarray(labels, dtype=float).ravel()
        if self.Z.shape[0] != self.t.shape[0]:
            raise DomainError("features and labels disagree on the number of samples")
        if not np.all(np.isin(self.t, (-1.0, 1.0))):
            raise DomainError("labels must be -1 or +1")
        self.n, self.d = self.Z.shape
        self.eps = eps
        self.max_iters = max_iters
        self.constants = {}

    def value(self, x):
        return float(np.mean(log_expit(self.t * (self.Z @ np.asarray(x, dtype=float)))))

    def gradient(self, x):
        margin = self.t * (self.Z @ np.asarray(x, dtype=float))
        return self.Z.T @ (self.t * expit(-margin)) / self.n

    def solve_support(self, S, x0=None):
        S = list(S)
        beta = np.zeros(self.d)
        if not S:
            return InnerSolveReport(beta, self.value(beta), 0, 0.0)
        ZS = self.Z[:, S] * self.t[:, None]
        w = np.zeros(len(S)) if x0 is None else np.asarray(x0, dtype=float)[S].copy()
        margin = ZS @ w
        val = float(np.mean(log_expit(margin)))
        gnorm = math.inf
        for it in range(self.max_iters + 1):
            p = expit(-margin)
            grad = ZS.T @ p / self.n
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= self.eps:
                beta[S] = w
                return InnerSolveReport(beta, val, it, gnorm)
            if it == self.max_iters:
                break
            curv = p * (1.0 - p)
            H = (ZS * curv[:, None]).T @ ZS / self.n
            try:
                step = np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = grad
            slope = float(grad @ step)
            t = 1.0
            for _ in range(60):
                new_margin = margin + t * (ZS @ step)
                new_val = float(np.mean(log_expit(new_margin)))
                if new_val >= val + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                # no ascent possible in floating point; we are at the optimum
                # up to rounding
                break
            w = w + t * step
            margin, val = new_margin, new_val
        beta[S] = w
        report = InnerSolveReport(beta, val, it, gnorm)
        if gnorm > self.eps * 100:
            raise ConvergenceError(
                f"support {S}: gradient norm {gnorm:.3g} after {it} Newton steps", report)
        return report

    @classmethod
    def from_csv(cls, path) -> "LogisticObjective":
        Z, labels, names = load_labeled_csv(path)
        obj = cls(Z, labels)
        obj.names = names
        return obj


class SupportFunction(SetFunction):
    """``f(S) = g(beta^(S)) - g(0)``; ``g(0)`` is evaluated once."""

    def __init__(self, objective: SmoothObjective):
        self.objective = objective
        super().__init__(objective.d)

    def _raw(self, S):
        return self.objective.solve_support(S).value

    def _gains(self, S, candidates, base):
        g0 = self._offset
        start = self.objective.solve_support(S).beta
        out = np.empty(len(candidates))
        for i, j in enumerate(candidates):
            rep = self.objective.solve_support(sorted(S + (j,)), x0=start)
            out[i] = rep.value - g0 - base
        return out

    def solve(self, S) -> InnerSolveReport:
        return self.objective.solve_support(self.ground.check(S))


def support_value(objective: SmoothObjective, S: Sequence[int]) -> float:
    if not len(S):
        return 0.0
    return objective.solve_support(S).value - objective.value(np.zeros(objective.d))


def rsc_rsm_quadratic(A, s: int) -> tuple[float, float]:
    """Exact ``(m, L)`` of ``-x^T A x / 2`` over ``s``-sparse supports."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T, atol=1e-12, rtol=0):
        raise DomainError("A must be symmetric")
    bounds = sparse_eigenvalues(A, min(int(s), A.shape[0]))
    return bounds.lam_min, bounds.lam_max


def _check_mL(m: float, L: float) -> None:
    if not m > 0:
        raise DomainError(f"m={m} is not positive: the objective is not strongly concave")
    if not L >= m:
        raise DomainError(f"smoothness L={L} must be at least m={m}")


def gamma_lower_bound_rsc(m: float, L: float) -> float:
    _check_mL(m, L)
    return m / L


def nu_lower_bound_rsc(m: float, L: float) -> float:
    _check_mL(m, L)
    return m / L


def combined_certificates(m: float, L: float, delta: float | None = None, k: int | None = None,
                          opt_value: float | None = None, order: str = "") -> list[BoundCertificate]:
    """Greedy, stochastic (when ``delta`` is given) and distributed certificates from ``(m, L)``.

    ``order`` records over which sparsity levels ``m`` and ``L`` were
    measured; it is carried into the certificates verbatim.
    """
    ratio = gamma_lower_bound_rsc(m, L)
    note = f"m={m:.6g} L={L:.6g}" + (f" k={k}" if k is not None else "") + (f" order={order}" if order else "")
    certs = [make_certificate("greedy", ratio, opt_value=opt_value, note=note)]
    if delta is not None:
        certs.append(make_certificate("stochastic", ratio, delta=delta, opt_value=opt_value, note=note))
    certs.append(make_certificate("distributed", ratio, nu=nu_lower_bound_rsc(m, L),
                                  opt_value=opt_value, note=note))
    return certs


def load_labeled_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Features plus a final label column with values in {-1, +1}."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DomainError(f"{path}: ragged rows")
    labels = data[:, -1]
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise DomainError(f"{path}: final column must hold -1/+1 labels")
    return data[:, :-1], labels, [h.strip() for h in header[:-1]]

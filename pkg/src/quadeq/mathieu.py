"""The Mathieu function se_2(x, q) and its characteristic value b_2(q).

se_2(x, q) = sum_{m>=1} B_{2m} sin(2 m x) solves

    z'' + (a - 2 q cos 2x) z = 0      with a = b_2(q).

Substituting the series gives the three-term recurrences

    q B_4 = (b_2 - 4) B_2,
    q B_{2m+2} = (b_2 - 4 m^2) B_{2m} - q B_{2m-2},   m >= 2,

i.e. ``T c = b_2 c`` for the symmetric tridiagonal ``T`` with diagonal
``4 m^2`` and off-diagonal ``q``. b_2(q) is the smallest eigenvalue of ``T``
(at q = 0 the family reduces to sin 2x with eigenvalue 4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_M = 48
MAX_M = 192
MIN_M = 8
TAIL_TOL = 1e-13
EIG_TOL = 1e-14


class TruncationError(RuntimeError):
    """The sine series did not decay below TAIL_TOL within MAX_M terms."""


@dataclass(frozen=True)
class TridiagonalSpec:
    q: float
    M: int

    @property
    def diag(self) -> np.ndarray:
        m = np.arange(1, self.M + 1, dtype=float)
        return 4.0 * m * m

    @property
    def offdiag(self) -> np.ndarray:
        return np.full(self.M - 1, float(self.q))

    def dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                + np.diag(self.offdiag, -1))

    def matvec(self, c: np.ndarray) -> np.ndarray:
        out = self.diag * c
        out[:-1] += self.q * c[1:]
        out[1:] += self.q * c[:-1]
        return out

    def count_below(self, x: float) -> int:
        """Number of eigenvalues strictly less than ``x`` (Sturm count via LDL^T pivots)."""
        q2 = self.q * self.q
        count = 0
        pivot = 1.0
        tiny = 1e-300
        for m in range(1, self.M + 1):
            d = 4.0 * m * m - x
            pivot = d - (q2 / pivot if m > 1 else 0.0)
            if pivot == 0.0:
                pivot = -tiny
            if pivot < 0.0:
                count += 1
        return count

    def lowest_eigenvalue(self, tol: float = EIG_TOL) -> float:
        """Bisection on the Sturm count to absolute accuracy ``tol``."""
        hi = 4.0  # Rayleigh quotient at e_1
        lo = 4.0 - 2.0 * abs(self.q)  # Gershgorin
        if self.q == 0.0:
            return 4.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.count_below(mid) >= 1:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def eigenvector(self, lam: float, iterations: int = 3) -> np.ndarray:
        """Inverse iteration with a shift just below ``lam`` (keeps ``T - s I`` positive definite)."""
        shift = lam - 1e-9 * (1.0 + abs(lam))
        d = self.diag - shift
        e = self.q
        # LDL^T factorisation of the shifted matrix, reused across iterations
        piv = np.empty(self.M)
        piv[0] = d[0]
        for i in range(1, self.M):
            piv[i] = d[i] - e * e / piv[i - 1]
        c = np.ones(self.M) / math.sqrt(self.M)
        for _ in range(iterations):
            y = c.copy()
            for i in range(1, self.M):
                y[i] -= e / piv[i - 1] * y[i - 1]
            x = np.empty(self.M)
            x[-1] = y[-1] / piv[-1]
            for i in range(self.M - 2, -1, -1):
                x[i] = (y[i] - e * x[i + 1]) / piv[i]
            c = x / np.linalg.norm(x)
        if c[0] < 0:
            c = -c
        return c


@dataclass(frozen=True)
class SineSeries:
    """Truncated se_2 expansion: ``coeffs[m - 1]`` multiplies ``sin(2 m x)``."""

    q: float
    b2: float
    coeffs: np.ndarray

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def recurrence_residuals(self) -> np.ndarray:
        """Residuals of the defining recurrences, first entry for m = 1."""
        c, q, b = self.coeffs, self.q, self.b2
        m = np.arange(1, self.M, dtype=float)
        res = q * c[1:] - (b - 4.0 * m * m) * c[:-1]
        res[1:] += q * c[:-2]
        return res

    def __call__(self, x):
        return se2_eval(self, x)


def _check_args(M: int, tol: float):
    if M < MIN_M:
        raise ValueError(f"truncation order M must be >= {MIN_M}, got {M}")
    if not tol > 0:
        raise ValueError("tol must be positive")


def _solve(q: float, M: int, tol: float) -> SineSeries:
    _check_args(M, tol)
    q = float(q)
    while True:
        spec = TridiagonalSpec(q, M)
        lam = spec.lowest_eigenvalue(tol)
        c = spec.eigenvector(lam)
        if abs(c[-1]) <= TAIL_TOL:
            c.setflags(write=False)
            return SineSeries(q=q, b2=lam, coeffs=c)
        if M >= MAX_M:
            raise TruncationError(
                f"se_2 series for q={q} not resolved at M={M}: tail {abs(c[-1]):.3e}")
        M = min(2 * M, MAX_M)


def char_value_b2(q: float, M: int = DEFAULT_M, tol: float = EIG_TOL) -> float:
    """Characteristic value b_2(q), the smallest eigenvalue of the se_2 tridiagonal."""
    return _solve(q, M, tol).b2


def se2_coefficients(q: float, M: int = DEFAULT_M, tol: float = EIG_TOL) -> SineSeries:
    """Fourier sine coefficients of se_2(x, q) with unit l2 norm and positive first entry."""
    return _solve(q, M, tol)


def _harmonics(s: SineSeries, x):
    x = np.asarray(x, dtype=float)
    k = 2.0 * np.arange(1, s.M + 1, dtype=float)
    return k, np.sin(np.multiply.outer(x, k))


def se2_eval(s: SineSeries, x):
    _, sines = _harmonics(s, x)
    out = sines @ s.coeffs
    return float(out) if np.ndim(out) == 0 else out


def se2_eval_dd(s: SineSeries, x):
    """Second derivative of se_2 in x, summed termwise."""
    k, sines = _harmonics(s, x)
    out = sines @ (-(k * k) * s.coeffs)
    return float(out) if np.ndim(out) == 0 else out


def mathieu_ode_residual(s: SineSeries, a: float, x):
    x = np.asarray(x, dtype=float)
    out = se2_eval_dd(s, x) + (a - 2.0 * s.q * np.cos(2.0 * x)) * se2_eval(s, x)
    return float(out) if np.ndim(out) == 0 else out


class NoSignChange(ValueError):
    pass


def find_qstar(bracket_lo: float = 0.0, bracket_hi: float = 20.0, tol: float = 1e-10,
               M: int = DEFAULT_M, target: float = -1.0, maxiter: int = 200) -> float:
    """Locate q with b_2(q) = target inside a sign-changing bracket.

    Regula falsi with the Illinois damping, falling back to bisection if a
    step ever leaves the bracket. Monotonicity of b_2 is not assumed.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")

    def f(q: float) -> float:
        return char_value_b2(q, M) - target

    a, b = float(bracket_lo), float(bracket_hi)
    fa, fb = f(a), f(b)
    # an endpoint already on target (to tol) is accepted without a sign change
    if min(abs(fa), abs(fb)) <= tol:
        return a if abs(fa) <= abs(fb) else b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChange(
            f"b2 - ({target}) does not change sign on [{a}, {b}]: {fa:.3e}, {fb:.3e}")

    side = 0
    for _ in range(maxiter):
        c = b - fb * (b - a) / (fb - fa)
        if not min(a, b) < c < max(a, b):
            c = 0.5 * (a + b)
        fc = f(c)
        if abs(fc) <= tol or abs(b - a) < 4 * np.finfo(float).eps * max(1.0, abs(c)):
            return c
        # Illinois variant: damp the endpoint that survives twice in a row
        if math.copysign(1.0, fc) == math.copysign(1.0, fb):
            b, fb = c, fc
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = c, fc
            if side == 1:
                fb *= 0.5
            side = 1
    raise RuntimeError("find_qstar did not converge")

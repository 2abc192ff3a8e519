"""Two essentially different solutions of u * Laplace(u) = g on a square.

With se_2(x, q*) solving the Mathieu equation at a = b_2(q*) = -1,

    u(x, y) = se_2(x, q*) cos y,      v(x, y) = se_2(x, -q*) cos y

vanish on the boundary of D = (-pi/2, pi/2)^2 and satisfy
Laplace(u) + p u = 0, Laplace(v) - p v = 0 with p(x) = -2 q* cos 2x.
Hence u Laplace(v) + v Laplace(u) = 0, which makes u + v and u - v a pair with
the same right-hand side g although neither equals the other up to sign.
Everything is checked on a uniform grid, once through the exact series
Laplacian and once through the 5-point stencil.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .mathieu import DEFAULT_M, SineSeries, char_value_b2, se2_coefficients, se2_eval, se2_eval_dd
from .quadratic import QuadraticMap, collision_from_witness

DEFAULT_N = 129
DISTINCT_MIN = 0.05
A_CHAR = -1.0  # characteristic value used by the construction (lambda = mu = 1)


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Grid2D:
    """Uniform boundary-inclusive grid on [-pi/2, pi/2]^2."""

    n: int = DEFAULT_N

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(f"grid needs at least 5 points per axis, got {self.n}")

    @property
    def h(self) -> float:
        return math.pi / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        x = np.linspace(-math.pi / 2, math.pi / 2, self.n)
        x[0], x[-1] = -math.pi / 2, math.pi / 2
        return x

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays X, Y with ``X[i, j] = x_i`` and ``Y[i, j] = y_j``."""
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    def sample(self, f) -> "GridFunction2D":
        X, Y = self.mesh()
        return GridFunction2D(self, np.broadcast_to(f(X, Y), X.shape))


@dataclass(frozen=True)
class GridFunction2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n, self.grid.n):
            raise GridMismatch(f"values shape {vals.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def boundary(self) -> np.ndarray:
        v = self.values
        return np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])

    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class SeparableSolution:
    """``xpart(x) * cos y``, with xpart = se_2(., qsign * |q*|)."""

    xpart: SineSeries
    qsign: int = 1
    ysign: int = 1

    def sample(self, grid: Grid2D) -> GridFunction2D:
        X = se2_eval(self.xpart, grid.nodes)
        Y = self.ysign * np.cos(grid.nodes)
        return GridFunction2D(grid, np.outer(X, Y))


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    rms: float
    norm_L_u: float
    norm_L_v: float
    dist_minus: float
    dist_plus: float
    grid_n: int
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def p_profile(q: float, x):
    """Potential p(x) = -2 q cos 2x coupling the two separated equations."""
    out = -2.0 * q * np.cos(2.0 * np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def separable_pair(qstar: float, M: int = DEFAULT_M,
                   tol: float = 1e-9) -> tuple[SeparableSolution, SeparableSolution]:
    """The two separated factors at +q* and -q*, after re-deriving b_2(q*) = -1."""
    b2 = char_value_b2(qstar, M)
    if abs(b2 - A_CHAR) > tol:
        raise ValueError(f"b2({qstar}) = {b2!r} is not within {tol} of {A_CHAR}")
    plus = SeparableSolution(se2_coefficients(qstar, M), qsign=1)
    minus = SeparableSolution(se2_coefficients(-qstar, M), qsign=-1)
    return plus, minus


def assemble_pair(qstar: float, M: int = DEFAULT_M, grid: Grid2D | None = None,
                  tol: float = 1e-9) -> tuple[GridFunction2D, GridFunction2D]:
    grid = grid or Grid2D()
    plus, minus = separable_pair(qstar, M, tol)
    return plus.sample(grid), minus.sample(grid)


def analytic_laplacian(s: SeparableSolution, grid: Grid2D) -> GridFunction2D:
    """Laplacian of X(x) cos y, i.e. (X'' - X) cos y, from the series."""
    x = grid.nodes
    X = se2_eval(s.xpart, x)
    Xdd = se2_eval_dd(s.xpart, x)
    return GridFunction2D(grid, np.outer(Xdd - X, s.ysign * np.cos(x)))


def fd_laplacian(f: GridFunction2D) -> GridFunction2D:
    """5-point Laplacian on interior nodes; boundary nodes are set to 0."""
    v = f.values
    h = f.grid.h
    out = np.zeros_like(v)
    out[1:-1, 1:-1] = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2]
                       - 4.0 * v[1:-1, 1:-1]) / (h * h)
    return GridFunction2D(f.grid, out)


def norm_L(f: GridFunction2D) -> float:
    """sup |f| over all nodes plus sup |grad f| (central differences) over interior nodes."""
    if f.grid.n < 3:
        raise ValueError("norm_L needs at least 3 points per axis")
    v = f.values
    h = f.grid.h
    fx = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * h)
    fy = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * h)
    grad = np.sqrt(fx * fx + fy * fy)
    return float(np.max(np.abs(v)) + np.max(grad))


def _check_grids(*fs: GridFunction2D):
    n = fs[0].grid.n
    if any(f.grid.n != n for f in fs):
        raise GridMismatch("grid functions live on different grids")


def _report(residual: np.ndarray, u: GridFunction2D, v: GridFunction2D, tol: float,
            require_distinct: bool) -> ResidualReport:
    r = np.abs(residual).ravel()
    max_abs = float(r.max()) if r.size else 0.0
    # fixed serial order for the sum keeps the output byte-stable
    rms = math.sqrt(math.fsum(float(x) * float(x) for x in r) / r.size) if r.size else 0.0
    dist_minus = float(np.max(np.abs(u.values - v.values)))
    dist_plus = float(np.max(np.abs(u.values + v.values)))
    passed = max_abs <= tol
    if require_distinct:
        passed = passed and min(dist_minus, dist_plus) >= DISTINCT_MIN
    return ResidualReport(
        max_abs=max_abs, rms=rms, norm_L_u=norm_L(u), norm_L_v=norm_L(v),
        dist_minus=dist_minus, dist_plus=dist_plus, grid_n=u.grid.n,
        tol=float(tol), passed=bool(passed),
    )


def verify_bilinear_annihilation(u: GridFunction2D, v: GridFunction2D, lap_u: GridFunction2D,
                                 lap_v: GridFunction2D, tol: float = 1e-8) -> ResidualReport:
    """Max/RMS of |u Lap(v) + v Lap(u)| over interior nodes."""
    _check_grids(u, v, lap_u, lap_v)
    res = u.interior() * lap_v.interior() + v.interior() * lap_u.interior()
    return _report(res, u, v, tol, require_distinct=False)


def verify_equal_rhs(u: GridFunction2D, v: GridFunction2D, lap_u: GridFunction2D,
                     lap_v: GridFunction2D, tol: float = 1e-8) -> ResidualReport:
    """Max/RMS of |u Lap(u) - v Lap(v)| over interior nodes, plus the distinctness gate."""
    _check_grids(u, v, lap_u, lap_v)
    res = u.interior() * lap_u.interior() - v.interior() * lap_v.interior()
    return _report(res, u, v, tol, require_distinct=True)


@dataclass(frozen=True)
class Counterexample:
    """Everything needed to check the equal-right-hand-side pair on one grid.

    ``u`` and ``v`` here are the two separated products themselves (B-orthogonal);
    ``collision`` gives ``(u + v, u - v)``, the two inputs with equal g.
    """

    qstar: float
    grid: Grid2D
    plus: SeparableSolution
    minus: SeparableSolution
    u: GridFunction2D
    v: GridFunction2D
    lap_u: GridFunction2D
    lap_v: GridFunction2D

    def collision(self, fd: bool = False):
        """``(a, b, Lap a, Lap b)`` for the equal-g pair ``a = u + v``, ``b = u - v``."""
        shape = self.u.values.shape
        a, b = collision_from_witness(self.u.values.ravel(), self.v.values.ravel())
        a = GridFunction2D(self.grid, a.reshape(shape))
        b = GridFunction2D(self.grid, b.reshape(shape))
        if fd:
            return a, b, fd_laplacian(a), fd_laplacian(b)
        # the Laplacian is linear, so the exact one carries over termwise
        return (a, b, GridFunction2D(self.grid, self.lap_u.values + self.lap_v.values),
                GridFunction2D(self.grid, self.lap_u.values - self.lap_v.values))


def build(qstar: float, M: int = DEFAULT_M, n: int = DEFAULT_N, tol: float = 1e-9) -> Counterexample:
    grid = Grid2D(n)
    plus, minus = separable_pair(qstar, M, tol)
    return Counterexample(
        qstar=qstar, grid=grid, plus=plus, minus=minus,
        u=plus.sample(grid), v=minus.sample(grid),
        lap_u=analytic_laplacian(plus, grid), lap_v=analytic_laplacian(minus, grid),
    )


def discrete_quadratic(grid: Grid2D):
    """Q(w) = w * Lap_h(w) on interior nodes, acting on flattened grid vectors."""

    def rule(w: np.ndarray) -> np.ndarray:
        f = GridFunction2D(grid, w.reshape(grid.n, grid.n))
        return (f.interior() * fd_laplacian(f).interior()).ravel()

    return QuadraticMap.opaque(rule, domain_dim=grid.n * grid.n)

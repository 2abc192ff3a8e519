"""Quadratic operators on R^n and their symmetric bilinear forms.

A quadratic map Q: R^n -> R^n' is either *derived* from a symmetric bilinear
map B (Q(u) = B(u, u)) or *opaque*, an arbitrary rule used to exercise the
identity residuals with maps that are not quadratic at all.

Vectors are plain 1-D float ``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize

ROUNDOFF = 1e-12

Bilinear = Union["BilinearMap", Callable[[np.ndarray, np.ndarray], np.ndarray]]


class DimensionError(ValueError):
    pass


def as_vector(u, dim: int | None = None) -> np.ndarray:
    """Coerce ``u`` to a finite 1-D float array, optionally of length ``dim``."""
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.size}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BilinearMap:
    """Symmetric bilinear map stored as a tensor of shape ``(n, n, n')``.

    ``B(u, v)[k] = sum_ij u[i] v[j] tensor[i, j, k]``.
    """

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        if t.ndim == 2:
            t = t[:, :, None]
        if t.ndim != 3 or t.shape[0] != t.shape[1] or t.size == 0:
            raise DimensionError(f"tensor must have shape (n, n, n'), got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("tensor coefficients must be finite")
        scale = max(float(np.max(np.abs(t))), 1.0)
        if not np.allclose(t, t.transpose(1, 0, 2), rtol=0.0, atol=ROUNDOFF * scale):
            raise ValueError("tensor is not symmetric in its first two indices")
        object.__setattr__(self, "tensor", _frozen(t))

    @classmethod
    def from_matrix(cls, matrix) -> "BilinearMap":
        """Scalar-valued form ``u^T A v`` for a symmetric matrix ``A``."""
        return cls(np.asarray(matrix, dtype=float)[:, :, None])

    @property
    def dims(self) -> tuple[int, int]:
        return self.tensor.shape[0], self.tensor.shape[2]

    def __call__(self, u, v) -> np.ndarray:
        n = self.dims[0]
        u = as_vector(u, n)
        v = as_vector(v, n)
        return np.einsum("i,j,ijk->k", u, v, self.tensor)

    def partial(self, u) -> np.ndarray:
        """Matrix of the linear map ``v -> B(u, v)``, shape ``(n', n)``."""
        u = as_vector(u, self.dims[0])
        return np.einsum("i,ijk->kj", u, self.tensor)

    def norm_estimate(self) -> float:
        """Frobenius norm of the tensor, an upper bound on the operator norm."""
        return float(np.linalg.norm(self.tensor))


@dataclass(frozen=True)
class QuadraticMap:
    """A map R^n -> R^n', derived from a BilinearMap or given by an opaque rule."""

    domain_dim: int
    bilinear: BilinearMap | None = None
    rule: Callable[[np.ndarray], object] | None = field(default=None, compare=False)

    def __post_init__(self):
        if (self.bilinear is None) == (self.rule is None):
            raise ValueError("give exactly one of bilinear or rule")
        if self.bilinear is not None and self.bilinear.dims[0] != self.domain_dim:
            raise DimensionError("domain_dim disagrees with the bilinear map")

    @classmethod
    def opaque(cls, rule: Callable[[np.ndarray], object], domain_dim: int = 1) -> "QuadraticMap":
        return cls(domain_dim=domain_dim, rule=rule)

    @property
    def derived(self) -> bool:
        return self.bilinear is not None

    def __call__(self, u) -> np.ndarray:
        u = as_vector(u, self.domain_dim)
        if self.bilinear is not None:
            return self.bilinear(u, u)
        return np.atleast_1d(np.asarray(self.rule(u), dtype=float))


def quadratic_from_bilinear(B: BilinearMap) -> QuadraticMap:
    if not isinstance(B, BilinearMap):
        B = BilinearMap(B)
    return QuadraticMap(domain_dim=B.dims[0], bilinear=B)


def _pair(Q: QuadraticMap, *vectors):
    return [as_vector(x, Q.domain_dim) for x in vectors]


def polarize(Q: QuadraticMap, u, v) -> np.ndarray:
    """Recover the bilinear form: ``(Q(u + v) - Q(u - v)) / 4``."""
    u, v = _pair(Q, u, v)
    return 0.25 * (Q(u + v) - Q(u - v))


def polarized(Q: QuadraticMap) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """The bilinear candidate obtained from ``Q`` by polarization, as a callable."""
    return lambda u, v: polarize(Q, u, v)


def parallelogram_residual(Q: QuadraticMap, u, v) -> np.ndarray:
    u, v = _pair(Q, u, v)
    return Q(u + v) + Q(u - v) - 2.0 * Q(u) - 2.0 * Q(v)


def homogeneity_residual(Q: QuadraticMap, k: float, u) -> np.ndarray:
    if not np.isfinite(k):
        raise ValueError("k must be finite")
    (u,) = _pair(Q, u)
    return Q(k * u) - k * k * Q(u)


def additivity_residual_F(B: Bilinear, u, v, w) -> np.ndarray:
    """``4 (B(u + v, w) - B(u, w) - B(v, w))``; zero when B is additive in its first slot."""
    u, v, w = (as_vector(x) for x in (u, v, w))
    if not (u.size == v.size == w.size):
        raise DimensionError("u, v, w must share a dimension")
    return 4.0 * (np.asarray(B(u + v, w)) - B(u, w) - B(v, w))


def additivity_residual_F_expanded(Q: QuadraticMap, u, v, w) -> np.ndarray:
    """The same residual written with Q only, for B obtained by polarizing Q."""
    u, v, w = _pair(Q, u, v, w)
    return (Q(u + v + w) - Q(u + v - w) - Q(u + w) + Q(u - w)
            - Q(v + w) + Q(v - w))


def scalar_residual_f(B: Bilinear, k: float, u, v) -> np.ndarray:
    """``B(k u, v) - k B(u, v)``; zero when B is homogeneous in its first slot."""
    if not np.isfinite(k):
        raise ValueError("k must be finite")
    u, v = as_vector(u), as_vector(v)
    if u.size != v.size:
        raise DimensionError("u and v must share a dimension")
    return np.asarray(B(k * u, v)) - k * np.asarray(B(u, v))


def scalar_residual_f_expanded(Q: QuadraticMap, k: float, u, v) -> np.ndarray:
    """:func:`scalar_residual_f` for the polarization of ``Q``, written with Q only."""
    if not np.isfinite(k):
        raise ValueError("k must be finite")
    u, v = _pair(Q, u, v)
    return 0.25 * (Q(k * u + v) - Q(k * u - v)) - 0.25 * k * (Q(u + v) - Q(u - v))


def residual_scale(*norms: float) -> float:
    """Tolerance for "zero to roundoff": ROUNDOFF times the product of the given norms."""
    scale = 1.0
    for x in norms:
        scale *= max(float(x), 1.0)
    return ROUNDOFF * scale


# -- nondegeneracy -----------------------------------------------------------

NONDEGENERATE = "Nondegenerate"
DEGENERATE_WITNESS = "DegenerateWitness"


@dataclass(frozen=True)
class ProbeConfidence:
    trials: int
    evaluations: int
    min_gap: float


@dataclass(frozen=True)
class ProbeVerdict:
    kind: str
    witness: tuple[np.ndarray, np.ndarray] | None
    confidence: ProbeConfidence

    @property
    def degenerate(self) -> bool:
        return self.kind == DEGENERATE_WITNESS


def _smallest_singular(B: BilinearMap, u: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest singular value of ``v -> B(u, v)`` and a unit right singular vector."""
    mat = B.partial(u)
    _, s, vt = np.linalg.svd(mat, full_matrices=True)
    n = mat.shape[1]
    sigma = 0.0 if s.size < n else float(s[-1])
    v = vt[-1]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return sigma, v


def nondegeneracy_probe(B: BilinearMap, trials: int = 16, tol: float = 1e-10,
                        seed: int = 0) -> ProbeVerdict:
    """Search the unit sphere for u with a nonzero v such that B(u, v) = 0.

    Starts from the coordinate basis vectors, then from seeded random
    directions; each start is refined by Nelder-Mead on the smallest singular
    value of ``v -> B(u, v)``. The first start reaching ``tol`` wins and yields a
    certified witness. A ``Nondegenerate`` verdict only means nothing was found.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = B.dims[0]
    rng = np.random.default_rng(seed)
    evaluations = 0
    best = np.inf

    def gap(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return np.inf
        return _smallest_singular(B, x / nrm)[0]

    for t in range(trials):
        if t < n:
            start = np.eye(n)[t]
        else:
            start = rng.standard_normal(n)
        candidates = [start]
        g0 = gap(start)
        if g0 > tol:
            res = minimize(gap, start, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": tol * 1e-2, "maxiter": 400 * n})
            candidates.append(res.x)
        for x in candidates:
            u = x / np.linalg.norm(x)
            sigma, v = _smallest_singular(B, u)
            residual = float(np.linalg.norm(B(u, v)))
            best = min(best, residual)
            if residual <= tol:
                return ProbeVerdict(DEGENERATE_WITNESS, (u, v),
                                    ProbeConfidence(t + 1, evaluations, residual))
    return ProbeVerdict(NONDEGENERATE, None, ProbeConfidence(trials, evaluations, float(best)))


def collision_from_witness(u, v) -> tuple[np.ndarray, np.ndarray]:
    """Turn a B-orthogonal pair into two inputs with equal Q: ``(u + v, u - v)``."""
    u, v = as_vector(u), as_vector(v)
    if u.size != v.size:
        raise DimensionError("u and v must share a dimension")
    if not np.any(u) or not np.any(v):
        raise ValueError("witness vectors must be nonzero")
    return u + v, u - v


def witness_from_collision(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`collision_from_witness`: ``((a + b) / 2, (a - b) / 2)``."""
    a, b = as_vector(a), as_vector(b)
    if a.size != b.size:
        raise DimensionError("a and b must share a dimension")
    U = 0.5 * (a + b)
    V = 0.5 * (a - b)
    if not np.any(U) or not np.any(V):
        raise ValueError("a = b or a = -b; the witness would vanish")
    return U, V

"""Closed convex cones: exact projections, dual projections, derivative elements.

Every cone lives in a flat real coordinate space of dimension ``ambient_dim``.
The positive semidefinite cone is represented through scaled symmetric
vectorization (off-diagonal entries multiplied by sqrt(2)), so the Euclidean
inner product of coordinate vectors equals the trace inner product of the
underlying symmetric matrices and a single vector type serves every cone.

Each cone also selects one concrete element of the generalized derivative of
its projection map at any point, with deterministic tie rules at kinks:

* orthant: a coordinate is active iff it is strictly positive;
* second-order cone: interior/polar branches use strict inequalities, the
  boundary branch applies whenever the tail is nonzero, and the origin maps
  to the identity;
* semidefinite cone: zero eigenvalues count as nonpositive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionMismatchError

_SQRT2 = float(np.sqrt(2.0))


def svec(matrix: np.ndarray) -> np.ndarray:
    """Scaled upper-triangular vectorization of a symmetric matrix.

    Off-diagonal entries are multiplied by sqrt(2) so that
    ``svec(A) @ svec(B) == trace(A @ B)`` for symmetric A, B.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise DimensionMismatchError(f"expected a square matrix, got {matrix.shape}")
    rows, cols = np.triu_indices(n)
    out = matrix[rows, cols].copy()
    out[rows != cols] *= _SQRT2
    return out


def smat(vector: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`."""
    vector = np.asarray(vector, dtype=float)
    m = vector.shape[0]
    n = int(round((np.sqrt(8.0 * m + 1.0) - 1.0) / 2.0))
    if n * (n + 1) // 2 != m:
        raise DimensionMismatchError(f"length {m} is not a triangular number")
    rows, cols = np.triu_indices(n)
    vals = vector.copy()
    vals[rows != cols] /= _SQRT2
    out = np.zeros((n, n))
    out[rows, cols] = vals
    out[cols, rows] = vals
    return out


def matrix_order_from_ambient(ambient_dim: int) -> int:
    """Matrix order n such that n*(n+1)/2 == ambient_dim."""
    n = int(round((np.sqrt(8.0 * ambient_dim + 1.0) - 1.0) / 2.0))
    if n * (n + 1) // 2 != ambient_dim:
        raise DimensionMismatchError(f"{ambient_dim} is not a triangular number")
    return n


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending."""

    eigvals: np.ndarray
    eigvecs: np.ndarray  # columns aligned with eigvals

    def reconstruct(self) -> np.ndarray:
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T


def spectral_decomposition(matrix: np.ndarray) -> SpectralDecomposition:
    vals, vecs = np.linalg.eigh(matrix)
    return SpectralDecomposition(vals[::-1].copy(), vecs[:, ::-1].copy())


class JacobianElement:
    """One element of the generalized derivative of a cone projection.

    ``pattern_key`` is a hashable signature of the selection branch that
    produced the element (orthant activity set, second-order cone region,
    eigenvalue sign pattern).  Two elements with equal keys came from the
    same branch, which is what the repeat-pattern stopping rule compares.
    """

    def __init__(
        self,
        cone: "Cone",
        pattern_key,
        matrix: np.ndarray | None = None,
        apply_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        if matrix is None and apply_fn is None:
            raise ValueError("need a matrix or an apply function")
        self.cone = cone
        self.pattern_key = pattern_key
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self._apply_fn = apply_fn

    def apply(self, vector: np.ndarray) -> np.ndarray:
        vector = self.cone._checked(vector)
        if self._matrix is not None:
            return self._matrix @ vector
        return self._apply_fn(vector)

    def materialize(self) -> np.ndarray:
        """Dense ambient_dim x ambient_dim matrix of the element (cached)."""
        if self._matrix is None:
            d = self.cone.ambient_dim
            out = np.empty((d, d))
            basis = np.zeros(d)
            for k in range(d):
                basis[k] = 1.0
                out[:, k] = self._apply_fn(basis)
                basis[k] = 0.0
            self._matrix = out
        return self._matrix


class Cone:
    """Base class for closed convex cones over flat coordinates."""

    @property
    def ambient_dim(self) -> int:
        raise NotImplementedError

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest point of the cone in the Euclidean coordinate norm."""
        raise NotImplementedError

    def jacobian_element(self, x: np.ndarray) -> JacobianElement:
        """Deterministically selected generalized-derivative element at x."""
        raise NotImplementedError

    def project_dual(self, x: np.ndarray) -> np.ndarray:
        """Projection onto the dual cone.

        Uses the Moreau identity P_dual(x) = x + P(-x), valid for every
        closed convex cone, so no per-cone case analysis is needed.
        """
        x = self._checked(x)
        return x + self.project(-x)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        """Membership test: distance to the cone within tol*(1 + |x|)."""
        x = self._checked(x)
        gap = np.linalg.norm(x - self.project(x))
        return bool(gap <= tol * (1.0 + np.linalg.norm(x)))

    def _checked(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"{self!r} expects vectors of length {self.ambient_dim}, "
                f"got shape {x.shape}"
            )
        return x


@dataclass(frozen=True)
class Orthant(Cone):
    """Nonnegative orthant in R^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("orthant needs dimension >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.n

    def project(self, x):
        x = self._checked(x)
        return np.maximum(x, 0.0)

    def jacobian_element(self, x):
        x = self._checked(x)
        active = x > 0.0
        return JacobianElement(
            self, pattern_key=("orthant", tuple(bool(a) for a in active)),
            matrix=np.diag(active.astype(float)),
        )


@dataclass(frozen=True)
class SecondOrder(Cone):
    """Second-order (Lorentz) cone {(t, u) in R^n : |u| <= t}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("second-order cone needs dimension >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.n

    def project(self, x):
        x = self._checked(x)
        head, tail = x[0], x[1:]
        tail_norm = np.linalg.norm(tail)
        if tail_norm <= head:
            return x.copy()
        if tail_norm <= -head:
            return np.zeros_like(x)
        scale = (head + tail_norm) / 2.0
        out = np.empty_like(x)
        out[0] = scale
        out[1:] = (scale / tail_norm) * tail
        return out

    def jacobian_element(self, x):
        x = self._checked(x)
        head, tail = x[0], x[1:]
        tail_norm = np.linalg.norm(tail)
        if tail_norm < head:
            return JacobianElement(
                self, ("soc", "interior"), matrix=np.eye(self.n)
            )
        if tail_norm < -head:
            return JacobianElement(
                self, ("soc", "polar"), matrix=np.zeros((self.n, self.n))
            )
        if tail_norm == 0.0:
            # origin: identity is a valid limit element from the interior
            return JacobianElement(self, ("soc", "interior"), matrix=np.eye(self.n))
        w = tail / tail_norm
        block = ((head + tail_norm) / tail_norm) * np.eye(self.n - 1)
        block -= (head / tail_norm) * np.outer(w, w)
        mat = np.empty((self.n, self.n))
        mat[0, 0] = 1.0
        mat[0, 1:] = w
        mat[1:, 0] = w
        mat[1:, 1:] = block
        return JacobianElement(self, ("soc", "boundary"), matrix=0.5 * mat)


@dataclass(frozen=True)
class PsdCone(Cone):
    """Positive semidefinite n x n matrices in scaled-vectorized coordinates."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("semidefinite cone needs matrix order >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.n * (self.n + 1) // 2

    def project(self, x):
        x = self._checked(x)
        dec = spectral_decomposition(smat(x))
        clipped = np.maximum(dec.eigvals, 0.0)
        mat = (dec.eigvecs * clipped) @ dec.eigvecs.T
        return svec(0.5 * (mat + mat.T))

    def jacobian_element(self, x):
        x = self._checked(x)
        dec = spectral_decomposition(smat(x))
        lam = dec.eigvals
        u = dec.eigvecs
        omega = _psd_omega(lam)
        signs = tuple(1 if v > 0.0 else -1 for v in lam)

        def apply_fn(vector):
            h = smat(vector)
            inner = u.T @ h @ u
            out = u @ (omega * inner) @ u.T
            return svec(0.5 * (out + out.T))

        return JacobianElement(self, ("psd", signs), apply_fn=apply_fn)


def _psd_omega(lam: np.ndarray) -> np.ndarray:
    """Scaling matrix for the semidefinite projection derivative.

    Entries: 1 where both eigenvalues are positive, 0 where both are
    nonpositive, lam_i / (lam_i - lam_j) across the sign split.
    """
    pos = lam > 0.0
    n = lam.shape[0]
    omega = np.zeros((n, n))
    omega[np.ix_(pos, pos)] = 1.0
    neg = ~pos
    if pos.any() and neg.any():
        lp = lam[pos]
        ln = lam[neg]
        cross = lp[:, None] / (lp[:, None] - ln[None, :])
        omega[np.ix_(pos, neg)] = cross
        omega[np.ix_(neg, pos)] = cross.T
    return omega


@dataclass(frozen=True)
class FreeSpace(Cone):
    """Whole space R^n; projects as the identity, dual cone is {0}."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("free block needs dimension >= 1")

    @property
    def ambient_dim(self) -> int:
        return self.n

    def project(self, x):
        return self._checked(x).copy()

    def jacobian_element(self, x):
        self._checked(x)
        return JacobianElement(self, ("free",), matrix=np.eye(self.n))


@dataclass(frozen=True)
class Product(Cone):
    """Cartesian product of cones over concatenated coordinates."""

    parts: tuple[Cone, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("product cone needs at least one factor")

    @property
    def ambient_dim(self) -> int:
        return sum(p.ambient_dim for p in self.parts)

    def _offsets(self):
        sizes = [p.ambient_dim for p in self.parts]
        return np.concatenate([[0], np.cumsum(sizes)])

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        x = self._checked(x)
        off = self._offsets()
        return [x[off[i]:off[i + 1]] for i in range(len(self.parts))]

    def project(self, x):
        return np.concatenate(
            [p.project(piece) for p, piece in zip(self.parts, self.split(x))]
        )

    def jacobian_element(self, x):
        elements = [
            p.jacobian_element(piece) for p, piece in zip(self.parts, self.split(x))
        ]
        off = self._offsets()

        def apply_fn(vector):
            return np.concatenate(
                [
                    el.apply(vector[off[i]:off[i + 1]])
                    for i, el in enumerate(elements)
                ]
            )

        key = ("product", tuple(el.pattern_key for el in elements))
        return JacobianElement(self, key, apply_fn=apply_fn)


def project(cone: Cone, x: np.ndarray) -> np.ndarray:
    return cone.project(x)


def project_dual(cone: Cone, x: np.ndarray) -> np.ndarray:
    return cone.project_dual(x)


def jacobian_element(cone: Cone, x: np.ndarray) -> JacobianElement:
    return cone.jacobian_element(x)


def membership(cone: Cone, x: np.ndarray, tol: float = 1e-9) -> bool:
    return cone.contains(x, tol)

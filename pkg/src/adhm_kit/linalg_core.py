"""Toleranced dense complex linear algebra.

Matrices are plain ``complex128`` numpy arrays. Subspaces carry an
orthonormal basis so that sums, intersections and equality tests stay
well conditioned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "as_matrix",
    "numeric_rank",
    "nullspace",
    "column_span",
    "subspace_sum",
    "subspace_intersection",
    "orth_complement",
    "image",
    "preimage",
    "subspace_ops",
    "same_subspace",
    "hermitian_exp",
    "hermitian_part",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class Tolerance:
    """Singular values ``s`` count as nonzero when ``s > rel * s_max + abs``."""

    rel: float = 1e-9
    abs: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.rel < 1.0:
            raise ValueError(f"rel must lie in (0, 1), got {self.rel}")
        if self.abs < 0.0:
            raise ValueError(f"abs must be >= 0, got {self.abs}")

    def cutoff(self, smax: float) -> float:
        return self.rel * smax + self.abs


DEFAULT_TOL = Tolerance()


def as_matrix(M, rows=None, cols=None) -> np.ndarray:
    """Coerce to a finite 2-d complex array, optionally checking the shape."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if rows is not None and A.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {A.shape[0]}")
    if cols is not None and A.shape[1] != cols:
        raise ValueError(f"expected {cols} columns, got {A.shape[1]}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^n given by an orthonormal basis stored column-wise."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", B)
        if B.shape[1] > self.ambient_dim:
            raise ValueError("more basis vectors than the ambient dimension")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n, dtype=complex))

    @classmethod
    def span(cls, vectors, tol: Tolerance = DEFAULT_TOL) -> "Subspace":
        """Span of the columns of ``vectors``."""
        return column_span(vectors, tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, vectors, atol: float = 1e-8) -> bool:
        """True when every column of ``vectors`` lies in the subspace."""
        V = np.asarray(vectors, dtype=complex).reshape(self.ambient_dim, -1)
        if V.shape[1] == 0:
            return True
        resid = V - self.basis @ (self.basis.conj().T @ V)
        scale = max(1.0, float(np.linalg.norm(V)))
        return float(np.linalg.norm(resid)) <= atol * scale

    def is_orthonormal(self, atol: float = 1e-12) -> bool:
        G = self.basis.conj().T @ self.basis
        return bool(np.allclose(G, np.eye(self.dim), atol=atol, rtol=0.0))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _svd(M):
    if M.size == 0:
        return (
            np.zeros((M.shape[0], 0), dtype=complex),
            np.zeros(0),
            np.zeros((0, M.shape[1]), dtype=complex),
        )
    return np.linalg.svd(M, full_matrices=True)


def _rank_from_sv(s, tol):
    if s.size == 0:
        return 0
    return int(np.count_nonzero(s > tol.cutoff(float(s[0]))))


def numeric_rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol.rel * s_max + tol.abs``."""
    A = as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return _rank_from_sv(s, tol)


def nullspace(M, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the right kernel of ``M``."""
    A = as_matrix(M)
    n = A.shape[1]
    if A.shape[0] == 0:
        return Subspace.full(n)
    _, s, Vh = _svd(A)
    rank = _rank_from_sv(s, tol)
    return Subspace(n, Vh[rank:].conj().T)


def column_span(M, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the column space of ``M``."""
    A = as_matrix(M)
    n = A.shape[0]
    if A.shape[1] == 0:
        return Subspace.zero(n)
    U, s, _ = _svd(A)
    rank = _rank_from_sv(s, tol)
    return Subspace(n, U[:, :rank])


def _check_same_ambient(A: Subspace, B: Subspace):
    if A.ambient_dim != B.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {A.ambient_dim} vs {B.ambient_dim}"
        )


def subspace_sum(A: Subspace, B: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    _check_same_ambient(A, B)
    return column_span(np.hstack([A.basis, B.basis]), tol)


def orth_complement(A: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    n = A.ambient_dim
    if A.dim == 0:
        return Subspace.full(n)
    U, _, _ = np.linalg.svd(A.basis, full_matrices=True)
    return Subspace(n, U[:, A.dim:])


def subspace_intersection(
    A: Subspace, B: Subspace, tol: Tolerance = DEFAULT_TOL
) -> Subspace:
    _check_same_ambient(A, B)
    # x in A and B  <=>  x is killed by the projections onto both complements
    Ac = orth_complement(A, tol).basis.conj().T
    Bc = orth_complement(B, tol).basis.conj().T
    return nullspace(np.vstack([Ac, Bc]), tol)


def image(M, A: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """``M(A)``."""
    M = as_matrix(M)
    if M.shape[1] != A.ambient_dim:
        raise ValueError(
            f"map with {M.shape[1]} columns cannot act on C^{A.ambient_dim}"
        )
    return column_span(M @ A.basis, tol)


def preimage(M, B: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """``{x : M x in B}``."""
    M = as_matrix(M)
    if M.shape[0] != B.ambient_dim:
        raise ValueError(
            f"map with {M.shape[0]} rows cannot land in C^{B.ambient_dim}"
        )
    Bc = orth_complement(B, tol).basis
    return nullspace(Bc.conj().T @ M, tol)


def subspace_ops(A: Subspace, B: Subspace | None, kind: str, tol: Tolerance = DEFAULT_TOL, M=None) -> Subspace:
    """Dispatch on ``kind`` in {sum, intersection, preimage, image, orth_complement}.

    ``preimage`` pulls back ``B`` (or ``A`` when ``B`` is None) through ``M``;
    ``image`` pushes ``A`` forward.
    """
    if kind == "sum":
        return subspace_sum(A, B, tol)
    if kind == "intersection":
        return subspace_intersection(A, B, tol)
    if kind == "preimage":
        return preimage(M, A if B is None else B, tol)
    if kind == "image":
        return image(M, A, tol)
    if kind == "orth_complement":
        return orth_complement(A, tol)
    raise ValueError(f"unknown subspace operation {kind!r}")


def same_subspace(A: Subspace, B: Subspace, atol: float = 1e-8) -> bool:
    """Equality test via the largest principal angle."""
    _check_same_ambient(A, B)
    if A.dim != B.dim:
        return False
    if A.dim == 0:
        return True
    # sine of the largest angle; arccos of the cosine loses half the digits
    resid = B.basis - A.basis @ (A.basis.conj().T @ B.basis)
    sin_max = min(1.0, float(np.linalg.norm(resid, 2)))
    return float(np.arcsin(sin_max)) < atol


def hermitian_part(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + M.conj().T)


def hermitian_exp(H, atol: float = 1e-12) -> np.ndarray:
    """exp(H) for Hermitian ``H`` via a unitary eigendecomposition."""
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise ValueError("hermitian_exp needs a square matrix")
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(H - H.conj().T) > atol * scale:
        raise ValueError("hermitian_exp called on a non-Hermitian matrix")
    w, U = np.linalg.eigh(hermitian_part(H))
    return (U * np.exp(w)) @ U.conj().T


def matrix_to_json(M) -> dict:
    A = np.asarray(M, dtype=complex)
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "re": A.real.ravel().tolist(),
        "im": A.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("entry count does not match rows * cols")
    return as_matrix((re + 1j * im).reshape(rows, cols))

"""Monad data for the reversed-orientation projective plane.

A datum is ``(a1, a2, d, b, c)`` with ``a_i: W1 -> W0``, ``d: W0 -> W1``,
``b: C^r -> W0`` and ``c: W1 -> C^r``; both ``W0`` and ``W1`` are ``C^k``
with their standard hermitian bases. The complex equation is
``a1 d a2 - a2 d a1 + b c = 0`` together with surjectivity of ``(a1 a2 b)``.
The pair of moment maps ``(mu0, mu1)`` is evaluated at level ``(0, zeta)``.

The paired non-degeneracy conditions are decided with the inequality form
``dim V0' <= dim V1'`` (resp. ``dim V0 <= dim V1``); witnesses are always
returned with equal dimensions.

Duality used for C2': taking orthogonal complements ``U0 = V0^perp``,
``U1 = V1^perp`` turns a C2' violation of ``(a1, a2, d, b, c)`` into a C1'
violation of the adjoint datum ``(a1*, a2*, d*, c*, b*)`` with ``(U1, U0)``
as the pair, because ``V1 <= ker c`` iff ``im c* <= U1``, ``a_i V1 <= V0``
iff ``a_i* U0 <= U1`` and ``d V0 <= V1`` iff ``d* U1 <= U0``. The dimension
inequality is preserved and "nonzero" becomes "proper".
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adhm_s4 import AdhmDatumS4, CheckResult, Verdict, _checked_inverse, _realify, unitary_lie_basis
from .linalg_core import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    column_span,
    hermitian_part,
    image,
    matrix_from_json,
    matrix_to_json,
    nullspace,
    numeric_rank,
    orth_complement,
    preimage,
    subspace_intersection,
    subspace_sum,
)

__all__ = [
    "MonadDatumP2",
    "LevelP2",
    "integrability_residual_p2",
    "surjectivity_check",
    "moment_p2",
    "act_p2",
    "combined_identity_residual",
    "combined_identity_rhs",
    "max_rank_margins",
    "check_c1p",
    "check_c2p",
    "stabilizer_dim_p2",
    "p_map",
    "witness_is_valid_c1p",
    "witness_is_valid_c2p",
    "ENLARGEMENT_BUDGET",
]

ENLARGEMENT_BUDGET = 50


@dataclass(frozen=True)
class LevelP2:
    zeta: float

    def __post_init__(self):
        if not abs(self.zeta) < 1.0:
            raise ValueError(f"|zeta| must be < 1, got {self.zeta}")


@dataclass(frozen=True, eq=False)
class MonadDatumP2:
    a1: np.ndarray
    a2: np.ndarray
    d: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a1 = as_matrix(self.a1)
        k = a1.shape[0]
        a1 = as_matrix(a1, k, k)
        a2 = as_matrix(self.a2, k, k)
        d = as_matrix(self.d, k, k)
        b = as_matrix(self.b, k)
        r = b.shape[1]
        c = as_matrix(self.c, r, k)
        for name, val in zip(("a1", "a2", "d", "b", "c"), (a1, a2, d, b, c)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def k(self) -> int:
        return self.a1.shape[0]

    @property
    def r(self) -> int:
        return self.b.shape[1]

    @classmethod
    def zeros(cls, k: int, r: int) -> "MonadDatumP2":
        z = np.zeros
        return cls(z((k, k)), z((k, k)), z((k, k)), z((k, r)), z((r, k)))

    def parts(self):
        return (self.a1, self.a2, self.d, self.b, self.c)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(x) ** 2 for x in self.parts())))

    def adjoint(self) -> "MonadDatumP2":
        """``(a1*, a2*, d*, c*, b*)``, the roles of W0 and W1 swapped."""
        H = lambda x: x.conj().T  # noqa: E731
        return MonadDatumP2(H(self.a1), H(self.a2), H(self.d), H(self.c), H(self.b))

    def allclose(self, other: "MonadDatumP2", atol: float = 1e-12) -> bool:
        if (self.k, self.r) != (other.k, other.r):
            return False
        return all(np.allclose(x, y, atol=atol, rtol=0) for x, y in zip(self.parts(), other.parts()))

    def to_json(self, zeta: float | None = None) -> dict:
        out = {"k": self.k, "r": self.r}
        for name, val in zip(("a1", "a2", "d", "b", "c"), self.parts()):
            out[name] = matrix_to_json(val)
        out["zeta"] = zeta
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MonadDatumP2":
        m = cls(*(matrix_from_json(obj[key]) for key in ("a1", "a2", "d", "b", "c")))
        if (m.k, m.r) != (int(obj["k"]), int(obj["r"])):
            raise ValueError("declared k, r do not match the matrix shapes")
        return m


def integrability_residual_p2(m: MonadDatumP2) -> np.ndarray:
    return m.a1 @ m.d @ m.a2 - m.a2 @ m.d @ m.a1 + m.b @ m.c


def surjectivity_check(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """``a1(W1) + a2(W1) + b(C^r) = W0``; the witness is the cokernel."""
    block = np.hstack([m.a1, m.a2, m.b])
    span = column_span(block, tol)
    if span.dim == m.k:
        return CheckResult(Verdict.HOLDS)
    return CheckResult(Verdict.FAILS, orth_complement(span, tol))


def moment_p2(m: MonadDatumP2):
    """Return ``(mu0, mu1)``; the level set is ``(0, zeta * 1)``."""
    a1, a2, d, b, c = m.parts()
    H = lambda x: x.conj().T  # noqa: E731
    one = np.eye(m.k, dtype=complex)
    mu0 = a1 @ H(a1) + a2 @ H(a2) + b @ H(b) - one
    da1, da2, db = d @ a1, d @ a2, d @ b
    mu1 = (
        da1 @ H(da1) - H(da1) @ da1
        + da2 @ H(da2) - H(da2) @ da2
        - H(a1) @ a1 - H(a2) @ a2
        + db @ H(db)
        - H(c) @ c
        + one
    )
    return hermitian_part(mu0), hermitian_part(mu1)


def act_p2(g0, g1, m: MonadDatumP2) -> MonadDatumP2:
    g0, g0i = _checked_inverse(g0, "g0")
    g1, g1i = _checked_inverse(g1, "g1")
    if g0.shape[0] != m.k or g1.shape[0] != m.k:
        raise ValueError("group elements must be k x k")
    return MonadDatumP2(
        g0 @ m.a1 @ g1i,
        g0 @ m.a2 @ g1i,
        g1 @ m.d @ g0i,
        g0 @ m.b,
        m.c @ g1i,
    )


def combined_identity_rhs(m: MonadDatumP2) -> np.ndarray:
    """``-sum_i a_i*(d*d + 1)a_i - c*c + 1 + d d*``."""
    a1, a2, d, _, c = m.parts()
    H = lambda x: x.conj().T  # noqa: E731
    one = np.eye(m.k, dtype=complex)
    inner = H(d) @ d + one
    return -H(a1) @ inner @ a1 - H(a2) @ inner @ a2 - H(c) @ c + one + d @ H(d)


def combined_identity_residual(m: MonadDatumP2) -> float:
    """Frobenius norm of ``-d mu0 d* + mu1`` minus its closed form.

    This is an identity in the entries, so it vanishes off the level set too.
    """
    mu0, mu1 = moment_p2(m)
    lhs = -m.d @ mu0 @ m.d.conj().T + mu1
    return float(np.linalg.norm(lhs - combined_identity_rhs(m)))


def max_rank_margins(m: MonadDatumP2):
    """Smallest singular values of ``(a1 a2 b)`` and of ``(a1; a2; c)``."""
    k = m.k
    row = np.linalg.svd(np.hstack([m.a1, m.a2, m.b]), compute_uv=False)
    col = np.linalg.svd(np.vstack([m.a1, m.a2, m.c]), compute_uv=False)
    return float(row[k - 1]), float(col[k - 1])


def p_map(m: MonadDatumP2) -> AdhmDatumS4:
    """``(a1, a2, d, b, c) -> (d a1, d a2, d b, c)`` with ``W = W1``."""
    return AdhmDatumS4(m.d @ m.a1, m.d @ m.a2, m.d @ m.b, m.c)


def stabilizer_dim_p2(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL) -> int:
    """Real dimension of the infinitesimal stabilizer in u(k) x u(k)."""
    a1, a2, d, b, c = m.parts()
    k = m.k
    Z = np.zeros((k, k), dtype=complex)
    cols = []
    for h0, h1 in [(h, Z) for h in unitary_lie_basis(k)] + [(Z, h) for h in unitary_lie_basis(k)]:
        cols.append(
            _realify((h0 @ a1 - a1 @ h1, h0 @ a2 - a2 @ h1, h1 @ d - d @ h0, h0 @ b, c @ h1))
        )
    J = np.column_stack(cols).astype(complex)
    return nullspace(J, tol).dim


# --- the paired non-degeneracy deciders -------------------------------------


def _closed_pair(V0: Subspace, a1, a2, d, tol):
    """Grow ``V0`` until ``a_i d V0 <= V0``; return ``(V0, d V0)``."""
    for _ in range(V0.ambient_dim + 1):
        V1 = image(d, V0, tol)
        grown = column_span(np.hstack([V0.basis, a1 @ V1.basis, a2 @ V1.basis]), tol)
        if grown.dim == V0.dim:
            return V0, V1
        V0 = grown
    return V0, image(d, V0, tol)


def _largest_partner(V0: Subspace, a1, a2, tol) -> Subspace:
    return subspace_intersection(preimage(a1, V0, tol), preimage(a2, V0, tol), tol)


def _equal_dim_partner(V0: Subspace, V1: Subspace, P: Subspace, tol) -> Subspace:
    """A subspace between ``V1`` and ``P`` of dimension ``dim V0``."""
    need = V0.dim - V1.dim
    if need <= 0:
        return V1
    extra = P.basis - V1.basis @ (V1.basis.conj().T @ P.basis)
    extra_span = column_span(extra, tol)
    return subspace_sum(V1, Subspace(V1.ambient_dim, extra_span.basis[:, :need]), tol)


def _enlargement_pool(V0: Subspace, a1, a2, d):
    """Candidate directions for enlarging a stuck closure."""
    k = V0.ambient_dim
    pool = []
    ops = [a1 @ d, a2 @ d, (a1 + 0.6180339887 * a2) @ d, (a1 - 1.4142135623j * a2) @ d]
    for T in ops:
        _, vecs = np.linalg.eig(T)
        pool.extend(vecs.T)
    pool.extend(orth_complement(V0).basis.T)
    pool.extend(np.eye(k, dtype=complex))
    return pool


def _decide_c1_pair(a1, a2, d, b, tol: Tolerance, budget: int):
    """Shared engine for C1' (and, through the adjoint datum, C2').

    Returns ``(verdict, witness_pair, info)``.
    """
    k = a1.shape[0]
    V0, V1 = _closed_pair(column_span(b, tol), a1, a2, d, tol)
    info = {"closure_dim": V0.dim, "candidates_tried": 0}
    if V0.dim == k:
        return Verdict.HOLDS, None, info
    P = _largest_partner(V0, a1, a2, tol)
    if P.dim >= V0.dim:
        return Verdict.FAILS, (V0, _equal_dim_partner(V0, V1, P, tol)), info

    # bounded search over closed enlargements of the stuck closure
    frontier = [V0]
    seen = [V0]
    tried = 0
    while frontier and tried < budget:
        base = frontier.pop(0)
        for v in _enlargement_pool(base, a1, a2, d):
            if tried >= budget:
                break
            if base.contains(v[:, None], 1e-8):
                continue
            tried += 1
            start = subspace_sum(base, column_span(v[:, None], tol), tol)
            W0c, W1c = _closed_pair(start, a1, a2, d, tol)
            if W0c.dim == k:
                continue
            if any(W0c.dim == s.dim and np.allclose(W0c.projector(), s.projector(), atol=1e-8) for s in seen):
                continue
            seen.append(W0c)
            Pc = _largest_partner(W0c, a1, a2, tol)
            if Pc.dim >= W0c.dim:
                info["candidates_tried"] = tried
                return Verdict.FAILS, (W0c, _equal_dim_partner(W0c, W1c, Pc, tol)), info
            frontier.append(W0c)
    info["candidates_tried"] = tried
    return Verdict.UNKNOWN, None, info


def check_c1p(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL, budget: int = ENLARGEMENT_BUDGET) -> CheckResult:
    """C1': no proper pair ``(V0', V1')`` with im b <= V0', d V0' <= V1',
    a_i V1' <= V0' and dim V0' <= dim V1'.

    Holds is certified when the closure of im b fills W0, Fails is certified
    by an explicit witness; otherwise a budgeted search may end in Unknown.
    """
    verdict, pair, info = _decide_c1_pair(m.a1, m.a2, m.d, m.b, tol, budget)
    return CheckResult(verdict, pair, info)


def check_c2p(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL, budget: int = ENLARGEMENT_BUDGET) -> CheckResult:
    """C2': no nonzero pair ``(V0, V1)`` with V1 <= ker c, d V0 <= V1,
    a_i V1 <= V0 and dim V0 <= dim V1. Decided on the adjoint datum.
    """
    dual = m.adjoint()
    verdict, pair, info = _decide_c1_pair(dual.a1, dual.a2, dual.d, dual.b, tol, budget)
    if verdict is not Verdict.FAILS:
        return CheckResult(verdict, None, info)
    U1, U0 = pair  # U1 <= W1 plays the role of V0' for the adjoint datum
    return CheckResult(verdict, (orth_complement(U0, tol), orth_complement(U1, tol)), info)


def witness_is_valid_c1p(m: MonadDatumP2, pair, atol: float = 1e-8) -> bool:
    V0, V1 = pair
    return (
        V0.dim < m.k
        and V0.dim <= V1.dim
        and V0.contains(m.b, atol)
        and V1.contains(m.d @ V0.basis, atol)
        and V0.contains(m.a1 @ V1.basis, atol)
        and V0.contains(m.a2 @ V1.basis, atol)
    )


def witness_is_valid_c2p(m: MonadDatumP2, pair, atol: float = 1e-8) -> bool:
    V0, V1 = pair
    scale = max(1.0, float(np.linalg.norm(m.c)))
    return (
        V1.dim > 0
        and V0.dim <= V1.dim
        and float(np.linalg.norm(m.c @ V1.basis)) <= atol * scale
        and V1.contains(m.d @ V0.basis, atol)
        and V0.contains(m.a1 @ V1.basis, atol)
        and V0.contains(m.a2 @ V1.basis, atol)
    )


def surjectivity_rank(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL) -> int:
    return numeric_rank(np.hstack([m.a1, m.a2, m.b]), tol)

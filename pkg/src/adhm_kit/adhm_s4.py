"""ADHM data for the four-sphere.

A datum is a 4-tuple ``(a1, a2, b, c)`` with ``a_i`` in End(W), ``b: C^r -> W``
and ``c: W -> C^r`` where ``W = C^k``. The complex equation is
``[a1, a2] + b c = 0`` and the real moment map is

    mu = [a1, a1*] + [a2, a2*] + b b* - c* c.

Level sets are always taken at scalar multiples of the identity: the
"level zeta" set is ``mu = -zeta * 1_W``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg_core import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    column_span,
    hermitian_part,
    matrix_from_json,
    matrix_to_json,
    nullspace,
    orth_complement,
)

__all__ = [
    "Verdict",
    "CheckResult",
    "AdhmDatumS4",
    "LevelS4",
    "integrability_residual_s4",
    "moment_s4",
    "act_s4",
    "check_c1_s4",
    "check_c2_s4",
    "stabilizer_dim_s4",
    "invariant_closure",
    "unitary_lie_basis",
    "witness_is_valid_c1",
    "witness_is_valid_c2",
]


class Verdict(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class CheckResult:
    """Three-valued decision; ``witness`` is present exactly when it fails.

    For single-space conditions the witness is a :class:`Subspace`; for the
    paired conditions on the projective plane it is a ``(V0, V1)`` tuple.
    """

    verdict: Verdict
    witness: object = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.verdict is Verdict.FAILS) != (self.witness is not None):
            raise ValueError("a witness must be attached exactly when the check fails")

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def fails(self) -> bool:
        return self.verdict is Verdict.FAILS


@dataclass(frozen=True)
class LevelS4:
    zeta: float

    def target(self, k: int) -> np.ndarray:
        return -self.zeta * np.eye(k, dtype=complex)


@dataclass(frozen=True, eq=False)
class AdhmDatumS4:
    a1: np.ndarray
    a2: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a1 = as_matrix(self.a1)
        k = a1.shape[0]
        a1 = as_matrix(a1, k, k)
        a2 = as_matrix(self.a2, k, k)
        b = as_matrix(self.b, k)
        r = b.shape[1]
        c = as_matrix(self.c, r, k)
        for name, val in zip(("a1", "a2", "b", "c"), (a1, a2, b, c)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def k(self) -> int:
        return self.a1.shape[0]

    @property
    def r(self) -> int:
        return self.b.shape[1]

    @classmethod
    def zeros(cls, k: int, r: int) -> "AdhmDatumS4":
        z = np.zeros
        return cls(z((k, k)), z((k, k)), z((k, r)), z((r, k)))

    def parts(self):
        return (self.a1, self.a2, self.b, self.c)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(x) ** 2 for x in self.parts())))

    def adjoint(self) -> "AdhmDatumS4":
        """The datum ``(a1*, a2*, c*, b*)`` used to dualize the C2 check."""
        return AdhmDatumS4(self.a1.conj().T, self.a2.conj().T, self.c.conj().T, self.b.conj().T)

    def allclose(self, other: "AdhmDatumS4", atol: float = 1e-12) -> bool:
        if (self.k, self.r) != (other.k, other.r):
            return False
        return all(np.allclose(x, y, atol=atol, rtol=0) for x, y in zip(self.parts(), other.parts()))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "r": self.r,
            "a1": matrix_to_json(self.a1),
            "a2": matrix_to_json(self.a2),
            "b": matrix_to_json(self.b),
            "c": matrix_to_json(self.c),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AdhmDatumS4":
        m = cls(*(matrix_from_json(obj[key]) for key in ("a1", "a2", "b", "c")))
        if (m.k, m.r) != (int(obj["k"]), int(obj["r"])):
            raise ValueError("declared k, r do not match the matrix shapes")
        return m


def integrability_residual_s4(m: AdhmDatumS4) -> np.ndarray:
    return m.a1 @ m.a2 - m.a2 @ m.a1 + m.b @ m.c


def moment_s4(m: AdhmDatumS4) -> np.ndarray:
    a1, a2, b, c = m.parts()
    mu = (
        a1 @ a1.conj().T - a1.conj().T @ a1
        + a2 @ a2.conj().T - a2.conj().T @ a2
        + b @ b.conj().T
        - c.conj().T @ c
    )
    return hermitian_part(mu)


def _checked_inverse(g, what="g"):
    g = as_matrix(g)
    if g.shape[0] != g.shape[1]:
        raise ValueError(f"{what} must be square")
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= 1e-14 * max(1.0, s[0]):
        raise ValueError(f"{what} is singular")
    return g, np.linalg.inv(g)


def act_s4(g, m: AdhmDatumS4) -> AdhmDatumS4:
    """``g . (a1, a2, b, c) = (g a1 g^-1, g a2 g^-1, g b, c g^-1)``."""
    g, gi = _checked_inverse(g)
    if g.shape[0] != m.k:
        raise ValueError(f"group element has size {g.shape[0]}, datum has k={m.k}")
    return AdhmDatumS4(g @ m.a1 @ gi, g @ m.a2 @ gi, g @ m.b, m.c @ gi)


def invariant_closure(start: Subspace, maps, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing ``start`` and invariant under every map."""
    U = start
    for _ in range(start.ambient_dim + 1):
        if U.dim == U.ambient_dim:
            return U
        grown = column_span(np.hstack([U.basis] + [A @ U.basis for A in maps]), tol)
        if grown.dim == U.dim:
            return U
        U = grown
    return U


def check_c1_s4(m: AdhmDatumS4, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """No proper (a1, a2)-invariant subspace contains im b.

    Decided exactly: the Krylov closure of im b is the smallest candidate.
    """
    closure = invariant_closure(column_span(m.b, tol), (m.a1, m.a2), tol)
    if closure.dim == m.k:
        return CheckResult(Verdict.HOLDS)
    return CheckResult(Verdict.FAILS, closure)


def check_c2_s4(m: AdhmDatumS4, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """No nonzero (a1, a2)-invariant subspace lies in ker c.

    ``V`` is invariant inside ker c iff ``V^perp`` is (a1*, a2*)-invariant and
    contains im c*, so the largest such ``V`` is the complement of the C1
    closure of the adjoint datum.
    """
    dual = check_c1_s4(m.adjoint(), tol)
    if dual.holds:
        return CheckResult(Verdict.HOLDS)
    return CheckResult(Verdict.FAILS, orth_complement(dual.witness, tol))


def unitary_lie_basis(k: int):
    """Real basis of the anti-Hermitian k x k matrices (dimension k^2)."""
    basis = []
    for i in range(k):
        E = np.zeros((k, k), dtype=complex)
        E[i, i] = 1j
        basis.append(E)
    for i in range(k):
        for j in range(i + 1, k):
            E = np.zeros((k, k), dtype=complex)
            E[i, j], E[j, i] = 1.0, -1.0
            basis.append(E)
            E = np.zeros((k, k), dtype=complex)
            E[i, j], E[j, i] = 1j, 1j
            basis.append(E)
    return basis


def _realify(blocks) -> np.ndarray:
    flat = np.concatenate([np.ravel(x) for x in blocks])
    return np.concatenate([flat.real, flat.imag])


def stabilizer_dim_s4(m: AdhmDatumS4, tol: Tolerance = DEFAULT_TOL) -> int:
    """Real dimension of {h in u(k) : [h, a_i] = 0, h b = 0, c h = 0}."""
    a1, a2, b, c = m.parts()
    cols = [
        _realify((h @ a1 - a1 @ h, h @ a2 - a2 @ h, h @ b, c @ h))
        for h in unitary_lie_basis(m.k)
    ]
    J = np.column_stack(cols).astype(complex)
    return nullspace(J, tol).dim


def witness_is_valid_c1(m: AdhmDatumS4, W: Subspace, atol: float = 1e-8) -> bool:
    """Re-check a C1 witness: proper, contains im b, invariant."""
    return (
        W.dim < m.k
        and W.contains(m.b, atol)
        and W.contains(m.a1 @ W.basis, atol)
        and W.contains(m.a2 @ W.basis, atol)
    )


def witness_is_valid_c2(m: AdhmDatumS4, W: Subspace, atol: float = 1e-8) -> bool:
    """Re-check a C2 witness: nonzero, inside ker c, invariant."""
    scale = max(1.0, float(np.linalg.norm(m.c)))
    return (
        W.dim > 0
        and float(np.linalg.norm(m.c @ W.basis)) <= atol * scale
        and W.contains(m.a1 @ W.basis, atol)
        and W.contains(m.a2 @ W.basis, atol)
    )


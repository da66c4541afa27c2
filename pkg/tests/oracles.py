"""Independent reference computations used by the tests.

Nothing here goes through the closure engines of the package: invariant
lines are found by brute force from eigenvectors, and everything else is
written out entry by entry.
"""
import numpy as np


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, k):
    q, r = np.linalg.qr(crandn(rng, k, k))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _is_invariant_line(v, mats, atol=1e-7):
    v = v / np.linalg.norm(v)
    for A in mats:
        w = A @ v
        if np.linalg.norm(w - v * (v.conj() @ w)) > atol * max(1.0, np.linalg.norm(A)):
            return False
    return True


def _candidate_lines(a1, a2, extra):
    cands = []
    for A in (a1, a2):
        _, vecs = np.linalg.eig(A)
        cands.extend(vecs.T)
    cands.extend(extra)
    cands.extend(np.eye(a1.shape[0]))
    return [v for v in cands if np.linalg.norm(v) > 1e-12]


def _both_scalar(a1, a2, atol=1e-9):
    return all(np.linalg.norm(A - A[0, 0] * np.eye(len(A))) <= atol for A in (a1, a2))


def brute_c1(a1, a2, b, atol=1e-7):
    """True when C1 holds, for k <= 2, by listing proper invariant subspaces."""
    k = a1.shape[0]
    if np.linalg.norm(b) <= atol:
        return False  # the zero subspace is proper and contains im b
    if k == 1:
        return True
    # k == 2: proper nonzero invariant subspaces are common eigenlines
    u, s, _ = np.linalg.svd(b)
    if s[1] > atol * s[0]:
        return True
    line = u[:, 0]
    if _both_scalar(a1, a2):
        return False
    for v in _candidate_lines(a1, a2, [line]):
        v = v / np.linalg.norm(v)
        if abs(abs(v.conj() @ line) - 1) < 1e-7 and _is_invariant_line(v, (a1, a2), atol):
            return False
    return True


def brute_c2(a1, a2, c, atol=1e-7):
    """True when C2 holds (no nonzero invariant subspace inside ker c), k <= 2."""
    k = a1.shape[0]
    if np.linalg.norm(c) <= atol:
        return False  # the whole space
    if k == 1:
        return True
    _, s, vh = np.linalg.svd(c)
    s = np.concatenate([s, np.zeros(2 - len(s))])
    if s[1] > atol * s[0]:
        return True
    kernel = vh[-1].conj()
    if _both_scalar(a1, a2):
        return False
    for v in _candidate_lines(a1, a2, [kernel]):
        v = v / np.linalg.norm(v)
        if abs(abs(v.conj() @ kernel) - 1) < 1e-7 and _is_invariant_line(v, (a1, a2), atol):
            return False
    return True


def degenerate_s4_family(rng, i, r=2):
    """Random k <= 2 data cycling through structured degenerate families."""
    k = 1 + i % 2
    kind = (i // 2) % 8
    a1, a2 = crandn(rng, k, k), crandn(rng, k, k)
    b, c = crandn(rng, k, r), crandn(rng, r, k)
    if kind == 1:
        b = np.zeros((k, r))
    elif kind == 2:
        c = np.zeros((r, k))
    elif kind == 3 and k == 2:
        # common eigenvector e1, im b inside it
        a1, a2 = np.triu(a1), np.triu(a2)
        b = np.outer([1, 0], crandn(rng, r))
    elif kind == 4 and k == 2:
        # common invariant line e2 inside ker c
        a1, a2 = np.tril(a1), np.tril(a2)
        c = np.outer(crandn(rng, r), [1, 0])
    elif kind == 5 and k == 2:
        # shared triangular structure but generic b, c
        a1, a2 = np.triu(a1), np.triu(a2)
    elif kind == 6:
        a1, a2 = 0.7 * np.eye(k), -0.2j * np.eye(k)
        b = np.outer(crandn(rng, k), crandn(rng, r))
        c = np.outer(crandn(rng, r), crandn(rng, k))
    elif kind == 7 and k == 2:
        a1 = np.array([[0, 1], [0, 0]], dtype=complex)
        a2 = np.zeros((2, 2))
        b = np.outer(rng.choice([[1, 0], [0, 1]]), crandn(rng, r))
    if k == 2 and kind in (3, 4, 5, 7) and i % 3 == 0:
        # hide the structure behind a unitary change of basis
        g = random_unitary(rng, 2)
        a1, a2, b, c = g @ a1 @ g.conj().T, g @ a2 @ g.conj().T, g @ b, c @ g.conj().T
    return a1, a2, b, c

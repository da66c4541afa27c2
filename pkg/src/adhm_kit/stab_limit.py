"""Rank-stabilising embeddings and explicit null-homotopies.

Zero-padding ``b`` (extra columns) and ``c`` (extra rows) embeds level sets
of rank ``r`` into rank ``r'``. The homotopies below contract the image of
``r -> r + 2k`` (four-sphere) and ``r -> r + 3k`` (projective plane) to a
constant configuration while staying on the level set.

Block order of ``b_t`` columns and ``c_t`` rows is: old ``r``, then the new
``k``-blocks in the order written in the formulas.

On the projective plane the last block of ``c_t`` is ``sqrt(t (1 - zeta)) 1``.
That is the scalar for which ``mu1`` stays at ``zeta``:

    mu1(h_t) - 1 = (1 - t)(zeta - 1) - t * s**2,

which equals ``zeta - 1`` exactly when ``s**2 = 1 - zeta``. The variant
``sqrt(t * zeta) 1`` is available with ``literal=True``; it agrees only at
``zeta = 1/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adhm_s4 import AdhmDatumS4, check_c1_s4, check_c2_s4, integrability_residual_s4, moment_s4
from .monad_p2 import MonadDatumP2, check_c1p, check_c2p, integrability_residual_p2, moment_p2

__all__ = [
    "SplitParams",
    "default_split",
    "embed_s4",
    "embed_p2",
    "homotopy_s4",
    "homotopy_p2_h",
    "homotopy_p2_htilde",
    "constant_endpoint_s4",
    "constant_endpoint_p2",
    "verify_null_homotopy",
]

SPLIT_ATOL = 1e-12
LEVEL_ATOL = 1e-8


@dataclass(frozen=True)
class SplitParams:
    zeta_b: float
    zeta_c: float

    def __post_init__(self):
        if self.zeta_b <= 0 or self.zeta_c <= 0:
            raise ValueError("zeta_b and zeta_c must be positive")

    @property
    def zeta(self) -> float:
        return self.zeta_c - self.zeta_b


def default_split(zeta: float) -> SplitParams:
    zb = max(1.0, 1.0 - zeta)
    return SplitParams(zb, zb + zeta)


def embed_s4(m: AdhmDatumS4, r_new: int) -> AdhmDatumS4:
    if r_new < m.r:
        raise ValueError(f"cannot embed rank {m.r} into smaller rank {r_new}")
    pad = r_new - m.r
    b = np.hstack([m.b, np.zeros((m.k, pad))])
    c = np.vstack([m.c, np.zeros((pad, m.k))])
    return AdhmDatumS4(m.a1, m.a2, b, c)


def embed_p2(m: MonadDatumP2, r_new: int) -> MonadDatumP2:
    if r_new < m.r:
        raise ValueError(f"cannot embed rank {m.r} into smaller rank {r_new}")
    pad = r_new - m.r
    b = np.hstack([m.b, np.zeros((m.k, pad))])
    c = np.vstack([m.c, np.zeros((pad, m.k))])
    return MonadDatumP2(m.a1, m.a2, m.d, b, c)


def _check_t(t):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")


def _require_level_s4(m, zeta):
    res = float(np.linalg.norm(moment_s4(m) + zeta * np.eye(m.k)))
    if res > LEVEL_ATOL * (1.0 + m.norm() ** 2):
        raise ValueError(f"datum is off the level set mu = -zeta (residual {res:.3e})")


def _require_level_p2(m, zeta):
    mu0, mu1 = moment_p2(m)
    res = float(np.hypot(np.linalg.norm(mu0), np.linalg.norm(mu1 - zeta * np.eye(m.k))))
    if res > LEVEL_ATOL * (1.0 + m.norm() ** 2):
        raise ValueError(f"datum is off the level set (0, zeta) (residual {res:.3e})")


def homotopy_s4(m: AdhmDatumS4, t: float, split: SplitParams | None = None, zeta: float | None = None) -> AdhmDatumS4:
    """``(sqrt(1-t) a1, sqrt(1-t) a2, b_t, c_t)`` with

    ``b_t = (sqrt(1-t) b, 0, sqrt(t zb) 1)``, ``c_t = (sqrt(1-t) c, sqrt(t zc) 1, 0)^T``.
    """
    if split is None:
        if zeta is None:
            raise ValueError("give either split or zeta")
        split = default_split(zeta)
    elif zeta is not None and abs(split.zeta - zeta) > SPLIT_ATOL:
        raise ValueError(f"split gives zeta_c - zeta_b = {split.zeta}, expected {zeta}")
    _check_t(t)
    _require_level_s4(m, split.zeta)
    k = m.k
    s, I, Z = np.sqrt(1.0 - t), np.eye(k), np.zeros((k, k))
    b_t = np.hstack([s * m.b, Z, np.sqrt(t * split.zeta_b) * I])
    c_t = np.vstack([s * m.c, np.sqrt(t * split.zeta_c) * I, Z])
    return AdhmDatumS4(s * m.a1, s * m.a2, b_t, c_t)


def constant_endpoint_s4(k: int, r: int, split: SplitParams) -> AdhmDatumS4:
    """Where every datum of rank ``r`` lands at ``t = 1``."""
    I, Z = np.eye(k), np.zeros((k, k))
    b = np.hstack([np.zeros((k, r)), Z, np.sqrt(split.zeta_b) * I])
    c = np.vstack([np.zeros((r, k)), np.sqrt(split.zeta_c) * I, Z])
    return AdhmDatumS4(Z, Z, b, c)


def _last_block_scalar(zeta, literal):
    if not abs(zeta) < 1.0:
        raise ValueError(f"|zeta| must be < 1, got {zeta}")
    if literal:
        if not 0.0 < zeta < 1.0:
            raise ValueError("the literal sqrt(t zeta) block needs zeta in (0, 1)")
        return zeta
    return 1.0 - zeta


def homotopy_p2_h(m: MonadDatumP2, t: float, zeta: float, literal: bool = False) -> MonadDatumP2:
    """``(sqrt(1-t) a1, sqrt(1-t) a2, d, b_t, c_t)`` with

    ``b_t = (sqrt(1-t) b, 0, sqrt(t) 1, 0)``,
    ``c_t = (sqrt(1-t) c, sqrt(t) d*, 0, sqrt(t s) 1)^T``, ``s = 1 - zeta``.
    """
    s2 = _last_block_scalar(zeta, literal)
    _check_t(t)
    _require_level_p2(m, zeta)
    k = m.k
    s, I, Z = np.sqrt(1.0 - t), np.eye(k), np.zeros((k, k))
    b_t = np.hstack([s * m.b, Z, np.sqrt(t) * I, Z])
    c_t = np.vstack([s * m.c, np.sqrt(t) * m.d.conj().T, Z, np.sqrt(t * s2) * I])
    return MonadDatumP2(s * m.a1, s * m.a2, m.d, b_t, c_t)


def homotopy_p2_htilde(m: MonadDatumP2, t: float, zeta: float, literal: bool = False) -> MonadDatumP2:
    """``(0, 0, (1-t) d, b_1, (0, (1-t) d*, 0, sqrt(s) 1)^T)``; starts at ``h_1(m)``."""
    s2 = _last_block_scalar(zeta, literal)
    _check_t(t)
    _require_level_p2(m, zeta)
    k, r = m.k, m.r
    I, Z = np.eye(k), np.zeros((k, k))
    b1 = np.hstack([np.zeros((k, r)), Z, I, Z])
    c_t = np.vstack([np.zeros((r, k)), (1.0 - t) * m.d.conj().T, Z, np.sqrt(s2) * I])
    return MonadDatumP2(Z, Z, (1.0 - t) * m.d, b1, c_t)


def constant_endpoint_p2(k: int, r: int, zeta: float, literal: bool = False) -> MonadDatumP2:
    s2 = _last_block_scalar(zeta, literal)
    I, Z = np.eye(k), np.zeros((k, k))
    b1 = np.hstack([np.zeros((k, r)), Z, I, Z])
    c = np.vstack([np.zeros((r, k)), Z, Z, np.sqrt(s2) * I])
    return MonadDatumP2(Z, Z, Z, b1, c)


def _dist(x, y) -> float:
    return float(np.sqrt(sum(np.linalg.norm(p - q) ** 2 for p, q in zip(x.parts(), y.parts()))))


def verify_null_homotopy(m, geometry: str, grid, zeta: float, split: SplitParams | None = None, literal: bool = False) -> dict:
    """Evaluate the contracting path(s) on ``grid`` and collect residuals.

    For the projective plane the composite path ``h`` followed by ``h~`` is
    checked. Regularity (both non-degeneracy conditions) is required at every
    ``t > 0`` of ``h``; ``h~`` only needs to stay on the level set.
    """
    grid = [float(t) for t in grid]
    if not grid or min(grid) != 0.0 or max(grid) != 1.0:
        raise ValueError("grid must contain 0 and 1")
    scale = 1.0 + m.norm() ** 2
    level_max = integ_max = 0.0
    regularity_failures = []
    unknown = 0
    checks = 0
    if geometry == "s4":
        split = split or default_split(zeta)
        path = [(t, homotopy_s4(m, t, split, zeta)) for t in grid]
        start_ref = embed_s4(m, m.r + 2 * m.k)
        end_ref = constant_endpoint_s4(m.k, m.r, split)
        for t, x in path:
            level_max = max(level_max, float(np.linalg.norm(moment_s4(x) + zeta * np.eye(m.k))))
            integ_max = max(integ_max, float(np.linalg.norm(integrability_residual_s4(x))))
            if t > 0:
                checks += 1
                v1, v2 = check_c1_s4(x).verdict.value, check_c2_s4(x).verdict.value
                if v1 != "Holds" or v2 != "Holds":
                    regularity_failures.append({"t": t, "c1": v1, "c2": v2})
        start_exact = all(np.array_equal(p, q) for p, q in zip(path[grid.index(0.0)][1].parts(), start_ref.parts()))
        end_dist = _dist(path[grid.index(1.0)][1], end_ref)
    elif geometry == "p2":
        first = [(t, homotopy_p2_h(m, t, zeta, literal)) for t in grid]
        second = [(t, homotopy_p2_htilde(m, t, zeta, literal)) for t in grid]
        start_ref = embed_p2(m, m.r + 3 * m.k)
        end_ref = constant_endpoint_p2(m.k, m.r, zeta, literal)
        I = np.eye(m.k)
        for leg, pts in (("h", first), ("htilde", second)):
            for t, x in pts:
                mu0, mu1 = moment_p2(x)
                level_max = max(level_max, float(np.hypot(np.linalg.norm(mu0), np.linalg.norm(mu1 - zeta * I))))
                integ_max = max(integ_max, float(np.linalg.norm(integrability_residual_p2(x))))
                if leg == "h" and t > 0:
                    checks += 1
                    v1, v2 = check_c1p(x).verdict.value, check_c2p(x).verdict.value
                    unknown += (v1 == "Unknown") + (v2 == "Unknown")
                    if v1 != "Holds" or v2 != "Holds":
                        regularity_failures.append({"t": t, "leg": leg, "c1p": v1, "c2p": v2})
        start_exact = all(np.array_equal(p, q) for p, q in zip(first[grid.index(0.0)][1].parts(), start_ref.parts()))
        junction = _dist(first[grid.index(1.0)][1], second[grid.index(0.0)][1])
        end_dist = max(junction, _dist(second[grid.index(1.0)][1], end_ref))
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return {
        "geometry": geometry,
        "zeta": zeta,
        "grid": grid,
        "k": m.k,
        "r": m.r,
        "max_level_residual": level_max,
        "max_integrability_residual": integ_max,
        "residual_bound": 1e-10 * scale,
        "start_is_embedding": bool(start_exact),
        "endpoint_constancy": end_dist,
        "regularity_failures": regularity_failures,
        "regularity_checks": checks,
        "unknown_verdicts": unknown,
    }

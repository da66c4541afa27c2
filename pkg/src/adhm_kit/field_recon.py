"""Instanton gauge fields on R^4 from regular unperturbed ADHM data.

Coordinates: ``z1 = x1 + i x2``, ``z2 = x3 + i x4``; orientation
``dx1 ^ dx2 ^ dx3 ^ dx4 > 0``. The monad is

    alpha(z) = (a1 - z1; a2 - z2; c) : W -> W + W + C^r
    beta(z)  = (-(a2 - z2), a1 - z1, b) : W + W + C^r -> W

and the fibre is ``ker beta(z)`` intersected with ``ker alpha(z)*``. With
an orthonormal frame ``psi`` the connection is ``A = psi* d psi`` and the
curvature ``F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu]``.

Curvature components are stored in the order (12, 13, 14, 23, 24, 34).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .adhm_s4 import AdhmDatumS4, check_c1_s4, check_c2_s4, integrability_residual_s4, moment_s4

__all__ = [
    "FieldPoint",
    "ChargeReport",
    "PAIRS",
    "require_regular",
    "monad_maps",
    "fiber_frame",
    "align_frame",
    "gauge_field_at",
    "curvature_exact",
    "hodge_star",
    "asd_residual",
    "charge_density",
    "charge_integral",
    "one_instanton",
    "two_instanton",
]

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
# *F in the pair ordering above: (12)->F34, (13)->-F24, (14)->F23, ...
_STAR = ((5, 1.0), (4, -1.0), (3, 1.0), (2, 1.0), (1, -1.0), (0, 1.0))
_REGULAR_ATOL = 1e-8
_RANK_RTOL = 1e-10


class FrameDegenerationError(ValueError):
    pass


@dataclass
class FieldPoint:
    x: np.ndarray
    A: np.ndarray  # (4, r, r)
    F: np.ndarray  # (6, r, r)


@dataclass
class ChargeReport:
    charge: float
    stderr: float
    asd_max: float
    radius: float
    samples: int
    h: float | None = None
    tail: float = 0.0
    grid_spec: dict = field(default_factory=dict)

    @property
    def asd_rel_residual_max(self) -> float:
        return self.asd_max

    def to_json(self) -> dict:
        return asdict(self)


def one_instanton(rho: float = 1.0) -> AdhmDatumS4:
    """The charge-one SU(2) datum of scale ``rho`` centred at the origin."""
    return AdhmDatumS4([[0]], [[0]], [[rho, 0]], [[0], [rho]])


def two_instanton(p: float = 0.8, q: float = 0.0, rho: float = 1.0) -> AdhmDatumS4:
    """Two embedded unit-charge instantons at ``z = +-(p, q)``, rank 4."""
    a1 = np.diag([p, -p]).astype(complex)
    a2 = np.diag([q, -q]).astype(complex)
    b = rho * np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=complex)
    c = rho * np.array([[0, 0], [1, 0], [0, 0], [0, 1]], dtype=complex)
    return AdhmDatumS4(a1, a2, b, c)


def require_regular(m: AdhmDatumS4):
    """Raise unless ``m`` is integrable, on ``mu = 0`` and satisfies C1, C2."""
    scale = 1.0 + m.norm() ** 2
    if np.linalg.norm(integrability_residual_s4(m)) > _REGULAR_ATOL * scale:
        raise ValueError("field reconstruction needs an integrable datum")
    if np.linalg.norm(moment_s4(m)) > _REGULAR_ATOL * scale:
        raise ValueError("field reconstruction needs mu = 0 (unperturbed level)")
    if not (check_c1_s4(m).holds and check_c2_s4(m).holds):
        raise ValueError("field reconstruction needs a datum satisfying C1 and C2")


def _alpha(m, z1, z2):
    k = m.k
    I = np.eye(k)
    return np.vstack([m.a1 - z1 * I, m.a2 - z2 * I, m.c])


def _beta(m, z1, z2):
    k = m.k
    I = np.eye(k)
    return np.hstack([-(m.a2 - z2 * I), m.a1 - z1 * I, m.b])


def monad_maps(m: AdhmDatumS4, z1: complex, z2: complex, check: bool = True):
    """``(alpha(z), beta(z))``; ``beta alpha = [a1, a2] + b c`` for every z."""
    if check:
        require_regular(m)
    return _alpha(m, z1, z2), _beta(m, z1, z2)


def _z(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3]


def _stacked(m, X):
    """Batch of ``[beta; alpha*]`` matrices, shape (n, 2k, 2k + r)."""
    k, r = m.k, m.r
    z1, z2 = _z(X)
    n = z1.size
    I = np.eye(k)
    top = np.empty((n, k, 2 * k + r), dtype=complex)
    top[:, :, :k] = -(m.a2[None] - z2.reshape(n, 1, 1) * I)
    top[:, :, k:2 * k] = m.a1[None] - z1.reshape(n, 1, 1) * I
    top[:, :, 2 * k:] = m.b[None]
    alpha = np.empty((n, 2 * k + r, k), dtype=complex)
    alpha[:, :k] = m.a1[None] - z1.reshape(n, 1, 1) * I
    alpha[:, k:2 * k] = m.a2[None] - z2.reshape(n, 1, 1) * I
    alpha[:, 2 * k:] = m.c[None]
    return np.concatenate([top, np.conj(np.swapaxes(alpha, 1, 2))], axis=1), alpha


def _frames(m, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    S, _ = _stacked(m, X)
    k = m.k
    _, s, Vh = np.linalg.svd(S, full_matrices=True)
    if np.any(s[:, 2 * k - 1] <= _RANK_RTOL * s[:, 0]):
        bad = X[np.argmin(s[:, 2 * k - 1] / s[:, 0])]
        raise FrameDegenerationError(f"monad degenerates near x = {bad.tolist()}")
    return np.conj(np.swapaxes(Vh[:, 2 * k:, :], 1, 2))


def align_frame(psi, ref):
    """Right-multiply ``psi`` by the unitary closest to ``psi* ref``."""
    M = np.conj(np.swapaxes(psi, -1, -2)) @ ref
    U, _, Vh = np.linalg.svd(M)
    return psi @ (U @ Vh)


def fiber_frame(m: AdhmDatumS4, z1: complex, z2: complex, gauge_ref=None, check: bool = True) -> np.ndarray:
    """Orthonormal ``(2k + r) x r`` frame of the fibre at ``(z1, z2)``."""
    if check:
        require_regular(m)
    x = np.array([[z1.real, z1.imag, z2.real, z2.imag]])
    psi = _frames(m, x)[0]
    if gauge_ref is not None:
        psi = align_frame(psi, np.asarray(gauge_ref, dtype=complex))
    return psi


def _antiherm(M):
    return 0.5 * (M - np.conj(np.swapaxes(M, -1, -2)))


def gauge_field_at(m: AdhmDatumS4, x, h: float = 1e-3, check: bool = True) -> FieldPoint:
    """Potential and curvature at ``x`` by central differences.

    All stencil frames are aligned to the frame at ``x``, which is a smooth
    local gauge, so the differences see the connection and not gauge jumps.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-6, 1e-2]")
    if check:
        require_regular(m)
    x = np.asarray(x, dtype=float)
    E = np.eye(4)
    pts = [x]
    index = {(): 0}
    for mu in range(4):
        for s in (1, -1):
            index[((mu, s),)] = len(pts)
            pts.append(x + s * h * E[mu])
    for mu, nu in PAIRS:
        for s in (1, -1):
            for t in (1, -1):
                key = tuple(sorted(((mu, s), (nu, t))))
                index[key] = len(pts)
                pts.append(x + s * h * E[mu] + t * h * E[nu])
    psi = _frames(m, np.array(pts))
    psi = align_frame(psi, psi[0][None])

    def frame(*steps):
        return psi[index[tuple(sorted(steps))]]

    def potential(nu, base=()):
        centre = frame(*base)
        fwd = frame(*(base + ((nu, 1),)))
        bwd = frame(*(base + ((nu, -1),)))
        return _antiherm(centre.conj().T @ (fwd - bwd) / (2 * h))

    A = np.array([potential(mu) for mu in range(4)])
    F = []
    for mu, nu in PAIRS:
        dA_nu = (potential(nu, ((mu, 1),)) - potential(nu, ((mu, -1),))) / (2 * h)
        dA_mu = (potential(mu, ((nu, 1),)) - potential(mu, ((nu, -1),))) / (2 * h)
        F.append(dA_nu - dA_mu + A[mu] @ A[nu] - A[nu] @ A[mu])
    return FieldPoint(x=x, A=A, F=_antiherm(np.array(F)))


# --- closed-form curvature --------------------------------------------------


def _dalpha_dbeta(k, r):
    """Coordinate derivatives of alpha and beta (constant in x)."""
    I = np.eye(k)
    Z = np.zeros((k, k))
    Zr = np.zeros((r, k))
    dal = [
        np.vstack([-I, Z, Zr]),
        np.vstack([-1j * I, Z, Zr]),
        np.vstack([Z, -I, Zr]),
        np.vstack([Z, -1j * I, Zr]),
    ]
    Zb = np.zeros((k, r))
    dbe = [
        np.hstack([Z, -I, Zb]),
        np.hstack([Z, -1j * I, Zb]),
        np.hstack([I, Z, Zb]),
        np.hstack([1j * I, Z, Zb]),
    ]
    return dal, dbe


def curvature_exact(m: AdhmDatumS4, X) -> np.ndarray:
    """Curvature at each row of ``X`` from the projector formula.

    With ``Q`` the projection onto ``im alpha + im beta*`` and
    ``Y_mu = d_mu Q psi = alpha N^-1 (d_mu alpha)* psi + beta* M^-1 (d_mu beta) psi``
    (``N = alpha* alpha``, ``M = beta beta*``) one has
    ``F_{mu nu} = Y_mu* Y_nu - Y_nu* Y_mu``. Returns shape (n, 6, r, r).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    S, alpha = _stacked(m, X)
    k, r = m.k, m.r
    psi = _frames(m, X)
    beta = S[:, :k, :]
    H = lambda T: np.conj(np.swapaxes(T, -1, -2))  # noqa: E731
    Ninv = np.linalg.inv(H(alpha) @ alpha)
    Minv = np.linalg.inv(beta @ H(beta))
    dal, dbe = _dalpha_dbeta(k, r)
    Y = []
    for mu in range(4):
        t1 = alpha @ (Ninv @ (dal[mu].conj().T[None] @ psi))
        t2 = H(beta) @ (Minv @ (dbe[mu][None] @ psi))
        Y.append(t1 + t2)
    F = np.empty((X.shape[0], 6, r, r), dtype=complex)
    for j, (mu, nu) in enumerate(PAIRS):
        F[:, j] = H(Y[mu]) @ Y[nu] - H(Y[nu]) @ Y[mu]
    return F


def hodge_star(F):
    F = np.asarray(F)
    return np.stack([sign * F[..., src, :, :] for src, sign in _STAR], axis=-3)


def asd_residual(fp) -> float:
    """``|F + *F| / |F|``; zero curvature gives 0."""
    F = fp.F if isinstance(fp, FieldPoint) else np.asarray(fp)
    nF = float(np.linalg.norm(F))
    if nF == 0.0:
        return 0.0
    return float(np.linalg.norm(F + hodge_star(F)) / nF)


def charge_density(F) -> np.ndarray:
    """``(1/8 pi^2) tr(F ^ F)`` per unit volume, for curvature stacks (..., 6, r, r)."""
    F = np.asarray(F)
    tr = lambda P, Q: np.einsum("...ij,...ji->...", P, Q)  # noqa: E731
    val = tr(F[..., 0, :, :], F[..., 5, :, :]) - tr(F[..., 1, :, :], F[..., 4, :, :]) + tr(F[..., 2, :, :], F[..., 3, :, :])
    return (2.0 * val).real / (8.0 * np.pi ** 2)


def _centre_and_scale(m):
    k = m.k
    t1 = np.trace(m.a1) / k
    t2 = np.trace(m.a2) / k
    centre = np.array([t1.real, t1.imag, t2.real, t2.imag])
    spread = (np.linalg.norm(m.a1 - t1 * np.eye(k)) ** 2 + np.linalg.norm(m.a2 - t2 * np.eye(k)) ** 2) / k
    s2 = (np.linalg.norm(m.b) ** 2 + np.linalg.norm(m.c) ** 2) / (2 * k) + spread
    return centre, float(np.sqrt(max(s2, 1e-12)))


def _sphere(rng, n):
    v = rng.standard_normal((n, 4))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _density_and_asd(m, X, chunk):
    q = np.empty(X.shape[0])
    asd = 0.0
    for i in range(0, X.shape[0], chunk):
        F = curvature_exact(m, X[i:i + chunk])
        q[i:i + chunk] = charge_density(F)
        nF = np.linalg.norm(F.reshape(F.shape[0], -1), axis=1)
        nS = np.linalg.norm((F + hodge_star(F)).reshape(F.shape[0], -1), axis=1)
        keep = nF > 1e-8 * nF.max()
        if np.any(keep):
            asd = max(asd, float(np.max(nS[keep] / nF[keep])))
    return q, asd


def charge_integral(m: AdhmDatumS4, radius: float = 6.0, samples: int = 200_000, seed: int = 0,
                    method: str = "mc", chunk: int = 20_000, tail_directions: int = 256) -> ChargeReport:
    """Integrate the charge density over the ball of ``radius`` about the
    datum's centre (``tr a_i / k``) and add a far-field tail.

    ``method="mc"`` uses radial importance sampling with density proportional
    to ``1 / (|x|^2 + s^2)^3``; ``method="grid"`` uses Gauss-Legendre nodes in
    the radius times random directions. The tail assumes the density decays
    like ``C |x|^-8`` and takes ``C`` from the sphere of the given radius.
    """
    if m.k == 0:
        return ChargeReport(0.0, 0.0, 0.0, radius, samples)
    require_regular(m)
    rng = np.random.default_rng(seed)
    centre, s = _centre_and_scale(m)
    R = float(radius)
    if method == "mc":
        norm = (R ** 2 / (R ** 2 + s ** 2)) ** 2
        w = np.sqrt(rng.random(samples)) * (R ** 2 / (R ** 2 + s ** 2))
        rad = np.sqrt(s ** 2 * w / (1.0 - w))
        X = centre + rad[:, None] * _sphere(rng, samples)
        q, asd = _density_and_asd(m, X, chunk)
        pdf = 2.0 * s ** 2 / (np.pi ** 2 * norm * (rad ** 2 + s ** 2) ** 3)
        vals = q / pdf
        inner = float(vals.mean())
        err = float(vals.std(ddof=1) / np.sqrt(samples))
        spec = {"method": "mc", "importance_scale": s, "centre": centre.tolist()}
    elif method == "grid":
        n_r = 64
        n_dir = max(2, samples // n_r)
        nodes, weights = np.polynomial.legendre.leggauss(n_r)
        rad = 0.5 * R * (nodes + 1.0)
        wr = 0.5 * R * weights * 2.0 * np.pi ** 2 * rad ** 3
        dirs = _sphere(rng, n_dir)
        X = centre + (dirs[:, None, :] * rad[None, :, None]).reshape(-1, 4)
        q, asd = _density_and_asd(m, X, chunk)
        per_dir = q.reshape(n_dir, n_r) @ wr
        inner = float(per_dir.mean())
        err = float(per_dir.std(ddof=1) / np.sqrt(n_dir))
        spec = {"method": "grid", "radial_nodes": n_r, "directions": n_dir, "centre": centre.tolist()}
    else:
        raise ValueError(f"unknown method {method!r}")
    Xs = centre + R * _sphere(rng, tail_directions)
    qs, _ = _density_and_asd(m, Xs, chunk)
    C = float(np.mean(qs)) * R ** 8
    tail = np.pi ** 2 * C / (2.0 * R ** 4)
    return ChargeReport(
        charge=inner + tail,
        stderr=err,
        asd_max=asd,
        radius=R,
        samples=int(samples),
        h=None,
        tail=tail,
        grid_spec=spec,
    )

"""Sampling and gradient flows on moment-map level sets.

The Kempf-Ness flows minimise ``F = |mu(g.m) - level|^2`` over the
complexified group by steepest descent in Hermitian directions. The group
element of a step is ``exp(-s * grad)`` and is applied to the current
iterate, so the complex (integrability) equation is carried along exactly
by equivariance. Gradients are exact derivatives of the polynomial moment
maps; :func:`fd_gradient_s4` and :func:`fd_gradient_p2` are kept for
cross-checking.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .adhm_s4 import (
    AdhmDatumS4,
    CheckResult,
    LevelS4,
    Verdict,
    act_s4,
    integrability_residual_s4,
    moment_s4,
    stabilizer_dim_s4,
)
from .linalg_core import DEFAULT_TOL, Tolerance, hermitian_exp, hermitian_part, nullspace, numeric_rank
from .monad_p2 import (
    LevelP2,
    MonadDatumP2,
    act_p2,
    check_c1p,
    check_c2p,
    integrability_residual_p2,
    moment_p2,
    p_map,
    stabilizer_dim_p2,
    surjectivity_check,
)

log = logging.getLogger(__name__)

__all__ = [
    "FlowConfig",
    "FlowReport",
    "SamplerError",
    "random_integrable_s4",
    "random_integrable_p2",
    "derive_seed",
    "objective_grad_s4",
    "objective_grad_p2",
    "fd_gradient_s4",
    "fd_gradient_p2",
    "kempf_ness_flow_s4",
    "kempf_ness_flow_p2",
    "sample_on_level_s4",
    "sample_on_level_p2",
    "level_residual_s4",
    "level_residual_p2",
    "tangent_dimension",
    "df_surjectivity_check",
    "ResolutionResult",
    "resolution_project",
    "boundedness_trace",
]

INSTABILITY_GROUP_NORM = 50.0
ON_LEVEL_ATOL = 1e-6


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowConfig:
    step0: float = 0.1
    max_iter: int = 20000
    tol: float = 1e-10
    backtrack: float = 0.5
    grow: float = 1.5
    stall_window: int = 500
    max_step_norm: float = 1.0
    # less than this factor of decrease over ``stall_window`` steps counts as
    # a stall: regular orbits converge geometrically, orbits whose closure
    # holds the target only approach it like a power law
    stall_ratio: float = 0.5

    def __post_init__(self):
        if self.step0 <= 0:
            raise ValueError("step0 must be positive")
        if not 1 <= self.max_iter <= 10**6:
            raise ValueError("max_iter must lie in [1, 1e6]")
        if self.tol < 1e-12:
            raise ValueError("tol must be >= 1e-12")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.grow <= 1:
            raise ValueError("grow must exceed 1")
        if self.stall_window < 1:
            raise ValueError("stall_window must be positive")
        if not 0 < self.stall_ratio < 1:
            raise ValueError("stall_ratio must lie in (0, 1)")


@dataclass
class FlowReport:
    converged: bool
    iterations: int
    final_residual: float
    group_norm: float
    instability_flag: bool
    initial_residual: float = float("nan")
    integrability_residual: float = 0.0
    stalled: bool = False

    def __post_init__(self):
        if self.instability_flag and self.converged:
            raise ValueError("an unstable flow cannot be reported as converged")

    def to_json(self) -> dict:
        return {key: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for key, v in asdict(self).items()}


def derive_seed(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def _complex_gaussian(rng, shape, scale):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _default_scale(k, r):
    return 1.0 / np.sqrt(2 * k + r)


def _solve_c(rng, bracket, b, r, k, scale, generic_c):
    """Solve ``b c = -bracket`` for ``c``; optionally add a generic kernel part."""
    bp = np.linalg.pinv(b)
    if not generic_c:
        return -bp @ bracket
    c0 = _complex_gaussian(rng, (r, k), scale)
    return c0 - bp @ (b @ c0 + bracket)


def _solve_b(rng, bracket, c, r, k, scale):
    """Solve ``b c = -bracket`` for ``b`` plus a generic left-kernel part."""
    cp = np.linalg.pinv(c)
    b0 = _complex_gaussian(rng, (k, r), scale)
    return b0 - (b0 @ c + bracket) @ cp


def _full_row_rank_b(rng, k, r, scale):
    for _ in range(100):
        b = _complex_gaussian(rng, (k, r), scale)
        s = np.linalg.svd(b, compute_uv=False)
        if s[-1] > 1e-8 * s[0]:
            return b
    raise SamplerError("could not draw b with full row rank")


def _linear_pair(rng, bracket, k, r, scale, generic_c, solve_for):
    if solve_for == "c":
        b = _full_row_rank_b(rng, k, r, scale)
        return b, _solve_c(rng, bracket, b, r, k, scale, generic_c)
    if solve_for == "b":
        c = _full_row_rank_b(rng, k, r, scale).conj().T
        return _solve_b(rng, bracket, c, r, k, scale), c
    raise ValueError(f"solve_for must be 'b' or 'c', got {solve_for!r}")


def random_integrable_s4(k, r, seed, scale=None, generic_c=False, solve_for="c") -> AdhmDatumS4:
    """Gaussian ``a1, a2, b`` and ``c = -b^+ [a1, a2]``.

    With ``generic_c`` a random element of the kernel of ``c -> b c`` is
    added, which is needed for ``k = 1`` where the bracket vanishes.
    ``solve_for="b"`` draws ``c`` of full column rank and solves for ``b``
    (always with a generic kernel part); at ``k = r = 1`` that is the only
    way to reach points with ``b = 0``.
    """
    if k < 1 or r < 1:
        raise ValueError("k and r must be positive")
    if r < k:
        raise SamplerError(f"sampler needs r >= k to make b surjective (got k={k}, r={r}); enlarge r")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = _default_scale(k, r) if scale is None else scale
    a1 = _complex_gaussian(rng, (k, k), s)
    a2 = _complex_gaussian(rng, (k, k), s)
    b, c = _linear_pair(rng, a1 @ a2 - a2 @ a1, k, r, s, generic_c, solve_for)
    return AdhmDatumS4(a1, a2, b, c)


def _project_out(x0, L):
    return x0 - np.linalg.pinv(L) @ (L @ x0)


def _low_rank_p2(rng, k, r, scale, solve_for="c"):
    """Integrable data with ``r < k``.

    With ``A_i = d a_i`` and ``B = d b`` (``d`` invertible) the equation reads
    ``[A1, A2] + B c = 0``. That is solvable in ``A2`` exactly when ``B c`` is
    orthogonal to the commutant of ``A1*``, i.e. ``tr(A1^j B c) = 0`` for
    ``j < k``. Whichever of ``c`` and ``B`` is named by ``solve_for`` is
    projected onto those constraints; the other stays generic.
    """
    A1 = _complex_gaussian(rng, (k, k), scale)
    powers = [np.linalg.matrix_power(A1, j) for j in range(k)]
    if solve_for == "c":
        B = _complex_gaussian(rng, (k, r), scale)
        L = np.array([(P @ B).T.ravel() for P in powers])
        c = _project_out(_complex_gaussian(rng, (r, k), scale).ravel(), L).reshape(r, k)
    else:
        c = _complex_gaussian(rng, (r, k), scale)
        L = np.array([(c @ P).T.ravel() for P in powers])
        B = _project_out(_complex_gaussian(rng, (k, r), scale).ravel(), L).reshape(k, r)
    I = np.eye(k)
    K = np.kron(A1, I) - np.kron(I, A1.T)
    A2 = np.linalg.lstsq(K, -(B @ c).ravel(), rcond=None)[0].reshape(k, k)
    coef = _complex_gaussian(rng, k, scale)
    A2 = A2 + sum(coef[j] * np.linalg.matrix_power(A1, j) for j in range(k))
    d = _complex_gaussian(rng, (k, k), scale)
    if np.linalg.cond(d) > 1e3:
        return None
    di = np.linalg.inv(d)
    return MonadDatumP2(di @ A1, di @ A2, d, di @ B, c)


def random_integrable_p2(k, r, seed, scale=None, generic_c=False, attempts=100, solve_for="c") -> MonadDatumP2:
    """Gaussian ``a1, a2, d, b``; ``c`` solves the integrability equation
    (or the other way round with ``solve_for="b"``).

    For ``r < k`` the linear solve is impossible in general and the data are
    built from a solution of the four-sphere equation instead.
    """
    if k < 1 or r < 1:
        raise ValueError("k and r must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = _default_scale(k, r) if scale is None else scale
    for _ in range(attempts):
        if r < k:
            m = _low_rank_p2(rng, k, r, s, solve_for)
            if m is None or np.linalg.norm(integrability_residual_p2(m)) > 1e-12 * (1.0 + m.norm() ** 3):
                continue
        else:
            a1 = _complex_gaussian(rng, (k, k), s)
            a2 = _complex_gaussian(rng, (k, k), s)
            d = _complex_gaussian(rng, (k, k), s)
            b, c = _linear_pair(rng, a1 @ d @ a2 - a2 @ d @ a1, k, r, s, generic_c, solve_for)
            m = MonadDatumP2(a1, a2, d, b, c)
        if surjectivity_check(m).holds:
            return m
    raise SamplerError("surjectivity not achieved within the attempt budget")


# --- objectives and exact gradients -----------------------------------------


def _H(x):
    return x.conj().T


def objective_grad_s4(m: AdhmDatumS4, zeta: float):
    """``F = |mu + zeta|^2`` and its gradient over Hermitian group directions.

    ``dF = tr(G xi)`` for the infinitesimal action of Hermitian ``xi``.
    """
    a1, a2, b, c = m.parts()
    R = moment_s4(m) + zeta * np.eye(m.k)
    F = float(np.vdot(R, R).real)
    G = np.zeros_like(R)
    for a in (a1, a2):
        Ga = 4.0 * (R @ a - a @ R)
        G += a @ _H(Ga) - _H(Ga) @ a
    Gb = 4.0 * R @ b
    Gc = -4.0 * c @ R
    G += b @ _H(Gb) - _H(Gc) @ c
    return F, hermitian_part(G)


def objective_grad_p2(m: MonadDatumP2, zeta: float):
    """``F = |mu0|^2 + |mu1 - zeta|^2`` and gradients ``(G0, G1)``."""
    a1, a2, d, b, c = m.parts()
    mu0, mu1 = moment_p2(m)
    R0 = mu0
    R1 = mu1 - zeta * np.eye(m.k)
    F = float(np.vdot(R0, R0).real + np.vdot(R1, R1).real)

    Ga = [4.0 * R0 @ a - 4.0 * a @ R1 for a in (a1, a2)]
    Gb = 4.0 * R0 @ b
    Gd = np.zeros_like(d)
    for i, a in enumerate((a1, a2)):
        D = d @ a
        GD = 4.0 * (R1 @ D - D @ R1)
        Gd += GD @ _H(a)
        Ga[i] = Ga[i] + _H(d) @ GD
    E = d @ b
    GE = 4.0 * R1 @ E
    Gd += GE @ _H(b)
    Gb = Gb + _H(d) @ GE
    Gc = -4.0 * c @ R1

    G0 = b @ _H(Gb) - _H(Gd) @ d
    G1 = d @ _H(Gd) - _H(Gc) @ c
    for a, g in zip((a1, a2), Ga):
        G0 = G0 + a @ _H(g)
        G1 = G1 - _H(g) @ a
    return F, (hermitian_part(G0), hermitian_part(G1))


def _hermitian_basis(k):
    basis = []
    for i in range(k):
        E = np.zeros((k, k), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    for i in range(k):
        for j in range(i + 1, k):
            E = np.zeros((k, k), dtype=complex)
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
            E = np.zeros((k, k), dtype=complex)
            E[i, j], E[j, i] = 1j, -1j
            basis.append(E)
    return basis


def fd_gradient_s4(m: AdhmDatumS4, zeta: float, eps: float = 1e-6):
    """Central-difference version of :func:`objective_grad_s4`."""
    def F(xi):
        return objective_grad_s4(act_s4(hermitian_exp(xi), m), zeta)[0]

    G = np.zeros((m.k, m.k), dtype=complex)
    for E in _hermitian_basis(m.k):
        der = (F(eps * E) - F(-eps * E)) / (2 * eps)
        G += der * E / np.vdot(E, E).real
    return G


def fd_gradient_p2(m: MonadDatumP2, zeta: float, eps: float = 1e-6):
    """Central-difference version of :func:`objective_grad_p2`."""
    k = m.k
    Z = np.zeros((k, k), dtype=complex)

    def F(x0, x1):
        return objective_grad_p2(act_p2(hermitian_exp(x0), hermitian_exp(x1), m), zeta)[0]

    out = []
    for slot in (0, 1):
        G = np.zeros((k, k), dtype=complex)
        for E in _hermitian_basis(k):
            p = (eps * E, Z) if slot == 0 else (Z, eps * E)
            q = (-eps * E, Z) if slot == 0 else (Z, -eps * E)
            der = (F(*p) - F(*q)) / (2 * eps)
            G += der * E / np.vdot(E, E).real
        out.append(G)
    return tuple(out)


def level_residual_s4(m: AdhmDatumS4, zeta: float) -> float:
    return float(np.linalg.norm(moment_s4(m) + zeta * np.eye(m.k)))


def level_residual_p2(m: MonadDatumP2, zeta: float) -> float:
    mu0, mu1 = moment_p2(m)
    return float(np.sqrt(np.linalg.norm(mu0) ** 2 + np.linalg.norm(mu1 - zeta * np.eye(m.k)) ** 2))


def _log_norm(g):
    """``|log |g||_F`` where ``|g| = (g g*)^(1/2)``."""
    w = np.linalg.eigvalsh(hermitian_part(g @ g.conj().T))
    return float(np.linalg.norm(0.5 * np.log(np.maximum(w, 1e-300))))


def _descend(m, objective, apply_step, n_blocks, k, cfg: FlowConfig, on_accept=None, check_step=None):
    """Shared backtracking steepest descent on the group orbit."""
    F, G = objective(m)
    if n_blocks == 1:
        G = (G,)
    F0 = F
    g_acc = [np.eye(k, dtype=complex) for _ in range(n_blocks)]
    step = cfg.step0
    history = [F]
    it = 0
    unstable = stalled = False
    while it < cfg.max_iter:
        if np.sqrt(F) <= cfg.tol:
            break
        gnorm2 = sum(float(np.vdot(x, x).real) for x in G)
        if gnorm2 == 0.0:
            stalled = True
            break
        gnorm = np.sqrt(gnorm2)
        accepted = False
        s = min(step, cfg.max_step_norm / gnorm)
        for _ in range(80):
            gs = [hermitian_exp(-s * x) for x in G]
            trial = apply_step(gs, m)
            Ft, Gt = objective(trial)
            if Ft <= F - 1e-4 * s * gnorm2 and (check_step is None or check_step(trial)):
                accepted = True
                break
            s *= cfg.backtrack
        if not accepted:
            stalled = True
            break
        it += 1
        if Ft > F:  # pragma: no cover - guarded by the acceptance test above
            raise AssertionError("flow objective increased")
        Gt = (Gt,) if n_blocks == 1 else Gt
        # Barzilai-Borwein proposal for the next trial step, capped by growth
        dG = [y - x for x, y in zip(G, Gt)]
        sy = s * -sum(float(np.vdot(x, y).real) for x, y in zip(G, dG))
        ss = s * s * gnorm2
        step = s * cfg.grow
        if sy > 0:
            step = min(ss / sy, step * 10.0)
        m, F, G = trial, Ft, Gt
        g_acc = [gi @ ga for gi, ga in zip(gs, g_acc)]
        if on_accept is not None:
            on_accept(m)
        history.append(F)
        group_norm = float(np.sqrt(sum(_log_norm(x) ** 2 for x in g_acc)))
        if group_norm > INSTABILITY_GROUP_NORM:
            unstable = True
            break
        w = cfg.stall_window
        if len(history) > w and history[-1] >= history[-1 - w] * cfg.stall_ratio:
            stalled = True
            break
    group_norm = float(np.sqrt(sum(_log_norm(x) ** 2 for x in g_acc)))
    residual = float(np.sqrt(F))
    converged = residual <= cfg.tol and not unstable
    report = FlowReport(
        converged=converged,
        iterations=it,
        final_residual=residual,
        group_norm=group_norm,
        instability_flag=unstable,
        initial_residual=float(np.sqrt(F0)),
        stalled=stalled and not converged,
    )
    return m, report


def _require_integrable_s4(m):
    res = float(np.linalg.norm(integrability_residual_s4(m)))
    if res > 1e-9 * (1.0 + m.norm() ** 2):
        raise ValueError(f"datum is not integrable (residual {res:.3e})")


def _require_integrable_p2(m):
    res = float(np.linalg.norm(integrability_residual_p2(m)))
    if res > 1e-9 * (1.0 + m.norm() ** 3):
        raise ValueError(f"datum is not integrable (residual {res:.3e})")


def kempf_ness_flow_s4(m: AdhmDatumS4, level, cfg: FlowConfig = FlowConfig(), on_accept=None,
                       require_integrable: bool = True):
    """Flow ``m`` inside its GL(W)-orbit towards ``mu = -zeta * 1``.

    The flow itself never uses integrability; ``require_integrable=False``
    lets it run on arbitrary data (the orbit preserves the residual's rank).
    """
    zeta = level.zeta if isinstance(level, LevelS4) else float(level)
    if require_integrable:
        _require_integrable_s4(m)
    out, report = _descend(
        m,
        lambda x: objective_grad_s4(x, zeta),
        lambda gs, x: act_s4(gs[0], x),
        1,
        m.k,
        cfg,
        on_accept=on_accept,
    )
    report.integrability_residual = float(np.linalg.norm(integrability_residual_s4(out)))
    return out, report


def kempf_ness_flow_p2(m: MonadDatumP2, level, cfg: FlowConfig = FlowConfig(), on_accept=None):
    """Flow ``m`` inside its GL(W0) x GL(W1)-orbit towards ``(0, zeta * 1)``."""
    zeta = level.zeta if isinstance(level, LevelP2) else float(level)
    _require_integrable_p2(m)
    if not surjectivity_check(m).holds:
        raise ValueError("datum violates the surjectivity condition")
    bound = 1e-9 * (1.0 + m.norm() ** 3)

    def still_admissible(x):
        # the group action preserves both conditions; this guards against drift
        res = float(np.linalg.norm(integrability_residual_p2(x)))
        return res <= max(bound, 1e-9 * (1.0 + x.norm() ** 3)) and surjectivity_check(x).holds

    out, report = _descend(
        m,
        lambda x: objective_grad_p2(x, zeta),
        lambda gs, x: act_p2(gs[0], gs[1], x),
        2,
        m.k,
        cfg,
        on_accept=on_accept,
        check_step=still_admissible,
    )
    report.integrability_residual = float(np.linalg.norm(integrability_residual_p2(out)))
    return out, report


def sample_on_level_s4(k, r, zeta, seed, index=0, cfg=FlowConfig(), attempts=5):
    """A point of ``mu^-1(-zeta)``: random integrable datum, then the flow.

    For ``zeta > 0`` the level set forces C2 (``c`` injective on invariant
    subspaces), so ``c`` is drawn first; otherwise ``b`` is.
    """
    solve_for = "b" if zeta > 0 else "c"
    for attempt in range(attempts):
        rng = derive_seed(seed, index * 1000 + attempt)
        m0 = random_integrable_s4(k, r, rng, generic_c=True, solve_for=solve_for)
        m, report = kempf_ness_flow_s4(m0, zeta, cfg)
        if report.converged:
            return m, report
    raise SamplerError(f"no converged S4 sample for k={k}, r={r}, zeta={zeta}, seed={seed}, index={index}")


def sample_on_level_p2(k, r, zeta, seed, index=0, cfg=FlowConfig(), attempts=5):
    """A point of ``mu^-1(0, zeta)``; ``c`` is drawn first when ``zeta < 0``."""
    solve_for = "b" if zeta < 0 else "c"
    for attempt in range(attempts):
        rng = derive_seed(seed, index * 1000 + attempt)
        m0 = random_integrable_p2(k, r, rng, generic_c=True, solve_for=solve_for)
        m, report = kempf_ness_flow_p2(m0, zeta, cfg)
        if report.converged:
            return m, report
    raise SamplerError(f"no converged P2 sample for k={k}, r={r}, zeta={zeta}, seed={seed}, index={index}")


# --- tangent spaces ---------------------------------------------------------


def _herm_coords(M):
    k = M.shape[0]
    iu = np.triu_indices(k, 1)
    return np.concatenate([np.diag(M).real, M[iu].real, M[iu].imag])


def _real_coords(parts):
    flat = np.concatenate([np.ravel(x) for x in parts])
    return np.concatenate([flat.real, flat.imag])


def _from_real_coords(x, shapes):
    n = x.size // 2
    flat = x[:n] + 1j * x[n:]
    out, pos = [], 0
    for shp in shapes:
        size = shp[0] * shp[1]
        out.append(flat[pos:pos + size].reshape(shp))
        pos += size
    return out


def _constraints(m, zeta):
    if isinstance(m, AdhmDatumS4):
        R = integrability_residual_s4(m)
        mu = moment_s4(m) + zeta * np.eye(m.k)
        return np.concatenate([R.real.ravel(), R.imag.ravel(), _herm_coords(mu)])
    R = integrability_residual_p2(m)
    mu0, mu1 = moment_p2(m)
    return np.concatenate([
        R.real.ravel(), R.imag.ravel(), _herm_coords(mu0), _herm_coords(mu1 - zeta * np.eye(m.k)),
    ])


def _level_of(m, level):
    if level is None:
        raise ValueError("a level is required")
    return float(level.zeta if hasattr(level, "zeta") else level)


def constraint_jacobian(m, zeta, step=None):
    """Forward-difference Jacobian of the stacked real constraints."""
    parts = m.parts()
    shapes = [p.shape for p in parts]
    x0 = _real_coords(parts)
    h = 1e-6 * (1.0 + m.norm()) if step is None else step
    f0 = _constraints(m, zeta)
    cls = type(m)
    J = np.empty((f0.size, x0.size))
    for j in range(x0.size):
        x = x0.copy()
        x[j] += h
        J[:, j] = (_constraints(cls(*_from_real_coords(x, shapes)), zeta) - f0) / h
    return J


TANGENT_TOL = Tolerance(rel=1e-5)


def tangent_dimension(m, level, tol: Tolerance = TANGENT_TOL) -> int:
    """Dimension of the level set's tangent space modulo the group orbit.

    ``N - O`` with ``N`` the real nullity of the constraint Jacobian and ``O``
    the orbit dimension (group dimension minus stabilizer dimension).
    """
    zeta = _level_of(m, level)
    if isinstance(m, AdhmDatumS4):
        off = level_residual_s4(m, zeta)
        _require_integrable_s4(m)
        group_dim = m.k ** 2
        stab = stabilizer_dim_s4(m)
    else:
        off = level_residual_p2(m, zeta)
        _require_integrable_p2(m)
        group_dim = 2 * m.k ** 2
        stab = stabilizer_dim_p2(m)
    if off > ON_LEVEL_ATOL:
        raise ValueError(f"datum is off the level set (residual {off:.3e})")
    J = constraint_jacobian(m, zeta)
    nullity = J.shape[1] - numeric_rank(J, tol)
    return nullity - (group_dim - stab)


def df_surjectivity_check(m: MonadDatumP2, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Solve for ``x: W0 -> W1`` with ``c x = 0``, ``x b = 0``,
    ``a1 x a2 = a2 x a1`` and ``x a_i d = d a_i x``.

    Only ``x = 0`` means the differential of the complex equation is onto.
    Row-major vectorisation: ``vec(A X B) = kron(A, B.T) vec(X)``.
    """
    a1, a2, d, b, c = m.parts()
    k = m.k
    I = np.eye(k, dtype=complex)
    blocks = [
        np.kron(c, I),
        np.kron(I, b.T),
        np.kron(a1, a2.T) - np.kron(a2, a1.T),
    ]
    for a in (a1, a2):
        blocks.append(np.kron(I, (a @ d).T) - np.kron(d @ a, I))
    ker = nullspace(np.vstack(blocks), tol)
    if ker.dim == 0:
        return CheckResult(Verdict.HOLDS)
    x = ker.basis[:, 0].reshape(k, k)
    return CheckResult(Verdict.FAILS, x / np.linalg.norm(x), {"kernel_dim": ker.dim})


# --- resolution experiments -------------------------------------------------


@dataclass
class ResolutionResult:
    limit: MonadDatumP2
    report: FlowReport
    p_limit: AdhmDatumS4
    p_trace: list = field(default_factory=list)
    c1p_in: str = ""
    c2p_in: str = ""
    c1p_out: str = ""
    c2p_out: str = ""
    p_growing: bool = False
    boundary: bool = False

    def __iter__(self):
        yield from (self.limit, self.report, self.p_limit)

    def to_json(self) -> dict:
        return {
            "report": self.report.to_json(),
            "p_limit_norm": self.p_limit.norm(),
            "p_trace_tail": [float(x) for x in self.p_trace[-10:]],
            "c1p_in": self.c1p_in,
            "c2p_in": self.c2p_in,
            "c1p_out": self.c1p_out,
            "c2p_out": self.c2p_out,
            "p_growing": bool(self.p_growing),
            "boundary": bool(self.boundary),
        }


def resolution_project(m: MonadDatumP2, level, cfg: FlowConfig = FlowConfig(), trace_every: int = 1) -> ResolutionResult:
    """Follow a point of ``mu^-1(0, zeta)`` to the unperturbed level ``(0, 0)``.

    Regular orbits converge to a representative of the completed moduli space
    without perturbation. Orbits that are not closed show up as a flow that
    fails to converge (or escapes); such points and points violating C1'/C2'
    are flagged ``boundary``. ``|p(m_t)|`` is recorded along the way.
    """
    zeta = _level_of(m, level)
    off = level_residual_p2(m, zeta)
    if off > ON_LEVEL_ATOL:
        raise ValueError(f"datum is off the level set (residual {off:.3e})")
    c1_in, c2_in = check_c1p(m).verdict, check_c2p(m).verdict
    trace = [p_map(m).norm()]
    counter = {"n": 0}

    def record(x):
        counter["n"] += 1
        if counter["n"] % trace_every == 0:
            trace.append(p_map(x).norm())

    limit, report = kempf_ness_flow_p2(m, 0.0, cfg, on_accept=record)
    c1_out, c2_out = check_c1p(limit).verdict, check_c2p(limit).verdict
    tail = np.asarray(trace[-min(len(trace), 20):])
    growing = bool(tail.size > 2 and np.all(np.diff(tail) > 0))
    regular = c1_in is Verdict.HOLDS and c2_in is Verdict.HOLDS
    boundary = (not regular) or report.instability_flag or not report.converged
    return ResolutionResult(
        limit=limit,
        report=report,
        p_limit=p_map(limit),
        p_trace=trace,
        c1p_in=c1_in.value,
        c2p_in=c2_in.value,
        c1p_out=c1_out.value,
        c2p_out=c2_out.value,
        p_growing=growing,
        boundary=boundary,
    )


def boundedness_trace(m: MonadDatumP2, level) -> dict:
    """Norms bounded on the level set, with their two sum rules.

    ``|a1|^2 + |a2|^2 + |b|^2 = k`` and
    ``sum |d a_i|^2 + |c|^2 - |d|^2 = k (1 - zeta) - sum |a_i|^2``.
    """
    zeta = _level_of(m, level)
    off = level_residual_p2(m, zeta)
    if off > ON_LEVEL_ATOL:
        raise ValueError(f"datum is off the level set (residual {off:.3e})")
    n2 = lambda x: float(np.linalg.norm(x) ** 2)  # noqa: E731
    a1, a2, d, b, c = m.parts()
    mixed = n2(d @ a1) + n2(d @ a2) + n2(c) - n2(d)
    k = m.k
    return {
        "a1_sq": n2(a1),
        "a2_sq": n2(a2),
        "b_sq": n2(b),
        "mixed": mixed,
        "sum_rule_mu0": n2(a1) + n2(a2) + n2(b) - k,
        "sum_rule_mu1": mixed - (k * (1.0 - zeta) - n2(a1) - n2(a2)),
    }

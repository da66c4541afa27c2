import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adhm_kit.adhm_s4 import AdhmDatumS4, moment_s4
from adhm_kit.monad_p2 import moment_p2
from adhm_kit.moment_flow import FlowConfig, sample_on_level_p2, sample_on_level_s4
from adhm_kit.stab_limit import (
    SplitParams,
    constant_endpoint_p2,
    constant_endpoint_s4,
    default_split,
    embed_p2,
    embed_s4,
    homotopy_p2_h,
    homotopy_p2_htilde,
    homotopy_s4,
    verify_null_homotopy,
)

GRID = np.linspace(0, 1, 11)
TIGHT = FlowConfig(tol=1e-12)


def s4_sample(k, r, zeta, index=0):
    return sample_on_level_s4(k, r, zeta, 17, index, TIGHT)[0]


def p2_sample(k, r, zeta, index=0):
    return sample_on_level_p2(k, r, zeta, 17, index, TIGHT)[0]


def test_split_params():
    sp = default_split(0.5)
    assert sp.zeta_b == 1.0 and sp.zeta_c == 1.5 and sp.zeta == 0.5
    sp = default_split(-0.5)
    assert sp.zeta_b == 1.5 and sp.zeta_c == 1.0 and sp.zeta == -0.5
    with pytest.raises(ValueError):
        SplitParams(0.0, 1.0)


def test_embeddings():
    m = s4_sample(2, 2, 0.5)
    assert all(np.array_equal(p, q) for p, q in zip(embed_s4(m, 2).parts(), m.parts()))
    e = embed_s4(m, 5)
    assert e.r == 5 and np.all(e.b[:, 2:] == 0) and np.all(e.c[2:] == 0)
    assert np.array_equal(moment_s4(e), moment_s4(m))
    with pytest.raises(ValueError):
        embed_s4(m, 1)
    p = p2_sample(2, 2, 0.5)
    assert all(np.array_equal(x, y) for x, y in zip(embed_p2(p, 2).parts(), p.parts()))
    with pytest.raises(ValueError):
        embed_p2(p, 1)


def test_s4_homotopy_endpoints():
    m = s4_sample(2, 3, 0.5)
    sp = default_split(0.5)
    start = homotopy_s4(m, 0.0, zeta=0.5)
    assert all(np.array_equal(p, q) for p, q in zip(start.parts(), embed_s4(m, 7).parts()))
    end = homotopy_s4(m, 1.0, zeta=0.5)
    ref = constant_endpoint_s4(2, 3, sp)
    assert all(np.array_equal(p, q) for p, q in zip(end.parts(), ref.parts()))
    assert np.allclose(ref.b[:, -2:], np.sqrt(sp.zeta_b) * np.eye(2))
    assert np.allclose(ref.c[3:5], np.sqrt(sp.zeta_c) * np.eye(2))


def test_s4_homotopy_rejects_bad_input():
    m = s4_sample(1, 1, 0.5)
    with pytest.raises(ValueError):
        homotopy_s4(m, 0.5, SplitParams(1.0, 1.2), zeta=0.5)
    with pytest.raises(ValueError):
        homotopy_s4(m, 1.5, zeta=0.5)
    with pytest.raises(ValueError):
        homotopy_s4(m, 0.5, zeta=-0.5)  # off level
    with pytest.raises(ValueError):
        homotopy_s4(m, 0.5)


@settings(max_examples=15)
@given(st.integers(1, 3), st.integers(0, 2), st.sampled_from([0.5, -0.5, 0.2]), st.floats(0, 1), st.integers(0, 50))
def test_s4_level_preserved_for_every_t(k, extra, zeta, t, index):
    m = s4_sample(k, k + extra, zeta, index)
    x = homotopy_s4(m, t, zeta=zeta)
    assert np.linalg.norm(moment_s4(x) + zeta * np.eye(k)) <= 1e-10 * (1 + m.norm() ** 2)


def test_s4_endpoint_independent_of_datum():
    a = homotopy_s4(s4_sample(2, 2, 0.5, 0), 1.0, zeta=0.5)
    b = homotopy_s4(s4_sample(2, 2, 0.5, 1), 1.0, zeta=0.5)
    assert max(np.abs(p - q).max() for p, q in zip(a.parts(), b.parts())) <= 1e-12


def test_embedding_commutes_with_homotopy_blocks():
    m = s4_sample(2, 2, 0.5)
    t = 0.3
    direct = homotopy_s4(embed_s4(m, 4), t, zeta=0.5)
    then = homotopy_s4(m, t, zeta=0.5)
    # old r block, then two padding columns (zero), then the new k-blocks
    assert np.array_equal(direct.b[:, :2], then.b[:, :2])
    assert np.all(direct.b[:, 2:4] == 0)
    assert np.array_equal(direct.b[:, 4:], then.b[:, 2:])
    assert np.array_equal(direct.c[4:], then.c[2:])


def test_p2_h_endpoints():
    m = p2_sample(2, 2, 0.5)
    start = homotopy_p2_h(m, 0.0, 0.5)
    assert all(np.array_equal(p, q) for p, q in zip(start.parts(), embed_p2(m, 8).parts()))
    end = homotopy_p2_h(m, 1.0, 0.5)
    assert np.all(end.a1 == 0) and np.all(end.a2 == 0)
    assert np.array_equal(end.d, m.d)
    assert np.allclose(end.c[2:4], m.d.conj().T) and np.all(end.c[4:6] == 0)
    tilde0 = homotopy_p2_htilde(m, 0.0, 0.5)
    assert all(np.allclose(p, q) for p, q in zip(end.parts(), tilde0.parts()))
    tilde1 = homotopy_p2_htilde(m, 1.0, 0.5)
    assert all(np.array_equal(p, q) for p, q in zip(tilde1.parts(), constant_endpoint_p2(2, 2, 0.5).parts()))


@pytest.mark.parametrize("zeta", [0.5, 0.3, -0.4, 0.9])
def test_p2_paths_stay_on_level(zeta):
    m = p2_sample(2, 3, zeta)
    for t in GRID:
        for x in (homotopy_p2_h(m, t, zeta), homotopy_p2_htilde(m, t, zeta)):
            mu0, mu1 = moment_p2(x)
            res = np.hypot(np.linalg.norm(mu0), np.linalg.norm(mu1 - zeta * np.eye(2)))
            assert res <= 1e-10 * (1 + m.norm() ** 2)


def test_literal_scalar_only_works_at_half():
    # the block sqrt(t zeta) keeps mu1 = zeta only when zeta = 1 - zeta
    m = p2_sample(1, 1, 0.5)
    mu0, mu1 = moment_p2(homotopy_p2_h(m, 0.7, 0.5, literal=True))
    assert np.allclose(mu1, 0.5, atol=1e-10)
    m = p2_sample(1, 1, 0.3)
    mu0, mu1 = moment_p2(homotopy_p2_h(m, 1.0, 0.3, literal=True))
    assert abs(mu1[0, 0] - 0.3) > 0.1
    with pytest.raises(ValueError):
        homotopy_p2_h(p2_sample(1, 1, -0.4), 0.5, -0.4, literal=True)


def test_verify_report_s4():
    rep = verify_null_homotopy(s4_sample(2, 2, 0.5), "s4", GRID, 0.5)
    assert rep["max_level_residual"] <= rep["residual_bound"]
    assert rep["max_integrability_residual"] <= 1e-10
    assert rep["start_is_embedding"] and rep["endpoint_constancy"] == 0
    assert rep["regularity_failures"] == [] and rep["regularity_checks"] == 10
    for key in ("geometry", "zeta", "grid", "max_level_residual", "max_integrability_residual", "endpoint_constancy", "regularity_failures"):
        assert key in rep


@pytest.mark.parametrize("zeta", [0.5, -0.5])
def test_verify_report_p2(zeta):
    rep = verify_null_homotopy(p2_sample(2, 2, zeta), "p2", GRID, zeta)
    assert rep["max_level_residual"] <= rep["residual_bound"]
    assert rep["regularity_failures"] == [] and rep["unknown_verdicts"] == 0
    assert rep["endpoint_constancy"] == 0


def test_verify_rejects_bad_grid_and_geometry():
    m = s4_sample(1, 1, 0.5)
    with pytest.raises(ValueError):
        verify_null_homotopy(m, "s4", [0.2, 1.0], 0.5)
    with pytest.raises(ValueError):
        verify_null_homotopy(m, "cp2", GRID, 0.5)


def test_off_level_datum_rejected():
    m = AdhmDatumS4([[0]], [[0]], [[1.0]], [[0]])  # level zeta = -1
    with pytest.raises(ValueError):
        homotopy_s4(m, 0.5, zeta=0.5)

"""Invariant-subspace layer: primitive spaces, intertwiners, block catalog, duality.

Everything here compares at least two construction routes or checks a closed
scalar prediction against a matrix computation; nothing asserts a formula
against itself.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import heisenberg_hodge.decomposition as dec
import heisenberg_hodge.operators as op
from heisenberg_hodge.bargmann import ModelPoint

TOL = 1e-10
ROUTE_TOL = 1e-9
GAP_TOL = 2e-6   # subspace gaps go through SVD rank cuts, sqrt(eps) noise

PT1 = ModelPoint(1, 1.0, 8, 4)
PT2 = ModelPoint(2, 1.0, 8, 4)
PT2N = ModelPoint(2, -0.8, 8, 4)
PT3 = ModelPoint(3, 0.5, 6, 4)

POINTS = [PT1, PT2, PT2N]

BIDEGREES = {
    1: [(0, 0), (1, 0), (0, 1)],
    2: [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)],
    3: [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)],
}

# (p, q, l) slots with a nontrivial first- or second-order block somewhere
SLOTS_J1 = {
    1: [(0, 0, 0)],
    2: [(0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0)],
    3: [(0, 0, 0), (0, 0, 1), (0, 0, 2), (1, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 1)],
}
SLOTS_J2 = {
    2: [(0, 0, 0)],
    3: [(0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0)],
}


def _points_with(slots):
    out = []
    for pt in POINTS + [PT3]:
        for slot in slots.get(pt.n, []):
            out.append((pt, slot))
    return out


# --- primitive subspaces -------------------------------------------------------------------


@pytest.mark.parametrize("pt", POINTS)
def test_w0_two_routes_and_nontriviality(pt):
    for p, q in BIDEGREES[pt.n]:
        assert dec.w0_routes_gap(pt, p, q) < GAP_TOL, (p, q)
        w0 = dec.compute_W0(pt, p, q)
        assert (w0.rank > 0) == dec.w0_expected_nontrivial(pt, p, q), (p, q)


@pytest.mark.parametrize("pt", POINTS)
def test_w0_killed_by_curvature_contraction(pt):
    # T i(dtheta) = del* delbar* + delbar* del*, so W0 sits inside ker i(dtheta)
    for p, q in BIDEGREES[pt.n]:
        if p == 0 or q == 0:
            continue
        w0 = dec.compute_W0(pt, p, q)
        if w0.rank == 0:
            continue
        v = op.i_op(pt, ("pq", p, q)).mat @ w0.mat
        assert np.linalg.norm(v) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_c_projector_family(pt):
    n = pt.n
    cases = [((p, 0), True) for p in range(n + 1)] + [((0, q), False) for q in range(n + 1)]
    for (p, q), hol in cases:
        res = dec.c_projector_checks(pt, p, q, hol)
        for name, val in res.items():
            assert val < TOL, (p, q, hol, name, val)


# --- adjoint-differential exchange identities ----------------------------------------------


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J1))
def test_de_star_identities(pt, slot):
    p, q, ell = slot
    res = dec.de_star_residuals(pt, p, q, ell)
    for name, val in res.items():
        assert val < TOL, (slot, name, val)


@pytest.mark.parametrize("pt", POINTS)
def test_primitive_contraction_identities(pt):
    for s in range(pt.n):
        res = dec.primitive_contraction_residuals(pt, s)
        for name, val in res.items():
            assert val < TOL, (s, name, val)


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J2))
def test_second_order_contraction_identities(pt, slot):
    p, q, ell = slot
    res = dec.second_order_contraction_residuals(pt, p, q, ell)
    for name, val in res.items():
        assert val < TOL, (slot, name, val)


@given(n=st.integers(1, 10), s=st.integers(0, 10), jj=st.integers(1, 10))
@settings(max_examples=200, deadline=None)
def test_normalizer_constants_integer_relations(n, s, jj):
    if s > n or jj > n - s:
        return
    c = dec.c_const
    assert jj * jj * c(n, s + 1, jj - 1) == c(n, s, jj) - c(n, s + 1, jj)
    assert c(n, s, jj) * (n - s - jj) == c(n, s + 1, jj) * (n - s)
    assert jj * c(n, s + 1, jj - 1) * (n - s - jj) == c(n, s + 1, jj)


# --- closed scalar layer -------------------------------------------------------------------


@given(
    n=st.integers(1, 6),
    p=st.integers(0, 6),
    q=st.integers(0, 6),
    lam=st.floats(0.1, 3.0),
    neg=st.booleans(),
    j=st.integers(0, 40),
)
@settings(max_examples=300, deadline=None)
def test_first_order_factor_products(n, p, q, lam, neg, j):
    """The four spectral factors multiply back to the bidegree Laplacians."""
    if p + q > n:
        return
    pt = ModelPoint(n, -lam if neg else lam, 6, 3)
    sc = dec.slot_scalars(pt, p, q, np.array([j], dtype=float))
    qe = dec.q_entries(pt, p, q, np.array([j], dtype=float))
    scale = max(1.0, abs(sc["dh"][0]))
    assert abs(qe[(+1, +1)][0] * qe[(-1, -1)][0] - 2 * sc["b"][0]) < 1e-9 * scale
    assert abs(qe[(+1, -1)][0] * qe[(-1, +1)][0] - 2 * sc["bb"][0]) < 1e-9 * scale
    assert abs(sc["b"][0] + sc["m"] * sc["lam"] - sc["dh"][0] / 2) < 1e-9 * scale
    assert abs(sc["bb"][0] - sc["m"] * sc["lam"] - sc["dh"][0] / 2) < 1e-9 * scale


@pytest.mark.parametrize("pt", POINTS + [PT3])
def test_q_scalar_identities(pt):
    for p, q in BIDEGREES.get(pt.n, [(0, 0)])[:4]:
        res = dec.q_scalar_checks(pt, p, q, 8)
        for name, val in res.items():
            assert val < 1e-8, (p, q, name, val)


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J1))
def test_first_order_gram_scalars(pt, slot):
    p, q, ell = slot
    if dec.c_const(pt.n, p + q + 1, ell) == 0:
        return
    res = dec.gram_j1_scalar_checks(pt, p, q, ell, 8)
    assert res["congruence"] < 1e-8
    assert res["offdiag"] < 1e-8
    assert res["det_factorization"] < 1e-6   # degree-8 entries reach 1e6
    assert res["r11_positive"]
    assert res["r22_zero_pattern_ok"]


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J2))
def test_second_order_gram_scalars(pt, slot):
    p, q, ell = slot
    res = dec.gram_j2_scalar_checks(pt, p, q, ell, 8)
    for name, val in res.items():
        assert val < 1e-7, (slot, name, val)


# --- block maps and their Grams ------------------------------------------------------------


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J1))
def test_first_order_map_routes_and_gram(pt, slot):
    p, q, ell = slot
    if dec.c_const(pt.n, p + q + 1, ell) == 0:
        return
    assert dec.a_routes_gap(pt, p, q, ell, 1) < TOL
    assert dec.gram_j1_residual(pt, p, q, ell) < TOL


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J2))
def test_second_order_map_routes_and_gram(pt, slot):
    p, q, ell = slot
    assert dec.a_routes_gap(pt, p, q, ell, 2) < TOL
    assert dec.gram_j2_residual(pt, p, q, ell) < TOL


# --- intertwiners --------------------------------------------------------------------------


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J1))
def test_first_order_unitaries(pt, slot):
    p, q, ell = slot
    if dec.c_const(pt.n, p + q + 1, ell) == 0:
        return
    res = dec.u1_checks(pt, p, q, ell)
    if not res:
        return
    for name, val in res.items():
        assert val < ROUTE_TOL, (slot, name, val)


@pytest.mark.parametrize("pt,slot", _points_with(SLOTS_J2))
def test_second_order_unitary(pt, slot):
    p, q, ell = slot
    res = dec.u2_checks(pt, p, q, ell)
    if not res:
        return
    for name, val in res.items():
        assert val < ROUTE_TOL, (slot, name, val)


@pytest.mark.parametrize("pt", POINTS)
def test_completion_operator(pt):
    for k in range(0, pt.n + 1):
        res = dec.completion_operator_checks(pt, k)
        for name, val in res.items():
            assert val < TOL, (k, name, val)


# --- degree-level factors ------------------------------------------------------------------


@pytest.mark.parametrize("pt", [PT1, PT2, PT2N])
def test_riesz_factor_identities(pt):
    for k in range(0, 2 * pt.n + 1):
        res = dec.riesz_checks(pt, k)
        for name, val in res.items():
            assert val < 1e-8, (k, name, val)


@pytest.mark.parametrize("pt", [PT1, PT2, PT2N])
def test_functional_calculus_two_routes(pt):
    for k in range(0, 2 * pt.n + 2):
        assert dec.functional_calculus_routes_gap(pt, k) < 1e-8, k


# --- the catalog ---------------------------------------------------------------------------


@pytest.mark.parametrize("pt", [PT1, PT2, PT2N])
def test_block_catalog_all_degrees(pt):
    for k in range(0, 2 * pt.n + 2):
        res = dec.catalog_checks(pt, k)
        assert res["eigen"] < TOL, k
        assert res["orthonormal"] < TOL, k
        assert res["cross_orthogonal"] < 1e-8, k
        assert res["completeness_deficiency"] < 1e-8, k
        assert res["eigh_forward"] < 1e-8, k
        assert res["eigh_backward"] < 1e-8, k
        if "fresh_coexact_free" in res:
            assert res["fresh_coexact_free"] < TOL, k


@pytest.mark.parametrize("pt", [PT1, PT2, PT2N])
def test_spectrum_positive_and_star_verbatim(pt):
    d = 2 * pt.n + 1
    for k in range(0, d + 1):
        mus = np.concatenate([blk.mu for blk in dec.any_catalog(pt, k)])
        assert mus.size and mus.min() > 0.0, k
        dual = np.concatenate([blk.mu for blk in dec.any_catalog(pt, d - k)])
        assert np.allclose(np.sort(mus), np.sort(dual), rtol=0, atol=0), k


@pytest.mark.parametrize("pt", [PT2, PT2N])
def test_dual_direct_routes(pt):
    for k in range(pt.n + 1, 2 * pt.n + 2):
        res = dec.dual_direct_gaps(pt, k)
        for name, val in res.items():
            assert val < GAP_TOL, (k, name, val)


@pytest.mark.parametrize("pt", POINTS)
def test_star_unitary_and_conjugation(pt):
    for k in range(0, 2 * pt.n + 2):
        assert dec.star_unitarity_residual(pt, k) < TOL, k
        assert dec.star_conjugation_residual(pt, k) < TOL, k


@pytest.mark.parametrize("pt", POINTS)
def test_riesz_star_duality(pt):
    for k in range(0, 2 * pt.n + 1):
        assert dec.riesz_star_duality_residual(pt, k) < 1e-6, k


def test_riesz_star_duality_sign_matters():
    # dropping the alternation (uniform minus sign) breaks every odd degree
    pt = PT1
    k = 1
    m = 2 * pt.n - k
    lhs = op.star_op(pt, m + 1).mat @ dec.riesz_full(pt, m)
    rhs = -dec.riesz_full(pt, k).conj().T @ op.star_op(pt, m).mat.toarray()
    idx = np.nonzero(dec.buffered_probe_mask(pt, m))[0]
    bad = np.linalg.norm(np.asarray(lhs[:, idx]) - rhs[:, idx])
    assert bad > 0.5


# --- horizontal strata ---------------------------------------------------------------------


@pytest.mark.parametrize("pt", [PT2, PT2N])
def test_w_stratum_nontriviality_table(pt):
    n = pt.n
    for p in range(n + 1):
        for q in range(n + 1):
            for j in (1, 2):
                for ell in range(n + 1):
                    got = dec.assemble_w_stratum(pt, j, p, q, ell)
                    want = dec.w_stratum_expected_nontrivial(n, j, p, q, ell)
                    assert (got.rank > 0) == want, (p, q, j, ell, got.rank)


@pytest.mark.parametrize("pt,slot", [(PT2, (0, 0, 1)), (PT2N, (1, 0, 0)), (PT3, (1, 1, 0))])
def test_w_stratum_second_order_boundary_tail(pt, slot):
    # one step past the guard the raw span is exactly the (l+1)-st curvature
    # power of W0: nonzero, and entirely outside the primitive cone
    p, q, ell = slot
    assert not dec.w_stratum_expected_nontrivial(pt.n, 2, p, q, ell)
    k = p + q + 2 + 2 * ell
    raw = dec.assemble_w_stratum(pt, 2, p, q, ell, raw=True)
    assert raw.rank > 0
    assert dec.assemble_w_stratum(pt, 2, p, q, ell).rank == 0
    w0 = dec.compute_W0(pt, p, q)
    word = op.embed_op(pt, op.form_space(pt, "pq", p + ell + 1, q + ell + 1),
                       op.form_space(pt, "hk", k)) @ op.e_power_op(pt, ("pq", p, q), ell + 1)
    assert dec.subspace_gap(raw.mat, word.mat @ w0.mat) < 1e-6
    assert np.linalg.norm(op.i_op(pt, ("hk", k)).mat @ raw.mat) > 1.0


@pytest.mark.parametrize("pt", [PT2, PT2N])
def test_w_stratum_base_level_is_primitive(pt):
    for p, q in [(0, 0), (1, 0), (0, 1)]:
        for j in (1, 2):
            st = dec.assemble_w_stratum(pt, j, p, q, 0, raw=True)
            if st.rank == 0:
                continue
            k = p + q + j
            if j == 1:
                v = op.i_op(pt, ("hk", k)).mat @ st.mat
                assert np.linalg.norm(v) < TOL, (p, q)
            else:
                # second order: contraction lands back in W0, not at zero
                img = op.i_op(pt, ("hk", k)).mat @ st.mat
                w0 = dec.compute_W0(pt, p, q)
                emb = op.embed_op(pt, op.form_space(pt, "pq", p, q),
                                  op.form_space(pt, "hk", k - 2))
                assert dec.containment_gap(img, emb.mat @ w0.mat) < 1e-8, (p, q)


@pytest.mark.parametrize("pt", [PT2, PT2N])
def test_w_strata_mutually_orthogonal_within_horizontal_degree(pt):
    n = pt.n
    for k in range(0, n + 1):
        pieces = []
        for p in range(0, k + 1):
            q = k - p
            if max(p, q) <= n:
                w0 = dec.compute_W0(pt, p, q)
                if w0.rank:
                    emb = op.embed_op(pt, op.form_space(pt, "pq", p, q),
                                      op.form_space(pt, "hk", k))
                    pieces.append(("W0", p, q, 0, emb.mat @ w0.mat))
        for j in (1, 2):
            for ell in range(0, n + 1):
                s = k - j - 2 * ell
                if s < 0:
                    continue
                for p in range(0, s + 1):
                    st = dec.assemble_w_stratum(pt, j, p, s - p, ell)
                    if st.rank:
                        pieces.append((f"W{j}", p, s - p, ell, st.mat))
        for i in range(len(pieces)):
            for jdx in range(i + 1, len(pieces)):
                cross = np.abs(pieces[i][4].conj().T @ pieces[jdx][4]).max()
                assert cross < 1e-9, (k, pieces[i][:4], pieces[jdx][:4], cross)

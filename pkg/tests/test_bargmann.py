"""Representation matrices and the truncation contract."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import heisenberg_hodge.bargmann as bg
from heisenberg_hodge.bargmann import (
    BudgetExceeded,
    GradedOperator,
    ModelPoint,
    buffered_residual,
    monomial_norm,
    rep_L,
    rep_T,
    rep_Z,
    rep_Zbar,
    truncated_fock,
)


def test_monomial_norm_against_radial_quadrature():
    # ||w^a||^2 over one variable = 2 pi int_0^inf r^(2a+1) exp(-r^2/2) dr
    for a in range(6):
        val, err = scipy.integrate.quad(lambda r: r ** (2 * a + 1) * math.exp(-(r**2) / 2), 0, 30)
        assert abs(2 * math.pi * val - monomial_norm((a,)) ** 2) < 1e-8 * monomial_norm((a,)) ** 2
    # multivariable norms factor
    assert np.isclose(monomial_norm((2, 3)), monomial_norm((2,)) * monomial_norm((3,)))


def test_norm_ratio_ladder_amplitude():
    for a in range(5):
        ratio = monomial_norm((a + 1,)) / monomial_norm((a,))
        assert np.isclose(ratio, math.sqrt(2 * (a + 1)))


def test_fock_ordering_graded_then_lex():
    f = truncated_fock(2, 4)
    # dimension: multiindices with |a| <= N in n vars
    assert f.dim == math.comb(2 + 4, 2)
    degs = f.degrees
    assert (np.diff(degs) >= 0).all()
    for d in range(5):
        block = [a for a in f.multiindices if sum(a) == d]
        assert block == sorted(block)
    for a in f.multiindices:
        assert f.multiindices[f.index[a]] == a


@pytest.mark.parametrize("lam", [0.7, -1.3])
def test_ladder_entries_match_closed_form(lam):
    pt = ModelPoint(2, lam, max_degree=5, buffer=2)
    f = pt.fock
    Z1 = bg.fock_Z(pt, 1).toarray()
    Zb1 = bg.fock_Zbar(pt, 1).toarray()
    for j, a in enumerate(f.multiindices):
        col = Z1[:, j]
        if lam > 0:
            # lowers: amplitude sqrt(lam * a_1)
            if a[0] == 0:
                assert not col.any()
            else:
                tgt = f.index[(a[0] - 1, a[1])]
                assert np.isclose(col[tgt], math.sqrt(lam * a[0]))
                assert np.count_nonzero(col) == 1
        else:
            if sum(a) == f.max_degree:
                assert not col.any()
            else:
                tgt = f.index[(a[0] + 1, a[1])]
                assert np.isclose(col[tgt], -math.sqrt(-lam * (a[0] + 1)))
        colb = Zb1[:, j]
        if lam > 0:
            if sum(a) == f.max_degree:
                assert not colb.any()
            else:
                tgt = f.index[(a[0] + 1, a[1])]
                assert np.isclose(colb[tgt], -math.sqrt(lam * (a[0] + 1)))
        else:
            if a[0] == 0:
                assert not colb.any()
            else:
                tgt = f.index[(a[0] - 1, a[1])]
                assert np.isclose(colb[tgt], math.sqrt(-lam * a[0]))


@pytest.mark.parametrize("lam", [1.0, -0.6])
def test_adjoint_pairs_and_brackets(lam):
    pt = ModelPoint(2, lam, max_degree=6, buffer=3)
    I = bg.identity_operator(rep_T(pt).dom)
    for ell in (1, 2):
        z, zb = rep_Z(pt, ell), rep_Zbar(pt, ell)
        # formal adjoint: Z* = -Zbar, exactly in the truncated matrices
        assert (z.H.mat - (-1.0 * zb).mat).nnz == 0
        # center bracket [Z_l, Zbar_l] = -lam (= i T with T = i lam times identity)
        assert buffered_residual(z @ zb - zb @ z, -lam * I) < 1e-14
    z1, z2 = rep_Z(pt, 1), rep_Z(pt, 2)
    zb2 = rep_Zbar(pt, 2)
    assert buffered_residual(z1 @ z2 - z2 @ z1, 0.0 * I) < 1e-14
    assert buffered_residual(z1 @ zb2 - zb2 @ z1, 0.0 * I) < 1e-14


@pytest.mark.parametrize("lam", [0.9, -2.0])
def test_sublaplacian_diagonal(lam):
    pt = ModelPoint(2, lam, max_degree=6, buffer=3)
    from heisenberg_hodge.operators import l_comp_op, l_diag_op

    lc = l_comp_op(pt)
    ld = l_diag_op(lc.dom)
    assert buffered_residual(lc, ld) < 1e-13
    # eigenvalues |lam| (2j + n) on degree-j monomials
    degs = lc.dom.degrees()
    assert np.allclose(ld.mat.diagonal(), abs(lam) * (2 * degs + 2))


def test_graded_metadata_composition():
    pt = ModelPoint(1, 1.0, max_degree=6, buffer=2)
    z, zb = rep_Z(pt, 1), rep_Zbar(pt, 1)
    assert (z.lo, z.hi, z.peak, z.copeak) == (-1, -1, 0, 1)
    assert (zb.lo, zb.hi, zb.peak, zb.copeak) == (1, 1, 1, 0)
    w = z @ zb  # raise then lower: needs one spare level
    assert (w.lo, w.hi, w.peak) == (0, 0, 1)
    w2 = z @ z @ zb @ zb
    assert w2.peak == 2
    assert w2.H.peak == w2.copeak
    # adjoint flips the envelope
    assert (zb.H.lo, zb.H.hi) == (-1, -1)


def test_budget_refusal_is_raised_not_weakened():
    pt = ModelPoint(1, 1.0, max_degree=6, buffer=1)
    z, zb = rep_Z(pt, 1), rep_Zbar(pt, 1)
    w = z @ z @ zb @ zb  # peak 2 > buffer 1
    with pytest.raises(BudgetExceeded):
        buffered_residual(w, w)
    # same word fits once the buffer allows it
    pt2 = ModelPoint(1, 1.0, max_degree=6, buffer=2)
    z2, zb2 = rep_Z(pt2, 1), rep_Zbar(pt2, 1)
    assert buffered_residual(z2 @ z2 @ zb2 @ zb2, z2 @ z2 @ zb2 @ zb2) == 0.0


word_st = st.lists(st.sampled_from(["Z1", "Zb1", "Z2", "Zb2"]), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(word_st, st.sampled_from([1.0, -1.0]))
def test_truncation_contract_against_larger_model(word, lam):
    # a word applied inside the buffered window agrees with a bigger cutoff
    small = ModelPoint(2, lam, max_degree=6, buffer=4)
    big = ModelPoint(2, lam, max_degree=10, buffer=4)

    def build(pt):
        ops = {"Z1": rep_Z(pt, 1), "Zb1": rep_Zbar(pt, 1), "Z2": rep_Z(pt, 2), "Zb2": rep_Zbar(pt, 2)}
        out = ops[word[0]]
        for w in word[1:]:
            out = ops[w] @ out
        return out

    ws, wb = build(small), build(big)
    if ws.peak > small.buffer:
        return  # outside the contract, nothing is claimed
    fs, fb = small.fock, big.fock
    # compare columns from monomials inside the buffered window
    for j, a in enumerate(fs.multiindices):
        if fs.degrees[j] > small.max_degree - small.buffer:
            continue
        cs = ws.mat[:, j].toarray().ravel()
        cb = wb.mat[:, fb.index[a]].toarray().ravel()
        # align by multiindex
        for i, b in enumerate(fs.multiindices):
            assert np.isclose(cs[i], cb[fb.index[b]], atol=1e-12)


def test_space_masks_and_pair_layout():
    from heisenberg_hodge.operators import form_space, pair_space

    pt = ModelPoint(2, 1.0, max_degree=5, buffer=2)
    s = form_space(pt, "pq", 1, 1)
    assert s.dim == 4 * pt.fock.dim
    m = s.buffered_mask()
    assert m.sum() == 4 * (s.fock.degrees <= 3).sum()
    ps = pair_space(s)
    assert ps.dim == 2 * s.dim
    assert ps.degrees().shape == (ps.dim,)
    pv = s.form_values(lambda b: b.p)
    assert set(pv.tolist()) == {1.0}

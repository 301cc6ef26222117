"""Exact operator identities of the horizontal complex, on buffered columns.

Every check here is an algebraic identity of the model, so residuals sit at
machine precision; the asserted 1e-10 is the certification threshold, not an
accuracy estimate.
"""

import numpy as np
import pytest

import heisenberg_hodge.bargmann as bg
from heisenberg_hodge import operators as op
from heisenberg_hodge.bargmann import ModelPoint, buffered_residual

POINTS = [
    ModelPoint(1, 1.0, max_degree=6, buffer=3),
    ModelPoint(2, 1.0, max_degree=6, buffer=3),
    ModelPoint(2, -0.8, max_degree=6, buffer=3),
    ModelPoint(3, 0.5, max_degree=5, buffer=3),
]

TOL = 1e-10


def pq_kinds(pt):
    return [(p, q) for p in range(pt.n + 1) for q in range(pt.n + 1)]


def DEL(pt, p, q):
    return op.del_op(pt, ("pq", p, q))


def DBAR(pt, p, q):
    return op.delbar_op(pt, ("pq", p, q))


def E(pt, p, q):
    return op.e_op(pt, ("pq", p, q))


def I_(pt, p, q):
    return op.i_op(pt, ("pq", p, q))


def T(pt, p, q):
    return op.t_op(op.form_space(pt, "pq", p, q))


@pytest.mark.parametrize("pt", POINTS)
def test_differentials_square_to_zero(pt):
    for p, q in pq_kinds(pt):
        d2 = DEL(pt, p + 1, q) @ DEL(pt, p, q)
        assert buffered_residual(d2, 0.0 * d2) < TOL
        db2 = DBAR(pt, p, q + 1) @ DBAR(pt, p, q)
        assert buffered_residual(db2, 0.0 * db2) < TOL
        ds2 = DEL(pt, p - 1, q).H @ DEL(pt, p, q).H
        assert buffered_residual(ds2, 0.0 * ds2) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_mixed_anticommutators_give_curvature(pt):
    # del delbar + delbar del = -T e(dtheta); adjoint version = T i(dtheta)
    for p, q in pq_kinds(pt):
        a = DBAR(pt, p + 1, q) @ DEL(pt, p, q) + DEL(pt, p, q + 1) @ DBAR(pt, p, q)
        rhs = -1.0 * (T(pt, p + 1, q + 1) @ E(pt, p, q))
        assert buffered_residual(a, rhs) < TOL
        # adjoint identity on (p+1,q+1) -> (p,q): delbar* del* + del* delbar* = T i(dtheta)
        lhs = DBAR(pt, p, q).H @ DEL(pt, p, q + 1).H + DEL(pt, p, q).H @ DBAR(pt, p + 1, q).H
        rhs2 = T(pt, p, q) @ I_(pt, p + 1, q + 1)
        assert buffered_residual(lhs, rhs2) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_mixed_adjoint_anticommutators_vanish(pt):
    # del delbar* = -delbar* del and del* delbar = -delbar del*
    for p, q in pq_kinds(pt):
        # both (p,q) -> (p+1,q-1)
        lhs = DEL(pt, p, q - 1) @ DBAR(pt, p, q - 1).H
        rhs = -1.0 * (DBAR(pt, p + 1, q - 1).H @ DEL(pt, p, q))
        assert buffered_residual(lhs, rhs) < TOL
        # both (p,q) -> (p-1,q+1)
        lhs = DEL(pt, p - 1, q + 1).H @ DBAR(pt, p, q)
        rhs = -1.0 * (DBAR(pt, p - 1, q) @ DEL(pt, p - 1, q).H)
        assert buffered_residual(lhs, rhs) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_curvature_brackets_with_differentials(pt):
    for p, q in pq_kinds(pt):
        # [i(dtheta), del] = -i delbar*, both (p,q) -> (p,q-1)
        lhs = I_(pt, p + 1, q) @ DEL(pt, p, q) - DEL(pt, p - 1, q - 1) @ I_(pt, p, q)
        rhs = -1j * DBAR(pt, p, q - 1).H
        assert buffered_residual(lhs, rhs) < TOL
        # [i(dtheta), delbar] = i del*, both (p,q) -> (p-1,q)
        lhs = I_(pt, p, q + 1) @ DBAR(pt, p, q) - DBAR(pt, p - 1, q - 1) @ I_(pt, p, q)
        rhs = 1j * DEL(pt, p - 1, q).H
        assert buffered_residual(lhs, rhs) < TOL
        # [del*, e(dtheta)] = i delbar, both (p,q) -> (p,q+1)
        lhs = DEL(pt, p, q + 1).H @ E(pt, p, q) - E(pt, p - 1, q) @ DEL(pt, p - 1, q).H
        rhs = 1j * DBAR(pt, p, q)
        assert buffered_residual(lhs, rhs) < TOL
        # [delbar*, e(dtheta)] = -i del, both (p,q) -> (p+1,q)
        lhs = DBAR(pt, p + 1, q).H @ E(pt, p, q) - E(pt, p, q - 1) @ DBAR(pt, p, q - 1).H
        rhs = -1j * DEL(pt, p, q)
        assert buffered_residual(lhs, rhs) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_vanishing_curvature_brackets(pt):
    for p, q in pq_kinds(pt):
        # [i, del*] on (p,q) -> (p-2,q-1)
        z1 = I_(pt, p - 1, q) @ DEL(pt, p - 1, q).H - DEL(pt, p - 2, q - 1).H @ I_(pt, p, q)
        assert buffered_residual(z1, 0.0 * z1) < TOL
        # [i, delbar*] on (p,q) -> (p-1,q-2)
        z2 = I_(pt, p, q - 1) @ DBAR(pt, p, q - 1).H - DBAR(pt, p - 1, q - 2).H @ I_(pt, p, q)
        assert buffered_residual(z2, 0.0 * z2) < TOL
        z3 = DEL(pt, p + 1, q + 1) @ E(pt, p, q) - E(pt, p + 1, q) @ DEL(pt, p, q)
        assert buffered_residual(z3, 0.0 * z3) < TOL
        z4 = DBAR(pt, p + 1, q + 1) @ E(pt, p, q) - E(pt, p, q + 1) @ DBAR(pt, p, q)
        assert buffered_residual(z4, 0.0 * z4) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_adjoint_differentials_match_coefficient_formulas(pt):
    for p, q in pq_kinds(pt):
        a = DEL(pt, p - 1, q).H
        b = op.del_star_explicit(pt, p, q)
        assert (a.mat - b.mat).nnz == 0 or abs((a.mat - b.mat)).max() < 1e-14
        a = DBAR(pt, p, q - 1).H
        b = op.delbar_star_explicit(pt, p, q)
        assert (a.mat - b.mat).nnz == 0 or abs((a.mat - b.mat)).max() < 1e-14


@pytest.mark.parametrize("pt", POINTS)
def test_bidegree_laplacians_composed_vs_closed_diagonal(pt):
    for p, q in pq_kinds(pt):
        s = op.form_space(pt, "pq", p, q)
        if s.nforms == 0:
            continue
        assert buffered_residual(op.box_op(pt, p, q), op.box_diag(s)) < TOL
        assert buffered_residual(op.boxbar_op(pt, p, q), op.boxbar_diag(s)) < TOL
        tot = op.box_op(pt, p, q) + op.boxbar_op(pt, p, q)
        assert buffered_residual(tot, op.delta_h_diag(s)) < TOL
        # difference of the two is a multiple of T fixed by the codegree
        k = p + q
        diff = op.box_op(pt, p, q) - op.boxbar_op(pt, p, q)
        want = bg.diagonal_operator(s, 1j * (pt.n - k) * (1j * pt.lam))
        assert buffered_residual(diff, want) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_horizontal_laplacian_on_degree_spaces(pt):
    for k in range(2 * pt.n + 1):
        s = op.form_space(pt, "hk", k)
        if s.nforms == 0:
            continue
        assert buffered_residual(op.delta_h_comp(pt, k), op.delta_h_diag(s)) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_laplacian_commutation_with_differentials(pt):
    lam = pt.lam
    for p, q in pq_kinds(pt):
        s_up_q = op.form_space(pt, "pq", p, q + 1)
        s = op.form_space(pt, "pq", p, q)
        if s.nforms == 0:
            continue
        iT = 1j * (1j * lam)
        # box delbar = delbar (box - iT)
        lhs = op.box_op(pt, p, q + 1) @ DBAR(pt, p, q)
        rhs = DBAR(pt, p, q) @ (op.box_op(pt, p, q) - bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL
        # box delbar* = delbar* (box + iT)
        lhs = op.box_op(pt, p, q - 1) @ DBAR(pt, p, q - 1).H
        rhs = DBAR(pt, p, q - 1).H @ (op.box_op(pt, p, q) + bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL
        # boxbar del = del (boxbar + iT)
        lhs = op.boxbar_op(pt, p + 1, q) @ DEL(pt, p, q)
        rhs = DEL(pt, p, q) @ (op.boxbar_op(pt, p, q) + bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL
        # boxbar del* = del* (boxbar - iT)
        lhs = op.boxbar_op(pt, p - 1, q) @ DEL(pt, p - 1, q).H
        rhs = DEL(pt, p - 1, q).H @ (op.boxbar_op(pt, p, q) - bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_curvature_wedge_shifts_laplacians(pt):
    lam = pt.lam
    for p, q in pq_kinds(pt):
        s = op.form_space(pt, "pq", p, q)
        if s.nforms == 0:
            continue
        iT = 1j * (1j * lam)
        e = E(pt, p, q)
        lhs = op.box_op(pt, p + 1, q + 1) @ e
        rhs = e @ (op.box_op(pt, p, q) - bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL
        lhs = op.boxbar_op(pt, p + 1, q + 1) @ e
        rhs = e @ (op.boxbar_op(pt, p, q) + bg.diagonal_operator(s, iT))
        assert buffered_residual(lhs, rhs) < TOL
        lhs = (op.box_op(pt, p + 1, q + 1) + op.boxbar_op(pt, p + 1, q + 1)) @ e
        rhs = e @ (op.box_op(pt, p, q) + op.boxbar_op(pt, p, q))
        assert buffered_residual(lhs, rhs) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_adjoint_commutators_with_curvature_powers(pt):
    # [del*, e^l] = i l delbar e^(l-1)  and  [delbar*, e^l] = -i l del e^(l-1)
    for ell in (1, 2):
        for p, q in pq_kinds(pt):
            e_l = op.e_power_op(pt, ("pq", p, q), ell)
            e_lm1 = op.e_power_op(pt, ("pq", p, q), ell - 1)
            # [del*, e^l] on (p,q) -> (p+l-1, q+l)
            lhs = DEL(pt, p + ell - 1, q + ell).H @ e_l - op.e_power_op(pt, ("pq", p - 1, q), ell) @ DEL(pt, p - 1, q).H
            rhs = (1j * ell) * (DBAR(pt, p + ell - 1, q + ell - 1) @ e_lm1)
            assert buffered_residual(lhs, rhs) < TOL
            # [delbar*, e^l] on (p,q) -> (p+l, q+l-1)
            lhs2 = DBAR(pt, p + ell, q + ell - 1).H @ e_l - op.e_power_op(pt, ("pq", p, q - 1), ell) @ DBAR(pt, p, q - 1).H
            rhs2 = (-1j * ell) * (DEL(pt, p + ell - 1, q + ell - 1) @ e_lm1)
            assert buffered_residual(lhs2, rhs2) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_contraction_commutators_with_differentials(pt):
    # [del, i^l] = i l delbar* i^(l-1)  and  [delbar, i^l] = -i l del* i^(l-1)
    def ipow(kind, ell):
        out = bg.identity_operator(op.space_for(pt, kind))
        cur = kind
        for _ in range(ell):
            out = op.i_op(pt, cur) @ out
            cur = op.shifted_kind(cur, -1, -1)
        return out

    for ell in (1, 2):
        for p, q in pq_kinds(pt):
            i_l = ipow(("pq", p, q), ell)
            i_lm1 = ipow(("pq", p, q), ell - 1)
            # [del, i^l] on (p,q) -> (p-l+1, q-l)
            lhs = DEL(pt, p - ell, q - ell) @ i_l - ipow(("pq", p + 1, q), ell) @ DEL(pt, p, q)
            rhs = (1j * ell) * (DBAR(pt, p - ell + 1, q - ell).H @ i_lm1)
            assert buffered_residual(lhs, rhs) < TOL
            # [delbar, i^l] on (p,q) -> (p-l, q-l+1)
            lhs2 = DBAR(pt, p - ell, q - ell) @ i_l - ipow(("pq", p, q + 1), ell) @ DBAR(pt, p, q)
            rhs2 = (-1j * ell) * (DEL(pt, p - ell, q - ell + 1).H @ i_lm1)
            assert buffered_residual(lhs2, rhs2) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_full_differential_squares_to_zero_and_adjoint_blocks(pt):
    d = 2 * pt.n + 1
    for k in range(d):
        sq = op.d_full_op(pt, k + 1) @ op.d_full_op(pt, k)
        assert buffered_residual(sq, 0.0 * sq) < TOL
    for k in range(1, d + 1):
        a = op.d_full_op(pt, k - 1).H
        b = op.d_full_star_blocks(pt, k)
        assert buffered_residual(a, b) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_degree_laplacian_routes_agree_and_commute_with_d(pt):
    d = 2 * pt.n + 1
    for k in range(d + 1):
        A = op.delta_op(pt, k)
        B = op.delta_blocks_op(pt, k)
        assert buffered_residual(A, B) < TOL
    for k in range(d):
        dk = op.d_full_op(pt, k)
        lhs = op.delta_op(pt, k + 1) @ dk
        rhs = dk @ op.delta_op(pt, k)
        assert buffered_residual(lhs, rhs) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_codifferential_via_star_conjugation(pt):
    d = 2 * pt.n + 1
    for k in range(1, d + 1):
        dstar = op.d_full_op(pt, k - 1).H
        comp = op.star_op(pt, d - k + 1) @ op.d_full_op(pt, d - k) @ op.star_op(pt, k)
        assert buffered_residual(dstar, ((-1.0) ** k) * comp) < TOL


@pytest.mark.parametrize("pt", POINTS)
def test_star_intertwines_degree_laplacians(pt):
    d = 2 * pt.n + 1
    for k in range(d + 1):
        s = op.star_op(pt, k)
        assert buffered_residual(s @ op.delta_op(pt, k), op.delta_op(pt, d - k) @ s) < TOL
        uni = s.H @ s
        assert buffered_residual(uni, bg.identity_operator(s.dom)) < TOL

"""Structure operators of the horizontal complex as graded matrices.

Form-level combinatorics (exterior.py) tensored against ladder matrices
(bargmann.py), combined index = iform * nfock + jfock.  Every operator that
the verification layer certifies is available through two independent code
paths, e.g. generator sums vs displayed coefficient loops for the adjoint
differentials, block assembly vs composition for the degree-k Laplacian, and
composition vs closed diagonal form for the bidegree Laplacians.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import exterior as ext
from .bargmann import (
    GradedOperator,
    ModelPoint,
    Space,
    diagonal_operator,
    fock_Z,
    fock_Zbar,
    fock_shift_Z,
    identity_operator,
    scalar_diagonal,
    zero_operator,
)


@lru_cache(maxsize=None)
def form_space(point: ModelPoint, kind: str, a: int | None = None, b: int | None = None) -> Space:
    n = point.n
    if kind == "pq":
        return Space(point, ("pq", a, b), ext.bidegree_basis(n, a, b))
    if kind == "hk":
        return Space(point, ("hk", a), ext.horizontal_basis(n, a))
    if kind == "full":
        return Space(point, ("full", a), ext.full_basis(n, a))
    if kind == "bundle":
        return Space(point, ("bundle",), ext.bundle_basis(n))
    raise ValueError(f"unknown space kind {kind!r}")


def space_for(point: ModelPoint, kind: tuple) -> Space:
    return form_space(point, *kind)


def pair_space(inner: Space) -> Space:
    """Two stacked copies of inner (parameter-pair domains)."""
    return Space(inner.point, ("pair",) + inner.kind, inner.forms, copies=2)


def shifted_kind(kind: tuple, dp: int, dq: int) -> tuple:
    if kind[0] == "pq":
        return ("pq", kind[1] + dp, kind[2] + dq)
    if kind[0] in ("hk", "full"):
        return (kind[0], kind[1] + dp + dq)
    raise ValueError(f"cannot shift kind {kind!r}")


def _form_matrix_wedge(gen: ext.FormBasisElement, forms_in, forms_out) -> sp.csr_matrix:
    """Left wedge by a single generator as a form-level matrix."""
    index_out = {m: i for i, m in enumerate(forms_out)}
    rows, cols, vals = [], [], []
    for j, m in enumerate(forms_in):
        s, r = ext.wedge_monomials(gen, m)
        if r is None or s == 0:
            continue
        assert r in index_out, f"wedge target {r} missing from codomain"
        rows.append(index_out[r])
        cols.append(j)
        vals.append(s)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(forms_out), len(forms_in)), dtype=np.complex128)


def _tensor(form_mat: sp.spmatrix, fock_mat: sp.spmatrix, dom: Space, cod: Space, s: int, reason=None) -> GradedOperator:
    op = GradedOperator(sp.kron(form_mat, fock_mat, format="csr"), dom, cod, s, s, max(s, 0), max(-s, 0))
    op.reason = reason
    return op


def _generator_sum(point: ModelPoint, kind: tuple, holomorphic: bool) -> GradedOperator:
    """sum_l (gen_l wedge) tensor (ladder_l): del for holomorphic, delbar otherwise."""
    dom = space_for(point, kind)
    cod = space_for(point, shifted_kind(kind, 1, 0) if holomorphic else shifted_kind(kind, 0, 1))
    s = fock_shift_Z(point) if holomorphic else -fock_shift_Z(point)
    if dom.nforms == 0 or cod.nforms == 0:
        return zero_operator(dom, cod, reason="empty bidegree")
    mat = sp.csr_matrix((cod.dim, dom.dim), dtype=np.complex128)
    for ell in range(1, point.n + 1):
        if holomorphic:
            gen = ext.FormBasisElement(False, (ell,), ())
            ladder = fock_Z(point, ell)
        else:
            gen = ext.FormBasisElement(False, (), (ell,))
            ladder = fock_Zbar(point, ell)
        mat = mat + sp.kron(_form_matrix_wedge(gen, dom.forms, cod.forms), ladder, format="csr")
    return GradedOperator(mat, dom, cod, s, s, max(s, 0), max(-s, 0))


@lru_cache(maxsize=None)
def del_op(point: ModelPoint, kind: tuple) -> GradedOperator:
    """Holomorphic horizontal differential on the given domain kind."""
    return _generator_sum(point, kind, True)


@lru_cache(maxsize=None)
def delbar_op(point: ModelPoint, kind: tuple) -> GradedOperator:
    return _generator_sum(point, kind, False)


@lru_cache(maxsize=None)
def del_star_explicit(point: ModelPoint, p: int, q: int) -> GradedOperator:
    """Adjoint of del on (p,q) from the displayed coefficient formula:
    f zeta^I zbar^I' -> -sum_{l in I} eps(l, I\\l) (Zbar_l f) zeta^(I\\l) zbar^I'."""
    dom = form_space(point, "pq", p, q)
    cod = form_space(point, "pq", p - 1, q)
    s = -fock_shift_Z(point)
    if dom.nforms == 0 or cod.nforms == 0:
        return zero_operator(dom, cod, reason="empty bidegree")
    index_out = {m: i for i, m in enumerate(cod.forms)}
    mat = sp.csr_matrix((cod.dim, dom.dim), dtype=np.complex128)
    for ell in range(1, point.n + 1):
        rows, cols, vals = [], [], []
        for j, m in enumerate(dom.forms):
            if ell not in m.I:
                continue
            J = tuple(i for i in m.I if i != ell)
            target = ext.FormBasisElement(m.theta, J, m.Ibar)
            rows.append(index_out[target])
            cols.append(j)
            vals.append(-ext.epsilon_sign(ell, J))
        form_mat = sp.csr_matrix((vals, (rows, cols)), shape=(cod.nforms, dom.nforms), dtype=np.complex128)
        mat = mat + sp.kron(form_mat, fock_Zbar(point, ell), format="csr")
    return GradedOperator(mat, dom, cod, s, s, max(s, 0), max(-s, 0))


@lru_cache(maxsize=None)
def delbar_star_explicit(point: ModelPoint, p: int, q: int) -> GradedOperator:
    """Adjoint of delbar on (p,q) from the displayed coefficient formula:
    f zeta^I zbar^I' -> (-1)^(|I|+1) sum_{l in I'} eps(l, I'\\l) (Z_l f) zeta^I zbar^(I'\\l)."""
    dom = form_space(point, "pq", p, q)
    cod = form_space(point, "pq", p, q - 1)
    s = fock_shift_Z(point)
    if dom.nforms == 0 or cod.nforms == 0:
        return zero_operator(dom, cod, reason="empty bidegree")
    index_out = {m: i for i, m in enumerate(cod.forms)}
    mat = sp.csr_matrix((cod.dim, dom.dim), dtype=np.complex128)
    for ell in range(1, point.n + 1):
        rows, cols, vals = [], [], []
        for j, m in enumerate(dom.forms):
            if ell not in m.Ibar:
                continue
            J = tuple(i for i in m.Ibar if i != ell)
            target = ext.FormBasisElement(m.theta, m.I, J)
            rows.append(index_out[target])
            cols.append(j)
            vals.append((-1) ** (len(m.I) + 1) * ext.epsilon_sign(ell, J))
        form_mat = sp.csr_matrix((vals, (rows, cols)), shape=(cod.nforms, dom.nforms), dtype=np.complex128)
        mat = mat + sp.kron(form_mat, fock_Z(point, ell), format="csr")
    return GradedOperator(mat, dom, cod, s, s, max(s, 0), max(-s, 0))


@lru_cache(maxsize=None)
def d_h_op(point: ModelPoint, k: int) -> GradedOperator:
    """Horizontal differential del + delbar on Lambda^k_H."""
    return del_op(point, ("hk", k)) + delbar_op(point, ("hk", k))


def e_op(point: ModelPoint, kind: tuple) -> GradedOperator:
    """Left wedge by the curvature two-form (bidegree (1,1), shift 0)."""
    dom = space_for(point, kind)
    cod = space_for(point, shifted_kind(kind, 1, 1))
    fm = ext.wedge_dtheta_matrix(point.n, dom.forms, cod.forms)
    return _tensor(sp.csr_matrix(fm), sp.identity(point.fock.dim, format="csr"), dom, cod, 0)


def i_op(point: ModelPoint, kind: tuple) -> GradedOperator:
    """Interior product against the curvature two-form (adjoint of e_op)."""
    dom = space_for(point, kind)
    cod = space_for(point, shifted_kind(kind, -1, -1))
    fm = ext.contract_dtheta_matrix(point.n, dom.forms, cod.forms)
    return _tensor(sp.csr_matrix(fm), sp.identity(point.fock.dim, format="csr"), dom, cod, 0)


def e_power_op(point: ModelPoint, kind: tuple, ell: int) -> GradedOperator:
    out = identity_operator(space_for(point, kind))
    cur = kind
    for _ in range(ell):
        out = e_op(point, cur) @ out
        cur = shifted_kind(cur, 1, 1)
    return out


def theta_op(point: ModelPoint, k: int) -> GradedOperator:
    """theta wedge: Lambda^k_H -> Lambda^(k+1)."""
    dom = form_space(point, "hk", k)
    cod = form_space(point, "full", k + 1)
    fm = ext.theta_wedge_matrix(dom.forms, cod.forms)
    return _tensor(sp.csr_matrix(fm), sp.identity(point.fock.dim, format="csr"), dom, cod, 0)


def t_op(space: Space) -> GradedOperator:
    return diagonal_operator(space, 1j * space.point.lam)


def t_inv_op(space: Space) -> GradedOperator:
    return diagonal_operator(space, 1.0 / (1j * space.point.lam))


def l_diag_op(space: Space) -> GradedOperator:
    """Sublaplacian as its diagonal multiplier |lam|*(2j+n)."""
    return diagonal_operator(space, space.point.xi(space.degrees()))


def l_comp_op(point: ModelPoint) -> GradedOperator:
    """Sublaplacian composed from ladders on the scalar space: -sum(Z Zb + Zb Z)."""
    from .bargmann import rep_Z, rep_Zbar

    terms = None
    for ell in range(1, point.n + 1):
        z, zb = rep_Z(point, ell), rep_Zbar(point, ell)
        t = z @ zb + zb @ z
        terms = t if terms is None else terms + t
    return -1.0 * terms


def delta0_op(space: Space) -> GradedOperator:
    """Flat comparison operator: diagonal xi + lam^2."""
    return diagonal_operator(space, space.point.xi(space.degrees()) + space.point.lam**2)


@lru_cache(maxsize=None)
def box_op(point: ModelPoint, p: int, q: int) -> GradedOperator:
    """Holomorphic bidegree Laplacian on (p,q), composed: del* del + del del*."""
    up = del_op(point, ("pq", p, q))
    down = del_op(point, ("pq", p - 1, q))
    return up.H @ up + down @ down.H


@lru_cache(maxsize=None)
def boxbar_op(point: ModelPoint, p: int, q: int) -> GradedOperator:
    up = delbar_op(point, ("pq", p, q))
    down = delbar_op(point, ("pq", p, q - 1))
    return up.H @ up + down @ down.H


def box_diag(space: Space) -> GradedOperator:
    """Closed diagonal form of the holomorphic bidegree Laplacian."""
    lam = space.point.lam
    n = space.point.n
    return scalar_diagonal(space, lambda p, q, j: 0.5 * space.point.xi(j) + (p - n / 2) * lam)


def boxbar_diag(space: Space) -> GradedOperator:
    lam = space.point.lam
    n = space.point.n
    return scalar_diagonal(space, lambda p, q, j: 0.5 * space.point.xi(j) + (n / 2 - q) * lam)


def delta_h_diag(space: Space) -> GradedOperator:
    """Horizontal Laplacian, diagonal per bidegree: xi + (p - q) lam."""
    lam = space.point.lam
    return scalar_diagonal(space, lambda p, q, j: space.point.xi(j) + (p - q) * lam)


@lru_cache(maxsize=None)
def delta_h_comp(point: ModelPoint, k: int) -> GradedOperator:
    """Horizontal Laplacian on Lambda^k_H composed from d_H."""
    up = d_h_op(point, k)
    down = d_h_op(point, k - 1)
    return up.H @ up + down @ down.H


def block_operator(blocks, dom: Space, cod: Space) -> GradedOperator:
    """Assemble a stacked-space operator from a 2D list of GradedOperators."""
    mats = [[b.mat for b in row] for row in blocks]
    flat = [b for row in blocks for b in row]
    return GradedOperator(
        sp.bmat(mats, format="csr"),
        dom,
        cod,
        min(b.lo for b in flat),
        max(b.hi for b in flat),
        max(b.peak for b in flat),
        max(b.copeak for b in flat),
    )


@lru_cache(maxsize=None)
def d_full_op(point: ModelPoint, k: int) -> GradedOperator:
    """Full differential Lambda^k -> Lambda^(k+1) in (horizontal, vertical) blocks:
    [[d_H, e], [T, -d_H]]."""
    hk, hk1 = form_space(point, "hk", k), form_space(point, "hk", k - 1)
    dom, cod = form_space(point, "full", k), form_space(point, "full", k + 1)
    blocks = [
        [d_h_op(point, k), e_op(point, ("hk", k - 1))],
        [t_op(hk), -1.0 * d_h_op(point, k - 1)],
    ]
    return block_operator(blocks, dom, cod)


@lru_cache(maxsize=None)
def d_full_star_blocks(point: ModelPoint, k: int) -> GradedOperator:
    """Codifferential Lambda^k -> Lambda^(k-1) assembled blockwise:
    [[d_H*, -T], [i(dtheta), -d_H*]] (independent of taking the adjoint whole)."""
    hk1 = form_space(point, "hk", k - 1)
    dom, cod = form_space(point, "full", k), form_space(point, "full", k - 1)
    blocks = [
        [d_h_op(point, k - 1).H, -1.0 * t_op(hk1)],
        [i_op(point, ("hk", k)), -1.0 * d_h_op(point, k - 2).H],
    ]
    return block_operator(blocks, dom, cod)


@lru_cache(maxsize=None)
def delta_op(point: ModelPoint, k: int) -> GradedOperator:
    """Degree-k Laplacian composed as d* d + d d* on Lambda^k."""
    up = d_full_op(point, k)
    down = d_full_op(point, k - 1)
    return up.H @ up + down @ down.H


@lru_cache(maxsize=None)
def delta_blocks_op(point: ModelPoint, k: int) -> GradedOperator:
    """Degree-k Laplacian assembled from its closed block form:
    [[Delta_H - T^2 + e i, i(delbar - del)], [i(del* - delbar*), Delta_H - T^2 + i e]]."""
    hk, hv = form_space(point, "hk", k), form_space(point, "hk", k - 1)
    dom = form_space(point, "full", k)
    lam2 = diagonal_operator(hk, point.lam**2)
    lam2v = diagonal_operator(hv, point.lam**2)
    b11 = delta_h_diag(hk) + lam2 + e_op(point, ("hk", k - 2)) @ i_op(point, ("hk", k))
    b22 = delta_h_diag(hv) + lam2v + i_op(point, ("hk", k + 1)) @ e_op(point, ("hk", k - 1))
    dlo, dblo = del_op(point, ("hk", k - 1)), delbar_op(point, ("hk", k - 1))
    b12 = 1j * (dblo - dlo)
    b21 = 1j * (dlo.H - dblo.H)
    return block_operator([[b11, b12], [b21, b22]], dom, dom)


def star_op(point: ModelPoint, k: int) -> GradedOperator:
    """Hodge star Lambda^k -> Lambda^(2n+1-k)."""
    dom = form_space(point, "full", k)
    cod = form_space(point, "full", 2 * point.n + 1 - k)
    fm = ext.star_matrix(point.n, dom.forms, cod.forms)
    return _tensor(sp.csr_matrix(fm), sp.identity(point.fock.dim, format="csr"), dom, cod, 0)


def star_h_op(point: ModelPoint, kind: tuple) -> GradedOperator:
    """Horizontal star (p,q) -> (n-q, n-p) on theta-free spaces."""
    dom = space_for(point, kind)
    if kind[0] == "pq":
        cod = form_space(point, "pq", point.n - kind[2], point.n - kind[1])
    elif kind[0] == "hk":
        cod = form_space(point, "hk", 2 * point.n - kind[1])
    else:
        raise ValueError("horizontal star needs a theta-free domain")
    fm = ext.star_h_matrix(point.n, dom.forms, cod.forms)
    return _tensor(sp.csr_matrix(fm), sp.identity(point.fock.dim, format="csr"), dom, cod, 0)


def embed_op(point: ModelPoint, sub: Space, sup: Space) -> GradedOperator:
    """Isometric inclusion of a form-subspace (e.g. one bidegree into its degree)."""
    index_sup = {m: i for i, m in enumerate(sup.forms)}
    rows = [index_sup[m] for m in sub.forms]
    fm = sp.csr_matrix((np.ones(len(rows)), (rows, range(len(rows)))), shape=(sup.nforms, sub.nforms))
    return _tensor(fm, sp.identity(point.fock.dim, format="csr"), sub, sup, 0)

"""Exterior algebra over the coframe zeta_1..zeta_n, zetabar_1..zetabar_n, theta.

Basis monomials are zeta^I ^ zetabar^I' with I, I' strictly increasing tuples of
indices in 1..n, optionally prefixed by theta.  The inner product declares these
monomials orthonormal.  The distinguished two-form is

    dtheta = -i * sum_j zeta_j ^ zetabar_j

and the volume element is mu = theta ^ dtheta^n normalized to unit norm, which
fixes the orientation phase (-i)^n (-1)^(n(n-1)/2) relative to the monomial
theta ^ zeta_1..zeta_n ^ zetabar_1..zetabar_n.  All combinatorial signs are
computed in exact integer arithmetic; matrices carry entries that are exact
small Gaussian integers times that phase.

Degree bookkeeping: "horizontal degree" of a monomial is |I| + |I'|; a theta
prefix adds one to the total degree but does not change how dtheta wedges and
contractions act, which see only the horizontal factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Subset = tuple[int, ...]


@dataclass(frozen=True, order=True)
class FormBasisElement:
    """One wedge monomial: (theta?, zeta^I, zetabar^Ibar).

    Dataclass ordering gives the fixed basis order: lexicographic on
    (theta, I, Ibar) with theta-free monomials first.
    """

    theta: bool
    I: Subset
    Ibar: Subset

    @property
    def p(self) -> int:
        return len(self.I)

    @property
    def q(self) -> int:
        return len(self.Ibar)

    @property
    def hdeg(self) -> int:
        return len(self.I) + len(self.Ibar)

    @property
    def deg(self) -> int:
        return self.hdeg + (1 if self.theta else 0)


def subsets(n: int, size: int) -> list[Subset]:
    return [tuple(c) for c in itertools.combinations(range(1, n + 1), size)]


def bidegree_basis(n: int, p: int, q: int) -> list[FormBasisElement]:
    """Horizontal (p,q) monomials in the fixed order."""
    if p < 0 or q < 0 or p > n or q > n:
        return []
    out = [FormBasisElement(False, I, Ib) for I in subsets(n, p) for Ib in subsets(n, q)]
    return sorted(out)


def horizontal_basis(n: int, k: int) -> list[FormBasisElement]:
    """All horizontal k-monomials (every bidegree p+q=k), fixed order."""
    out = []
    for p in range(0, min(k, n) + 1):
        q = k - p
        out.extend(bidegree_basis(n, p, q))
    return sorted(out)


def full_basis(n: int, k: int) -> list[FormBasisElement]:
    """Basis of Lambda^k = Lambda^k_H + theta ^ Lambda^(k-1)_H, fixed order."""
    out = list(horizontal_basis(n, k))
    for b in horizontal_basis(n, k - 1):
        out.append(FormBasisElement(True, b.I, b.Ibar))
    return sorted(out)


def bundle_basis(n: int) -> list[FormBasisElement]:
    """Every monomial of the full algebra, ordered by total degree then basis order."""
    out = []
    for k in range(0, 2 * n + 2):
        out.extend(full_basis(n, k))
    return out


def merge_sign(a: Subset, b: Subset) -> tuple[int, Subset]:
    """Sign and result of wedging two increasing index tuples; sign 0 on overlap."""
    if set(a) & set(b):
        return 0, ()
    merged = tuple(sorted(a + b))
    # count transpositions needed to interleave b into a
    inv = 0
    for x in b:
        inv += sum(1 for y in a if y > x)
    return (-1) ** inv, merged


def epsilon_sign(ell: int, I: Subset) -> int:
    """Sign of zeta_ell ^ zeta^I relative to zeta^(I u {ell}); 0 if ell in I."""
    if ell in I:
        return 0
    return (-1) ** sum(1 for i in I if i < ell)


def wedge_monomials(b1: FormBasisElement, b2: FormBasisElement) -> tuple[int, FormBasisElement | None]:
    """Exact sign and target monomial of b1 ^ b2 (0, None when it vanishes)."""
    if b1.theta and b2.theta:
        return 0, None
    sign = 1
    if b2.theta:
        # move theta to the front past all generators of b1
        sign *= (-1) ** b1.hdeg
    # zeta part of b2 passes the zetabar part of b1
    sign *= (-1) ** (len(b1.Ibar) * len(b2.I))
    s1, I = merge_sign(b1.I, b2.I)
    s2, Ibar = merge_sign(b1.Ibar, b2.Ibar)
    if s1 == 0 or s2 == 0:
        return 0, None
    sign *= s1 * s2
    return sign, FormBasisElement(b1.theta or b2.theta, I, Ibar)


def conj_monomial(b: FormBasisElement) -> tuple[int, FormBasisElement]:
    """Complex conjugation swaps zeta^I and zetabar^Ibar: sign (-1)^(|I||Ibar|)."""
    return (-1) ** (b.p * b.q), FormBasisElement(b.theta, b.Ibar, b.I)


def orientation_phase(n: int) -> complex:
    """Phase of mu against the monomial basis: mu = phase * theta^zeta^full^zetabar^full."""
    phase = (-1j) ** n * (-1) ** (n * (n - 1) // 2)
    return complex(phase)


def _matrix(basis_in, basis_out, action) -> np.ndarray:
    """Assemble the matrix of `action`, which maps a basis element to
    [(coeff, element), ...]; elements outside basis_out are an error."""
    index = {b: i for i, b in enumerate(basis_out)}
    mat = np.zeros((len(basis_out), len(basis_in)), dtype=np.complex128)
    for j, b in enumerate(basis_in):
        for coeff, target in action(b):
            if coeff == 0 or target is None:
                continue
            mat[index[target], j] += coeff
    return mat


def wedge_dtheta_matrix(n: int, basis_in, basis_out) -> np.ndarray:
    """Matrix of e(dtheta): omega -> dtheta ^ omega."""

    def action(b):
        out = []
        for j in range(1, n + 1):
            gen = FormBasisElement(False, (j,), (j,))
            sign, target = wedge_monomials(gen, b)
            if sign:
                out.append((-1j * sign, target))
        return out

    return _matrix(basis_in, basis_out, action)


def contract_dtheta_matrix(n: int, basis_in, basis_out) -> np.ndarray:
    """Matrix of i(dtheta), the adjoint of e(dtheta) in the monomial basis."""
    return wedge_dtheta_matrix(n, basis_out, basis_in).conj().T


def theta_wedge_matrix(basis_in, basis_out) -> np.ndarray:
    """Matrix of omega -> theta ^ omega on theta-free monomials."""

    def action(b):
        if b.theta:
            return []
        return [(1.0, FormBasisElement(True, b.I, b.Ibar))]

    return _matrix(basis_in, basis_out, action)


@lru_cache(maxsize=None)
def _star_table(n: int, horizontal: bool):
    """For each monomial b: the single pair (coeff, target) with *b = coeff*target.

    Derivation: with <,> making monomials orthonormal and mu as in the module
    docstring, sigma ^ *(conj omega) = <sigma, omega> mu pins * on the basis:
      *b = c(b) * phase * s(swap(b)) * complement(swap(b))
    where conj b = c(b) swap(b) and x ^ complement(x) = s(x) * top.
    """
    full = tuple(range(1, n + 1))
    top = FormBasisElement(not horizontal, full, full)
    phase = orientation_phase(n)
    table = {}
    elements = bundle_basis(n) if not horizontal else [b for b in bundle_basis(n) if not b.theta]
    for b in elements:
        c, bs = conj_monomial(b)
        # complement of bs within the relevant top element
        Ic = tuple(sorted(set(full) - set(bs.I)))
        Ibc = tuple(sorted(set(full) - set(bs.Ibar)))
        comp = FormBasisElement((not horizontal) and not bs.theta, Ic, Ibc)
        sign, target = wedge_monomials(bs, comp)
        assert target == top and sign != 0
        table[b] = (c * phase * sign, comp)
    return table


def star_matrix(n: int, basis_in, basis_out) -> np.ndarray:
    """Matrix of the full Hodge star Lambda^k -> Lambda^(2n+1-k)."""
    table = _star_table(n, False)

    def action(b):
        return [table[b]]

    return _matrix(basis_in, basis_out, action)


def star_h_matrix(n: int, basis_in, basis_out) -> np.ndarray:
    """Matrix of the horizontal star Lambda^(p,q)_H -> Lambda^(n-q,n-p)_H."""
    table = _star_table(n, True)

    def action(b):
        if b.theta:
            raise ValueError("horizontal star acts on theta-free monomials")
        return [table[b]]

    return _matrix(basis_in, basis_out, action)


def conj_matrix(basis_in, basis_out) -> np.ndarray:
    """Matrix of the conjugate-linear conjugation in the monomial basis.

    Returns the matrix C with conj(sum c_b b) = sum conj(c_b) * (C b); apply as
    C @ conj(vec).
    """

    def action(b):
        c, bs = conj_monomial(b)
        return [(c, bs)]

    return _matrix(basis_in, basis_out, action)

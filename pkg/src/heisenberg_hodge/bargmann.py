"""Degree-truncated Bargmann model at a fixed Fourier parameter.

The scalar representation space is spanned by monomials w^alpha, |alpha| <= N,
normalized against the Gaussian weight exp(-|w|^2/2) on C^n with Lebesgue
measure, so ||w^alpha||^2 = prod_l 2*pi*2^(alpha_l)*alpha_l!.  In the
normalized basis Phi_alpha the generator matrices at parameter lam are, for
lam > 0,

    Z_l  Phi_a = sqrt(lam*a_l)     Phi_(a-e_l)      (degree shift -1)
    Zb_l Phi_a = -sqrt(lam*(a_l+1)) Phi_(a+e_l)     (degree shift +1)

with the two roles exchanged for lam < 0, and T = i*lam times the identity.
The center acts as a scalar, so every operator built from the generators is a
finite matrix with a definite range of Fock-degree shifts.

Truncation contract: a product of such matrices applied to a vector supported
in degrees <= N - B agrees exactly with the untruncated operator provided no
intermediate factor can raise the running degree by more than B.  Each
GradedOperator therefore carries (lo, hi, peak, copeak): the envelope of total
degree shifts, the largest intermediate rise of the word it was assembled
from, and the same for the adjoint word.  Comparisons route through
buffered_residual, which refuses to certify identities whose words could
escape the truncation window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .exterior import FormBasisElement, bidegree_basis


@dataclass(frozen=True)
class ModelPoint:
    """Model parameters: rank n, Fourier parameter lam, cutoff N, buffer B."""

    n: int
    lam: float
    max_degree: int = 8
    buffer: int = 4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.lam == 0:
            raise ValueError("lam must be nonzero")
        if not 0 <= self.buffer <= self.max_degree:
            raise ValueError("buffer must lie in [0, max_degree]")

    @property
    def fock(self) -> "TruncatedFock":
        return truncated_fock(self.n, self.max_degree)

    def xi(self, j) -> np.ndarray:
        """Multiplier of the sublaplacian on Fock degree j: |lam|*(2j+n)."""
        return abs(self.lam) * (2 * np.asarray(j) + self.n)


def monomial_norm(alpha) -> float:
    """Bargmann norm of w^alpha: sqrt(prod 2*pi*2^a*a!)."""
    out = 1
    for a in alpha:
        out *= 2 * math.pi * (2**a) * math.factorial(a)
    return math.sqrt(out)


class TruncatedFock:
    """Monomial multi-indices with |alpha| <= N, graded by degree then lex."""

    def __init__(self, n: int, max_degree: int):
        self.n = n
        self.max_degree = max_degree
        idx = []
        for d in range(max_degree + 1):
            idx.extend(sorted(_compositions(d, n)))
        self.multiindices: list[tuple[int, ...]] = idx
        self.index = {a: i for i, a in enumerate(idx)}
        self.degrees = np.array([sum(a) for a in idx], dtype=np.int64)
        self.dim = len(idx)

    def degree_slice(self, d: int) -> np.ndarray:
        return np.nonzero(self.degrees == d)[0]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def truncated_fock(n: int, max_degree: int) -> TruncatedFock:
    return TruncatedFock(n, max_degree)


class Space:
    """A (form monomials) x (Fock) coordinate space, form-major ordering.

    `copies` > 1 stacks identical copies (parameter pair spaces); combined
    index = (copy * nforms + iform) * nfock + jfock.
    """

    def __init__(self, point: ModelPoint, kind: tuple, forms, copies: int = 1):
        self.point = point
        self.kind = kind
        self.forms: tuple[FormBasisElement, ...] = tuple(forms)
        self.copies = copies
        self.fock = point.fock
        self.dim = copies * len(self.forms) * self.fock.dim

    def __eq__(self, other):
        return isinstance(other, Space) and self.point == other.point and self.kind == other.kind

    def __hash__(self):
        return hash((self.point, self.kind))

    def __repr__(self):
        return f"Space({self.kind}, n={self.point.n}, lam={self.point.lam}, dim={self.dim})"

    @property
    def nforms(self) -> int:
        return len(self.forms)

    def degrees(self) -> np.ndarray:
        return np.tile(self.fock.degrees, self.copies * self.nforms)

    def form_values(self, fn) -> np.ndarray:
        """Per-combined-index array of fn(form_element), tiled over copies."""
        vals = np.array([fn(b) for b in self.forms])
        return np.tile(np.repeat(vals, self.fock.dim), self.copies)

    def mask_degrees_le(self, m: int) -> np.ndarray:
        return self.degrees() <= m

    def buffered_mask(self) -> np.ndarray:
        return self.mask_degrees_le(self.point.max_degree - self.point.buffer)


class BudgetExceeded(RuntimeError):
    """A verification word could climb past the truncation cutoff."""

    def __init__(self, budget: int, buffer: int, what: str = ""):
        self.budget = budget
        self.buffer = buffer
        msg = f"shift budget {budget} exceeds buffer {buffer}"
        if what:
            msg += f" for {what}"
        super().__init__(msg)


@dataclass
class GradedOperator:
    """Sparse matrix between Spaces with degree-shift metadata.

    lo/hi bound the total Fock-degree shift; peak bounds the largest
    intermediate rise of the assembled word (0 for elementary matrices that
    only lower, 0 for diagonals); copeak is peak of the adjoint word.  reason
    tags operators that are zero by convention (empty bidegree targets).
    """

    mat: sp.csr_matrix
    dom: Space
    cod: Space
    lo: int
    hi: int
    peak: int
    copeak: int
    reason: str | None = None

    def __post_init__(self):
        self.mat = sp.csr_matrix(self.mat)
        if self.mat.shape != (self.cod.dim, self.dom.dim):
            raise ValueError(f"matrix shape {self.mat.shape} != ({self.cod.dim}, {self.dom.dim})")

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        if self.dom != other.cod:
            raise ValueError(f"composition mismatch: {self.dom} vs {other.cod}")
        return GradedOperator(
            self.mat @ other.mat,
            other.dom,
            self.cod,
            self.lo + other.lo,
            self.hi + other.hi,
            max(other.peak, other.hi + self.peak),
            max(self.copeak, -self.lo + other.copeak),
        )

    def _binary(self, other, f):
        if self.dom != other.dom or self.cod != other.cod:
            raise ValueError("operator sum on mismatched spaces")
        return GradedOperator(
            f(self.mat, other.mat),
            self.dom,
            self.cod,
            min(self.lo, other.lo),
            max(self.hi, other.hi),
            max(self.peak, other.peak),
            max(self.copeak, other.copeak),
        )

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, c):
        return GradedOperator(self.mat * c, self.dom, self.cod, self.lo, self.hi, self.peak, self.copeak)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    @property
    def H(self) -> "GradedOperator":
        return GradedOperator(
            self.mat.conj().T.tocsr(), self.cod, self.dom, -self.hi, -self.lo, self.copeak, self.peak
        )

    def toarray(self) -> np.ndarray:
        return self.mat.toarray()

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        return self.mat @ vecs


def identity_operator(space: Space) -> GradedOperator:
    return GradedOperator(sp.identity(space.dim, dtype=np.complex128, format="csr"), space, space, 0, 0, 0, 0)


def zero_operator(dom: Space, cod: Space, reason: str | None = None) -> GradedOperator:
    op = GradedOperator(sp.csr_matrix((cod.dim, dom.dim), dtype=np.complex128), dom, cod, 0, 0, 0, 0)
    op.reason = reason
    return op


def diagonal_operator(space: Space, values) -> GradedOperator:
    values = np.broadcast_to(np.asarray(values, dtype=np.complex128), (space.dim,))
    return GradedOperator(sp.diags(values, format="csr"), space, space, 0, 0, 0, 0)


def scalar_diagonal(space: Space, fn) -> GradedOperator:
    """Diagonal operator with entries fn(p, q, j) per (bidegree, Fock degree)."""
    pv = space.form_values(lambda b: b.p)
    qv = space.form_values(lambda b: b.q)
    jv = space.degrees()
    return diagonal_operator(space, fn(pv, qv, jv))


# --- generator matrices on the Fock factor -------------------------------------------------

def _ladder(point: ModelPoint, ell: int, raising: bool, coeff) -> sp.csr_matrix:
    """Shift matrix on the Fock factor: raising moves alpha -> alpha + e_ell with
    amplitude coeff(alpha_ell + 1), lowering moves alpha -> alpha - e_ell with
    amplitude coeff(alpha_ell)."""
    fock = point.fock
    rows, cols, vals = [], [], []
    for j, alpha in enumerate(fock.multiindices):
        if raising:
            if sum(alpha) == fock.max_degree:
                continue
            target = alpha[: ell - 1] + (alpha[ell - 1] + 1,) + alpha[ell:]
            amp = coeff(alpha[ell - 1] + 1)
        else:
            if alpha[ell - 1] == 0:
                continue
            target = alpha[: ell - 1] + (alpha[ell - 1] - 1,) + alpha[ell:]
            amp = coeff(alpha[ell - 1])
        rows.append(fock.index[target])
        cols.append(j)
        vals.append(amp)
    return sp.csr_matrix((vals, (rows, cols)), shape=(fock.dim, fock.dim), dtype=np.complex128)


@lru_cache(maxsize=None)
def fock_Z(point: ModelPoint, ell: int) -> sp.csr_matrix:
    a = abs(point.lam)
    if point.lam > 0:
        return _ladder(point, ell, False, lambda m: math.sqrt(a * m))
    return _ladder(point, ell, True, lambda m: -math.sqrt(a * m))


@lru_cache(maxsize=None)
def fock_Zbar(point: ModelPoint, ell: int) -> sp.csr_matrix:
    a = abs(point.lam)
    if point.lam > 0:
        return _ladder(point, ell, True, lambda m: -math.sqrt(a * m))
    return _ladder(point, ell, False, lambda m: math.sqrt(a * m))


def fock_shift_Z(point: ModelPoint) -> int:
    """Fock-degree shift of Z_l (and of del built from it)."""
    return -1 if point.lam > 0 else 1


def _scalar_space(point: ModelPoint) -> Space:
    # same kind tag as operators.form_space(point, "pq", 0, 0), so the two compare equal
    return Space(point, ("pq", 0, 0), bidegree_basis(point.n, 0, 0))


def rep_Z(point: ModelPoint, ell: int) -> GradedOperator:
    """Z_ell on the scalar model space."""
    s = fock_shift_Z(point)
    space = _scalar_space(point)
    return GradedOperator(fock_Z(point, ell), space, space, s, s, max(s, 0), max(-s, 0))


def rep_Zbar(point: ModelPoint, ell: int) -> GradedOperator:
    s = -fock_shift_Z(point)
    space = _scalar_space(point)
    return GradedOperator(fock_Zbar(point, ell), space, space, s, s, max(s, 0), max(-s, 0))


def rep_T(point: ModelPoint) -> GradedOperator:
    space = _scalar_space(point)
    return diagonal_operator(space, 1j * point.lam)


def rep_L(point: ModelPoint) -> GradedOperator:
    """Sublaplacian -sum(Z Zb + Zb Z): diagonal |lam|*(2j+n)."""
    space = _scalar_space(point)
    return diagonal_operator(space, point.xi(space.degrees()))


# --- buffered comparison -------------------------------------------------------------------

def require_budget(*ops: GradedOperator, what: str = "") -> int:
    """Largest intermediate rise over the operands; raises BudgetExceeded if it
    cannot be certified within the model buffer."""
    budget = max([op.peak for op in ops], default=0)
    buffer = ops[0].dom.point.buffer
    if budget > buffer:
        raise BudgetExceeded(budget, buffer, what)
    return budget


def masked_fro(mat: sp.spmatrix, mask: np.ndarray) -> float:
    sub = mat.tocsc()[:, np.nonzero(mask)[0]]
    return float(np.sqrt(abs(sub.multiply(sub.conj())).sum().real))


def buffered_residual(a: GradedOperator, b: GradedOperator | None = None, what: str = "") -> float:
    """Relative Frobenius residual of a == b on the buffered column subspace.

    Columns are restricted to Fock degrees <= N - B; the word budgets of both
    sides must fit inside B or BudgetExceeded is raised (never silently
    weakened).  The denominator is max(1, ||a||, ||b||) on the same columns.
    """
    ops = (a,) if b is None else (a, b)
    require_budget(*ops, what=what)
    mask = a.dom.buffered_mask()
    if b is not None and (a.dom != b.dom or a.cod != b.cod):
        raise ValueError("buffered_residual on mismatched spaces")
    diff = a.mat if b is None else a.mat - b.mat
    na = masked_fro(a.mat, mask)
    nb = 0.0 if b is None else masked_fro(b.mat, mask)
    return masked_fro(diff, mask) / max(1.0, na, nb)


def columns_residual(a: GradedOperator, b: GradedOperator, cols: np.ndarray, what: str = "") -> float:
    """Relative residual of (a-b) applied to explicit column vectors."""
    require_budget(a, b, what=what)
    va = a.mat @ cols
    vb = b.mat @ cols
    denom = max(1.0, float(np.linalg.norm(va)), float(np.linalg.norm(vb)))
    return float(np.linalg.norm(va - vb)) / denom

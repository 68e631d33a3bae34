"""Coboundary calculus on a Lie algebra: Z^k, B^k, H^k and two-form radicals.

Forms are stored as fully antisymmetric coefficient tensors over the dual
basis {dX^i}.  The coboundary is the antiderivation fixed by
``delta(dX^k) = -1/2 C^k_ij dX^i ^ dX^j``; on a k-form with components
``w_{a_1..a_k}`` it reads

    (delta w)_{b_0..b_k} = sum_{i<j} (-1)^{i+j} C^c_{b_i b_j}
                           w_{c, b_0 .. ^b_i .. ^b_j .. b_k}.

The null space of a closed two-form, checked to be a subalgebra, is the
isotropy algebra whose quotient carries the symplectic structure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebraSpec
from .errors import DegreeOverflow, NotSubalgebra

__all__ = [
    "KForm",
    "basis_one_form",
    "wedge",
    "coboundary",
    "coboundary_matrix",
    "cocycle_space",
    "coboundary_space",
    "cohomology_dim",
    "radical",
    "form_to_vector",
    "form_from_vector",
]

_RANK_CUTOFF = 1.0e-10


@dataclass(frozen=True)
class KForm:
    """Antisymmetric rank-k coefficient tensor over the dual basis."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.coeffs, dtype=float)
        if self.degree == 0:
            w = np.asarray(float(w))
        elif w.shape != (w.shape[0],) * self.degree:
            raise ValueError("coefficient tensor shape disagrees with degree")
        if self.degree >= 1 and self.degree > w.shape[0]:
            raise ValueError("degree exceeds algebra dimension")
        for axes in itertools.combinations(range(self.degree), 2):
            swapped = np.swapaxes(w, *axes)
            if not np.array_equal(swapped, -w):
                raise ValueError("coefficients are not antisymmetric")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "coeffs", w)

    @property
    def dim(self) -> int:
        return 1 if self.degree == 0 else self.coeffs.shape[0]

    def __add__(self, other: "KForm") -> "KForm":
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        return KForm(self.degree, self.coeffs + other.coeffs)

    def __rmul__(self, scalar: float) -> "KForm":
        return KForm(self.degree, scalar * self.coeffs)

    def __call__(self, *vectors) -> float:
        """Evaluate on k coordinate vectors."""
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        w = self.coeffs
        for v in vectors:
            w = np.tensordot(w, np.asarray(v), axes=([0], [0]))
        return float(w)


def basis_one_form(dim: int, index: int) -> KForm:
    """The dual basis covector dX^index."""
    w = np.zeros(dim)
    w[index] = 1.0
    return KForm(1, w)


def wedge(a: KForm, b: KForm) -> KForm:
    """Wedge product by shuffle-sign expansion of the antisymmetrizer."""
    p, q = a.degree, b.degree
    if p == 0:
        return float(a.coeffs) * b
    if q == 0:
        return float(b.coeffs) * a
    n = a.dim
    out = np.zeros((n,) * (p + q))
    raw = np.multiply.outer(a.coeffs, b.coeffs)
    for shuffle in itertools.combinations(range(p + q), p):
        rest = [i for i in range(p + q) if i not in shuffle]
        perm = list(shuffle) + rest
        sign = _perm_sign(perm)
        out += sign * np.transpose(raw, axes=np.argsort(perm))
    return KForm(p + q, out)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def coboundary(alg: LieAlgebraSpec, f: KForm) -> KForm:
    """Coboundary of a k-form; raises DegreeOverflow at top degree."""
    n = alg.dim
    k = f.degree
    if k >= n:
        raise DegreeOverflow(f"cannot raise degree {k} on a {n}-dimensional algebra")
    if k == 0:
        return KForm(1, np.zeros(n))
    c = alg.structure
    # base[x, y, r1..r_{k-1}] = C^c_{xy} w_{c r1..}
    base = np.tensordot(c, f.coeffs, axes=([0], [0]))
    dense = np.zeros((n,) * (k + 1))
    for i, j in itertools.combinations(range(k + 1), 2):
        rest = [m for m in range(k + 1) if m not in (i, j)]
        term = np.moveaxis(base, range(k + 1), [i, j] + rest)
        dense = dense + ((-1) ** (i + j)) * term
    return KForm(k + 1, _mirror_strict(dense, n, k + 1))


def _mirror_strict(dense: np.ndarray, n: int, k: int) -> np.ndarray:
    """Rebuild a tensor from its strictly increasing entries, mirroring with
    exact permutation signs so antisymmetry holds bit-for-bit."""
    out = np.zeros((n,) * k)
    for idx in itertools.combinations(range(n), k):
        val = dense[idx]
        if val == 0.0:
            continue
        for perm in itertools.permutations(range(k)):
            out[tuple(idx[p] for p in perm)] = _perm_sign(list(perm)) * val
    return out


def _strict_index_sets(n: int, k: int):
    return list(itertools.combinations(range(n), k))


def form_to_vector(f: KForm) -> np.ndarray:
    """Components on the strictly increasing multi-index basis."""
    idx = _strict_index_sets(f.dim, f.degree)
    return np.array([f.coeffs[i] for i in idx])


def form_from_vector(v: np.ndarray, n: int, k: int) -> KForm:
    """Inverse of :func:`form_to_vector`."""
    out = np.zeros((n,) * k)
    for val, idx in zip(v, _strict_index_sets(n, k)):
        for perm in itertools.permutations(range(k)):
            out[tuple(idx[p] for p in perm)] = _perm_sign(list(perm)) * val
    return KForm(k, out)


def coboundary_matrix(alg: LieAlgebraSpec, k: int) -> np.ndarray:
    """Matrix of delta_k in the strictly increasing multi-index bases."""
    n = alg.dim
    rows = _strict_index_sets(n, k + 1)
    cols = _strict_index_sets(n, k)
    mat = np.zeros((len(rows), len(cols)))
    for col, idx in enumerate(cols):
        basis_form = np.zeros(len(cols))
        basis_form[col] = 1.0
        image = coboundary(alg, form_from_vector(basis_form, n, k))
        mat[:, col] = form_to_vector(image)
    return mat


def cocycle_space(alg: LieAlgebraSpec, k: int) -> list[KForm]:
    """Orthonormal basis of Z^k = Ker delta_k (SVD rank cutoff 1e-10)."""
    if k not in (1, 2):
        raise ValueError("cocycle_space supports k in {1, 2}")
    n = alg.dim
    if k >= n:
        return []
    mat = coboundary_matrix(alg, k)
    null = _null_space(mat)
    return [form_from_vector(null[:, i], n, k) for i in range(null.shape[1])]


def coboundary_space(alg: LieAlgebraSpec, k: int) -> list[KForm]:
    """Orthonormal basis of B^k = Im delta_{k-1}."""
    n = alg.dim
    if k < 1 or k - 1 >= n:
        return []
    mat = coboundary_matrix(alg, k - 1)
    img = _column_space(mat)
    return [form_from_vector(img[:, i], n, k) for i in range(img.shape[1])]


def cohomology_dim(alg: LieAlgebraSpec, k: int) -> int:
    """dim H^k = dim Z^k - dim B^k with SVD rank decisions."""
    if k not in (1, 2):
        raise ValueError("cohomology_dim supports k in {1, 2}")
    n = alg.dim
    if k >= n:
        z_dim = 0 if k > n else 1  # top degree: everything is closed
    else:
        z_dim = _null_space(coboundary_matrix(alg, k)).shape[1]
    if k - 1 >= n:
        b_dim = 0
    else:
        b_dim = int(np.linalg.matrix_rank(coboundary_matrix(alg, k - 1), tol=_RANK_CUTOFF))
    return z_dim - b_dim


def radical(alg: LieAlgebraSpec, omega: KForm):
    """Null directions of a two-form, verified closed under the bracket.

    Returns ``(basis_vectors, codim)`` where the basis columns span
    ``{X : omega(X, .) = 0}`` and ``codim = rank(omega)`` (always even).
    Raises NotSubalgebra when bracket-closure fails, which signals a form
    outside Z^2.
    """
    if omega.degree != 2:
        raise ValueError("radical is defined for two-forms")
    mat = omega.coeffs
    null = _null_space(mat)
    codim = alg.dim - null.shape[1]

    # closure: [u, v] must fall back into the span for all basis pairs
    span = null
    for i in range(span.shape[1]):
        for j in range(i + 1, span.shape[1]):
            br = alg.bracket_coords(span[:, i], span[:, j])
            resid = br - span @ (span.T @ br)
            if np.linalg.norm(resid) > 1.0e-10 * (1.0 + np.linalg.norm(br)):
                raise NotSubalgebra(
                    "null space is not a subalgebra; the form is not closed"
                )
    return [span[:, i] for i in range(span.shape[1])], codim


def _null_space(mat: np.ndarray) -> np.ndarray:
    if mat.size == 0:
        return np.eye(mat.shape[1]) if mat.shape[1] else np.zeros((0, 0))
    u, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > _RANK_CUTOFF))
    return vt[rank:].T


def _column_space(mat: np.ndarray) -> np.ndarray:
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > _RANK_CUTOFF))
    return u[:, :rank]

"""Exterior algebra over R^n for n <= 3.

k-vectors and k-covectors are stored as coefficient arrays over the
standard basis of Lambda_k R^n, indexed by sorted k-tuples of axes.
For n <= 3 every k-vector is simple, so the mass norm of a k-vector and
the comass of a k-covector both reduce to the Euclidean norm of the
coefficient array; that fact is relied on throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np


@lru_cache(maxsize=None)
def basis_tuples(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Sorted axis tuples indexing the standard basis of Lambda_k R^n."""
    if k < 0 or k > n:
        return ()
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def basis_index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {t: i for i, t in enumerate(basis_tuples(n, k))}


def dim(n: int, k: int) -> int:
    return len(basis_tuples(n, k))


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted tuple for e_a ^ e_b; sign 0 if the tuples share an axis."""
    if set(a) & set(b):
        return 0, ()
    merged = a + b
    # parity of the permutation sorting the concatenation
    sign = 1
    items = list(merged)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign, tuple(sorted(merged))


@lru_cache(maxsize=None)
def wedge_table(n: int, k: int, r: int):
    """List of (i, j, out, sign) entries describing Lambda_k x Lambda_r -> Lambda_{k+r}."""
    out_index = basis_index(n, k + r)
    table = []
    for i, a in enumerate(basis_tuples(n, k)):
        for j, b in enumerate(basis_tuples(n, r)):
            sign, merged = merge_sign(a, b)
            if sign != 0:
                table.append((i, j, out_index[merged], sign))
    return table


def wedge(a: np.ndarray, k: int, b: np.ndarray, r: int, n: int) -> np.ndarray:
    """Coefficients of the wedge of a k-(co)vector with an r-(co)vector."""
    out = np.zeros(dim(n, k + r))
    for i, j, o, s in wedge_table(n, k, r):
        out[o] += s * a[i] * b[j]
    return out


def pairing(cov: np.ndarray, vec: np.ndarray) -> float:
    """<phi, xi> in the orthonormal standard basis."""
    return float(np.dot(cov, vec))


def contract(cov: np.ndarray, k: int, vec: np.ndarray, r: int, n: int) -> np.ndarray:
    """Interior product phi -| xi: the (r-k)-vector with <psi, phi-|xi> = <phi^psi, xi>."""
    if k > r:
        raise ValueError("contraction degree exceeds vector degree")
    q = r - k
    out = np.zeros(dim(n, q))
    vec_index = basis_index(n, r)
    for j, b in enumerate(basis_tuples(n, q)):
        acc = 0.0
        for i, a in enumerate(basis_tuples(n, k)):
            sign, merged = merge_sign(a, b)
            if sign != 0:
                acc += sign * cov[i] * vec[vec_index[merged]]
        out[j] = acc
    return out


@dataclass(frozen=True)
class MultiVector:
    """A k-vector in R^n with components over the standard Lambda_k basis."""

    n: int
    degree: int
    components: np.ndarray

    def norm(self) -> float:
        """Mass norm; equals the Euclidean norm since every k-vector is simple for n <= 3."""
        return float(np.linalg.norm(self.components))

    def wedge(self, other: "MultiVector") -> "MultiVector":
        if self.n != other.n:
            raise ValueError("ambient dimensions differ")
        return MultiVector(
            self.n,
            self.degree + other.degree,
            wedge(self.components, self.degree, other.components, other.degree, self.n),
        )

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.n, self.degree, -self.components)


def simple_from_columns(E: np.ndarray) -> np.ndarray:
    """Components of v_1 ^ ... ^ v_k for the columns of an (n, k) matrix."""
    n, k = E.shape
    comps = np.empty(dim(n, k))
    for i, rows in enumerate(basis_tuples(n, k)):
        comps[i] = np.linalg.det(E[list(rows), :]) if k > 0 else 1.0
    return comps

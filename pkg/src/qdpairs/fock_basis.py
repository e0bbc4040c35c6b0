"""Truncated product space |Y, n_R, n_L> of the four-level dot and two cavity modes.

States are ordered QD-level major, then n_R, then n_L::

    index = level * (n_max + 1)**2 + n_R * (n_max + 1) + n_L

with levels ordered G, X_R, X_L, B.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterator, Tuple

import numpy as np

ORDERING_VERSION = "qd-major/nR/nL v1"

POLARIZATIONS = ("R", "L")


class QdLevel(IntEnum):
    G = 0
    X_R = 1
    X_L = 2
    B = 3


# (N_R, N_L) excitation content carried by each dot level.
_QD_EXCITATIONS = {
    QdLevel.G: (0, 0),
    QdLevel.X_R: (1, 0),
    QdLevel.X_L: (0, 1),
    QdLevel.B: (1, 1),
}


def _check_pol(pol: str) -> str:
    if pol not in POLARIZATIONS:
        raise ValueError(f"polarization must be 'R' or 'L', got {pol!r}")
    return pol


@dataclass(frozen=True)
class ProductBasis:
    n_max: int
    states: Tuple[Tuple[QdLevel, int, int], ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, qd: QdLevel, n_R: int, n_L: int) -> int:
        m = self.n_max + 1
        if not (0 <= n_R <= self.n_max and 0 <= n_L <= self.n_max):
            raise IndexError(f"photon numbers ({n_R}, {n_L}) outside truncation {self.n_max}")
        return int(QdLevel(qd)) * m * m + n_R * m + n_L

    def state_at(self, i: int) -> Tuple[QdLevel, int, int]:
        return self.states[i]

    def ket(self, qd: QdLevel, n_R: int, n_L: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(qd, n_R, n_L)] = 1.0
        return v

    def excitations(self, i: int) -> Tuple[int, int]:
        qd, n_R, n_L = self.states[i]
        x_R, x_L = _QD_EXCITATIONS[qd]
        return n_R + x_R, n_L + x_L

    def sector(self, N_R: int, N_L: int) -> list:
        """Indices of all states with the given (N_R, N_L), in basis order."""
        return [i for i in range(self.dim) if self.excitations(i) == (N_R, N_L)]

    def label(self, i: int) -> str:
        qd, n_R, n_L = self.states[i]
        return f"|{qd.name},{n_R},{n_L}>"

    def __iter__(self) -> Iterator[Tuple[QdLevel, int, int]]:
        return iter(self.states)


def build_basis(n_max: int = 2) -> ProductBasis:
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(
            f"n_max must be an integer >= 1 (the cascade needs two-photon states), got {n_max}"
        )
    n_max = int(n_max)
    states = tuple(
        (qd, n_R, n_L)
        for qd in QdLevel
        for n_R in range(n_max + 1)
        for n_L in range(n_max + 1)
    )
    return ProductBasis(n_max=n_max, states=states)


@dataclass(frozen=True)
class Operator:
    """Dense matrix on a ProductBasis."""

    basis: ProductBasis
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"operator shape {m.shape} does not match basis dim {self.basis.dim}")
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def dag(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, self.hermitian)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def element(self, bra: Tuple[QdLevel, int, int], ket: Tuple[QdLevel, int, int]) -> complex:
        return complex(self.matrix[self.basis.index(*bra), self.basis.index(*ket)])

    def _other(self, other):
        if isinstance(other, Operator):
            if other.basis.n_max != self.basis.n_max:
                raise ValueError("operators live on different bases")
            return other.matrix
        return other

    def __add__(self, other):
        return Operator(self.basis, self.matrix + self._other(other),
                        self.hermitian and getattr(other, "hermitian", False))

    def __sub__(self, other):
        return Operator(self.basis, self.matrix - self._other(other),
                        self.hermitian and getattr(other, "hermitian", False))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.basis, self.matrix @ other.matrix)
        return self.matrix @ other

    def __mul__(self, scalar):
        herm = self.hermitian and np.isrealobj(scalar)
        return Operator(self.basis, self.matrix * scalar, herm)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.basis, -self.matrix, self.hermitian)

    def to_csv(self, path, tol: float = 0.0) -> None:
        """Write nonzero entries as (row, col, re, im) with the basis ordering tag."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# ordering: {ORDERING_VERSION}; n_max={self.basis.n_max}\n")
            w = csv.writer(fh)
            w.writerow(["row", "col", "re", "im"])
            rows, cols = np.nonzero(np.abs(self.matrix) > tol)
            for r, c in zip(rows, cols):
                z = self.matrix[r, c]
                w.writerow([int(r), int(c), f"{z.real:.17g}", f"{z.imag:.17g}"])


def annihilation(basis: ProductBasis, pol: str) -> Operator:
    _check_pol(pol)
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, (qd, n_R, n_L) in enumerate(basis.states):
        n = n_R if pol == "R" else n_L
        if n == 0:
            continue
        target = (qd, n_R - 1, n_L) if pol == "R" else (qd, n_R, n_L - 1)
        m[basis.index(*target), j] = np.sqrt(n)
    return Operator(basis, m)


def qd_transition(basis: ProductBasis, from_level: QdLevel, to_level: QdLevel) -> Operator:
    """|to><from| on the dot, identity on both photon modes."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, (qd, n_R, n_L) in enumerate(basis.states):
        if qd == from_level:
            m[basis.index(to_level, n_R, n_L), j] = 1.0
    return Operator(basis, m, hermitian=(from_level == to_level))


def excitation_number(basis: ProductBasis, pol: str) -> Operator:
    """N_R = a_R^dag a_R + |X_R><X_R| + |B><B| (mirrored for L)."""
    _check_pol(pol)
    k = 0 if pol == "R" else 1
    diag = [basis.excitations(i)[k] for i in range(basis.dim)]
    return Operator(basis, np.diag(np.asarray(diag, dtype=complex)), hermitian=True)

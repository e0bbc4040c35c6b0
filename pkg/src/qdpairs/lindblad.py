"""Liouvillian of the driven, damped dot-cavity system and its steady state.

Density matrices are vectorized column-stacked (Fortran order), so that
vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from qdpairs.fock_basis import Operator, ProductBasis, QdLevel, annihilation, qd_transition
from qdpairs.model import ModelParams

NEG_EIG_TOL = 1e-8
EIG_NOISE = 1e-13


class SteadyStateError(RuntimeError):
    """The steady state is not unique or not physical."""


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray = field(repr=False)
    d: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.d)

    def trace_residual(self) -> float:
        """max |vec(I)^T L|, zero for a trace-preserving generator."""
        return float(np.max(np.abs(vec(np.eye(self.d)) @ self.matrix)))


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray = field(repr=False)
    residual: float

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    def expect(self, op) -> complex:
        return complex(np.trace(self.rho @ np.asarray(op)))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("i,j,re,im\n")
            for i, j in zip(*np.nonzero(self.rho)):
                z = self.rho[i, j]
                fh.write(f"{i},{j},{z.real:.17g},{z.imag:.17g}\n")


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, Operator) else np.asarray(op, dtype=complex)


def commutator_super(h) -> np.ndarray:
    """Superoperator of rho -> -i [h, rho]."""
    h = _matrix(h)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator(c, rate: float) -> np.ndarray:
    """Superoperator of rate * (c rho c^dag - 1/2 {c^dag c, rho})."""
    if rate < 0:
        raise ValueError(f"dissipation rate must be >= 0, got {rate}")
    c = _matrix(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("collapse operator must be square")
    d = c.shape[0]
    if rate == 0:
        return np.zeros((d * d, d * d), dtype=complex)
    eye = np.eye(d)
    cdc = c.conj().T @ c
    return rate * (np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye))


def collapse_operators(basis: ProductBasis, p: ModelParams):
    """(rate, operator) pairs for exciton and biexciton decay and cavity leakage."""
    G, XR, XL, B = QdLevel.G, QdLevel.X_R, QdLevel.X_L, QdLevel.B
    return [
        (p.gamma_X, qd_transition(basis, XR, G).matrix),
        (p.gamma_X, qd_transition(basis, XL, G).matrix),
        (p.gamma_B, qd_transition(basis, B, XR).matrix),
        (p.gamma_B, qd_transition(basis, B, XL).matrix),
        (p.Gamma, annihilation(basis, "R").matrix),
        (p.Gamma, annihilation(basis, "L").matrix),
    ]


def build_liouvillian(h_rot, p: ModelParams, basis: ProductBasis) -> Liouvillian:
    """-i[H, .] plus the six Lindblad dissipators, as a dense d^2 x d^2 matrix.

    Assembled as I kron A + B^T kron I + sum_k rate_k conj(c_k) kron c_k with
    A = -iH - K/2, B = iH - K/2 and K = sum_k rate_k c_k^dag c_k.
    """
    h = _matrix(h_rot)
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise ValueError("rotating-frame Hamiltonian is not Hermitian")
    d = basis.dim
    terms = [np.zeros((d, d), dtype=complex)]
    jumps = sp.csr_matrix((d * d, d * d), dtype=complex)
    for rate, c in collapse_operators(basis, p):
        if rate < 0:
            raise ValueError("dissipation rates must be >= 0")
        if rate == 0:
            continue
        terms.append(rate * (c.conj().T @ c))
        cs = sp.csr_matrix(c)
        jumps = jumps + rate * sp.kron(cs.conj(), cs, format="csr")
    K = _exact_sum(np.array(terms))
    eye = sp.identity(d, dtype=complex, format="csr")
    A = sp.csr_matrix(-1j * h - 0.5 * K)
    B = sp.csr_matrix(1j * h - 0.5 * K)
    L = sp.kron(eye, A) + sp.kron(B.T, eye) + jumps
    return Liouvillian(L.toarray(), d)


def _exact_sum(stack: np.ndarray) -> np.ndarray:
    """Correctly rounded elementwise sum over the first axis.

    The result does not depend on term order, so relabeling R <-> L permutes
    the Liouvillian exactly.
    """
    re = np.apply_along_axis(math.fsum, 0, stack.real)
    im = np.apply_along_axis(math.fsum, 0, stack.imag)
    return re + 1j * im


def _hermitian_coordinates(d: int):
    """Index maps between vec(rho) and the d^2 real coordinates of a Hermitian rho.

    Coordinates: rho_kk for each k, then Re rho_ij and Im rho_ij for i < j.
    """
    iu, ju = np.triu_indices(d, 1)
    diag = np.arange(d) * (d + 1)
    upper = iu + ju * d  # column-stacked position of (i, j)
    lower = ju + iu * d
    return diag, upper, lower


def _real_system(Lm: np.ndarray, d: int) -> np.ndarray:
    diag, upper, lower = _hermitian_coordinates(d)
    cols = np.concatenate(
        [Lm[:, diag], Lm[:, upper] + Lm[:, lower], 1j * (Lm[:, upper] - Lm[:, lower])], axis=1
    )
    return np.concatenate([cols[diag].real, cols[upper].real, cols[upper].imag], axis=0)


def _from_coordinates(x: np.ndarray, d: int) -> np.ndarray:
    diag, upper, lower = _hermitian_coordinates(d)
    n = len(upper)
    v = np.zeros(d * d, dtype=complex)
    v[diag] = x[:d]
    v[upper] = x[d:d + n] + 1j * x[d + n:]
    v[lower] = x[d:d + n] - 1j * x[d + n:]
    return v


def steady_state(L: Liouvillian, hermitize: bool = True) -> SteadyState:
    """Trace-one null vector of L by dense LU with one row swapped for the trace.

    L maps Hermitian matrices to Hermitian matrices, so the linear system is
    written in the d^2 real coordinates of a Hermitian rho and solved with a
    real LU.
    """
    d = L.d
    M = _real_system(L.matrix, d)
    # row 0 is the (0, 0) population equation; the population rows sum to zero
    M[0, :] = 0.0
    M[0, :d] = 1.0
    rhs = np.zeros(d * d)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            x = scipy.linalg.solve(M, rhs, check_finite=False)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise SteadyStateError(
                f"steady state not unique (ill-conditioned constrained Liouvillian): {exc}"
            ) from exc
    v = _from_coordinates(x, d)
    rho = unvec(v, d)
    residual = float(np.max(np.abs(L.matrix @ v)))
    scale = float(np.max(np.abs(L.matrix)))
    if residual > 1e-9 * scale:
        raise SteadyStateError(f"steady-state residual {residual:.3g} exceeds tolerance")
    if hermitize:
        rho = _hygiene(rho)
    return SteadyState(rho, residual)


def _hygiene(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    if w[0] < -NEG_EIG_TOL:
        raise SteadyStateError(f"steady state has negative eigenvalue {w[0]:.3g}")
    # eigenvalues above -EIG_NOISE * |w|max are eigensolver roundoff, not negativity
    neg = w < -EIG_NOISE * max(1.0, abs(w[-1]))
    if np.any(neg):
        # remove only the negative part; a full rebuild would add eps-level noise everywhere
        vn = v[:, neg]
        rho = rho - (vn * w[neg]) @ vn.conj().T
        rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def shell_population(rho: np.ndarray, basis: ProductBasis) -> float:
    """Population of states with n_R = n_max or n_L = n_max (truncation edge)."""
    edge = [i for i, (_, n_R, n_L) in enumerate(basis.states) if basis.n_max in (n_R, n_L)]
    return float(np.real(np.sum(np.diag(rho)[edge])))

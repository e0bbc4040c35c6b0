"""Cascade transition operators, the two-photon polarization matrix, and
concurrence / entanglement of formation.

Pair basis order (first label: photon from the one-excitation state to the
ground state, frequency omega1; second label: photon from the
two-excitation state, frequency omega2)::

    0: |L R>   1: |R L>   2: |L L>   3: |R R>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from qdpairs.dressed import DressedState, TransitionTable
from qdpairs.fock_basis import Operator, ProductBasis

PAIR_LABELS = ("LR", "RL", "LL", "RR")
# pair order -> two-qubit product order |LL>, |LR>, |RL>, |RR> (L = 0, R = 1)
_TO_PRODUCT = [2, 0, 1, 3]
_SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)
FLUX_FLOOR = 1e-300
SNAP_TOL = 1e-12


class CascadeBranch(str, Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> str:
        return "+" if self is CascadeBranch.UPPER else "-"


class ZeroPairFluxError(ValueError):
    """No two-excitation population feeds the cascade; EoF is undefined."""


@dataclass(frozen=True)
class PairDensityMatrix:
    rho4: np.ndarray = field(repr=False)
    omega1: float = float("nan")
    omega2: float = float("nan")
    branch: CascadeBranch = CascadeBranch.UPPER
    flux: float = float("nan")

    def populations(self) -> Dict[str, float]:
        return {lab: float(self.rho4[i, i].real) for i, lab in enumerate(PAIR_LABELS)}

    def cross_weight(self) -> float:
        """Weight on the cross-polarized block {|LR>, |RL>}."""
        return float(self.rho4[0, 0].real + self.rho4[1, 1].real)

    def mirrored(self) -> np.ndarray:
        """R <-> L relabeled matrix (swap 0<->1 and 2<->3)."""
        perm = [1, 0, 3, 2]
        return self.rho4[np.ix_(perm, perm)]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("row,col,re,im\n")
            for i, a in enumerate(PAIR_LABELS):
                for j, b in enumerate(PAIR_LABELS):
                    z = self.rho4[i, j]
                    fh.write(f"{a},{b},{z.real:.17g},{z.imag:.17g}\n")


def _by_label(dressed: Sequence[DressedState]) -> Dict[str, DressedState]:
    return {s.label: s for s in dressed}


def build_transition_operator(
    n: str,
    m: str,
    table: TransitionTable,
    dressed: Sequence[DressedState],
    basis: ProductBasis,
    branch: CascadeBranch = CascadeBranch.UPPER,
    weights: Optional[Dict[str, float]] = None,
) -> Operator:
    """T(nm) = gamma^(n)_{G0; n_branch} sum_j gamma^(m)_{n_branch; j} |G0><j|.

    The first photon emitted (polarization ``m``) takes a two-excitation state
    j to the one-excitation state of polarization ``n`` on the chosen branch;
    the second (``n``) returns it to the ground state. ``weights`` optionally
    scales each j term (frequency filter); by default all terms count fully.
    """
    if n not in ("R", "L") or m not in ("R", "L"):
        raise ValueError("pair polarizations must be 'R' or 'L'")
    branch = CascadeBranch(branch)
    states = _by_label(dressed)
    ground = states["G0"]
    mid = f"{n}{branch.sign}"
    bra = np.zeros(basis.dim, dtype=complex)
    for s in dressed:
        if s.manifold != 2:
            continue
        amp = table.gamma(mid, s.label, m)
        if weights is not None:
            amp *= weights.get(s.label, 0.0)
        if amp != 0:
            bra += amp * s.vector.conj()
    pref = table.gamma("G0", mid, n)
    return Operator(basis, pref * np.outer(ground.vector, bra))


def transition_operators(
    table: TransitionTable,
    dressed: Sequence[DressedState],
    basis: ProductBasis,
    branch: CascadeBranch = CascadeBranch.UPPER,
    weights: Optional[Dict[str, float]] = None,
) -> List[Operator]:
    """The four T operators in pair-basis order."""
    return [
        build_transition_operator(lab[0], lab[1], table, dressed, basis, branch, weights)
        for lab in PAIR_LABELS
    ]


def lorentzian_weights(dressed: Sequence[DressedState], center: float, width: float) -> Dict[str, float]:
    """Lorentzian weight of each two-excitation state around the two-photon energy."""
    if width <= 0:
        raise ValueError("filter width must be > 0")
    return {
        s.label: 1.0 / (1.0 + ((s.energy_shift - center) / width) ** 2)
        for s in dressed if s.manifold == 2
    }


def pair_density_matrix(
    rho_ss,
    T: Sequence,
    omega1: float = float("nan"),
    omega2: float = float("nan"),
    branch: CascadeBranch = CascadeBranch.UPPER,
) -> PairDensityMatrix:
    """rho4[a, b] proportional to Tr[T_a rho T_b^dag], normalized to unit trace."""
    rho = np.asarray(getattr(rho_ss, "rho", rho_ss))
    mats = [np.asarray(getattr(t, "matrix", t)) for t in T]
    if len(mats) != 4:
        raise ValueError("need the four transition operators in pair-basis order")
    raw = np.empty((4, 4), dtype=complex)
    for a, ta in enumerate(mats):
        left = ta @ rho
        for b, tb in enumerate(mats):
            raw[a, b] = np.trace(left @ tb.conj().T)
    diag = raw.diagonal().real
    flux = float(diag.sum())
    if not np.any(diag > FLUX_FLOOR):
        raise ZeroPairFluxError("no pair flux: all cascade probabilities vanish")
    rho4 = raw / flux
    rho4 = 0.5 * (rho4 + rho4.conj().T)
    return PairDensityMatrix(rho4, omega1, omega2, CascadeBranch(branch), flux)


def _as_array(rho4) -> np.ndarray:
    return np.asarray(getattr(rho4, "rho4", rho4), dtype=complex)


def to_product_order(rho4) -> np.ndarray:
    """Reorder a pair-basis matrix to |LL>, |LR>, |RL>, |RR>."""
    r = _as_array(rho4)
    return r[np.ix_(_TO_PRODUCT, _TO_PRODUCT)]


def concurrence(rho4) -> float:
    """Two-qubit concurrence of a matrix in pair-basis order."""
    r = to_product_order(rho4)
    r = 0.5 * (r + r.conj().T)
    w, v = np.linalg.eigh(r)
    a = v * np.sqrt(np.clip(w, 0.0, None))
    # with r = a a^dag, the square roots of the eigenvalues of r r~ are the
    # singular values of a^T (sy x sy) a; this avoids sqrt of eigenvalue noise
    lam = np.linalg.svd(a.T @ _SIGMA_YY @ a, compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return _snap(c)


def _snap(c: float) -> float:
    """Clamp to [0, 1]; values within roundoff of an endpoint become the endpoint."""
    if c <= SNAP_TOL:
        return 0.0
    if c >= 1.0 - SNAP_TOL:
        return 1.0
    return float(c)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def eof_from_concurrence(c: float) -> float:
    c = _snap(c)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def eof(rho4) -> float:
    """Entanglement of formation (bits) of a matrix in pair-basis order."""
    return eof_from_concurrence(concurrence(rho4))

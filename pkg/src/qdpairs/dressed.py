"""Dressed states of H0 in the zero-, one- and two-excitation manifolds.

Diagonalization is done per (N_R, N_L) sector, which H0 conserves:

    (0,0) G0            (1,0) R+, R-        (0,1) L+, L-
    (2,0) RR+, RR-      (0,2) LL+, LL-      (1,1) S, T1, T2, T3

"+" / "-" mark the sign of the energy shift. In the cross-polarized sector
the triplet shifts are lambda_j - 2 eps0 = -a_j with a_1 < a_2 < a_3, and
the singlet (|X_R,0,1> - |X_L,1,0>)/sqrt(2) sits at zero shift.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import scipy.linalg

from qdpairs.fock_basis import Operator, ProductBasis, QdLevel, annihilation, build_basis
from qdpairs.model import ModelParams, build_h0

SECTOR_LABELS = {
    (0, 0): ("G0",),
    (1, 0): ("R-", "R+"),
    (0, 1): ("L-", "L+"),
    (2, 0): ("RR-", "RR+"),
    (0, 2): ("LL-", "LL+"),
}
LABEL_ORDER = ("G0", "R+", "R-", "L+", "L-", "RR+", "RR-", "LL+", "LL-", "S", "T1", "T2", "T3")
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class DressedState:
    label: str
    manifold: int
    sector: Tuple[int, int]
    energy_shift: float
    vector: np.ndarray = field(repr=False)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first component within 1e-9 of the largest magnitude is made real positive
    mags = np.abs(v)
    k = int(np.argmax(mags >= mags.max() - 1e-9))
    v = v * (abs(v[k]) / v[k])
    v[k] = abs(v[k])
    return v


def _embed(basis: ProductBasis, idx, sub: np.ndarray) -> np.ndarray:
    v = np.zeros(basis.dim, dtype=complex)
    v[idx] = sub
    return _fix_phase(v)


def singlet_vector(basis: ProductBasis) -> np.ndarray:
    v = basis.ket(QdLevel.X_R, 0, 1) - basis.ket(QdLevel.X_L, 1, 0)
    return v / math.sqrt(2)


def diagonalize_manifolds(h0: Operator, basis: ProductBasis, eps0: float = 0.0) -> List[DressedState]:
    """Label and return the 13 dressed states of manifolds 0, 1 and 2.

    ``eps0`` must be the exciton energy used to build ``h0``; shifts are
    reported relative to ``manifold * eps0``.
    """
    if basis.n_max < 2:
        raise ValueError("dressed-state analysis needs n_max >= 2 (co-polarized two-photon states)")
    h = np.asarray(h0.matrix)
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise ValueError("h0 is not Hermitian")

    states: List[DressedState] = []
    for sector, labels in SECTOR_LABELS.items():
        idx = basis.sector(*sector)
        n = sum(sector)
        block = h[np.ix_(idx, idx)] - n * eps0 * np.eye(len(idx))
        w, v = np.linalg.eigh(block)
        for k, label in enumerate(labels):
            states.append(DressedState(label, n, sector, float(w[k]), _embed(basis, idx, v[:, k])))

    states.extend(_cross_polarized(h, basis, eps0))
    order = {lab: i for i, lab in enumerate(LABEL_ORDER)}
    return sorted(states, key=lambda s: order[s.label])


def _cross_polarized(h: np.ndarray, basis: ProductBasis, eps0: float) -> List[DressedState]:
    idx = basis.sector(1, 1)
    block = h[np.ix_(idx, idx)] - 2 * eps0 * np.eye(len(idx))
    s = singlet_vector(basis)[idx]
    hs = block @ s
    e_s = float(np.real(np.vdot(s, hs)))
    scale = max(1.0, float(np.max(np.abs(block))))
    if np.max(np.abs(hs - e_s * s)) > 1e-10 * scale:
        raise RuntimeError("singlet is not an eigenvector of H0; coupling convention broken")

    comp = scipy.linalg.null_space(s.conj()[None, :])
    w, u = np.linalg.eigh(comp.conj().T @ block @ comp)
    vecs = comp @ u
    a = -w
    b_idx = idx.index(basis.index(QdLevel.B, 0, 0))
    # ascending a; ties broken by weight on |B,0,0>
    order = sorted(range(3), key=lambda k: (a[k], -abs(vecs[b_idx, k])))
    if min(np.diff(np.sort(a))) < DEGENERACY_TOL or min(abs(a)) < DEGENERACY_TOL:
        warnings.warn("cross-polarized dressed states are degenerate; labels use |B,0,0> overlap order",
                      stacklevel=3)

    out = [DressedState("S", 2, (1, 1), e_s, _embed(basis, idx, s))]
    for j, k in enumerate(order, start=1):
        out.append(DressedState(f"T{j}", 2, (1, 1), float(w[k]), _embed(basis, idx, vecs[:, k])))
    return out


def dressed_states(p: ModelParams, n_max: int = 2) -> Tuple[ProductBasis, List[DressedState]]:
    basis = build_basis(max(n_max, 2))
    return basis, diagonalize_manifolds(build_h0(basis, p), basis, eps0=p.eps0)


def cubic_shifts(g: float, g_B: float, delta_B: float) -> Tuple[float, float, float]:
    """Triplet shifts (a1, a2, a3), ascending, from x^3 - x^2 - (p+q) x + p = 0.

    a_j = delta_B * x_j with p = 2 (g/delta_B)^2, q = 2 (g_B/delta_B)^2.
    """
    if not delta_B > 0:
        raise ValueError("delta_B must be > 0; use diagonalize_manifolds for delta_B <= 0")
    p = 2.0 * (g / delta_B) ** 2
    q = 2.0 * (g_B / delta_B) ** 2
    # depressed cubic t^3 + P t + Q with x = t + 1/3; P < 0 always
    P = -(p + q) - 1.0 / 3.0
    Q = p - (p + q) / 3.0 - 2.0 / 27.0
    r = 2.0 * math.sqrt(-P / 3.0)
    arg = 3.0 * Q / (P * r)
    phi = math.acos(min(1.0, max(-1.0, arg)))
    roots = [r * math.cos((phi - 2.0 * math.pi * k) / 3.0) + 1.0 / 3.0 for k in range(3)]

    def f(x):
        return ((x - 1.0) * x - (p + q)) * x + p

    def df(x):
        return (3.0 * x - 2.0) * x - (p + q)

    polished = []
    for x in roots:
        d = df(x)
        if abs(d) > 1e-8:
            step = f(x) / d
            if abs(step) < 1e-3 * max(1.0, abs(x)):
                x -= step
        polished.append(x)
    x1, x2, x3 = sorted(polished)
    return (delta_B * x1, delta_B * x2, delta_B * x3)


def g_minus(delta_B: float, g_B: float) -> float:
    if delta_B < 0 or g_B < 0:
        raise ValueError("delta_B and g_B must be >= 0")
    return 0.25 * (math.sqrt(delta_B ** 2 + 16.0 * g_B ** 2) - delta_B)


@dataclass(frozen=True)
class TransitionTable:
    """gamma[(lower, upper, pol)] = <lower| a_pol |upper> between adjacent manifolds."""

    amplitudes: Dict[Tuple[str, str, str], complex]

    def gamma(self, lower: str, upper: str, pol: str) -> complex:
        return self.amplitudes.get((lower, upper, pol), 0.0j)

    def as_array(self, labels=LABEL_ORDER) -> np.ndarray:
        out = np.zeros((len(labels), len(labels), 2), dtype=complex)
        for i, n in enumerate(labels):
            for j, m in enumerate(labels):
                for k, pol in enumerate(("R", "L")):
                    out[i, j, k] = self.gamma(n, m, pol)
        return out


def transition_table(dressed: List[DressedState], basis: ProductBasis) -> TransitionTable:
    ops = {pol: annihilation(basis, pol).matrix for pol in ("R", "L")}
    amps = {}
    for lo in dressed:
        for up in dressed:
            if up.manifold != lo.manifold + 1:
                continue
            for pol, a in ops.items():
                amps[(lo.label, up.label, pol)] = complex(np.vdot(lo.vector, a @ up.vector))
    return TransitionTable(amps)

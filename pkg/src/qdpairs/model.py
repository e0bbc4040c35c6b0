"""Dot-cavity Hamiltonian, laser drive and the rotating-frame Hamiltonian.

Energies are in units of the cavity leak rate Gamma. The biexciton couples
to the cavity in the cross-polarized form

    i g_B (|X_R><B| a_L^dag + |X_L><B| a_R^dag) + h.c.

so that the R and L excitation numbers are separately conserved by H0.
That makes the two-colour drive removable by a single rotating frame.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from qdpairs.fock_basis import (
    Operator,
    ProductBasis,
    QdLevel,
    annihilation,
    excitation_number,
    qd_transition,
)

COMMUTATOR_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, all in units of Gamma (drive amplitudes in sqrt(Gamma)).

    ``omega_R_det`` and ``omega_L_det`` are the laser detunings Omega_k - eps0.
    ``g_phase`` and ``g_B_phase`` rotate the coupling constants by a global
    phase; no observable depends on them.
    """

    eps0: float = 0.0
    g: float = 0.0
    g_B: float = 0.0
    delta_B: float = 0.0
    gamma_X: float = 0.0
    gamma_B: float = 0.0
    Gamma: float = 1.0
    E_R: float = 0.0
    E_L: float = 0.0
    omega_R_det: float = 0.0
    omega_L_det: float = 0.0
    g_phase: float = 0.0
    g_B_phase: float = 0.0

    def __post_init__(self):
        for name in ("g", "g_B", "delta_B", "gamma_X", "gamma_B", "E_R", "E_L"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not (self.Gamma > 0 and math.isfinite(self.Gamma)):
            raise ValueError(f"Gamma must be > 0, got {self.Gamma}")
        for name in ("eps0", "omega_R_det", "omega_L_det", "g_phase", "g_B_phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.eps0 > 0 and max(self.g, self.g_B) > 0.1 * self.eps0:
            warnings.warn(
                "couplings are not small compared with eps0; the model assumes weak coupling",
                stacklevel=3,
            )

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def mirrored(self) -> "ModelParams":
        """Swap the R and L drives (amplitude and detuning)."""
        return self.replace(
            E_R=self.E_L, E_L=self.E_R,
            omega_R_det=self.omega_L_det, omega_L_det=self.omega_R_det,
        )

    @property
    def omega_R(self) -> float:
        return self.eps0 + self.omega_R_det

    @property
    def omega_L(self) -> float:
        return self.eps0 + self.omega_L_det


def build_h0(basis: ProductBasis, p: ModelParams) -> Operator:
    a_R = annihilation(basis, "R").matrix
    a_L = annihilation(basis, "L").matrix
    G, XR, XL, B = QdLevel.G, QdLevel.X_R, QdLevel.X_L, QdLevel.B

    def sig(frm, to):
        return qd_transition(basis, frm, to).matrix

    n_photon = a_R.conj().T @ a_R + a_L.conj().T @ a_L
    h = p.eps0 * (n_photon + sig(XR, XR) + sig(XL, XL)) + (2 * p.eps0 - p.delta_B) * sig(B, B)

    g = p.g * np.exp(1j * p.g_phase)
    g_B = p.g_B * np.exp(1j * p.g_B_phase)
    raising = (
        1j * g * (sig(XR, G) @ a_R.conj().T + sig(XL, G) @ a_L.conj().T)
        + 1j * g_B * (sig(B, XR) @ a_L.conj().T + sig(B, XL) @ a_R.conj().T)
    )
    h = h + raising + raising.conj().T
    return Operator(basis, h, hermitian=True)


def build_drive(basis: ProductBasis, p: ModelParams) -> Operator:
    """Laser drive with the e^{-i Omega t} phases absorbed into the rotating frame."""
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    for pol, amp in (("R", p.E_R), ("L", p.E_L)):
        if amp == 0:
            continue
        a = annihilation(basis, pol).matrix
        h += math.sqrt(p.Gamma) * amp * (1j * a.conj().T - 1j * a)
    return Operator(basis, h, hermitian=True)


def rotating_frame_hamiltonian(basis: ProductBasis, p: ModelParams) -> Operator:
    """H0 - Omega_R N_R - Omega_L N_L + H_drive (time independent)."""
    h0 = build_h0(basis, p).matrix
    n_R = excitation_number(basis, "R").matrix
    n_L = excitation_number(basis, "L").matrix
    scale = max(1.0, float(np.max(np.abs(h0))))
    for n in (n_R, n_L):
        comm = np.max(np.abs(h0 @ n - n @ h0))
        if comm > COMMUTATOR_TOL * scale:
            raise RuntimeError(
                f"H0 does not conserve the excitation numbers (|[H0, N]| = {comm:.3g}); "
                "the drive cannot be made time independent"
            )
    h = h0 - p.omega_R * n_R - p.omega_L * n_L + build_drive(basis, p).matrix
    return Operator(basis, h, hermitian=True)

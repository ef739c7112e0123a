"""Closed-form results used as oracles for the numerical pipeline.

* single qubit + resonator: ground energy, dressed strips and their
  second-order shifts from the counter-rotating terms;
* K resonant qubits in the one-excitation sector: dark and bright states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .model import SystemSpec, make_qubit, make_system


class PerturbationPole(ArithmeticError):
    """An energy denominator of the second-order formula vanished."""


@dataclass(frozen=True)
class JCParams:
    qubit_freq: float
    resonator_freq: float
    g: float

    @property
    def detuning(self) -> float:
        return self.qubit_freq - self.resonator_freq

    @classmethod
    def from_frequencies(cls, f_qubit, f_resonator, g) -> "JCParams":
        """Angular convention: w = 2*pi*f for qubit and resonator, ``g`` used as given."""
        return cls(2 * math.pi * f_qubit, 2 * math.pi * f_resonator, g)

    def system(self) -> SystemSpec:
        return make_system([make_qubit(self.qubit_freq)], [self.resonator_freq], [[self.g]])


@dataclass(frozen=True)
class DressedStateJC:
    """Strip n >= 1, spanned by |n;0> and |n-1;1>.

    |E+> = alpha_plus |n;0> + beta_plus |n-1;1>, likewise for |E->.
    """

    n: int
    E_plus: float
    E_minus: float
    alpha_plus: float
    beta_plus: float
    alpha_minus: float
    beta_minus: float
    theta: float

    def coefficients(self, branch: int) -> tuple[float, float]:
        return (self.alpha_plus, self.beta_plus) if branch > 0 else (self.alpha_minus, self.beta_minus)

    def energy(self, branch: int) -> float:
        return self.E_plus if branch > 0 else self.E_minus


def jc_ground(p: JCParams) -> float:
    return -0.5 * p.detuning


def jc_strip(p: JCParams, n: int) -> DressedStateJC:
    """Energies n*w +- sqrt(4 g^2 n + D^2)/2 and the dressed-state coefficients.

    The coefficients come from the mixing angle, 2*theta = atan2(2 g sqrt(n), -D),
    which equals the normalized (sqrt(g^2 n + D^2/4) - D/2, g sqrt(n)) vector
    wherever that is defined and stays finite as g -> 0.
    """
    if n < 1:
        raise ValueError("strip index n must be >= 1")
    D = p.detuning
    root = math.sqrt(4.0 * p.g * p.g * n + D * D)
    theta = 0.5 * math.atan2(2.0 * p.g * math.sqrt(n), -D)
    c, s = math.cos(theta), math.sin(theta)
    return DressedStateJC(
        n=n,
        E_plus=n * p.resonator_freq + 0.5 * root,
        E_minus=n * p.resonator_freq - 0.5 * root,
        alpha_plus=c,
        beta_plus=s,
        alpha_minus=-s,
        beta_minus=c,
        theta=theta,
    )


@dataclass(frozen=True)
class RwaCorrection:
    n: int
    branch: int  # +1, -1; 0 for the ground state
    E_rwa: float
    shift: float

    @property
    def label(self) -> str:
        if self.n == 0:
            return "ground"
        return f"{self.n}{'+' if self.branch > 0 else '-'}"

    @property
    def E_tilde(self) -> float:
        return self.E_rwa + self.shift

    @property
    def relative(self) -> float:
        """shift / E_rwa (nan when E_rwa == 0)."""
        return self.shift / self.E_rwa if self.E_rwa != 0 else math.nan


def _term(weight, numer2, E, E_other, scale):
    # weight * numer2 / (E - E_other), guarding against accidental degeneracy
    den = E - E_other
    if abs(den) <= 1e-12 * scale:
        if numer2 == 0.0:
            return 0.0
        raise PerturbationPole(f"vanishing energy denominator at E = {E!r}")
    return weight * numer2 / den


def rwa_second_order(p: JCParams, n_max: int = 3, literal: bool = False) -> list[RwaCorrection]:
    """Second-order energy shifts caused by the counter-rotating terms.

    The perturbation -g(sigma_- a^dag + sigma_+ a) links strip n to strips
    n +- 2, so first-order shifts vanish. For the ground state (coupled to
    strip 2 through |1;1>), strip 1 and strip 2 the textbook sums are used
    directly; for n >= 3

        dE_n = (n+1) g^2 sum_t (a_n b_{n+2,t})^2 / (E_n - E_{n+2,t})
             + (n-1) g^2 sum_t (b_n a_{n-2,t})^2 / (E_n - E_{n-2,t}).

    ``literal=True`` swaps the coefficients of the downward term to
    (a_n b_{n-2,t})^2, a variant kept for comparison; the downward move acts
    on the |n-1;1> component, which is why b_n a_{n-2} is the weight that
    agrees with exact diagonalization.

    Returns ground, then (n, +), (n, -) for n = 1..n_max.
    """
    g2 = p.g * p.g
    E0 = jc_ground(p)
    strips = {n: jc_strip(p, n) for n in range(1, n_max + 3)}
    scale = max(abs(p.qubit_freq), abs(p.resonator_freq), abs(p.g), 1e-300) * (n_max + 2)

    def shift(n, b):
        s = strips[n]
        E = s.energy(b)
        a_n, b_n = s.coefficients(b)
        up = strips[n + 2]
        total = (n + 1) * g2 * sum(
            _term(1.0, (a_n * up.coefficients(t)[1]) ** 2, E, up.energy(t), scale) for t in (1, -1)
        )
        if n == 2:
            total += _term(g2, b_n * b_n, E, E0, scale)
        elif n >= 3:
            lo = strips[n - 2]
            for t in (1, -1):
                a_lo, b_lo = lo.coefficients(t)
                w = (a_n * b_lo) if literal else (b_n * a_lo)
                total += _term((n - 1) * g2, w * w, E, lo.energy(t), scale)
        return E, total

    two = strips[2]
    ground = g2 * sum(
        _term(1.0, two.coefficients(t)[1] ** 2, E0, two.energy(t), scale) for t in (1, -1)
    )
    out = [RwaCorrection(0, 0, E0, ground)]
    for n in range(1, n_max + 1):
        for b in (1, -1):
            E, d = shift(n, b)
            out.append(RwaCorrection(n, b, E, d))
    return out


# --------------------------------------------------------------------------- #
#                    resonant qubits, one-excitation sector                   #
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class TCSolution:
    """One-excitation eigenstates of K qubits resonant with one mode.

    Vectors are written on the basis (|1;0..0>, |0;e_1>, ..., |0;e_K>).
    """

    freq: float
    couplings: tuple[float, ...]
    omega_K: float
    mean_coupling: float
    E_plus: float
    E_minus: float
    bright_plus: Optional[np.ndarray]
    bright_minus: Optional[np.ndarray]
    dark: np.ndarray  # rows are orthonormal dark vectors

    @property
    def K(self) -> int:
        return len(self.couplings)

    @property
    def E_dark(self) -> float:
        return self.omega_K

    @property
    def degenerate(self) -> bool:
        return self.bright_plus is None

    @property
    def splitting(self) -> float:
        return self.E_plus - self.E_minus

    def eigenpairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(energies, vectors as columns) for the whole (K+1)-dim sector, ascending."""
        if self.degenerate:
            return np.full(self.K + 1, self.omega_K), np.eye(self.K + 1)
        cols = [self.bright_minus] + list(self.dark) + [self.bright_plus]
        energies = [self.E_minus] + [self.omega_K] * len(self.dark) + [self.E_plus]
        return np.array(energies), np.column_stack(cols)


def _sign_fix(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def _dark_basis(g: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {d : sum_k d_k g_k = 0}, deterministic."""
    K = len(g)
    norm_g = float(np.linalg.norm(g))
    seeds = []
    for j in range(K - 1):
        v = np.zeros(K)
        v[j], v[j + 1] = g[j + 1], -g[j]
        seeds.append(v)
    r = int(np.argmax(np.abs(g)))
    for j in range(K):
        if j != r:
            v = np.zeros(K)
            v[j] = 1.0
            v[r] = -g[j] / g[r]
            seeds.append(v)
    basis = []
    unit = g / norm_g
    for v in seeds:
        if len(basis) == K - 1:
            break
        w = v.copy()
        for _ in range(2):
            w -= unit * (unit @ w)
            for b in basis:
                w -= b * (b @ w)
        nw = float(np.linalg.norm(w))
        if nw > 1e-10 * max(float(np.linalg.norm(v)), 1e-300):
            basis.append(w / nw)
    return np.array([_sign_fix(b) for b in basis]).reshape(len(basis), K)


def tc_one_excitation(freq: float, couplings: Sequence[float]) -> TCSolution:
    """Dark energy W_K = (3-K)/2 * w, bright energies W_K +- sqrt(K) * g_mean."""
    g = np.asarray(couplings, dtype=float)
    K = len(g)
    if K < 1:
        raise ValueError("need at least one qubit")
    omega_K = 0.5 * (3 - K) * freq
    mean = math.sqrt(float(g @ g) / K)
    if mean == 0.0:
        return TCSolution(freq, tuple(g), omega_K, 0.0, omega_K, omega_K, None, None,
                          np.eye(K + 1)[1:])
    split = math.sqrt(K) * mean
    qudit_part = g / (math.sqrt(2 * K) * mean)
    bp = np.concatenate(([math.sqrt(0.5)], qudit_part))
    bm = np.concatenate(([-math.sqrt(0.5)], qudit_part))
    dark = _dark_basis(g)
    dark = np.hstack([np.zeros((dark.shape[0], 1)), dark])
    return TCSolution(freq, tuple(g), omega_K, mean, omega_K + split, omega_K - split,
                      bp, bm, dark)


def tc_system(freq: float, couplings: Sequence[float]) -> SystemSpec:
    """K qubits at ``freq`` sharing one resonator at ``freq``."""
    return make_system([make_qubit(freq) for _ in couplings], [freq], [list(map(float, couplings))])


def tc_sector(K: int):
    """Excitation number of the one-excitation sector for K qubits."""
    return Fraction(1) - Fraction(K, 2)

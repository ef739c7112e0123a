"""Time evolution through the sector-wise spectral decomposition.

For each sector the propagator block is

    U_N(dt) = sum_nu exp(-i E_Nnu dt) c_Nnu c_Nnu^T,

with the real eigenvector columns c_Nnu of the sector Hamiltonian. States
are stored as one complex amplitude vector per sector; nothing ever leaks
between sectors, so every sector population is conserved exactly.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .assembly import assemble_sector
from .eigen import SectorSpectrum, sector_spectrum
from .model import SystemSpec, validate
from .sectors import BasisState, Sector, enumerate_sector, excitation_number, parse_state, sector_range

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class StateVector:
    spec: SystemSpec
    sectors: Mapping[Fraction, Sector]
    amplitudes: Mapping[Fraction, np.ndarray]

    @property
    def norm(self) -> float:
        return math.sqrt(sum(float(np.vdot(a, a).real) for a in self.amplitudes.values()))

    def amplitude(self, state: BasisState) -> complex:
        N = excitation_number(state, self.spec)
        if N not in self.sectors:
            return 0j
        return complex(self.amplitudes[N][self.sectors[N].index(state)])

    def populations(self) -> dict[Fraction, float]:
        return {N: float(np.vdot(a, a).real) for N, a in self.amplitudes.items()}

    def items(self):
        """(BasisState, amplitude) pairs in sector then basis order."""
        for N in sorted(self.sectors):
            for s, a in zip(self.sectors[N].states, self.amplitudes[N]):
                yield s, complex(a)


def make_state(spec: SystemSpec, components: Mapping[BasisState, complex], normalize: bool = True) -> StateVector:
    """Superposition of basis states; normalized unless ``normalize=False``."""
    spec = validate(spec)
    by_sector: dict[Fraction, dict[BasisState, complex]] = {}
    for s, a in components.items():
        by_sector.setdefault(excitation_number(s, spec), {})[s] = complex(a)
    sectors, amps = {}, {}
    for N, comp in sorted(by_sector.items()):
        sec = enumerate_sector(N, spec)
        vec = np.zeros(sec.dimension, dtype=complex)
        for s, a in comp.items():
            vec[sec.index(s)] += a
        sectors[N], amps[N] = sec, vec
    state = StateVector(spec, sectors, amps)
    if normalize:
        nrm = state.norm
        if nrm == 0.0:
            raise ValueError("state has zero norm")
        state = StateVector(spec, sectors, {N: v / nrm for N, v in amps.items()})
    return state


def eigenstate(spectrum: SectorSpectrum, nu: int, spec: SystemSpec) -> StateVector:
    """The nu-th energy eigenstate of a sector as a :class:`StateVector`."""
    vec = spectrum.eig.eigenvectors[:, nu].astype(complex)
    return StateVector(validate(spec), {spectrum.N: spectrum.sector}, {spectrum.N: vec})


_TERM = re.compile(r"([^@]*?)@\s*(\|[^>]*>)")


def parse_state_spec(text: str, spec: SystemSpec) -> StateVector:
    """Parse ``'amp @ |n..;m..> + amp @ |...>'`` into a normalized state.

    Amplitudes are Python complex literals, e.g. ``1``, ``-0.5j``, ``(0.6+0.8j)``.
    """
    comps: dict[BasisState, complex] = {}
    pos = 0
    for mt in _TERM.finditer(text):
        if text[pos:mt.start()].strip():
            raise ValueError(f"unexpected text {text[pos:mt.start()]!r} in state spec")
        pos = mt.end()
        amp_text = mt.group(1).strip()
        sign = 1
        while amp_text[:1] in "+-" and amp_text:
            if amp_text[0] == "-":
                sign = -sign
            amp_text = amp_text[1:].strip()
        amp_text = amp_text.replace(" ", "") or "1"
        try:
            amp = sign * complex(amp_text)
        except ValueError:
            raise ValueError(f"cannot parse amplitude {mt.group(1)!r}") from None
        s = parse_state(mt.group(2))
        comps[s] = comps.get(s, 0j) + amp
    if text[pos:].strip() or not comps:
        raise ValueError(f"cannot parse state spec {text!r}")
    return make_state(spec, comps)


@dataclass(frozen=True, eq=False)
class Propagator:
    dt: float
    n_max: Fraction
    blocks: Mapping[Fraction, np.ndarray]
    spectra: Mapping[Fraction, SectorSpectrum]

    def unitarity_error(self) -> float:
        return max(
            (float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max()) for U in self.blocks.values()),
            default=0.0,
        )


def _phases(E, dt):
    # reduce E*dt modulo 2*pi before exponentiating
    return np.exp(-1j * np.remainder(E * dt, _TWO_PI))


def propagator_block(sp: SectorSpectrum, dt: float) -> np.ndarray:
    C = sp.eig.eigenvectors
    return (C * _phases(sp.eig.eigenvalues, dt)) @ C.T


def build_propagator(spec: SystemSpec, n_max, dt: float, spectra=None) -> Propagator:
    """Propagator over all sectors up to ``n_max`` for a step ``dt``.

    Pass ``spectra`` (N -> SectorSpectrum) to reuse earlier diagonalizations.
    """
    spec = validate(spec)
    n_max = Fraction(n_max)
    spectra = dict(spectra or {})
    blocks = {}
    for N in sector_range(n_max, spec):
        if N not in spectra:
            spectra[N] = sector_spectrum(N, spec)
        blocks[N] = propagator_block(spectra[N], dt)
    return Propagator(float(dt), n_max, blocks, spectra)


def apply(prop: Propagator, state: StateVector) -> StateVector:
    missing = [N for N in state.amplitudes if N not in prop.blocks]
    if missing:
        raise ValueError(
            f"state has support in sectors {sorted(missing)} beyond N_max = {prop.n_max}"
        )
    return StateVector(
        state.spec,
        state.sectors,
        {N: prop.blocks[N] @ a for N, a in state.amplitudes.items()},
    )


def evolve(state: StateVector, prop: Propagator, steps: int) -> list[StateVector]:
    """The trajectory [psi(0), psi(dt), ..., psi(steps*dt)]."""
    missing = [N for N in state.amplitudes if N not in prop.blocks]
    if missing:
        raise ValueError(
            f"state has support in sectors {sorted(missing)} beyond N_max = {prop.n_max}"
        )
    traj = [state]
    for _ in range(steps):
        state = apply(prop, state)
        traj.append(state)
    return traj


# --------------------------------------------------------------------------- #
#                                observables                                  #
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Observable:
    kind: str
    args: tuple[int, ...] = ()

    @property
    def name(self) -> str:
        if not self.args:
            return self.kind
        return f"{self.kind}({','.join(map(str, self.args))})"


_ARITY = {"energy": 0, "excitation_number": 0, "photon_number": 1, "level_population": 2}
_OBS = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_observable(text: str) -> Observable:
    """Parse ``energy``, ``excitation_number``, ``photon_number(p)`` or ``level_population(k,m)``."""
    mt = _OBS.match(text)
    if not mt or mt.group(1) not in _ARITY:
        raise ValueError(f"unknown observable {text!r}; choose from {sorted(_ARITY)}")
    kind = mt.group(1)
    args = tuple(int(x) for x in (mt.group(2) or "").split(",") if x.strip())
    if len(args) != _ARITY[kind]:
        raise ValueError(f"observable {kind} takes {_ARITY[kind]} index argument(s)")
    return Observable(kind, args)


def expectation(state: StateVector, observable) -> float:
    if isinstance(observable, str):
        observable = parse_observable(observable)
    spec = state.spec
    kind, args = observable.kind, observable.args
    total = 0.0
    for N, amp in state.amplitudes.items():
        sec = state.sectors[N]
        prob = np.abs(amp) ** 2
        if kind == "energy":
            H = assemble_sector(sec, spec).entries
            total += float(np.vdot(amp, H @ amp).real)
        elif kind == "excitation_number":
            total += float(N) * float(prob.sum())
        elif kind == "photon_number":
            (p,) = args
            if not 0 <= p < spec.n_resonators:
                raise ValueError(f"resonator index {p} out of range")
            weights = np.array([s.photons[p] for s in sec.states], dtype=float)
            total += float(prob @ weights)
        elif kind == "level_population":
            k, m = args
            if not 0 <= k < spec.n_qudits or not 0 <= m < spec.qudits[k].dimension:
                raise ValueError(f"level_population({k},{m}) out of range")
            mask = np.array([s.levels[k] == m for s in sec.states], dtype=float)
            total += float(prob @ mask)
    return total


def required_n_max(state: StateVector) -> Fraction:
    return max(state.amplitudes)

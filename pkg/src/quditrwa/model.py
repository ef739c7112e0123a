"""Device description: qudits, resonators and their couplings.

All quantities are plain frequencies with hbar = 1, in one consistent unit
(GHz in the shipped examples). Qubits are D = 2 qudits whose ground level
sits at -w'/2 and excited level at +w'/2.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence, Union


class SpecError(ValueError):
    """Raised when a device description violates an invariant."""


def _finite(value, what):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise SpecError(f"{what}: expected a real number, got {value!r}") from None
    if not math.isfinite(x):
        raise SpecError(f"{what}: non-finite value {value!r}")
    return x


@dataclass(frozen=True)
class TransmonParams:
    """Charging and Josephson energies of a transmon (same unit as frequencies)."""

    EC: float
    EJ: float

    def __post_init__(self):
        ec = _finite(self.EC, "transmon EC")
        ej = _finite(self.EJ, "transmon EJ")
        if ec <= 0 or ej <= 0:
            raise SpecError(f"transmon energies must be positive (EC={ec}, EJ={ej})")
        if ej <= ec:
            raise SpecError(
                f"EJ/EC = {ej / ec:.4g} is outside the transmon regime (need EJ > EC)"
            )

    @property
    def anharmonicity(self) -> float:
        return -self.EC


@dataclass(frozen=True)
class QuditSpec:
    """A D-level system given by its level energies ``levels[m]``, m = 0..D-1."""

    levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(x) for x in self.levels))

    @property
    def dimension(self) -> int:
        return len(self.levels)

    @property
    def spin(self) -> Fraction:
        """Spin quantum number M = (D - 1)/2."""
        return Fraction(self.dimension - 1, 2)

    def gaps(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.levels, self.levels[1:]))


@dataclass(frozen=True)
class ResonatorSpec:
    freq: float


@dataclass(frozen=True)
class Uniform:
    """Dipole-like ladder coupling: rung l -> l+1 has strength g*sqrt(l+1)."""

    g: float

    def rungs(self, dimension: int) -> tuple[float, ...]:
        return tuple(self.g * math.sqrt(l + 1) for l in range(dimension - 1))


@dataclass(frozen=True)
class Explicit:
    """One real coupling per rung, ``values[l]`` = g_{l,l+1}."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    def rungs(self, dimension: int) -> tuple[float, ...]:
        return self.values


Coupling = Union[Uniform, Explicit]


@dataclass(frozen=True)
class SystemSpec:
    """K qudits, P resonators and a P x K table of couplings.

    ``couplings[p][k]`` couples resonator p to qudit k. After :func:`validate`
    every entry is an :class:`Explicit` with exactly D_k - 1 rungs.
    """

    qudits: tuple[QuditSpec, ...]
    resonators: tuple[ResonatorSpec, ...]
    couplings: tuple[tuple[Coupling, ...], ...]
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "qudits", tuple(self.qudits))
        object.__setattr__(self, "resonators", tuple(self.resonators))
        object.__setattr__(self, "couplings", tuple(tuple(row) for row in self.couplings))

    @property
    def n_qudits(self) -> int:
        return len(self.qudits)

    @property
    def n_resonators(self) -> int:
        return len(self.resonators)

    @property
    def total_spin(self) -> Fraction:
        return sum((q.spin for q in self.qudits), Fraction(0))

    @property
    def n_min(self) -> Fraction:
        """Lowest excitation number, reached by the all-ground, zero-photon state."""
        return -self.total_spin

    def rungs(self, p: int, k: int) -> tuple[float, ...]:
        return self.couplings[p][k].rungs(self.qudits[k].dimension)

    def scaled(self, factor: float) -> "SystemSpec":
        """Copy with every coupling multiplied by ``factor``."""
        rows = tuple(
            tuple(Explicit(tuple(factor * g for g in self.rungs(p, k))) for k in range(self.n_qudits))
            for p in range(self.n_resonators)
        )
        return validate(SystemSpec(self.qudits, self.resonators, rows))


# --------------------------------------------------------------------------- #
#                               constructors                                  #
# --------------------------------------------------------------------------- #

def make_qubit(freq: float) -> QuditSpec:
    """Two-level qudit with transition frequency ``freq``: levels [-f/2, +f/2]."""
    return QuditSpec((-0.5 * freq, 0.5 * freq))


def make_transmon_qutrit(params: TransmonParams) -> QuditSpec:
    """Three-level transmon from its charging and Josephson energies.

    The level energies are w0, 3*w0 and 5*w0 - EC with
    w0 = (sqrt(8*EJ*EC) - EC) / 2, so the 0-1 transition is 2*w0 and the
    anharmonicity is -EC.
    """
    w0 = 0.5 * (math.sqrt(8.0 * params.EJ * params.EC) - params.EC)
    return QuditSpec((w0, 3.0 * w0, 5.0 * w0 - params.EC))


def make_system(qudits, resonators, couplings) -> SystemSpec:
    """Build and validate a :class:`SystemSpec`.

    ``resonators`` may be given as plain frequencies and coupling entries as
    plain numbers (read as ``Uniform``) or sequences (read as ``Explicit``).
    """
    res = [r if isinstance(r, ResonatorSpec) else ResonatorSpec(r) for r in resonators]
    rows = []
    for row in couplings:
        if isinstance(row, (int, float)) or not isinstance(row, Sequence):
            raise SpecError("couplings must be a P x K table (list of rows)")
        rows.append(tuple(_as_coupling(c) for c in row))
    return validate(SystemSpec(tuple(qudits), tuple(res), tuple(rows)))


def _as_coupling(c) -> Coupling:
    if isinstance(c, (Uniform, Explicit)):
        return c
    if isinstance(c, (int, float)):
        return Uniform(float(c))
    return Explicit(tuple(c))


def validate(spec: SystemSpec) -> SystemSpec:
    """Check every invariant and return a copy with explicit rung couplings."""
    if spec._validated:
        return spec
    K, P = spec.n_qudits, spec.n_resonators
    if K < 1:
        raise SpecError("at least one qudit is required")
    if P < 1:
        raise SpecError("at least one resonator is required")
    for k, q in enumerate(spec.qudits):
        if q.dimension < 2:
            raise SpecError(f"qudit {k}: dimension {q.dimension} < 2")
        for m, e in enumerate(q.levels):
            _finite(e, f"qudit {k} level {m}")
    for p, r in enumerate(spec.resonators):
        f = _finite(r.freq, f"resonator {p} frequency")
        if f <= 0:
            raise SpecError(f"resonator {p}: frequency must be positive, got {f}")
    if len(spec.couplings) != P:
        raise SpecError(f"coupling table has {len(spec.couplings)} rows, expected P = {P}")
    rows = []
    for p, row in enumerate(spec.couplings):
        if len(row) != K:
            raise SpecError(f"coupling row {p} has {len(row)} entries, expected K = {K}")
        out = []
        for k, c in enumerate(row):
            rungs = c.rungs(spec.qudits[k].dimension)
            if len(rungs) != spec.qudits[k].dimension - 1:
                raise SpecError(
                    f"coupling [{p}][{k}]: {len(rungs)} rungs given, qudit {k} "
                    f"needs {spec.qudits[k].dimension - 1}"
                )
            out.append(Explicit(tuple(_finite(g, f"coupling [{p}][{k}]") for g in rungs)))
        rows.append(tuple(out))
    return SystemSpec(spec.qudits, spec.resonators, tuple(rows), _validated=True)


# --------------------------------------------------------------------------- #
#                              JSON device schema                             #
# --------------------------------------------------------------------------- #

def qudit_from_json(obj: dict, index: int = 0) -> QuditSpec:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise SpecError(f"qudit {index}: expected one of 'levels', 'qubit', 'transmon'")
    (kind, body), = obj.items()
    if kind == "levels":
        return QuditSpec(tuple(_finite(x, f"qudit {index} level") for x in body))
    if kind == "qubit":
        return make_qubit(_finite(body["freq"], f"qudit {index} qubit freq"))
    if kind == "transmon":
        return make_transmon_qutrit(TransmonParams(body["EC"], body["EJ"]))
    raise SpecError(f"qudit {index}: unknown kind {kind!r}")


def coupling_from_json(obj, p: int = 0, k: int = 0) -> Coupling:
    if isinstance(obj, dict) and len(obj) == 1:
        if "uniform" in obj:
            return Uniform(_finite(obj["uniform"], f"coupling [{p}][{k}]"))
        if "explicit" in obj:
            return Explicit(tuple(obj["explicit"]))
    raise SpecError(f"coupling [{p}][{k}]: expected {{'uniform': g}} or {{'explicit': [...]}}")


def spec_from_dict(device: dict[str, Any]) -> SystemSpec:
    """Parse the JSON device schema (already decoded) into a validated spec."""
    try:
        qudits = [qudit_from_json(q, i) for i, q in enumerate(device["qudits"])]
        resonators = [
            ResonatorSpec(_finite(r["freq"], f"resonator {i} frequency"))
            for i, r in enumerate(device["resonators"])
        ]
        table = device["couplings"]
    except KeyError as exc:
        raise SpecError(f"device description is missing key {exc}") from None
    if not isinstance(table, list):
        raise SpecError("couplings must be a list of rows")
    rows = []
    for p, row in enumerate(table):
        if not isinstance(row, list):
            raise SpecError(f"coupling row {p} must be a list")
        rows.append(tuple(coupling_from_json(c, p, k) for k, c in enumerate(row)))
    return validate(SystemSpec(tuple(qudits), tuple(resonators), tuple(rows)))


def load_device(path) -> tuple[dict, SystemSpec]:
    """Read a device JSON file; returns the raw dict and the parsed spec."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    return raw, spec_from_dict(raw)

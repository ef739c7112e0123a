import math
from fractions import Fraction

import numpy as np
import pytest

from quditrwa.eigen import sector_spectrum
from quditrwa.evolution import (
    apply,
    build_propagator,
    eigenstate,
    evolve,
    expectation,
    make_state,
    parse_observable,
    parse_state_spec,
    propagator_block,
    required_n_max,
)
from quditrwa.model import make_qubit, make_system
from quditrwa.sectors import BasisState


@pytest.fixture
def jc():
    return make_system([make_qubit(7.0)], [7.0], [[0.1]])


@pytest.fixture
def two_qubits():
    return make_system([make_qubit(6.0), make_qubit(6.3)], [7.0], [[0.1, 0.12]])


class TestPropagator:
    # ------------------------------------------------------------------ #
    #  blocks                                                              #
    # ------------------------------------------------------------------ #
    def test_taylor_agreement(self, two_qubits):
        sp = sector_spectrum(2, two_qubits)
        H = sp.matrix.entries
        for dt in (1e-2, 5e-3):
            U = propagator_block(sp, dt)
            X = -1j * H * dt
            T = np.eye(4) + X + X @ X / 2 + X @ X @ X / 6 + X @ X @ X @ X / 24
            # next term is |H dt|^5 / 120
            bound = (np.linalg.norm(H, 2) * dt) ** 5 / 120 * 1.5
            assert np.abs(U - T).max() <= bound

    def test_unitary_and_group(self, two_qubits):
        p1 = build_propagator(two_qubits, 3, 0.37)
        p2 = build_propagator(two_qubits, 3, 0.74, spectra=p1.spectra)
        assert p1.unitarity_error() < 1e-13
        for N, U in p1.blocks.items():
            np.testing.assert_allclose(p2.blocks[N], U @ U, atol=1e-12)

    def test_large_time_phase_reduction(self, jc):
        # exp(-i E dt) with E*dt ~ 1e6 stays unitary
        p = build_propagator(jc, 5, 1e4)
        assert p.unitarity_error() < 1e-12

    def test_sector_beyond_nmax(self, jc):
        psi = make_state(jc, {BasisState((3,), (0,)): 1.0})
        prop = build_propagator(jc, Fraction(1, 2), 0.1)
        with pytest.raises(ValueError, match="beyond N_max"):
            apply(prop, psi)
        with pytest.raises(ValueError, match="beyond N_max"):
            evolve(psi, prop, 3)


class TestDynamics:
    # ------------------------------------------------------------------ #
    #  closed-form trajectories                                            #
    # ------------------------------------------------------------------ #
    def test_vacuum_rabi(self, jc):
        g, dt = 0.1, 0.05
        psi0 = make_state(jc, {BasisState((0,), (1,)): 1.0})
        traj = evolve(psi0, build_propagator(jc, Fraction(1, 2), dt), 400)
        t = dt * np.arange(401)
        p_excited = np.array([expectation(s, "level_population(0,1)") for s in traj])
        np.testing.assert_allclose(p_excited, np.cos(g * t) ** 2, atol=1e-12)

    def test_detuned_rabi(self):
        w, wq, g, n = 7.0, 6.8, 0.1, 3
        spec = make_system([make_qubit(wq)], [w], [[g]])
        psi0 = make_state(spec, {BasisState((n - 1,), (1,)): 1.0})
        dt = 0.1
        traj = evolve(psi0, build_propagator(spec, Fraction(2 * n - 1, 2), dt), 200)
        D = wq - w
        Om = math.sqrt(4 * g * g * n + D * D)
        t = dt * np.arange(201)
        ref = 4 * g * g * n / Om ** 2 * np.sin(Om * t / 2) ** 2
        got = np.array([abs(s.amplitude(BasisState((n,), (0,)))) ** 2 for s in traj])
        np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_eigenstate_is_stationary(self, two_qubits):
        sp = sector_spectrum(1, two_qubits)
        psi = eigenstate(sp, 2, two_qubits)
        out = evolve(psi, build_propagator(two_qubits, 1, 0.3, spectra={sp.N: sp}), 10)[-1]
        ratio = out.amplitudes[sp.N] / psi.amplitudes[sp.N]
        np.testing.assert_allclose(ratio, np.exp(-1j * sp.energies[2] * 3.0), atol=1e-12)

    def test_sector_populations_conserved(self, two_qubits):
        psi = make_state(two_qubits, {BasisState((0,), (1, 0)): 1.0, BasisState((2,), (0, 1)): 1j})
        traj = evolve(psi, build_propagator(two_qubits, 2, 0.5), 50)
        for s in traj:
            for N, pop in s.populations().items():
                assert pop == pytest.approx(0.5, abs=1e-13)


class TestStatesAndObservables:
    # ------------------------------------------------------------------ #
    #  parsing                                                             #
    # ------------------------------------------------------------------ #
    def test_parse_superposition(self, two_qubits):
        psi = parse_state_spec("0.6 @ |1;0,0> - 0.8j @ |0;1,0>", two_qubits)
        assert psi.amplitude(BasisState((1,), (0, 0))) == pytest.approx(0.6)
        assert psi.amplitude(BasisState((0,), (1, 0))) == pytest.approx(-0.8j)
        assert psi.norm == pytest.approx(1.0)
        assert required_n_max(psi) == 0

    def test_parse_normalizes_and_merges(self, jc):
        psi = parse_state_spec("1 @ |0;1> + 1 @ |0;1> + (1+1j) @ |2;0>", jc)
        assert abs(psi.amplitude(BasisState((0,), (1,)))) ** 2 == pytest.approx(4 / 6)

    @pytest.mark.parametrize("text", ["", "0.5 |0;1>", "x @ |0;1>", "1 @ |0;1> junk"])
    def test_parse_errors(self, jc, text):
        with pytest.raises(ValueError):
            parse_state_spec(text, jc)

    def test_zero_norm(self, jc):
        with pytest.raises(ValueError, match="zero norm"):
            make_state(jc, {BasisState((0,), (1,)): 0.0})

    def test_observables(self, two_qubits):
        psi = make_state(two_qubits, {BasisState((2,), (1, 0)): 1.0})
        assert expectation(psi, "photon_number(0)") == 2.0
        assert expectation(psi, "excitation_number") == 2.0
        assert expectation(psi, "level_population(0,1)") == 1.0
        assert expectation(psi, "level_population(1,1)") == 0.0
        assert expectation(psi, "energy") == pytest.approx(7.0 * 2.5 + 3.0 - 3.15)

    @pytest.mark.parametrize("text", ["spin", "photon_number", "level_population(0)"])
    def test_bad_observable(self, text):
        with pytest.raises(ValueError):
            parse_observable(text)

    def test_observable_index_range(self, jc):
        psi = make_state(jc, {BasisState((0,), (1,)): 1.0})
        with pytest.raises(ValueError, match="out of range"):
            expectation(psi, "photon_number(3)")

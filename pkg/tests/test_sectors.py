import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quditrwa.model import QuditSpec, make_qubit, make_system
from quditrwa.sectors import (
    BasisState,
    EmptySectorError,
    enumerate_sector,
    excitation_number,
    parse_state,
    sector_dimensions,
    sector_range,
    truncated_basis,
)


def _spec(dims, P=1):
    qudits = [QuditSpec(tuple(float(5 * m + k) for m in range(D))) for k, D in enumerate(dims)]
    return make_system(qudits, [7.0 + p for p in range(P)], [[0.1] * len(dims) for _ in range(P)])


class TestOrdering:
    # ------------------------------------------------------------------ #
    #  canonical basis order                                               #
    # ------------------------------------------------------------------ #
    def test_two_qubits(self):
        spec = _spec([2, 2])
        labels = [s.label for s in enumerate_sector(1, spec)]
        assert labels == ["|2;0,0>", "|1;1,0>", "|1;0,1>", "|0;1,1>"]

    def test_two_qutrits_n0(self):
        spec = _spec([3, 3])
        labels = [s.label for s in enumerate_sector(0, spec)]
        assert labels == ["|2;0,0>", "|1;1,0>", "|1;0,1>", "|0;1,1>", "|0;2,0>", "|0;0,2>"]

    def test_jc_strip(self):
        spec = _spec([2])
        assert [s.label for s in enumerate_sector(Fraction(5, 2), spec)] == ["|3;0>", "|2;1>"]
        assert [s.label for s in enumerate_sector(Fraction(-1, 2), spec)] == ["|0;0>"]


class TestSectorRange:
    # ------------------------------------------------------------------ #
    #  reachable excitation numbers                                        #
    # ------------------------------------------------------------------ #
    def test_below_minimum(self):
        with pytest.raises(EmptySectorError, match="below"):
            enumerate_sector(-1, _spec([2]))

    def test_wrong_fraction(self):
        with pytest.raises(EmptySectorError, match="not reachable"):
            enumerate_sector(0, _spec([2]))

    def test_range_and_dims(self):
        spec = _spec([2, 2])
        assert sector_range(2, spec) == [-1, 0, 1, 2]
        assert [d for _, d in sector_dimensions(2, spec)] == [1, 3, 4, 4]

    def test_dimension_saturates_for_qubits(self):
        # K qubits, one resonator: high sectors have 2^K states
        spec = _spec([2, 2, 2])
        assert enumerate_sector(Fraction(9, 2), spec).dimension == 8


class TestStates:
    # ------------------------------------------------------------------ #
    #  labels and excitation number                                        #
    # ------------------------------------------------------------------ #
    def test_parse_round_trip(self):
        s = BasisState((2, 0), (1, 0, 2))
        assert parse_state(s.label) == s
        assert parse_state("1,2;0") == BasisState((1, 2), (0,))

    def test_parse_garbage(self):
        with pytest.raises(ValueError):
            parse_state("|a;b>")

    def test_wrong_shape(self):
        with pytest.raises(ValueError, match="shape"):
            excitation_number(BasisState((0,), (0, 0)), _spec([2]))

    def test_level_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            excitation_number(BasisState((0,), (2,)), _spec([2]))


# ---------------------------------------------------------------------- #
#  brute-force equivalence                                               #
# ---------------------------------------------------------------------- #

@settings(max_examples=40, deadline=None)
@given(
    dims=st.lists(st.integers(2, 4), min_size=1, max_size=3),
    P=st.integers(1, 2),
    shift=st.integers(0, 4),
)
def test_sector_matches_brute_force(dims, P, shift):
    spec = _spec(dims, P)
    N = spec.n_min + shift
    got = enumerate_sector(N, spec).states
    budget = shift
    brute = [
        BasisState(ns, ms)
        for ns in itertools.product(range(budget + 1), repeat=P)
        for ms in itertools.product(*(range(D) for D in dims))
        if excitation_number(BasisState(ns, ms), spec) == N
    ]
    assert len(got) == len(set(got))
    assert set(got) == set(brute)


def test_truncated_basis_size():
    spec = _spec([2, 3], P=2)
    basis = truncated_basis(spec, 2)
    assert len(basis) == 9 * 6
    N = [excitation_number(s, spec) for s in basis]
    assert N == sorted(N)

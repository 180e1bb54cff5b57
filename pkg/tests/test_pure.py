import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mconc.errors import ShapeError
from mconc.projectors import ConcurrenceSpec, named_spec
from mconc.pure import closed_form_CN, eta, evaluate
from mconc.states import (
    apply_local,
    basis_state,
    bell,
    biseparable,
    ghz,
    random_local_unitaries,
    random_pure,
    w_state,
)
from mconc.tensor import StateVector, tensor_product
from oracles import closed_form_cn_plain, ghz_law, purity_expansion, wootters_pure

seeds = st.integers(0, 2**32 - 1)
BIP = named_spec("bipartite", [2, 2])


def test_bell_matches_wootters():
    assert evaluate(BIP, bell()) == pytest.approx(wootters_pure(bell().amplitudes), abs=1e-12)
    assert evaluate(BIP, bell()) == pytest.approx(1, abs=1e-12)


@given(seeds)
def test_two_qubit_pure_matches_wootters(seed):
    psi = random_pure([2, 2], seed)
    assert evaluate(BIP, psi) == pytest.approx(wootters_pure(psi.amplitudes), abs=1e-12)


def test_ghz3_c3_value():
    # all six marginal purities are 1/2: sqrt((6 - 3) / 2)
    assert evaluate(named_spec("C3", [2] * 3), ghz([0.5, 0.5], 3)) == pytest.approx(np.sqrt(1.5), abs=1e-12)
    assert np.sqrt(1.5) == pytest.approx(1.224745, abs=1e-6)


def test_c3_3_of_biseparable_is_bipartite_value():
    phi = random_pure([2, 2], 11)
    zeta = random_pure([2], 12)
    psi = biseparable(phi, zeta)
    assert evaluate(named_spec("c3_3", [2] * 3), psi) == pytest.approx(evaluate(BIP, phi), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["+-", "-+", "+--+-", "---"]), seeds)
def test_odd_minus_strings_vanish(signs, seed):
    dims = [2, 3, 2, 2, 2][: len(signs)]
    spec = ConcurrenceSpec(dims, {signs: 1.0}, allow_odd=True)
    assert evaluate(spec, random_pure(dims, seed)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(2, 3), min_size=2, max_size=3), seeds, st.data())
def test_evaluate_matches_purity_expansion(dims, seed, data):
    even = ["".join(s) for s in itertools.product("+-", repeat=len(dims)) if s.count("-") % 2 == 0]
    picked = data.draw(st.lists(st.sampled_from(even), min_size=1, unique=True))
    g = np.random.default_rng(seed)
    weights = {s: float(g.uniform(0.5, 4)) for s in picked}
    spec = ConcurrenceSpec(dims, weights)
    psi = random_pure(dims, seed)
    assert evaluate(spec, psi) ** 2 == pytest.approx(purity_expansion(weights, psi.amplitudes, dims), abs=1e-10)


def test_closed_form_examples():
    assert closed_form_CN(basis_state([2, 2, 2], [0, 1, 0])) == 0
    assert closed_form_CN(w_state(3)) == pytest.approx(2 / np.sqrt(3), abs=1e-12)
    g4 = ghz([0.5, 0.5], 4)
    # marginals: all 14 purities 1/2 -> 2^-1 sqrt(14 - 7)
    assert closed_form_CN(g4) == pytest.approx(np.sqrt(7) / 2, abs=1e-12)
    assert closed_form_CN(g4) == pytest.approx(evaluate(named_spec("CN", [2] * 4), g4), abs=1e-12)


def test_closed_form_rejects_subnormalized():
    psi = StateVector([2, 2], [0.5, 0, 0, 0.5], "subnormalized")
    with pytest.raises(ShapeError):
        closed_form_CN(psi)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(2, 3), min_size=2, max_size=4), seeds)
def test_closed_form_matches_plain_oracle(dims, seed):
    psi = random_pure(dims, seed)
    assert closed_form_CN(psi) == pytest.approx(closed_form_cn_plain(psi.amplitudes, dims), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(2, 3), min_size=2, max_size=3), st.integers(2, 3), seeds)
def test_CN_reduces_when_last_party_factorizes(dims, last, seed):
    xi = random_pure(dims, seed)
    zeta = random_pure([last], seed + 1)
    assert closed_form_CN(tensor_product(xi, zeta)) == pytest.approx(closed_form_CN(xi), abs=1e-10)


def test_eta_examples():
    assert eta(basis_state([2, 2], [0, 1]), BIP) == pytest.approx(1, abs=1e-12)
    assert eta(bell(), BIP) == pytest.approx(np.sqrt(3) / 2, abs=1e-12)
    psi = StateVector([2, 2], [np.sqrt(0.8), 0, 0, np.sqrt(0.2)])
    assert evaluate(BIP, psi) == pytest.approx(0.8, abs=1e-12)
    assert eta(psi, BIP) == pytest.approx(np.sqrt(0.84), abs=1e-12)
    assert np.sqrt(0.84) == pytest.approx(0.916515, abs=1e-6)


NAMED_3 = ["c3_1", "c3_2", "c3_3", "C3", "CN"]
NAMED_4 = ["c4_12", "c4_13", "c4_14", "c4_23", "c4_24", "c4_34", "C4", "CN"]


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(n, [2, 2, 2]) for n in NAMED_3] + [(n, [2] * 4) for n in NAMED_4] + [("CN", [3, 2, 3])]), seeds)
def test_local_unitary_invariance(named, seed):
    name, dims = named
    spec = named_spec(name, dims)
    psi = random_pure(dims, seed)
    moved = apply_local(psi, random_local_unitaries(dims, seed + 7))
    assert evaluate(spec, moved) == pytest.approx(evaluate(spec, psi), abs=1e-10)


@pytest.mark.parametrize(
    "placement,zero,nonzero",
    [(None, ["c3_1", "c3_2"], ["c3_3", "C3"]), ([0, 2, 1], ["c3_1", "c3_3"], ["c3_2", "C3"]), ([1, 2, 0], ["c3_2", "c3_3"], ["c3_1", "C3"])],
)
def test_table_rows_partition_sensitivity(placement, zero, nonzero):
    for seed in range(5):
        phi = random_pure([2, 2], seed)
        zeta = random_pure([2], 100 + seed)
        psi = biseparable(phi, zeta, placement)
        c_phi = evaluate(BIP, phi)
        for name in zero:
            assert evaluate(named_spec(name, [2] * 3), psi) <= 1e-10
        for name in nonzero:
            assert evaluate(named_spec(name, [2] * 3), psi) == pytest.approx(c_phi, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 3))
def test_ghz_law(seed, d):
    lam = np.random.default_rng(seed).dirichlet(np.ones(d))
    assert evaluate(named_spec("C4", [d] * 4), ghz(lam, 4, d)) == pytest.approx(ghz_law(lam), abs=1e-10)


def test_w_annihilation():
    assert evaluate(named_spec("C4", [2] * 4), w_state(4)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(0.05, 1.0))
def test_homogeneity(seed, t):
    psi = random_pure([2, 3, 2], seed)
    scaled = StateVector(psi.shape, t * psi.amplitudes, "subnormalized")
    spec = named_spec("C3", [2, 3, 2])
    assert evaluate(spec, scaled) == pytest.approx(t**2 * evaluate(spec, psi), abs=1e-10)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        evaluate(named_spec("C3", [2] * 3), bell())

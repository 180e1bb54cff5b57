import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mconc.errors import QuasiPureDenominatorError, ShapeError, SpecError
from mconc.mixed import (
    coefficient_matrices,
    exact_rank_one,
    lower_bound,
    optimize_lower_bound,
    quasi_pure,
    roof_direct_search,
    seminorm_bound,
    spectral_ensemble,
    tau,
)
from mconc.projectors import apply_A, chi_vectors, named_spec
from mconc.pure import evaluate
from mconc.states import (
    basis_state,
    bell,
    ghz,
    random_density,
    random_pure,
    random_unitary,
    separable_mixture,
    white_noise_mix,
)
from mconc.tensor import DensityMatrix, two_copy_reorder
from oracles import werner_concurrence, wootters

seeds = st.integers(0, 2**32 - 1)
BIP = named_spec("bipartite", [2, 2])
C3 = named_spec("C3", [2, 2, 2])
C4 = named_spec("C4", [2] * 4)


def T_of(rho, spec):
    return coefficient_matrices(spectral_ensemble(rho), chi_vectors(spec))


def test_spectral_ensemble_examples():
    psi = random_pure([2, 2], 1)
    ens = spectral_ensemble(psi.projector())
    assert ens.rank == 1
    assert abs(abs(np.vdot(ens.members[0].amplitudes, psi.amplitudes)) - 1) < 1e-12
    ens = spectral_ensemble(DensityMatrix([2, 2], np.eye(4) / 4))
    assert ens.rank == 4 and np.allclose(ens.eigenvalues, 0.25)
    a, b = basis_state([2, 2], [0, 1]), bell()
    rho = DensityMatrix([2, 2], 0.7 * np.outer(a.amplitudes, a.amplitudes) + 0.3 * np.outer(b.amplitudes, b.amplitudes))
    ens = spectral_ensemble(rho)
    assert [m.norm_squared for m in ens.members] == pytest.approx([0.7, 0.3], abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), seeds)
def test_spectral_ensemble_reconstructs(rank, seed):
    rho = random_density([2, 3], rank, seed)
    ens = spectral_ensemble(rho)
    m = ens.matrix()
    assert np.abs(m.T @ m.conj() - rho.matrix).max() < 1e-10
    gram = m.conj() @ m.T
    assert np.abs(gram - np.diag(ens.eigenvalues)).max() < 1e-10
    assert np.all(np.diff(ens.eigenvalues) <= 0)


def test_coefficient_matrix_examples():
    T = T_of(bell().projector(), BIP)
    assert T.shape == (1, 1, 1) and abs(abs(T[0, 0, 0]) - 1) < 1e-12
    T = T_of(basis_state([2, 2, 2], [0, 1, 1]).projector(), named_spec("c3_1", [2] * 3))
    assert np.abs(T).max() == 0
    T = T_of(random_density([2, 2, 2], 3, 4), C3)
    assert T.shape == (9, 3, 3)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([("C3", [2, 2, 2]), ("CN", [2, 3, 2]), ("bipartite", [3, 3]), ("c4_23", [2] * 4)]), st.integers(1, 4), seeds)
def test_coefficient_matrices_symmetric_and_reconstruct_Ahat(named, rank, seed):
    name, dims = named
    spec = named_spec(name, dims)
    ens = spectral_ensemble(random_density(dims, rank, seed))
    T = coefficient_matrices(ens, chi_vectors(spec))
    assert np.abs(T - T.transpose(0, 2, 1)).max() < 1e-10
    # A_hat[j,k,l,m] = <phi_j phi_k|A|phi_l phi_m> computed with the structured operator
    r = ens.rank
    phis = ens.matrix()
    pairs = np.array([np.kron(phis[j], phis[k]) for j in range(r) for k in range(r)])
    v = two_copy_reorder(pairs, spec.shape)
    direct = v.conj() @ apply_A(spec, v).T
    recon = np.einsum("ajk,alm->jklm", T, T.conj()).reshape(r * r, r * r)
    assert np.abs(direct - recon).max() < 1e-10


def test_tau_examples():
    T = T_of(random_density([2, 2, 2], 3, 2), C3)
    assert np.array_equal(tau([1.0], T[:1]), T[0])
    g = np.random.default_rng(0)
    z = g.normal(size=9) + 1j * g.normal(size=9)
    z /= np.linalg.norm(z)
    t = tau(z, T)
    assert np.abs(t - t.T).max() < 1e-10
    t2 = tau(np.exp(0.7j) * z, T)
    assert np.allclose(t2, np.exp(0.7j) * t)
    assert np.allclose(seminorm_bound(t2)[1], seminorm_bound(t)[1], atol=1e-14)
    with pytest.raises(ShapeError):
        tau(z[:3], T)


def test_seminorm_bound_examples():
    assert seminorm_bound(np.array([[1.0]]))[0] == 1
    assert seminorm_bound(np.diag([0.9, 0.2, 0.1]))[0] == pytest.approx(0.6, abs=1e-15)
    assert seminorm_bound(np.diag([0.2, 0.2, 0.2]))[0] == 0
    with pytest.raises(ShapeError):
        seminorm_bound(np.ones((2, 3)))


def test_optimize_examples():
    assert optimize_lower_bound(T_of(white_noise_mix(bell(), 0.9), BIP)).lower_bound == pytest.approx(0.85, abs=1e-12)
    assert optimize_lower_bound(T_of(bell().projector(), BIP)).lower_bound == pytest.approx(1, abs=1e-12)
    assert optimize_lower_bound(T_of(DensityMatrix([2, 2], np.eye(4) / 4), BIP)).lower_bound == 0


def test_bound_report_invariant():
    T = T_of(random_density([2, 2, 2], 2, 7), C3)
    rep = optimize_lower_bound(T, restarts=3, seed=1)
    value, s = seminorm_bound(tau(rep.z_opt, T))
    assert rep.lower_bound == pytest.approx(value, abs=1e-12)
    assert np.allclose(rep.singular_values, s)
    assert abs(np.linalg.norm(rep.z_opt) - 1) < 1e-12
    assert rep.restarts_used == 3


def test_optimize_is_deterministic_and_thread_independent():
    T = T_of(random_density([2, 2, 2], 3, 8), C3)
    a = optimize_lower_bound(T, restarts=4, seed=5)
    b = optimize_lower_bound(T, restarts=4, seed=5, threads=3)
    assert a.lower_bound == b.lower_bound
    assert np.array_equal(a.z_opt, b.z_opt)


def test_optimize_monotone_in_restarts():
    T = T_of(random_density([2, 2, 2], 4, 3), C3)
    values = [optimize_lower_bound(T, restarts=k, seed=2).lower_bound for k in (1, 2, 4, 6)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_exact_rank_one_examples():
    for seed in range(40):
        rho = random_density([2, 2], seed % 4 + 1, seed)
        assert exact_rank_one(rho, BIP) == pytest.approx(wootters(rho.matrix), abs=1e-8)
    assert exact_rank_one(white_noise_mix(ghz([0.5, 0.5], 4), 0.0), C4) == pytest.approx(0, abs=1e-15)
    assert exact_rank_one(ghz([0.5, 0.5], 4).projector(), C4) == pytest.approx(1, abs=1e-12)
    with pytest.raises(SpecError):
        exact_rank_one(random_density([2, 2, 2], 2, 0), C3)
    with pytest.raises(SpecError):
        exact_rank_one(random_density([3, 3], 2, 0), named_spec("bipartite", [3, 3]))


def test_quasi_pure_examples():
    psi = random_pure([2, 2, 2], 6)
    _, value = quasi_pure(spectral_ensemble(psi.projector()), C3)
    assert value == pytest.approx(evaluate(C3, psi), abs=1e-12)
    rho = DensityMatrix([2, 2], (1 - 1e-3) * np.outer(bell().amplitudes, bell().amplitudes) + 1e-3 * np.eye(4) / 4)
    _, value = quasi_pure(spectral_ensemble(rho), BIP)
    assert abs(value - wootters(rho.matrix)) <= 0.05


def test_quasi_pure_denominator_zero():
    product = basis_state([2] * 4, [0, 1, 0, 1]).amplitudes
    g = ghz([0.5, 0.5], 4).amplitudes
    rho = DensityMatrix([2] * 4, 0.6 * np.outer(product, product) + 0.4 * np.outer(g, g))
    with pytest.raises(QuasiPureDenominatorError):
        quasi_pure(spectral_ensemble(rho), C4)


def test_quasi_pure_nonorthogonal_mixture_has_entangled_top_vector():
    # |0000> overlaps the GHZ state, so the top eigenvector is a|0000> + b|1111> with b != 0
    product = basis_state([2] * 4, [0, 0, 0, 0]).amplitudes
    g = ghz([0.5, 0.5], 4).amplitudes
    rho = DensityMatrix([2] * 4, 0.6 * np.outer(product, product) + 0.4 * np.outer(g, g))
    _, value = quasi_pure(spectral_ensemble(rho), C4)
    assert value == pytest.approx(exact_rank_one(rho, C4), abs=1e-12)


def test_quasi_pure_degenerate_top_picks_largest_denominator():
    a = basis_state([2, 2], [0, 1]).amplitudes
    b = bell().amplitudes
    rho = DensityMatrix([2, 2], 0.5 * np.outer(a, a) + 0.5 * np.outer(b, b))
    ens = spectral_ensemble(rho)
    assert ens.degenerate_top
    _, value = quasi_pure(ens, BIP)
    assert value >= 0


def test_quasi_pure_matches_T_route():
    rho = random_density([2, 3, 2], 3, 12)
    spec = named_spec("CN", [2, 3, 2])
    ens = spectral_ensemble(rho)
    t_qp, _ = quasi_pure(ens, spec)
    T = coefficient_matrices(ens, chi_vectors(spec))
    z = T[:, 0, 0].conj()
    # tau_qp = <phi1 phi1|A|phi_i phi_j> is the conjugate of tau(z_qp)
    assert np.abs(t_qp - tau(z / np.linalg.norm(z), T).conj()).max() < 1e-10


def test_roof_examples():
    psi = random_pure([2, 2, 2], 3)
    est = roof_direct_search(psi.projector(), C3)
    assert est.upper_bound == pytest.approx(evaluate(C3, psi), abs=1e-12)
    assert np.allclose(est.isometry, [[1]])
    est = roof_direct_search(white_noise_mix(bell(), 0.9), BIP, m=4, restarts=4, seed=0)
    assert abs(est.upper_bound - 0.85) < 1e-3
    est = roof_direct_search(DensityMatrix([2, 2], np.eye(4) / 4), BIP, m=4, restarts=4, seed=0)
    assert est.upper_bound <= 1e-6


def test_roof_estimate_invariants():
    rho = random_density([2, 2, 2], 3, 21)
    est = roof_direct_search(rho, C3, restarts=2, seed=4)
    v = est.isometry
    assert np.abs(v.conj().T @ v - np.eye(3)).max() < 1e-10
    recon = sum(np.outer(p.amplitudes, p.amplitudes.conj()) for p in est.decomposition)
    assert np.abs(recon - rho.matrix).max() < 1e-8
    assert est.upper_bound == pytest.approx(sum(evaluate(C3, p) for p in est.decomposition), abs=1e-10)
    with pytest.raises(ShapeError):
        roof_direct_search(rho, C3, m=2)
    with pytest.raises(ShapeError):
        roof_direct_search(rho, C3, m=10)


def test_roof_thread_independent():
    rho = random_density([2, 2], 3, 2)
    a = roof_direct_search(rho, BIP, restarts=3, seed=9)
    b = roof_direct_search(rho, BIP, restarts=3, seed=9, threads=3)
    assert a.upper_bound == b.upper_bound


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 4), seeds)
def test_sandwich_two_and_three_qubits(rank, seed):
    rho2 = random_density([2, 2], rank, seed)
    lo = lower_bound(rho2, BIP).lower_bound
    assert lo <= roof_direct_search(rho2, BIP, restarts=2, seed=seed).upper_bound + 1e-6
    rho3 = random_density([2, 2, 2], rank, seed)
    lo = lower_bound(rho3, C3, restarts=2, seed=seed).lower_bound
    assert lo <= roof_direct_search(rho3, C3, restarts=2, seed=seed).upper_bound + 1e-6


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 4), seeds)
def test_ensemble_covariance(rank, seed):
    ens = spectral_ensemble(random_density([2, 2, 2], rank, seed))
    chis = chi_vectors(C3)
    T = coefficient_matrices(ens, chis)
    u = random_unitary(rank, seed)
    T2 = coefficient_matrices(ens.transformed(u), chis)
    assert np.abs(T2 - np.einsum("ij,ajk,lk->ail", u.conj(), T, u.conj())).max() < 1e-10
    g = np.random.default_rng(seed)
    z = g.normal(size=9) + 1j * g.normal(size=9)
    z /= np.linalg.norm(z)
    assert seminorm_bound(tau(z, T2))[0] == pytest.approx(seminorm_bound(tau(z, T))[0], abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([("C3", [2, 2, 2]), ("bipartite", [2, 2]), ("C4", [2] * 4), ("CN", [2, 3, 2])]), seeds)
def test_pure_state_paths_agree(named, seed):
    name, dims = named
    spec = named_spec(name, dims)
    psi = random_pure(dims, seed)
    rho = psi.projector()
    target = evaluate(spec, psi)
    assert lower_bound(rho, spec).lower_bound == pytest.approx(target, abs=1e-8)
    assert quasi_pure(spectral_ensemble(rho), spec)[1] == pytest.approx(target, abs=1e-8)
    assert roof_direct_search(rho, spec).upper_bound == pytest.approx(target, abs=1e-8)
    if len(chi_vectors(spec)) == 1:
        assert exact_rank_one(rho, spec) == pytest.approx(target, abs=1e-8)


@pytest.mark.parametrize("seed", range(4))
def test_separable_mixture_has_zero_bound(seed):
    rho = separable_mixture([2, 2, 2], 3, seed)
    assert lower_bound(rho, C3, restarts=4, seed=seed).lower_bound <= 1e-8


def test_lower_bound_of_werner_curve():
    for p in np.linspace(0, 1, 11):
        assert exact_rank_one(white_noise_mix(bell(), p), BIP) == pytest.approx(werner_concurrence(p), abs=1e-12)

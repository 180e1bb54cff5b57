"""Mixed-state concurrences: lower bound, quasi-pure approximation, roof search.

Conventions
-----------
Ensemble members are subnormalized, ``|phi_i> = sqrt(mu_i) |e_i>``, and the
pure-state concurrence is degree-2 homogeneous, so ``sum_i c(psi_i)`` over a
subnormalized decomposition is the usual probability-weighted average.

For a decomposition ``|psi_i> = sum_j V_ij |phi_j>`` the overlaps with the
chi vectors are ``<psi_i psi_i|chi_a> = [V^* T^a V^dag]_ii``, with
``T^a_jk = <phi_j phi_k|chi_a>``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import QuasiPureDenominatorError, ShapeError, SpecError
from .projectors import ChiBasis, ConcurrenceSpec, apply_A, chi_vectors
from .pure import evaluate, two_copy
from .states import rng
from .tensor import INTERNAL_TOL, DensityMatrix, StateVector, two_copy_reorder

DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-8


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


@dataclass(frozen=True, eq=False)
class SpectralEnsemble:
    """Subnormalized eigenvectors sqrt(mu_i) e_i of a density matrix, mu descending."""

    members: tuple[StateVector, ...]
    eigenvalues: np.ndarray
    degenerate_top: bool = False

    @property
    def rank(self) -> int:
        return len(self.members)

    @property
    def shape(self):
        return self.members[0].shape

    def matrix(self) -> np.ndarray:
        """Members stacked as rows, shape ``(r, D)``."""
        return np.array([m.amplitudes for m in self.members])

    def transformed(self, v: np.ndarray) -> "SpectralEnsemble":
        """The decomposition psi_i = sum_j v_ij phi_j (for a square unitary ``v``)."""
        rows = np.asarray(v) @ self.matrix()
        members = tuple(StateVector(self.shape, row, "subnormalized") for row in rows)
        return SpectralEnsemble(members, np.array([m.norm_squared for m in members]))


def spectral_ensemble(rho: DensityMatrix, cutoff: float = 1e-12) -> SpectralEnsemble:
    evals, evecs = np.linalg.eigh(rho.matrix)
    if evals[0] < -INTERNAL_TOL:
        raise ShapeError(f"density matrix is not positive semidefinite (eigenvalue {evals[0]!r})")
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    trace = evals.sum()
    keep = evals > cutoff * trace
    mu = evals[keep] * trace / evals[keep].sum()
    vecs = evecs[:, keep]
    degenerate = len(mu) > 1 and (mu[0] - mu[1]) < 1e-10 * mu[0]
    members = tuple(
        StateVector(rho.shape, np.sqrt(m) * _fix_phase(vecs[:, i]), "subnormalized") for i, m in enumerate(mu)
    )
    return SpectralEnsemble(members, mu, degenerate)


def coefficient_matrices(ens: SpectralEnsemble, chis: ChiBasis) -> np.ndarray:
    """T[a, j, k] = <phi_j phi_k | chi_a>, an array of shape ``(K, r, r)``."""
    if ens.shape != chis.shape:
        raise ShapeError(f"ensemble dims {ens.shape.dims} do not match chi dims {chis.shape.dims}")
    phi = ens.matrix().conj()
    m = chis.as_matrices()
    return np.einsum("jx,axy,ky->ajk", phi, m, phi)


def tau(z, T: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (T.shape[0],):
        raise ShapeError(f"z has length {z.size}, expected {T.shape[0]}")
    return np.tensordot(z, T, axes=1)


def _singular_values(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(m, compute_uv=False)


def seminorm_bound(t: np.ndarray) -> tuple[float, np.ndarray]:
    """max(0, s_1 - sum_{j>1} s_j) for the descending singular values s of ``t``."""
    t = np.asarray(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {t.shape}")
    s = _singular_values(t)
    return max(0.0, float(s[0] - s[1:].sum())), s


@dataclass(frozen=True, eq=False)
class BoundReport:
    lower_bound: float
    z_opt: np.ndarray
    singular_values: np.ndarray
    restarts_used: int
    converged: bool
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "lower_bound": self.lower_bound,
            "z_opt": [[float(c.real), float(c.imag)] for c in self.z_opt],
            "singular_values": [float(s) for s in self.singular_values],
            "restarts_used": self.restarts_used,
            "converged": self.converged,
        }


def _z_from_params(x: np.ndarray) -> np.ndarray:
    # z_0 real (global phase gauge), remaining entries as (re, im) pairs
    z = np.empty((x.size + 1) // 2, dtype=np.complex128)
    z[0] = x[0]
    z[1:] = x[1::2] + 1j * x[2::2]
    nrm = np.linalg.norm(z)
    return z / nrm if nrm > 0 else z


def _params_from_z(z: np.ndarray) -> np.ndarray:
    z = z * (abs(z[0]) / z[0] if z[0] != 0 else 1)
    x = np.empty(2 * z.size - 1)
    x[0] = z[0].real
    x[1::2] = z[1:].real
    x[2::2] = z[1:].imag
    return x


def _raw_bound(z: np.ndarray, T: np.ndarray) -> float:
    s = _singular_values(np.tensordot(z, T, axes=1))
    return float(s[0] - s[1:].sum())


def quasi_pure_z(T: np.ndarray) -> np.ndarray | None:
    """z_a proportional to conj(T^a_00); tau(z) is then the conjugate of the quasi-pure matrix."""
    z = T[:, 0, 0].conj()
    nrm = np.linalg.norm(z)
    return None if nrm < 1e-14 else z / nrm


def _neg_bound_and_grad(x: np.ndarray, T: np.ndarray):
    # h(w) = F(w)/|w| with F = s_1 - sum_{k>1} s_k of tau(w); scale-free in w
    k = T.shape[0]
    w = x[:k] + 1j * x[k:]
    n = np.linalg.norm(w)
    u, s, vh = np.linalg.svd(np.tensordot(w, T, axes=1))
    c = -np.ones(s.size)
    c[0] = 1.0
    f = float(c @ s)
    # ds_k = Re(u_k^H dtau v_k)
    g = np.einsum("k,jk,ajl,kl->a", c, u.conj(), T, vh.conj())
    grad_f = np.concatenate([g.real, -g.imag])
    h = f / n
    return -h, -(grad_f / n - f * x / n**3)


def _z_restart(T: np.ndarray, tol: float, seed: int, index: int, maxiter: int):
    k = T.shape[0]
    z0 = quasi_pure_z(T) if index == 0 else None
    if z0 is None:
        g = rng(seed, index)
        z0 = g.standard_normal(k) + 1j * g.standard_normal(k)
        z0 /= np.linalg.norm(z0)
    smooth = minimize(
        _neg_bound_and_grad,
        np.concatenate([z0.real, z0.imag]),
        args=(T,),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": maxiter, "gtol": tol * 1e-4, "ftol": tol * 1e-7},
    )
    w = smooth.x[:k] + 1j * smooth.x[k:]
    # simplex polish: the objective has kinks where singular values cross
    p = _params_from_z(w / np.linalg.norm(w))
    d = p.size
    simplex = np.vstack([p, p + 1e-3 * np.eye(d)])
    polish = minimize(
        lambda x: -_raw_bound(_z_from_params(x), T),
        p,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": tol, "fatol": tol, "maxiter": 30 * d, "adaptive": True},
    )
    z = _z_from_params(polish.x)
    return _raw_bound(z, T), z, bool(smooth.success or polish.success)


def _best(results):
    # strict comparison in restart order: ties go to the lowest index
    best = 0
    for i, r in enumerate(results):
        if r[0] > results[best][0]:
            best = i
    return results[best]


def optimize_lower_bound(
    T: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    threads: int = 1,
    maxiter: int | None = None,
) -> BoundReport:
    """Maximize the singular-value bound over unit complex z.

    Restart 0 starts from the quasi-pure direction; the others from
    Gaussian random directions drawn from the substream ``(seed, index)``.
    Each start is refined with L-BFGS on analytic singular-value gradients
    and then polished with a small Nelder-Mead simplex.  For a rank-one
    ensemble the optimum z = conj(T)/|T| is used directly.  The result does
    not depend on ``threads``.

    Parameters
    ----------
    T : ndarray, shape (K, r, r)
        Coefficient matrices from :func:`coefficient_matrices`.
    restarts : int
        Number of Nelder-Mead runs.
    tol : float
        Simplex tolerance on parameters and objective.
    seed : int
    threads : int
        Worker threads for independent restarts.
    maxiter : int, optional
        L-BFGS iteration cap per restart; default 500.

    Returns
    -------
    BoundReport
    """
    T = np.asarray(T, dtype=np.complex128)
    if T.ndim != 3 or T.shape[0] == 0:
        raise ShapeError("coefficient matrices must be a nonempty (K, r, r) array")
    if T.shape[0] == 1:
        z = np.ones(1, dtype=np.complex128)
        value, s = seminorm_bound(T[0])
        return BoundReport(value, z, s, 0, True, (value,))
    if T.shape[1] == 1:
        z = quasi_pure_z(T)
        if z is None:
            z = np.eye(T.shape[0], 1, dtype=np.complex128).ravel()
        value, s = seminorm_bound(tau(z, T))
        return BoundReport(value, z, s, 0, True, (value,))
    restarts = max(1, int(restarts))
    if maxiter is None:
        maxiter = 500
    run = lambda i: _z_restart(T, tol, seed, i, maxiter)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]
    raw, z, ok = _best(results)
    value, s = seminorm_bound(tau(z, T))
    return BoundReport(value, z, s, restarts, ok, tuple(max(0.0, r[0]) for r in results))


def lower_bound(rho: DensityMatrix, spec: ConcurrenceSpec, **kwargs) -> BoundReport:
    T = coefficient_matrices(spectral_ensemble(rho), chi_vectors(spec))
    return optimize_lower_bound(T, **kwargs)


def exact_rank_one(rho: DensityMatrix, spec: ConcurrenceSpec) -> float:
    """Convex-roof value for specs whose operator A has rank one."""
    chis = chi_vectors(spec)
    if len(chis) != 1:
        raise SpecError(f"A has rank {len(chis)} for this spec; use optimize_lower_bound instead")
    T = coefficient_matrices(spectral_ensemble(rho), chis)
    return seminorm_bound(T[0])[0]


def quasi_pure(ens: SpectralEnsemble, spec: ConcurrenceSpec) -> tuple[np.ndarray, float]:
    """Quasi-pure matrix tau_ij = <phi_1 phi_1|A|phi_i phi_j> / sqrt(<phi_1 phi_1|A|phi_1 phi_1>) and its bound.

    If the top eigenvalue is degenerate, the vector of the degenerate
    eigenbasis with the largest denominator plays the role of phi_1.
    """
    phis = list(ens.members)
    top = [0]
    if ens.degenerate_top:
        mu0 = ens.eigenvalues[0]
        top = [i for i, mu in enumerate(ens.eigenvalues) if mu0 - mu < 1e-10 * mu0]
    a_cache = {}

    def a_phi(i):
        if i not in a_cache:
            a_cache[i] = apply_A(spec, two_copy(phis[i]))
        return a_cache[i]

    denoms = [float(np.vdot(two_copy(phis[i]), a_phi(i)).real) for i in top]
    lead = top[int(np.argmax(denoms))]
    denom = max(denoms)
    if denom <= 1e-14:
        raise QuasiPureDenominatorError(
            f"dominant eigenvector has vanishing concurrence (<phi1 phi1|A|phi1 phi1> = {denom:.3e})"
        )
    if lead != 0:
        phis[0], phis[lead] = phis[lead], phis[0]
    shape = ens.shape
    stack = np.array([p.amplitudes for p in phis])
    a1 = a_phi(lead)
    # <phi_i phi_j|A|phi_1 phi_1>, conjugated below
    m = two_copy_reorder(a1, shape, inverse=True).reshape(shape.total, shape.total)
    overlaps = stack.conj() @ m @ stack.conj().T
    t = overlaps.conj() / np.sqrt(denom)
    return t, seminorm_bound(t)[0]


@dataclass(frozen=True, eq=False)
class RoofEstimate:
    upper_bound: float
    isometry: np.ndarray
    decomposition: tuple[StateVector, ...]
    restarts_used: int
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "upper_bound": self.upper_bound,
            "members": len(self.decomposition),
            "restarts_used": self.restarts_used,
        }


def _member_overlaps(u: np.ndarray, T: np.ndarray) -> np.ndarray:
    # t[i, a] = [u T^a u^T]_ii with u = conj(V)
    return np.einsum("ij,ajk,ik->ia", u, T, u)


def _roof_value(u, T, eps):
    g2 = np.sum(np.abs(_member_overlaps(u, T)) ** 2, axis=1)
    return float(np.sum(np.sqrt(g2 + eps * eps) - eps))


def _roof_grad(u, T, eps):
    t = _member_overlaps(u, T)
    g = np.sqrt(np.sum(np.abs(t) ** 2, axis=1) + eps * eps)
    # df = Re sum_ij W_ij du_ij with W_i = (2/g_i) sum_a conj(t_ia) T^a u_i
    tu = np.einsum("ajk,ik->iaj", T, u)
    w = 2 * np.einsum("ia,iaj->ij", t.conj(), tu) / g[:, None]
    return w.conj()


def _retract(x):
    a, _, bh = np.linalg.svd(x, full_matrices=False)
    return a @ bh


def _stiefel_descent(u, T, eps, iters, gtol):
    f = _roof_value(u, T, eps)
    step = 0.1
    for _ in range(iters):
        eg = _roof_grad(u, T, eps)
        h = u.conj().T @ eg
        rg = eg - u @ ((h + h.conj().T) / 2)
        gn2 = float(np.sum(np.abs(rg) ** 2))
        if gn2 < gtol * gtol:
            break
        while step > 1e-14:
            cand = _retract(u - step * rg)
            fc = _roof_value(cand, T, eps)
            if fc <= f - 1e-4 * step * gn2:
                u, f = cand, fc
                step *= 2
                break
            step /= 2
        else:
            break
    return u


def _roof_restart(T, m, seed, index, iters):
    r = T.shape[1]
    if index == 0:
        u = np.zeros((m, r), dtype=np.complex128)
        u[:r, :r] = np.eye(r)
    else:
        g = rng(seed, index)
        u = _retract(g.standard_normal((m, r)) + 1j * g.standard_normal((m, r)))
    for eps in (1e-2, 1e-4, 1e-6, 1e-8):
        u = _stiefel_descent(u, T, eps, iters, gtol=1e-10)
    return _roof_value(u, T, 0.0), u


def roof_direct_search(
    rho: DensityMatrix,
    spec: ConcurrenceSpec,
    m: int | None = None,
    restarts: int = 8,
    seed: int = 0,
    threads: int = 1,
    iters: int = 300,
) -> RoofEstimate:
    """Upper bound on the convex roof by searching over m x r isometries.

    Restart 0 starts at the spectral decomposition (padded with zero
    members); the others start from orthonormalized Gaussian matrices.
    Each start is refined by Riemannian gradient descent on the isometry
    manifold, with a smoothing ``sqrt(g^2 + eps^2) - eps`` of each member's
    concurrence that is tightened from 1e-2 to 1e-8.
    """
    ens = spectral_ensemble(rho)
    r = ens.rank
    if m is None:
        m = min(r * r, 2 * r)
    if not r <= m <= r * r:
        raise ShapeError(f"number of members m={m} must satisfy {r} <= m <= {r * r}")
    if r == 1:
        v = np.ones((1, 1), dtype=np.complex128)
        members = ens.members
        return RoofEstimate(evaluate(spec, members[0]), v, members, 0, ())
    T = coefficient_matrices(ens, chi_vectors(spec))
    restarts = max(1, int(restarts))
    run = lambda i: _roof_restart(T, m, seed, i, iters)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]
    best = 0
    for i, res in enumerate(results):
        if res[0] < results[best][0]:
            best = i
    u = results[best][1]
    v = u.conj()
    rows = v @ ens.matrix()
    members = tuple(StateVector(rho.shape, row, "subnormalized") for row in rows if np.vdot(row, row).real > 0)
    upper = float(sum(evaluate(spec, p) for p in members))
    return RoofEstimate(upper, v, members, restarts, tuple(res[0] for res in results))

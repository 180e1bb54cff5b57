"""Reference states and seeded random states."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ShapeError
from .tensor import DensityMatrix, StateVector, SystemShape, as_shape, tensor_product


def rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for ``seed``, optionally split into a substream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


def basis_state(dims, index: Sequence[int]) -> StateVector:
    shape = as_shape(dims)
    amps = np.zeros(shape.dims, dtype=np.complex128)
    amps[tuple(index)] = 1
    return StateVector(shape, amps.ravel())


def ghz(weights: Sequence[float], n: int, d: int = 2) -> StateVector:
    """sum_i sqrt(lambda_i) |i...i> on ``n`` parties of local dimension ``d``.

    Fewer than ``d`` weights are padded with zeros.
    """
    lam = np.asarray(weights, dtype=float)
    if n < 2:
        raise ShapeError("GHZ states need at least two parties")
    if lam.size > d:
        raise ShapeError(f"{lam.size} Schmidt weights do not fit local dimension {d}")
    if np.any(lam < 0) or abs(lam.sum() - 1) > 1e-12:
        raise ShapeError("Schmidt weights must be nonnegative and sum to 1")
    shape = SystemShape((d,) * n)
    amps = np.zeros(shape.total, dtype=np.complex128)
    stride = sum(d ** k for k in range(n))
    for i, l in enumerate(lam):
        amps[i * stride] = np.sqrt(l)
    return StateVector(shape, amps)


def bell() -> StateVector:
    return ghz([0.5, 0.5], 2)


def w_state(n: int) -> StateVector:
    if n < 2:
        raise ShapeError("W states need at least two parties")
    amps = np.zeros(2 ** n, dtype=np.complex128)
    for k in range(n):
        amps[1 << k] = 1 / np.sqrt(n)
    return StateVector(SystemShape((2,) * n), amps)


def permute_subsystems(psi: StateVector, placement: Sequence[int]) -> StateVector:
    """Move subsystem ``i`` of ``psi`` to position ``placement[i]``."""
    n = psi.shape.n_parties
    placement = [int(p) for p in placement]
    if sorted(placement) != list(range(n)):
        raise ShapeError(f"{placement} is not a permutation of range({n})")
    source = np.argsort(placement)
    t = np.transpose(psi.tensor(), source)
    return StateVector(psi.shape.restrict(source), t.ravel(), psi.norm_tag)


def biseparable(phi: StateVector, zeta: StateVector, placement: Sequence[int] | None = None) -> StateVector:
    """phi (x) zeta with subsystems rearranged by ``placement``.

    ``placement[i]`` is the final position of the i-th subsystem of the
    concatenation phi (x) zeta; ``None`` keeps the concatenation order.
    """
    out = tensor_product(phi, zeta)
    if placement is None:
        return out
    return permute_subsystems(out, placement)


def random_pure(dims, seed: int) -> StateVector:
    """Haar-random pure state from normalized complex Gaussian amplitudes."""
    shape = as_shape(dims)
    g = rng(seed)
    v = g.standard_normal(shape.total) + 1j * g.standard_normal(shape.total)
    return StateVector(shape, v / np.linalg.norm(v))


def random_density(dims, rank: int, seed: int) -> DensityMatrix:
    """Hilbert-Schmidt induced random state G G^dag / Tr, G of size D x rank."""
    shape = as_shape(dims)
    if not 1 <= rank <= shape.total:
        raise ShapeError(f"rank must be in [1, {shape.total}], got {rank}")
    g = rng(seed)
    a = g.standard_normal((shape.total, rank)) + 1j * g.standard_normal((shape.total, rank))
    m = a @ a.conj().T
    return DensityMatrix(shape, m / np.trace(m).real)


def random_unitary(d: int, seed: int) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phase correction."""
    g = rng(seed)
    z = (g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_local_unitaries(dims, seed: int) -> list[np.ndarray]:
    shape = as_shape(dims)
    seq = np.random.SeedSequence(int(seed)).generate_state(shape.n_parties)
    return [random_unitary(n, int(s)) for n, s in zip(shape.dims, seq)]


def apply_local(psi: StateVector, unitaries: Sequence[np.ndarray]) -> StateVector:
    t = psi.tensor()
    for i, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [i])), 0, i)
    return StateVector(psi.shape, t.ravel(), psi.norm_tag)


def white_noise_mix(psi: StateVector, visibility: float) -> DensityMatrix:
    if not 0 <= visibility <= 1:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    if psi.norm_tag != "normalized":
        raise ShapeError("white_noise_mix needs a normalized state")
    d = psi.shape.total
    proj = np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityMatrix(psi.shape, visibility * proj + (1 - visibility) * np.eye(d) / d)


def separable_mixture(dims, n_terms: int, seed: int) -> DensityMatrix:
    """Random fully separable state sum_i p_i (x)_j rho_j^(i)."""
    shape = as_shape(dims)
    g = rng(seed)
    p = g.dirichlet(np.ones(n_terms))
    out = np.zeros((shape.total, shape.total), dtype=np.complex128)
    for pi in p:
        term = np.ones((1, 1))
        for n in shape.dims:
            a = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
            loc = a @ a.conj().T
            term = np.kron(term, loc / np.trace(loc).real)
        out += pi * term
    return DensityMatrix(shape, out)

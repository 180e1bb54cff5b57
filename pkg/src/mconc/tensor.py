"""Linear algebra on factorized Hilbert spaces.

Composite indices are row-major with subsystem 0 as the most significant
digit, i.e. ``psi.reshape(dims)[i_0, ..., i_{N-1}]``.  Subsystem indices in
the Python API are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeError

INGEST_TOL = 1e-8
INTERNAL_TOL = 1e-10
ROUNDOFF_TOL = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SystemShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) == 0:
            raise ShapeError("a system needs at least one subsystem")
        if any(n < 2 for n in dims):
            raise ShapeError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def restrict(self, subsystems: Sequence[int]) -> "SystemShape":
        return SystemShape(tuple(self.dims[i] for i in subsystems))

    def __add__(self, other: "SystemShape") -> "SystemShape":
        return SystemShape(self.dims + other.dims)


def as_shape(shape) -> SystemShape:
    return shape if isinstance(shape, SystemShape) else SystemShape(tuple(shape))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitude vector over ``shape``.

    ``norm_tag`` is ``"normalized"`` (norm 1 within 1e-8) or
    ``"subnormalized"`` (0 < <psi|psi> <= 1 + 1e-8), the latter used for
    members of an ensemble decomposition.
    """

    shape: SystemShape
    amplitudes: np.ndarray
    norm_tag: str = "normalized"

    def __post_init__(self):
        shape = as_shape(self.shape)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size != shape.total:
            raise ShapeError(f"expected {shape.total} amplitudes for dims {shape.dims}, got {amps.size}")
        nrm2 = float(np.vdot(amps, amps).real)
        if self.norm_tag == "normalized":
            if abs(nrm2 - 1) > INGEST_TOL:
                raise ShapeError(f"state is not normalized: <psi|psi> = {nrm2!r}")
        elif self.norm_tag == "subnormalized":
            if not (0 < nrm2 <= 1 + INGEST_TOL):
                raise ShapeError(f"subnormalized state needs 0 < <psi|psi> <= 1, got {nrm2!r}")
        else:
            raise ValueError(f"unknown norm_tag {self.norm_tag!r}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape.dims)

    def projector(self) -> "DensityMatrix":
        if self.norm_tag != "normalized":
            raise ShapeError("only normalized states define a density matrix")
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix over ``shape``.

    On construction the matrix is checked at ingestion tolerance (1e-8 for
    hermiticity and trace), hermitized, and eigenvalues in ``[-1e-10, 0)``
    are clipped to zero followed by renormalization (eigenvalues above
    -1e-14 count as round-off and leave the matrix untouched).  More negative
    eigenvalues are rejected.
    """

    shape: SystemShape
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = as_shape(self.shape)
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = shape.total
        if m.shape != (d, d):
            raise ShapeError(f"expected a {d}x{d} matrix for dims {shape.dims}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > INGEST_TOL:
            raise ShapeError("density matrix is not hermitian")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1) > INGEST_TOL:
            raise ShapeError(f"density matrix trace is {tr!r}, expected 1")
        evals, evecs = np.linalg.eigh(m)
        if evals[0] < -INTERNAL_TOL:
            raise ShapeError(f"density matrix has negative eigenvalue {evals[0]!r}")
        # round-off negatives are left alone so that ingestion is idempotent
        if evals[0] < -ROUNDOFF_TOL:
            evals = np.clip(evals, 0, None)
            m = (evecs * evals) @ evecs.conj().T
            m = (m + m.conj().T) / 2
            m = m / np.trace(m).real
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", _frozen(m))

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.shape.dims * 2)


def check_subset(shape: SystemShape, subsystems: Iterable[int]) -> tuple[int, ...]:
    """Validate a nonempty proper subset of subsystem indices; return it sorted."""
    members = tuple(int(i) for i in subsystems)
    n = shape.n_parties
    if len(members) == 0:
        raise ShapeError("subset must be nonempty")
    if len(set(members)) != len(members):
        raise ShapeError(f"duplicate subsystem indices in {members}")
    if any(i < 0 or i >= n for i in members):
        raise ShapeError(f"subsystem index out of range for {n} parties: {members}")
    if len(members) == n:
        raise ShapeError("subset must be a proper subset of the subsystems")
    return tuple(sorted(members))


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    tag = "normalized" if a.norm_tag == b.norm_tag == "normalized" else "subnormalized"
    return StateVector(a.shape + b.shape, np.kron(a.amplitudes, b.amplitudes), tag)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the subsystems in ``keep``.

    Parameters
    ----------
    rho : DensityMatrix
    keep : iterable of int
        0-based indices of the subsystems to keep; nonempty proper subset.

    Returns
    -------
    DensityMatrix
        Marginal with ``shape`` restricted to ``keep`` (in ascending order).
    """
    keep = check_subset(rho.shape, keep)
    n = rho.shape.n_parties
    ket = list(range(n))
    bra = [i + n if i in keep else i for i in range(n)]
    out = list(keep) + [i + n for i in keep]
    reduced = np.einsum(rho.tensor(), ket + bra, out)
    sub = rho.shape.restrict(keep)
    return DensityMatrix(sub, reduced.reshape(sub.total, sub.total))


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    return float(np.sum(np.abs(m) ** 2))


def marginal_purity(psi: StateVector, subsystems: Iterable[int]) -> float:
    """Tr rho_S^2 for the pure (possibly subnormalized) state ``psi``.

    Uses the smaller of S and its complement for the Gram matrix, which
    gives the same value for pure states.
    """
    shape = psi.shape
    s = check_subset(shape, subsystems)
    rest = tuple(i for i in range(shape.n_parties) if i not in s)
    ds = int(np.prod([shape.dims[i] for i in s]))
    m = np.transpose(psi.tensor(), s + rest).reshape(ds, -1)
    gram = m @ m.conj().T if ds <= m.shape[1] else m.conj().T @ m
    return float(np.sum(np.abs(gram) ** 2))


def _copy_axes(n: int) -> list[int]:
    # axis order (a_0, b_0, a_1, b_1, ...) taken from (a_0..a_{N-1}, b_0..b_{N-1})
    axes = []
    for i in range(n):
        axes += [i, i + n]
    return axes


def two_copy_reorder(vec, shape, inverse: bool = False) -> np.ndarray:
    """Map a vector on (H_1..H_N) x (H_1..H_N) to H_1 x H_1 x ... x H_N x H_N.

    With ``inverse=True`` the map goes the other way.  Both directions are
    fixed basis permutations, so norms and inner products are preserved.
    """
    shape = as_shape(shape)
    v = np.asarray(vec)
    d = shape.total
    if v.shape[-1] != d * d:
        raise ShapeError(f"expected length {d * d} on the doubled space, got {v.shape[-1]}")
    n = shape.n_parties
    lead = v.shape[:-1]
    k = len(lead)
    axes = _copy_axes(n)
    if inverse:
        t = v.reshape(lead + tuple(np.repeat(shape.dims, 2)))
        axes = list(np.argsort(axes))
    else:
        t = v.reshape(lead + shape.dims * 2)
    t = np.transpose(t, list(range(k)) + [a + k for a in axes])
    return t.reshape(lead + (d * d,))

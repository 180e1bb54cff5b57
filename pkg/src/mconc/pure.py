"""Pure-state concurrences."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ShapeError, SpecError
from .projectors import ConcurrenceSpec, expectation_A
from .tensor import INGEST_TOL, StateVector, marginal_purity, two_copy_reorder

CLAMP_TOL = 1e-12


def two_copy(psi: StateVector) -> np.ndarray:
    """|psi>|psi> in the per-subsystem copy ordering."""
    return two_copy_reorder(np.kron(psi.amplitudes, psi.amplitudes), psi.shape)


def evaluate(spec: ConcurrenceSpec, psi: StateVector) -> float:
    """Generalized concurrence sqrt(<psi psi|A|psi psi>).

    ``psi`` may be subnormalized; the value scales with <psi|psi>, which is
    what makes sums over ensemble members reproduce weighted averages.
    """
    if psi.shape != spec.shape:
        raise ShapeError(f"state dims {psi.shape.dims} do not match spec dims {spec.shape.dims}")
    return float(np.sqrt(expectation_A(spec, two_copy(psi))))


def _clamped_sqrt(x: float, what: str) -> float:
    if x < -CLAMP_TOL:
        raise NumericalError(f"{what} is negative beyond tolerance: {x!r}")
    return float(np.sqrt(max(x, 0.0)))


def closed_form_CN(psi: StateVector) -> float:
    """C_N from the purities of all 2^N - 2 proper marginals.

    Parameters
    ----------
    psi : StateVector
        Normalized state on N >= 2 parties.

    Returns
    -------
    float
        ``2^(1 - N/2) sqrt((2^N - 2) - sum_S Tr rho_S^2)``.
    """
    if psi.norm_tag != "normalized" or abs(psi.norm_squared - 1) > INGEST_TOL:
        raise ShapeError("closed_form_CN requires a normalized state")
    n = psi.shape.n_parties
    if n < 2:
        raise SpecError("C_N needs at least two parties")
    full = (1 << n) - 1
    total = 0.0
    # S and its complement have equal purity for pure states
    for mask in range(1, full):
        comp = full ^ mask
        if mask > comp:
            continue
        members = [i for i in range(n) if mask >> (n - 1 - i) & 1]
        total += 2 * marginal_purity(psi, members)
    radicand = (2 ** n - 2) * psi.norm_squared ** 2 - total
    return 2 ** (1 - n / 2) * _clamped_sqrt(radicand, "C_N radicand")


def eta(phi: StateVector, spec_bipartite: ConcurrenceSpec) -> float:
    c = evaluate(spec_bipartite, phi)
    if c > 2 + 1e-10:
        raise NumericalError(f"bipartite concurrence {c!r} exceeds 2")
    return float(np.sqrt(max(0.0, 1 - c * c / 4)))


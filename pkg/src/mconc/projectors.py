"""Two-copy projectors and the weighted operator A built from them.

A sign string such as ``"+--"`` selects, per subsystem, the projector onto
the symmetric (``+``) or antisymmetric (``-``) subspace of the two copies
of that subsystem.  A :class:`ConcurrenceSpec` attaches nonnegative weights
to sign strings; the operator is ``A = sum_s p_s (x)_i P_{s_i}``, acting on
``H_1 x H_1 x ... x H_N x H_N``.
"""

from __future__ import annotations

import itertools
import json
import re
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ShapeError, SpecError
from .tensor import SystemShape, as_shape

_SIGNS = re.compile(r"^[+-]+$")
DENSE_LIMIT = 4096


class OddMinusWarning(UserWarning):
    pass


def minus_count(signs: str) -> int:
    return signs.count("-")


def is_even(signs: str) -> bool:
    return minus_count(signs) % 2 == 0


@dataclass(frozen=True, eq=False)
class ConcurrenceSpec:
    """Nonnegative weights over sign strings for a given system shape.

    Weights are not normalized (the named concurrences use 4 and 16).
    Strings with an odd number of ``-`` are refused unless ``allow_odd``
    is set; they contribute exactly zero on two-fold copies.
    """

    shape: SystemShape
    weights: Mapping[str, float]
    allow_odd: bool = False
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        shape = as_shape(self.shape)
        weights = {}
        for s, p in dict(self.weights).items():
            if not isinstance(s, str) or not _SIGNS.match(s):
                raise SpecError(f"sign string must consist of '+' and '-', got {s!r}")
            if len(s) != shape.n_parties:
                raise SpecError(f"sign string {s!r} has length {len(s)}, system has {shape.n_parties} parties")
            p = float(p)
            if not np.isfinite(p) or p < 0:
                raise SpecError(f"weight for {s!r} must be a nonnegative number, got {p!r}")
            if not is_even(s) and not self.allow_odd:
                raise SpecError(f"odd-minus string {s!r} requires allow_odd=True")
            weights[s] = p
        if not any(p > 0 for p in weights.values()):
            raise SpecError("spec needs at least one positive weight")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "weights", weights)

    @property
    def support(self) -> dict[str, float]:
        return {s: p for s, p in self.weights.items() if p > 0}

    def even_support(self) -> dict[str, float]:
        return {s: p for s, p in self.support.items() if is_even(s)}

    def to_dict(self) -> dict:
        d = {"dims": list(self.shape.dims), "weights": dict(self.weights)}
        if self.allow_odd:
            d["allow_odd"] = True
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConcurrenceSpec":
        try:
            return cls(SystemShape(tuple(d["dims"])), dict(d["weights"]), bool(d.get("allow_odd", False)))
        except KeyError as exc:
            raise SpecError(f"spec JSON is missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ConcurrenceSpec":
        return cls.from_dict(json.loads(text))

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return ",".join(f"{s}:{p:g}" for s, p in self.support.items())


def validate_spec(spec: ConcurrenceSpec) -> tuple[ConcurrenceSpec, list[str]]:
    """Re-check ``spec`` and collect warnings about odd-minus strings."""
    spec = ConcurrenceSpec(spec.shape, spec.weights, spec.allow_odd, spec.name)
    messages = []
    for s in spec.support:
        if not is_even(s):
            msg = f"odd-minus string {s!r} contributes zero on two-fold copies and is dropped"
            warnings.warn(msg, OddMinusWarning, stacklevel=2)
            messages.append(msg)
    return spec, messages


def antisym_basis(n: int) -> np.ndarray:
    """Orthonormal basis (|jk> - |kj>)/sqrt(2), j < k, of the antisymmetric subspace.

    Returns an array of shape ``(n(n-1)/2, n*n)``.
    """
    if n < 2:
        raise ShapeError(f"local dimension must be >= 2, got {n}")
    out = []
    for j, k in itertools.combinations(range(n), 2):
        v = np.zeros(n * n)
        v[j * n + k] = 1 / np.sqrt(2)
        v[k * n + j] = -1 / np.sqrt(2)
        out.append(v)
    return np.array(out, dtype=np.complex128)


def sym_basis(n: int) -> np.ndarray:
    """Orthonormal basis |jj> and (|jk> + |kj>)/sqrt(2), j < k, of the symmetric subspace."""
    if n < 2:
        raise ShapeError(f"local dimension must be >= 2, got {n}")
    out = []
    for j in range(n):
        v = np.zeros(n * n)
        v[j * n + j] = 1
        out.append(v)
    for j, k in itertools.combinations(range(n), 2):
        v = np.zeros(n * n)
        v[j * n + k] = v[k * n + j] = 1 / np.sqrt(2)
        out.append(v)
    return np.array(out, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ChiBasis:
    """Vectors chi_a with A = sum_a |chi_a><chi_a| (even-minus part of A).

    ``vectors`` has shape ``(K, D*D)`` in the per-subsystem copy ordering.
    """

    shape: SystemShape
    vectors: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]

    def as_matrices(self) -> np.ndarray:
        """Each chi_a as a D x D matrix M with chi_a = sum_xy M[x, y] |x>|y> on the plain two-copy ordering."""
        from .tensor import two_copy_reorder

        d = self.shape.total
        return two_copy_reorder(self.vectors, self.shape, inverse=True).reshape(-1, d, d)


def chi_vectors(spec: ConcurrenceSpec) -> ChiBasis:
    spec, _ = validate_spec(spec)
    dims = spec.shape.dims
    chunks = []
    for signs, p in spec.even_support().items():
        local = [antisym_basis(n) if c == "-" else sym_basis(n) for c, n in zip(signs, dims)]
        vecs = local[0]
        for b in local[1:]:
            vecs = np.einsum("ax,by->abxy", vecs, b).reshape(vecs.shape[0] * b.shape[0], -1)
        chunks.append(np.sqrt(p) * vecs)
    return ChiBasis(spec.shape, np.concatenate(chunks, axis=0))


def apply_string_projector(signs: str, v: np.ndarray, shape: SystemShape) -> np.ndarray:
    """Apply (x)_i P_{s_i} to ``v`` (last axis on the doubled, per-subsystem-ordered space)."""
    dims = shape.dims
    lead = v.shape[:-1]
    k = len(lead)
    w = v.reshape(lead + tuple(np.repeat(dims, 2)))
    for i, c in enumerate(signs):
        swapped = np.swapaxes(w, k + 2 * i, k + 2 * i + 1)
        w = (w + swapped) / 2 if c == "+" else (w - swapped) / 2
    return w.reshape(v.shape)


def _check_doubled(spec: ConcurrenceSpec, v: np.ndarray):
    d = spec.shape.total
    if v.shape[-1] != d * d:
        raise ShapeError(f"vector of length {v.shape[-1]} does not live on the doubled space of dimension {d * d}")


def apply_A(spec: ConcurrenceSpec, v) -> np.ndarray:
    """A v without materializing A; every support string is applied, odd ones included."""
    v = np.asarray(v, dtype=np.complex128)
    _check_doubled(spec, v)
    out = np.zeros_like(v)
    for signs, p in spec.support.items():
        out += p * apply_string_projector(signs, v, spec.shape)
    return out


def expectation_A(spec: ConcurrenceSpec, v) -> float:
    """<v|A|v> evaluated as sum_s p_s ||P_s v||^2, which cannot go negative."""
    v = np.asarray(v, dtype=np.complex128)
    _check_doubled(spec, v)
    total = 0.0
    for signs, p in spec.support.items():
        w = apply_string_projector(signs, v, spec.shape)
        total += p * float(np.vdot(w, w).real)
    return total


def _swap_matrix(n: int) -> np.ndarray:
    s = np.zeros((n * n, n * n))
    for j in range(n):
        for k in range(n):
            s[k * n + j, j * n + k] = 1
    return s


def dense_A(spec: ConcurrenceSpec) -> np.ndarray:
    """Explicit matrix of A; only for small systems, used as a test oracle."""
    d2 = spec.shape.total ** 2
    if d2 > DENSE_LIMIT:
        raise ShapeError(f"doubled dimension {d2} exceeds the dense limit {DENSE_LIMIT}")
    out = np.zeros((d2, d2), dtype=np.complex128)
    for signs, p in spec.support.items():
        term = np.ones((1, 1))
        for c, n in zip(signs, spec.shape.dims):
            sw = _swap_matrix(n)
            local = (np.eye(n * n) + sw) / 2 if c == "+" else (np.eye(n * n) - sw) / 2
            term = np.kron(term, local)
        out += p * term
    return out


def _single(shape: SystemShape, signs: str, p: float, name: str) -> ConcurrenceSpec:
    return ConcurrenceSpec(shape, {signs: p}, name=name)


def named_spec(name: str, shape) -> ConcurrenceSpec:
    """Named concurrences: ``bipartite``, ``c3_k``, ``C3``, ``c4_ij``, ``C4``, ``CN``.

    Subsystem labels inside names are 1-based (``c3_1``, ``c4_34``).
    """
    shape = as_shape(shape)
    n = shape.n_parties

    def need(arity):
        if n != arity:
            raise SpecError(f"{name!r} is defined for {arity} parties, got dims {shape.dims}")

    if name == "bipartite":
        need(2)
        return _single(shape, "--", 4.0, name)
    if name == "C3":
        need(3)
        return ConcurrenceSpec(shape, {"+--": 4.0, "-+-": 4.0, "--+": 4.0}, name=name)
    if name == "C4":
        need(4)
        return _single(shape, "----", 16.0, name)
    if name == "CN":
        if n < 2:
            raise SpecError("CN needs at least two parties")
        strings = ("".join(t) for t in itertools.product("+-", repeat=n))
        return ConcurrenceSpec(shape, {s: 4.0 for s in strings if is_even(s) and "-" in s}, name=name)
    m = re.fullmatch(r"c3_([1-3])", name)
    if m:
        need(3)
        k = int(m.group(1)) - 1
        signs = "".join("+" if i == k else "-" for i in range(3))
        return _single(shape, signs, 4.0, name)
    m = re.fullmatch(r"c4_([1-4])([1-4])", name)
    if m:
        need(4)
        i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
        if i >= j:
            raise SpecError(f"{name!r}: use c4_ij with i < j")
        signs = "".join("+" if k in (i, j) else "-" for k in range(4))
        return _single(shape, signs, 16.0, name)
    raise SpecError(f"unknown named concurrence {name!r}")


def fingerprint_names(n_parties: int) -> list[str]:
    if n_parties == 3:
        return ["c3_1", "c3_2", "c3_3", "C3"]
    if n_parties == 4:
        pairs = [f"c4_{i + 1}{j + 1}" for i, j in itertools.combinations(range(4), 2)]
        return pairs + ["C4", "CN"]
    raise SpecError(f"fingerprints are defined for 3 or 4 parties, got {n_parties}")

"""JSON state files and report rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .tensor import DensityMatrix, StateVector, SystemShape

RENORMALIZE_TOL = 1e-6


def _pairs(values) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(values).ravel()]


def _complex(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float)
    if a.shape[-1] != 2:
        raise ShapeError("complex numbers are encoded as [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def state_to_dict(state: StateVector | DensityMatrix) -> dict:
    if isinstance(state, StateVector):
        return {"dims": list(state.shape.dims), "kind": "pure", "amplitudes": _pairs(state.amplitudes)}
    d = state.shape.total
    rows = [_pairs(state.matrix[i]) for i in range(d)]
    return {"dims": list(state.shape.dims), "kind": "mixed", "matrix": rows}


def state_from_dict(doc: dict) -> StateVector | DensityMatrix:
    try:
        shape = SystemShape(tuple(doc["dims"]))
        kind = doc["kind"]
    except KeyError as exc:
        raise ShapeError(f"state file is missing field {exc}") from None
    renorm = bool(doc.get("renormalize", False))
    if kind == "pure":
        amps = _complex(doc["amplitudes"])
        if amps.shape != (shape.total,):
            raise ShapeError(f"expected {shape.total} amplitudes, got {amps.shape}")
        nrm2 = float(np.vdot(amps, amps).real)
        if renorm and abs(nrm2 - 1) <= RENORMALIZE_TOL:
            amps = amps / np.sqrt(nrm2)
        return StateVector(shape, amps)
    if kind == "mixed":
        m = _complex(doc["matrix"])
        if m.shape != (shape.total, shape.total):
            raise ShapeError(f"expected a {shape.total}x{shape.total} matrix, got {m.shape}")
        tr = np.trace(m).real
        if renorm and abs(tr - 1) <= RENORMALIZE_TOL:
            m = m / tr
        return DensityMatrix(shape, m)
    raise ShapeError(f"unknown state kind {kind!r}")


def load_state(path) -> StateVector | DensityMatrix:
    with open(path) as fh:
        return state_from_dict(json.load(fh))


def dump_state(state, path=None) -> str:
    text = json.dumps(state_to_dict(state))
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def fmt(value) -> str:
    if isinstance(value, float):
        if np.isnan(value):
            return "nan"
        return f"{value:.12f}"
    return str(value)


@dataclass
class Report:
    """Rows of (quantity, value, spec, diagnostics) plus free-form notes."""

    rows: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, quantity: str, value, spec: str = "", **diagnostics):
        self.rows.append({"quantity": quantity, "value": value, "spec": spec, "diagnostics": diagnostics})

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows, "notes": self.notes}, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        table = [["quantity", "value", "spec", "diagnostics"]]
        for r in self.rows:
            diag = ";".join(f"{k}={_diag(v)}" for k, v in sorted(r["diagnostics"].items()))
            table.append([r["quantity"], fmt(r["value"]), r["spec"], diag])
        widths = [max(len(row[i]) for row in table) for i in range(3)]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in table:
            writer.writerow([cell.ljust(w) for cell, w in zip(row[:3], widths)] + [row[3]])
        for note in self.notes:
            buf.write(f"# {note}\n")
        return buf.getvalue()


def _diag(v) -> str:
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_diag(x) for x in v) + "]"
    return str(v)

"""JSON/CSV formats.

Complex matrices are arrays of rows, each row an array of ``[re, im]``
pairs.  Output is deterministic: keys keep insertion order and every float
is written with 17 significant digits, which round-trips doubles exactly.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ValidationError
from .extension import ExtensionParam, make_constant_param, make_polynomial_param
from .isometry import IsometryA
from .measures import Atom, DiscreteSolution, GridDistribution
from .moments import MomentSequence, validate_moments


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list):
        raise ValidationError([f"{where}: expected an array of rows"])
    if len(obj) == 0:
        return np.zeros((0, 0), dtype=complex)
    issues = []
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            issues.append(f"{where}[{i}]: expected an array of [re, im] entries")
            continue
        vals = []
        for j, e in enumerate(row):
            if (not isinstance(e, list) or len(e) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in e)):
                issues.append(f"{where}[{i}][{j}]: expected a [re, im] pair of numbers, got {e!r}")
                continue
            vals.append(complex(e[0], e[1]))
        rows.append(vals)
    if issues:
        raise ValidationError(issues)
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError([f"{where}: ragged rows (lengths {sorted(widths)})"])
    return np.array(rows, dtype=complex)


def moments_from_dict(obj) -> MomentSequence:
    if not isinstance(obj, dict):
        raise ValidationError(["top level: expected an object with keys N, d, S"])
    missing = [k for k in ("N", "d", "S") if k not in obj]
    if missing:
        raise ValidationError([f"missing key {k!r}" for k in missing])
    if not isinstance(obj["S"], list):
        raise ValidationError(["S: expected an array of matrices"])
    mats = []
    issues = []
    for n, m in enumerate(obj["S"]):
        try:
            mats.append(matrix_from_json(m, f"S[{n}]"))
        except ValidationError as exc:
            issues.extend(exc.issues)
    if issues:
        raise ValidationError(issues)
    return validate_moments(obj["N"], obj["d"], mats)


def moments_to_dict(m: MomentSequence) -> dict:
    return {"N": m.N, "d": m.d, "S": [matrix_to_json(s) for s in m.S]}


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_moments(path) -> MomentSequence:
    return moments_from_dict(load_json(path))


def param_from_dict(obj, a: IsometryA) -> ExtensionParam:
    if not isinstance(obj, dict) or "kind" not in obj or "coeffs" not in obj:
        raise ValidationError(["parameter: expected an object with keys kind, coeffs"])
    kind = obj["kind"]
    if kind not in ("constant", "polynomial"):
        raise ValidationError([f"kind: expected 'constant' or 'polynomial', got {kind!r}"])
    if not isinstance(obj["coeffs"], list) or not obj["coeffs"]:
        raise ValidationError(["coeffs: expected a non-empty array of matrices"])
    coeffs = [matrix_from_json(C, f"coeffs[{i}]") for i, C in enumerate(obj["coeffs"])]
    if kind == "constant":
        if len(coeffs) != 1:
            raise ValidationError([f"coeffs: constant parameter takes one matrix, got {len(coeffs)}"])
        return make_constant_param(a, coeffs[0])
    return make_polynomial_param(a, coeffs)


def param_to_dict(p: ExtensionParam) -> dict:
    return {"kind": p.kind, "coeffs": [matrix_to_json(C) for C in p.coeffs]}


def solution_to_dict(sol) -> dict:
    if isinstance(sol, DiscreteSolution):
        return {
            "type": "atomic",
            "atoms": [{"theta": float(at.theta), "weight": matrix_to_json(at.weight)} for at in sol.atoms],
        }
    return {
        "type": "grid",
        "r": float(sol.r_poisson),
        "thetas": [float(t) for t in sol.thetas],
        "cumulative": [matrix_to_json(M) for M in sol.cumulative],
    }


def solution_from_dict(obj, N: int):
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "atomic":
        atoms = tuple(
            Atom(float(at["theta"]), matrix_from_json(at["weight"], f"atoms[{i}].weight"))
            for i, at in enumerate(obj["atoms"])
        )
        return DiscreteSolution(N, atoms)
    if kind == "grid":
        cum = np.stack([matrix_from_json(M, f"cumulative[{i}]") for i, M in enumerate(obj["cumulative"])])
        return GridDistribution(np.asarray(obj["thetas"], dtype=float), cum, float(obj["r"]))
    raise ValidationError([f"type: expected 'atomic' or 'grid', got {kind!r}"])


def _encode(obj, indent: int, level: int) -> str:
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        pad = " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * level) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x}")
        return format(x, ".17g")
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_grid_csv(sol: GridDistribution, path) -> None:
    N = sol.N
    header = ["theta", "trace"]
    for k in range(N):
        for l in range(N):
            header += [f"m{k}_{l}_re", f"m{k}_{l}_im"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, M in zip(sol.thetas, sol.cumulative):
            row = [format(float(t), ".17g"), format(float(np.trace(M).real), ".17g")]
            for z in M.ravel():
                row += [format(float(z.real), ".17g"), format(float(z.imag), ".17g")]
            w.writerow(row)

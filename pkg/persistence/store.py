# persistence/store.py - v0.1.0
import json
import logging
import math
import os
import re

import numpy as np

from enveloping.structure import StructureConstants
from flow.diagnostics import summarize, trajectory_frame
from flow.solver import FACTORIZED, FlowProblem, FlowTolerances, FlowTrajectory
from lie.algebra import EXACT, NUMERIC, LieAlgebraError, LieElement
from lie.splitting import CUSTOM, SplittingSpec
from utils.helpers import format_rational, format_sci, parse_rational

logger = logging.getLogger(__name__)

_FLOAT_TAG = "\u0001f:"
_FLOAT_PATTERN = re.compile(r'"\\u0001f:([^"]*)"')


class FormatError(Exception):
    """Malformed input document; errors lists the individual problems."""
    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors if errors is not None else []


def _tag_floats(value):
    if isinstance(value, (bool, type(None), str, int)) and not isinstance(value, np.integer):
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return _FLOAT_TAG + format_sci(value) if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _tag_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_tag_floats(v) for v in value]
    if isinstance(value, np.ndarray):
        return _tag_floats(value.tolist())
    return str(value)


def dumps(document) -> str:
    """JSON with every float written in 17-digit scientific notation, keys in insertion order."""
    text = json.dumps(_tag_floats(document), indent=2)
    return _FLOAT_PATTERN.sub(r"\1", text)


def write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text if text.endswith("\n") else text + "\n")
    logger.info(f"Wrote {path}")


def write_json(path: str, document):
    write_text(path, dumps(document))


def read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", errors=[str(e)]) from e
    except OSError as e:
        raise FormatError(f"{path}: cannot read file: {e.strerror}", errors=[str(e)]) from e


# matrices

def matrix_to_dict(a: LieElement) -> dict:
    if a.mode == EXACT:
        rows = [[format_rational(v) for v in row] for row in a.entries.tolist()]
    else:
        rows = a.entries.tolist()
    return {"dim": a.dim, "rows": rows}


def matrix_from_dict(data: dict, mode: str | None = None) -> LieElement:
    try:
        dim = int(data["dim"])
        rows = data["rows"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"Matrix document needs 'dim' and 'rows': {e}") from e
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise FormatError(f"Matrix rows do not form a {dim}x{dim} array.")
    exact = mode == EXACT or (mode is None and any(isinstance(v, str) for row in rows for v in row))
    try:
        if exact:
            return LieElement([[parse_rational(v) for v in row] for row in rows], EXACT)
        return LieElement([[float(v) for v in row] for row in rows], NUMERIC)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise FormatError(f"Bad matrix entry: {e}") from e


# splittings

def spec_from_dict(data: dict) -> SplittingSpec:
    try:
        dim = int(data["dim"])
        kind = data["kind"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"Splitting document needs 'dim' and 'kind': {e}") from e
    try:
        if kind != CUSTOM:
            return SplittingSpec(dim, kind)
        matrix = data.get("matrix")
        if matrix is None:
            raise FormatError("Custom splitting needs a 'matrix'.")
        if any(isinstance(v, str) for row in matrix for v in row):
            matrix = np.array([[parse_rational(v) for v in row] for row in matrix], dtype=object)
        return SplittingSpec(dim, CUSTOM, matrix)
    except FormatError:
        raise
    except (ValueError, TypeError, ZeroDivisionError, LieAlgebraError) as e:
        raise FormatError(f"Invalid splitting: {e}", errors=[str(e)]) from e


def spec_to_dict(spec: SplittingSpec) -> dict:
    out = {"dim": spec.dim, "kind": spec.kind}
    if spec.kind == CUSTOM:
        if spec.matrix.dtype == object:
            out["matrix"] = [[format_rational(v) for v in row] for row in spec.matrix.tolist()]
        else:
            out["matrix"] = spec.matrix.tolist()
    return out


def load_spec(path: str) -> SplittingSpec:
    return spec_from_dict(read_json(path))


# structure constants

def load_structure_constants(path: str) -> StructureConstants:
    data = read_json(path)
    try:
        return StructureConstants.from_entries(int(data["dim"]), data.get("c", []), data.get("labels"))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: invalid structure constants: {e}") from e


def save_structure_constants(path: str, sc: StructureConstants):
    write_text(path, sc.to_json())


# flow problems

def _grid_from(data) -> list[float]:
    if isinstance(data, dict):
        start, stop, step = float(data.get("start", 0.0)), float(data["stop"]), float(data["step"])
        if not step > 0.0:
            raise FormatError(f"Grid step must be positive, got {step}.")
        count = int(round((stop - start) / step))
        return [start + k * step for k in range(count + 1)]
    return [float(t) for t in data]


def problem_from_dict(data: dict) -> FlowProblem:
    try:
        spec = spec_from_dict(data["spec"])
        a0 = matrix_from_dict(data["a0"], NUMERIC)
        grid = _grid_from(data["t_grid"])
        tolerances = FlowTolerances(**data.get("tolerances", {}))
        method = data.get("method", FACTORIZED)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise FormatError(f"Invalid flow problem document: {e}", errors=[str(e)]) from e
    return FlowProblem(spec, a0, tuple(grid), method, tolerances)


def problem_to_dict(problem: FlowProblem) -> dict:
    return {
        "spec": spec_to_dict(problem.spec),
        "a0": matrix_to_dict(problem.a0),
        "t_grid": list(problem.t_grid),
        "method": problem.method,
        "tolerances": problem.tolerances.to_dict(),
    }


def load_problem(path: str) -> FlowProblem:
    return problem_from_dict(read_json(path))


# trajectories

def trajectory_document(traj: FlowTrajectory, summary: dict | None = None) -> dict:
    summary = summary or summarize(traj)
    return {
        "problem": problem_to_dict(traj.problem),
        "summary": {k: v for k, v in summary.items() if k not in ("drift", "lax_defect")},
        "samples": [
            {
                "t": s.t,
                "a": s.a.entries.tolist(),
                "transporter": s.transporter.entries.tolist(),
                "drift": summary["drift"][k],
                "defect": summary["lax_defect"][k],
            }
            for k, s in enumerate(traj.samples)
        ],
    }


def trajectory_csv(traj: FlowTrajectory, summary: dict | None = None) -> str:
    return trajectory_frame(traj, summary).to_csv(index=False, float_format="%.16e", lineterminator="\n")


def write_trajectory(stem: str, traj: FlowTrajectory, formats=("json", "csv"), summary: dict | None = None) -> list[str]:
    """Writes <stem>.json and/or <stem>.csv; returns the paths written."""
    summary = summary or summarize(traj)
    base, ext = os.path.splitext(stem)
    if ext in (".json", ".csv"):
        stem = base
    paths = []
    if "json" in formats:
        write_json(f"{stem}.json", trajectory_document(traj, summary))
        paths.append(f"{stem}.json")
    if "csv" in formats:
        write_text(f"{stem}.csv", trajectory_csv(traj, summary))
        paths.append(f"{stem}.csv")
    return paths

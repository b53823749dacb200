"""File schemas and deterministic emission of reports and trajectories.

All emitters are byte-deterministic: dictionary insertion order is the field
order, floats are printed with 17 significant digits, integers in exact
decimal, and exact rationals as fraction strings that round-trip through
Fraction().  Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .errors import ConfigInvalid
from .gaussian import GaussianIntVector, HamiltonianModel, Trajectory, build_hamiltonian
from .ising import GraphTopology, Schedule
from .multitime import MultiTimeField
from .ontology import preset_hamiltonian, preset_names

SCHEMA_VERSION = 1


# =============================================================================
# Deterministic JSON
# =============================================================================


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize {x}")
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 2) -> str:
    out: list[str] = []
    _emit(obj, out, 0, indent)
    out.append("\n")
    return "".join(out)


def _emit(obj, out: list[str], level: int, indent: int):
    if type(obj).__module__ == "numpy":
        obj = obj.item()
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {key!r}")
            out.append(pad + json.dumps(key) + ": ")
            _emit(value, out, level + 1, indent)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(closing + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for k, value in enumerate(obj):
            out.append(pad)
            _emit(value, out, level + 1, indent)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(closing + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}: {obj!r}")


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# =============================================================================
# CSV emitters
# =============================================================================


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def trajectory_rows(traj: Trajectory) -> list[tuple[int, int, int, int]]:
    rows = []
    for k, state in enumerate(traj.states):
        n = traj.start_index + k
        for alpha, comp in enumerate(state):
            rows.append((n, alpha, comp.re, comp.im))
    return rows


def trajectory_csv(traj: Trajectory) -> str:
    return _csv_text(["n", "alpha", "re", "im"], trajectory_rows(traj))


def field_csv(field: MultiTimeField) -> str:
    rows = []
    for point in field.points():
        vec = field.get(point)
        for k, comp in enumerate(vec):
            rows.append((point[0], point[1], k, str(comp.re), str(comp.im)))
    return _csv_text(["n1", "n2", "component", "re", "im"], rows)


def parse_field_csv(text: str, dims: tuple[int, int]) -> MultiTimeField:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["n1", "n2", "component", "re", "im"]:
        raise ConfigInvalid("field csv", f"unexpected header {header}")
    length = dims[0] * dims[1]
    staged: dict[tuple[int, int], list] = {}
    for row in reader:
        if not row:
            continue
        n1, n2, k = int(row[0]), int(row[1]), int(row[2])
        vec = staged.setdefault((n1, n2), [None] * length)
        if not 0 <= k < length:
            raise ConfigInvalid("field csv", f"component index {k} out of range for dims {dims}")
        from .gaussian import GaussianRational

        vec[k] = GaussianRational(Fraction(row[3]), Fraction(row[4]))
    for point, vec in staged.items():
        if any(v is None for v in vec):
            raise ConfigInvalid("field csv", f"point {point} is missing components")
    return MultiTimeField(dims, staged)


def spin_trajectory_csv(steps: list) -> str:
    # rows of (step, vertex_bits, edge_bits, phase_exponent)
    return _csv_text(["step", "vertex_bits", "edge_bits", "phase_exponent"], steps)


def dispersion_csv(rows) -> str:
    formatted = [
        (format_float(lam), format_float(re_o), format_float(im_o))
        for lam, re_o, im_o in rows
    ]
    return _csv_text(["lambda", "re_omega", "im_omega"], formatted)


# =============================================================================
# Input file schemas
# =============================================================================


def load_json_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(str(path), "file does not exist")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid(str(path), "top level must be an object")
    return data


def model_from_mapping(data: dict, origin: str = "model") -> HamiltonianModel:
    """Model schema: {dim, S: rows, A: rows} and/or {preset: name}."""
    if "preset" in data:
        name = data["preset"]
        if name not in preset_names():
            raise ConfigInvalid(origin, f"unknown preset {name!r}; available {preset_names()}")
        model = preset_hamiltonian(name)
        if "S" in data or "A" in data:
            explicit = _matrices_from_mapping(data, origin)
            if explicit != (model.s_matrix, model.a_matrix):
                raise ConfigInvalid(origin, f"S/A entries disagree with preset {name!r}")
        if "dim" in data and int(data["dim"]) != model.dim:
            raise ConfigInvalid(origin, f"dim {data['dim']} disagrees with preset {name!r}")
        return model
    s, a = _matrices_from_mapping(data, origin)
    try:
        model = build_hamiltonian(s, a)
    except Exception as exc:
        raise ConfigInvalid(origin, str(exc)) from None
    if "dim" in data and int(data["dim"]) != model.dim:
        raise ConfigInvalid(origin, f"declared dim {data['dim']} but matrices are {model.dim}x{model.dim}")
    return model


def _matrices_from_mapping(data: dict, origin: str):
    for key in ("S", "A"):
        if key not in data:
            raise ConfigInvalid(origin, f"missing matrix {key!r}")
    try:
        s = tuple(tuple(int(x) for x in row) for row in data["S"])
        a = tuple(tuple(int(x) for x in row) for row in data["A"])
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(origin, f"matrix entries must be integers: {exc}") from None
    return s, a


def model_to_mapping(model: HamiltonianModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": model.dim,
        "S": [list(row) for row in model.s_matrix],
        "A": [list(row) for row in model.a_matrix],
    }


def load_model_file(path) -> HamiltonianModel:
    return model_from_mapping(load_json_file(path), origin=str(path))


def topology_from_mapping(data: dict, origin: str = "topology") -> GraphTopology:
    """Topology schema: {n_vertices, edges: [[i, j], ...]} or {preset, n_vertices}."""
    try:
        if "preset" in data:
            preset = data["preset"]
            n = int(data["n_vertices"])
            builders = {
                "fully_connected": GraphTopology.fully_connected,
                "ring": GraphTopology.ring,
                "path": GraphTopology.path,
            }
            if preset not in builders:
                raise ConfigInvalid(origin, f"unknown topology preset {preset!r}")
            return builders[preset](n)
        edges = tuple((int(i), int(j)) for i, j in data["edges"])
        return GraphTopology(n_vertices=int(data["n_vertices"]), edges=edges)
    except ConfigInvalid:
        raise
    except Exception as exc:
        raise ConfigInvalid(origin, str(exc)) from None


def load_topology_file(path) -> GraphTopology:
    return topology_from_mapping(load_json_file(path), origin=str(path))


def schedule_from_mapping(data: dict, origin: str = "schedule") -> Schedule:
    """Schedule schema: {kind, steps: [[i, j, sign], ...]} or {kind, seed, pool}."""
    try:
        kind = data["kind"]
        if kind in ("periodic", "explicit"):
            steps = [tuple(entry) for entry in data["steps"]]
            return Schedule.periodic(steps) if kind == "periodic" else Schedule.explicit(steps)
        if kind == "seeded_random":
            pool = [tuple(e) for e in data["pool"]]
            return Schedule.seeded_random(int(data["seed"]), pool)
        raise ConfigInvalid(origin, f"unknown schedule kind {kind!r}")
    except ConfigInvalid:
        raise
    except Exception as exc:
        raise ConfigInvalid(origin, str(exc)) from None


def load_schedule_file(path) -> Schedule:
    return schedule_from_mapping(load_json_file(path), origin=str(path))


def vector_from_config(entry, origin: str = "vector") -> GaussianIntVector:
    """Vectors are lists of components; each component is [re, im] or a bare int."""
    try:
        comps = []
        for item in entry:
            if isinstance(item, (list, tuple)):
                re, im = item
                comps.append((int(re), int(im)))
            else:
                comps.append((int(item), 0))
        from .gaussian import GaussianInt

        return GaussianIntVector(GaussianInt(r, i) for r, i in comps)
    except Exception as exc:
        raise ConfigInvalid(origin, f"bad vector entry: {exc}") from None

"""Command line interface: batch analysis driven by a JSON config.

    unilab run --config cfg.json --out report.json [--format json|csv]
    unilab validate --config cfg.json

Reports are deterministic: keys are emitted sorted, floats in a fixed
%.12e format, and the provenance block hashes the config bytes instead
of carrying timestamps. Identical configs therefore produce
byte-identical reports. Exit codes: 0 success, 1 invalid config,
2 numerical failure inside a task.
"""
from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
from functools import cached_property
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import ExpressionSyntaxError, UnilabError, UnknownIdentifierError
from .expressions import parse as parse_expr
from .fields import AnalyticFrameField, AnalyticVectorField, BodyDomain, SampledFrameField
from .foliation import (
    CONSTANT_M_FRACTION,
    FoliationClass,
    _CLASS_BY_DIM,
    report_to_csv,
    report_to_dict,
    scan_domain,
)
from .double_groupoid import (
    MaterialDoubleGroupoid,
    coarse_enumerate,
    core,
    filling_check,
    is_commutative,
    is_compatible,
    is_uniform,
    misalignment,
    normalizer_criterion,
    square_from_dict,
)
from .groupoid import FiniteGroupoid, PointSet, from_frame_field, groupoid_from_dict, is_transitive
from .infinitesimal import infinitesimal_classification
from .linalg3 import kernel_of_flattened
from .measures import CompositeSpec, SymmetryCase, evaluate_measure

TASKS = ("measure", "foliate", "squares", "misalign", "infinitesimal")

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_EXPR_ROW = {"type": "array", "items": {"type": "string"}, "minItems": 3, "maxItems": 3}
_FRAME = {
    "oneOf": [
        {"type": "array", "items": _EXPR_ROW, "minItems": 3, "maxItems": 3},
        {
            "type": "object",
            "required": ["grid"],
            "properties": {"grid": {"type": "string"}},
            "additionalProperties": False,
        },
    ]
}
_ARROW = {
    "type": "object",
    "required": ["id", "source", "target", "map"],
    "properties": {
        "id": {"type": "string"},
        "source": {"type": "string"},
        "target": {"type": "string"},
        "map": {"type": "array", "items": {"type": "number"}, "minItems": 9, "maxItems": 9},
    },
    "additionalProperties": False,
}
_PAIR = {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "composite", "tasks"],
    "properties": {
        "schema": {"const": 1},
        "domain": {
            "type": "object",
            "required": ["lower", "upper", "resolution"],
            "properties": {
                "lower": _VEC3,
                "upper": _VEC3,
                "resolution": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                    "minItems": 3,
                    "maxItems": 3,
                },
            },
            "additionalProperties": False,
        },
        "composite": {
            "type": "object",
            "required": ["case", "component1", "component2"],
            "properties": {
                "case": {"enum": [case.value for case in SymmetryCase]},
                "component1": _FRAME,
                "component2": _FRAME,
                "director": _EXPR_ROW,
                "director1": _EXPR_ROW,
                "director2": _EXPR_ROW,
            },
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "rank_rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "commutation_tol": {"type": "number", "exclusiveMinimum": 0},
                "group_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "coords"],
                "properties": {"id": {"type": "string"}, "coords": _VEC3},
                "additionalProperties": False,
            },
        },
        "pairs": {"type": "array", "items": _PAIR},
        "pair_comparisons": {
            "type": "array",
            "items": {"type": "array", "items": _PAIR, "minItems": 2, "maxItems": 2},
        },
        "groupoids": {
            "type": "object",
            "required": ["horizontal", "vertical"],
            "properties": {
                "horizontal": {
                    "type": "object",
                    "required": ["arrows"],
                    "properties": {"arrows": {"type": "array", "items": _ARROW}},
                    "additionalProperties": False,
                },
                "vertical": {
                    "type": "object",
                    "required": ["arrows"],
                    "properties": {"arrows": {"type": "array", "items": _ARROW}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "squares": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["corners", "s", "t", "s_hat", "t_hat"],
                "properties": {
                    "corners": {
                        "type": "object",
                        "required": ["W", "X", "Y", "Z"],
                        "properties": {
                            "W": {"type": "string"},
                            "X": {"type": "string"},
                            "Y": {"type": "string"},
                            "Z": {"type": "string"},
                        },
                        "additionalProperties": False,
                    },
                    "s": {"type": "string"},
                    "t": {"type": "string"},
                    "s_hat": {"type": "string"},
                    "t_hat": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "max_squares": {"type": "integer", "minimum": 1},
        "tasks": {
            "type": "array",
            "items": {"enum": list(TASKS)},
            "minItems": 1,
        },
    },
    "additionalProperties": False,
}

_TASKS_NEEDING_DOMAIN = {"measure", "foliate", "infinitesimal"}
_TASKS_NEEDING_POINTS = {"squares", "misalign"}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _expression_diagnostics(path: str, text: str) -> list[str]:
    try:
        parse_expr(text)
    except (ExpressionSyntaxError, UnknownIdentifierError) as exc:
        return [f"{path}: {exc}"]
    return []


def _frame_diagnostics(path: str, node, config_dir: Path) -> list[str]:
    out: list[str] = []
    if isinstance(node, dict):
        grid = config_dir / node["grid"]
        if not grid.is_file():
            out.append(f"{path}.grid: grid file {node['grid']!r} not found")
        return out
    for i, row in enumerate(node):
        for j, cell in enumerate(row):
            out.extend(_expression_diagnostics(f"{path}[{i}][{j}]", cell))
    return out


def validate_config(config_path) -> list[str]:
    """Structural diagnostics for a config file; empty means runnable."""
    config_path = Path(config_path)
    try:
        raw = config_path.read_bytes()
    except OSError as exc:
        return [f"config: cannot read {config_path}: {exc}"]
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        return [f"config: invalid JSON: {exc}"]

    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    schema_errors = sorted(
        validator.iter_errors(config),
        key=lambda e: (list(map(str, e.absolute_path)), e.message),
    )
    if schema_errors:
        out = []
        for err in schema_errors:
            location = ".".join(str(part) for part in err.absolute_path) or "config"
            out.append(f"{location}: {err.message}")
        return out

    out: list[str] = []
    config_dir = config_path.parent
    composite = config["composite"]
    out.extend(_frame_diagnostics("composite.component1", composite["component1"], config_dir))
    out.extend(_frame_diagnostics("composite.component2", composite["component2"], config_dir))
    for key in ("director", "director1", "director2"):
        if key in composite:
            for i, cell in enumerate(composite[key]):
                out.extend(_expression_diagnostics(f"composite.{key}[{i}]", cell))

    case = composite["case"]
    if case == "discrete-transiso" and "director" not in composite:
        out.append("composite: case discrete-transiso requires a director")
    if case == "transiso-transiso" and not (
        "director1" in composite and "director2" in composite
    ):
        out.append("composite: case transiso-transiso requires director1 and director2")

    tasks = set(config["tasks"])
    if tasks & _TASKS_NEEDING_DOMAIN and "domain" not in config:
        out.append(
            "tasks: "
            + ", ".join(sorted(tasks & _TASKS_NEEDING_DOMAIN))
            + " need a domain block"
        )
    if tasks & _TASKS_NEEDING_POINTS and not config.get("points"):
        out.append(
            "tasks: " + ", ".join(sorted(tasks & _TASKS_NEEDING_POINTS)) + " need points"
        )
    if "misalign" in tasks and not config.get("pairs"):
        out.append("tasks: misalign needs pairs")

    points = config.get("points", [])
    point_ids = [p["id"] for p in points]
    seen = set()
    for i, pid in enumerate(point_ids):
        if pid in seen:
            out.append(f"points[{i}]: duplicate point id {pid!r}")
        seen.add(pid)
    known = set(point_ids)

    def check_point(path: str, pid: str):
        if pid not in known:
            out.append(f"{path}: unknown point id {pid!r}")

    for i, pair in enumerate(config.get("pairs", [])):
        for j, pid in enumerate(pair):
            check_point(f"pairs[{i}][{j}]", pid)
    for i, comparison in enumerate(config.get("pair_comparisons", [])):
        for j, pair in enumerate(comparison):
            for k, pid in enumerate(pair):
                check_point(f"pair_comparisons[{i}][{j}][{k}]", pid)

    arrow_ids: dict[str, set[str]] = {"horizontal": set(), "vertical": set()}
    if "groupoids" in config:
        for side in ("horizontal", "vertical"):
            for i, arrow in enumerate(config["groupoids"][side]["arrows"]):
                check_point(f"groupoids.{side}.arrows[{i}].source", arrow["source"])
                check_point(f"groupoids.{side}.arrows[{i}].target", arrow["target"])
                arrow_ids[side].add(arrow["id"])
    else:
        generated = {f"{a}->{b}" for a in known for b in known}
        arrow_ids["horizontal"] = generated
        arrow_ids["vertical"] = set(generated)

    for i, sq in enumerate(config.get("squares", [])):
        for corner in ("W", "X", "Y", "Z"):
            check_point(f"squares[{i}].corners.{corner}", sq["corners"][corner])
        for slot, side in (("s", "horizontal"), ("t", "horizontal"),
                           ("s_hat", "vertical"), ("t_hat", "vertical")):
            if sq[slot] not in arrow_ids[side]:
                out.append(f"squares[{i}].{slot}: unknown {side} arrow id {sq[slot]!r}")
    return out


# ---------------------------------------------------------------------------
# Analysis context
# ---------------------------------------------------------------------------


class _Context:
    def __init__(self, config: dict, config_dir: Path):
        self.config = config
        self.config_dir = config_dir
        tolerances = config.get("tolerances", {})
        self.rank_rel_tol = float(tolerances.get("rank_rel_tol", 1e-8))
        self.commutation_tol = float(tolerances.get("commutation_tol", 1e-9))
        self.group_tol = float(tolerances.get("group_tol", 1e-9))
        self.max_squares = int(config.get("max_squares", 200_000))
        self.foliation_report = None

    def _frame(self, node):
        if isinstance(node, dict):
            return SampledFrameField.from_npz(self.config_dir / node["grid"])
        return AnalyticFrameField.from_strings(node)

    @cached_property
    def composite(self) -> CompositeSpec:
        comp = self.config["composite"]
        directors = {
            key: AnalyticVectorField.from_strings(comp[key])
            for key in ("director", "director1", "director2")
            if key in comp
        }
        return CompositeSpec(
            self._frame(comp["component1"]),
            self._frame(comp["component2"]),
            SymmetryCase.from_string(comp["case"]),
            **directors,
        )

    @cached_property
    def domain(self) -> BodyDomain:
        dom = self.config["domain"]
        return BodyDomain(tuple(dom["lower"]), tuple(dom["upper"]), tuple(dom["resolution"]))

    @cached_property
    def points(self) -> PointSet:
        return PointSet.from_pairs((p["id"], p["coords"]) for p in self.config["points"])

    @cached_property
    def sides(self) -> tuple[FiniteGroupoid, FiniteGroupoid]:
        if "groupoids" in self.config:
            gds = self.config["groupoids"]
            points = [
                {"id": pid, "coords": list(self.points.coords(pid))} for pid in self.points.ids
            ]
            side_h = groupoid_from_dict(
                {"points": points, "arrows": gds["horizontal"]["arrows"],
                 "tolerance": self.group_tol}
            )
            side_v = groupoid_from_dict(
                {"points": points, "arrows": gds["vertical"]["arrows"],
                 "tolerance": self.group_tol}
            )
            return side_h, side_v
        side_h = from_frame_field(self.composite.component1, self.points, self.group_tol)
        side_v = from_frame_field(self.composite.component2, self.points, self.group_tol)
        return side_h, side_v

    @cached_property
    def coarse_squares(self) -> list:
        side_h, side_v = self.sides
        return coarse_enumerate(side_h, side_v, self.max_squares)

    @cached_property
    def dgpd(self) -> MaterialDoubleGroupoid:
        side_h, side_v = self.sides
        if "squares" in self.config:
            squares = [
                square_from_dict(sq, side_h, side_v) for sq in self.config["squares"]
            ]
            return MaterialDoubleGroupoid(side_h, side_v, squares, self.commutation_tol)
        squares = [
            sq for sq in self.coarse_squares if is_commutative(sq, self.commutation_tol)
        ]
        return MaterialDoubleGroupoid(side_h, side_v, squares, self.commutation_tol, check=False)


def _classify_counts(m_counts: list[int]) -> str:
    total = sum(m_counts)
    top = int(np.argmax(m_counts))
    if total and m_counts[top] >= CONSTANT_M_FRACTION * total:
        return _CLASS_BY_DIM[top].value
    return FoliationClass.SINGULAR.value


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------


def _task_measure(ctx: _Context) -> dict:
    composite = ctx.composite
    lattice = ctx.domain.lattice()
    case = composite.case_number
    max_abs = 0.0
    total_abs = 0.0
    m_counts = [0, 0, 0, 0]
    bhat_max = 0.0
    delta_max = 0.0
    for point in lattice:
        result = evaluate_measure(composite, point)
        value = float(np.max(np.abs(result.B)))
        max_abs = max(max_abs, value)
        total_abs += value
        if case == 1:
            m_counts[kernel_of_flattened(result.B, ctx.rank_rel_tol).dimension] += 1
        if result.b_hat is not None:
            bhat_max = max(bhat_max, float(np.max(np.abs(result.b_hat))))
        if result.angle_defect is not None:
            delta_max = max(delta_max, abs(result.angle_defect))
    block = {
        "case": composite.symmetry_case.value,
        "n_nodes": len(lattice),
        "max_abs_B": max_abs,
        "mean_abs_B": total_abs / len(lattice),
    }
    if case == 1:
        block["m_counts"] = {str(m): m_counts[m] for m in range(4)}
        block["class"] = _classify_counts(m_counts)
    if case == 3:
        block["max_abs_director_gradient"] = bhat_max
    if case == 5:
        block["max_abs_angle_defect"] = delta_max
    return block


def _task_foliate(ctx: _Context) -> dict:
    report = scan_domain(ctx.composite, ctx.domain, ctx.rank_rel_tol)
    ctx.foliation_report = report
    return report_to_dict(report)


def _misalignment_table(ctx: _Context, dg: MaterialDoubleGroupoid) -> dict:
    pairs = ctx.config.get("pairs")
    ids = ctx.points.ids
    if pairs is None:
        pairs = [[a, b] for a, b in itertools.permutations(ids, 2)]
    table = {}
    for a, b in pairs:
        table[f"{a}->{b}"] = [float(v) for v in misalignment(dg, a, b).ravel()]
    return table


def _task_squares(ctx: _Context) -> dict:
    dg = ctx.dgpd
    n_coarse = len(ctx.coarse_squares)
    n_commutative = sum(
        1 for sq in ctx.coarse_squares if is_commutative(sq, ctx.commutation_tol)
    )
    core_groupoid = core(dg)
    block = {
        "n_points": len(ctx.points),
        "n_coarse": n_coarse,
        "n_stored": len(dg.squares),
        "n_commutative": n_commutative,
        "all_commutative": n_commutative == n_coarse,
        "core_arrow_count": len(core_groupoid.arrows),
        "core_transitive": is_transitive(core_groupoid),
        "uniform": is_uniform(dg),
        "unfillable_pairs": len(filling_check(dg)),
    }
    try:
        deviation = 0.0
        for sq in dg.squares:
            m_wy = misalignment(dg, sq.W, sq.Y)
            m_xz = misalignment(dg, sq.X, sq.Z)
            m_wx = misalignment(dg, sq.W, sq.X)
            m_yz = misalignment(dg, sq.Y, sq.Z)
            deviation = max(
                deviation,
                float(np.max(np.abs(m_wy - m_xz))),
                float(np.max(np.abs(m_wx - m_yz))),
            )
        block["opposite_pair_max_deviation"] = deviation
        block["misalignments"] = _misalignment_table(ctx, dg)
    except UnilabError as exc:
        block["misalignment_error"] = str(exc)
    return block


def _task_misalign(ctx: _Context) -> dict:
    dg = ctx.dgpd
    block = {"pairs": _misalignment_table(ctx, dg)}
    comparisons = []
    for pair1, pair2 in ctx.config.get("pair_comparisons", []):
        entry = {
            "pair1": f"{pair1[0]}->{pair1[1]}",
            "pair2": f"{pair2[0]}->{pair2[1]}",
        }
        try:
            entry["compatible_1"] = is_compatible(dg, tuple(pair1), tuple(pair2), 1)
            entry["compatible_2"] = is_compatible(dg, tuple(pair1), tuple(pair2), 2)
            if entry["compatible_1"]:
                entry["normalizer_commutes"] = normalizer_criterion(
                    dg, tuple(pair1), tuple(pair2)
                )
        except UnilabError as exc:
            entry["error"] = str(exc)
        comparisons.append(entry)
    if comparisons:
        block["comparisons"] = comparisons
    return block


def _task_infinitesimal(ctx: _Context) -> dict:
    composite = ctx.composite
    lattice = ctx.domain.lattice()
    kind_counts: dict[str, int] = {}
    m_counts = [0, 0, 0, 0]
    nodes = []
    for point in lattice:
        result = infinitesimal_classification(composite, point, ctx.rank_rel_tol)
        kind_counts[result.kind.value] = kind_counts.get(result.kind.value, 0) + 1
        m_counts[result.m] += 1
        nodes.append(
            {"x": [float(c) for c in point], "kind": result.kind.value, "m": result.m}
        )
    return {
        "n_nodes": len(lattice),
        "kind_counts": kind_counts,
        "m_counts": {str(m): m_counts[m] for m in range(4)},
        "m_mode": int(np.argmax(m_counts)),
        "nodes": nodes,
    }


_TASK_RUNNERS = {
    "measure": _task_measure,
    "foliate": _task_foliate,
    "squares": _task_squares,
    "misalign": _task_misalign,
    "infinitesimal": _task_infinitesimal,
}


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def canonical_json(value) -> str:
    """JSON with sorted keys and %.12e floats, for byte-stable reports."""
    pieces: list[str] = []
    _emit(value, pieces)
    return "".join(pieces)


def _emit(value, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        out.append("%.12e" % float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _emit(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} deterministically")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(config_path, out_path, out_format: str = "json") -> int:
    """Execute the configured tasks and write the report. Returns the exit code."""
    diagnostics = validate_config(config_path)
    if diagnostics:
        for line in diagnostics:
            print(line)
        return 1
    config_bytes = Path(config_path).read_bytes()
    config = json.loads(config_bytes)
    ctx = _Context(config, Path(config_path).parent)
    task_blocks: dict[str, dict] = {}
    failed = False
    for task in config["tasks"]:
        try:
            task_blocks[task] = _TASK_RUNNERS[task](ctx)
        except UnilabError as exc:
            task_blocks[task] = {"error": str(exc)}
            failed = True
    if out_format == "csv":
        if ctx.foliation_report is None:
            print("csv output requires a successful foliate task")
            return 1
        Path(out_path).write_text(report_to_csv(ctx.foliation_report))
    else:
        report = {
            "schema": 1,
            "provenance": {
                "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
                "tool": "unilab",
                "version": __version__,
            },
            "tasks": task_blocks,
        }
        Path(out_path).write_text(canonical_json(report) + "\n")
    if failed:
        return 2
    return 0


def validate(config_path) -> int:
    diagnostics = validate_config(config_path)
    for line in diagnostics:
        print(line)
    if diagnostics:
        return 1
    print("ok")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="unilab",
        description="Uniformity analysis of binary composites described by frame fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run the configured analysis tasks")
    run_parser.add_argument("--config", required=True, help="JSON config path")
    run_parser.add_argument("--out", required=True, help="report output path")
    run_parser.add_argument("--format", choices=["json", "csv"], default="json")
    validate_parser = sub.add_parser("validate", help="check a config without running it")
    validate_parser.add_argument("--config", required=True, help="JSON config path")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out, args.format)
    return validate(args.config)


if __name__ == "__main__":
    sys.exit(main())

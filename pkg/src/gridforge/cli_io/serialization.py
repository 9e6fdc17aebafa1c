"""JSON files for instances, scenario sets, designs and solve reports; CSV for results."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..formulation import Design
from ..grid_model import (
    DEFAULT_CRITICAL_FRACTION, DEFAULT_TOTAL_FRACTION, Bus, Edge, GenerationSite, LoadBlock,
    NetworkInstance, validate_instance,
)
from ..scenario import DamageModel, Scenario, ScenarioSet

SCHEMA_VERSION = 1
SCHEMA_PATH = Path(__file__).with_name("schemas") / "gridforge.schema.json"

RESULT_COLUMNS = ("row", "scenario", "l", "served_critical_fraction", "served_total_fraction",
                  "objective", "status", "cpu_seconds")


class ParseError(ValueError):
    """Malformed input; ``where`` is a field path such as ``edges[2].capacity``."""

    def __init__(self, where: str, message: str, line: Optional[int] = None):
        self.where = where
        self.message = message
        self.line = line
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"{where}{loc}: {message}")


class SchemaVersionMismatch(ParseError):
    def __init__(self, found):
        super().__init__("schema_version", f"unsupported schema version {found!r}; "
                                           f"this build reads version {SCHEMA_VERSION}")
        self.found = found


# -- low-level helpers ------------------------------------------------------------

def _id_key(v) -> Tuple[int, Any]:
    # ints before strings, each in natural order
    return (0, v) if isinstance(v, int) and not isinstance(v, bool) else (1, str(v))


def _parse_text(text: str, what: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(_section_at(text, exc.pos) or what, exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError(what, "top level must be a JSON object")
    version = doc.get("schema_version")
    if version is None:
        raise ParseError("schema_version", "missing field")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(version)
    return doc


def _section_at(text: str, pos: int) -> Optional[str]:
    """Top-level key whose value contains ``pos``, found by scanning at depth 1."""
    depth, current, k = 0, None, 0
    in_str = False
    key_re = re.compile(r'"((?:[^"\\]|\\.)*)"\s*:')
    while k < min(pos, len(text)):
        ch = text[k]
        if in_str:
            if ch == "\\":
                k += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            if depth == 1:
                m = key_re.match(text, k)
                if m:
                    current = m.group(1)
                    k = m.end()
                    continue
            in_str = True
        elif ch in "{[":
            depth += 1
        elif ch in "}]":
            depth -= 1
        k += 1
    return current


class _Reader:
    """Typed access into a parsed document with field-path errors."""

    def __init__(self, obj, path: str):
        self.obj = obj
        self.path = path

    def _where(self, key) -> str:
        return f"{self.path}.{key}" if self.path else str(key)

    def get(self, key, kind, default=...):
        if not isinstance(self.obj, dict):
            raise ParseError(self.path, "expected an object")
        if key not in self.obj or self.obj[key] is None:
            if default is ...:
                raise ParseError(self._where(key), "missing field")
            return default
        return _check(self.obj[key], kind, self._where(key))

    def items(self, key, default=...):
        seq = self.get(key, list, default)
        return [_Reader(v, f"{self._where(key)}[{k}]") for k, v in enumerate(seq)]



def _check(value, kind, where):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(where, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(where, f"expected an integer, got {type(value).__name__}")
        return value
    if kind == "id":
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ParseError(where, "ids must be integers or strings")
        return value
    if kind == "phase_map":
        if not isinstance(value, dict):
            raise ParseError(where, "expected an object keyed by phase")
        return {str(k): _check(v, float, f"{where}.{k}") for k, v in value.items()}
    if not isinstance(value, kind):
        raise ParseError(where, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _num(v: float):
    """Integral floats print as integers so files stay stable and readable."""
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2 ** 53 else v


def _phase_dict(m) -> Dict[str, Any]:
    return {k: _num(m[k]) for k in sorted(m)}


# -- instances ----------------------------------------------------------------------

def instance_to_dict(instance: NetworkInstance, scenarios: Optional[ScenarioSet] = None) -> dict:
    buses = []
    for b in instance.buses:
        g = b.generation
        buses.append({
            "id": b.id,
            "phases": list(b.phases),
            "critical": b.is_critical,
            "loads": [_phase_dict(blk.demand_per_phase) for blk in b.load_blocks],
            "generation": None if g is None else {
                "existing": _phase_dict(g.existing_capacity_per_phase),
                "max_new": _phase_dict(g.max_new_capacity_per_phase),
                "facility_cost": _num(g.facility_cost),
                "capacity_cost": _phase_dict(g.capacity_cost_per_phase),
            },
        })
    edges = [{
        "id": e.id, "source": e.source, "target": e.target,
        "phases": list(e.phases),
        "capacity": _phase_dict(e.capacity_per_phase),
        "length_miles": _num(e.length_miles),
        "transformer": e.is_transformer,
        "imbalance_limit": None if e.phase_imbalance_limit is None else _num(e.phase_imbalance_limit),
        "exists": e.exists,
        "existing_switch": e.has_existing_switch,
        "switchable": e.switchable,
        "hardenable": e.hardenable,
        "build_cost": _num(e.build_cost),
        "switch_cost": _num(e.switch_cost),
        "harden_cost": _num(e.harden_cost),
    } for e in instance.edges]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": instance.name,
        "parameters": {"lambda": _num(instance.critical_fraction), "gamma": _num(instance.total_fraction)},
        "buses": buses,
        "edges": edges,
    }
    if scenarios is not None:
        doc["scenarios"] = scenarios_to_dict(scenarios)
    return doc


def instance_from_dict(doc: dict) -> Tuple[NetworkInstance, Optional[ScenarioSet]]:
    r = _Reader(doc, "")
    params = _Reader(r.get("parameters", dict, {}), "parameters")
    buses = []
    for br in r.items("buses"):
        gen = None
        graw = br.get("generation", dict, None)
        if graw is not None:
            gr = _Reader(graw, f"{br.path}.generation")
            gen = GenerationSite(gr.get("existing", "phase_map", {}), gr.get("max_new", "phase_map", {}),
                                 gr.get("facility_cost", float, 0.0), gr.get("capacity_cost", "phase_map", {}))
        loads = [LoadBlock(_check(v, "phase_map", f"{br.path}.loads[{k}]"))
                 for k, v in enumerate(br.get("loads", list, []))]
        buses.append(Bus(br.get("id", "id"), tuple(br.get("phases", list)), tuple(loads), gen,
                         br.get("critical", bool, False)))
    edges = []
    for er in r.items("edges"):
        edges.append(Edge(
            er.get("id", "id"), er.get("source", "id"), er.get("target", "id"),
            tuple(er.get("phases", list)), er.get("capacity", "phase_map"),
            er.get("length_miles", float, 1.0), er.get("transformer", bool, False),
            er.get("imbalance_limit", float, None), er.get("exists", bool, True),
            er.get("existing_switch", bool, False), er.get("hardenable", bool, False),
            er.get("switchable", bool, True), er.get("build_cost", float, 0.0),
            er.get("switch_cost", float, 0.0), er.get("harden_cost", float, 0.0)))
    inst = NetworkInstance(tuple(buses), tuple(edges),
                           params.get("lambda", float, DEFAULT_CRITICAL_FRACTION),
                           params.get("gamma", float, DEFAULT_TOTAL_FRACTION),
                           r.get("name", str, "instance"))
    report = validate_instance(inst)
    if not report.ok:
        raise ParseError(report[0].subject, report[0].message)
    scen = None
    if doc.get("scenarios") is not None:
        scen = scenarios_from_dict(r.get("scenarios", dict), "scenarios", inst)
    return inst, scen


def dumps_instance(instance: NetworkInstance, scenarios: Optional[ScenarioSet] = None) -> str:
    return _dump(instance_to_dict(instance, scenarios))


def loads_instance(text: str) -> Tuple[NetworkInstance, Optional[ScenarioSet]]:
    return instance_from_dict(_parse_text(text, "instance"))


def save_instance(instance: NetworkInstance, path, scenarios: Optional[ScenarioSet] = None) -> None:
    Path(path).write_text(dumps_instance(instance, scenarios))


def load_instance(path) -> NetworkInstance:
    """Read and validate an instance file; an embedded scenario set is ignored here."""
    return loads_instance(_read(path))[0]


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(path), exc.strerror or str(exc)) from None


# -- scenarios ----------------------------------------------------------------------

def scenarios_to_dict(scenarios: ScenarioSet) -> dict:
    m = scenarios.source_model
    return {
        "schema_version": SCHEMA_VERSION,
        "source": None if m is None else {
            "per_mile": _num(m.per_mile_probability),
            "hardened_ratio": _num(m.hardened_rate_ratio),
            "seed": m.rng_seed,
            "rng": scenarios.rng_algorithm,
        },
        "scenarios": [{
            "id": s.id,
            "damaged": sorted(s.damaged_edges, key=_id_key),
            "hardened_damaged": sorted(s.hardened_damaged_edges, key=_id_key),
        } for s in scenarios],
    }


def scenarios_from_dict(doc: dict, path: str = "",
                        instance: Optional[NetworkInstance] = None) -> ScenarioSet:
    r = _Reader(doc, path)
    model = rng = None
    src = r.get("source", dict, None)
    if src is not None:
        sr = _Reader(src, r._where("source"))
        try:
            model = DamageModel(sr.get("per_mile", float), sr.get("hardened_ratio", float, 0.0),
                                sr.get("seed", int, 0))
        except ValueError as exc:
            raise ParseError(sr.path, str(exc)) from None
        rng = sr.get("rng", str, None)
    known = None if instance is None else {e.id for e in instance.edges}
    out = []
    for k, sr in enumerate(r.items("scenarios")):
        sid = sr.get("id", int)
        if sid != k:
            raise ParseError(sr._where("id"), f"expected id {k}; ids must be 0..n-1 in order")
        dmg = [_check(v, "id", f"{sr.path}.damaged[{j}]") for j, v in enumerate(sr.get("damaged", list, []))]
        hd = [_check(v, "id", f"{sr.path}.hardened_damaged[{j}]")
              for j, v in enumerate(sr.get("hardened_damaged", list, []))]
        if known is not None:
            for label, ids in (("damaged", dmg), ("hardened_damaged", hd)):
                bad = [v for v in ids if v not in known]
                if bad:
                    raise ParseError(sr._where(label), f"unknown edge {bad[0]!r}")
        try:
            out.append(Scenario(sid, frozenset(dmg), frozenset(hd)))
        except ValueError as exc:
            raise ParseError(sr.path, str(exc)) from None
    return ScenarioSet(tuple(out), model, rng)


def dumps_scenarios(scenarios: ScenarioSet) -> str:
    return _dump(scenarios_to_dict(scenarios))


def loads_scenarios(text: str, instance: Optional[NetworkInstance] = None) -> ScenarioSet:
    return scenarios_from_dict(_parse_text(text, "scenarios"), "", instance)


def save_scenarios(scenarios: ScenarioSet, path) -> None:
    Path(path).write_text(dumps_scenarios(scenarios))


def load_scenarios(path, instance: Optional[NetworkInstance] = None) -> ScenarioSet:
    """Read a scenario file, or the set embedded in an instance file."""
    doc = _parse_text(_read(path), "scenarios")
    if "buses" in doc:
        if doc.get("scenarios") is None:
            raise ParseError("scenarios", "instance file has no embedded scenario set")
        return scenarios_from_dict(_Reader(doc, "").get("scenarios", dict), "scenarios", instance)
    return scenarios_from_dict(doc, "", instance)


# -- designs and reports ------------------------------------------------------------------

def design_to_dict(design: Design, instance: NetworkInstance) -> dict:
    up = design.upgrades(instance)
    up["capacity"] = [[i, k, _num(v)] for i, k, v in up["capacity"]]
    return up


def design_from_dict(doc: dict, instance: NetworkInstance, path: str = "design") -> Design:
    r = _Reader(doc, path)
    design = Design.baseline(instance)
    edge_ids = {e.id for e in instance.edges}

    def ids(key, allowed):
        out = [_check(v, "id", f"{path}.{key}[{j}]") for j, v in enumerate(r.get(key, list, []))]
        for j, v in enumerate(out):
            if v not in allowed:
                raise ParseError(f"{path}.{key}[{j}]", f"unknown id {v!r}")
        return out

    for e in ids("lines", edge_ids):
        design.line_built[e] = 1
    for e in ids("switches", edge_ids):
        design.switch_built[e] = 1
    for e in ids("hardened", edge_ids):
        design.hardened[e] = 1
    for b in ids("facilities", set(design.facility_built)):
        design.facility_built[b] = 1
    for j, row in enumerate(r.get("capacity", list, [])):
        where = f"{path}.capacity[{j}]"
        if not isinstance(row, list) or len(row) != 3:
            raise ParseError(where, "expected [bus, phase, amount]")
        key = (_check(row[0], "id", where), _check(row[1], str, where))
        if key not in design.new_capacity:
            raise ParseError(where, f"no generation site for bus {key[0]!r} phase {key[1]}")
        design.new_capacity[key] = _check(row[2], float, where)
    return design


def load_design(path, instance: NetworkInstance) -> Design:
    """Read a design file or take the design out of a solve report."""
    doc = _parse_text(_read(path), "design")
    if doc.get("design") is None:
        raise ParseError("design", "missing field")
    return design_from_dict(_Reader(doc, "").get("design", dict), instance)


def save_design(design: Design, instance: NetworkInstance, path) -> None:
    Path(path).write_text(_dump({"schema_version": SCHEMA_VERSION, "design": design_to_dict(design, instance)}))


def _finite(v):
    return _num(v) if v is not None and math.isfinite(v) else None


def report_to_dict(report, instance: NetworkInstance, cpu_seconds: Optional[float] = None) -> dict:
    """Full solve report. Timing appears only when ``cpu_seconds`` is given, so
    reruns with the same inputs write identical bytes."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "algorithm": report.algorithm,
        "status": report.status,
        "objective": _finite(report.objective),
        "feasible": report.feasible,
        "design": None if report.design is None else design_to_dict(report.design, instance),
        "scenarios_in_master": list(report.scenarios_in_master),
        "pricing": [_pricing_row(p) for p in report.per_scenario],
        "trace": [_clean(ev) for ev in report.trace],
    }
    if cpu_seconds is not None:
        doc["cpu_seconds"] = round(cpu_seconds, 6)
    return doc


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, float):
        return _finite(v)
    return v


def _pricing_row(p) -> dict:
    return {
        "scenario": p.scenario_id,
        "l": _num(round(p.l_value, 9)),
        "served_critical_fraction": _num(round(p.served_critical_fraction, 9)),
        "served_total_fraction": _num(round(p.served_total_fraction, 9)),
    }


def results_csv(report, cpu_seconds: Optional[float] = None) -> str:
    """One pricing row per scenario then a summary row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for p in report.per_scenario:
        row = _pricing_row(p)
        w.writerow(["pricing", row["scenario"], row["l"], row["served_critical_fraction"],
                    row["served_total_fraction"], "", "", ""])
    obj = _finite(report.objective)
    w.writerow(["summary", "", "", "", "", "" if obj is None else obj, report.status,
                "" if cpu_seconds is None else round(cpu_seconds, 6)])
    return buf.getvalue()


def save_results(report, instance: NetworkInstance, path, cpu_seconds: Optional[float] = None) -> Tuple[Path, Path]:
    """Write ``path`` (JSON report) and the CSV next to it; returns both paths."""
    path = Path(path)
    csv_path = path.with_suffix(".csv") if path.suffix != ".csv" else path.with_name(path.stem + ".results.csv")
    path.write_text(_dump(report_to_dict(report, instance, cpu_seconds)))
    csv_path.write_text(results_csv(report, cpu_seconds))
    return path, csv_path


__all__ = [
    "ParseError", "RESULT_COLUMNS", "SCHEMA_PATH", "SCHEMA_VERSION", "SchemaVersionMismatch",
    "design_from_dict", "design_to_dict", "dumps_instance", "dumps_scenarios", "instance_from_dict",
    "instance_to_dict", "load_design", "load_instance", "load_scenarios", "loads_instance",
    "loads_scenarios", "report_to_dict", "results_csv", "save_design", "save_instance",
    "save_results", "save_scenarios", "scenarios_from_dict", "scenarios_to_dict",
]

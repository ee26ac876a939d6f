"""Command-line front end.

    costcalc measures trials.csv
    costcalc transport trials.csv --t0 0.1 --assumption non_decreasing
    costcalc transport trials.csv --t0 0.1 --compare
    costcalc transport --g 0.05 --h 0.99 --s0 0.005 --t0 0.05
    costcalc bias-surface --g 0.05 --h-grid 0.9,0.99,1 --f-grid 0.5,1,2,10
    costcalc mechanism-sim mechanism.json --verify
    costcalc meta studies.csv
    costcalc oracle-verify

Input CSVs use either the ``population,arm,events,total`` (arm counts) or
the ``population,p0,p1`` (risks) header; the layout is detected from the
header.  JSON documents written by this tool can be read back as input.

Settings come from a JSON config file (``--config`` or the
``COSTCALC_CONFIG`` environment variable) and flags; flags win.  Top-level
config keys apply to every subcommand that knows them, a section named
after the subcommand applies to it alone.

Exit status: 0 ok, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping

from . import mechanism, oracle
from .cost import CollapsibilityError, CostIntroduce, CostRemove
from .measures import ArmCounts, RiskPair, Undefined, measures_from_risks, risks_from_counts
from .meta import SCALES, StudyRecord, scale_deviations
from .transport import (
    DEFAULT_NEAR_MONOTONICITY_RATIO,
    IdentificationError,
    Monotonicity,
    bias_surface,
    bias_under_nonmonotonicity,
    compare_measures,
    predict_introduce,
    predict_remove,
    transport_rr,
    transport_rr_remove,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3
CONFIG_ENV = "COSTCALC_CONFIG"
FLOAT_FORMAT = "%.12g"

COUNT_HEADER = ("population", "arm", "events", "total")
RISK_HEADER = ("population", "p0", "p1")
TREATED_ARMS = ("treated", "1")
CONTROL_ARMS = ("control", "0")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# -- configuration ----------------------------------------------------------------

_COMMON = {"format": None, "seed": 0}

COMMAND_DEFAULTS = {
    "measures": {"input": None},
    "transport": {
        "input": None,
        "p0": None,
        "p1": None,
        "t0": None,
        "t1": None,
        "family": "introduce",
        "assumption": "none",
        "compare": False,
        "g": None,
        "h": None,
        "i": None,
        "j": None,
        "s0": None,
        "ratio_threshold": DEFAULT_NEAR_MONOTONICITY_RATIO,
    },
    "bias-surface": {
        "g": None,
        "h_grid": None,
        "f_grid": None,
        "s0": 0.005,
        "scale": "rr_minus",
    },
    "mechanism-sim": {
        "input": None,
        "mode": None,
        "n": None,
        "verify": False,
        "negative_controls": False,
        "max_size": 20,
        "control_max_size": 6,
    },
    "meta": {
        "input": None,
        "scales": list(SCALES),
        "switched": True,
        "eps": 0.02,
        "pooled_rr_minus": None,
        "pooled_rr_plus": None,
        "pooled_rd": None,
    },
    "oracle-verify": {
        "propositions": list(oracle.PROPOSITIONS),
        "n_max": 60,
        "pair_n_max": 24,
        "symmetry_n_max": 24,
        "stratum_n_max": 6,
        "mechanism_size": 20,
        "rare": "1/5",
        "sample_pairs": None,
        "inject_violation": 0,
        "negative_controls": False,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully merged settings for one invocation."""

    command: str
    format: str
    seed: int | None
    assumption: Monotonicity = Monotonicity.NONE
    family: str = "introduce"
    input: str | None = None
    options: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, got {self.format!r}")
        if self.family not in ("introduce", "remove"):
            raise UsageError(f"family must be introduce or remove, got {self.family!r}")

    def get(self, key):
        return self.options[key]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def build_config(command: str, flags: dict, config: dict) -> RunConfig:
    known = {**_COMMON, **COMMAND_DEFAULTS[command]}
    merged = dict(known)
    merged.update({k: v for k, v in config.items() if k in known})
    section = config.get(command, {})
    if not isinstance(section, dict):
        raise UsageError(f"config section {command!r} must be an object")
    unknown = set(section) - set(known)
    if unknown:
        raise UsageError(f"unknown {command} config keys: {', '.join(sorted(unknown))}")
    merged.update(section)
    merged.update(flags)

    fmt = merged.pop("format") or ("csv" if command == "bias-surface" else "json")
    seed = merged.pop("seed")
    if seed is not None and not isinstance(seed, int):
        raise UsageError(f"seed must be an integer, got {seed!r}")
    assumption = merged.pop("assumption", "none")
    try:
        assumption = Monotonicity(assumption)
    except ValueError:
        choices = ", ".join(m.value for m in Monotonicity)
        raise UsageError(f"assumption must be one of {choices}, got {assumption!r}") from None
    return RunConfig(
        command=command,
        format=fmt,
        seed=seed,
        assumption=assumption,
        family=merged.pop("family", "introduce"),
        input=merged.pop("input", None),
        options=merged,
    )


# -- input --------------------------------------------------------------------------


@dataclass(frozen=True)
class InputRow:
    population: str
    risks: RiskPair
    treated: ArmCounts | None = None
    control: ArmCounts | None = None


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def read_rows(path: str) -> list:
    text = _read_text(path)
    if not text.strip():
        raise UsageError(f"input {path} is empty")
    if path.endswith(".json") or text.lstrip()[:1] in ("{", "["):
        return _rows_from_json(text, path)
    return _rows_from_csv(text)


def _parse_int(value: str, what: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise DataError(f"line {line}: {what} must be an integer, got {value!r}") from None


def _parse_float(value: str, what: str, line: int) -> float:
    try:
        out = float(value)
    except ValueError:
        raise DataError(f"line {line}: {what} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise DataError(f"line {line}: {what} must be finite, got {value!r}")
    return out


def _rows_from_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = None
    for row in reader:
        if any(cell.strip() for cell in row):
            header = tuple(cell.strip().lower() for cell in row)
            break
    if header == COUNT_HEADER:
        return _count_rows(reader)
    if header == RISK_HEADER:
        return _risk_rows(reader)
    raise DataError(
        f"line {reader.line_num}: unrecognised header {','.join(header or ())!r}; "
        f"expected {','.join(COUNT_HEADER)} or {','.join(RISK_HEADER)}"
    )


def _data_lines(reader, width):
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        line = reader.line_num
        if len(row) != width:
            raise DataError(f"line {line}: expected {width} fields, got {len(row)}")
        yield line, [cell.strip() for cell in row]


def _risk_rows(reader) -> list:
    rows, seen = [], set()
    for line, (pid, p0, p1) in _data_lines(reader, 3):
        if not pid:
            raise DataError(f"line {line}: population id is empty")
        if pid in seen:
            raise DataError(f"line {line}: duplicate population {pid!r}")
        seen.add(pid)
        try:
            risks = RiskPair(_parse_float(p0, "p0", line), _parse_float(p1, "p1", line))
        except ValueError as exc:
            raise DataError(f"line {line}: {exc}") from None
        rows.append(InputRow(pid, risks))
    if not rows:
        raise DataError("input has a header but no data rows")
    return rows


def _count_rows(reader) -> list:
    arms: dict = {}
    first_line: dict = {}
    for line, (pid, arm, events, total) in _data_lines(reader, 4):
        if not pid:
            raise DataError(f"line {line}: population id is empty")
        arm = arm.lower()
        if arm in TREATED_ARMS:
            arm = "treated"
        elif arm in CONTROL_ARMS:
            arm = "control"
        else:
            raise DataError(f"line {line}: arm must be treated or control, got {arm!r}")
        try:
            counts = ArmCounts(
                _parse_int(events, "events", line), _parse_int(total, "total", line)
            )
        except ValueError as exc:
            raise DataError(f"line {line}: {exc}") from None
        entry = arms.setdefault(pid, {})
        first_line.setdefault(pid, line)
        if arm in entry:
            raise DataError(f"line {line}: duplicate {arm} arm for population {pid!r}")
        entry[arm] = counts
    if not arms:
        raise DataError("input has a header but no data rows")
    rows = []
    for pid, entry in arms.items():
        missing = {"treated", "control"} - set(entry)
        if missing:
            raise DataError(
                f"line {first_line[pid]}: population {pid!r} has no {missing.pop()} arm"
            )
        risks = risks_from_counts(entry["treated"], entry["control"])
        rows.append(InputRow(pid, risks, entry["treated"], entry["control"]))
    return rows


_COUNT_KEYS = ("treated_events", "treated_total", "control_events", "control_total")


def _row_from_mapping(item, k: int) -> InputRow:
    where = f"row {k}"
    if not isinstance(item, dict):
        raise DataError(f"{where}: expected an object")
    pid = item.get("population", item.get("study"))
    if pid is None or str(pid) == "":
        raise DataError(f"{where}: missing population id")
    pid = str(pid)
    try:
        if all(key in item for key in _COUNT_KEYS):
            values = [item[key] for key in _COUNT_KEYS]
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
                raise DataError(f"{where}: arm counts must be integers")
            treated, control = ArmCounts(values[0], values[1]), ArmCounts(values[2], values[3])
            return InputRow(pid, risks_from_counts(treated, control), treated, control)
        if "p0" in item and "p1" in item:
            p0, p1 = item["p0"], item["p1"]
            if not all(isinstance(v, Real) and not isinstance(v, bool) for v in (p0, p1)):
                raise DataError(f"{where}: p0 and p1 must be numbers")
            return InputRow(pid, RiskPair(float(p0), float(p1)))
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None
    raise DataError(f"{where}: needs p0/p1 or {', '.join(_COUNT_KEYS)}")


def _rows_from_json(text: str, path: str) -> list:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if isinstance(data, dict):
        data = data.get("rows")
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a list of rows or an object with 'rows'")
    rows, index = [], {}
    for k, item in enumerate(data, start=1):
        row = _row_from_mapping(item, k)
        # output documents repeat a population once per measure or scale
        if row.population in index:
            if rows[index[row.population]] != row:
                raise DataError(f"row {k}: conflicting rows for population {row.population!r}")
            continue
        index[row.population] = len(rows)
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: no rows")
    return rows


def _input_rows(cfg: RunConfig) -> list:
    if not cfg.input:
        raise UsageError(f"{cfg.command} needs an input file")
    return read_rows(cfg.input)


# -- output -------------------------------------------------------------------------


def _number(x):
    f = float(x)
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    if math.isnan(f):
        return "nan"
    f = float(FLOAT_FORMAT % f)
    return 0.0 if f == 0 else f


def plain(value):
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(value, Undefined):
        return "undefined"
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Real):
        return _number(value)
    if isinstance(value, Monotonicity):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [plain(v) for v in value]
    return str(value)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def render(doc: dict, fmt: str) -> str:
    doc = plain(doc)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    rows = doc.get("rows", [])
    columns = []
    for row in rows:
        columns.extend(k for k in row if k not in columns)
    columns.append("seed")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c, doc.get("seed") if c == "seed" else None)) for c in columns])
    return out.getvalue()


def _document(cfg: RunConfig, rows: list, **extra) -> dict:
    return {"command": cfg.command, "seed": cfg.seed, **extra, "rows": rows}


def _source(row: InputRow) -> dict:
    out = {"population": row.population, "p0": row.risks.p0, "p1": row.risks.p1}
    if row.treated is not None:
        out.update(
            treated_events=row.treated.events,
            treated_total=row.treated.total,
            control_events=row.control.events,
            control_total=row.control.total,
        )
    return out


# -- subcommands -------------------------------------------------------------------


def cmd_measures(cfg: RunConfig) -> dict:
    rows = []
    for row in _input_rows(cfg):
        rows.append({**_source(row), **measures_from_risks(row.risks).as_dict()})
    return _document(cfg, rows)


def _float_option(cfg, key, required=False):
    value = cfg.get(key)
    if value is None:
        if required:
            raise UsageError(f"{cfg.command} needs --{key.replace('_', '-')}")
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a number, got {value!r}") from None


def _transport_fields(result, threshold) -> dict:
    ratio = result.near_monotonicity_ratio
    return {
        "assumption": result.assumption,
        "parameters_used": "+".join(result.parameters_used),
        "predicted_risk": result.predicted_risk,
        "monotone_term": result.monotone_term,
        "nonmonotone_term": result.nonmonotone_term,
        "near_monotonicity_margin": result.near_monotonicity_margin,
        "near_monotonicity_ratio": ratio,
        "near_monotonicity_warning": ratio < threshold,
    }


def cmd_transport(cfg: RunConfig) -> dict:
    threshold = _float_option(cfg, "ratio_threshold", required=True)
    remove = cfg.family == "remove"
    target_key = "t1" if remove else "t0"
    target = _float_option(cfg, target_key, required=True)
    first, second = ("i", "j") if remove else ("g", "h")
    explicit = [_float_option(cfg, first), _float_option(cfg, second)]
    meta = {"family": cfg.family, target_key: target, "ratio_threshold": threshold}

    if any(v is not None for v in explicit):
        if None in explicit:
            raise UsageError(f"give both --{first} and --{second}")
        a, b = explicit
        result = predict_remove(CostRemove(a, b), target) if remove else predict_introduce(
            CostIntroduce(a, b), target
        )
        row = {"population": "parameters", first: a, second: b, target_key: target}
        row.update(_transport_fields(result, threshold))
        s0 = _float_option(cfg, "s0")
        if s0 is not None:
            if remove:
                raise UsageError("the bias report is defined for the introduce family only")
            report = bias_under_nonmonotonicity(a, b, s0, target)
            row.update(
                s0=s0,
                f=report.f,
                naive_prediction=report.naive_prediction,
                true_risk=report.true_risk,
                bias=report.bias,
                bias_direction=report.direction,
                rr_study=report.rr_study,
                rr_target=report.rr_target,
            )
        return _document(cfg, [row], **meta)

    if cfg.input:
        sources = _input_rows(cfg)
    else:
        p0, p1 = _float_option(cfg, "p0"), _float_option(cfg, "p1")
        if p0 is None or p1 is None:
            raise UsageError("transport needs an input file, --p0/--p1, or explicit parameters")
        try:
            sources = [InputRow("source", RiskPair(p0, p1))]
        except ValueError as exc:
            raise DataError(str(exc)) from None

    rows = []
    if cfg.get("compare"):
        if remove:
            raise UsageError("comparison mode covers the introduce family only")
        assumption = None if cfg.assumption is Monotonicity.NONE else cfg.assumption
        for src in sources:
            for pred in compare_measures(src.risks, target, assumption):
                rows.append(
                    {
                        **_source(src),
                        target_key: target,
                        "measure": pred.measure,
                        "effect": pred.effect,
                        "raw": pred.raw,
                        "predicted": pred.predicted,
                        "clamped": pred.clamped,
                    }
                )
        return _document(cfg, rows, **meta, assumption=cfg.assumption)

    if cfg.assumption is Monotonicity.NONE:
        raise UsageError(
            "transport needs --assumption non_increasing|non_decreasing, --compare, "
            f"or explicit --{first}/--{second}"
        )
    move = transport_rr_remove if remove else transport_rr
    for src in sources:
        try:
            result = move(src.risks, target, cfg.assumption)
        except IdentificationError as exc:
            raise DataError(f"population {src.population!r}: {exc}") from None
        rows.append({**_source(src), target_key: target, **_transport_fields(result, threshold)})
    return _document(cfg, rows, **meta)


def _grid(value, name) -> list:
    if value is None:
        raise UsageError(f"bias-surface needs --{name.replace('_', '-')}")
    items = value.split(",") if isinstance(value, str) else value
    try:
        out = [float(v) for v in items]
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be a comma-separated list of numbers") from None
    if not out:
        raise UsageError(f"{name} is empty")
    return out


def cmd_bias_surface(cfg: RunConfig) -> dict:
    g = _float_option(cfg, "g", required=True)
    s0 = _float_option(cfg, "s0", required=True)
    h_grid, f_grid = _grid(cfg.get("h_grid"), "h_grid"), _grid(cfg.get("f_grid"), "f_grid")
    scale = cfg.get("scale")
    if scale == "rr_minus":
        reports = bias_surface(g, h_grid, f_grid, s0)
    elif scale == "rr_plus":
        reports = [
            bias_under_nonmonotonicity(g, h, s0, 1 - f * (1 - s0), scale="rr_plus")
            for h in h_grid
            for f in f_grid
        ]
    else:
        raise UsageError(f"scale must be rr_minus or rr_plus, got {scale!r}")
    rows = [
        {
            "scale": r.scale,
            "g": r.g,
            "h": r.h,
            "f": r.f,
            "s0": r.s0,
            "t0": r.t0,
            "naive_prediction": r.naive_prediction,
            "true_risk": r.true_risk,
            "bias": r.bias,
            "closed_form": r.closed_form,
            "direction": r.direction,
        }
        for r in reports
    ]
    return _document(cfg, rows)


def _fraction(value, name) -> Fraction:
    try:
        return Fraction(str(value))
    except (TypeError, ValueError, ZeroDivisionError):
        raise DataError(f"{name} must be a number or fraction string, got {value!r}") from None


def _mechanism_spec(doc: dict, cfg: RunConfig) -> mechanism.MechanismSpec:
    try:
        cs = mechanism.ConditionSet(**doc.get("condition_set", {"x": "C3"}))
    except TypeError as exc:
        raise DataError(f"condition_set: {exc}") from None
    laws = {}
    for pid, law in (doc.get("laws") or {}).items():
        if not isinstance(law, dict) or "latent_risk" not in law:
            raise DataError(f"law {pid!r} needs latent_risk and attributes")
        attrs = {a: _fraction(v, f"{pid}.{a}") for a, v in (law.get("attributes") or {}).items()}
        laws[str(pid)] = mechanism.PopulationLaw(_fraction(law["latent_risk"], f"{pid}.latent_risk"), attrs)
    effect_map = doc.get("effect_map")
    if effect_map is not None:
        effect_map = {tuple(int(b) for b in str(k).split(",")): v for k, v in effect_map.items()}
    mode = cfg.get("mode") or doc.get("mode", "exhaustive")
    n = cfg.get("n") if cfg.get("n") is not None else doc.get("n")
    return mechanism.MechanismSpec(cs, laws, effect_map, mode, n, cfg.seed)


def cmd_mechanism(cfg: RunConfig) -> tuple:
    if not cfg.input:
        raise UsageError("mechanism-sim needs a mechanism spec file")
    text = _read_text(cfg.input)
    if not text.strip():
        raise UsageError(f"input {cfg.input} is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{cfg.input}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DataError(f"{cfg.input}: expected a JSON object")
    spec = _mechanism_spec(doc, cfg)
    pop = mechanism.build_population(spec)
    report = mechanism.mechanism_report(pop)
    cs = spec.condition_set
    rows = []
    for pid, values in report["populations"].items():
        row = {"population": pid, "size": report["sizes"][pid]}
        row.update(values["distribution"])
        row.update({k: values[k] for k in "ghij"})
        row.update({f"share_{a}_0": v for a, v in values["attribute_share_0"].items()})
        rows.append(row)

    status = EXIT_OK
    extra = {
        "mode": spec.mode,
        "conditions": report["conditions"],
        "condition_checks": report["condition_checks"],
    }
    if cs.joint:
        extra["u_strata"] = {
            pid: {k: v for k, v in values.items() if k.startswith("u_")}
            for pid, values in report["populations"].items()
        }
    if cfg.get("verify"):
        if cs.joint:
            raise UsageError("--verify applies to single-attribute condition sets")
        check = mechanism.verify_shared_parameter(cs, int(cfg.get("max_size")))
        extra["verification"] = {
            "parameter": check.parameter,
            "max_size": int(cfg.get("max_size")),
            "checked": check.checked,
            "passed": check.passed,
        }
        if not check.passed:
            status = EXIT_VERIFY
    if cfg.get("negative_controls"):
        if cs.joint:
            raise UsageError("--negative-controls applies to single-attribute condition sets")
        controls = mechanism.negative_controls(cs, int(cfg.get("control_max_size")))
        extra["negative_controls"] = {
            c: {"found": nc.found, "description": nc.description, "values": list(nc.values)}
            for c, nc in controls.items()
        }
    return _document(cfg, rows, **extra), status


def cmd_meta(cfg: RunConfig) -> dict:
    rows_in = _input_rows(cfg)
    studies = []
    for row in rows_in:
        if row.treated is None:
            raise DataError(f"population {row.population!r}: meta needs arm counts, not risks")
        studies.append(StudyRecord(row.population, row.treated, row.control))
    scales = cfg.get("scales")
    if isinstance(scales, str):
        scales = scales.split(",")
    for scale in scales:
        if scale not in SCALES:
            raise UsageError(f"scale must be one of {', '.join(SCALES)}, got {scale!r}")
    pooled = {}
    for scale in scales:
        value = _float_option(cfg, f"pooled_{scale}")
        if value is not None:
            pooled[scale] = Fraction(value)
    eps = _float_option(cfg, "eps", required=True)
    report = scale_deviations(studies, pooled, scales, bool(cfg.get("switched")), eps)

    rows = []
    for row, study in zip(rows_in, studies):
        for scale in scales:
            out = {**_source(row), "scale": scale, "estimate": study.estimate(scale)}
            out["pooled"] = report.pooled[scale]
            out["deviation"] = report.deviations[study.id].get(scale)
            out["skipped"] = report.skipped[study.id].get(scale)
            switch = report.switched[study.id].get(scale)
            if switch is not None:
                out.update(
                    flips=switch.flips,
                    switched_proportion=switch.proportion,
                    treated_events_after=switch.allocation[0] if switch.allocation else None,
                    control_events_after=switch.allocation[1] if switch.allocation else None,
                    reachable=switch.reachable,
                )
            rows.append(out)
    return _document(
        cfg,
        rows,
        pooled=report.pooled,
        rr_plus_compressed=report.rr_plus_compressed,
        compression_eps=report.compression_eps,
    )


def cmd_oracle_verify(cfg: RunConfig) -> tuple:
    props = cfg.get("propositions")
    if isinstance(props, str):
        props = props.split(",")
    for p in props:
        if p not in oracle.PROPOSITIONS:
            raise UsageError(f"unknown proposition {p!r}; choose from {', '.join(oracle.PROPOSITIONS)}")
    try:
        bounds = {
            "n_max": int(cfg.get("n_max")),
            "pair_n_max": int(cfg.get("pair_n_max")),
            "symmetry_n_max": int(cfg.get("symmetry_n_max")),
            "stratum_n_max": int(cfg.get("stratum_n_max")),
            "mechanism_size": int(cfg.get("mechanism_size")),
            "rare": Fraction(str(cfg.get("rare"))),
            "sample_pairs": None if cfg.get("sample_pairs") is None else int(cfg.get("sample_pairs")),
            "seed": cfg.seed,
        }
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid oracle bound: {exc}") from None
    inject = int(cfg.get("inject_violation"))
    results = [oracle.verify(p, inject_violation=inject, **bounds) for p in props]
    rows = [r.as_dict() for r in results]
    passed = all(r.passed for r in results)
    extra = {"passed": passed}

    if cfg.get("negative_controls"):
        controls = []
        for p in ("P1", "P2", "P4", "P5"):
            r = oracle.verify(p, inject_violation=1, **bounds)
            controls.append({**r.as_dict(), "expected": "fail", "as_expected": not r.passed})
        for cond in ("C3", "C4"):
            found = mechanism.negative_controls(mechanism.ConditionSet(x=cond))
            controls.append(
                {
                    "proposition": f"mechanism-{cond}",
                    "expected": "witness for C1, C2 and conditions b, c",
                    "witnesses": {c: nc.found for c, nc in found.items()},
                    "as_expected": all(nc.found for c, nc in found.items() if not c.endswith("a")),
                }
            )
        extra["negative_controls"] = controls
        passed = passed and all(c["as_expected"] for c in controls)
        extra["passed"] = passed
    return _document(cfg, rows, **extra), (EXIT_OK if passed else EXIT_VERIFY)


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag(parser, *names, **kw):
    parser.add_argument(*names, default=argparse.SUPPRESS, **kw)


def _switch(parser, name, help):
    dest = name.lstrip("-").replace("-", "_")
    group = parser.add_mutually_exclusive_group()
    group.add_argument(name, dest=dest, action="store_true", default=argparse.SUPPRESS, help=help)
    group.add_argument(
        "--no-" + name.lstrip("-"), dest=dest, action="store_false", default=argparse.SUPPRESS
    )


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _flag(common, "--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    _flag(common, "--format", choices=("json", "csv"))
    _flag(common, "--seed", type=int)

    parser = _Parser(prog="costcalc", description="COST calculus for binary treatments and outcomes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measures", parents=[common], help="effect measures per population")
    _flag(p, "input", nargs="?", help="CSV or JSON input")

    p = sub.add_parser("transport", parents=[common], help="transport an effect to a target")
    _flag(p, "input", nargs="?", help="CSV or JSON input with source populations")
    _flag(p, "--p0", type=float)
    _flag(p, "--p1", type=float)
    _flag(p, "--t0", type=float, help="target baseline risk (introduce)")
    _flag(p, "--t1", type=float, help="target risk under treatment (remove)")
    _flag(p, "--family", choices=("introduce", "remove"))
    direction = p.add_mutually_exclusive_group()
    direction.add_argument(
        "--assumption", choices=[m.value for m in Monotonicity], default=argparse.SUPPRESS
    )
    direction.add_argument(
        "--non-increasing", dest="assumption", action="store_const",
        const="non_increasing", default=argparse.SUPPRESS,
    )
    direction.add_argument(
        "--non-decreasing", dest="assumption", action="store_const",
        const="non_decreasing", default=argparse.SUPPRESS,
    )
    _switch(p, "--compare", "all-measures comparison mode")
    for name in ("g", "h", "i", "j"):
        _flag(p, f"--{name}", type=float)
    _flag(p, "--s0", type=float, help="study baseline risk for the bias report")
    _flag(p, "--ratio-threshold", type=float, help="near-monotonicity warning below this ratio")

    p = sub.add_parser("bias-surface", parents=[common], help="bias over an (h, f) grid")
    _flag(p, "--g", type=float)
    _flag(p, "--h-grid", help="comma-separated h values")
    _flag(p, "--f-grid", help="comma-separated baseline-risk ratios")
    _flag(p, "--s0", type=float)
    _flag(p, "--scale", choices=("rr_minus", "rr_plus"))

    p = sub.add_parser("mechanism-sim", parents=[common], help="attribute mechanism model")
    _flag(p, "input", nargs="?", help="JSON mechanism spec")
    _flag(p, "--mode", choices=("exhaustive", "monte_carlo"))
    _flag(p, "--n", type=int, help="individuals per population (monte_carlo)")
    _switch(p, "--verify", "exhaustively check the shared-parameter result")
    _switch(p, "--negative-controls", "search single-condition violations")
    _flag(p, "--max-size", type=int)
    _flag(p, "--control-max-size", type=int)

    p = sub.add_parser("meta", parents=[common], help="heterogeneity across studies")
    _flag(p, "input", nargs="?", help="counts CSV or JSON input")
    _flag(p, "--scales", help="comma-separated subset of " + ",".join(SCALES))
    _switch(p, "--switched", "compute switched-outcome proportions")
    _flag(p, "--eps", type=float, help="RR(+) compression threshold")
    for scale in SCALES:
        _flag(p, f"--pooled-{scale.replace('_', '-')}", dest=f"pooled_{scale}", type=float)

    p = sub.add_parser("oracle-verify", parents=[common], help="exhaustive proposition checks")
    _flag(p, "--proposition", dest="propositions", action="append", choices=oracle.PROPOSITIONS)
    for name in ("n-max", "pair-n-max", "symmetry-n-max", "stratum-n-max", "mechanism-size",
                 "sample-pairs", "inject-violation"):
        _flag(p, f"--{name}", type=int)
    _flag(p, "--rare", help="rare-outcome risk bound, e.g. 1/5")
    _switch(p, "--negative-controls", "also run the injected-violation controls")
    return parser


COMMANDS = {
    "measures": cmd_measures,
    "transport": cmd_transport,
    "bias-surface": cmd_bias_surface,
    "mechanism-sim": cmd_mechanism,
    "meta": cmd_meta,
    "oracle-verify": cmd_oracle_verify,
}


def run(argv=None) -> tuple:
    """Parse, execute and render; returns (exit status, stdout text)."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None) or os.environ.get(CONFIG_ENV)
    cfg = build_config(command, args, _load_config(config_path))
    out = COMMANDS[command](cfg)
    doc, status = out if isinstance(out, tuple) else (out, EXIT_OK)
    return status, render(doc, cfg.format)


def main(argv=None) -> int:
    try:
        status, text = run(argv)
    except UsageError as exc:
        print(f"costcalc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, IdentificationError, CollapsibilityError, ValueError) as exc:
        print(f"costcalc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

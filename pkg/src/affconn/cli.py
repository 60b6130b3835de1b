"""Command-line interface: verify, tensors, cases, ablate.

Configs are JSON.  Reports are emitted on stdout, as JSON (default) or an
indented text rendering; every float is printed with 17 significant digits
and dictionary keys are sorted, so a report is byte-stable for a fixed
config and seed.  Exit codes: 0 all checks pass, 1 a residual exceeded its
tolerance, 2 configuration or usage error.

Config schema::

    {
      "manifold": {"preset": "euclidean", "n": 2}
                  | {"chart": {"lower": [...], "upper": [...]},
                     "metric": [[poly, ...], ...]},
      "connection": {"case": "12", "bindings": {"u": [poly, ...], ...}}
                  | {"raw": {"f1": poly, "f2": poly, "u": [poly, ...],
                             "u1": [...], "u2": [...], "phi": [[poly, ...]]}},
      "points": [[x, ...], ...] | {"count": 20, "seed": 7},
      "tolerances": {"torsion": 1e-10, "metricity": 1e-10,
                     "transpose": 1e-10, "antisymmetry": 1e-10,
                     "curvature": 1e-8},
      "output": "json" | "pretty"
    }

A polynomial is a bare number (a constant) or ``{"terms": [{"c": coeff,
"e": [exponents]}]}``.  The sampler seed is mandatory.  Raw-spec fields
default to zero when omitted.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .cases import build_case, get_case, list_cases
from .connection import (
    ConnectionSpec,
    Corruption,
    evaluate_spec,
    nonmetricity_direct,
    nonmetricity_predicted,
    norm_residual,
    torsion_direct,
    torsion_predicted,
    transpose_torsion_closed,
    transpose_torsion_from_metric,
)
from .curvature import (
    CORRUPTIBLE_TERMS,
    curvature_direct,
    curvature_formula,
    diagnose,
    needed_order,
)
from .errors import AffconnError, DimensionMismatch, SchemaError
from .fields import (
    Chart,
    Manifold,
    PolynomialEndoField,
    PolynomialMetricField,
    PolynomialOneFormField,
    PolynomialScalarField,
    poly_from_json,
    preset_manifold,
)

__all__ = ["RunConfig", "parse_config", "main"]

_CONVENTIONS = {
    "indexing": "all JSON tensor indices are 0-based coordinate indices",
    "metric": "g[i][j] = g(d_i, d_j)",
    "oneform": "eta[i] = eta(d_i)",
    "endo": "phi[i][j] = phi^i_j, a matrix acting on column vectors",
    "gamma": "gamma[k][i][j] = Gamma^k_ij with nabla_{d_i} d_j = Gamma^k_ij d_k",
    "torsion": "t[k][i][j] = T~^k_ij",
    "nabla_g": "q[i][j][k] = (nabla~_{d_i} g)(d_j, d_k)",
    "curvature": "r[l][i][j][k] = d_l component of R~(d_i, d_j) d_k",
    "residual": "max|a - b| / max(1, max|a|, max|b|)",
}

_DEFAULT_TOLERANCES = {
    "torsion": 1e-10,
    "metricity": 1e-10,
    "transpose": 1e-10,
    "antisymmetry": 1e-10,
    "curvature": 1e-8,
}


class RunConfig:
    def __init__(self, manifold, spec, case_id, bindings, points, tolerances, output):
        self.manifold = manifold
        self.spec = spec
        self.case_id = case_id  # None for raw specs
        self.bindings = bindings  # binding names, for the report echo
        self.points = points
        self.tolerances = tolerances
        self.output = output


# ---------------------------------------------------------------------------
# Config parsing


def _expect_dict(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    return obj


def _number(obj, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    return float(obj)


def _int(obj, where: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(f"{where}: expected an integer")
    return obj


def _field_rows(n: int, obj, where: str) -> list:
    if not isinstance(obj, list):
        raise SchemaError(f"{where}: expected a list of polynomials")
    if len(obj) != n:
        raise DimensionMismatch(
            f"{where}: has {len(obj)} components, manifold dimension is {n}"
        )
    return obj


def _parse_oneform(n: int, obj, where: str) -> PolynomialOneFormField:
    comps = [
        poly_from_json(n, c, f"{where}[{i}]")
        for i, c in enumerate(_field_rows(n, obj, where))
    ]
    return PolynomialOneFormField(n, comps)


def _parse_endo(n: int, obj, where: str) -> PolynomialEndoField:
    rows = []
    for i, row in enumerate(_field_rows(n, obj, where)):
        rows.append(
            [
                poly_from_json(n, e, f"{where}[{i}][{j}]")
                for j, e in enumerate(_field_rows(n, row, f"{where}[{i}]"))
            ]
        )
    return PolynomialEndoField(n, rows)


def _parse_manifold(obj) -> Manifold:
    obj = _expect_dict(obj, "manifold")
    if "preset" in obj:
        params = dict(obj)
        name = params.pop("preset")
        if not isinstance(name, str):
            raise SchemaError("manifold.preset: expected a string")
        return preset_manifold(name, params)
    if "chart" not in obj or "metric" not in obj:
        raise SchemaError(
            "manifold: expected either a 'preset' or a 'chart' plus 'metric'"
        )
    extra = set(obj) - {"chart", "metric"}
    if extra:
        raise SchemaError(f"manifold: unknown keys {sorted(extra)}")
    box = _expect_dict(obj["chart"], "manifold.chart")
    if set(box) != {"lower", "upper"}:
        raise SchemaError("manifold.chart: expected exactly 'lower' and 'upper'")
    lower = box["lower"]
    upper = box["upper"]
    for key, val in (("lower", lower), ("upper", upper)):
        if not isinstance(val, list) or not val:
            raise SchemaError(f"manifold.chart.{key}: expected a non-empty list")
        for i, x in enumerate(val):
            _number(x, f"manifold.chart.{key}[{i}]")
    if len(lower) != len(upper):
        raise SchemaError("manifold.chart: lower and upper must have equal length")
    n = len(lower)
    chart = Chart(n, lower, upper)
    grid = []
    for i, row in enumerate(_field_rows(n, obj["metric"], "manifold.metric")):
        grid.append(
            [
                poly_from_json(n, e, f"manifold.metric[{i}][{j}]")
                for j, e in enumerate(_field_rows(n, row, f"manifold.metric[{i}]"))
            ]
        )
    return Manifold("inline", chart, PolynomialMetricField(n, grid), {"n": n})


def _parse_connection(obj, manifold: Manifold):
    obj = _expect_dict(obj, "connection")
    has_case = "case" in obj
    has_raw = "raw" in obj
    if has_case == has_raw:
        raise SchemaError("connection: exactly one of 'case' and 'raw' must be present")
    n = manifold.chart.n
    if has_case:
        extra = set(obj) - {"case", "bindings"}
        if extra:
            raise SchemaError(f"connection: unknown keys {sorted(extra)}")
        case_id = obj["case"]
        if isinstance(case_id, bool) or not isinstance(case_id, (int, str)):
            raise SchemaError("connection.case: expected a case id")
        preset = get_case(case_id)
        bindings_json = _expect_dict(obj.get("bindings", {}), "connection.bindings")
        bindings = {}
        for name, val in bindings_json.items():
            where = f"connection.bindings.{name}"
            if name == "phi":
                bindings[name] = _parse_endo(n, val, where)
            else:
                bindings[name] = _parse_oneform(n, val, where)
        spec = build_case(preset.id, bindings, manifold)
        return spec, preset.id, sorted(bindings)
    extra = set(obj) - {"raw"}
    if extra:
        raise SchemaError(f"connection: unknown keys {sorted(extra)}")
    raw = _expect_dict(obj["raw"], "connection.raw")
    known = {"f1", "f2", "u", "u1", "u2", "phi"}
    extra = set(raw) - known
    if extra:
        raise SchemaError(f"connection.raw: unknown keys {sorted(extra)}")
    kwargs = {}
    for name in ("f1", "f2"):
        if name in raw:
            kwargs[name] = PolynomialScalarField(
                n, poly_from_json(n, raw[name], f"connection.raw.{name}")
            )
    for name in ("u", "u1", "u2"):
        if name in raw:
            kwargs[name] = _parse_oneform(n, raw[name], f"connection.raw.{name}")
    if "phi" in raw:
        kwargs["phi"] = _parse_endo(n, raw["phi"], "connection.raw.phi")
    return ConnectionSpec.build(n, **kwargs), None, sorted(raw)


def _parse_points(obj, chart: Chart) -> np.ndarray:
    if isinstance(obj, dict):
        if set(obj) != {"count", "seed"}:
            raise SchemaError("points: sampler needs exactly 'count' and 'seed'")
        count = _int(obj["count"], "points.count")
        seed = _int(obj["seed"], "points.seed")
        if count < 1:
            raise SchemaError("points.count: expected a positive integer")
        return chart.sample(count, seed)
    if not isinstance(obj, list) or not obj:
        raise SchemaError("points: expected a non-empty list or a {count, seed} sampler")
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != chart.n:
            raise SchemaError(f"points[{i}]: expected {chart.n} coordinates")
        rows.append([_number(x, f"points[{i}][{j}]") for j, x in enumerate(row)])
    return chart.require_inside(np.array(rows, dtype=float))


def _parse_tolerances(obj) -> dict:
    tols = dict(_DEFAULT_TOLERANCES)
    if obj is None:
        return tols
    obj = _expect_dict(obj, "tolerances")
    extra = set(obj) - set(tols)
    if extra:
        raise SchemaError(f"tolerances: unknown keys {sorted(extra)}")
    for name, val in obj.items():
        v = _number(val, f"tolerances.{name}")
        if not v > 0:
            raise SchemaError(f"tolerances.{name}: expected a positive number")
        tols[name] = v
    return tols


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON config string."""
    root = _expect_dict(json.loads(text), "config")
    extra = set(root) - {"manifold", "connection", "points", "tolerances", "output"}
    if extra:
        raise SchemaError(f"config: unknown keys {sorted(extra)}")
    for key in ("manifold", "connection", "points"):
        if key not in root:
            raise SchemaError(f"config: missing required key '{key}'")
    manifold = _parse_manifold(root["manifold"])
    spec, case_id, bindings = _parse_connection(root["connection"], manifold)
    points = _parse_points(root["points"], manifold.chart)
    tolerances = _parse_tolerances(root.get("tolerances"))
    output = root.get("output", "json")
    if output not in ("json", "pretty"):
        raise SchemaError("output: expected 'json' or 'pretty'")
    return RunConfig(manifold, spec, case_id, bindings, points, tolerances, output)


# ---------------------------------------------------------------------------
# Deterministic rendering


def _fmt_float(v) -> str:
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        raise ValueError("refusing to serialize a non-finite number")
    s = format(v, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _render_json(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(obj))
    elif isinstance(obj, np.ndarray):
        _render_json(obj.tolist(), out)
    elif isinstance(obj, dict):
        out.append("{")
        for idx, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string report key {key!r}")
            if idx:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _render_json(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for idx, item in enumerate(obj):
            if idx:
                out.append(",")
            _render_json(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def render_json(obj) -> str:
    out: list = []
    _render_json(obj, out)
    return "".join(out)


def _scalar_text(obj) -> str | None:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    return None


def _render_pretty(obj, indent: str, lines: list):
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            scalar = _scalar_text(val)
            if scalar is not None:
                lines.append(f"{indent}{key}: {scalar}")
            elif isinstance(val, (dict, list, tuple, np.ndarray)) and len(val) == 0:
                lines.append(f"{indent}{key}: (empty)")
            else:
                lines.append(f"{indent}{key}:")
                _render_pretty(val, indent + "  ", lines)
    elif isinstance(obj, (list, tuple)):
        flat = [_scalar_text(v) for v in obj]
        if all(s is not None for s in flat):
            lines.append(f"{indent}[{', '.join(flat)}]")
        else:
            for val in obj:
                scalar = _scalar_text(val)
                if scalar is not None:
                    lines.append(f"{indent}- {scalar}")
                else:
                    lines.append(f"{indent}-")
                    _render_pretty(val, indent + "  ", lines)
    else:
        lines.append(f"{indent}{_scalar_text(obj)}")


def render_pretty(obj) -> str:
    lines: list = []
    _render_pretty(obj, "", lines)
    return "\n".join(lines)


def _emit(report: dict, output: str) -> None:
    if output == "pretty":
        sys.stdout.write(render_pretty(report) + "\n")
    else:
        sys.stdout.write(render_json(report) + "\n")


def _manifold_echo(manifold: Manifold) -> dict:
    return {
        "name": manifold.name,
        "n": manifold.chart.n,
        "params": dict(manifold.params),
    }


# ---------------------------------------------------------------------------
# Commands


def cmd_verify(config: RunConfig, corrupt_term: str | None = None) -> tuple[int, dict]:
    corruption = None
    if corrupt_term is not None:
        if corrupt_term not in CORRUPTIBLE_TERMS:
            raise SchemaError(
                f"--corrupt-term {corrupt_term!r} is not one of "
                f"{', '.join(CORRUPTIBLE_TERMS)}"
            )
        corruption = Corruption(corrupt_term, 2.0)

    chart, metric = config.manifold.chart, config.manifold.metric
    spec, pts = config.spec, config.points
    # Each consumer applies the corruption only if it owns the named term.
    frame = evaluate_spec(
        chart, metric, spec, pts, order=needed_order(spec), corrupt=corruption
    )

    t_direct = torsion_direct(frame.gamma_tilde)
    t_law = torsion_predicted(frame.u.comp, frame.phi.comp)
    q_direct = nonmetricity_direct(frame.gamma_tilde, frame.geo.metric)
    q_law = nonmetricity_predicted(
        frame.geo.g, frame.u1.comp, frame.u2.comp, frame.f1.value, frame.f2.value
    )
    tp_metric = transpose_torsion_from_metric(t_direct, frame.geo.g, frame.geo.ginv)
    tp_closed = transpose_torsion_closed(
        frame.u.comp, frame.split, frame.u_sharp.comp
    )
    r_formula, _ = curvature_formula(frame, corrupt=corruption)
    r_direct = curvature_direct(chart, metric, spec, pts, corrupt=corruption)
    antisym = max(
        norm_residual(r_formula, -r_formula.swapaxes(2, 3)),
        norm_residual(r_direct, -r_direct.swapaxes(2, 3)),
    )

    tols = config.tolerances
    rows = [
        ("torsion_law", norm_residual(t_direct, t_law), tols["torsion"]),
        ("metricity_law", norm_residual(q_direct, q_law), tols["metricity"]),
        ("transpose_torsion_law", norm_residual(tp_metric, tp_closed), tols["transpose"]),
        ("curvature_antisymmetry", antisym, tols["antisymmetry"]),
        ("curvature_formula_vs_direct", norm_residual(r_formula, r_direct), tols["curvature"]),
    ]
    checks = [
        {"check": name, "residual": res, "tolerance": tol, "pass": bool(res <= tol)}
        for name, res, tol in rows
    ]
    ok = all(c["pass"] for c in checks)
    report = {
        "command": "verify",
        "conventions": _CONVENTIONS,
        "manifold": _manifold_echo(config.manifold),
        "connection": {"case": config.case_id, "bindings": config.bindings},
        "points": config.points,
        "corrupt_term": corrupt_term,
        "checks": checks,
        "pass": ok,
    }
    if not ok:
        report["diagnosis"] = diagnose(
            chart, metric, spec, pts, tolerance=tols["curvature"], corrupt=corruption
        )
    return (0 if ok else 1), report


def cmd_tensors(config: RunConfig) -> tuple[int, dict]:
    chart, metric = config.manifold.chart, config.manifold.metric
    spec, pts = config.spec, config.points
    frame = evaluate_spec(chart, metric, spec, pts, order=needed_order(spec))
    t_direct = torsion_direct(frame.gamma_tilde)
    q_direct = nonmetricity_direct(frame.gamma_tilde, frame.geo.metric)
    r_formula, _ = curvature_formula(frame)
    r_direct = curvature_direct(chart, metric, spec, pts)
    per_point = []
    for p in range(pts.shape[0]):
        per_point.append(
            {
                "point": pts[p],
                "g": frame.geo.g[p],
                "gamma": frame.geo.gamma[p],
                "gamma_tilde": frame.gamma_tilde[p],
                "torsion": t_direct[p],
                "nabla_g": q_direct[p],
                "r_formula": r_formula[p],
                "r_direct": r_direct[p],
            }
        )
    report = {
        "command": "tensors",
        "conventions": _CONVENTIONS,
        "manifold": _manifold_echo(config.manifold),
        "connection": {"case": config.case_id, "bindings": config.bindings},
        "tensors": per_point,
    }
    return 0, report


def cmd_cases() -> tuple[int, dict]:
    phi_names = {
        "full": "bound endomorphism",
        "sym": "self-adjoint part of the bound endomorphism",
        "skew": "skew-adjoint part of the bound endomorphism",
        "identity": "identity",
        "ricci": "Ricci operator",
        "none": "absent",
    }
    entries = []
    for preset in list_cases():
        checks = ["reduced_connection", "metricity_general", "torsion_law"]
        checks.append(
            "metricity_stated (reported, prose deviates)"
            if preset.prose_deviation
            else "metricity_stated"
        )
        if preset.symmetric:
            checks.append("torsion_zero")
        if preset.id == "17":
            checks += [
                "curvature_reduced_vs_formula",
                "curvature_reduced_vs_direct",
                "s_skew_identity",
            ]
        entries.append(
            {
                "id": preset.id,
                "name": preset.name,
                "f1": preset.f1,
                "f2": preset.f2,
                "required_bindings": list(preset.required),
                "phi": phi_names[preset.phi_mode],
                "aliases": [f"{a} = {b}" for a, b in preset.alias_pairs],
                "symmetric": preset.symmetric,
                "manifold": "curved (Q != 0)" if preset.requires_curved else "any",
                "parent": preset.parent,
                "prose_deviation": preset.prose_deviation,
                "checks": checks,
            }
        )
    primary = sum(1 for p in list_cases() if p.parent is None)
    report = {
        "command": "cases",
        "primary_count": primary,
        "total_count": len(entries),
        "cases": entries,
    }
    return 0, report


def cmd_ablate(config: RunConfig) -> tuple[int, dict]:
    chart, metric = config.manifold.chart, config.manifold.metric
    result = diagnose(
        chart,
        metric,
        config.spec,
        config.points,
        tolerance=config.tolerances["curvature"],
    )
    groups = [
        {k: row[k] for k in ("term", "contribution", "alignment", "explained_fraction")}
        for row in result["term_table"]
        if row["kind"] == "formula_group"
    ]
    report = {
        "command": "ablate",
        "conventions": _CONVENTIONS,
        "manifold": _manifold_echo(config.manifold),
        "connection": {"case": config.case_id, "bindings": config.bindings},
        "residual": result["residual"],
        "tolerance": result["tolerance"],
        "pass": result["pass"],
        "groups": groups,
        "binding_ablation": result["binding_ablation"],
        "minimal_failing_bindings": result["minimal_failing_bindings"],
    }
    return 0, report


# ---------------------------------------------------------------------------
# Entry point


def _load_config(path: str, tolerance: float | None, output_flag: str | None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    config = parse_config(text)
    if tolerance is not None:
        if not tolerance > 0:
            raise SchemaError("--tolerance: expected a positive number")
        config.tolerances = {name: tolerance for name in config.tolerances}
    if output_flag is not None:
        config.output = output_flag
    return config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affconn",
        description=(
            "Numerical checks for a family of metric deformations of the "
            "Levi-Civita connection: torsion, non-metricity, and curvature, "
            "each computed two independent ways."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the identity checks for a config")
    verify.add_argument("--config", required=True, help="path to a JSON config")
    verify.add_argument(
        "--tolerance",
        type=float,
        default=None,
        help="override every tolerance with one value",
    )
    verify.add_argument(
        "--corrupt-term",
        default=None,
        help="double one named term (sensitivity test hook)",
    )
    verify.add_argument("--output", choices=("json", "pretty"), default=None)

    tensors = sub.add_parser("tensors", help="dump the evaluated tensors per point")
    tensors.add_argument("--config", required=True)
    tensors.add_argument("--output", choices=("json", "pretty"), default=None)

    cases = sub.add_parser("cases", help="list the case presets")
    cases.add_argument("--output", choices=("json", "pretty"), default=None)

    ablate = sub.add_parser(
        "ablate", help="per-group curvature contributions and failing-term search"
    )
    ablate.add_argument("--config", required=True)
    ablate.add_argument("--output", choices=("json", "pretty"), default=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "cases":
            code, report = cmd_cases()
            _emit(report, args.output or "json")
            return code
        config = _load_config(args.config, getattr(args, "tolerance", None), args.output)
        if args.command == "verify":
            code, report = cmd_verify(config, corrupt_term=args.corrupt_term)
        elif args.command == "tensors":
            code, report = cmd_tensors(config)
        else:
            code, report = cmd_ablate(config)
        _emit(report, config.output)
        return code
    except (AffconnError, json.JSONDecodeError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Batch driver: sample a metric spec, run one verification suite per point, write a JSON report.

Exit codes: 0 pass, 1 tolerance failure or evaluation error, 2 spec parse error,
3 sampling exhausted, 4 Psi'_2 = 0.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from typing import Any

import click
import jsonschema
import numpy as np

from . import __version__, catalog, petrov, pke, twistor
from .catalog import MetricSpec, SamplingExhaustedError, SpecError

EXIT_OK, EXIT_TOLERANCE, EXIT_PARSE, EXIT_SAMPLING, EXIT_ASSUMPTION = 0, 1, 2, 3, 4
WORKERS_ENV = "PKETWISTOR_WORKERS"
DEFAULT_TOL = {"classify": 1e-6, "verify": 1e-8, "main-theorem": 1e-6, "sasaki": 1e-8, "yang-mills": 1e-9}
MU_RANGE = (0.3, 2.0)
CONE_RANGE = (0.5, 2.0)


class AssumptionError(ValueError):
    """The spec violates the standing assumption Psi'_2 != 0."""


# -- spec handling ---------------------------------------------------------------------


def _parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise SpecError(f"parameter {text!r} must look like name=value")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise SpecError(f"parameter {name!r}: {exc}") from exc


def load_spec(path: str | None, family: str | None, params: tuple[str, ...] = (),
              functions: tuple[str, ...] = ()) -> tuple[MetricSpec, str]:
    """Spec and its canonical text (hashed for provenance)."""
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read spec {path}: {exc}") from exc
    elif family:
        raw = {"family": family}
    else:
        raise SpecError("either --spec or --family is required")
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")
    raw = dict(raw)
    if params:
        raw["params"] = {**raw.get("params", {}), **dict(_parse_param(p) for p in params)}
    if functions:
        extra = dict(f.partition("=")[::2] for f in functions)
        raw["functions"] = {**raw.get("functions", {}), **extra}
    p = raw.get("params", {})
    if isinstance(p, dict) and "Psi2p" in p:
        try:
            zero = float(p["Psi2p"]) == 0.0
        except (TypeError, ValueError) as exc:
            raise SpecError(f"Psi2p: {exc}") from exc
        if zero:
            raise AssumptionError("Psi2p = 0 is outside the standing assumption Psi'_2 != 0")
    spec = MetricSpec.from_dict(raw)
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return spec, canonical


# -- serialization ---------------------------------------------------------------------


def _clean(obj):
    """Plain Python types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON with floats printed to 17 significant digits and sorted keys."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, float):
            return format(o, ".17g")
        return json.dumps(o)

    return enc(_clean(obj), 0) + "\n"


def report_schema() -> dict:
    text = resources.files("pketwistor").joinpath("data/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(report: dict) -> None:
    jsonschema.validate(_clean(report), report_schema())


# -- per-point suites ------------------------------------------------------------------


def _failures(op: str, point, residuals: dict[str, float], tol: float) -> list[dict]:
    return [{"operation": op, "point": list(point), "check": k, "value": v}
            for k, v in residuals.items() if not (v is not None and math.isfinite(v) and v < tol)]


def _classify_point(spec: MetricSpec, point, order: int, tol: float, rng) -> dict:
    cof = catalog.build_coframe(spec, point, order)
    an = pke.analyze(cof)
    psi = np.asarray(an.decomp.psi, dtype=float)
    ptype = petrov.classify(petrov.WeylQuartic(tuple(psi)), tol=tol, scale=1.0 + abs(an.psi2p), noise=1e-12)
    return {"psi": psi, "psi2p": an.psi2p, "petrov_type": str(ptype), "residuals": {}, "failures": []}


def _verify_point(spec: MetricSpec, point, order: int, tol: float, rng) -> dict:
    cof = catalog.build_coframe(spec, point, order)
    an = pke.analyze(cof)
    rep = pke.verify_pke(an)
    res = dict(rep.residuals)
    res["bianchi_cross"] = pke.bianchi_consistency(an).max_cross
    out: dict[str, Any] = {"psi2p": an.psi2p, "psi": np.asarray(an.decomp.psi, dtype=float)}
    try:
        pke.curvature_A(an)
        res["curvature_A_closed_form"] = 0.0
    except pke.ConventionError:
        res["curvature_A_closed_form"] = float("inf")
    if spec.family == "typeII-YM":
        cb = pke.curvature_B(an)
        res["curvature_B_off_pattern"] = cb.off_pattern()
        out["yang_mills_B"] = bool(cb.anti_self_dual(tol) and cb.yang_mills_criterion(tol))
        if not out["yang_mills_B"]:
            res["yang_mills_B"] = float("inf")
    out["residuals"] = res
    out["failures"] = _failures("verify", point, res, tol)
    return out


def _main_theorem_point(spec: MetricSpec, point, order: int, tol: float, rng) -> dict:
    cof = catalog.build_coframe(spec, point, order)
    mu = float(rng.uniform(*MU_RANGE) * rng.choice([-1.0, 1.0]))
    rec = twistor.main_theorem_record(cof, mu)
    res = {"quartic_deviation": rec.deviation}
    out = {"mu": rec.mu, "psi2p": rec.psi2p, "quartic": {"a": rec.a, "expected": rec.expected},
           "petrov_type": rec.weyl_type, "cartan_type": rec.cartan_type, "residuals": res}
    fails = _failures("main-theorem", point, res, tol)
    if not rec.agree:
        fails.append({"operation": "main-theorem", "point": list(point), "check": "root_type",
                      "value": f"{rec.cartan_type}!={rec.weyl_type}"})
    out["failures"] = fails
    return out


def _sasaki_point(spec: MetricSpec, point, order: int, tol: float, rng) -> dict:
    cof = catalog.build_coframe(spec, point, order)
    s = float(rng.uniform(*CONE_RANGE))
    rep = twistor.verify_sasaki(cof, s)
    res = {f"lifted_{k}": v for k, v in rep.lifted.items()}
    res["so5_connection"] = rep.so5_residual
    res["einstein_residual"] = rep.einstein_residual / (1.0 + abs(rep.einstein_constant))
    res["einstein_constant_deviation"] = rep.einstein_deviation / (1.0 + 24 * rep.psi2p ** 2)
    return {"mu": s, "psi2p": rep.psi2p, "einstein_constant": rep.einstein_constant, "residuals": res,
            "printed_structure": rep.printed, "failures": _failures("sasaki", point, res, tol)}


def _yang_mills_point(spec: MetricSpec, point, order: int, tol: float, rng) -> dict:
    cof = catalog.build_coframe(spec, point, order)
    an = pke.analyze(cof)
    ym = pke.yang_mills_A(an, tol)
    expected = abs(an.psi2p - 1.0) < tol
    res = {"self_dual_part": ym.residual}
    out = {"psi2p": an.psi2p, "yang_mills_A": ym.holds, "residuals": res, "failures": []}
    if ym.holds != expected:
        out["failures"].append({"operation": "yang-mills", "point": list(point), "check": "criterion",
                                "value": f"holds={ym.holds} with Psi2p={an.psi2p!r}"})
    return out


SUITES = {
    "classify": _classify_point,
    "verify": _verify_point,
    "main-theorem": _main_theorem_point,
    "sasaki": _sasaki_point,
    "yang-mills": _yang_mills_point,
}


def _run_point(args) -> dict:
    command, spec_dict, index, point, order, tol, seed = args
    spec = MetricSpec.from_dict(spec_dict)
    rng = np.random.default_rng([seed, index])
    try:
        rec = SUITES[command](spec, point, order, tol, rng)
        rec["error"] = None
    except Exception as exc:  # reported per point, never fatal for the batch
        rec = {"residuals": {}, "error": f"{type(exc).__name__}: {exc}",
               "failures": [{"operation": command, "point": list(point), "check": "evaluation",
                             "value": f"{type(exc).__name__}: {exc}"}]}
    rec["index"] = index
    rec["point"] = list(point)
    return rec


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run(command: str, spec: MetricSpec, canonical: str, points: int, seed: int, order: int, tol: float) -> dict:
    """Build the report; raises SamplingExhaustedError when the box yields too few points."""
    samples = catalog.accepted_samples(spec, points, seed=seed, order=order)
    jobs = [(command, spec.to_dict(), i, [float(x) for x in p], order, tol, seed) for i, (p, _) in enumerate(samples)]
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_point, jobs))
    else:
        records = [_run_point(j) for j in jobs]
    records.sort(key=lambda r: r["index"])
    return {
        "command": command,
        "spec": spec.to_dict(),
        "tolerance": tol,
        "provenance": {"spec_sha256": hashlib.sha256(canonical.encode()).hexdigest(), "seed": seed,
                       "order": order, "points": points, "tool_version": __version__},
        "records": records,
        "summary": summarize(command, records),
    }


def summarize(command: str, records: list[dict]) -> dict:
    max_res: dict[str, float] = {}
    for r in records:
        for k, v in r.get("residuals", {}).items():
            v = float("inf") if v is None else float(v)
            max_res[k] = max(max_res.get(k, 0.0), v)
    hist = Counter(r["petrov_type"] for r in records if r.get("petrov_type"))
    out = {
        "points": len(records),
        "errors": sum(1 for r in records if r.get("error")),
        "failures": sum(len(r.get("failures", [])) for r in records),
        "max_residuals": max_res,
        "type_histogram": dict(sorted(hist.items())),
    }
    if command == "main-theorem":
        pairs = sorted({f"{r['cartan_type']}={r['petrov_type']}" if r["cartan_type"] == r["petrov_type"]
                        else f"{r['cartan_type']}!={r['petrov_type']}" for r in records if r.get("cartan_type")})
        out["verdict"] = ",".join(pairs)
    if command == "yang-mills":
        out["yang_mills_A"] = sorted({bool(r["yang_mills_A"]) for r in records if "yang_mills_A" in r})
    out["passed"] = out["failures"] == 0
    return out


def exit_code(report: dict) -> int:
    s = report["summary"]
    if report["command"] == "classify":
        return EXIT_OK if s["errors"] == 0 else EXIT_TOLERANCE
    return EXIT_OK if s["passed"] else EXIT_TOLERANCE


def _human(report: dict) -> str:
    s = report["summary"]
    lines = [f"{report['command']} {report['spec']['family']}: {s['points']} points, "
             f"{'PASS' if s['passed'] else 'FAIL'} ({s['failures']} failures, {s['errors']} errors)"]
    if s["type_histogram"]:
        lines.append("types: " + ", ".join(f"{k}: {v}" for k, v in s["type_histogram"].items()))
    if "verdict" in s:
        lines.append("quartic types: " + s["verdict"])
    psi = sorted({round(r["psi2p"], 12) for r in report["records"] if r.get("psi2p") is not None})
    if psi and len(psi) <= 3:
        lines.append("Psi2p: " + ", ".join(f"{p:.12g}" for p in psi))
    for k, v in s["max_residuals"].items():
        lines.append(f"  max {k}: {v:.3e}")
    for r in report["records"]:
        for f in r.get("failures", [])[:3]:
            lines.append(f"  fail [{f['operation']}] point {r['index']} {f['check']}: {f['value']}")
    return "\n".join(lines)


# -- click wiring ----------------------------------------------------------------------


def _common(fn):
    opts = [
        click.option("--spec", "spec_path", type=click.Path(), help="metric spec JSON file"),
        click.option("--family", help="catalog family when no spec file is given"),
        click.option("--param", "params", multiple=True, help="override a parameter, name=value"),
        click.option("--function", "functions", multiple=True, help="override a free function, name=expr"),
        click.option("--points", default=20, show_default=True, type=click.IntRange(min=1)),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--order", default=3, show_default=True, type=click.IntRange(3, 6)),
        click.option("--tol", type=float, default=None, help="tolerance (command-specific default)"),
        click.option("--out", type=click.Path(), help="write the JSON report here"),
        click.option("--json", "as_json", is_flag=True, help="print the JSON report to stdout"),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _execute(command: str, spec_path, family, params, functions, points, seed, order, tol, out, as_json):
    try:
        spec, canonical = load_spec(spec_path, family, params, functions)
    except AssumptionError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ASSUMPTION)
    except SpecError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    tol = DEFAULT_TOL[command] if tol is None else tol
    try:
        report = run(command, spec, canonical, points, seed, order, tol)
    except SamplingExhaustedError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_SAMPLING)
    validate_report(report)
    text = dumps(report)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    click.echo(text if as_json else _human(report), nl=not as_json)
    sys.exit(exit_code(report))


@click.group()
@click.version_option(__version__, prog_name="pketwistor")
def main():
    """Numerical checks for para-Kähler-Einstein metrics and their twistor distributions."""


def _command(name: str, help_text: str):
    @_common
    def cmd(**kw):
        _execute(name, **kw)

    cmd.__doc__ = help_text
    main.command(name)(cmd)


_command("classify", "Petrov type histogram of the anti-self-dual Weyl quartic.")
_command("verify", "pKE axioms, Bianchi consistency and connection closed forms.")
_command("main-theorem", "Cartan quartic of the twistor distribution against -6 mu^2 Psi'_2 Psi_i.")
_command("sasaki", "Einstein constant, Levi-Civita connection and para-Sasaki conditions on the cone.")
_command("yang-mills", "Yang-Mills criterion for the sl3 Cartan connection.")


if __name__ == "__main__":
    main()

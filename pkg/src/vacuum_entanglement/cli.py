"""Command-line entry point.

Exit codes: 0 success, 2 quadrature non-convergence, 3 configuration error,
4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from dataclasses import replace

import jsonschema
import numpy as np

from .entanglement import entanglement_report, leading_order_negativity
from .experiments import (FORMAT_VERSION, SweepSpec, WindowTemplate, ablation_study, fit_decay,
                          optimize_window, sweep_negativity, write_csv)
from .kernels import (FieldModel, Tolerances, compute_amplitudes, detector_pair, emission_norm2,
                      margin_from_amplitudes)
from .normalization import normalization_report
from .oracles import brute_force_emission, brute_force_exchange
from .windows import gaussian_window, superosc_window, window_from_dict

EXIT_OK, EXIT_NONCONVERGED, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3, 4
COMMANDS = ("amplitudes", "condition", "negativity", "sweep", "optimize", "ablate", "oracle-check")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_bounds = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

WINDOW_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["gaussian", "superosc"]},
        "T": _pos, "eps0": _num, "nu0": _nonneg,
        "N": {"type": "integer", "minimum": 2}, "a": {"type": "number", "minimum": 1},
        "sigma": _pos, "L": _pos,
    },
    "required": ["family"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "model": {"enum": [m.value for m in FieldModel]},
        "paths": {"enum": ["reduced", "both"]},
        "geometry": {
            "type": "object",
            "properties": {"L": _pos, "T": _pos, "causal": {"type": "boolean"}},
            "required": ["L"], "additionalProperties": False,
        },
        "detectors": {
            "type": "object",
            "properties": {k: {
                "type": "object",
                "properties": {"gap": _nonneg, "window": WINDOW_SCHEMA},
                "required": ["gap", "window"], "additionalProperties": False,
            } for k in ("a", "b")},
            "required": ["a", "b"], "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {"rel_tol": _pos, "l1_tol": _nonneg, "path_rtol": _pos,
                           "max_evals": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "grid": {"type": "array", "items": _pos},
                "budget": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "objective": {"enum": ["margin", "negativity"]},
                "L_over_T": _pos,
                "budget_factor": {"type": "integer", "minimum": 1},
                "gaussian_points": {"type": "array", "items": _pos},
                "with_log": {"type": "boolean"},
                "template": {
                    "type": "object",
                    "properties": {
                        "family_a": {"enum": ["gaussian", "superosc"]},
                        "T": _pos, "eps0": _num, "n_half": _bounds, "sigma_frac": _bounds,
                        "nu0": _bounds, "gap_a": _bounds, "gap_b": _bounds, "gap_pad": _nonneg,
                        "target": {"enum": ["cos", "sin"]},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "oracle": {
            "type": "object",
            "properties": {
                "gaps": {"type": "array", "items": _nonneg},
                "separations": {"type": "array", "items": _pos},
                "rtol": _pos,
                "normalization_configs": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "model": "dirac_right",
    "paths": "both",
    "tolerances": {"rel_tol": 1e-10, "l1_tol": 1e-13, "path_rtol": 1e-6, "max_evals": 4_000_000},
    "sweep": {"grid": [3.0, 4.0, 5.0, 6.0, 7.0, 8.0], "budget": 500, "seed": 0,
              "objective": "negativity", "L_over_T": 5.0, "budget_factor": 4,
              "gaussian_points": [10.0], "with_log": False, "template": {}},
    "oracle": {"gaps": [1.0, 2.0, 4.0], "separations": [3.0, 5.0, 8.0], "rtol": 1e-5,
               "normalization_configs": 20, "seed": 0},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(raw: dict) -> dict:
    """Validate against the schema and fill in defaults."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config at {list(exc.absolute_path)}: {exc.message}") from None
    cfg = _merge(DEFAULTS, raw)
    if "geometry" in cfg:
        cfg["geometry"] = _merge({"T": 1.0, "causal": True}, cfg["geometry"])
    return cfg


def load_config(path) -> dict:
    if path is None:
        return resolve_config({})
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return resolve_config(raw)


def _tol(cfg) -> Tolerances:
    return Tolerances(**cfg["tolerances"])


def _pair(cfg):
    if "geometry" not in cfg or "detectors" not in cfg:
        raise ConfigError("this command needs 'geometry' and 'detectors'")
    g = cfg["geometry"]
    try:
        wa = window_from_dict(cfg["detectors"]["a"]["window"])
        wb = window_from_dict(cfg["detectors"]["b"]["window"])
        dA, dB, geom = detector_pair(g["L"], wa, wb, cfg["detectors"]["a"]["gap"],
                                     cfg["detectors"]["b"]["gap"], g["causal"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return dA, dB, replace(geom, T=g["T"])


def _sweep_spec(cfg, model=None) -> SweepSpec:
    s = cfg["sweep"]
    tpl = {k: tuple(v) if isinstance(v, list) else v for k, v in s["template"].items()}
    if "n_half" in tpl:
        tpl["n_half"] = tuple(int(v) for v in tpl["n_half"])
    try:
        return SweepSpec(grid=tuple(s["grid"]), model=FieldModel(model or cfg["model"]),
                         template=WindowTemplate(**tpl), budget=s["budget"], seed=s["seed"],
                         objective=s["objective"], tol=_tol(cfg))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, FieldModel):
        return v.value
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _envelope(cfg, payload: dict) -> str:
    doc = {"format_version": FORMAT_VERSION, "config": cfg}
    doc.update(payload)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _amps(cfg, cross=True):
    dA, dB, geom = _pair(cfg)
    return compute_amplitudes(dA, dB, geom, FieldModel(cfg["model"]), paths=cfg["paths"],
                              tol=_tol(cfg), cross=cross)


# --------------------------------------------------------------------------
# commands: each returns (text, exit code)

def cmd_amplitudes(cfg, threads=1):
    amps = _amps(cfg)
    payload = {"amplitudes": amps.to_dict(), "paths": amps.paths}
    return _envelope(cfg, payload), EXIT_OK if amps.converged else EXIT_NONCONVERGED


def cmd_condition(cfg, threads=1):
    amps = _amps(cfg, cross=False)
    margin, err = margin_from_amplitudes(amps)
    prod = amps.eA2 * amps.eB2
    payload = {"margin": margin, "margin_err": err, "entangled": margin > 0,
               "significant": margin > 3.0 * err and margin > 0,
               "ratio": abs(amps.x_ab) ** 2 / prod if prod > 0 else None,
               "amplitudes": amps.to_dict()}
    return _envelope(cfg, payload), EXIT_OK if amps.converged else EXIT_NONCONVERGED


def cmd_negativity(cfg, threads=1):
    amps = _amps(cfg)
    try:
        report = entanglement_report(amps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    payload = {"report": report.to_dict(), "leading_order_negativity": leading_order_negativity(amps),
               "amplitudes": amps.to_dict()}
    return _envelope(cfg, payload), EXIT_OK if amps.converged else EXIT_NONCONVERGED


def cmd_sweep(cfg, threads=1):
    spec = _sweep_spec(cfg)
    rows = sweep_negativity(spec, threads)
    text = write_csv(rows, cfg)
    if sum(r["negativity"] > 0 for r in rows) >= 3:
        fit = fit_decay(rows)
        text = text.replace("\nL_over_T", "\n# decay_fit: " + json.dumps(fit.to_dict(), sort_keys=True)
                            + "\nL_over_T", 1)
    return text, EXIT_OK


def cmd_optimize(cfg, threads=1):
    spec = _sweep_spec(cfg)
    s = cfg["sweep"]
    try:
        res = optimize_window(spec, s["L_over_T"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _envelope(cfg, {"result": res.to_dict(with_log=s["with_log"])}), EXIT_OK


def cmd_ablate(cfg, threads=1):
    spec = _sweep_spec(cfg)
    rep = ablation_study(spec, threads, cfg["sweep"]["budget_factor"])
    summary = {k: v for k, v in rep.items() if k != "rows"}
    text = write_csv(rep["rows"], cfg)
    text = text.replace("\nL_over_T", "\n# summary: " + json.dumps(_jsonable(summary), sort_keys=True)
                        + "\nL_over_T", 1)
    return text, EXIT_OK


def _random_configs(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        L = float(rng.uniform(3.0, 10.0))
        if i % 2:
            N = int(2 * rng.integers(1, 4))
            wa = superosc_window(1.0, N, 2.0 * L, sigma=float(rng.uniform(0.2, 0.9)) / (6 * N))
        else:
            wa = gaussian_window(1.0)
        wb = gaussian_window(1.0)
        ga, gb = (float(v) for v in rng.uniform(0.0, 4.0, 2))
        out.append(detector_pair(L, wa, wb, ga, gb))
    return out


def oracle_rows(cfg):
    """Brute-force oracle comparisons on the configured (gap, L/T) grid."""
    o = cfg["oracle"]
    tol = _tol(cfg)
    rows = []
    w = gaussian_window(1.0)
    for gap in o["gaps"]:
        dA, _, _ = detector_pair(3.0, w, w, gap, gap)
        ref = brute_force_emission(dA)
        val = emission_norm2(dA, FieldModel.DIRAC_RIGHT, tol)
        rel = abs(float(val) - ref.value) / abs(ref.value)
        rows.append({"check": "emission", "gap": gap, "L_over_T": None, "value": float(val),
                     "oracle": ref.value, "rel_diff": rel, "pass": rel <= o["rtol"]})
        for L in o["separations"]:
            dA, dB, geom = detector_pair(L, w, w, gap, gap)
            ref = brute_force_exchange(dA, dB, geom)
            amps = compute_amplitudes(dA, dB, geom, FieldModel.DIRAC_RIGHT, paths="both",
                                      tol=tol, cross=False)
            rec = amps.paths.get("x_ab", {})
            vals = [amps.x_ab] + ([rec["double"]] if rec else [])
            rel = max(abs(v - ref.value) for v in vals) / abs(ref.value)
            rows.append({"check": "exchange", "gap": gap, "L_over_T": L, "value": amps.x_ab,
                         "oracle": ref.value, "rel_diff": rel,
                         "pass": rel <= o["rtol"] and bool(rec.get("agree", True))})
    return rows


def cmd_oracle_check(cfg, threads=1):
    rows = oracle_rows(cfg)
    o = cfg["oracle"]
    norm = normalization_report(_random_configs(o["normalization_configs"], o["seed"]), _tol(cfg))
    const_ok = (norm["kernel_symbolic_residual"] == "0" and norm["kernel_numeric_residual"] <= 1e-10
                and norm["cos_term"] == "omega**3/6" and norm["emission_term"] == "omega**5/30")
    rows.append({"check": "normalization_constants", "gap": None, "L_over_T": None,
                 "value": norm["kernel_numeric_residual"], "oracle": 0.0,
                 "rel_diff": norm["kernel_numeric_residual"], "pass": const_ok})
    rows.append({"check": "normalization_signs", "gap": None, "L_over_T": None,
                 "value": norm["max_ratio_rel_diff"], "oracle": 0.0,
                 "rel_diff": norm["max_ratio_rel_diff"],
                 "pass": norm["all_signs_agree"] and norm["all_consistent"]})
    lines = [f"{'check':<24} {'gap':>5} {'L/T':>5} {'rel_diff':>12}  result"]
    for r in rows:
        g = "" if r["gap"] is None else f"{r['gap']:g}"
        L = "" if r["L_over_T"] is None else f"{r['L_over_T']:g}"
        lines.append(f"{r['check']:<24} {g:>5} {L:>5} {r['rel_diff']:>12.3e}  "
                     f"{'PASS' if r['pass'] else 'FAIL'}")
    for e in norm["erratum"]:
        lines.append(f"erratum: {e}")
    ok = all(r["pass"] for r in rows)
    doc = _envelope(cfg, {"rows": rows, "normalization": norm, "all_pass": ok})
    return "\n".join(lines) + "\n", doc, EXIT_OK if ok else EXIT_ORACLE


HANDLERS = {
    "amplitudes": cmd_amplitudes, "condition": cmd_condition, "negativity": cmd_negativity,
    "sweep": cmd_sweep, "optimize": cmd_optimize, "ablate": cmd_ablate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vacuum-entanglement",
                                 description="Detector-pair vacuum entanglement calculations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="JSON run configuration")
    ap.add_argument("--threads", type=int, default=1, metavar="N",
                    help="worker threads for grid studies (outputs do not depend on it)")
    ap.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    ap.add_argument("--seed", type=int, metavar="N", help="override sweep.seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg["sweep"]["seed"] = args.seed
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "oracle-check":
            table, doc, code = cmd_oracle_check(cfg, args.threads)
            sys.stdout.write(table)
            text = doc if args.out else ""
        else:
            text, code = HANDLERS[args.command](cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    elif text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

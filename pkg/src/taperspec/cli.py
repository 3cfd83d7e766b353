"""Command-line interface: deterministic CSV/JSON emission for experiments.

Subcommands: periodogram | estimate | asymptotics | oracle | mc | report.
All floating-point output is rendered at 17 significant digits, so files
produced from identical inputs are byte-identical; the worker count
(TAPERSPEC_THREADS) never changes output bytes.  Manifest timestamps come
from SOURCE_DATE_EPOCH when set (the conventional reproducible-build
override), wall clock otherwise.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .tapers import e_of_h, get_taper
from .models import (INNOVATION_LAWS, SpectralModel, derive_seed,
                     gaussian_ar1, gaussian_ma1, gaussian_white,
                     linear_nongaussian, simulate)
from .periodogram import default_grid, fourier_grid, periodogram_grid, uniform_grid
from .functionals import estimate_batch, parse_weight
from .oracle import (double_factorial_odd, enumerate_pair_partitions,
                     exact_cov_J, exact_mean_J, indecomposable_pairings)
from .asymptotics import (ExponentCondition, check_exponents,
                          clt_covariance_matrix, limit_mean)
from .montecarlo import ExperimentConfig, ExperimentReport, run_suite

CSV_COLUMNS = ["T", "k", "phi_id", "sample_mean", "oracle_mean", "limit_mean",
               "T_scaled_cov", "limit_cov", "skew", "exkurt", "c3", "c4",
               "pass"]


# ---------------------------------------------------------------------------
# Deterministic serialization


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip doubles exactly."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """JSON with floats pinned at 17 significant digits.

    The stdlib encoder renders floats via repr (shortest round-trip),
    which is also deterministic but not digit-pinned; this emitter walks
    the structure itself so the format contract is explicit.
    """
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(pad + "  " + dump_json(v, indent + 2) for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {dump_json(v, indent + 2)}"
            for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path: str, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(row.get(c)) for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.isoformat()


# ---------------------------------------------------------------------------
# Config parsing

_MODEL_KEYS = {"family", "sigma2", "rho", "theta", "psi", "innovations"}
_CONFIG_KEYS = {"suite", "model", "taper", "phis", "ks", "T_sweep", "R",
                "base_seed", "grid_N", "normality_thresholds", "corr_tol",
                "center"}
_FAMILY_ALIASES = {
    "white": "gaussian_white", "ar1": "gaussian_ar1", "ma1": "gaussian_ma1",
    "linear": "linear_nongaussian",
}


def _build_model(spec: dict) -> SpectralModel:
    unknown = set(spec) - _MODEL_KEYS
    if unknown:
        raise ValueError(f"unknown model key {sorted(unknown)[0]!r}")
    family = spec.get("family", "gaussian_white")
    family = _FAMILY_ALIASES.get(family, family)
    sigma2 = float(spec.get("sigma2", 1.0))
    if family == "gaussian_white":
        return gaussian_white(sigma2)
    if family == "gaussian_ar1":
        return gaussian_ar1(float(spec.get("rho", 0.5)), sigma2)
    if family == "gaussian_ma1":
        return gaussian_ma1(float(spec.get("theta", 0.5)), sigma2)
    if family == "linear_nongaussian":
        name = spec.get("innovations") or "gaussian"
        if name not in INNOVATION_LAWS:
            raise ValueError(f"unknown innovations {name!r}; "
                             f"choose from {sorted(INNOVATION_LAWS)}")
        law = INNOVATION_LAWS[name](scale=math.sqrt(sigma2))
        return linear_nongaussian(law, tuple(spec.get("psi", [1.0])))
    raise ValueError(f"unknown model family {family!r}")


def parse_config_dict(raw: dict) -> ExperimentConfig:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config key {sorted(unknown)[0]!r}")
    model = _build_model(raw.get("model", {}))
    taper = get_taper(raw.get("taper", "rectangular"))
    phis = tuple(parse_weight(s) for s in raw.get("phis", ["one"]))
    ks = tuple(int(k) for k in raw.get("ks", [1]))
    T_sweep = tuple(int(T) for T in raw.get("T_sweep", [64]))
    thresholds = tuple(raw.get("normality_thresholds", (0.15, 0.3)))
    if len(thresholds) != 2:
        raise ValueError("normality_thresholds must be [skew_max, exkurt_max]")
    grid_N = raw.get("grid_N")
    suite = raw.get("suite", "convergence")
    suite = {"f4_discrimination": "f4"}.get(suite, suite)
    return ExperimentConfig(
        model=model, taper=taper, phis=phis, ks=ks, T_sweep=T_sweep,
        R=int(raw.get("R", 1000)),
        base_seed=int(raw.get("base_seed", 0)),
        grid_N=None if grid_N is None else int(grid_N),
        normality_thresholds=(float(thresholds[0]), float(thresholds[1])),
        corr_tol=float(raw.get("corr_tol", 0.1)),
        center=raw.get("center", "oracle"),
        suite=suite,
    )


def parse_config(path: str) -> ExperimentConfig:
    """Load and validate an experiment config; errors name the bad field."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    return parse_config_dict(raw)


# ---------------------------------------------------------------------------
# Report emission


@dataclass
class RunManifest:
    """What a run produced: config echo, outputs, and pass/fail flags."""

    tool_version: str
    base_seed: object
    configs: list
    timestamps: dict
    outputs: list
    pass_flags: dict

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "base_seed": self.base_seed,
            "configs": self.configs,
            "timestamps": self.timestamps,
            "outputs": self.outputs,
            "pass_flags": self.pass_flags,
        }


def report(reports, out_dir: str) -> RunManifest:
    """Write convergence CSV, summary JSON, raw reports, and the manifest.

    Byte-identical across reruns with the same inputs (timestamps aside,
    which honor SOURCE_DATE_EPOCH for fully reproducible bytes).
    """
    if not reports:
        raise ValueError("report list is empty")
    started = _timestamp()
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "report.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    raw_path = os.path.join(out_dir, "report_raw.json")
    manifest_path = os.path.join(out_dir, "manifest.json")

    all_rows = []
    for rep in reports:
        all_rows.extend(rep.rows)
    try:
        write_csv(csv_path, CSV_COLUMNS, all_rows)
        raw = [{"suite": rep.suite, "config": rep.config, "rows": rep.rows,
                "pass_flags": rep.pass_flags, "warnings": rep.warnings,
                "diagnostics": rep.diagnostics} for rep in reports]
        with open(raw_path, "w") as fh:
            fh.write(dump_json(raw) + "\n")
        flags = {}
        for idx, rep in enumerate(reports):
            for name, ok in rep.pass_flags.items():
                flags[f"{rep.suite}[{idx}].{name}"] = bool(ok)
        summary = {
            "tool_version": __version__,
            "suites": [
                {"suite": rep.suite, "pass_flags": rep.pass_flags,
                 "warnings": rep.warnings, "diagnostics": rep.diagnostics}
                for rep in reports
            ],
            "all_passed": all(flags.values()),
        }
        with open(summary_path, "w") as fh:
            fh.write(dump_json(summary) + "\n")
        seeds = {rep.config.get("base_seed") for rep in reports}
        manifest = RunManifest(
            tool_version=__version__,
            base_seed=sorted(seeds)[0] if len(seeds) == 1 else sorted(seeds),
            configs=[rep.config for rep in reports],
            timestamps={"started": started, "finished": _timestamp()},
            # basenames, not paths: manifests from runs that differ only in
            # --out-dir must be byte-identical
            outputs=[os.path.basename(p) for p in
                     (csv_path, summary_path, raw_path, manifest_path)],
            pass_flags=flags,
        )
        with open(manifest_path, "w") as fh:
            fh.write(dump_json(manifest.to_dict()) + "\n")
    except OSError as exc:
        raise RuntimeError(f"failed writing report to {out_dir}: {exc}") from exc
    return manifest


# ---------------------------------------------------------------------------
# Subcommands


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--model", default="white",
                   choices=["white", "ar1", "ma1", "linear"])
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--innovations", default="gaussian",
                   choices=sorted(INNOVATION_LAWS))


def _model_from_args(args) -> SpectralModel:
    return _build_model({
        "family": args.model, "sigma2": args.sigma2, "rho": args.rho,
        "theta": args.theta, "innovations": args.innovations,
    })


def _grid_from_args(args, T: int):
    if getattr(args, "fourier", False):
        return fourier_grid(T)
    if args.grid_n is not None:
        return uniform_grid(args.grid_n)
    return default_grid(T)


def _emit(args, name: str, text: str):
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        print(path)
    else:
        sys.stdout.write(text)


def _cmd_periodogram(args) -> int:
    model = _model_from_args(args)
    path = simulate(model, args.T, args.seed)
    grid = _grid_from_args(args, args.T)
    pg = periodogram_grid(path, get_taper(args.taper), grid)
    lines = ["lambda,re_d,im_d,I"]
    for lam, d, I in zip(grid.points, pg.d, pg.I):
        lines.append(",".join(format_float(v)
                              for v in (lam, d.real, d.imag, I)))
    _emit(args, "periodogram.csv", "\n".join(lines) + "\n")
    return 0


def _cmd_estimate(args) -> int:
    model = _model_from_args(args)
    taper = get_taper(args.taper)
    phis = [parse_weight(s) for s in args.phi]
    ks = [int(k) for k in args.k]
    if len(phis) == 1 and len(ks) > 1:
        phis = phis * len(ks)
    if len(ks) == 1 and len(phis) > 1:
        ks = ks * len(phis)
    grid = _grid_from_args(args, args.T)
    lines = ["replicate,k,phi,value"]
    for r in range(args.replicates):
        path = simulate(model, args.T, derive_seed(args.seed, r))
        for est, phi in zip(estimate_batch(path, taper, phis, ks, grid), phis):
            lines.append(f"{r},{est.k},{phi.label},{format_float(est.value.real)}")
    _emit(args, "estimate.csv", "\n".join(lines) + "\n")
    return 0


def _cmd_asymptotics(args) -> int:
    model = _model_from_args(args)
    taper = get_taper(args.taper)
    phis = [parse_weight(s) for s in args.phi]
    ks = [int(k) for k in args.k]
    if len(phis) == 1 and len(ks) > 1:
        phis = phis * len(ks)
    W = clt_covariance_matrix(model, phis, ks, taper)
    p = math.inf if args.p == "inf" else float(args.p)
    q = math.inf if args.q == "inf" else float(args.q)
    checks = []
    for k in ks:
        for which in ("thm2_mean", "thm4_clt"):
            ok, diag = check_exponents(
                ExponentCondition(which=which, p=p, q=q, k=int(k)))
            checks.append({"which": which, "k": int(k), "p": args.p,
                           "q": args.q, "satisfied": ok, "diagnostic": diag})
    ok, diag = check_exponents(
        ExponentCondition(which="thm6_clt", p=p, q=q, k_list=tuple(ks)))
    checks.append({"which": "thm6_clt", "k_list": [int(k) for k in ks],
                   "p": args.p, "q": args.q, "satisfied": ok,
                   "diagnostic": diag})
    out = {
        "mean_limit": [limit_mean(model, phi, int(k)).value
                       for phi, k in zip(phis, ks)],
        "cov_matrix_re": [[float(W[i, j].real) for j in range(len(ks))]
                          for i in range(len(ks))],
        "cov_matrix_im": [[float(W[i, j].imag) for j in range(len(ks))]
                          for i in range(len(ks))],
        "e_h": e_of_h(taper),
        "exponent_checks": checks,
    }
    _emit(args, "asymptotics.json", dump_json(out) + "\n")
    return 0


def _cmd_oracle(args) -> int:
    model = _model_from_args(args)
    taper = get_taper(args.taper)
    phis = [parse_weight(s) for s in args.phi]
    phi1 = phis[0]
    phi2 = phis[1] if len(phis) > 1 else phis[0]
    grid = _grid_from_args(args, args.T)
    k, l = int(args.k), int(args.l)
    cov = exact_cov_J(model, taper, args.T, phi1, k, phi2, l, grid)
    out = {
        "exact_mean": {
            "k": exact_mean_J(model, taper, args.T, phi1, k, grid),
            "l": exact_mean_J(model, taper, args.T, phi2, l, grid),
        },
        "exact_cov_re": cov.real,
        "exact_cov_im": cov.imag,
        "pairing_counts": {
            "pair_partitions_2k": len(enumerate_pair_partitions(k)),
            "pair_partitions_2l": len(enumerate_pair_partitions(l)),
            "double_factorial_2k": double_factorial_odd(k),
            "indecomposable_table": len(indecomposable_pairings(k, l)),
        },
    }
    _emit(args, "oracle.json", dump_json(out) + "\n")
    return 0


def _cmd_mc(args) -> int:
    if not args.config:
        raise ValueError("mc requires --config pointing to a JSON experiment file")
    config = parse_config(args.config)
    if args.seed is not None and args.seed != 0:
        config = ExperimentConfig(
            **{**config.__dict__, "base_seed": int(args.seed)})
    rep = run_suite(config)
    manifest = report([rep], args.out_dir or ".")
    for name, ok in manifest.pass_flags.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return 0 if all(manifest.pass_flags.values()) else 1


def _cmd_report(args) -> int:
    reports = []
    for path in args.raw:
        with open(path) as fh:
            data = json.load(fh)
        for entry in data:
            reports.append(ExperimentReport(
                suite=entry["suite"], config=entry["config"],
                rows=entry["rows"], pass_flags=entry["pass_flags"],
                warnings=entry.get("warnings", []),
                diagnostics=entry.get("diagnostics", {})))
    manifest = report(reports, args.out_dir or ".")
    for name, ok in manifest.pass_flags.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return 0 if all(manifest.pass_flags.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="base seed (replicate seeds derive from it)")
    common.add_argument("--out-dir", default=None,
                        help="directory for output files (stdout when omitted)")
    common.add_argument("--config", default=None,
                        help="JSON experiment config (mc subcommand)")

    parser = argparse.ArgumentParser(
        prog="taperspec",
        description="Integral functionals of powers of the tapered periodogram")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("periodogram", parents=[common],
                       help="tapered periodogram on a grid (CSV)")
    _add_model_flags(p)
    p.add_argument("--taper", default="rectangular",
                   choices=["rectangular", "cosine", "bartlett"])
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--fourier", action="store_true",
                   help="use the 2T+1 Fourier frequencies (FFT path)")
    p.set_defaults(func=_cmd_periodogram)

    p = sub.add_parser("estimate", parents=[common],
                       help="J_{k,T}(phi) over simulated replicates (CSV)")
    _add_model_flags(p)
    p.add_argument("--taper", default="rectangular",
                   choices=["rectangular", "cosine", "bartlett"])
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--k", nargs="+", default=["1"])
    p.add_argument("--phi", nargs="+", default=["one"],
                   help="one | cos:j | band:a,b")
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--fourier", action="store_true")
    p.add_argument("--replicates", type=int, default=1)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("asymptotics", parents=[common],
                       help="limit means/covariances and exponent checks (JSON)")
    _add_model_flags(p)
    p.add_argument("--taper", default="rectangular",
                   choices=["rectangular", "cosine", "bartlett"])
    p.add_argument("--k", nargs="+", default=["1"])
    p.add_argument("--phi", nargs="+", default=["one"])
    p.add_argument("--p", default="inf", help="weight integrability exponent p")
    p.add_argument("--q", default="2", help="weight integrability exponent q")
    p.set_defaults(func=_cmd_asymptotics)

    p = sub.add_parser("oracle", parents=[common],
                       help="exact finite-T mean/covariance (JSON)")
    _add_model_flags(p)
    p.add_argument("--taper", default="rectangular",
                   choices=["rectangular", "cosine", "bartlett"])
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--phi", nargs="+", default=["one"])
    p.add_argument("--grid-n", type=int, default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("mc", parents=[common],
                       help="run an experiment suite from a JSON config")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("report", parents=[common],
                       help="re-emit CSV/summary/manifest from raw reports")
    p.add_argument("raw", nargs="+", help="report_raw.json files")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 failed check (selftest, or any check recorded in
an experiment report), 2 usage or configuration error, 3 statistically
insufficient data (partial outputs are kept).

CSV schemas
-----------
spectral : quantity, abscissa, value, aux
experiment : series, abscissa, statistic, ci_lo, ci_hi, n_samples, seed, config_hash, version
"""

import argparse
import csv
from dataclasses import dataclass, field, asdict
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import ConfigError, HermRandError, InsufficientSamplesError
from .grids import gauss_hermite_grid
from .lab.config import ExperimentConfig, config_hash
from .lab import experiments as ex
from .selftest import FAULTS, run_selftest
from .spectral import (
    enumerate_window,
    heat_kernel_diag_closed,
    heat_kernel_diag_series,
    level_window,
    spectral_function,
    spectral_increment_norm,
    weyl_count,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INSUFFICIENT = 0, 1, 2, 3
SUBCOMMANDS = ("tail", "median", "linfty", "lr", "basis", "besov", "concentration")
# experiments accepted by each subcommand's config
FAMILIES = {
    "tail": ("tail",),
    "median": ("median",),
    "linfty": ("linfty",),
    "lr": ("lr",),
    "basis": ("basis",),
    "besov": ("besov",),
    "concentration": ("concentration", "lipschitz", "gap", "pz"),
}
SPECTRAL_COLUMNS = ("quantity", "abscissa", "value", "aux")
MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """One run: enough to reproduce its outputs."""

    name: str
    command: list
    config: dict
    config_hash: str
    seed: int
    version: str = __version__
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def update_manifest(out_dir, entry):
    path = os.path.join(out_dir, MANIFEST_NAME)
    data = {"version": __version__, "entries": []}
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    data["entries"] = [e for e in data.get("entries", []) if e["name"] != entry.name]
    data["entries"].append(asdict(entry))
    data["entries"].sort(key=lambda e: e["name"])
    _write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None, help="override the configured seed")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    common.add_argument("--out", default="hermrand-out", help="output directory")

    parser = argparse.ArgumentParser(prog="hermrand", description="Random Hermite expansions: experiments and checks")
    parser.add_argument("--version", action="version", version=f"hermrand {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectral", parents=[common], help="spectral function, Weyl counts, Mehler residuals")
    sp.add_argument("--dim", type=_positive_int, required=True)
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--a", type=float, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--grid-res", type=_positive_int, default=100, help="points per radius")
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--p", type=float, nargs="+", default=[1.0, 2.0])
    sp.add_argument("--mehler", action="store_true", help="report Mehler-identity residuals")
    sp.add_argument("--t", type=float, nargs="+", default=[0.1, 0.5, 1.0, 2.0])

    ep = sub.add_parser("experiment", parents=[common], help="run a Monte-Carlo experiment from a JSON config")
    ep.add_argument("kind", choices=SUBCOMMANDS)
    ep.add_argument("--config", required=True)

    st = sub.add_parser("selftest", parents=[common], help="fast invariant suite")
    st.add_argument("--inject-fault", choices=FAULTS, default=None, help=argparse.SUPPRESS)

    rr = sub.add_parser("rerun", help="rerun every entry of a manifest")
    rr.add_argument("manifest")
    rr.add_argument("--jobs", type=_positive_int, default=1)
    rr.add_argument("--out", default=None)
    return parser


# --- spectral ---------------------------------------------------------------

def _window_from_args(args):
    if args.level is not None:
        return level_window(args.dim, args.level)
    if None in (args.h, args.a, args.b):
        return None
    return enumerate_window(args.dim, args.h, args.a, args.b, args.delta)


def _mehler_rows(d, ts):
    rows = []
    for t in ts:
        lam_max = 14 * math.log(10) / t + d + 2
        worst = 0.0
        for r in np.linspace(0.0, 4.0, 5):
            x = np.zeros(d)
            x[0] = r
            closed = heat_kernel_diag_closed(d, t, x)
            worst = max(worst, abs(heat_kernel_diag_series(d, t, x, lam_max) - closed) / closed)
        rows.append(("mehler_residual", t, worst, lam_max))
    return rows


def cmd_spectral(args):
    window = _window_from_args(args)
    if window is None and not args.mehler:
        print("spectral: give --level K or --h/--a/--b (or --mehler)", file=sys.stderr)
        return EXIT_USAGE
    rows = []
    summary = {"dim": args.dim, "version": __version__}
    if window is not None:
        d = window.d
        radii = np.linspace(0.0, 1.5 * math.sqrt(window.lambda_max), args.grid_res)
        angles = np.linspace(0.0, math.pi / 2, 4) if d >= 2 else np.zeros(1)
        profiles = []
        for a in angles:
            pts = np.zeros((radii.size, d))
            pts[:, 0] = radii * math.cos(a)
            if d >= 2:
                pts[:, 1] = radii * math.sin(a)
            profiles.append(spectral_function(window, pts))
        profiles = np.array(profiles)
        mean = profiles.mean(axis=0)
        scale = max(float(mean.max()), 1e-300)
        resid = np.max(np.abs(profiles - mean), axis=0) / scale
        for r, v, e in zip(radii, mean, resid):
            rows.append(("e_x", r, v, e))
        for lam in np.linspace(d, window.lambda_max + 2, 12):
            rows.append(("weyl_count", lam, weyl_count(d, lam), lam**d / (2**d * math.factorial(d))))
        deg = window.max_degree
        for p in args.p:
            extra = abs(args.theta) * (p - 1)
            order = int(math.ceil((2 * p * deg + extra + 1) / 2.0)) + 8
            grid = gauss_hermite_grid(d, order, scale=p, design_degree=deg)
            rows.append(("increment_norm", p, spectral_increment_norm(window, p, args.theta, grid), args.theta))
        summary.update({"window": window.to_dict(), "rotation_residual": float(resid.max())})
    if args.mehler:
        mrows = _mehler_rows(args.dim, args.t)
        rows.extend(mrows)
        summary["mehler_max_residual"] = max(r[2] for r in mrows)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "spectral.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(SPECTRAL_COLUMNS)
        for q, a, v, aux in rows:
            writer.writerow([q, repr(float(a)), repr(float(v)), repr(float(aux))])
    _write_text(os.path.join(args.out, "spectral.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


# --- experiments ------------------------------------------------------------

def load_config(path, kind):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data.setdefault("experiment", FAMILIES[kind][0])
    if data["experiment"] not in FAMILIES[kind]:
        raise ConfigError(f"config experiment {data['experiment']!r} does not match subcommand {kind!r}")
    return ExperimentConfig.from_dict(data)


def _reports_for(kind, cfg, jobs):
    if kind == "concentration" and cfg.experiment == "concentration":
        gap_cfg = cfg.replace(experiment="gap", N_grid=cfg.params.get("gap_N_grid", [1, 4, 16, 64, 256]))
        return [("concentration", ex.run_experiment(cfg, jobs)), ("gap", ex.run_experiment(gap_cfg, jobs))]
    return [(cfg.experiment, ex.run_experiment(cfg, jobs))]


def _write_report(out_dir, name, report):
    paths = {"json": os.path.join(out_dir, f"{name}.json"), "csv": os.path.join(out_dir, f"{name}.csv")}
    _write_text(paths["json"], report.to_json() + "\n")
    _write_text(paths["csv"], report.to_csv())
    return paths


def run_config(kind, cfg, out_dir, jobs, command):
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        reports = _reports_for(kind, cfg, jobs)
    except InsufficientSamplesError as exc:
        print(f"insufficient samples: {exc}", file=sys.stderr)
        if exc.report is None:
            return EXIT_INSUFFICIENT
        reports = [(cfg.experiment, exc.report)]
        code = EXIT_INSUFFICIENT
    outputs, timings = {}, {}
    for name, report in reports:
        paths = _write_report(out_dir, name, report)
        outputs[name] = paths
        timings[name] = report.runtime
        print(f"{name}: R^2={report.r_squared:.4f} constants={json.dumps(report.constants, sort_keys=True)} "
              f"checks={json.dumps(report.checks, sort_keys=True)}")
        if code == EXIT_OK and not all(report.checks.values()):
            code = EXIT_CHECK
    timings["total"] = time.perf_counter() - t0
    entry = RunManifest(kind, command, cfg.to_dict(), config_hash(cfg.to_dict()), cfg.seed,
                        outputs=outputs, timings=timings)
    update_manifest(out_dir, entry)
    return code


def cmd_experiment(args):
    cfg = load_config(args.config, args.kind)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return run_config(args.kind, cfg, args.out, args.jobs, ["experiment", args.kind])


def cmd_rerun(args):
    with open(args.manifest, encoding="utf-8") as fh:
        data = json.load(fh)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.manifest))
    code = EXIT_OK
    for entry in data.get("entries", []):
        cfg = ExperimentConfig.from_dict(entry["config"])
        code = max(code, run_config(entry["name"], cfg, out_dir, args.jobs, entry["command"]))
    return code


def cmd_selftest(args):
    results = run_selftest(args.inject_fault)
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if failed:
        print(f"failing checks: {', '.join(failed)}")
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"spectral": cmd_spectral, "experiment": cmd_experiment, "selftest": cmd_selftest, "rerun": cmd_rerun}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HermRandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

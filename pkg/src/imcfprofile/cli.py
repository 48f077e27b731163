"""Command-line front end: ``imcf-profile solve | sweep | verify``.

Outputs are post-hoc artifacts: a profile table (CSV or JSON), a run
manifest (JSON), optional static SVG line charts, and for sweeps a summary
table over the parameter grid.  Exit codes are a stable scripting contract:

    0   success, all requested checks passed
    1   usage or domain error (bad flags, invalid parameters, bad files)
    2   structural invariant breakdown during a certified-mode run

CSV files use the fixed header ``r,f,fr,frr,w,q`` with '.' radix and plain
newlines; the q column is left empty wherever f <= 0.  JSON files carry a
``schema`` tag and validate against the schema files shipped in
``imcfprofile/schemas/``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import alpha0, estimate_limit
from .continuation import detect_breakdown, solve_profile
from .errors import DomainError, ImcfError, InsufficientRange
from .profile_core import Parameters, RadialProfile, SolverConfig, validate
from .verify import run_report

_SCHEMA_DIR = Path(__file__).parent / "schemas"

PROFILE_SCHEMA_ID = "imcf-profile/profile-v1"
MANIFEST_SCHEMA_ID = "imcf-profile/manifest-v1"
REPORT_SCHEMA_ID = "imcf-profile/verification-v1"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# flag plumbing
# ---------------------------------------------------------------------------


def _read_config_file(path: str) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {raw!r} is not key=value")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="dimension (integer >= 2)")
    p.add_argument("--lambda", dest="lam", type=float, help="speed parameter (> 0)")
    p.add_argument("--mu", type=float, help="height at the axis (< 0)")
    p.add_argument("--r-max", type=float, default=None, help="outer radius (default 1e4)")
    p.add_argument("--tol", type=float, default=None, help="absolute tolerance (default 1e-12)")
    p.add_argument("--out", type=str, default=None, help="output stem (default imcf_run)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="profile table format")
    p.add_argument("--plot", action="store_true", help="emit static SVG charts")
    p.add_argument("--mode", choices=("certified", "exploratory"), default=None)
    p.add_argument("--config", type=str, default=None, help="key=value config file")


def _merge_settings(args: argparse.Namespace) -> dict:
    """Precedence: flags > config file > defaults."""
    settings = {
        "r_max": 1e4,
        "tol": 1e-12,
        "out": "imcf_run",
        "format": "csv",
        "mode": "certified",
    }
    if getattr(args, "config", None):
        cfgfile = _read_config_file(args.config)
        for key in ("n", "mu"):
            if key in cfgfile:
                settings[key] = float(cfgfile[key]) if key == "mu" else int(cfgfile[key])
        if "lambda" in cfgfile:
            settings["lam"] = float(cfgfile["lambda"])
        for key in ("r_max", "tol"):
            if key in cfgfile:
                settings[key] = float(cfgfile[key])
        for key in ("out", "format", "mode"):
            if key in cfgfile:
                settings[key] = cfgfile[key]
    for key in ("n", "lam", "mu", "r_max", "tol", "out", "format", "mode"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    return settings


def _params_from(settings: dict) -> Parameters:
    missing = [k for k in ("n", "lam", "mu") if k not in settings]
    if missing:
        raise DomainError(f"missing required parameter(s): {', '.join(missing)}")
    return validate(Parameters(int(settings["n"]), float(settings["lam"]), float(settings["mu"])))


def _config_from(settings: dict, extra_radii=(0.5, 1.0)) -> SolverConfig:
    tol = float(settings["tol"])
    return SolverConfig(
        abs_tol=tol,
        rel_tol=max(tol * 100.0, 1e-14),
        r_max=float(settings["r_max"]),
        extra_radii=tuple(p for p in extra_radii if p < float(settings["r_max"])),
    )


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _csv_rows(profile: RadialProfile):
    w = profile.w
    for i in range(len(profile)):
        f = float(profile.f[i])
        q = "" if f <= 0.0 else repr(float(profile.r[i]) * float(profile.fr[i]) / f)
        yield (
            f"{float(profile.r[i])!r},{f!r},{float(profile.fr[i])!r},"
            f"{float(profile.frr[i])!r},{float(w[i])!r},{q}"
        )


def write_profile_csv(profile: RadialProfile, path: Path):
    lines = ["r,f,fr,frr,w,q"]
    lines.extend(_csv_rows(profile))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def profile_to_json_dict(profile: RadialProfile) -> dict:
    w = profile.w
    q = [
        None if f <= 0.0 else float(r * fr / f)
        for r, f, fr in zip(profile.r, profile.f, profile.fr)
    ]
    return {
        "schema": PROFILE_SCHEMA_ID,
        "params": {"n": profile.params.n, "lambda": profile.params.lam, "mu": profile.params.mu},
        "r": [float(v) for v in profile.r],
        "f": [float(v) for v in profile.f],
        "fr": [float(v) for v in profile.fr],
        "frr": [float(v) for v in profile.frr],
        "w": [float(v) for v in w],
        "q": q,
        "provenance": list(profile.provenance),
        "tol_scale": profile.tol_scale,
    }


def load_profile_json(path: Path) -> RadialProfile:
    """Read a profile table written by ``solve --format json``.

    Raises :class:`DomainError` naming the offending key on any schema
    violation.
    """
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise DomainError(f"cannot parse profile file {path}: {err}") from err
    if not isinstance(data, dict) or data.get("schema") != PROFILE_SCHEMA_ID:
        raise DomainError(
            f"schema error: expected tag {PROFILE_SCHEMA_ID!r},"
            f" got {data.get('schema')!r}" if isinstance(data, dict)
            else "schema error: top level must be an object"
        )
    pblock = data.get("params")
    if not isinstance(pblock, dict) or not {"n", "lambda", "mu"} <= set(pblock):
        raise DomainError("schema error: key 'params' must hold n, lambda, mu")
    for key in ("r", "f", "fr", "frr"):
        col = data.get(key)
        if not isinstance(col, list) or not all(isinstance(v, (int, float)) for v in col):
            raise DomainError(f"schema error: key {key!r} must be a numeric array")
    params = validate(Parameters(int(pblock["n"]), float(pblock["lambda"]), float(pblock["mu"])))
    try:
        return RadialProfile(
            params=params,
            r=np.array(data["r"], dtype=float),
            f=np.array(data["f"], dtype=float),
            fr=np.array(data["fr"], dtype=float),
            frr=np.array(data["frr"], dtype=float),
            provenance=tuple(data.get("provenance", ["integrator"] * len(data["r"]))),
            tol_scale=float(data.get("tol_scale", 1e-12)),
        )
    except DomainError as err:
        raise DomainError(f"schema error: inconsistent profile data: {err}") from err


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", newline="\n")


def _plot_svgs(profile: RadialProfile, stem: Path, a0: float | None) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "imcf-profile"
    written = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(profile.r, profile.f, lw=1.2)
    ax.set_xlabel("r")
    ax.set_ylabel("f(r)")
    ax.set_title("profile height")
    if profile.r_max / max(profile.r[1], 1e-12) > 100:
        ax.set_xscale("log")
        ax.set_yscale("symlog")
    p_f = stem.with_suffix(".f.svg")
    fig.savefig(p_f, format="svg", metadata={"Date": None})
    plt.close(fig)
    written.append(str(p_f))

    mask = profile.f > 0
    if mask.sum() >= 2:
        fig, ax = plt.subplots(figsize=(6, 4))
        rs = profile.r[mask]
        qs = rs * profile.fr[mask] / profile.f[mask]
        ax.plot(rs, qs, lw=1.2, label="q = r f_r / f")
        if a0 is not None:
            ax.axhline(a0, color="k", ls="--", lw=0.8, label="limit")
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel("q")
        ax.set_title("slope ratio")
        ax.legend()
        p_q = stem.with_suffix(".q.svg")
        fig.savefig(p_q, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(str(p_q))
    return written


def _manifest(command: str, settings: dict, outputs: list[str], summary: dict) -> dict:
    return {
        "schema": MANIFEST_SCHEMA_ID,
        "command": command,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "solver_version": __version__,
        "params": {
            "n": settings.get("n"),
            "lambda": settings.get("lam"),
            "mu": settings.get("mu"),
        },
        "config": {
            "r_max": settings["r_max"],
            "tol": settings["tol"],
            "mode": settings["mode"],
            "format": settings["format"],
        },
        "outputs": outputs,
        "summary": summary,
    }


def _solve_summary(profile, events, params, r_max) -> dict:
    summary: dict = {
        "r_max": profile.r_max,
        "nodes": len(profile),
        "fr_max_observed": float(np.max(profile.fr)),
        "events": [
            {"kind": e.kind, "r": e.r, "values": e.values} for e in events
        ],
    }
    try:
        summary["alpha0"] = alpha0(params)
    except DomainError:
        summary["alpha0"] = None
    try:
        rep = estimate_limit(profile)
        summary["q_limit_estimate"] = rep.q_limit_estimate
        summary["extrapolation_uncertainty"] = rep.extrapolation_uncertainty
    except (InsufficientRange, DomainError):
        summary["q_limit_estimate"] = None
        summary["extrapolation_uncertainty"] = None
    try:
        probes = tuple(p for p in (0.5, 1.0) if p <= profile.r_max) or (0.5 * profile.r_max,)
        rep = run_report(profile, probe_radii=probes)
        summary["defects"] = {
            "ode_residual_max": rep.ode_residual_max,
            "integral_identity_defect_max": rep.integral_identity_defect_max,
            "integrating_factor_defect_max": rep.integrating_factor_defect_max,
            "pde_residual_max": rep.pde_residual_max,
        }
    except ImcfError:
        summary["defects"] = None
    return summary


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    params = _params_from(settings)
    if settings["mode"] == "certified" and not params.global_regime:
        print(
            f"error: certified mode requires lambda > 1/(n-1) = {1.0/(params.n-1):g};"
            f" got lambda = {params.lam:g} (use --mode exploratory)",
            file=sys.stderr,
        )
        return 1
    config = _config_from(settings)
    profile, events, info = solve_profile(params, config, mode=settings["mode"])
    seen = {(e.kind, round(e.r, 12)) for e in events}
    events = events + [
        e for e in detect_breakdown(params, profile)
        if (e.kind, round(e.r, 12)) not in seen
    ]

    stem = Path(settings["out"])
    stem.parent.mkdir(parents=True, exist_ok=True)
    outputs = []
    if settings["format"] == "csv":
        table = stem.with_suffix(".csv")
        write_profile_csv(profile, table)
    else:
        table = stem.with_suffix(".json")
        _write_json(table, profile_to_json_dict(profile))
    outputs.append(str(table))

    summary = _solve_summary(profile, events, params, settings["r_max"])
    if args.plot:
        outputs.extend(_plot_svgs(profile, stem, summary.get("alpha0")))
    manifest_path = stem.with_suffix(".manifest.json")
    _write_json(manifest_path, _manifest("solve", settings, outputs, summary))

    if events and settings["mode"] == "certified":
        print(f"invariant breakdown: {events[0].kind} at r = {events[0].r:g}", file=sys.stderr)
        return 2
    print(f"wrote {table} ({len(profile)} nodes, {len(events)} events)")
    return 0


def _float_list(text: str) -> list[float]:
    vals = [v for v in text.replace(",", " ").split() if v]
    return [float(v) for v in vals]


def _sweep_row(task) -> dict:
    n, lam, mu, settings = task
    row = {"n": n, "lambda": lam, "mu": mu}
    try:
        params = validate(Parameters(n, lam, mu))
        mode = settings["mode"]
        if mode == "certified" and not params.global_regime:
            row.update(status="skipped_not_certified", passed=False)
            return row
        config = _config_from(settings)
        profile, events, info = solve_profile(params, config, mode=mode)
        events = events + detect_breakdown(params, profile)
        try:
            a0 = alpha0(params)
        except DomainError:
            a0 = math.nan
        try:
            rep = estimate_limit(profile)
            qlim, unc = rep.q_limit_estimate, rep.extrapolation_uncertainty
            qpass = rep.passed
        except (InsufficientRange, DomainError):
            qlim, unc, qpass = math.nan, math.nan, False
        vrep = run_report(
            profile,
            probe_radii=tuple(p for p in (0.5, 1.0) if p <= profile.r_max)
            or (0.5 * profile.r_max,),
        )
        row.update(
            status="ok",
            alpha0=a0,
            q_limit_estimate=qlim,
            q_limit_error=abs(qlim - a0) if math.isfinite(a0) else math.nan,
            extrapolation_uncertainty=unc,
            ode_residual_max=vrep.ode_residual_max,
            integral_identity_defect_max=vrep.integral_identity_defect_max,
            integrating_factor_defect_max=vrep.integrating_factor_defect_max,
            events=len(events),
            passed=bool(qpass and vrep.passed and not events),
        )
    except ImcfError as err:
        row.update(status=f"error: {err}", passed=False)
    return row


_SWEEP_COLUMNS = (
    "n", "lambda", "mu", "status", "alpha0", "q_limit_estimate", "q_limit_error",
    "extrapolation_uncertainty", "ode_residual_max", "integral_identity_defect_max",
    "integrating_factor_defect_max", "events", "passed",
)


def cmd_sweep(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    ns = [int(v) for v in _float_list(args.n_list)] if args.n_list else []
    lams = _float_list(args.lambda_list) if args.lambda_list else []
    mus = _float_list(args.mu_list) if args.mu_list else []
    grid = [(n, lam, mu) for n in ns for lam in lams for mu in mus]
    if not grid:
        print("error: empty parameter grid", file=sys.stderr)
        return 1
    grid.sort()
    tasks = [(n, lam, mu, settings) for n, lam, mu in grid]

    workers = int(os.environ.get("IMCF_PROFILE_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_sweep_row, tasks))

    stem = Path(settings["out"])
    stem.parent.mkdir(parents=True, exist_ok=True)
    table = stem.with_suffix(".sweep.csv")
    lines = [",".join(_SWEEP_COLUMNS)]
    for row in rows:
        cells = []
        for col in _SWEEP_COLUMNS:
            val = row.get(col, "")
            if isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = repr(val)
            cells.append(str(val))
        lines.append(",".join(cells))
    table.write_text("\n".join(lines) + "\n", newline="\n")

    summary = {
        "rows": len(rows),
        "passed": sum(1 for r in rows if r.get("passed")),
        "failed": [
            {"n": r["n"], "lambda": r["lambda"], "mu": r["mu"], "status": r["status"]}
            for r in rows
            if not r.get("passed")
        ],
    }
    _write_json(stem.with_suffix(".manifest.json"), _manifest("sweep", settings, [str(table)], summary))
    certified_rows = [r for r in rows if r.get("status") != "skipped_not_certified"]
    ok = all(r.get("passed") for r in certified_rows) and certified_rows
    print(f"sweep: {summary['passed']}/{len(rows)} rows passed -> {table}")
    return 0 if ok else 2


def cmd_verify(args: argparse.Namespace) -> int:
    settings = _merge_settings(args)
    probes = tuple(_float_list(args.probe_radii)) if args.probe_radii else (0.5, 1.0)
    if args.profile:
        profile = load_profile_json(Path(args.profile))
        params = profile.params
    else:
        params = _params_from(settings)
        config = _config_from(settings, extra_radii=probes)
        profile, events, _ = solve_profile(params, config, mode=settings["mode"])
    probes = tuple(p for p in probes if p <= profile.r_max) or (0.5 * profile.r_max,)
    report = run_report(profile, probe_radii=probes)

    stem = Path(settings["out"])
    stem.parent.mkdir(parents=True, exist_ok=True)
    out = stem.with_suffix(".verification.json")
    payload = {"schema": REPORT_SCHEMA_ID, "params": {
        "n": params.n, "lambda": params.lam, "mu": params.mu,
    }}
    payload.update(report.as_dict())
    _write_json(out, payload)
    _write_json(
        stem.with_suffix(".manifest.json"),
        _manifest("verify", settings, [str(out)], {"passes": {
            k: bool(v) for k, v in report.passes.items()
        }}),
    )
    status = "pass" if report.passed else "FAIL"
    print(f"verification {status} -> {out}")
    return 0 if report.passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="imcf-profile", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_solve = sub.add_parser("solve", help="solve one profile instance")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="solve a Cartesian parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--n-list", type=str, default=None)
    p_sweep.add_argument("--lambda-list", type=str, default=None)
    p_sweep.add_argument("--mu-list", type=str, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the verification report")
    _add_common(p_verify)
    p_verify.add_argument("--probe-radii", type=str, default=None)
    p_verify.add_argument("--profile", type=str, default=None,
                          help="verify a stored profile JSON instead of solving")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ImcfError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

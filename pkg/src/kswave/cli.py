"""Command-line interface.

Subcommands: speed, shoot, minspeed, trapcheck, surface, simulate, sweep.
Exit codes: 0 ok, 2 bad configuration, 3 a certification check failed,
4 a numerical computation could not finish.

Parameters come from flags, optionally layered over a JSON config file
(``--config``); flags win.  Every command except a bare ``speed`` writes a
run directory under ``--out`` (default ``$KSWAVE_OUTPUT_ROOT`` or
``./kswave_runs``) holding its JSON/CSV results, SVG figures and a
``manifest.json`` with content hashes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, figures
from .errors import ConfigError, KSWaveError, NumericalError
from .heteroclinic import ShootConfig, extract_profile, search_min_speed, shoot
from .model import AffineChi, ConstantChi, ModelParams, TabulatedChi, validate_params
from .pde import (Grid1D, SimConfig, bump_initial, estimate_speed, simulate, step_initial)
from .regions import face_flux_report, verify_surface
from .spectra import (default_eta, eta_five_eighths, literature_bounds, min_wave_speed)

EXIT_OK, EXIT_CONFIG, EXIT_CERT, EXIT_NUMERIC = 0, 2, 3, 4
OUTPUT_ROOT_ENV = "KSWAVE_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "kswave_runs"
SWEEP_COLUMNS = ("mu", "beta", "D", "chi_id", "c_star_closed", "c_star_empirical", "abs_err",
                 "outcome_counts")
SWEEP_SCHEMA_VERSION = 1
SWEEP_CAP = 10_000
FLUX_TOL = 1e-12
EXEMPT_FACE = "W0"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_scalar(tok: str, mu: float | None = None) -> float:
    """A number, or a multiple of ``mu``: ``mu``, ``mu/2``, ``0.5*mu``."""
    tok = tok.strip()
    try:
        return float(tok)
    except ValueError:
        pass
    if mu is not None:
        if tok == "mu":
            return mu
        m = re.fullmatch(rf"mu/({_NUM})", tok)
        if m:
            return mu / float(m.group(1))
        m = re.fullmatch(rf"({_NUM})\*?mu", tok)
        if m:
            return float(m.group(1)) * mu
    raise ConfigError(f"cannot read {tok!r} as a number")


def _read_table(path: str):
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        rows = json.loads(text)
        return tuple((float(a), float(b)) for a, b in rows)
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or rec[0].strip().startswith("#"):
            continue
        try:
            rows.append((float(rec[0]), float(rec[1])))
        except (ValueError, IndexError):
            if rows:
                raise ConfigError(f"chi table {path}: bad row {rec!r}") from None
            # header line
    return tuple(rows)


def parse_chi(spec: str, mu: float | None = None):
    """``const:<k>``, ``affine:<a>,<b>`` or ``table:<path>`` (CSV ``v,chi`` or JSON pairs)."""
    kind, _, rest = spec.partition(":")
    if not rest:
        raise ConfigError(f"chi: expected const:<k>, affine:<a>,<b> or table:<path>, got {spec!r}")
    if kind == "const":
        return ConstantChi(parse_scalar(rest, mu))
    if kind == "affine":
        parts = rest.split(",")
        if len(parts) != 2:
            raise ConfigError(f"chi: affine needs two numbers, got {rest!r}")
        return AffineChi(parse_scalar(parts[0], mu), parse_scalar(parts[1], mu))
    if kind == "table":
        try:
            return TabulatedChi(_read_table(rest))
        except OSError as exc:
            raise ConfigError(f"chi: cannot read table {rest!r} ({exc.strerror})") from None
    raise ConfigError(f"chi: unknown kind {kind!r}")


def _load_config(args):
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config} ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be an object")
    for key, val in vars(args).items():
        if key in ("config", "func", "command") or val is None:
            continue
        cfg[key] = val
    return cfg


def _params(cfg) -> ModelParams:
    try:
        mu = float(cfg.get("mu", 1.0))
        beta = float(cfg.get("beta", 1.0))
        diff = float(cfg.get("D", 0.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"params: {exc}") from None
    chi = cfg.get("chi", "const:0")
    chi = parse_chi(chi, mu) if isinstance(chi, str) else chi
    return validate_params(ModelParams(mu, beta, diff, chi))


def _speed(cfg, p, key="c"):
    """Speed from ``cfg``: a number, ``cstar``, ``<k>cstar`` or ``cstar+<d>``."""
    cs = min_wave_speed(p).c_star
    val = cfg.get(key)
    if val is None:
        return cs
    tok = str(val).strip()
    c = _cstar_expr(tok, cs) if "cstar" in tok else parse_scalar(tok)
    if not c > 0:
        raise ConfigError(f"{key}: must be positive, got {c}")
    return c


def _cstar_expr(tok, cs):
    if tok == "cstar":
        return cs
    m = re.fullmatch(rf"({_NUM})\*?cstar", tok)
    if m:
        return float(m.group(1)) * cs
    m = re.fullmatch(rf"cstar\+({_NUM})", tok)
    if m:
        return cs + float(m.group(1))
    raise ConfigError(f"c: cannot read {tok!r}")


# ---------------------------------------------------------------------------
# run directories
# ---------------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "to_dict"):
        return x.to_dict()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class RunDir:
    """Collects output files and writes the manifest last."""

    def __init__(self, root, command, config):
        self.command = command
        self.config = config
        key = _sha256(_dumps({"command": command, "config": config}).encode())[:12]
        self.path = Path(root) / f"{command}-{key}"
        self.path.mkdir(parents=True, exist_ok=True)
        self.outputs = {}
        self.inputs = {}
        self.started = datetime.now(timezone.utc).isoformat()

    def write(self, name, text):
        data = text.encode("utf-8")
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        self.outputs[name] = _sha256(data)
        return target

    def add_input(self, path):
        self.inputs[str(path)] = _sha256(Path(path).read_bytes())

    def finish(self, status):
        manifest = {
            "command": self.command, "config": self.config, "version": __version__,
            "started_at": self.started, "finished_at": datetime.now(timezone.utc).isoformat(),
            "status": status, "inputs": self.inputs,
            "outputs": [{"path": k, "sha256": v} for k, v in sorted(self.outputs.items())],
        }
        if self.command == "sweep":
            manifest["csv_schema_version"] = SWEEP_SCHEMA_VERSION
        (self.path / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")


def _output_root(cfg):
    return cfg.get("out") or os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT


def _run_config(cfg, p):
    out = {k: v for k, v in cfg.items() if k not in ("out", "chi")}
    out["params"] = p.to_dict()
    for k in ("mu", "beta", "D"):
        out.pop(k, None)
    return out


def _open_run(command, cfg, p):
    run = RunDir(_output_root(cfg), command, _run_config(cfg, p))
    chi = cfg.get("chi")
    if isinstance(chi, str) and chi.startswith("table:"):
        run.add_input(chi.split(":", 1)[1])
    return run


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def speed_report(p: ModelParams) -> dict:
    res = min_wave_speed(p)
    rep = {"params": p.to_dict(), "c_star": res.c_star, "binding": res.binding}
    if p.diff == 0:
        lo, hi = literature_bounds(p)
        rep["earlier_bounds"] = {"lower": lo, "upper": hi}
    return rep


def cmd_speed(cfg):
    p = _params(cfg)
    rep = speed_report(p)
    text = _dumps(rep)
    if cfg.get("json"):
        sys.stdout.write(text)
    else:
        print(f"c* = {rep['c_star']:.12g}  (binding: {rep['binding']})")
        if "earlier_bounds" in rep:
            b = rep["earlier_bounds"]
            print(f"earlier bounds: {b['lower']:.6g} <= c* <= {b['upper']:.6g}")
    if cfg.get("out"):
        run = _open_run("speed", cfg, p)
        run.write("speed.json", text)
        run.finish("ok")
    return EXIT_OK


def _shoot_cfg(cfg):
    kw = {}
    for key, name in (("eps", "eps"), ("rel_tol", "rel_tol"), ("xi_max", "xi_max"),
                      ("conv_radius", "conv_radius")):
        if cfg.get(key) is not None:
            kw[name] = float(cfg[key])
    if cfg.get("no_faces"):
        kw["check_faces"] = False
    if cfg.get("backend"):
        kw["backend"] = cfg["backend"]
    return ShootConfig(**kw)


def cmd_shoot(cfg):
    p = _params(cfg)
    c = _speed(cfg, p)
    scfg = _shoot_cfg(cfg)
    run = _open_run("shoot", cfg, p)
    o = shoot(p, c, scfg)
    summary = o.summary()
    summary["c_star_closed"] = min_wave_speed(p).c_star
    run.write("outcome.json", _dumps(summary))
    print(f"c = {c:.8g}: {o.kind}" + (f" ({o.face or o.component})" if o.face or o.component else ""))
    if o.converged:
        prof = extract_profile(o, n_points=int(cfg.get("points") or 2048))
        run.write("profile.csv", prof.to_csv())
        run.write("profile.json", prof.to_json() + "\n")
        run.write("profile.svg", figures.line_plot(
            [("U", prof.xi, prof.U), ("V", prof.xi, prof.V)],
            title=f"wave profile, c = {c:.6g}", xlabel="xi", ylabel="U, V"))
        print(f"profile: {prof.xi.size} points, violations {prof.violations}")
    run.finish("ok")
    print(f"run directory: {run.path}")
    return EXIT_OK


def cmd_minspeed(cfg):
    p = _params(cfg)
    closed = min_wave_speed(p).c_star
    tol = float(cfg.get("tol") or 1e-3)
    bracket = cfg.get("bracket") or (0.25 * closed, 2.5 * closed)
    run = _open_run("minspeed", cfg, p)
    s = search_min_speed(p, [float(b) for b in bracket], tol, _shoot_cfg(cfg))
    rep = {"params": p.to_dict(), "c_star_empirical": s.c_star, "c_star_closed": closed,
           "abs_err": abs(s.c_star - closed), "tol": tol, "final_bracket": list(s.bracket),
           "outcome_counts": s.outcome_counts(),
           "history": [{"c": c, "kind": k, "flagged": f} for c, k, f in s.history]}
    run.write("minspeed.json", _dumps(rep))
    run.write("outcomes.svg", figures.outcome_strip([(c, k) for c, k, _ in s.history], closed))
    run.finish("ok")
    print(f"empirical c* = {s.c_star:.6f} +/- {tol / 2:.1e}   closed form c* = {closed:.6f}")
    print(f"run directory: {run.path}")
    return EXIT_OK


def cmd_trapcheck(cfg):
    p = _params(cfg)
    c = _speed(cfg, p)
    samples = int(cfg.get("samples") or 10_000)
    run = _open_run("trapcheck", cfg, p)
    reports = face_flux_report(p, c, samples)
    failed = [r.face for r in reports if r.face != EXEMPT_FACE and r.worst_margin < -FLUX_TOL]
    rep = {"params": p.to_dict(), "c": c, "samples": samples, "tolerance": FLUX_TOL,
           "exempt_face": EXEMPT_FACE, "faces": [r.to_dict() for r in reports],
           "failed_faces": failed, "certified": not failed}
    run.write("trapcheck.json", _dumps(rep))
    for r in reports:
        tag = "exempt" if r.face == EXEMPT_FACE else ("ok" if r.face not in failed else "FAIL")
        print(f"{r.face:>9s}  worst inward flux {r.worst_margin: .3e}  {tag}")
    run.finish("certified" if not failed else "failed")
    print(f"run directory: {run.path}")
    return EXIT_OK if not failed else EXIT_CERT


def _eta(cfg, c):
    val = str(cfg.get("eta") or "half")
    if val == "half":
        return default_eta(c).eta
    if val == "five-eighths":
        return eta_five_eighths(c).eta
    return parse_scalar(val)


def cmd_surface(cfg):
    p = _params(cfg)
    c = _speed(cfg, p)
    eta = _eta(cfg, c)
    run = _open_run("surface", cfg, p)
    chk = verify_surface(p, c, eta, int(cfg.get("grid") or 200), int(cfg.get("y_grid") or 50))
    rep = {"params": p.to_dict(), "c": c, **chk.to_dict()}
    run.write("surface.json", _dumps(rep))
    run.finish("holds" if chk.holds else "failed")
    print(f"eta = {eta:.6g}: worst value {chk.worst_value:.6g} at {chk.worst_point} -> "
          f"{'holds' if chk.holds else 'FAILS'}")
    print(f"run directory: {run.path}")
    return EXIT_OK if chk.holds else EXIT_CERT


def cmd_simulate(cfg):
    p = _params(cfg)
    g = Grid1D(float(cfg.get("L") or 300.0), int(cfg.get("n") or 3000))
    t_end = float(cfg.get("t_end") or 60.0)
    x0 = float(cfg.get("x0") or 20.0)
    if (cfg.get("init") or "step") == "step":
        init = step_initial(g, p, x0)
    else:
        init = bump_initial(g, p, x0, float(cfg.get("width") or 5.0))
    scfg = SimConfig(snapshot_every=float(cfg["snapshot_every"]) if cfg.get("snapshot_every") else None,
                     frame_c=float(cfg.get("frame_c") or 0.0), backend=cfg.get("backend"))
    run = _open_run("simulate", cfg, p)
    sol = simulate(p, g, init, t_end, scfg)
    names = []
    for k in range(len(sol.snapshots)):
        name = f"snapshots/snap_{k:05d}.csv"
        run.write(name, sol.snapshot_csv(k))
        names.append(name)
    man = sol.manifest(scfg)
    man["snapshots"] = names
    window = cfg.get("window")
    if window:
        speed, err = estimate_speed(sol.front_series, [float(w) for w in window])
        man["speed_estimate"] = {"window": list(window), "speed": speed, "stderr": err}
        print(f"front speed over {window}: {speed:.6f} +/- {err:.1e}")
    stride = max(1, sol.monitors.shape[0] // 2000)
    buf = ["step,t,min_u,min_v,max_u_minus_beta_v,max_u"]
    for i in range(0, sol.monitors.shape[0], stride):
        buf.append(",".join([str(i + 1), repr((i + 1) * sol.dt)] + [repr(float(x)) for x in sol.monitors[i]]))
    run.write("monitors.csv", "\n".join(buf) + "\n")
    run.write("simulate.json", _dumps(man))
    if len(sol.front_series) >= 2:
        fs = np.asarray(sol.front_series)
        run.write("front.svg", figures.line_plot([("front", fs[:, 0], fs[:, 1])],
                                                 title="front position", xlabel="t", ylabel="x"))
    run.finish("ok")
    print(f"monitors: {sol.monitor_summary()}")
    print(f"run directory: {run.path}")
    return EXIT_OK


def _sweep_point(task):
    mu, beta, diff, chi_tok, tol, bracket_rel, backend = task
    row = {"mu": mu, "beta": beta, "D": diff, "chi_id": chi_tok}
    try:
        p = validate_params(ModelParams(mu, beta, diff, parse_chi(chi_tok, mu)))
        closed = min_wave_speed(p).c_star
        row["c_star_closed"] = closed
        s = search_min_speed(p, (bracket_rel[0] * closed, bracket_rel[1] * closed), tol,
                             ShootConfig(backend=backend))
        row["c_star_empirical"] = s.c_star
        row["abs_err"] = abs(s.c_star - closed)
        row["outcome_counts"] = ";".join(f"{k}={v}" for k, v in s.outcome_counts().items())
    except KSWaveError as exc:
        row.setdefault("c_star_closed", "")
        row["c_star_empirical"] = ""
        row["abs_err"] = ""
        row["outcome_counts"] = f"error={type(exc).__name__}"
    return row


def sweep_tasks(axes, tol, bracket_rel=(0.25, 2.5), backend=None):
    for key in ("mu", "beta", "D", "chi"):
        if not axes.get(key):
            raise ConfigError(f"sweep.{key}: axis is empty")
    size = math.prod(len(axes[k]) for k in ("mu", "beta", "D", "chi"))
    if size > SWEEP_CAP:
        raise ConfigError(f"sweep: {size} grid points exceed the cap of {SWEEP_CAP}")
    # lexicographic in (mu, beta, D, chi) in the order given
    return [(float(m), float(b), float(d), str(ch), tol, tuple(bracket_rel), backend)
            for m, b, d, ch in itertools.product(axes["mu"], axes["beta"], axes["D"], axes["chi"])]


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def run_sweep(tasks, jobs=1):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))  # map keeps task order
    return [_sweep_point(t) for t in tasks]


def cmd_sweep(cfg):
    axes = {k: cfg.get(k) for k in ("mu", "beta", "D")}
    axes["chi"] = cfg.get("chi_list") or cfg.get("chi") or ["const:0"]
    tol = float(cfg.get("tol") or 1e-3)
    tasks = sweep_tasks(axes, tol, backend=cfg.get("backend"))
    run = RunDir(_output_root(cfg), "sweep", {k: v for k, v in cfg.items() if k != "out"})
    rows = run_sweep(tasks, int(cfg.get("jobs") or 1))
    run.write("sweep.csv", sweep_csv(rows))
    labels = [f"mu={r['mu']:g} beta={r['beta']:g} D={r['D']:g} {r['chi_id']}" for r in rows]
    errs = [r["abs_err"] if r["abs_err"] != "" else float("nan") for r in rows]
    run.write("sweep_abs_err.svg", figures.heatmap(errs, labels, "|c*_empirical - c*_closed|"))
    failed = sum(1 for r in rows if r["c_star_empirical"] == "")
    run.finish("ok" if not failed else f"{failed} rows failed")
    print(f"{len(rows)} rows, {failed} failed; run directory: {run.path}")
    return EXIT_OK if not failed else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _model_flags(ap):
    ap.add_argument("--config", help="JSON file with default values; flags override it")
    ap.add_argument("--mu", type=float, help="logistic growth rate (default 1)")
    ap.add_argument("--beta", type=float, help="chemical growth rate (default 1)")
    ap.add_argument("--D", type=float, help="chemical diffusion ratio (default 0)")
    ap.add_argument("--chi", help="const:<k> | affine:<a>,<b> | table:<path>; k may be mu, mu/2")
    ap.add_argument("--out", help=f"output root (default ${OUTPUT_ROOT_ENV} or ./{DEFAULT_OUTPUT_ROOT})")
    ap.add_argument("--backend", choices=("compiled", "python"), help="kernel implementation")


def _shoot_flags(ap):
    ap.add_argument("--eps", type=float, help="offset along the unstable direction")
    ap.add_argument("--rel-tol", dest="rel_tol", type=float)
    ap.add_argument("--xi-max", dest="xi_max", type=float)
    ap.add_argument("--no-faces", dest="no_faces", action="store_true", default=None,
                    help="only watch for negativity, not trap-region faces")


def build_parser():
    ap = argparse.ArgumentParser(prog="kswave", description="Traveling waves of the logistic "
                                 "Keller-Segel model: speeds, shooting, certificates, simulation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("speed", help="closed-form minimum wave speed")
    _model_flags(sp)
    sp.add_argument("--json", action="store_true", default=None, help="print JSON")
    sp.set_defaults(func=cmd_speed)

    sp = sub.add_parser("shoot", help="shoot one orbit and extract its profile")
    _model_flags(sp)
    _shoot_flags(sp)
    sp.add_argument("--c", help="speed: number, cstar, 1.5cstar or cstar+0.5 (default cstar)")
    sp.add_argument("--points", type=int, help="profile grid size (default 2048)")
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("minspeed", help="empirical minimum speed by bisection")
    _model_flags(sp)
    _shoot_flags(sp)
    sp.add_argument("--tol", type=float, help="final bracket width (default 1e-3)")
    sp.add_argument("--bracket", type=float, nargs=2, metavar=("C_LO", "C_HI"))
    sp.set_defaults(func=cmd_minspeed)

    sp = sub.add_parser("trapcheck", help="inward flux on every trap-region face")
    _model_flags(sp)
    sp.add_argument("--c", help="speed (default cstar)")
    sp.add_argument("--samples", type=int, help="samples per face (default 10000)")
    sp.set_defaults(func=cmd_trapcheck)

    sp = sub.add_parser("surface", help="check the lower surface W = eta U")
    _model_flags(sp)
    sp.add_argument("--c", help="speed (default cstar)")
    sp.add_argument("--eta", help="half (c/2, default), five-eighths (5c/8) or a number")
    sp.add_argument("--grid", type=int, help="points per axis in (U, V) (default 200)")
    sp.add_argument("--y-grid", dest="y_grid", type=int, help="points along Y when D > 0 (default 50)")
    sp.set_defaults(func=cmd_surface)

    sp = sub.add_parser("simulate", help="method-of-lines PDE run")
    _model_flags(sp)
    sp.add_argument("--L", type=float, help="domain length (default 300)")
    sp.add_argument("--n", type=int, help="cells (default 3000)")
    sp.add_argument("--t-end", dest="t_end", type=float, help="final time (default 60)")
    sp.add_argument("--init", choices=("step", "bump"), help="initial data (default step)")
    sp.add_argument("--x0", type=float, help="step position or bump centre (default 20)")
    sp.add_argument("--width", type=float, help="bump half-width (default 5)")
    sp.add_argument("--frame-c", dest="frame_c", type=float, help="co-moving frame speed")
    sp.add_argument("--snapshot-every", dest="snapshot_every", type=float)
    sp.add_argument("--window", type=float, nargs=2, metavar=("T_A", "T_B"),
                    help="fit the front speed over this time window")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="empirical vs closed-form minimum speed over a grid")
    sp.add_argument("--config", help="JSON file with the axes")
    sp.add_argument("--mu", type=float, nargs="+")
    sp.add_argument("--beta", type=float, nargs="+")
    sp.add_argument("--D", type=float, nargs="+")
    sp.add_argument("--chi", dest="chi_list", nargs="+", help="chi specs, e.g. const:0 const:mu/2")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--jobs", type=int, help="worker processes (default 1)")
    sp.add_argument("--out")
    sp.add_argument("--backend", choices=("compiled", "python"))
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

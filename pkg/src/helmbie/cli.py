"""Batch command line front end.

    helmbie solve-interior|solve-exterior|eig-scan|verify|converge --config run.toml [--set key=value ...]

Exit status: 0 all checks passed, 1 some check failed, 2 configuration error
(nothing written), 3 incompatible Neumann data, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fields as F
from .distcalc import DensityPair
from .errors import ConfigError, GeometryError, HelmbieError, IncompatibleDataError
from .geometry import _SHAPES, Boundary, make_boundary
from .layerpot import jump_check
from .solver import (NeumannProblem, eigen_scan, green_identity_residual, radiation_check,
                     solve_neumann)
from .specfun import FundamentalSolution

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("solve-interior", "solve-exterior", "eig-scan", "verify", "converge")

DEFAULTS = {
    "curve": {"name": None, "N": 128},
    "problem": {"k": 1.0},
    "data": {"family": "point_source", "source": [0.2, 0.1], "direction": [1.0, 0.0]},
    "probes": {"points": [[3.0, 1.0], [-2.0, 2.5], [0.0, -4.0]]},
    "grid": {"kind": "none"},
    "scan": {"k_min": 0.5, "k_max": 4.0, "samples": 141, "side": "interior", "expect": [],
             "expect_tol": 1e-3},
    "converge": {"N": [32, 64, 128, 256], "min_factor": 10.0, "floor": 1e-12},
    "tolerances": {"field": 1e-8, "residual": 1e-10, "green": 1e-8, "jump": 1e-6,
                   "radiation_floor": 1e-10},
    "output": {"csv": "out.csv", "report": "report.txt"},
}


def _merge(base, extra):
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _parse_value(text):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(cfg: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, text = item.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {key}: {p} is not a section")
    node[parts[-1]] = _parse_value(text.strip())


def _complex(val, what):
    if isinstance(val, (int, float)):
        return complex(val)
    if isinstance(val, list) and len(val) == 2:
        return complex(float(val[0]), float(val[1]))
    if isinstance(val, str):
        try:
            return complex(val.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(f"{what} must be a number, a [re, im] pair or a string like '2+0.5j'")


@dataclass
class RunConfig:
    command: str
    raw: dict
    boundary: Boundary
    k: complex
    probes: np.ndarray
    csv_path: Path
    report_path: Path
    tolerances: dict
    data: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    converge: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode()).hexdigest()


def _curve(cfg) -> Boundary:
    c = dict(cfg.get("curve") or {})
    name = c.pop("name", None)
    if not name:
        raise ConfigError("[curve] name is required")
    n = c.pop("N", 128)
    if not isinstance(n, int):
        raise ConfigError("[curve] N must be an integer")
    if name not in _SHAPES:
        raise ConfigError(f"[curve] unknown name {name!r}; choose from {sorted(_SHAPES)}")
    params = {key: tuple(v) if isinstance(v, list) else v for key, v in c.items()}
    try:
        return make_boundary(name, n, **params)
    except GeometryError as exc:
        raise ConfigError(f"[curve] {exc}") from None


def load_config(command: str, path: str | None, overrides=()) -> RunConfig:
    """Parse the TOML file, apply --set overrides and validate everything."""
    user = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            user = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    for item in overrides:
        apply_override(user, item)
    if "command" in user and user["command"] != command:
        raise ConfigError(f"config is for {user['command']!r} but {command!r} was requested")
    cfg = _merge(DEFAULTS, user)
    cfg["command"] = command
    b = _curve(cfg)
    k = _complex(cfg["problem"].get("k"), "[problem] k")
    if k.imag < 0 or (k.imag == 0 and k.real <= 0):
        raise ConfigError("[problem] k must satisfy Im k >= 0 and lie off (-inf, 0]")
    try:
        probes = np.asarray(cfg["probes"]["points"], dtype=float).reshape(-1, 2)
    except (TypeError, ValueError):
        raise ConfigError("[probes] points must be a list of [x, y] pairs") from None
    data = dict(cfg["data"])
    fam = data.get("family")
    if fam not in ("point_source", "plane_wave", "zero", "file"):
        raise ConfigError(f"[data] unknown family {fam!r}")
    if fam == "file":
        if "path" not in data:
            raise ConfigError("[data] family 'file' needs a path")
        data["values"] = _read_nodes(data["path"], b.n_total)
    scan = dict(cfg["scan"])
    if scan.get("side") not in ("interior", "exterior"):
        raise ConfigError("[scan] side must be interior or exterior")
    if not (0 < float(scan["k_min"]) < float(scan["k_max"])) or int(scan["samples"]) < 3:
        raise ConfigError("[scan] needs 0 < k_min < k_max and samples >= 3")
    conv = dict(cfg["converge"])
    if not all(isinstance(n, int) and n >= 16 and n % 2 == 0 for n in conv["N"]):
        raise ConfigError("[converge] N must be a list of even integers >= 16")
    out = cfg["output"]
    tol = {key: float(v) for key, v in cfg["tolerances"].items()}
    return RunConfig(command, cfg, b, k, probes, Path(out["csv"]), Path(out["report"]), tol,
                     data, scan, conv, dict(cfg["grid"]))


def _read_nodes(path, n):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    except OSError as exc:
        raise ConfigError(f"[data] cannot read {path}: {exc}") from None
    if len(rows) != n:
        raise ConfigError(f"[data] {path} has {len(rows)} rows, expected one per node ({n})")
    try:
        mu0 = np.array([float(r["g_re"]) + 1j * float(r.get("g_im") or 0) for r in rows])
        mu1 = np.array([float(r.get("mu1_re") or 0) + 1j * float(r.get("mu1_im") or 0) for r in rows])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[data] {path}: bad node values ({exc})") from None
    return mu0, mu1


def _manufactured(cfg: RunConfig, side: str):
    """Closed-form solution matching the configured data family, or None."""
    d = cfg.data
    if d["family"] == "point_source":
        if side == "interior":
            raise ConfigError("[data] point_source is a manufactured solution for exterior problems")
        src = np.asarray(d["source"], dtype=float)
        if cfg.boundary.locate(src[None])[0] != "interior":
            raise ConfigError("[data] source must lie inside the domain, away from the boundary")
        return F.point_source(cfg.k, src)
    if d["family"] == "plane_wave":
        if side == "exterior":
            raise ConfigError("[data] plane_wave is a manufactured solution for interior problems")
        return F.plane_wave(cfg.k, d["direction"])
    return None


def _datum(cfg: RunConfig, b: Boundary, exact):
    if exact is not None:
        return DensityPair.classical(exact.normal_derivative(b.points, b.normals))
    if cfg.data["family"] == "zero":
        return DensityPair.classical(np.zeros(b.n_total, dtype=complex))
    mu0, mu1 = cfg.data["values"]
    return DensityPair(mu0, mu1)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


class Output:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines = [f"command: {cfg.command}", f"config_sha256: {cfg.sha256}", "config:"]
        self.lines += ["  " + line for line in json.dumps(cfg.raw, sort_keys=True, indent=2,
                                                          default=str).splitlines()]
        self.checks = []

    def note(self, text):
        self.lines.append(text)

    def check(self, name, value, threshold, passed=None, relation="<"):
        if passed is None:
            passed = bool(value < threshold)
        self.checks.append((name, value, threshold, passed))
        self.lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {value:.3e} ({relation} {threshold:.1e})")
        return passed

    def write(self, header, rows):
        self.cfg.csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.cfg.csv_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# config_sha256={self.cfg.sha256}\n")
            w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) if isinstance(v, (float, np.floating, int, np.integer))
                            and not isinstance(v, bool) else v for v in row])
        ok = all(c[3] for c in self.checks)
        self.lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
        self.cfg.report_path.parent.mkdir(parents=True, exist_ok=True)
        self.cfg.report_path.write_text("\n".join(self.lines) + "\n", encoding="utf-8")
        return 0 if ok else 1


def _grid_points(cfg: RunConfig, side: str):
    g = cfg.grid
    kind = g.get("kind", "none")
    b = cfg.boundary
    if kind == "none":
        return np.zeros((0, 2))
    if kind == "polar":
        r = np.linspace(float(g.get("r_min", 2.0)), float(g.get("r_max", 5.0)), int(g.get("nr", 10)))
        t = 2 * np.pi * np.arange(int(g.get("ntheta", 32))) / int(g.get("ntheta", 32))
        c = b.points.mean(axis=0)
        pts = (c + r[:, None, None] * np.stack([np.cos(t), np.sin(t)], 1)[None]).reshape(-1, 2)
    elif kind == "cartesian":
        lo, hi = b.points.min(axis=0), b.points.max(axis=0)
        xs = np.linspace(lo[0], hi[0], int(g.get("nx", 20)))
        ys = np.linspace(lo[1], hi[1], int(g.get("ny", 20)))
        pts = np.stack(np.meshgrid(xs, ys, indexing="xy"), -1).reshape(-1, 2)
    else:
        raise ConfigError(f"[grid] unknown kind {kind!r}")
    return pts[b.locate(pts) == side]


def _solve_cmd(cfg: RunConfig, side: str) -> int:
    exact = _manufactured(cfg, side)
    out = Output(cfg)
    b = cfg.boundary
    rep = solve_neumann(NeumannProblem(side, cfg.k, b, _datum(cfg, b, exact)))
    out.note(f"sigma_min: {rep.sigma_min:.6e}  sigma_max: {rep.sigma_max:.6e}  least_squares: {rep.least_squares}")
    out.note(f"compatibility_defect: {rep.compatibility_defect:.3e}")
    out.check("residual_boundary", rep.residual_boundary, cfg.tolerances["residual"])
    probes = cfg.probes[b.locate(cfg.probes) == side]
    if len(probes) < len(cfg.probes):
        out.note(f"skipped {len(cfg.probes) - len(probes)} probes outside the {side} region")
    pts = np.concatenate([probes, _grid_points(cfg, side)])
    u = rep.field.value(pts) if len(pts) else np.zeros(0, dtype=complex)
    header = ["x", "y", "re_u", "im_u"]
    rows = [[p[0], p[1], v.real, v.imag] for p, v in zip(pts, u)]
    if exact is not None and len(pts):
        ue = exact.value(pts)
        header += ["re_exact", "im_exact", "abs_err"]
        rows = [r + [e.real, e.imag, abs(v - e)] for r, v, e in zip(rows, u, ue)]
        out.check("field_error", float(np.max(np.abs(u - ue))), cfg.tolerances["field"])
    return out.write(header, rows)


def _scan_cmd(cfg: RunConfig) -> int:
    s = cfg.scan
    out = Output(cfg)
    res = eigen_scan(cfg.boundary, s["side"], float(s["k_min"]), float(s["k_max"]), int(s["samples"]))
    rows = [["sample", k, sm, sx] for k, sm, sx in zip(res.k, res.sigma_min, res.sigma_max)]
    rows += [["dip", k, sm, ""] for k, sm in res.dips]
    out.note("dips: " + ", ".join(f"{k:.8f}" for k, _ in res.dips))
    tol = float(s["expect_tol"])
    for target in s["expect"]:
        dist = min((abs(k - target) for k, _ in res.dips), default=np.inf)
        out.check(f"dip_near_{target}", dist, tol)
    return out.write(["kind", "k", "sigma_min", "sigma_max"], rows)


def _verify_cmd(cfg: RunConfig) -> int:
    """Manufactured exterior point-source problem plus the verification suites."""
    out = Output(cfg)
    b, k, tol = cfg.boundary, cfg.k, cfg.tolerances
    exact = _manufactured(_with_family(cfg, "point_source"), "exterior")
    rep = solve_neumann(NeumannProblem("exterior", k, b, _datum(cfg, b, exact)))
    rows = []

    def record(name, value, threshold, passed=None, relation="<"):
        ok = out.check(name, value, threshold, passed, relation)
        rows.append([name, value, threshold, "PASS" if ok else "FAIL"])

    record("residual_boundary", rep.residual_boundary, tol["residual"])
    probes = cfg.probes[b.locate(cfg.probes) == "exterior"]
    record("field_error", float(np.max(np.abs(rep.field.value(probes) - exact.value(probes)))), tol["field"])
    record("green_third_exterior", float(np.max(green_identity_residual(rep, b, k, probes, "exterior"))),
           tol["green"])
    fs = FundamentalSolution.radiating(k, n=2)
    jc = jump_check(fs, b, np.cos(b.t), nodes=np.arange(0, b.n_total, max(1, b.n_total // 16)))
    record("jump_relation", max(jc.err_plus, jc.err_minus), tol["jump"])
    safe = 1.0 + 2.0 * float(np.max(np.linalg.norm(b.points, axis=1)))
    radii = safe * np.array([1.0, 2.0, 4.0, 8.0])
    rc = radiation_check(rep, k, radii, floor=tol["radiation_floor"], boundary=b)
    record("radiation_max_ratio", float(np.max(rc.ratios)), 1.2, rc.passed, "<=")
    return out.write(["check", "value", "threshold", "status"], rows)


def _with_family(cfg: RunConfig, family: str) -> RunConfig:
    c = copy.copy(cfg)
    c.data = dict(cfg.data, family=family)
    return c


def _converge_cmd(cfg: RunConfig) -> int:
    out = Output(cfg)
    conv = cfg.converge
    side = "exterior" if cfg.data["family"] != "plane_wave" else "interior"
    exact = _manufactured(cfg, side)
    if exact is None:
        raise ConfigError("[data] converge needs a manufactured family (point_source or plane_wave)")
    rows, errs = [], []
    for n in conv["N"]:
        b = cfg.boundary.refine(n)
        rep = solve_neumann(NeumannProblem(side, cfg.k, b, _datum(cfg, b, exact)))
        probes = cfg.probes[b.locate(cfg.probes) == side]
        err = float(np.max(np.abs(rep.field.value(probes) - exact.value(probes))))
        ratio = errs[-1] / err if errs and err > 0 else float("inf") if errs else float("nan")
        errs.append(err)
        rows.append([n, err, ratio, rep.sigma_min])
    floor, fac = float(conv["floor"]), float(conv["min_factor"])
    worst = np.inf
    for e0, e1 in zip(errs, errs[1:]):
        if e0 > floor:
            worst = min(worst, e0 / max(e1, 1e-300))
    out.check("min_factor_per_doubling", worst if np.isfinite(worst) else fac, fac,
              passed=bool(not np.isfinite(worst) or worst >= fac), relation=">=")
    out.check("final_error", errs[-1], cfg.tolerances["field"])
    return out.write(["N", "error", "ratio", "sigma_min"], rows)


def run(cfg: RunConfig) -> int:
    if cfg.command == "solve-interior":
        return _solve_cmd(cfg, "interior")
    if cfg.command == "solve-exterior":
        return _solve_cmd(cfg, "exterior")
    if cfg.command == "eig-scan":
        return _scan_cmd(cfg)
    if cfg.command == "verify":
        return _verify_cmd(cfg)
    return _converge_cmd(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="helmbie", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (dotted path), may be repeated")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.overrides)
        # family/side consistency is part of validation: fail before writing anything
        if cfg.command in ("solve-interior", "solve-exterior"):
            _manufactured(cfg, cfg.command.split("-")[1])
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IncompatibleDataError as exc:
        print(f"incompatible data: {exc} (sigma_min {exc.sigma_min:.3e})", file=sys.stderr)
        return 3
    except (HelmbieError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

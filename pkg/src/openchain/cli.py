"""Command-line front end: config ingestion, sweeps, figures, oracle checks.

Configuration is a single JSON document (model / drive / quadrature blocks);
command-line flags override file values. Every output file is a CSV with
``#``-prefixed metadata lines carrying the tool version and the full
resolved configuration, so any file can be reproduced exactly. The figure
subcommand additionally renders a PNG next to each CSV unless ``--no-plot``.

Exit codes: 0 success, 1 validation failure, 2 quadrature non-convergence
(partial results are still written, flagged ``converged=false``), 3 I/O.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, greens, oracle, plots, transport
from .model import (
    BulkKind,
    ChainModel,
    FermionicDrive,
    FermionicReservoir,
    LindbladDrive,
    LindbladReservoir,
    ModelError,
    QuadratureSpec,
    validate,
)
from .quadrature import NonConvergence

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGENCE = 2
EXIT_IO = 3

DEFAULT_CONFIG = {
    "model": {"n_sites": 1, "hopping": 1.0, "onsite": None,
              "bulk_rate": 0.0, "bulk_kind": "none"},
    "drive": {"kind": "lindblad",
              "left": {"alpha": 1.0, "beta": 0.0},
              "right": {"alpha": 0.0, "beta": 1.0}},
    "quadrature": {"rel_tol": 1e-9, "abs_tol": 1e-12, "max_subdivisions": 2000},
}

_FERMIONIC_DRIVE_DEFAULTS = {
    "kind": "fermionic",
    "left": {"delta": 1.0, "mu": 0.5, "temperature": 1.0},
    "right": {"delta": 1.0, "mu": -0.5, "temperature": 1.0},
}


# ---------------------------------------------------------------- serialization

def model_to_dict(m: ChainModel) -> dict:
    return {"n_sites": m.n_sites, "hopping": m.hopping, "onsite": list(m.onsite),
            "bulk_rate": m.bulk_rate, "bulk_kind": m.bulk_kind.value}


def drive_to_dict(d) -> dict:
    if isinstance(d, LindbladDrive):
        return {"kind": "lindblad",
                "left": {"alpha": d.left.alpha, "beta": d.left.beta},
                "right": {"alpha": d.right.alpha, "beta": d.right.beta}}
    return {"kind": "fermionic",
            "left": {"delta": d.left.delta, "mu": d.left.mu,
                     "temperature": d.left.temperature},
            "right": {"delta": d.right.delta, "mu": d.right.mu,
                      "temperature": d.right.temperature}}


def quad_to_dict(q: QuadratureSpec) -> dict:
    out = {"rel_tol": q.rel_tol, "abs_tol": q.abs_tol,
           "max_subdivisions": q.max_subdivisions}
    if q.window is not None:
        out["window"] = list(q.window)
    return out


def parse_model(d: dict) -> ChainModel:
    return ChainModel(n_sites=int(d.get("n_sites", 1)),
                      hopping=float(d.get("hopping", 1.0)),
                      onsite=d.get("onsite"),
                      bulk_rate=float(d.get("bulk_rate", 0.0)),
                      bulk_kind=BulkKind(d.get("bulk_kind", "none")))


def parse_drive(d: dict):
    if d.get("kind", "lindblad") == "fermionic":
        mk = lambda r: FermionicReservoir(delta=float(r["delta"]), mu=float(r["mu"]),
                                          temperature=float(r["temperature"]))
        return FermionicDrive(left=mk(d["left"]), right=mk(d["right"]))
    mk = lambda r: LindbladReservoir(alpha=float(r["alpha"]), beta=float(r["beta"]))
    return LindbladDrive(left=mk(d["left"]), right=mk(d["right"]))


def parse_quad(d: dict) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=float(d.get("rel_tol", 1e-9)),
                          abs_tol=float(d.get("abs_tol", 1e-12)),
                          max_subdivisions=int(d.get("max_subdivisions", 2000)),
                          window=tuple(d["window"]) if d.get("window") else None)


# ------------------------------------------------------------------ CSV output

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header, rows, echo: dict) -> None:
    """CSV with metadata comments; deterministic bytes for a fixed config."""
    lines = [f"# openchain {__version__}",
             f"# config: {json.dumps(echo, sort_keys=True, separators=(',', ':'))}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _out_path(args, name: str) -> Path | None:
    if args.outdir is None:
        return None
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


# ----------------------------------------------------------- config resolution

_LINDBLAD_FLAGS = ("alpha_l", "beta_l", "alpha_r", "beta_r")
_FERMIONIC_FLAGS = ("delta", "delta_l", "delta_r", "mu_l", "mu_r", "temperature")


def _drive_kind_from_flags(args) -> str | None:
    lind = any(getattr(args, f, None) is not None for f in _LINDBLAD_FLAGS)
    ferm = any(getattr(args, f, None) is not None for f in _FERMIONIC_FLAGS)
    if lind and ferm:
        raise ModelError("flags mix Lindblad (alpha/beta) and fermionic "
                         "(delta/mu/temperature) reservoirs")
    if getattr(args, "drive", None):
        return args.drive
    if lind:
        return "lindblad"
    if ferm:
        return "fermionic"
    return None


def resolved_config(args) -> dict:
    """Defaults, overlaid by --config file, overlaid by explicit flags."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        for key in ("model", "drive", "quadrature"):
            if key in loaded:
                cfg[key] = loaded[key] if key == "drive" else {**cfg[key], **loaded[key]}

    kind = _drive_kind_from_flags(args)
    if kind and cfg["drive"].get("kind", "lindblad") != kind:
        cfg["drive"] = copy.deepcopy(
            _FERMIONIC_DRIVE_DEFAULTS if kind == "fermionic"
            else DEFAULT_CONFIG["drive"])

    m = cfg["model"]
    if getattr(args, "preset", None) == "single-site":
        m["n_sites"] = 1
    elif getattr(args, "preset", None) == "chain":
        m["n_sites"] = 8
    for flag, key in (("n", "n_sites"), ("hopping", "hopping"),
                      ("bulk_rate", "bulk_rate"), ("bulk_kind", "bulk_kind")):
        val = getattr(args, flag, None)
        if val is not None:
            m[key] = val
    if getattr(args, "onsite", None) is not None:
        m["onsite"] = [float(x) for x in args.onsite.split(",")]

    d = cfg["drive"]
    if d.get("kind", "lindblad") == "lindblad":
        for flag, side, key in (("alpha_l", "left", "alpha"), ("beta_l", "left", "beta"),
                                ("alpha_r", "right", "alpha"), ("beta_r", "right", "beta")):
            val = getattr(args, flag, None)
            if val is not None:
                d[side][key] = val
    else:
        if getattr(args, "delta", None) is not None:
            d["left"]["delta"] = d["right"]["delta"] = args.delta
        for flag, side, key in (("delta_l", "left", "delta"), ("delta_r", "right", "delta"),
                                ("mu_l", "left", "mu"), ("mu_r", "right", "mu")):
            val = getattr(args, flag, None)
            if val is not None:
                d[side][key] = val
        if getattr(args, "temperature", None) is not None:
            d["left"]["temperature"] = d["right"]["temperature"] = args.temperature

    q = cfg["quadrature"]
    for flag in ("rel_tol", "abs_tol", "max_subdivisions"):
        val = getattr(args, flag, None)
        if val is not None:
            q[flag] = val
    return cfg


def _validated(cfg: dict):
    report = validate(cfg["model"], cfg["drive"])
    if not report.ok:
        raise ModelError(str(report))
    return parse_model(cfg["model"]), parse_drive(cfg["drive"]), parse_quad(cfg["quadrature"])


# -------------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    cfg = resolved_config(args)
    report = validate(cfg["model"], cfg["drive"])
    if report.ok:
        print("ok")
        return EXIT_OK
    print(report, file=sys.stderr)
    return EXIT_VALIDATION


def _current_result(model, drive, quad, method: str):
    if method == "auto":
        method = "generic" if isinstance(drive, LindbladDrive) else "landauer"
    if method == "generic":
        r = transport.current_lindblad_generic(model, drive, quad)
    elif method == "dissipative":
        r = transport.current_dissipative_chain(model, drive, quad)
    elif method in ("free", "landauer"):
        j = (transport.current_free_lindblad(model, drive, quad)
             if isinstance(drive, LindbladDrive)
             else transport.current_free_fermionic(model, drive, quad))
        r = transport.CurrentResult.from_through_dissipative(j, 0.0)
    elif method == "mw":
        j = transport.current_meir_wingreen(model, drive, quad)
        r = transport.CurrentResult.from_through_dissipative(j, 0.0)
    else:
        raise ModelError(f"unknown current method '{method}'")
    return method, r


def cmd_current(args) -> int:
    cfg = resolved_config(args)
    model, drive, quad = _validated(cfg)
    converged = True
    try:
        method, res = _current_result(model, drive, quad, args.method)
    except NonConvergence as exc:
        converged = False
        method = args.method
        res = exc.estimate if isinstance(exc.estimate, transport.CurrentResult) \
            else transport.CurrentResult.from_through_dissipative(float(exc.estimate), 0.0)
        print(f"warning: quadrature did not converge ({exc})", file=sys.stderr)
    print(f"J = {res.j_through:.12g}")
    print(f"J_L = {res.j_left:.12g}")
    print(f"J_R = {res.j_right:.12g}")
    print(f"J_D = {res.j_dissipative:.12g}")
    path = _out_path(args, "current.csv")
    if path:
        write_csv(path, ["method", "j_through", "j_left", "j_right",
                         "j_dissipative", "converged"],
                  [(method, res.j_through, res.j_left, res.j_right,
                    res.j_dissipative, converged)],
                  {"command": "current", **cfg})
        print(f"wrote {path}")
    return EXIT_OK if converged else EXIT_NONCONVERGENCE


def cmd_occupation(args) -> int:
    lind = args.alpha is not None or args.beta is not None
    ferm = any(v is not None for v in (args.delta, args.mu, args.temperature))
    if lind and ferm:
        raise ModelError("give either alpha/beta or delta/mu/temperature, not both")
    quad = QuadratureSpec(rel_tol=args.rel_tol or 1e-9, abs_tol=args.abs_tol or 1e-12,
                          max_subdivisions=args.max_subdivisions or 2000)
    converged = True
    if lind:
        res = LindbladReservoir(alpha=args.alpha or 0.0, beta=args.beta or 0.0)
        value = transport.occupation_lindblad(res)
        echo = {"command": "occupation", "reservoir": {"alpha": res.alpha, "beta": res.beta}}
    else:
        res = FermionicReservoir(delta=args.delta if args.delta is not None else 1.0,
                                 mu=args.mu or 0.0,
                                 temperature=args.temperature if args.temperature is not None else 1.0)
        echo = {"command": "occupation",
                "reservoir": {"delta": res.delta, "mu": res.mu,
                              "temperature": res.temperature},
                "eps0": args.eps0}
        try:
            value = transport.occupation_fermionic(res, eps0=args.eps0, quad=quad)
        except NonConvergence as exc:
            converged, value = False, float(exc.estimate)
            print(f"warning: quadrature did not converge ({exc})", file=sys.stderr)
    print(f"occupation = {value:.12g}")
    path = _out_path(args, "occupation.csv")
    if path:
        write_csv(path, ["occupation", "converged"], [(value, converged)], echo)
        print(f"wrote {path}")
    return EXIT_OK if converged else EXIT_NONCONVERGENCE


def cmd_conductance(args) -> int:
    cfg = resolved_config(args)
    model = parse_model(cfg["model"])
    quad = parse_quad(cfg["quadrature"])
    delta = args.delta if args.delta is not None else 0.1
    temperature = args.temperature if args.temperature is not None else 1.0
    mu = args.mu if args.mu is not None else 0.0
    converged = True
    try:
        if args.high_t:
            g = transport.conductance_high_temperature(model, delta, temperature, quad)
        else:
            res = FermionicReservoir(delta=delta, mu=mu, temperature=temperature)
            g = transport.conductance_finite_temperature(
                model, FermionicDrive(left=res, right=res), quad)
    except NonConvergence as exc:
        converged, g = False, float(exc.estimate)
        print(f"warning: quadrature did not converge ({exc})", file=sys.stderr)
    print(f"g = {g:.12g}")
    print(f"T*g = {temperature * g:.12g}")
    path = _out_path(args, "conductance.csv")
    if path:
        write_csv(path, ["mode", "delta", "temperature", "mu", "g", "tg", "converged"],
                  [("high-t" if args.high_t else "finite-t", delta, temperature,
                    mu, g, temperature * g, converged)],
                  {"command": "conductance", "model": cfg["model"],
                   "delta": delta, "temperature": temperature, "mu": mu})
        print(f"wrote {path}")
    return EXIT_OK if converged else EXIT_NONCONVERGENCE


# ------------------------------------------------------------------- figures

def _figure_resonances(args, quad):
    n_list = args.n_list or [2, 4, 8, 16, 32]
    delta = args.delta if args.delta is not None else 0.1
    eps = np.linspace(-2.5, 2.5, args.points)
    cols, series = [], []
    for n in n_list:
        model = ChainModel(n_sites=n)
        vals = [float(np.abs(greens.retarded_rows(model, (delta, delta), e)[0][-1]) ** 2)
                for e in eps]
        cols.append((f"absg2_n{n}", vals))
        series.append((f"N = {n}", vals))
    header = ["eps"] + [c for c, _ in cols]
    rows = [(float(e), *(col[i] for _, col in cols)) for i, e in enumerate(eps)]
    echo = {"figure": "resonances", "delta": delta, "n_list": list(n_list),
            "points": args.points}
    plot = ("resonance spectrum |G_1N|^2", "energy", "|G_1N|^2", eps, series, False)
    return header, rows, echo, plot


def _figure_conductance(args, quad):
    n_list = args.n_list or list(range(2, 26))
    delta = args.delta if args.delta is not None else 0.1
    temps = args.t_list or [0.05, 0.2, 1.0, 5.0, 20.0]
    mu = args.mu if args.mu is not None else 0.0
    table = []
    for t in temps:
        res = FermionicReservoir(delta=delta, mu=mu, temperature=t)
        drive = FermionicDrive(left=res, right=res)
        table.append([t * transport.conductance_finite_temperature(
            ChainModel(n_sites=n), drive, quad) for n in n_list])
    header = ["n"] + [f"tg_t{t:g}" for t in temps]
    rows = [(n, *(table[k][i] for k in range(len(temps))))
            for i, n in enumerate(n_list)]
    echo = {"figure": "conductance", "delta": delta, "mu": mu,
            "n_list": list(n_list), "t_list": list(temps)}
    plot = ("thermally smeared conductance", "chain length N", "T * g",
            np.asarray(n_list, dtype=float),
            [(f"T = {t:g}", table[k]) for k, t in enumerate(temps)], False)
    return header, rows, echo, plot


def _nu_grid(args):
    if args.nu_list:
        return list(args.nu_list)
    return [round(0.2 * k, 10) for k in range(26)] + [8.0, 15.0, 30.0, 50.0]


def _figure_dissipative(args, quad, which: str):
    n_list = args.n_list or [2, 4, 6, 8]
    delta = args.delta if args.delta is not None else 1.0
    dmu = args.dmu
    nus = _nu_grid(args)
    table = []
    for n in n_list:
        col = []
        for nu in nus:
            kind = BulkKind.LOSS if nu > 0 else BulkKind.NONE
            model = ChainModel(n_sites=n, bulk_rate=nu, bulk_kind=kind)
            left = LindbladReservoir(alpha=(delta + dmu) / 2, beta=(delta - dmu) / 2)
            right = LindbladReservoir(alpha=(delta - dmu) / 2, beta=(delta + dmu) / 2)
            res = transport.current_dissipative_chain(
                model, LindbladDrive(left=left, right=right), quad)
            col.append(res.j_through if which == "current-loss" else res.j_dissipative)
        table.append(col)
    tag = "j" if which == "current-loss" else "jd"
    header = ["nu"] + [f"{tag}_n{n}" for n in n_list]
    rows = [(nu, *(table[k][i] for k in range(len(n_list))))
            for i, nu in enumerate(nus)]
    echo = {"figure": which, "delta": delta, "dmu": dmu,
            "n_list": list(n_list), "nu_list": nus}
    ylab = "J" if which == "current-loss" else "J_D"
    plot = (f"{ylab} vs bulk loss rate", "nu", ylab, np.asarray(nus),
            [(f"N = {n}", table[k]) for k, n in enumerate(n_list)], False)
    return header, rows, echo, plot


def cmd_figure(args) -> int:
    quad = QuadratureSpec(rel_tol=args.rel_tol or 1e-9, abs_tol=args.abs_tol or 1e-12,
                          max_subdivisions=args.max_subdivisions or 2000)
    builders = {"resonances": _figure_resonances,
                "conductance": _figure_conductance,
                "current-loss": lambda a, q: _figure_dissipative(a, q, "current-loss"),
                "jd": lambda a, q: _figure_dissipative(a, q, "jd")}
    if args.name not in builders:
        raise ModelError(f"unknown figure '{args.name}'; "
                         f"choose from {sorted(builders)}")
    header, rows, echo, plot = builders[args.name](args, quad)
    outdir = Path(args.outdir or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{args.name}.csv"
    write_csv(csv_path, header, rows, echo)
    print(f"wrote {csv_path}")
    if not args.no_plot:
        title, xlabel, ylabel, x, series, logx = plot
        png_path = outdir / f"{args.name}.png"
        plots.save_line_plot(png_path, x, series, xlabel, ylabel, title, logx)
        print(f"wrote {png_path}")
    return EXIT_OK


# --------------------------------------------------------------------- sweeps

def _path_get(cfg: dict, path: str):
    node = cfg
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        else:
            if part not in node:
                raise ModelError(f"sweep parameter '{path}' does not exist")
            node = node[part]
    if not isinstance(node, (int, float)) or isinstance(node, bool):
        raise ModelError(f"sweep parameter '{path}' is not numeric")
    return node


def _path_set(cfg: dict, path: str, value: float) -> None:
    parts = path.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def _sweep_point(payload):
    cfg_json, path, value, quantity = payload
    cfg = json.loads(cfg_json)
    _path_set(cfg, path, value)
    model, drive, quad = _validated(cfg)
    try:
        if quantity == "current":
            _, res = _current_result(model, drive, quad, "auto")
            return (value, res.j_through, res.j_left, res.j_right,
                    res.j_dissipative, True)
        res = transport.conductance_finite_temperature(model, drive, quad)
        return (value, res, None, None, None, True)
    except NonConvergence as exc:
        est = exc.estimate
        if isinstance(est, transport.CurrentResult):
            return (value, est.j_through, est.j_left, est.j_right,
                    est.j_dissipative, False)
        return (value, float(est), None, None, None, False)


def cmd_sweep(args) -> int:
    cfg = resolved_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if not values:
        raise ModelError("sweep needs a non-empty --values list")
    _path_get(cfg, args.param)  # existence + numeric check
    _validated(cfg)
    payloads = [(json.dumps(cfg), args.param, v, args.quantity) for v in values]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, payloads))
    else:
        results = [_sweep_point(p) for p in payloads]
    if args.quantity == "current":
        header = [args.param, "j_through", "j_left", "j_right",
                  "j_dissipative", "converged"]
    else:
        header = [args.param, "g", "", "", "", "converged"]
        header = [h for h in header if h != ""]
        results = [(r[0], r[1], r[5]) for r in results]
    path = _out_path(args, "sweep.csv") or Path("sweep.csv")
    write_csv(path, header, results,
              {"command": "sweep", "param": args.param, "values": values,
               "quantity": args.quantity, **cfg})
    print(f"wrote {path}")
    all_ok = all(row[-1] for row in results)
    return EXIT_OK if all_ok else EXIT_NONCONVERGENCE


# --------------------------------------------------------------- oracle check

def cmd_oracle_check(args) -> int:
    rng = np.random.RandomState(args.seed)
    nus = [float(v) for v in args.nu_list.split(",")]
    rows = []
    worst = 0.0
    for n in range(1, args.max_n + 1):
        for nu in nus:
            kinds = [BulkKind.NONE] if nu == 0 else [BulkKind.LOSS, BulkKind.GAIN]
            for kind in kinds:
                for _ in range(args.drives):
                    a_l, b_l, a_r, b_r = rng.uniform(0.05, 1.25, 4)
                    model = ChainModel(n_sites=n, bulk_rate=nu, bulk_kind=kind)
                    drive = LindbladDrive(left=LindbladReservoir(a_l, b_l),
                                          right=LindbladReservoir(a_r, b_r))
                    exact = oracle.solve(model, drive)
                    approx = transport.current_lindblad_generic(model, drive)
                    dj = abs(exact.currents.j_through - approx.j_through)
                    djd = abs(exact.currents.j_dissipative - approx.j_dissipative)
                    worst = max(worst, dj, djd)
                    rows.append((n, nu, kind.value, a_l, b_l, a_r, b_r,
                                 exact.currents.j_through, approx.j_through, dj,
                                 exact.currents.j_dissipative,
                                 approx.j_dissipative, djd))
    print(f"{'N':>2} {'nu':>5} {'kind':>5} {'|dJ|':>10} {'|dJD|':>10}")
    for r in rows:
        print(f"{r[0]:>2} {r[1]:>5g} {r[2]:>5} {r[9]:>10.2e} {r[12]:>10.2e}")
    print(f"worst deviation: {worst:.3e} (tolerance {args.tol:g})")
    path = _out_path(args, "oracle_check.csv")
    if path:
        write_csv(path, ["n", "nu", "bulk_kind", "alpha_l", "beta_l", "alpha_r",
                         "beta_r", "j_oracle", "j_formula", "dj",
                         "jd_oracle", "jd_formula", "djd"],
                  rows, {"command": "oracle-check", "max_n": args.max_n,
                         "seed": args.seed, "nu_list": nus, "drives": args.drives})
        print(f"wrote {path}")
    return EXIT_OK if worst < args.tol else EXIT_VALIDATION


# --------------------------------------------------------------------- parser

def _add_model_args(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--preset", choices=["single-site", "chain"])
    p.add_argument("--n", type=int, help="number of sites")
    p.add_argument("--hopping", type=float)
    p.add_argument("--onsite", help="comma-separated onsite energies")
    p.add_argument("--bulk-rate", dest="bulk_rate", type=float)
    p.add_argument("--bulk-kind", dest="bulk_kind", choices=["none", "loss", "gain"])


def _add_drive_args(p):
    p.add_argument("--drive", choices=["lindblad", "fermionic"])
    p.add_argument("--alpha-l", dest="alpha_l", type=float)
    p.add_argument("--beta-l", dest="beta_l", type=float)
    p.add_argument("--alpha-r", dest="alpha_r", type=float)
    p.add_argument("--beta-r", dest="beta_r", type=float)
    p.add_argument("--delta", type=float, help="hybridization (both edges)")
    p.add_argument("--delta-l", dest="delta_l", type=float)
    p.add_argument("--delta-r", dest="delta_r", type=float)
    p.add_argument("--mu-l", dest="mu_l", type=float)
    p.add_argument("--mu-r", dest="mu_r", type=float)
    p.add_argument("--temperature", type=float)


def _add_quad_args(p):
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--abs-tol", dest="abs_tol", type=float)
    p.add_argument("--max-subdivisions", dest="max_subdivisions", type=int)


def _add_output_args(p):
    p.add_argument("--outdir", "-o", help="directory for CSV (and PNG) output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="openchain",
        description="Steady-state transport of boundary-driven fermionic chains "
                    "(units: hbar = e = k_B = 1, energies in units of |J|).")
    ap.add_argument("--version", action="version", version=f"openchain {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a configuration and report every violation")
    _add_model_args(p); _add_drive_args(p)

    p = sub.add_parser("current", help="steady-state currents J, J_L, J_R, J_D")
    _add_model_args(p); _add_drive_args(p); _add_quad_args(p); _add_output_args(p)
    p.add_argument("--method", default="auto",
                   choices=["auto", "generic", "free", "landauer", "mw", "dissipative"])

    p = sub.add_parser("occupation", help="stationary occupation of a single driven site")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--temperature", type=float)
    p.add_argument("--eps0", type=float, default=0.0, help="level energy")
    _add_quad_args(p); _add_output_args(p)

    p = sub.add_parser("conductance", help="linear conductance of a chain")
    _add_model_args(p); _add_quad_args(p); _add_output_args(p)
    p.add_argument("--delta", type=float, help="edge hybridization (default 0.1)")
    p.add_argument("--temperature", type=float, help="temperature (default 1)")
    p.add_argument("--mu", type=float, help="common chemical potential (default 0)")
    p.add_argument("--high-t", dest="high_t", action="store_true",
                   help="use the high-temperature limit formula")

    p = sub.add_parser("figure", help="emit the data (CSV + PNG) behind a named figure")
    p.add_argument("name", help="resonances | conductance | current-loss | jd")
    p.add_argument("--n", "--n-list", dest="n_list",
                   type=lambda s: [int(x) for x in s.split(",")],
                   help="comma-separated chain lengths")
    p.add_argument("--t-list", dest="t_list",
                   type=lambda s: [float(x) for x in s.split(",")],
                   help="comma-separated temperatures (conductance)")
    p.add_argument("--nu-list", dest="nu_list",
                   type=lambda s: [float(x) for x in s.split(",")],
                   help="comma-separated bulk rates (current-loss, jd)")
    p.add_argument("--delta", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--dmu", type=float, default=0.4,
                   help="Lindblad bias alpha_L - beta_L (dissipative figures)")
    p.add_argument("--points", type=int, default=1201, help="energy grid size")
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    _add_quad_args(p); _add_output_args(p)

    p = sub.add_parser("sweep", help="sweep one numeric config field")
    _add_model_args(p); _add_drive_args(p); _add_quad_args(p); _add_output_args(p)
    p.add_argument("--param", required=True,
                   help="dotted path into the config, e.g. drive.left.alpha")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--quantity", default="current", choices=["current", "conductance"])
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("oracle-check",
                       help="compare the generic formula against the exact Liouvillian")
    p.add_argument("--max-n", dest="max_n", type=int, default=4)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--nu-list", dest="nu_list", default="0,0.3,1")
    p.add_argument("--drives", type=int, default=3, help="random drives per case")
    p.add_argument("--tol", type=float, default=1e-8)
    _add_output_args(p)
    return ap


_COMMANDS = {
    "validate": cmd_validate,
    "current": cmd_current,
    "occupation": cmd_occupation,
    "conductance": cmd_conductance,
    "figure": cmd_figure,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ModelError as exc:
        print(f"invalid: {exc}" if not str(exc).startswith("invalid") else str(exc),
              file=sys.stderr)
        return EXIT_VALIDATION
    except NonConvergence as exc:
        print(f"quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command line front-end: config parsing, subcommand dispatch, CSV/JSON output.

Usage: fermibox [--config PATH] [--out DIR] [--tol X] [--threads N] COMMAND [options]
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import multiprocessing
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import boundary, boxspec, detkit, fse, jost, potentials, ssf
from .exceptions import ConfigError, FermiboxError

TOL_ENV = "FERMIBOX_TOL"
DEFAULT_TOL = 1e-6
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# -- configuration ---------------------------------------------------------

@dataclass
class RunConfig:
    potential: potentials.Potential = field(default_factory=potentials.square_well)
    bc: boundary.BoundaryCondition = field(default_factory=boundary.dirichlet)
    halfline_bc: fse.HalfLineBC = field(default_factory=fse.halfline_dirichlet)
    nu: float = 2.0
    eta: float = 0.0
    weight: potentials.WeightFunction = field(default_factory=potentials.identity_weight)
    lengths: tuple = (25.0, 50.0, 100.0, 200.0, 400.0)
    ns: tuple = (10, 20, 40, 80)
    tol: float = DEFAULT_TOL
    b: float = None
    nodes: int = detkit.DEFAULT_NODES


def _number(text, where):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {text!r}") from None


def _complex(text, where):
    try:
        return complex(text.strip().replace("i", "j"))
    except ValueError:
        raise ConfigError(f"{where}: expected a complex number, got {text!r}") from None


def _matrix(text, where):
    rows = [r for r in text.split(";") if r.strip()]
    try:
        m = np.array([[_complex(x, where) for x in r.split(",")] for r in rows])
    except ValueError:
        raise ConfigError(f"{where}: ragged matrix {text!r}") from None
    if m.shape != (2, 2):
        raise ConfigError(f"{where}: expected a 2x2 matrix written 'a,b;c,d'")
    return m


def _potential(section, where):
    kind = section.get("kind", "square-well").strip()
    if kind == "table":
        if "path" not in section:
            raise ConfigError(f"{where}.path: required for kind = table")
        try:
            return potentials.load_table(section["path"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{where}.path: {exc}") from None
    if kind not in potentials.PRESETS:
        raise ConfigError(f"{where}.kind: unknown potential {kind!r}")
    params = {k: _number(v, f"{where}.{k}") for k, v in section.items() if k != "kind"}
    try:
        return potentials.PRESETS[kind](**params)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _boundary(section, where):
    if "A" in section or "a_matrix" in section:
        A = _matrix(section.get("a_matrix", section.get("A")), f"{where}.a_matrix")
        B = _matrix(section.get("b_matrix", section.get("B", "0,0;0,0")), f"{where}.b_matrix")
        return boundary.BoundaryCondition(A, B)
    preset = section.get("preset", "dirichlet").strip()
    if preset == "robin":
        right = _number(section.get("angle_right", "0"), f"{where}.angle_right")
        left = _number(section.get("angle_left", str(right)), f"{where}.angle_left")
        return boundary.robin(right, left)
    return boundary.from_name(preset)


def _halfline(section, where):
    vals = {k: _complex(section.get(k, d), f"{where}.{k}")
            for k, d in (("a", "1"), ("b", "0"), ("end_a", "1"), ("end_b", "0"))}
    try:
        return fse.HalfLineBC(vals["a"], vals["b"], vals["end_a"], vals["end_b"])
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _weight(text, where):
    text = text.strip()
    if text == "identity":
        return potentials.identity_weight()
    if text.startswith("power:"):
        return potentials.power_weight(_number(text.split(":", 1)[1], where))
    raise ConfigError(f"{where}: unknown weight {text!r} (identity or power:p)")


def load_config(path=None):
    """Read an INI file into a RunConfig; missing sections keep the defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if parser.has_section("potential"):
        cfg.potential = _potential(parser["potential"], "potential")
    if parser.has_section("boundary"):
        cfg.bc = _boundary(parser["boundary"], "boundary")
    if parser.has_section("halfline"):
        cfg.halfline_bc = _halfline(parser["halfline"], "halfline")
    if parser.has_section("run"):
        run = parser["run"]
        cfg.nu = _number(run.get("nu", str(cfg.nu)), "run.nu")
        cfg.eta = _number(run.get("eta", str(cfg.eta)), "run.eta")
        cfg.weight = _weight(run.get("weight", "identity"), "run.weight")
        if "lengths" in run:
            cfg.lengths = tuple(_number(x, "run.lengths") for x in run["lengths"].split(","))
        if "ns" in run:
            cfg.ns = tuple(int(_number(x, "run.ns")) for x in run["ns"].split(","))
        if "b" in run:
            cfg.b = _number(run["b"], "run.b")
        if "nodes" in run:
            cfg.nodes = int(_number(run["nodes"], "run.nodes"))
        if "tol" in run:
            cfg.tol = _number(run["tol"], "run.tol")
    if cfg.nu <= 0:
        raise ConfigError("run.nu: the Fermi energy must be positive")
    return cfg


def resolve_tol(cfg, flag):
    if flag is not None:
        return float(flag)
    env = os.environ.get(TOL_ENV)
    if env:
        return _number(env, TOL_ENV)
    return cfg.tol


# -- output ----------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.15g}"


def _emit_csv(header, rows, out, name):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _write(buf.getvalue(), out, name)


def _emit_json(record, out, name):
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    _write(text, out, name)


def _write(text, out, name):
    if out is None:
        sys.stdout.write(text)
        return
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)


# -- subcommands -----------------------------------------------------------

def cmd_scatter(cfg, args, tol):
    ks = np.round(np.arange(args.kmin, args.kmax + 0.5 * args.kstep, args.kstep), 12)
    data = jost.scattering_many(cfg.potential, ks)
    rows, worst = [], 0.0
    for d in data:
        defect = d.unitarity_defect()
        worst = max(worst, defect)
        rows.append((d.k.real, d.t.real, d.t.imag, d.r1.real, d.r1.imag,
                     d.r2.real, d.r2.imag, defect))
    _emit_csv(["k", "t_re", "t_im", "r1_re", "r1_im", "r2_re", "r2_im", "unitarity_defect"],
              rows, args.out, "scatter.csv")
    return EXIT_OK if worst < tol else EXIT_FAIL


def cmd_ssf(cfg, args, tol):
    lams = np.linspace(args.lam_min, args.lam_max, args.points)
    lams = lams[lams != 0]
    shift = ssf.spectral_shift(cfg.potential, lams)
    _emit_csv(["lambda", "xi"], zip(lams, shift(lams)), args.out, "ssf.csv")
    return EXIT_OK


def cmd_fumi(cfg, args, tol):
    b = cfg.b if cfg.b is not None else max(cfg.potential.l1_norm(), 1.0)
    xi_form = ssf.fumi(cfg.potential, cfg.nu, cfg.weight)
    contour = ssf.fumi_contour(cfg.potential, cfg.nu, b, cfg.weight, n_nodes=cfg.nodes)
    _emit_json({"nu": cfg.nu, "f": cfg.weight.name, "fumi_xi_form": xi_form,
                "fumi_contour_form": contour, "b": b}, args.out, "fumi.json")
    return EXIT_OK if abs(xi_form - contour) < tol else EXIT_FAIL


def cmd_boxspec(cfg, args, tol):
    L = args.L if args.L is not None else cfg.lengths[0]
    cutoff = args.cutoff if args.cutoff is not None else cfg.nu
    if args.free:
        spec = boxspec.free_spectrum(cfg.bc, L, cutoff)
    else:
        spec = boxspec.perturbed_spectrum(cfg.potential, cfg.bc, L, cutoff)
    _emit_csv(["index", "eigenvalue", "multiplicity"], spec.rows(), args.out, "boxspec.csv")
    return EXIT_OK


def _converge_point(job):
    potential, bc, L, nu, weight = job
    d = boxspec.energy_difference(potential, bc, L, nu, weight, strict=False)
    return d.E_L, d.M, d.N, d.xi_L


_POOL_TASK = None


def _pool_worker(index):
    func, jobs = _POOL_TASK
    return func(jobs[index])


def _pool_map(func, jobs, threads):
    """Order-stable map; forked workers inherit the jobs, since potentials hold closures."""
    global _POOL_TASK
    if threads and threads > 1 and "fork" in multiprocessing.get_all_start_methods():
        _POOL_TASK = (func, jobs)
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
                return list(pool.map(_pool_worker, range(len(jobs))))
        finally:
            _POOL_TASK = None
    return [func(j) for j in jobs]


def cmd_converge(cfg, args, tol):
    nu, f = cfg.nu, cfg.weight
    lengths = fse.whole_line_lengths(nu, cfg.eta, cfg.ns)
    fumi_value = ssf.fumi(cfg.potential, nu, f)
    f_nu = float(np.real(f.value(nu)))
    jobs = [(cfg.potential, cfg.bc, L, nu, f) for L in lengths]
    results = _pool_map(_converge_point, jobs, args.threads)
    rows = []
    for L, (E, M, N, xi_L) in zip(lengths, results):
        est = E + f_nu * xi_L
        rows.append((L, E, M, N, xi_L, est, L * (est - fumi_value)))
    _emit_csv(["L", "E_L", "M", "N", "xi_L", "E_L_plus_f_xi_L", "L_residual_vs_fumi"],
              rows, args.out, "converge.csv")
    return EXIT_OK


def cmd_fse(cfg, args, tol):
    nu, f, eta = cfg.nu, cfg.weight, cfg.eta
    if args.halfline:
        closed = fse.halfline_fse(cfg.potential, cfg.halfline_bc, nu, eta, f)
        xi_nu = fse.halfline_xi(cfg.potential, cfg.halfline_bc, nu)
        record = {"nu": nu, "eta": eta, "bc": "halfline", "fse_closed": closed,
                  "xi_nu": xi_nu, "fse_from_xi": fse.fse_from_xi(xi_nu, nu, eta, f=f)}
        if args.box:
            hb = cfg.halfline_bc
            fumi_value = fse.halfline_fumi(cfg.potential, hb, nu, f)
            f_nu = float(np.real(f.value(nu)))
            lengths = fse.halfline_lengths(nu, eta, cfg.ns)
            scaled = []
            for L in lengths:
                d = boxspec.halfline_energy_difference(cfg.potential, (hb.a, hb.b), (hb.A, hb.B),
                                                       L, nu, f, strict=False)
                scaled.append(L * (d.E_L + f_nu * d.xi_L - fumi_value))
            record["fse_box_extrapolated"] = fse.richardson(lengths, scaled)
        _emit_json(record, args.out, "fse.json")
        return EXIT_OK
    phi = math.pi * eta
    closed = fse.fse_closed(cfg.potential, cfg.bc, nu, phi, f)
    integral = fse.fse_integral(cfg.potential, cfg.bc, nu, phi, f)
    record = {"nu": nu, "eta": eta, "bc": cfg.bc.name, "fse_closed": closed,
              "fse_integral": integral}
    if args.box:
        fumi_value = ssf.fumi(cfg.potential, nu, f)
        f_nu = float(np.real(f.value(nu)))
        lengths = fse.whole_line_lengths(nu, eta, cfg.ns)
        results = _pool_map(_converge_point, [(cfg.potential, cfg.bc, L, nu, f) for L in lengths],
                            args.threads)
        scaled = [L * (E + f_nu * xi - fumi_value) for L, (E, _, _, xi) in zip(lengths, results)]
        record["fse_box_extrapolated"] = fse.richardson(lengths, scaled)
    _emit_json(record, args.out, "fse.json")
    return EXIT_OK if abs(closed - integral) < tol else EXIT_FAIL


def cmd_verify(cfg, args, tol):
    p = cfg.potential
    checks = []
    k = math.sqrt(cfg.nu)
    lhs, rhs, defect = detkit.jost_pais_check(p, k, n_nodes=max(cfg.nodes, 800))
    checks.append({"name": "jost_pais", "defect": defect})
    if max(abs(p.support[0]), abs(p.support[1])) < 5.0:
        lhs, rhs, defect = detkit.factorization_check(p, cfg.bc, 2.0 + 0.5j, 5.0, 600)
        checks.append({"name": "factorization", "defect": defect})
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(5):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        H1 = x @ x.conj().T + 0.2 * np.eye(2)
        y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        H2 = 0.3 * (y + y.conj().T)
        if np.linalg.eigvalsh(H1 + H2).min() <= 0.2:
            continue
        worst = max(worst, abs(fse.arccosh_closed_form(H1, H2) - fse.arccosh_quadrature(H1, H2)))
    checks.append({"name": "arccosh_identity", "defect": worst})
    for c in checks:
        c["pass"] = bool(c["defect"] < tol)
    _emit_json({"tol": tol, "checks": checks}, args.out, "verify.json")
    return EXIT_OK if all(c["pass"] for c in checks) else EXIT_FAIL


# -- entry point -----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="fermibox", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--out", help="output directory (default: stdout)")
    parser.add_argument("--tol", type=float, help=f"tolerance (overrides ${TOL_ENV} and config)")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="t, r1, r2 on a k-grid")
    p.add_argument("--kmin", type=float, default=0.1)
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--kstep", type=float, default=0.1)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("ssf", help="spectral shift function on an energy grid")
    p.add_argument("--lam-min", type=float, default=-2.0)
    p.add_argument("--lam-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=121)
    p.set_defaults(func=cmd_ssf)

    p = sub.add_parser("fumi", help="Fumi term in xi form and contour form")
    p.set_defaults(func=cmd_fumi)

    p = sub.add_parser("boxspec", help="box eigenvalues")
    p.add_argument("--L", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--free", action="store_true", help="free box instead of H + V")
    p.set_defaults(func=cmd_boxspec)

    p = sub.add_parser("converge", help="energy differences along the eta-fixed sequence")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("fse", help="finite size energy")
    p.add_argument("--halfline", action="store_true")
    p.add_argument("--box", action="store_true", help="add the box extrapolation")
    p.set_defaults(func=cmd_fse)

    p = sub.add_parser("verify", help="determinant identities and the arccosh identity")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        tol = resolve_tol(cfg, args.tol)
        return args.func(cfg, args, tol)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FermiboxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

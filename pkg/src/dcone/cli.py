"""Command-line front end: ``dcone <subcommand> [flags]``.

Exit codes
----------
0   success, every assertion of the subcommand holds
1   the computation finished but a trend or slope assertion failed
2   linear interval assertion failed, or invalid input data
3   elastica regime error or non-convergence (report still written)
64  usage error
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, DconeError, RegimeError

EXIT_OK = 0
EXIT_CHECKS = 1
EXIT_ASSERT = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64


# -- deterministic JSON --------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        # JSON has no NaN or infinity
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def dumps(obj):
    """JSON text with floats at 17 significant digits and a trailing newline."""
    return _encode(_plain(obj), 2, 0) + "\n"


def config_hash(obj):
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


# -- manifest ------------------------------------------------------------------------

@dataclass
class RunManifest:
    """Provenance record of one invocation; the only file carrying timestamps."""

    subcommand: str
    config_hash: str
    inputs: dict
    version: str = __version__
    started: str = ""
    wall_time: float = 0.0
    exit_code: int = 0
    outputs: list = field(default_factory=list)

    def verify(self):
        """True when every listed output exists and is non-empty."""
        return all(Path(p).is_file() and Path(p).stat().st_size > 0 for p in self.outputs)

    def write(self, path):
        Path(path).write_text(dumps(asdict(self)))


class _Run:
    """Collects outputs and writes the manifest on exit."""

    def __init__(self, subcommand, inputs, manifest_path):
        self.manifest = RunManifest(subcommand, config_hash(inputs), inputs)
        self.path = manifest_path
        self.t0 = time.perf_counter()
        self.manifest.started = time.strftime("%Y-%m-%dT%H:%M:%S%z")

    def write(self, path, text):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.manifest.outputs.append(str(path))

    def finish(self, code):
        self.manifest.wall_time = time.perf_counter() - self.t0
        self.manifest.exit_code = code
        if self.path is not None:
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
            self.manifest.write(self.path)
        return code


def _manifest_path(args, out_dir=None):
    if args.manifest:
        return args.manifest
    if out_dir is not None:
        return str(Path(out_dir) / "manifest.json")
    return None


# -- argument parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser():
    parser = _Parser(prog="dcone", description="d-cone minimizers: linear, elastica and recovery solvers")
    parser.add_argument("--version", action="version", version=f"dcone {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("linear-solve", help="closed-form one-fold minimizer of the linear problem")
    p.add_argument("--json", metavar="FILE", help="write the solution as JSON")
    p.add_argument("--profile", metavar="FILE", help="write the profile CSV s,h,kappa")
    p.add_argument("--certify", action="store_true", help="run the global minimizer search")
    p.add_argument("--samples", type=int, default=2048, help="profile samples (default 2048)")
    p.add_argument("--manifest", metavar="FILE")

    p = sub.add_parser("elastica", help="minimize the obstacle elastica on the sphere")
    p.add_argument("--eps", type=float, help="obstacle height epsilon")
    p.add_argument("--n", type=int, help="theta grid size (default 2048)")
    p.add_argument("--init", help="one-bump, two-bump, or a profile CSV with an alpha column")
    p.add_argument("--config", metavar="FILE", help="JSON solver config; flags take precedence")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--manifest", metavar="FILE")

    p = sub.add_parser("sweep", help="epsilon sweep against the linear minimizer")
    p.add_argument("--eps-list", type=_float_list, default=[0.1, 0.05, 0.02, 0.01])
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--out", default=".")
    p.add_argument("--manifest", metavar="FILE")

    p = sub.add_parser("gamma", help="recovery-sequence convergence of the sheet energy")
    p.add_argument("--curve", required=True,
                   help="curve CSV (theta,alpha,... or param,x,y,z), or 'equator'")
    p.add_argument("--h-list", type=_float_list, default=[1e-2, 1e-3, 1e-4, 1e-5])
    p.add_argument("--eps", type=float, help="obstacle height for alpha CSVs (default min alpha)")
    p.add_argument("--resample", type=int, default=512, help="unit-speed nodes (default 512)")
    p.add_argument("--out", default=".")
    p.add_argument("--manifest", metavar="FILE")

    p = sub.add_parser("selftest", help="run the deterministic invariant suite")
    p.add_argument("--out", default=".")
    p.add_argument("--manifest", metavar="FILE")
    return parser


def _threads():
    try:
        return max(1, int(os.environ.get("DCONE_THREADS", "1")))
    except ValueError:
        return 1


# -- subcommands ---------------------------------------------------------------------

def cmd_linear_solve(args):
    from .linear_problem import global_minimizer_search, solve_one_fold

    inputs = {"certify": args.certify, "samples": args.samples,
              "json": args.json, "profile": args.profile}
    run = _Run("linear-solve", inputs, _manifest_path(args))
    sol = solve_one_fold()
    print(f"s_hat       = {sol.s_hat:.17g}")
    print(f"Lambda      = {sol.Lambda:.17g}")
    print(f"energy      = {sol.energy:.17g}")
    print(f"fold_length = {sol.fold_length:.17g}")
    failed = []
    for name, value, lo, hi in (
        ("s_hat", sol.s_hat, 1.21, 1.215),
        ("Lambda", sol.Lambda, 3.79, 3.82),
        ("fold_length", sol.fold_length, 2.42, 2.43),
    ):
        if not lo < value < hi:
            failed.append(f"{name} = {value:.17g} not in ({lo}, {hi})")
    result = sol.to_json(args.samples)
    result["fold_length"] = sol.fold_length
    if args.certify:
        _, cert = global_minimizer_search()
        one, two = cert.one_fold.energy, cert.two_fold.energy
        if one <= 67.4 and two >= 80.0:
            print(f"N=1 energy ≤ 67.4 < 80 ≤ N=2 energy  ({one:.6f} vs {two:.6f})")
        else:
            failed.append(f"energy separation: N=1 {one:.6f} (need <= 67.4), "
                          f"N=2 {two:.6f} (need >= 80)")
        for name, value, ok in cert.spot_checks:
            if not ok:
                failed.append(f"{name} (value {value:.17g})")
        if not cert.passed and not failed:
            failed.append("certificate bounds")
        result["certificate"] = cert.to_dict()
    if args.json:
        run.write(args.json, dumps(result))
    if args.profile:
        run.write(args.profile, sol.to_csv(args.samples))
    for msg in failed:
        print(f"FAILED: {msg}", file=sys.stderr)
    return run.finish(EXIT_ASSERT if failed else EXIT_OK)


def _elastica_settings(args):
    from .elastica import SolverConfig

    settings = {"epsilon": None, "n": 2048, "init": "one-bump"}
    overrides = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        unknown = set(cfg) - {"epsilon", "n", "init"} - set(SolverConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in cfg.items():
            if key in settings:
                settings[key] = value
            else:
                overrides[key] = value
    if args.eps is not None:
        settings["epsilon"] = args.eps
    if args.n is not None:
        settings["n"] = args.n
    if args.init is not None:
        settings["init"] = args.init
    if settings["epsilon"] is None:
        raise ValueError("epsilon is required (--eps or config file)")
    return settings, overrides


def _initial_from_file(path, n, epsilon):
    from scipy.interpolate import CubicSpline

    from .elastica import from_csv

    alpha = from_csv(Path(path).read_text(), epsilon).alpha
    if alpha.size != n:
        m = alpha.size
        theta = np.arange(m + 1) * (2.0 * math.pi / m)
        spline = CubicSpline(theta, np.append(alpha, alpha[0]), bc_type="periodic")
        alpha = spline(np.arange(n) * (2.0 * math.pi / n))
    return np.maximum(alpha, epsilon)


def cmd_elastica(args):
    from .elastica import SolverConfig, minimize, to_csv

    out = Path(args.out)
    try:
        settings, overrides = _elastica_settings(args)
    except (ValueError, OSError) as exc:
        print(f"dcone elastica: {exc}", file=sys.stderr)
        return EXIT_USAGE
    eps, n, init = float(settings["epsilon"]), int(settings["n"]), settings["init"]
    cfg = SolverConfig(**overrides)
    if init not in ("one-bump", "two-bump"):
        try:
            cfg.init_alpha = _initial_from_file(init, n, eps)
        except (OSError, DconeError, ValueError) as exc:
            print(f"dcone elastica: cannot read initial profile: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        cfg.init = init
    inputs = {"epsilon": eps, "n": n, "init": init, "config": cfg.to_dict()}
    run = _Run("elastica", inputs, _manifest_path(args, out))
    report = {"epsilon": eps, "n": n, "init": init, "config": cfg.to_dict()}
    curve, code = None, EXIT_OK
    try:
        curve, rep = minimize(eps, n, cfg)
        report["report"] = rep.to_dict()
    except ConvergenceError as exc:
        curve, code = exc.curve, EXIT_SOLVER
        report["error"] = str(exc)
        report["report"] = exc.report.to_dict() if exc.report is not None else None
    except (RegimeError, DconeError) as exc:
        code = EXIT_SOLVER
        report["error"] = f"{type(exc).__name__}: {exc}"
        report["report"] = None
    if curve is not None:
        run.write(out / "profile.csv", to_csv(curve))
    run.write(out / "report.json", dumps(report))
    rep = report["report"]
    if rep is not None:
        print(f"converged={rep['converged']} n_lift={rep['n_lift']} "
              f"lift_lengths={[round(v, 6) for v in rep['lift_lengths']]} "
              f"energy/eps^2={rep['final_energy'] / eps**2:.6f} "
              f"1+lambda_hat={1.0 + rep['lambda_hat']:.6f}")
    if code:
        print(f"dcone elastica: {report['error']}", file=sys.stderr)
    return run.finish(code)


def _table_csv(rows, keys):
    lines = [",".join(keys)]
    for row in rows:
        cells = []
        for k in keys:
            v = row.get(k)
            if isinstance(v, (bool, np.bool_)):
                cells.append(str(bool(v)).lower())
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(format(float(v), ".17g"))
            else:
                cells.append("" if v is None else str(v).replace(",", ";"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


SWEEP_COLUMNS = ["epsilon", "converged", "n_lift", "lift_length", "Lambda2_hat", "lambda_hat",
                 "lambda_al", "energy_ratio", "alpha_ratio", "alpha2_ratio", "kappa_ratio", "error"]


def cmd_sweep(args):
    from .elastica import sweep_epsilon
    from .linear_problem import solve_one_fold

    out = Path(args.out)
    workers = _threads()
    inputs = {"eps_list": args.eps_list, "n": args.n, "workers": workers}
    run = _Run("sweep", inputs, _manifest_path(args, out))
    lin = solve_one_fold()
    try:
        rows, checks = sweep_epsilon(args.eps_list, args.n, workers=workers, reference=lin)
    except (RegimeError, ValueError) as exc:
        print(f"dcone sweep: {exc}", file=sys.stderr)
        return run.finish(EXIT_USAGE)
    run.write(out / "sweep.csv", _table_csv(rows, SWEEP_COLUMNS))
    run.write(out / "sweep.json", dumps({
        "rows": rows, "checks": checks,
        "reference": {"Lambda2": lin.Lambda**2, "bending": lin.bending,
                      "fold_length": lin.fold_length},
    }))
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return run.finish(EXIT_OK if all(checks.values()) else EXIT_CHECKS)


def load_gamma(path, epsilon=None, resample=512):
    """Unit-speed curve of period 2 pi from a profile CSV, or the equator."""
    from .elastica import from_csv as alpha_from_csv
    from .elastica import unit_speed_curve
    from .sphere_curve import equator
    from .sphere_curve import from_csv as points_from_csv

    if path == "equator":
        return equator(resample)
    text = Path(path).read_text()
    header = text.split("\n", 1)[0].strip().split(",")
    if "alpha" in header:
        col = header.index("alpha")
        rows = [r for r in text.strip().splitlines()[1:] if r]
        eps = epsilon or min(float(r.split(",")[col]) for r in rows)
        return unit_speed_curve(alpha_from_csv(text, eps), resample)
    return points_from_csv(text)


def cmd_gamma(args):
    from .recovery import recovery_convergence

    out = Path(args.out)
    workers = _threads()
    inputs = {"curve": args.curve, "h_list": args.h_list, "eps": args.eps,
              "resample": args.resample, "workers": workers}
    run = _Run("gamma", inputs, _manifest_path(args, out))
    try:
        gamma = load_gamma(args.curve, args.eps, args.resample)
        res = recovery_convergence(gamma, args.h_list, workers=workers)
    except (OSError, DconeError, ValueError) as exc:
        print(f"dcone gamma: {exc}", file=sys.stderr)
        return run.finish(EXIT_ASSERT)
    run.write(out / "recovery.csv", res.to_csv())
    run.write(out / "recovery.json", dumps(res.to_dict()))
    print(f"E0 = {res.e0:.12g}  slope = {res.slope:.6f}  a = {res.rate_a:.6g}")
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return run.finish(EXIT_OK if res.checks["slope"] else EXIT_CHECKS)


def cmd_selftest(args):
    from .selftest import run_selftest

    out = Path(args.out)
    run = _Run("selftest", {}, _manifest_path(args, out))
    report = run_selftest()
    run.write(out / "selftest.json", dumps(report))
    for name, suite in report.items():
        if isinstance(suite, dict):
            print(f"{'PASS' if suite['passed'] else 'FAIL'} {name}")
    return run.finish(EXIT_OK if report["passed"] else EXIT_CHECKS)


COMMANDS = {
    "linear-solve": cmd_linear_solve,
    "elastica": cmd_elastica,
    "sweep": cmd_sweep,
    "gamma": cmd_gamma,
    "selftest": cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

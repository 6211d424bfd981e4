"""Command-line front end.

Subcommands ``propagate``, ``egorov``, ``convergence`` and ``check``.  Exit
codes: 0 success, 1 configuration or usage error, 2 numerical failure,
3 invariant check failure.  CSV output is comma separated with a header row
and 17 significant digits.
"""

from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from . import checks
from .config import ExperimentConfig, load_config
from .dynamics import SimParams
from .egorov import GaussianState
from .errors import ConfigError, GWPError
from .experiment import egorov_curves, gated_convergence_point, propagate_all
from .geometry import sigma
from .integrators import StepperConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3


class UsageError(ConfigError):
    pass


def _fmt(x) -> str:
    return "%.17g" % x


def _matrix_names(prefix: str, n: int) -> list[str]:
    sep = "" if n < 10 else "_"
    return [f"{prefix}{i + 1}{sep}{j + 1}" for i in range(n) for j in range(n)]


def _write_rows(out, header, rows) -> None:
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(x) for x in row) + "\n")


def _single_hbar(cfg: ExperimentConfig, command: str) -> float:
    if len(cfg.hbar) != 1:
        raise UsageError(f"{command} takes a single hbar value, got {len(cfg.hbar)}")
    return cfg.hbar[0]


def _stepper(cfg: ExperimentConfig) -> StepperConfig:
    return StepperConfig(cfg.dt, cfg.t_final, cfg.record_stride)


def propagate_table(cfg: ExperimentConfig):
    """Header and rows for the propagate run."""
    d = cfg.dim
    params = SimParams(_single_hbar(cfg, "propagate"), cfg.mass)
    tr = propagate_all(cfg.z0, cfg.C0, params, cfg.build_potential(), _stepper(cfg))
    header = (
        ["t"] + [f"q{k + 1}" for k in range(d)] + [f"p{k + 1}" for k in range(d)]
        + _matrix_names("A", d) + _matrix_names("B", d) + _matrix_names("S", 2 * d) + ["H", "h"]
        + [f"qcl{k + 1}" for k in range(d)] + [f"pcl{k + 1}" for k in range(d)] + ["Vhbar", "Vcl"]
    )
    rows = np.column_stack([
        tr.t, tr.z, tr.A.reshape(len(tr.t), -1), tr.B.reshape(len(tr.t), -1),
        tr.Sigma.reshape(len(tr.t), -1), tr.H, tr.h, tr.z_cl, tr.V_hbar, tr.V_cl,
    ])
    return header, rows


def egorov_table(cfg: ExperimentConfig):
    d = cfg.dim
    params = SimParams(_single_hbar(cfg, "egorov"), cfg.mass)
    state = GaussianState(cfg.z0, sigma(cfg.C0), params.hbar)
    eg = egorov_curves(state, params, cfg.build_potential(), _stepper(cfg), cfg.n_samples, cfg.seed)
    names = [f"q{k + 1}" for k in range(d)] + [f"p{k + 1}" for k in range(d)] + ["V"]
    header = ["t"] + [f"mean_{n}" for n in names] + [f"se_{n}" for n in names]
    rows = np.column_stack([eg.t, eg.mean_z, eg.mean_V, eg.se_z, eg.se_V])
    return header, rows


def convergence_table(cfg: ExperimentConfig):
    if len(cfg.hbar) < 2:
        raise UsageError("convergence needs at least two hbar values, e.g. hbar = [0.2, 0.1, 0.05]")
    pot = cfg.build_potential()
    header = ["hbar", "t", "err_semi", "err_cl", "mc_se", "n_samples", "log_hbar", "log_err_semi", "log_err_cl"]
    rows = []
    for hbar in cfg.hbar:
        pt = gated_convergence_point(cfg.z0, cfg.C0, SimParams(hbar, cfg.mass), pot, _stepper(cfg), cfg.n_samples, cfg.seed)
        rows.append([
            pt.hbar, pt.t_final, pt.err_semi, pt.err_cl, pt.mc_se, pt.n_samples,
            math.log(pt.hbar), _safe_log(pt.err_semi), _safe_log(pt.err_cl),
        ])
    return header, rows


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else float("-inf")


def _emit(header, rows, path, stdout) -> None:
    if path:
        try:
            with open(path, "w", newline="") as fh:
                _write_rows(fh, header, rows)
        except OSError as exc:
            raise ConfigError(f"cannot write {path}: {exc.strerror}") from exc
    else:
        _write_rows(stdout, header, rows)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwpwigner", description="Gaussian wave packets and Wigner moments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (("propagate", True), ("egorov", True), ("convergence", True), ("check", False)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, help="experiment configuration file")
        p.add_argument("--output", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=_u64, help="overrides the configured seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress and report text")
        if name == "check":
            p.add_argument("--instances", type=int, default=100, help="random instances per check")
    return parser


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _run_check(args, stdout) -> int:
    seed = args.seed
    if seed is None:
        seed = load_config(args.config).seed if args.config else 0
    results = checks.run_checks(seed, args.instances)
    if not args.quiet:
        stdout.write(checks.format_report(results) + "\n")
    if args.output:
        buf = io.StringIO()
        buf.write("name,max_residual,tol,passed\n")
        for r in results:
            buf.write(f"{r.name},{_fmt(r.max_residual)},{_fmt(r.tol)},{int(r.passed)}\n")
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            raise ConfigError(f"cannot write {args.output}: {exc.strerror}") from exc
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


_TABLES = {"propagate": propagate_table, "egorov": egorov_table, "convergence": convergence_table}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "check":
            return _run_check(args, stdout)
        cfg = load_config(args.config).with_overrides(seed=args.seed, output=args.output, mode=args.command)
        header, rows = _TABLES[args.command](cfg)
        _emit(header, rows, cfg.output, stdout)
        if cfg.output and not args.quiet:
            stderr.write(f"wrote {len(rows)} rows to {cfg.output}\n")
        return EXIT_OK
    except BrokenPipeError:
        return EXIT_OK
    except ConfigError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except (GWPError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``cauchychar {sample,fit,test,verify,field}``.

Exit status is 0 on success, 1 on user error (bad flags, unreadable or
malformed input) and 2 on numerical failure (non-convergence, failed
identity audit). Output files are written atomically, so a failing run
leaves no partial file behind.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import estimation, gof, oracle
from .distributions import (
    Cauchy,
    CircularCauchy,
    MixtureCauchy,
    format_sample_csv,
    read_sample_csv,
    sample,
)
from .errors import CauchyCharError, DomainError, NumericalError
from .halfplane import disk_param, halfplane_param, parse_complex
from .transforms import mobius_field


class UsageError(CauchyCharError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# serialization


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        import json
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _atomic_write(path: str, text: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out):
    if out:
        _atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _check_output(path):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise UsageError(f"output directory is not writable: {parent}")


def _check_input(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    if not os.access(p, os.R_OK):
        raise UsageError(f"input file is not readable: {path}")


# ---------------------------------------------------------------------------
# grid options


def parse_real_grid(text: str) -> list:
    """``"0.1,0.2,0.3"`` or a ``"start:stop:count"`` triple."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(start), float(stop), count)]
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed grid {text!r}; use a,b,c or start:stop:count") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def parse_complex_grid(text: str) -> list:
    vals = [parse_complex(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty grid")
    return [halfplane_param(v) for v in vals]


def _halfplane_arg(text):
    try:
        return halfplane_param(parse_complex(text))
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _disk_arg(text):
    try:
        return disk_param(parse_complex(text))
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args):
    if args.n < 1:
        raise UsageError("-n must be at least 1")
    if args.dist == "cauchy":
        if args.gamma is None:
            raise UsageError("--dist cauchy requires --gamma")
        spec = Cauchy(args.gamma)
    elif args.dist == "circular":
        if args.w is None:
            raise UsageError("--dist circular requires --w")
        spec = CircularCauchy(args.w)
    else:
        if args.t is None or args.gamma1 is None or args.gamma2 is None:
            raise UsageError("--dist mixture requires --t, --gamma1 and --gamma2")
        spec = MixtureCauchy(args.t, args.gamma1, args.gamma2)
    _check_output(args.out)
    s = sample(spec, args.n, args.seed)
    _emit(format_sample_csv(s.values), args.out)
    return 0


def _cmd_fit(args):
    _check_input(args.inp)
    _check_output(args.out)
    s = read_sample_csv(args.inp)
    grid = parse_real_grid(args.grid) if args.grid else None
    est = args.estimator
    if est == "mle":
        rep = estimation.mle_fixed_point(s)
    elif est == "mellin":
        rep = estimation.mellin_consensus(s, grid or estimation.DEFAULT_EXPONENTS)
    elif est == "logmoment":
        rep = estimation.logmoment_estimate(s)
    elif est == "mixture":
        rep = estimation.mixture_fit(s, grid or estimation.MIXTURE_SAMPLE_EXPONENTS,
                                     starts=args.starts, seed=args.seed)
    else:
        rep = estimation.circular_fit(s)
    payload = rep.as_dict()
    if args.json or args.out:
        _emit(to_json(payload) + "\n", args.out)
    else:
        e = payload["estimate"]
        print(f"estimator : {est}")
        print(f"estimate  : {e}")
        print(f"converged : {rep.converged}  iterations: {rep.iterations}  residual: {rep.residual:.3e}")
        if rep.dispersion is not None:
            print(f"dispersion: {rep.dispersion:.6g}")
        for flag in rep.flags:
            print(f"flag      : {flag}")
    if est in ("mle", "circular", "mixture") and not rep.converged:
        return 2
    return 0


def _cmd_test(args):
    _check_input(args.inp)
    _check_output(args.out)
    s = read_sample_csv(args.inp)
    if args.method == "mobius":
        grid = parse_complex_grid(args.grid) if args.grid else None
        rep = gof.cauchy_test_mobius(s, grid, B=args.B, seed=args.seed)
    else:
        grid = parse_real_grid(args.grid) if args.grid else gof.MELLIN_TEST_EXPONENTS
        rep = gof.cauchy_test_mellin(s, grid, B=args.B, seed=args.seed)
    _emit(to_json(rep.as_dict()) + "\n", args.out)
    return 0


def _cmd_verify(args):
    _check_output(args.out)
    gammas = parse_complex_grid(args.gamma_grid) if args.gamma_grid else oracle.DEFAULT_GAMMA_GRID
    a_grid = parse_real_grid(args.a_grid) if args.a_grid else oracle.DEFAULT_A_GRID
    if any(not 0 < a < 1 for a in a_grid):
        raise UsageError("--a-grid values must lie inside (0, 1)")
    report = oracle.verify_identities(gammas, a_grid)
    doc = to_json(report.as_list()) + "\n"
    if args.out:
        _atomic_write(args.out, doc)
    if args.tol_report:
        sys.stdout.write(doc)
    else:
        print(report.format_table())
    return 0 if report.passed else 2


def _cmd_field(args):
    _check_input(args.inp)
    _check_output(args.out)
    if args.gamma_grid:
        grid = parse_complex_grid(args.gamma_grid)
    elif args.re and args.im:
        res, ims = parse_real_grid(args.re), parse_real_grid(args.im)
        grid = [halfplane_param(complex(r, i)) for i in ims for r in res]
    else:
        raise UsageError("field needs --gamma-grid or both --re and --im ranges")
    s = read_sample_csv(args.inp)
    text = emit_field_grid(s, grid)
    _emit(text, args.out)
    return 0


def emit_field_grid(s, grid) -> str:
    """CSV rows ``re(g), im(g), re(F(g)), im(F(g))`` of the Möbius statistic over ``grid``."""
    if len(grid) == 0:
        raise UsageError("empty grid")
    s.require_nondegenerate()
    grid = np.asarray([halfplane_param(g) for g in grid])
    F = mobius_field(s.values, s.weights, grid)
    lines = ["re_gamma,im_gamma,re_F,im_F"]
    for g, f in zip(grid, F):
        lines.append(",".join(_num(v) for v in (g.real, g.imag, f.real, f.imag)))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cauchychar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("sample", help="draw a reproducible sample as CSV")
    sp.add_argument("--dist", choices=("cauchy", "circular", "mixture"), required=True)
    sp.add_argument("--gamma", type=_halfplane_arg)
    sp.add_argument("--w", type=_disk_arg)
    sp.add_argument("--t", type=float)
    sp.add_argument("--gamma1", type=_halfplane_arg)
    sp.add_argument("--gamma2", type=_halfplane_arg)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("fit", help="estimate parameters from a sample CSV")
    sp.add_argument("--estimator", choices=("mle", "mellin", "logmoment", "mixture", "circular"),
                    required=True)
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--grid", help="exponents: a,b,c or start:stop:count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--starts", type=int, default=8)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("test", help="bootstrap goodness-of-fit test for the Cauchy family")
    sp.add_argument("--method", choices=("mobius", "mellin"), required=True)
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--B", type=int, default=999)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid", help="mobius: complex list; mellin: a,b,c or start:stop:count")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_test)

    sp = sub.add_parser("verify", help="audit the transform identities by quadrature")
    sp.add_argument("--gamma-grid")
    sp.add_argument("--a-grid")
    sp.add_argument("--tol-report", action="store_true", help="print the JSON report")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("field", help="tabulate the Möbius statistic over a grid")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--gamma-grid")
    sp.add_argument("--re", help="start:stop:count for Re(gamma)")
    sp.add_argument("--im", help="start:stop:count for Im(gamma)")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_field)
    return p


def run(argv=None) -> int:
    """Parse ``argv`` and run; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CauchyCharError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end: ``hd norm``, ``hd verify``, ``hd scan``.

Results go to stdout as JSON (or CSV with ``--format csv``); a short human
summary goes to stderr unless ``--quiet``. With ``--out DIR`` the result
files and a manifest with content hashes are written as well.

Exit codes: 0 success or pass, 1 verifier failure, 2 usage or input error,
3 resource or guard error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import shlex
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .arith import build_factor_table, load_spec
from .bohr import DirichletPolynomial
from .circle import CirclePolynomial, QuadratureConfig
from .errors import ConfigurationError, DomainError, ResourceError
from .estimates import NormEstimate
from .inequalities import (
    ScanReport,
    VerdictReport,
    condition_b_check,
    g_r_at_one,
    growth_scan,
    partial_sum_diagnostic,
    quartic_convergence_check,
    rama_scan,
    upper_real_scan,
    verify_circle_lemma,
    verify_condition_b,
    verify_embed,
    verify_helson,
    verify_upper_even,
)
from .norms import (
    SamplerConfig,
    euler_product_moments,
    norm_euler_product,
    norm_exact_even,
    norm_exact_two,
    norm_time_average,
    torus_moments,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
SIEVE_CAP = 10**8
FORMAT_VERSION = "1"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers


def count(text: str) -> int:
    """Positive integer that may be written as 1e6."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def int_list(text: str) -> list[int]:
    return [count(t) for t in text.split(",") if t.strip()]


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list: {text!r}") from None


def complex_list(text: str) -> list[complex]:
    try:
        return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coefficient list: {text!r}") from None


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("common")
    g.add_argument("--gen", help="built-in spec name or spec JSON file; the polynomial is D_N")
    g.add_argument("--poly", help="polynomial JSON file")
    g.add_argument("--N", type=count, help="length of D_N")
    g.add_argument("--samples", type=count, default=10**5)
    g.add_argument("--seed", type=count, default=None, help="default: $HD_SEED, else 0")
    g.add_argument("--batches", type=count, default=16)
    g.add_argument("--mode", choices=("mc", "rqmc"), default="mc", help="sampler for sampled norms")
    g.add_argument("--threads", type=count, default=None, help="default: all cores; never changes results")
    g.add_argument("--sieve-bound", type=count, default=None)
    g.add_argument("--allow-large-sieve", action="store_true", help=f"permit sieves above {SIEVE_CAP:.0e}")
    g.add_argument("--out", type=Path, help="directory for result files and the run manifest")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    norm = sub.add_parser("norm", help="estimate ||F||_q")
    _common(norm)
    norm.add_argument("--q", type=float, required=True)
    norm.add_argument(
        "--method", required=True,
        choices=("exact2", "exact-even", "mc", "rqmc", "time-avg", "euler-product", "euler-mc"),
    )
    norm.add_argument("--T", type=float, default=1e4, help="time horizon for time-avg")

    ver = sub.add_parser("verify", help="check one inequality")
    ver.add_argument("verifier", choices=("embed", "helson", "upper-even", "circle-lemma", "condition-b"))
    _common(ver)
    ver.add_argument("--q", type=float, default=1.0)
    ver.add_argument("--j", type=count, default=2)
    ver.add_argument("--coeffs", type=complex_list, help="Taylor coefficients for circle-lemma")
    ver.add_argument("--grid", type=count, default=2**12)
    ver.add_argument("--r", type=float, default=0.0)
    ver.add_argument("--x", type=int_list, default=None)
    ver.add_argument("--band", type=float, default=3.0)

    scan = sub.add_parser("scan", help="growth and asymptotic scans")
    scan.add_argument("kind", choices=("growth", "condition-b", "rama", "g-r", "quartic", "partial-sum", "upper-real"))
    _common(scan)
    scan.add_argument("--q", type=float_list, default=[2.0])
    scan.add_argument("--N-list", "--Ns", dest="N_list", type=int_list, default=None)
    scan.add_argument("--x", type=int_list, default=None)
    scan.add_argument("--c", type=float, default=1.0)
    scan.add_argument("--r", type=float, default=0.0)
    scan.add_argument("--p-max", type=count, default=None)
    scan.add_argument("--M", type=int_list, default=None)
    scan.add_argument("--plot", action="store_true", help="write an SVG of ratio against log N (needs --out)")
    return p


def _preprocess(argv: list[str]) -> list[str]:
    # `scan growth --N 1e2,1e3` means a list; everywhere else --N is a single value.
    if len(argv) >= 2 and argv[0] == "scan":
        return ["--N-list" if a == "--N" else a for a in argv]
    return argv


# --------------------------------------------------------------------------
# inputs


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HD_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HD_SEED must be an integer, got {env!r}") from None
    return 0


def _sampler(args) -> SamplerConfig:
    try:
        return SamplerConfig(
            samples=args.samples, seed=_seed(args), batches=args.batches, mode=args.mode,
            threads=args.threads or os.cpu_count() or 1,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _table(args, need: int):
    bound = args.sieve_bound if args.sieve_bound is not None else max(need, 1)
    if bound > SIEVE_CAP and not args.allow_large_sieve:
        raise ResourceError(f"sieve bound {bound} above {SIEVE_CAP}; pass --allow-large-sieve")
    if need > bound:
        raise ResourceError(f"request needs a sieve up to {need}, but --sieve-bound is {bound}")
    return build_factor_table(bound)


def _spec(args):
    if not args.gen:
        raise UsageError("--gen is required here")
    return load_spec(args.gen)


def _poly_source(args):
    """(polynomial or None, size the sieve must cover)."""
    if args.poly:
        try:
            with open(args.poly) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read {args.poly}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.poly}: invalid JSON ({exc})") from None
        if not isinstance(obj, dict):
            raise UsageError(f"{args.poly}: expected a JSON object")
        return obj, int(obj.get("N") or 0)
    if args.gen:
        if args.N is None:
            raise UsageError("--gen needs --N")
        return None, args.N
    raise UsageError("give --gen NAME --N N or --poly FILE")


def _polynomial(args, obj, table) -> DirichletPolynomial:
    if obj is not None:
        F = DirichletPolynomial.from_dict(obj, table)
        if F.N > table.bound:
            raise ResourceError(f"polynomial length {F.N} exceeds the sieve bound {table.bound}")
        return F
    return DirichletPolynomial.from_spec(_spec(args), args.N, table)


# --------------------------------------------------------------------------
# commands


def cmd_norm(args) -> tuple[dict, str, int]:
    method = args.method
    q = args.q
    if not q > 0:
        raise UsageError("--q must be positive")
    if method in ("euler-product", "euler-mc"):
        spec = _spec(args)
        if args.N is None:
            raise UsageError("--N is required")
        table = _table(args, args.N)
        if method == "euler-product":
            est = norm_euler_product(spec, args.N, q, table=table)
        else:
            est = euler_product_moments(spec, args.N, [q], _sampler(args), table)[0]
        return est.to_dict(), _norm_text(est), EXIT_OK
    obj, need = _poly_source(args)
    table = _table(args, need)
    F = _polynomial(args, obj, table)
    if method == "exact2":
        if q != 2:
            raise UsageError("exact2 needs --q 2")
        est = norm_exact_two(F)
    elif method == "exact-even":
        if q % 2 or q < 2:
            raise UsageError("exact-even needs an even integer --q")
        est = norm_exact_even(F, int(q) // 2)
    elif method == "time-avg":
        est = norm_time_average(F, q, args.T)
    else:
        cfg = _sampler(args)
        if method != cfg.mode:
            cfg = SamplerConfig(cfg.samples, cfg.seed, cfg.batches, method, cfg.threads)
        est = torus_moments(F, [q], cfg, table)[0]
    return est.to_dict(), _norm_text(est), EXIT_OK


def _norm_text(est: NormEstimate) -> str:
    return f"||F||_{est.q:g} = {est.value:.10g} +- {est.std_error:.3g} ({est.method}, {est.samples_or_grid})"


def cmd_verify(args) -> tuple[VerdictReport, str, int]:
    name = args.verifier
    if name == "circle-lemma":
        if not args.coeffs:
            raise UsageError("circle-lemma needs --coeffs c0,c1,...")
        rep = verify_circle_lemma(CirclePolynomial(np.array(args.coeffs)), args.q, QuadratureConfig(args.grid))
    elif name == "condition-b":
        spec = _spec(args)
        xs = args.x or [10**3, 10**4, 10**5]
        rep = verify_condition_b(spec, args.r, xs, _table(args, max(xs)), band=args.band)
    else:
        obj, need = _poly_source(args)
        table = _table(args, need)
        F = _polynomial(args, obj, table)
        if name == "embed":
            rep = verify_embed(F, args.q, _sampler(args), table)
        elif name == "helson":
            rep = verify_helson(F, _sampler(args), table)
        else:
            rep = verify_upper_even(F, args.j, table)
    text = f"{rep.name}: lhs={rep.lhs:.10g} rhs={rep.rhs_value:.10g} margin={rep.margin:.4g} ({rep.margin_units}) " + (
        "PASS" if rep.passed else "FAIL"
    )
    return rep, text, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_scan(args) -> tuple[ScanReport, str, int]:
    kind = args.kind
    if kind == "growth":
        spec = _spec(args)
        Ns = args.N_list or [10**2, 10**3, 10**4]
        table = _table(args, max(Ns))
        rep = growth_scan(spec, args.q, Ns, _sampler(args), table)
    elif kind == "condition-b":
        spec = _spec(args)
        xs = args.x or [10**3, 10**4, 10**5]
        rep = condition_b_check(spec, args.r, xs, _table(args, max(xs)))
    elif kind == "rama":
        spec = _spec(args)
        xs = args.x or [10**6]
        table = _table(args, max(xs + [args.p_max or 0]))
        rep = rama_scan(spec, args.c, args.r, xs, table, args.p_max)
    elif kind == "g-r":
        spec = _spec(args)
        p_max = args.p_max or 10**6
        table = _table(args, p_max)
        g = g_r_at_one(spec, args.c, args.r, p_max, table)
        row = {"r": args.r, "c": args.c, "p_max": p_max, "G_r(1)": g.value, "log_G": g.log_value,
               "tail_estimate": g.tail_estimate, "minus_log_G_over_c2r": -g.log_value / (args.c * 2**args.r)}
        rep = ScanReport("g-r", spec.name, tuple(row), [row])
    elif kind == "quartic":
        spec = _spec(args)
        xs = args.x or [10**3, 10**4, 10**5, 10**6]
        rep = quartic_convergence_check(spec, xs, _table(args, max(xs)))
    else:
        if args.N_list:
            args.N = max(args.N_list)
        obj, need = _poly_source(args)
        table = _table(args, need)
        F = _polynomial(args, obj, table)
        if kind == "partial-sum":
            Ms = args.M or sorted({max(1, F.N // 4), max(1, F.N // 2), F.N})
            rep = partial_sum_diagnostic(F, Ms, args.q[0], _sampler(args), table)
        else:
            rep = upper_real_scan(F, args.q, _sampler(args), table)
    lines = [",".join(rep.columns)] + [
        ",".join(f"{r.get(c):.6g}" if isinstance(r.get(c), float) else str(r.get(c)) for c in rep.columns)
        for r in rep.rows
    ]
    return rep, "\n".join(lines), EXIT_OK


# --------------------------------------------------------------------------
# output


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _svg(rep: ScanReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "hd"
    fig, ax = plt.subplots(figsize=(6, 4))
    if rep.kind == "growth":
        for q in sorted({r["q"] for r in rep.rows}):
            sel = [r for r in rep.rows if r["q"] == q]
            ax.plot([math.log(r["N"]) for r in sel], [r["ratio"] for r in sel], marker="o", label=f"q={q:g}")
        ax.set_xlabel("log N")
    else:
        xcol = rep.columns[0]
        ycol = "ratio" if "ratio" in rep.columns else rep.columns[1]
        ax.plot([math.log(r[xcol]) for r in rep.rows], [r[ycol] for r in rep.rows], marker="o", label=ycol)
        ax.set_xlabel(f"log {xcol}")
    ax.set_ylabel("ratio")
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _write_outputs(args, argv, result, started) -> None:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    payload = result.to_dict() if hasattr(result, "to_dict") else result
    files["result.json"] = _dump(payload).encode()
    if hasattr(result, "to_csv"):
        files["result.csv"] = result.to_csv().encode()
    for name, data in files.items():
        (out / name).write_bytes(data)
    if getattr(args, "plot", False) and isinstance(result, ScanReport) and result.rows:
        _svg(result, out / "plot.svg")
        files["plot.svg"] = (out / "plot.svg").read_bytes()
    manifest = {
        "command_line": "hd " + shlex.join(argv),
        "seed": _seed(args),
        "versions": {"hd": __version__, "format": FORMAT_VERSION, "python": platform.python_version(),
                     "numpy": np.__version__},
        "wall_time": round(time.perf_counter() - started, 6),
        "outputs": [{"path": n, "sha256": hashlib.sha256(d).hexdigest()} for n, d in sorted(files.items())],
    }
    (out / "manifest.json").write_text(_dump(manifest))


def _to_csv(result) -> str:
    if hasattr(result, "to_csv"):
        return result.to_csv()
    cols = list(result)
    return ",".join(cols) + "\n" + ",".join(repr(result[c]) if isinstance(result[c], float) else str(result[c])
                                            for c in cols) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_preprocess(argv))
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    started = time.perf_counter()
    handler = {"norm": cmd_norm, "verify": cmd_verify, "scan": cmd_scan}[args.command]
    try:
        result, text, code = handler(args)
    except (UsageError, ConfigurationError, DomainError) as exc:
        print(f"hd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, MemoryError) as exc:
        print(f"hd: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    payload = result.to_dict() if hasattr(result, "to_dict") else result
    sys.stdout.write(_to_csv(result) if args.format == "csv" else _dump(payload))
    if not args.quiet:
        print(text, file=sys.stderr)
    if args.out is not None:
        _write_outputs(args, argv, result, started)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Batch front end.

Commands: transform, evolve, oracle, compare, feedback, verify.
Exit codes: 0 pass, 2 declared tolerance violated, 1 error. Outputs are
deterministic for a fixed config and platform (fixed iteration orders, no
time-seeded randomness; every run writes a manifest with the config hash).
"""

import argparse
import os
import sys

from . import runners, serialize, verify
from .config import parse_config
from .errors import SchemaViolation, UnknownVersion, WignerLabError
from .tolerances import DEFAULT_TOL

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2

THREADS_ENV = "WIGNERLAB_THREADS"


def _apply_threads(n):
    if n is None:
        n = os.environ.get(THREADS_ENV)
    if n is None:
        return
    n = str(int(n))
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, n)
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(int(n))
    except ImportError:
        pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 reserved for tolerance failures
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser():
    p = _Parser(
        prog="wignerlab",
        description="phase-space laboratory batch runner")
    p.add_argument("command", choices=["transform", "evolve", "oracle",
                                       "compare", "feedback", "verify"])
    p.add_argument("--config", help="path to a JSON scenario config")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int,
                   help=f"BLAS thread budget (env {THREADS_ENV})")
    p.add_argument("--strict", action="store_true",
                   help="treat warnings as failures")
    p.add_argument("--level", choices=["quick", "full"],
                   help="verify suite size (default from config or quick)")
    return p


def _run_verify(args, cfg_text, level, out_dir):
    results = verify.run_suite(level)
    lines = []
    ok = True
    for name, residual, tol in results:
        passed = residual < tol
        ok = ok and passed
        line = f"{'PASS' if passed else 'FAIL'} {name} residual={residual:.3e} tol={tol:g}"
        lines.append(line)
        print(line)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "verify.txt"), "w") as f:
            f.write("\n".join(lines) + "\n")
        serialize.write_manifest(out_dir, cfg_text, "verify", DEFAULT_TOL,
                                 {"level": level})
    return EXIT_OK if ok else EXIT_TOLERANCE


def main(argv=None):
    args = build_parser().parse_args(argv)
    _apply_threads(args.threads)

    import warnings
    if args.strict:
        warnings.simplefilter("error")

    cfg_text = "{}"
    cfg = None
    if args.config:
        try:
            with open(args.config) as f:
                cfg_text = f.read()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_ERROR
        try:
            cfg = parse_config(cfg_text)
        except SchemaViolation as exc:
            for path, reason in exc.violations:
                print(f"config error at {path}: {reason}", file=sys.stderr)
            return EXIT_ERROR
        except (UnknownVersion, WignerLabError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    elif args.command != "verify":
        print("error: --config is required for this command", file=sys.stderr)
        return EXIT_ERROR

    if cfg is not None and args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.out or (cfg.output["directory"] if cfg else "out")

    if args.command == "verify":
        level = args.level or (cfg.verify_level if cfg else "quick")
        return _run_verify(args, cfg_text, level, out_dir)

    handler = {
        "transform": runners.cmd_transform,
        "evolve": runners.cmd_evolve,
        "oracle": runners.cmd_oracle,
        "compare": runners.cmd_compare,
        "feedback": runners.cmd_feedback,
    }[args.command]

    try:
        failures = handler(cfg, out_dir)
        serialize.write_manifest(out_dir, cfg_text, args.command, DEFAULT_TOL)
    except WignerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if failures:
        for msg in failures:
            print(f"tolerance violation: {msg}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

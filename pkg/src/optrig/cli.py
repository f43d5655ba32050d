"""Command-line front end.

    optrig [--seed N] [--out FILE] [--set key=value ...] COMMAND [options]

Commands: angle, amplitude, decompose, certify-invertible, iterate,
validate-suite.  Every run writes one JSON report (to ``--out`` or stdout)
holding the manifest, the result and a verdict.  Exit codes: 0 success,
2 AT_PI where a BELOW_PI assertion was requested, 3 unreadable input or
bad options, 4 numerical inconsistency (oracle disagreement, stalled
continuation, singular start).
"""

from __future__ import annotations

import argparse
from importlib import resources
from pathlib import Path
import sys

import numpy as np

from . import io as mio
from .amplitude import Classification, generalized_amplitude_upper
from .angle import OptimizerConfig, angle
from .continuation import certify_invertible_by_continuation
from .decomposition import complementarity_oracle
from .errors import Inconclusive, MatrixFormatError, OptrigError
from .iteration import iterate_to_limit

EXIT_OK, EXIT_AT_PI, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4

# Every tunable, with its default.  ``--set key=value`` overrides any of them.
DEFAULTS = {
    # optimiser (angle engine, k_A)
    "n_starts": 64,
    "max_iters": 500,
    "step_tol": 1e-10,
    "value_tol": 1e-8,
    "kernel_exclusion_radius": 1e-8,
    # rank oracle
    "tol_factor": 1.0,
    "subspace_tol": 1e-8,
    # amplitude
    "n_theta": 12,
    "n_random": 32,
    "perturbation": 0.25,
    "margin_threshold": 0.05,
    # continuation
    "safety": 0.9,
    # powers
    "n_max": 100_000,
    "tol": 1e-10,
    "blowup": 1e8,
}

COMMANDS = ("angle", "amplitude", "decompose", "certify-invertible", "iterate", "validate-suite")


class UsageError(Exception):
    pass


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in DEFAULTS:
            raise UsageError(f"bad --set {item!r}; known keys: {', '.join(DEFAULTS)}")
        try:
            val = float(raw)
        except ValueError:
            raise UsageError(f"--set {key}: {raw!r} is not a number") from None
        if isinstance(DEFAULTS[key], int):
            if val != int(val):
                raise UsageError(f"--set {key}: expected an integer, got {raw!r}")
            val = int(val)
        out[key] = val
    return dict(sorted(out.items()))


def _optimizer(settings, seed) -> OptimizerConfig:
    try:
        return OptimizerConfig(
            n_starts=settings["n_starts"],
            max_iters=settings["max_iters"],
            step_tol=settings["step_tol"],
            value_tol=settings["value_tol"],
            kernel_exclusion_radius=settings["kernel_exclusion_radius"],
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _amplitude_summary(rep) -> dict:
    return {
        "krein_amplitude": rep.krein_amplitude,
        "generalized_upper_bound": rep.generalized_upper_bound,
        "best_label": rep.best_label,
        "best_cosine": rep.best_cosine,
        "best_pencil": rep.best_pencil,
        "candidates_tried": rep.candidates_tried,
        "classification": rep.classification,
        "margin": rep.margin,
        "candidates": [
            {"label": c.label, "angle": c.report.angle, "cosine": c.report.cosine} for c in rep.candidates
        ],
    }


def _decomposition_summary(dec) -> dict:
    return mio.to_jsonable(dec)


# --------------------------------------------------------------------------
# command implementations: each returns (result, verdict, exit code)


def _cmd_angle(args, settings, cfg):
    A = mio.read_matrix(args.matrix)
    T = mio.read_matrix(args.aux) if args.aux else A.like(np.eye(A.n))
    rep = angle(A, T, cfg)
    return rep, "DEGENERATE" if rep.degenerate else "COMPUTED", EXIT_OK


def _run_amplitude(A, settings, cfg):
    return generalized_amplitude_upper(
        A,
        cfg,
        n_theta=settings["n_theta"],
        n_random=settings["n_random"],
        perturbation=settings["perturbation"],
        margin_threshold=settings["margin_threshold"],
    )


def _cmd_amplitude(args, settings, cfg):
    A = mio.read_matrix(args.matrix)
    rep = _run_amplitude(A, settings, cfg)
    if args.trace:
        mio.write_csv(args.trace, ["theta", "angle", "cosine"], rep.ray_trace)
    code = EXIT_AT_PI if (args.assert_below_pi and rep.classification is Classification.AT_PI) else EXIT_OK
    return _amplitude_summary(rep), rep.classification.value, code


def _cmd_decompose(args, settings, cfg):
    A = mio.read_matrix(args.matrix)
    dec = complementarity_oracle(A, settings["tol_factor"], settings["subspace_tol"])
    return _decomposition_summary(dec), "COMPLEMENTARY" if dec.complementary else "NOT_COMPLEMENTARY", EXIT_OK


def _cmd_certify(args, settings, cfg):
    A = mio.read_matrix(args.matrix)
    T = mio.read_matrix(args.aux) if args.aux else A.like(np.eye(A.n))
    y = mio.read_vector(args.rhs)
    x, cert = certify_invertible_by_continuation(A, T, args.t0, y, settings["safety"], cfg)
    return {"solution": x, "certificate": cert}, "CERTIFIED", EXIT_OK


def _iteration_result(rep, args):
    if args.trace:
        mio.write_csv(args.trace, ["n", "residual", "iterate_max_norm"], rep.trace_rows())
    res = rep.asymptotic_regularity_residuals
    return {
        "converged": rep.converged,
        "n_iterations": rep.n_iterations,
        "divergence_detected": rep.divergence_detected,
        "limit_matrix": rep.limit_matrix,
        "limit_is_projection": rep.limit_is_projection,
        "limit_matches_decomposition": rep.limit_matches_decomposition,
        "trace_length": int(res.size),
        "final_residual": float(res[-1]) if res.size else float("nan"),
        "final_iterate_max_norm": float(rep.iterate_max_norms[-1]) if res.size else float("nan"),
    }


def _cmd_iterate(args, settings, cfg):
    T = mio.read_matrix(args.matrix)
    try:
        rep = iterate_to_limit(T, settings["n_max"], settings["tol"], settings["blowup"])
    except Inconclusive as exc:
        return _iteration_result(exc.report, args), "INCONCLUSIVE", EXIT_OK
    return _iteration_result(rep, args), "CONVERGED" if rep.converged else "DIVERGED", EXIT_OK


def bundled_suite_dir():
    return resources.files("optrig") / "data" / "curated"


def _cmd_validate(args, settings, cfg):
    directory = Path(args.dir) if args.dir else Path(str(bundled_suite_dir()))
    files = sorted(directory.glob("*.json"))
    if not files:
        raise MatrixFormatError(f"no *.json matrices in {directory}")
    rows = []
    agree = expected_agree = with_expected = 0
    for f in files:
        A, doc = mio.read_matrix_document(f)
        dec = complementarity_oracle(A, settings["tol_factor"], settings["subspace_tol"])
        rep = _run_amplitude(A, settings, cfg)
        below = rep.classification is Classification.BELOW_PI
        ok = below == dec.complementary
        agree += ok
        row = {
            "file": f.name,
            "name": doc.get("name", f.stem),
            "dim": A.n,
            "p": A.p,
            "oracle_complementary": dec.complementary,
            "classification": rep.classification,
            "generalized_upper_bound": rep.generalized_upper_bound,
            "krein_amplitude": rep.krein_amplitude,
            "best_cosine": rep.best_cosine,
            "agree": ok,
        }
        if "expected_complementary" in doc:
            with_expected += 1
            exp_ok = bool(doc["expected_complementary"]) == dec.complementary
            expected_agree += exp_ok
            row["expected_complementary"] = bool(doc["expected_complementary"])
        rows.append(row)
    n = len(rows)
    summary = {
        "directory": str(args.dir) if args.dir else "<bundled curated suite>",
        "total": n,
        "oracle_classifier_agreement": agree,
        "agreement_rate": agree / n,
        "oracle_matches_expected": expected_agree,
        "fixtures_with_expected": with_expected,
    }
    _print_table(rows)
    verdict = f"AGREE {agree}/{n}" if agree == n else f"DISAGREE {n - agree}/{n}"
    return {"summary": summary, "fixtures": rows}, verdict, EXIT_OK


def _print_table(rows):
    err = sys.stderr
    err.write(f"{'fixture':32s} {'oracle':>6s} {'class':>9s} {'bound':>8s} agree\n")
    for r in rows:
        err.write(
            f"{r['name'][:32]:32s} {str(r['oracle_complementary']):>6s} "
            f"{r['classification'].value:>9s} {r['generalized_upper_bound']:8.4f} "
            f"{'yes' if r['agree'] else 'NO'}\n"
        )


HANDLERS = {
    "angle": _cmd_angle,
    "amplitude": _cmd_amplitude,
    "decompose": _cmd_decompose,
    "certify-invertible": _cmd_certify,
    "iterate": _cmd_iterate,
    "validate-suite": _cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is the AT_PI code here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="optrig", description=__doc__.split("\n\n")[0])
    ap.add_argument("--seed", type=int, default=0, help="optimizer seed (64-bit unsigned)")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a default tolerance/setting (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("angle", help="cosine and angle of A with respect to T")
    p.add_argument("--matrix", required=True)
    p.add_argument("--aux", help="the operator T (identity if omitted)")

    p = sub.add_parser("amplitude", help="Krein amplitude and generalized-amplitude bound")
    p.add_argument("--matrix", required=True)
    p.add_argument("--theta-grid", type=int, help="number of rays in the theta scan")
    p.add_argument("--trace", help="CSV file for the per-theta trace")
    p.add_argument("--no-assert", dest="assert_below_pi", action="store_false",
                   help="do not exit with code 2 on an AT_PI classification")

    p = sub.add_parser("decompose", help="range-kernel complementarity and A = SP")
    p.add_argument("--matrix", required=True)

    p = sub.add_parser("certify-invertible", help="solve Ax = y by continuation from A + t0 T")
    p.add_argument("--matrix", required=True)
    p.add_argument("--aux", help="the pencil direction T (identity if omitted)")
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--rhs", required=True, help="vector file for y")

    p = sub.add_parser("iterate", help="powers T^n: convergence, divergence and the limit")
    p.add_argument("--matrix", required=True)
    p.add_argument("--nmax", type=int, help="largest power computed")
    p.add_argument("--trace", help="CSV file for the per-iteration trace")

    p = sub.add_parser("validate-suite", help="oracle vs amplitude classifier on a directory of matrices")
    p.add_argument("--dir", help="directory of matrix files (bundled curated suite if omitted)")
    return ap


def _manifest(args, overrides) -> dict:
    extra = {}
    for key in ("aux", "rhs", "t0", "theta_grid", "nmax", "trace"):
        if getattr(args, key, None) is not None:
            extra[key] = getattr(args, key)
    if args.command == "amplitude":
        extra["assert_below_pi"] = args.assert_below_pi
    return {
        "command": args.command,
        "input_path": getattr(args, "matrix", None) or getattr(args, "dir", None),
        "seed": args.seed,
        "overrides": overrides,
        "output_path": args.out,
        "arguments": extra,
    }


def _error_code(exc) -> int:
    # bad input files and bad option values are "parse" errors; everything
    # raised by the numerics (oracle disagreement, stalled or ill-posed
    # continuation, singular systems) is a numerical inconsistency
    if isinstance(exc, (MatrixFormatError, UsageError, ValueError)):
        return EXIT_PARSE
    return EXIT_NUMERIC


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {}
    try:
        if not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        overrides = _parse_overrides(args.set)
        settings = {**DEFAULTS, **overrides}
        if getattr(args, "theta_grid", None) is not None:
            settings["n_theta"] = args.theta_grid
        if getattr(args, "nmax", None) is not None:
            settings["n_max"] = args.nmax
        cfg = _optimizer(settings, args.seed)
        result, verdict, code = HANDLERS[args.command](args, settings, cfg)
        doc = {"manifest": _manifest(args, overrides), "result": result, "verdict": verdict}
    except (OptrigError, UsageError, ValueError) as exc:
        code = _error_code(exc)
        doc = {
            "manifest": _manifest(args, overrides),
            "error": {"type": type(exc).__name__, "message": str(exc)},
            "verdict": "ERROR",
        }
    text = mio.dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""Command-line front end.

    qofilter simulate --case lowfreq --n 128 --seed 7 --out run/
    qofilter restore  --model run/model.json --image run/image.csv --object run/object.csv --out run/
    qofilter compare  --case sharp-smooth --trials 100 --seed 0 --out run/
    qofilter quantile --gamma 0.5 --n 2

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .estimators import lse, wiener_weights
from .linalg import LinAlgError
from .model import decompose, principal_components, refine_image, standardize
from .quasiopt import QoConfig, SolverError, restore
from .simulation import CASES, NoiseSpec, PsfSpec, case_model, make_case, monte_carlo
from .stats import chi2_quantile

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    """Malformed or missing input; maps to exit code 2."""


# ---------------------------------------------------------------- file formats


def _fmt(v) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(v))


def write_vector(path: Path, values, name: str = "value") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", name])
        for i, v in enumerate(values):
            w.writerow([i, _fmt(v)])


def write_columns(path: Path, columns: dict) -> None:
    names = list(columns)
    rows = zip(*(columns[k] for k in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", *names])
        for i, row in enumerate(rows):
            w.writerow([i, *(_fmt(v) for v in row)])


def write_matrix(path: Path, a) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for (r, c), v in np.ndenumerate(a):
            w.writerow([r, c, _fmt(v)])


def read_vector(path) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows or rows[0][:2] != ["index", "value"]:
        raise InputError(f"{path}: expected header 'index,value'")
    try:
        idx = [int(r[0]) for r in rows[1:]]
        vals = [float(r[1]) for r in rows[1:]]
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed row ({exc})") from exc
    if idx != list(range(len(idx))) or not idx:
        raise InputError(f"{path}: indices must run 0..k-1")
    v = np.array(vals)
    if not np.all(np.isfinite(v)):
        raise InputError(f"{path}: non-finite value")
    return v


def write_json(path: Path, obj: dict) -> None:
    text = json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")


def _psf_dict(psf: PsfSpec) -> dict:
    d = {"kind": psf.kind, "support_halfwidth": int(psf.support_halfwidth), "normalize": "kernel"}
    if psf.kind == "sinc2":
        d["R"] = psf.R
    else:
        d["sigma_psf"] = psf.sigma_psf
    return d


def read_model(path):
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from exc
    try:
        if spec["schema_version"] != SCHEMA_VERSION:
            raise InputError(f"{path}: unsupported schema_version {spec['schema_version']}")
        p = spec["psf"]
        psf = PsfSpec(p["kind"], R=p.get("R"), sigma_psf=p.get("sigma_psf"), support_halfwidth=p["support_halfwidth"])
        noise = NoiseSpec(float(spec["noise"]["mean_a"]), float(spec["noise"]["sigma_g"]))
        return case_model(psf, int(spec["n"]), int(spec["m"]), noise, p.get("normalize", "kernel")), spec
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: missing or malformed field {exc}") from exc


# ---------------------------------------------------------------- commands


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    case = make_case(args.case, args.n, args.seed)
    out = _out_dir(args)
    write_vector(out / "object.csv", case.x0)
    write_vector(out / "image.csv", case.image(args.seed))
    if args.write_matrix:
        write_matrix(out / "psf_matrix.csv", case.gm.H)
    write_json(
        out / "model.json",
        {
            "case": case.name,
            "n": case.n,
            "m": case.m,
            "psf": _psf_dict(case.psf),
            "noise": {"mean_a": case.noise.mean_a, "sigma_g": case.noise.sigma_g},
            "seed": args.seed,
        },
    )
    return EXIT_OK


def cmd_restore(args) -> int:
    if args.model is None or args.image is None:
        raise InputError("restore needs --model and --image")
    gm, _ = read_model(args.model)
    y0 = read_vector(args.image)
    if y0.shape != (gm.m,):
        raise InputError(f"{args.image}: has {y0.shape[0]} values, model expects m={gm.m}")
    x0 = None
    if args.object is not None:
        x0 = read_vector(args.object)
        if x0.shape != (gm.n,):
            raise InputError(f"{args.object}: has {x0.shape[0]} values, model expects n={gm.n}")

    sm, z0 = standardize(gm, y0)
    rm = decompose(sm)
    est = lse(rm, refine_image(rm, z0))
    sol, diag = restore(gm, y0, QoConfig(alpha=args.alpha), refined=rm)
    out = _out_dir(args)
    write_vector(out / "estimate.csv", sol.x_tilde)
    weights = {"quasi_optimal": sol.w_qo}
    comps = {"lambda": rm.lam, "p_star": est.p_star, "p_tilde": sol.p_tilde}
    if x0 is not None:
        p0 = principal_components(rm, x0)
        weights["optimal"] = wiener_weights(rm.lam, p0)
        comps["p0"] = p0
    write_columns(out / "weights.csv", weights)
    write_columns(out / "components.csv", comps)
    write_json(out / "diagnostics.json", diag)
    return EXIT_OK


def cmd_compare(args) -> int:
    case = make_case(args.case, args.n, args.seed)
    report = monte_carlo(case, QoConfig(alpha=args.alpha), args.trials, args.seed, args.alpha_mode)
    write_json(_out_dir(args) / "report.json", report.to_dict())
    return EXIT_OK


def cmd_quantile(args) -> int:
    print(f"{chi2_quantile(args.gamma, args.n):.10g}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _probability(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {s}")
    return v


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def _seed(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qofilter", description="Quasi-optimal filtering of blurred, noisy 1-D images.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, case=True):
        if case:
            p.add_argument("--case", choices=CASES, default="lowfreq")
            p.add_argument("--n", type=_positive_int, default=128)
        p.add_argument("--alpha", type=_probability, default=0.5, help="significance level (default 0.5)")
        p.add_argument("--seed", type=_seed, default=None, help="base seed (default: $QOFILTER_SEED or 0)")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("simulate", help="write a bundled model case and one noisy image")
    common(p)
    p.add_argument("--write-matrix", action="store_true", help="also write psf_matrix.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("restore", help="quasi-optimal restoration of an image")
    common(p, case=False)
    p.add_argument("--model", help="model.json written by simulate")
    p.add_argument("--image", help="image CSV (index,value)")
    p.add_argument("--object", help="true object CSV, for oracle weights and components")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("compare", help="Monte Carlo comparison of LSE, oracle Wiener and quasi-optimal")
    common(p)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument(
        "--alpha-mode",
        choices=("fixed", "matched"),
        default="fixed",
        help="fixed: constraint at t_{1-alpha}; matched: at the oracle Wiener misfit",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("quantile", help="chi-square quantile t with P_n(t) = gamma")
    p.add_argument("--gamma", type=_probability, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.set_defaults(func=cmd_quantile)
    return parser


def _resolve_seed(args) -> None:
    if not hasattr(args, "seed") or args.seed is not None:
        return
    env = os.environ.get("QOFILTER_SEED")
    if env is None:
        args.seed = 0
        return
    try:
        args.seed = _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"QOFILTER_SEED: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        _resolve_seed(args)
        return args.func(args)
    except (InputError, LinAlgError, ValueError) as exc:
        print(f"qofilter: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, ArithmeticError) as exc:
        print(f"qofilter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

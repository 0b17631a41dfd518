"""Command-line front end.

Every subcommand writes a JSON report (stdout, or ``--out``) and, where a
curve or table makes sense, a CSV (``--csv``). Exit codes: 0 success,
1 bad input or usage, 2 internal inconsistency. Failures print a JSON object
with a ``reason`` field on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import arithmetic, automorphisms, generators, nevanlinna, rootsys, sl2
from .core import (
    DiscreteSet,
    complex_from_json,
    complex_to_json,
    load_point_set,
    point_set_to_json,
)
from .errors import ConsistencyError, PreconditionError, TamekitError
from .gaussian import GaussianRational

DEFAULT_SEED = 0x5EED
MODES = ("exact", "float")


class UsageError(Exception):
    reason = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _clean(obj: Any) -> Any:
    """Make a report JSON-safe: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _emit(report: dict, out: Path | None) -> None:
    text = json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _write_csv(text: str, path: Path | None) -> None:
    if path is not None:
        path.write_text(text)


def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise PreconditionError(f"cannot read {path}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path} is not valid JSON: {exc}") from exc


def _read_thresholds(path: Path) -> nevanlinna.ThresholdSequence:
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("R", data.get("values"))
    if not isinstance(data, list):
        raise PreconditionError("thresholds file must be a list or an object with key 'R'")
    return nevanlinna.ThresholdSequence(tuple(float(x) for x in data))


def _load_set(path: Path) -> DiscreteSet:
    try:
        return load_point_set(path)
    except FileNotFoundError as exc:
        raise PreconditionError(f"cannot read {path}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path} is not valid JSON: {exc}") from exc


# -- subcommands ---------------------------------------------------------------


def cmd_counting(args: argparse.Namespace) -> dict:
    D = _load_set(args.set)
    radii = nevanlinna.log_grid(args.rmax, args.per_decade)
    prof = nevanlinna.counting_profile(D, radii)
    csv = prof.to_csv()
    if args.csv is None and args.out is None:
        sys.stdout.write(csv)
        return {}
    _write_csv(csv, args.csv)
    N_end = nevanlinna.counting_N(D, args.rmax, cross_check=True)
    return {
        "command": "counting",
        "points": len(D),
        "r_max": args.rmax,
        "n_at_rmax": nevanlinna.counting_n(D, args.rmax),
        "N_at_rmax": N_end,
        "samples": len(radii),
    }


def cmd_threshold(args: argparse.Namespace) -> dict:
    R = _read_thresholds(args.R)
    h = nevanlinna.h_from_thresholds(R, args.K)
    _write_csv(h.to_csv(), args.csv)
    report: dict[str, Any] = {
        "command": "threshold",
        "K": args.K,
        "table": h.table(),
        "invariant_violations": h.invariant_violations(),
    }
    if args.verify is not None:
        D = _load_set(args.verify)
        rep = nevanlinna.verify_r2h_contrapositive(D, R, args.K)
        report["contrapositive"] = {
            "status": rep.status,
            "k": rep.k,
            "N_at_p_k": rep.N_at_p_k,
            "h_at_p_k": rep.h_at_p_k,
            "margin": rep.margin,
            "log_p_k": rep.log_p_k,
        }
        if rep.margin is not None and rep.margin < -1e-9:
            raise ConsistencyError(f"contrapositive margin {rep.margin} is negative")
    return report


def cmd_shear(args: argparse.Namespace) -> dict:
    D = _load_set(args.set)
    if D.is_exact:
        raise PreconditionError("shear works on float point sets")
    placement = automorphisms.send_to_axis(D, seed=args.seed)
    _write_csv(placement.certificate_csv(), args.csv)
    rng = np.random.default_rng(args.seed)
    n = placement.chain.dim
    probes = np.sqrt(rng.uniform(size=(args.probes, n))) * np.exp(2j * np.pi * rng.uniform(size=(args.probes, n)))
    rt = placement.chain.roundtrip_error(probes)
    if placement.max_residual > 1e-8:
        raise ConsistencyError(f"residual {placement.max_residual} exceeds 1e-8")
    return {
        "command": "shear",
        "automorphism": placement.chain.to_json(),
        "images": [[complex_to_json(z) for z in row] for row in placement.images],
        "max_residual": placement.max_residual,
        "roundtrip": {"error": rt.error, "bits": rt.bits, "probes": args.probes},
    }


def cmd_rootpair(args: argparse.Namespace) -> dict:
    RS = rootsys.build_root_system(args.family, args.rank)
    pair = rootsys.build_pair(RS, args.alpha, args.beta)
    span = rootsys.verify_spanning(pair, RS)
    return {
        "command": "rootpair",
        "root_system": RS.to_json(),
        "pair": pair.to_json(),
        "span": {"dim_sum": span.dim_sum, "dim_g": span.dim_g, "spans": span.spans},
    }


_PRESETS = {"standard-zi": sl2.standard_generators_zi, "standard-z": sl2.standard_generators_z}


def _read_generators(spec: Any, exact: bool) -> list[sl2.SL2Element]:
    if isinstance(spec, str):
        if spec not in _PRESETS:
            raise PreconditionError(f"unknown generator preset {spec!r}")
        gens = _PRESETS[spec]()
    else:
        if isinstance(spec, dict):
            spec = spec.get("generators")
        if not isinstance(spec, list) or not spec:
            raise PreconditionError("generators must be a nonempty list of 2x2 matrices")
        gens = []
        for m in spec:
            rows = [[complex_from_json(z) for z in row] for row in m]
            gens.append(sl2.SL2Element(*(rows[0] + rows[1])))
    if exact:
        if not all(g.is_exact for g in gens):
            gens = [sl2.SL2Element.exact(*(GaussianRational.from_complex(complex(x)) for x in g.entries)) for g in gens]
    else:
        gens = [sl2.SL2Element.of(*g.entries) for g in gens]
    return gens


def _generator_source(args: argparse.Namespace) -> Any:
    if args.preset:
        return args.preset
    if args.generators is None:
        raise PreconditionError("give --generators FILE or --preset NAME")
    return _read_json(args.generators)


def cmd_sl2_discrete(args: argparse.Namespace) -> dict:
    exact = args.mode == "exact"
    gens = _read_generators(_generator_source(args), exact)
    ball = sl2.enumerate_ball(gens, args.word_length, psl=args.psl)
    rep = sl2.projection_discreteness(ball, args.radius)
    _write_csv(rep.to_csv(), args.csv)
    nontrivial = sum(1 for g in ball.elements if sl2.nontrivial_unipotent(g)) if exact else None
    return {
        "command": "sl2-discrete",
        "mode": args.mode,
        "word_length": args.word_length,
        "radius": args.radius,
        "ball_size": len(ball),
        "overflow": sum(ball.overflow),
        "distinct_columns": rep.count,
        "min_separation": rep.min_separation,
        "min_separation_sq": rep.min_separation_sq,
        "nontrivial_unipotents": nontrivial,
    }


def _parse_ring(text: str) -> int:
    body = text.split("=", 1)[1] if "=" in text else text
    try:
        return int(body)
    except ValueError as exc:
        raise PreconditionError(f"bad ring {text!r}; use d=1") from exc


def _read_quotient(text: str, d: int) -> arithmetic.PolyMapOverK:
    if text == "firstcolumn":
        return arithmetic.first_column_map(d)
    if text.startswith("firstcolumn/"):
        return arithmetic.first_column_map(d, Fraction(1, int(text.split("/", 1)[1])))
    P = arithmetic.PolyMapOverK.from_json(_read_json(Path(text)))
    if P.d != d:
        raise PreconditionError("quotient map is defined over a different field")
    return P


def cmd_arith_check(args: argparse.Namespace) -> dict:
    d = _parse_ring(args.ring)
    quotient = _read_quotient(args.quotient, d)
    data = _read_json(args.ball) if args.ball else {"generators": "standard-zi", "word_length": args.word_length}
    gens = _read_generators(data.get("generators", "standard-zi"), True)
    ball = sl2.enumerate_ball(gens, int(data.get("word_length", args.word_length)))
    rep = arithmetic.matrix_group_ball_integrality(ball, quotient)
    return {
        "command": "arith-check",
        "d": d,
        "N": rep.N,
        "checked": rep.checked,
        "failures": rep.failures,
        "integral": rep.ok,
        "min_separation": rep.min_separation,
        "min_nonzero_norm": arithmetic.min_nonzero_norm(d).min_abs,
    }


def _parse_projection(text: str) -> list[int]:
    if not text.startswith("coord:"):
        raise PreconditionError(f"projection {text!r} must look like coord:0 or coord:0,2")
    try:
        return [int(x) for x in text[6:].split(",")]
    except ValueError as exc:
        raise PreconditionError(f"bad projection {text!r}") from exc


def cmd_partition(args: argparse.Namespace) -> dict:
    D = _load_set(args.set)
    if not D.space.affine:
        raise PreconditionError("coordinate projections need an affine point set")
    pp = generators.coordinate_pair(_parse_projection(args.proj1), _parse_projection(args.proj2))
    part = generators.partition_two_tame(D, pp)
    radii = nevanlinna.log_grid(max(2.0, max(part.rho1 + part.rho2, default=2.0)), 4)
    prop1 = generators.verify_proper_on_part(part.D1, pp.pi1, radii)
    prop2 = generators.verify_proper_on_part(part.D2, pp.pi2, radii)
    return {
        "command": "partition",
        "D1": list(part.indices1),
        "D2": list(part.indices2),
        "disjoint_union": part.disjoint_union_ok(len(D)),
        "factor_bounds": part.certificate,
        "proper": {
            "radii": list(prop1.radii),
            "D1_counts": list(prop1.counts),
            "D2_counts": list(prop2.counts),
        },
    }


def cmd_cstar(args: argparse.Namespace) -> dict:
    R = _read_thresholds(args.thresholds)
    res = generators.torus_counterexample(args.n, R, args.J, args.density, args.K)
    if args.points_out is not None:
        args.points_out.write_text(json.dumps(_clean(point_set_to_json(res.points)), indent=1, sort_keys=True) + "\n")
    report = {"command": "cstar-counterexample", "n": args.n, "J": args.J, "K": args.K, "density": args.density}
    report.update(res.to_json())
    if args.points_out is None:
        report["points"] = point_set_to_json(res.points)
    return report


# -- parser ---------------------------------------------------------------------


def _seed(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    mode_default = os.environ.get("TAMEKIT_MODE", "exact")
    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--csv", type=Path, default=None, help="write the CSV table here")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="random seed (default 0x5EED)")

    parser = _Parser(prog="tamekit", description="Finite-scale checks for tame discrete sets.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("counting", parents=[common], help="counting functions n(r) and N(r)")
    p.add_argument("--set", type=Path, required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--per-decade", type=int, default=nevanlinna.SAMPLES_PER_DECADE)
    p.set_defaults(func=cmd_counting)

    p = sub.add_parser("threshold", parents=[common], help="growth function from a threshold sequence")
    p.add_argument("--R", type=Path, required=True, help="JSON list of thresholds")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--verify", type=Path, default=None, help="point set to test against the contrapositive")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("shear", parents=[common], help="send a finite affine set to the first axis")
    p.add_argument("--set", type=Path, required=True)
    p.add_argument("--probes", type=int, default=100)
    p.set_defaults(func=cmd_shear)

    p = sub.add_parser("rootpair", parents=[common], help="subgroup pair labels and span check")
    p.add_argument("--family", choices=sorted(rootsys.MIN_RANK), required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.set_defaults(func=cmd_rootpair)

    p = sub.add_parser("sl2-discrete", parents=[common], help="first-column separation of a word ball")
    p.add_argument("--generators", type=Path, default=None)
    p.add_argument("--preset", choices=sorted(_PRESETS), default=None)
    p.add_argument("--word-length", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--psl", action="store_true", help="identify g with -g")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="mode", action="store_const", const="exact")
    g.add_argument("--float", dest="mode", action="store_const", const="float")
    p.set_defaults(func=cmd_sl2_discrete, mode=mode_default)

    p = sub.add_parser("arith-check", parents=[common], help="integrality of a quotient map on a word ball")
    p.add_argument("--ring", default="d=1")
    p.add_argument("--ball", type=Path, default=None, help='JSON {"generators": ..., "word_length": L}')
    p.add_argument("--word-length", type=int, default=6)
    p.add_argument("--quotient", default="firstcolumn", help="firstcolumn, firstcolumn/N, or a JSON map file")
    p.set_defaults(func=cmd_arith_check)

    p = sub.add_parser("partition", parents=[common], help="split a set by two coordinate projections")
    p.add_argument("--set", type=Path, required=True)
    p.add_argument("--proj1", required=True)
    p.add_argument("--proj2", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("cstar-counterexample", parents=[common], help="discrete set in (C*)^n with dense projections")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--thresholds", type=Path, required=True)
    p.add_argument("--J", type=int, default=3)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--density", type=int, default=8)
    p.add_argument("--points-out", type=Path, default=None)
    p.set_defaults(func=cmd_cstar)
    return parser


def _fail(reason: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"reason": reason, "message": message}, sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        if os.environ.get("TAMEKIT_MODE", "exact") not in MODES:
            raise UsageError(f"TAMEKIT_MODE must be one of {MODES}")
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        report = args.func(args)
        if report:
            _emit(report, args.out)
        return 0
    except UsageError as exc:
        return _fail("usage", str(exc), 1)
    except ConsistencyError as exc:
        return _fail(exc.reason, str(exc), 2)
    except TamekitError as exc:
        return _fail(exc.reason, str(exc), 1)
    except (ValueError, OSError) as exc:
        return _fail("precondition", str(exc), 1)


if __name__ == "__main__":
    raise SystemExit(main())

"""Experiment runner: build measures, transform, decompose, sample planes.

Exit codes: 0 success, 2 usage/precondition failure, 3 internal identity
violation.  Every run with an --output target also writes a manifest file
`<output>.manifest.json` recording the resolved configuration and the
sha256 digests of the produced files; exact-mode reruns with the same
configuration are byte-identical (manifest duration/digest fields aside).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import __version__
from .apcount import (
    IdentityViolation,
    count_aps_set,
    error_bound,
    spectral_decomposition,
)
from .measures import (
    energy_baseline,
    energy_proportionality,
    energy_spatial,
    energy_spectral,
    hausdorff_content,
    make_capset_measure,
    make_cascade_measure,
    make_haar_ball,
    read_measure,
    read_pointset,
    write_measure,
)
from .spectral import dft_forward, write_spectrum_csv
from .subspaces import varnavides_experiment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IDENTITY = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fqap", description=__doc__)
    parser.add_argument("--config", help="JSON file with default parameter values")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **flags):
        p = sub.add_parser(name)
        for flag, kind in flags.items():
            p.add_argument(f"--{flag.replace('_', '-')}", type=kind, dest=flag)
        return p

    p = add(
        "make-measure", kind=str, q=int, d=int, k=int, m=int, seed=int, output=str
    )
    add("transform", input=str, output=str, algorithm=str)
    add("count-aps", input=str, output=str)
    add("decompose", input=str, d=int, beta=float, output=str)
    p = add(
        "varnavides",
        input=str,
        dprime=int,
        threshold=int,
        samples=int,
        seed=int,
        output=str,
    )
    p.add_argument("--exhaustive", action="store_true")
    add("energy", input=str, t=float, output=str)
    add("content", input=str, s=float, t=float, output=str)
    add("bench", q=int, d=int, reps=int, output=str)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        defaults = json.load(fh)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ValueError(f"missing required parameter --{name.replace('_', '-')}")


def _emit(payload: dict, args) -> list[str]:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    outputs = []
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
        outputs.append(args.output)
    sys.stdout.write(text)
    return outputs


def _cmd_make_measure(args) -> list[str]:
    _require(args, "kind", "d", "output")
    kind = args.kind
    if kind == "haar-ball":
        _require(args, "q", "k")
        mu = make_haar_ball(args.q, args.d, args.k)
    elif kind == "capset":
        mu = make_capset_measure(args.d)
    elif kind == "cascade":
        _require(args, "q", "m", "seed")
        mu = make_cascade_measure(args.q, args.d, args.m, args.seed)
    else:
        raise ValueError(f"unknown measure kind {kind!r}")
    write_measure(mu, args.output)
    print(f"mass {mu.mass}")
    print(f"support {len(mu.support_indices())}")
    return [args.output]


def _cmd_transform(args) -> list[str]:
    _require(args, "input", "output")
    algorithm = args.algorithm or "fast"
    mu = read_measure(args.input)
    spec = dft_forward(mu.to_dense(), algorithm=algorithm)
    write_spectrum_csv(spec, args.output)
    outputs = [args.output]
    if spec.mode == "exact":
        outputs.append(args.output + ".exact.txt")
    return outputs


def _load_set(path: str):
    with open(path) as fh:
        third = [ln for ln in fh if ln.strip()][2:3]
    if third and third[0].startswith("mode"):
        return read_measure(path).support()
    return read_pointset(path)


def _cmd_count_aps(args) -> list[str]:
    _require(args, "input")
    points = _load_set(args.input)
    return _emit({"q": points.q, "d": points.d, "count": count_aps_set(points)}, args)


def _cmd_decompose(args) -> list[str]:
    _require(args, "input", "d")
    mu = read_measure(args.input)
    report = spectral_decomposition(mu, args.d)
    if args.beta is not None:
        eb = error_bound(mu, args.d, args.beta)
        report.bound_rhs = eb.bound
        report.c2_measured = eb.c2_measured
        report.holds = eb.holds
    return _emit(report.to_json_dict(), args)


def _cmd_varnavides(args) -> list[str]:
    _require(args, "input", "dprime", "threshold")
    points = _load_set(args.input)
    report = varnavides_experiment(
        points,
        args.dprime,
        args.threshold,
        samples=args.samples,
        seed=args.seed or 0,
        exhaustive=args.exhaustive,
    )
    return _emit(report.to_json_dict(), args)


def _cmd_energy(args) -> list[str]:
    _require(args, "input", "t")
    mu = read_measure(args.input)
    spatial = energy_spatial(mu, args.t)
    spectral = energy_spectral(mu, args.t)
    baseline = energy_baseline(mu.q, args.t)
    mass = float(mu.mass)
    measured = (spatial - mass**2 * baseline) / spectral if spectral else None
    alt_expr = (1 - float(mu.q) ** args.t) / (1 - float(mu.q) ** (args.t - 1))
    return _emit(
        {
            "t": args.t,
            "mass": mass,
            "spatial": spatial,
            "spectral_nonzero": spectral,
            "zero_mode": mass**2,
            "baseline": baseline,
            "proportionality_measured": measured,
            "proportionality_closed_form": energy_proportionality(mu.q, args.t),
            "alternative_constant_value": alt_expr,
        },
        args,
    )


def _cmd_content(args) -> list[str]:
    _require(args, "input", "s", "t")
    points = _load_set(args.input)
    return _emit({"s": args.s, "t": args.t, "content": hausdorff_content(points, args.s, args.t)}, args)


def _cmd_bench(args) -> list[str]:
    import numpy as np

    from .spectral import DenseTable

    _require(args, "q", "d")
    q, d, reps = args.q, args.d, args.reps or 3
    rng = np.random.default_rng(0)
    table = DenseTable.build(q, d, rng.random(q**d), mode="float")
    rows = []
    times = {}
    for algorithm in ("fast", "naive"):
        best = float("inf")
        for _ in range(reps):
            t0 = time.perf_counter()
            dft_forward(table, algorithm=algorithm)
            best = min(best, time.perf_counter() - t0)
        times[algorithm] = best
        rows.append(f"{algorithm},{q},{d},{best:.6f}")
    if q == 3 and d >= 10:
        assert times["naive"] >= 10 * times["fast"], (
            f"fast path not 10x faster: naive={times['naive']}, fast={times['fast']}"
        )
    text = "algorithm,q,d,seconds\n" + "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        return [args.output]
    return []


_HANDLERS = {
    "make-measure": _cmd_make_measure,
    "transform": _cmd_transform,
    "count-aps": _cmd_count_aps,
    "decompose": _cmd_decompose,
    "varnavides": _cmd_varnavides,
    "energy": _cmd_energy,
    "content": _cmd_content,
    "bench": _cmd_bench,
}


def _write_manifest(args, outputs: list[str], duration: float) -> None:
    if not getattr(args, "output", None):
        return
    config = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command",) and v is not None
    }
    digests = {}
    for path in outputs:
        with open(path, "rb") as fh:
            digests[path] = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "tool": "fqap",
        "version": __version__,
        "command": args.command,
        "config": config,
        "master_seed": getattr(args, "seed", None) or 0,
        "duration_seconds": duration,
        "output_digests": digests,
    }
    with open(args.output + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        start = time.perf_counter()
        outputs = _HANDLERS[args.command](args)
        _write_manifest(args, outputs, time.perf_counter() - start)
    except IdentityViolation as exc:
        print(f"internal identity violation: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except (ValueError, OSError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

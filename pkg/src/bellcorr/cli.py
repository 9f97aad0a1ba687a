"""Command-line front end.

Subcommands: vertices, facets, classify, violation, kg, realize. Exit code 0
on success, 2 on a validation or consistency failure, 1 on anything else.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as bio
from .exactlin import RationalMatrix
from .polytope import Facet, enumerate_facets, generate_vertices, vertex_array
from .presets import preset
from .quantum import (UnitConfig, half_step_y, kg_constant, quantum_value_certified, seesaw, support,
                      tsirelson_realize)
from .symmetry import classify, report_json, report_markdown

log = logging.getLogger("bellcorr")

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2


class ValidationFailure(Exception):
    """Internal consistency failure; maps to exit code 2."""


def _versions() -> dict:
    import numba
    return {"bellcorr": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "numba": numba.__version__}


def _out_dir(args) -> Path:
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(args, params: dict, outputs: list[Path], t0: float) -> Path:
    missing = [str(p) for p in outputs if not Path(p).exists()]
    if missing:
        raise ValidationFailure(f"declared outputs missing: {missing}")
    path = _out_dir(args) / f"manifest_{args.command}.json"
    bio.write_json(path, {
        "command": args.command,
        "parameters": params,
        "seed": args.seed,
        "versions": _versions(),
        "wall_time": round(time.time() - t0, 3),
        "output_paths": [str(p) for p in outputs],
    })
    return path


def _load_matrix(args) -> RationalMatrix:
    if getattr(args, "preset", None):
        return preset(args.preset)
    if not getattr(args, "matrix", None):
        raise ValidationFailure("give a matrix file or --preset")
    try:
        return bio.read_matrix(args.matrix)
    except (OSError, ValueError, KeyError) as exc:
        raise ValidationFailure(f"cannot read matrix {args.matrix}: {exc}") from exc


# -- commands ---------------------------------------------------------------

def cmd_vertices(args) -> int:
    t0 = time.time()
    verts = generate_vertices(args.m, args.n)
    path = _out_dir(args) / f"vertices_{args.m}x{args.n}.json"
    bio.write_vertices(path, verts)
    print(len(verts))
    _write_manifest(args, {"m": args.m, "n": args.n}, [path], t0)
    return EXIT_OK


def _facets_for(m: int, n: int, method: str, progress=None) -> list[Facet]:
    verts = generate_vertices(m, n)
    try:
        facets = enumerate_facets(verts, method=method, progress=progress)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    if method == "dd":
        classify(facets)  # attach labels to the stream
    return facets


def _write_facet_file(path: Path, facets: list[Facet]) -> None:
    written = bio.write_facets(path, facets)
    if written != len(facets):
        raise ValidationFailure(f"facet stream truncated: {written} of {len(facets)} written")


def cmd_facets(args) -> int:
    t0 = time.time()
    progress = None
    if args.verbose:
        def progress(step, total, rays):
            log.info("dd insertion %d/%d: %d rays", step, total, rays)
    facets = _facets_for(args.m, args.n, args.method, progress)
    path = _out_dir(args) / f"facets_{args.m}x{args.n}_{args.method}.jsonl"
    _write_facet_file(path, facets)
    print(len(facets))
    _write_manifest(args, {"m": args.m, "n": args.n, "method": args.method}, [path], t0)
    if args.expect is not None and len(facets) != args.expect:
        print(f"facet count {len(facets)} != expected {args.expect}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _classes_with_values(facets, args):
    classes = classify(facets)
    unknown = [c for c in classes if c.label == "unknown"]
    if unknown:
        for c in unknown:
            print(f"unknown facet class ({c.orbit_size} facets), representative: "
                  f"{json.dumps(c.representative.to_json())}", file=sys.stderr)
        raise ValidationFailure("classification found unknown facet classes")
    for c in classes:
        lo, hi = quantum_value_certified(support(c.representative), starts=args.starts, seed=args.seed)
        c.quantum_value, c.quantum_upper = lo, hi
    return classes


def cmd_classify(args) -> int:
    t0 = time.time()
    try:
        facets = bio.read_facets(args.facets)
    except (OSError, ValueError) as exc:
        raise ValidationFailure(f"cannot read {args.facets}: {exc}") from exc
    if not facets:
        raise ValidationFailure("empty facet file")
    m, n = facets[0].normal.shape
    classes = _classes_with_values(facets, args)
    out = _out_dir(args)
    stem = args.report or f"classes_{m}x{n}"
    jpath, mpath = out / f"{stem}.json", out / f"{stem}.md"
    bio.write_json(jpath, report_json(m, n, classes))
    md = report_markdown(m, n, classes, n_vertices=2 ** (m + n - 1))
    mpath.write_text(md)
    if args.format == "json":
        print(json.dumps(report_json(m, n, classes), indent=2))
    else:
        print(md, end="")
    _write_manifest(args, {"facets": str(args.facets)}, [jpath, mpath], t0)
    return EXIT_OK


def cmd_violation(args) -> int:
    t0 = time.time()
    M = _load_matrix(args)
    try:
        res = seesaw(M, dim=args.dim, starts=args.starts, tol=args.tol, seed=args.seed, certify=args.certify)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    path = _out_dir(args) / "violation.json"
    bio.write_json(path, res.to_json())
    print(f"value    {res.value:.15f}")
    if args.certify:
        print(f"upper    {res.upper_bound:.15f}")
        print(f"gap      {res.gap:.3e}")
    print(f"residual {res.stationarity.residual:.3e}")
    _write_manifest(args, {"matrix": args.matrix, "preset": args.preset, "starts": args.starts,
                           "dim": args.dim, "tol": args.tol, "certify": args.certify}, [path], t0)
    if args.certify and not res.certificate.valid:
        print("certificate failed", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _cache_path(cache_dir: Path, m: int, n: int, method: str) -> Path:
    key = hashlib.sha256(json.dumps({"m": m, "n": n, "method": method, "version": __version__},
                                    sort_keys=True).encode()).hexdigest()[:16]
    return cache_dir / f"facets_{m}x{n}_{method}_{key}.jsonl"


def cmd_kg(args) -> int:
    t0 = time.time()
    out = _out_dir(args)
    cache = Path(args.cache_dir) if args.cache_dir else out / "cache"
    cache.mkdir(parents=True, exist_ok=True)
    fpath = _cache_path(cache, args.m, args.n, args.method)
    if fpath.exists():
        facets = bio.read_facets(fpath)
        log.info("using cached facets %s", fpath)
    else:
        facets = _facets_for(args.m, args.n, args.method)
        _write_facet_file(fpath, facets)
    classes = classify(facets)
    try:
        value = kg_constant(args.m, args.n, classes, starts=args.starts, seed=args.seed)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    upper = max(c.quantum_upper for c in classes)
    rpath = out / f"kg_{args.m}x{args.n}.json"
    report = report_json(args.m, args.n, classes)
    report.update({"kg_lower": format(value, ".17g"), "kg_upper": format(upper, ".17g")})
    bio.write_json(rpath, report)
    print(report_markdown(args.m, args.n, classes, n_vertices=2 ** (args.m + args.n - 1)), end="")
    print(f"K_G({args.m},{args.n}) = {value:.12f}  (certified upper bound {upper:.12f})")
    _write_manifest(args, {"m": args.m, "n": args.n, "method": args.method}, [fpath, rpath], t0)
    return EXIT_OK if math.isfinite(upper) else EXIT_INVALID


def cmd_realize(args) -> int:
    t0 = time.time()
    if args.config:
        with open(args.config) as fh:
            obj = json.load(fh)
        X = np.array(obj["X"], dtype=float)
        if "Y" in obj:
            Y = np.array(obj["Y"], dtype=float)
        else:
            Y, _ = half_step_y(_load_matrix(args), X)
        cfg = UnitConfig(X, Y)
    else:
        M = _load_matrix(args)
        cfg = seesaw(M, starts=args.starts, seed=args.seed).config
    if not cfg.is_unit():
        raise ValidationFailure("configuration vectors are not unit vectors")
    try:
        real = tsirelson_realize(cfg)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    dev = float(np.abs(real.correlations() - cfg.gram()).max())
    path = _out_dir(args) / "realization.json"
    obj = real.to_json()
    obj["config"] = cfg.to_json()
    obj["max_deviation"] = format(dev, ".17g")
    bio.write_json(path, obj)
    print(f"local dimension {real.local_dim_A}; max deviation {dev:.3e}")
    _write_manifest(args, {"config": args.config, "matrix": args.matrix, "preset": args.preset}, [path], t0)
    return EXIT_OK if dev < 1e-12 else EXIT_INVALID


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker count (results do not depend on it)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("json", "md"), default="md")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="bellcorr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def shape(sp):
        sp.add_argument("--m", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)

    def matrix_src(sp, required=False):
        sp.add_argument("matrix", nargs="?", help="matrix JSON file")
        sp.add_argument("--preset", choices=("chsh", "41", "42", "e11"))

    sp = sub.add_parser("vertices", parents=[common], help="write the vertices of LC(m,n)")
    shape(sp)
    sp.set_defaults(func=cmd_vertices)

    sp = sub.add_parser("facets", parents=[common], help="enumerate facets of LC(m,n)")
    shape(sp)
    sp.add_argument("--method", choices=("dd", "orbit"), default="dd")
    sp.add_argument("--expect", type=int)
    sp.set_defaults(func=cmd_facets)

    sp = sub.add_parser("classify", parents=[common], help="classify a facet file into symmetry classes")
    sp.add_argument("facets", help="facet JSONL file")
    sp.add_argument("--report", help="report file stem (written as .json and .md)")
    sp.add_argument("--starts", type=int, default=64)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("violation", parents=[common], help="maximal quantum violation of a functional")
    matrix_src(sp)
    sp.add_argument("--starts", type=int, default=64)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--certify", action="store_true")
    sp.set_defaults(func=cmd_violation)

    sp = sub.add_parser("kg", parents=[common], help="K_G(m,n) via the full pipeline")
    shape(sp)
    sp.add_argument("--method", choices=("dd", "orbit"), default="orbit")
    sp.add_argument("--starts", type=int, default=64)
    sp.add_argument("--cache-dir")
    sp.set_defaults(func=cmd_kg)

    sp = sub.add_parser("realize", parents=[common], help="operators and state realizing a configuration")
    matrix_src(sp)
    sp.add_argument("--config", help="JSON with unit vectors X (and optionally Y)")
    sp.add_argument("--starts", type=int, default=64)
    sp.set_defaults(func=cmd_realize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

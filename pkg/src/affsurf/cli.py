"""Command-line front end.

Results go to stdout as JSON; diagnostics go to stderr as JSON lines.  Exit
status is 0 on success, 1 for invalid input and 2 for an internal invariant
breach.
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from affsurf.config import TOL
from affsurf.errors import DomainError, FormatError, InvariantBreach

log = logging.getLogger("affsurf")


class _JsonLines(logging.Formatter):
    def format(self, record):
        out = {"level": record.levelname.lower(), "message": record.getMessage()}
        out.update(getattr(record, "fields", {}))
        return json.dumps(sanitize(out), sort_keys=True)


def _setup_logging(verbose):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLines())
    log.handlers[:] = [handler]
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def sanitize(obj):
    """Plain JSON: complex -> [re, im], non-finite floats -> strings, tuples -> lists."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [sanitize(float(obj.real)), sanitize(float(obj.imag))]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(sanitize(obj), sort_keys=True, indent=1, allow_nan=False))
    stream.write("\n")


# --- argument parsing helpers ------------------------------------------------------


def parse_complex(text):
    """'re,im' or 're' (also 'inf') into a complex number."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")


def parse_angle(text):
    if str(text).strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _load(path):
    from affsurf.surface_kernel.io import read_surface

    try:
        return read_surface(path)
    except FileNotFoundError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def _apply_config(args):
    if getattr(args, "eps", None) is not None:
        if not 1e-14 <= args.eps <= 1e-4:
            raise DomainError("--eps must lie in [1e-14, 1e-4]")
        TOL.eps_geom = args.eps
    if getattr(args, "max_pivots", None) is not None:
        if args.max_pivots <= 0:
            raise DomainError("--max-pivots must be positive")
        TOL.max_pivots = args.max_pivots
    if getattr(args, "max_crossings", None) is not None:
        if args.max_crossings <= 0:
            raise DomainError("--max-crossings must be positive")
        TOL.max_crossings = args.max_crossings


# --- subcommands ---------------------------------------------------------------------


def cmd_validate(args):
    from affsurf.surface_kernel import validate

    rep = validate(_load(args.file))
    emit(rep.to_json())
    if not rep.ok:
        log.error("surface is invalid", extra={"fields": {"issues": rep.issues}})
        return 1
    return 0


def _classify_one(res, order, shifted=None):
    from affsurf.fuchsian import classify_residue

    if order >= 2:
        return {"tag": "Irregular", "order": order, "residue": res}
    return classify_residue(res, shifted).to_json()


def cmd_classify(args):
    shifted = None if args.shifted is None else args.shifted == "shifted"
    if args.res is not None:
        emit(_classify_one(args.res, 1, shifted))
        return 0
    if args.file is None:
        raise DomainError("give a surface file or --res")
    from affsurf.surface_kernel import validate

    rep = validate(_load(args.file))
    out = []
    for s in rep.singularities:
        item = {"id": s.id, "order": s.order}
        # a per-point "shifted" flag stored in the file wins over the global option
        hint = s.extra.get("shifted", shifted)
        item.update(_classify_one(s.residue, s.order, hint))
        out.append(item)
    emit({"singularities": out, "residue_sum": rep.residue_sum, "genus": rep.genus})
    return 0


def cmd_normalform(args):
    from affsurf.fuchsian import LaurentSeries, formal_normal_form

    try:
        with open(args.file, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise FormatError(f"cannot read {args.file}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    n = args.n
    if isinstance(data, dict):
        triples = data.get("gamma", data.get("series"))
        n = n if n is not None else data.get("n")
    else:
        triples = data
    if not isinstance(triples, list):
        raise FormatError("series must be a list of [order, re, im] triples")
    nf = formal_normal_form(LaurentSeries.from_triples(triples), n)
    emit(nf.to_json())
    return 0


def cmd_trace(args):
    from affsurf.geodesics import GeodesicState, trace

    surface = _load(args.file)
    res = trace(surface, GeodesicState(args.piece, args.pos, args.dir), t_max=args.tmax,
                max_crossings=args.max_crossings, stop_on_trap=not args.through_traps)
    emit(res.to_json(samples=args.samples))
    if args.svg:
        _write_svg(args.svg, surface, res.polylines(args.samples), title="geodesic")
    return 0


def _write_svg(path, surface, polylines, points=(), title=""):
    from affsurf.svg import render

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render(surface, polylines, points, title))
        fh.write("\n")
    log.info("wrote svg", extra={"fields": {"path": path}})


def cmd_delaunay(args):
    from affsurf.delaunay import complexity_check, decompose

    surface = _load(args.file)
    dec = decompose(surface)
    out = dec.to_json()
    out["check"] = complexity_check(dec)
    emit(out)
    if args.svg:
        lines = [(pid, pts) for s in dec.segments for pid, pts in s.path]
        pts = [(a, pid, z) for a, pid, z in surface.apex_points()]
        _write_svg(args.svg, surface, lines, [(pid, z, a) for a, pid, z in pts], title="Delaunay segments")
    return 0


def cmd_model(args):
    from affsurf.irregular import AsymptoticFamily, build_canonical_model, model_to_surface

    m = args.d - 1
    if len(args.u) == m + 1 and args.b is None:
        fam = AsymptoticFamily.from_values(args.d, args.res, args.u)
    else:
        fam = AsymptoticFamily(args.d, args.res, tuple(args.u), args.b if args.b is not None else 0j)
    model = build_canonical_model(fam, args.R)
    out = model.to_json()
    out["family"] = fam.to_json()
    emit(out)
    if args.emit_surface:
        from affsurf.surface_kernel.io import write_surface

        write_surface(model_to_surface(model), args.emit_surface)
        log.info("wrote surface", extra={"fields": {"path": args.emit_surface}})
    return 0


def cmd_graft(args):
    from affsurf.surface_kernel import Slit, graft_sector, reglue_with_dilation, validate
    from affsurf.surface_kernel.io import surface_to_dict, write_surface

    surface = _load(args.file)
    piece, x, y, phi = args.slit
    slit = Slit(piece, complex(float(x), float(y)), float(phi))
    if args.angle == 0:
        out = reglue_with_dilation(surface, slit, args.dilation)
    else:
        out = graft_sector(surface, slit, args.angle, args.dilation)
    rep = validate(out)
    result = {"report": rep.to_json()}
    if args.out:
        write_surface(out, args.out)
    else:
        result["surface"] = surface_to_dict(out)
    emit(result)
    return 0


def cmd_gamma(args):
    from affsurf.doublepole import class_c_report

    if args.grid:
        out = []
        for re in np.linspace(1.2, 3.2, 5):
            for im in np.linspace(-1.0, 1.0, 5):
                out.append(class_c_report(complex(re, im), args.r, args.quad).to_json())
        emit({"grid": out})
        return 0
    if args.res is None:
        raise DomainError("give --res or --grid")
    emit(class_c_report(args.res, args.r, args.quad).to_json())
    return 0


def cmd_construct(args):
    from affsurf.doublepole import build_construction
    from affsurf.surface_kernel import validate
    from affsurf.surface_kernel.io import write_surface

    con = build_construction(args.res, args.centered, args.fuchsian)
    out = con.to_json()
    out["report"] = validate(con.surface).to_json()
    emit(out)
    if args.out:
        write_surface(con.surface, args.out)
    return 0


def cmd_build(args):
    from affsurf.surface_kernel import builders
    from affsurf.surface_kernel.io import write_surface

    if args.name == "cushion":
        s = builders.build_cushion(args.side)
    elif args.name == "flat-torus":
        s = builders.build_flat_torus(args.u, args.v, marked=args.mark)
    elif args.name == "skew-cone":
        s = builders.build_skew_cone(args.s, args.alpha)
    elif args.name == "exp-plane":
        s = builders.build_exp_affine_plane()
    elif args.name == "translation-cylinder":
        s = builders.build_translation_cylinder()
    elif args.name == "affine-torus":
        s = builders.build_affine_torus(args.u, args.v)
    elif args.name == "affine-cylinder":
        s = builders.build_affine_cylinder(args.c)
    else:  # pragma: no cover - argparse restricts the choices
        raise DomainError(f"unknown builder {args.name}")
    if args.out:
        write_surface(s, args.out)
        emit({"written": args.out, "pieces": s.piece_ids()})
    else:
        from affsurf.surface_kernel.io import surface_to_dict

        emit(surface_to_dict(s))
    return 0


BUILDERS = ("cushion", "flat-torus", "skew-cone", "exp-plane", "translation-cylinder",
            "affine-torus", "affine-cylinder")


def build_parser():
    p = argparse.ArgumentParser(prog="affsurf", description="Complex affine surfaces from glued pieces.")
    p.add_argument("--eps", type=float, help="geometric tolerance (1e-14 .. 1e-4)")
    p.add_argument("--max-pivots", type=int, help="Delaunay traversal budget")
    p.add_argument("--max-crossings", type=int, help="geodesic crossing budget")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("validate", help="check a surface file")
    q.add_argument("file")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("classify", help="classify singularities of a file or one residue")
    q.add_argument("file", nargs="?")
    q.add_argument("--res", type=parse_complex)
    q.add_argument("--shifted", choices=("shifted", "pure"))
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("normalform", help="formal normal form of a truncated Christoffel symbol")
    q.add_argument("file", help="JSON list of [order, re, im] triples, or {'gamma': [...], 'n': N}")
    q.add_argument("--n", type=int)
    q.set_defaults(func=cmd_normalform)

    q = sub.add_parser("trace", help="follow a geodesic")
    q.add_argument("file")
    q.add_argument("--piece", required=True)
    q.add_argument("--pos", type=parse_complex, required=True)
    q.add_argument("--dir", type=parse_complex, required=True)
    q.add_argument("--tmax", type=float, default=math.inf)
    q.add_argument("--samples", type=int, default=8)
    q.add_argument("--through-traps", action="store_true", help="do not stop on entering a trap")
    q.add_argument("--svg")
    q.set_defaults(func=cmd_trace)

    q = sub.add_parser("delaunay", help="Delaunay segments and polygons")
    q.add_argument("file")
    q.add_argument("--svg")
    q.set_defaults(func=cmd_delaunay)

    q = sub.add_parser("model", help="canonical model of an irregular singularity")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--res", type=parse_complex, required=True)
    q.add_argument("--u", type=parse_complex, nargs="+", required=True,
                   help="d-1 values (with --b) or d values u_0..u_{d-1}")
    q.add_argument("--b", type=parse_complex)
    q.add_argument("--R", type=float)
    q.add_argument("--emit-surface")
    q.set_defaults(func=cmd_model)

    q = sub.add_parser("graft", help="sector grafting along a slit")
    q.add_argument("file")
    q.add_argument("--slit", nargs=4, metavar=("PIECE", "X", "Y", "PHI"), required=True)
    q.add_argument("--angle", type=parse_angle, required=True, help="graft angle, 'inf' for the infinite graft")
    q.add_argument("--dilation", type=float, default=1.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_graft)

    q = sub.add_parser("gamma", help="loop integral and Gamma identity for class C double poles")
    q.add_argument("--res", type=parse_complex)
    q.add_argument("--r", type=float, default=1.0)
    q.add_argument("--quad", type=int, default=64)
    q.add_argument("--grid", action="store_true")
    q.set_defaults(func=cmd_gamma)

    q = sub.add_parser("construct", help="sphere with a double pole of given residue and class")
    q.add_argument("--res", type=parse_complex, required=True)
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--centered", dest="centered", action="store_true")
    g.add_argument("--not-centered", dest="centered", action="store_false")
    q.add_argument("--fuchsian", type=int)
    q.add_argument("--out")
    q.set_defaults(func=cmd_construct)

    q = sub.add_parser("build", help="write a builder surface")
    q.add_argument("name", choices=BUILDERS)
    q.add_argument("--u", type=parse_complex, default=1 + 0j)
    q.add_argument("--v", type=parse_complex, default=1j)
    q.add_argument("--mark", type=parse_complex, action="append", default=[])
    q.add_argument("--s", type=float, default=1.0)
    q.add_argument("--alpha", type=float, default=math.pi)
    q.add_argument("--c", type=parse_complex, default=1 + 0j)
    q.add_argument("--side", type=float, default=1.0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_build)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        _apply_config(args)
        return args.func(args)
    except InvariantBreach as exc:
        log.error(str(exc), extra={"fields": {"code": exc.code, "exit": 2}})
        return 2
    except DomainError as exc:
        log.error(str(exc), extra={"fields": {"code": exc.code, "exit": 1}})
        return 1
    except (ValueError, OSError) as exc:
        log.error(str(exc), extra={"fields": {"code": type(exc).__name__, "exit": 1}})
        return 1


if __name__ == "__main__":
    sys.exit(main())

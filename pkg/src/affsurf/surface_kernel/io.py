"""Reading and writing the affsurf-v1 JSON surface format."""

import json
import math
from fractions import Fraction

from affsurf.affine_core import AffMap, LogGlue
from affsurf.errors import FormatError
from affsurf.surface_kernel.pieces import HalfPlane, Piece
from affsurf.surface_kernel.surface import (
    Mark,
    Overlap,
    Pairing,
    Side,
    SingularityRecord,
    Surface,
    Trap,
    TrapRegion,
)

VERSION = "affsurf-v1"


def _num(x):
    if isinstance(x, bool):
        raise FormatError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            if "/" in x:
                return float(Fraction(x))
            return float(x)
        except ValueError as exc:
            raise FormatError(f"bad number {x!r}") from exc
    raise FormatError(f"expected a number, got {x!r}")


def _cx(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(_num(v[0]), _num(v[1]))
    if isinstance(v, (int, float, str)):
        return complex(_num(v), 0.0)
    raise FormatError(f"expected [re, im], got {v!r}")


def _out(z):
    z = complex(z)
    return [z.real, z.imag]


def _meta_out(obj):
    if isinstance(obj, complex):
        return _out(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _meta_out(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_meta_out(v) for v in obj]
    return obj


def surface_to_dict(surface):
    pieces = []
    for pid in surface.piece_ids():
        p = surface.pieces[pid]
        entry = {"id": p.id, "kind": p.kind,
                 "halfplanes": [{"p": _out(h.p), "n": _out(h.n)} for h in p.halfplanes]}
        if p.splits:
            entry["splits"] = [_out(q) for q in p.splits]
        pieces.append(entry)
    pairings = []
    for pr in surface.pairings:
        pairings.append({
            "s1": {"piece": pr.s1.piece, "edge": pr.s1.edge},
            "s2": {"piece": pr.s2.piece, "edge": pr.s2.edge},
            "a": _out(pr.dev_map.a), "b": _out(pr.dev_map.b),
            "anchors": [[_out(pr.anchor[0]), _out(pr.anchor[1])]],
        })
    out = {"version": VERSION, "pieces": pieces, "pairings": pairings,
           "marks": [{"piece": m.piece, "z": _out(m.z), "id": m.id} for m in surface.marks]}
    if surface.records:
        out["singularities"] = [_record_out(r) for r in surface.records]
    if surface.traps:
        out["traps"] = [t.to_json() for t in surface.traps]
    if surface.overlaps:
        out["overlaps"] = [{"piece1": o.piece1, "piece2": o.piece2, "s": _out(o.glue.s), "b": _out(o.glue.b)}
                           for o in surface.overlaps]
    if surface.meta:
        out["meta"] = _meta_out(surface.meta)
    return out


def _record_out(r):
    loc = r.location
    if loc[0] == "cycle":
        at = {"piece": loc[1], "corner": loc[2]}
    elif loc[0] == "point":
        at = {"piece": loc[1], "z": _out(loc[2])}
    else:
        at = {"tag": list(loc)}
    return {"id": r.id, "at": at, "order": r.order, "res": _out(r.residue), "extra": _meta_out(r.extra)}


def _record_in(d):
    at = d.get("at", {})
    if "corner" in at:
        loc = ("cycle", str(at["piece"]), int(at["corner"]))
    elif "z" in at:
        loc = ("point", str(at["piece"]), _cx(at["z"]))
    else:
        loc = tuple(at.get("tag", ["puncture"]))
    return SingularityRecord(str(d["id"]), loc, int(d["order"]), _cx(d["res"]), dict(d.get("extra", {})))


def surface_from_dict(data):
    if data.get("version") != VERSION:
        raise FormatError(f"unsupported version {data.get('version')!r}")
    try:
        pieces = []
        for p in data["pieces"]:
            hps = [HalfPlane(_cx(h["p"]), _cx(h["n"])) for h in p.get("halfplanes", [])]
            splits = [_cx(q) for q in p.get("splits", [])]
            pieces.append(Piece(str(p["id"]), p.get("kind", "flat"), hps, splits))
        pairings = []
        for pr in data.get("pairings", []):
            anchors = pr.get("anchors") or []
            anchor = None
            if anchors:
                anchor = (_cx(anchors[0][0]), _cx(anchors[0][1]))
            pairings.append(Pairing(Side(str(pr["s1"]["piece"]), int(pr["s1"]["edge"])),
                                    Side(str(pr["s2"]["piece"]), int(pr["s2"]["edge"])),
                                    AffMap(_cx(pr.get("a", [1, 0])), _cx(pr.get("b", [0, 0]))), anchor))
        marks = [Mark(str(m["piece"]), _cx(m["z"]), str(m.get("id", ""))) for m in data.get("marks", [])]
        records = [_record_in(r) for r in data.get("singularities", [])]
        traps = []
        for t in data.get("traps", []):
            regions = []
            for r in t["regions"]:
                params = r["params"]
                if r["kind"] == "halfplane":
                    params = (_cx(params[0]), _cx(params[1]))
                else:
                    params = (_cx(params[0]), _num(params[1]), _num(params[2]), _num(params[3]))
                regions.append(TrapRegion(str(r["piece"]), r["kind"], params))
            traps.append(Trap(str(t["id"]), tuple(regions)))
        overlaps = [Overlap(str(o["piece1"]), str(o["piece2"]), LogGlue(_cx(o["s"]), _cx(o["b"])))
                    for o in data.get("overlaps", [])]
        meta = data.get("meta", {})
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed surface file: {exc}") from exc
    return Surface(pieces, pairings, marks=marks, records=records, traps=traps, overlaps=overlaps, meta=meta)


def dumps(surface):
    return json.dumps(surface_to_dict(surface), sort_keys=True, indent=1)


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from exc
    return surface_from_dict(data)


def write_surface(surface, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(surface))
        fh.write("\n")


def read_surface(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())

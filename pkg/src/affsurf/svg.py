"""SVG rendering of pieces with polylines drawn in piece coordinates."""

import xml.etree.ElementTree as ET

SVG_NS = "http://www.w3.org/2000/svg"


def _clip(poly, hp):
    """Sutherland-Hodgman step: keep the part of ``poly`` inside the half-plane."""
    out = []
    k = len(poly)
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        va, vb = hp.value(a), hp.value(b)
        if va >= 0:
            out.append(a)
        if (va >= 0) != (vb >= 0):
            out.append(a + (b - a) * (va / (va - vb)))
    return out


def piece_polygon(piece, box=None):
    """Polygon of the piece, unbounded pieces cut to a square window."""
    if box is None:
        pts = piece.finite_points() + [h.p for h in piece.halfplanes]
        if pts:
            cx = sum(pts) / len(pts)
            rad = max(2.0, 1.5 * max(abs(p - cx) for p in pts) + 1.0)
        else:
            cx, rad = 0j, 3.0
        box = (cx.real - rad, cx.imag - rad, cx.real + rad, cx.imag + rad)
    x0, y0, x1, y1 = box
    poly = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    for h in piece.halfplanes:
        poly = _clip(poly, h)
        if not poly:
            break
    return poly


def _bbox(points):
    xs = [p.real for p in points]
    ys = [p.imag for p in points]
    return min(xs), min(ys), max(xs), max(ys)


def render(surface, polylines=(), points=(), title=""):
    """SVG string: one panel per piece, laid out left to right.

    ``polylines`` are (piece, [complex]) pairs and ``points`` (piece, complex, label)
    triples, all in piece coordinates; each panel maps them with the same affine
    transform as the piece outline.
    """
    root = ET.Element("svg", {"xmlns": SVG_NS, "version": "1.1"})
    if title:
        ET.SubElement(root, "title").text = title
    offset = 0.0
    top, bottom = 0.0, 0.0
    gap = 0.5
    for pid in surface.piece_ids():
        poly = piece_polygon(surface.pieces[pid])
        if not poly:
            continue
        x0, y0, x1, y1 = _bbox(poly)
        dx = offset - x0
        # y axis flipped so the picture has the usual orientation
        g = ET.SubElement(root, "g", {"id": f"piece-{pid}", "transform": f"translate({dx:.9g},0) scale(1,-1)"})
        pts = " ".join(f"{z.real:.9g},{z.imag:.9g}" for z in poly)
        ET.SubElement(g, "polygon", {"points": pts, "fill": "#eef3fa", "stroke": "#345",
                                     "stroke-width": "0.01"})
        for qid, line in polylines:
            if qid != pid or len(line) < 2:
                continue
            pts = " ".join(f"{z.real:.9g},{z.imag:.9g}" for z in line)
            ET.SubElement(g, "polyline", {"points": pts, "fill": "none", "stroke": "#c33",
                                          "stroke-width": "0.02"})
        for qid, z, label in points:
            if qid == pid:
                ET.SubElement(g, "circle", {"cx": f"{z.real:.9g}", "cy": f"{z.imag:.9g}", "r": "0.03",
                                            "fill": "#222"}).set("data-label", str(label))
        ET.SubElement(root, "text", {"x": f"{offset:.9g}", "y": f"{-y1 - 0.1:.9g}",
                                     "font-size": "0.25"}).text = pid
        offset += (x1 - x0) + gap
        top, bottom = min(top, -y1 - 0.5), max(bottom, -y0)
    width = max(offset - gap, 1.0)
    root.set("viewBox", f"{-gap:.9g} {top:.9g} {width + 2 * gap:.9g} {bottom - top + gap:.9g}")
    return ET.tostring(root, encoding="unicode")

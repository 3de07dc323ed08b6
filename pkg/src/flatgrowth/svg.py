"""Minimal SVG renderer for chains and polylines (world y axis points up)."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from flatgrowth.chains import PolyhedralChain

SVG_NS = "http://www.w3.org/2000/svg"


@dataclass
class Layer:
    kind: str                 # "polyline", "polygon", "segments", "triangles" or "points"
    data: np.ndarray          # (N, 2) points, (M, 2, 2) segments or (M, 3, 2) triangles
    stroke: str = "black"
    fill: str = "none"
    width: float = 1.0
    arrows: bool = False
    label: str = ""


@dataclass
class Figure:
    layers: list[Layer] = field(default_factory=list)
    size: int = 600
    margin: float = 0.05

    def add_chain(self, chain: PolyhedralChain, **style) -> "Figure":
        c = chain.canonical()
        if c.is_empty:
            return self
        if c.dimension == 1:
            # reverse segments with negative coefficient so arrows show orientation
            V = np.where((c.coeffs < 0)[:, None, None], c.verts[:, ::-1], c.verts)
            self.layers.append(Layer("segments", V, **style))
        elif c.dimension == 2:
            style.setdefault("fill", "#9ecae1")
            self.layers.append(Layer("triangles", c.verts, **style))
        else:
            self.layers.append(Layer("points", c.verts[:, 0], **style))
        return self

    def add_polyline(self, points, closed: bool = False, **style) -> "Figure":
        self.layers.append(Layer("polygon" if closed else "polyline", np.asarray(points, float), **style))
        return self

    def _bounds(self):
        pts = np.concatenate([layer.data.reshape(-1, 2) for layer in self.layers]) if self.layers else np.zeros((1, 2))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = max(float(np.max(hi - lo)), 1e-12)
        pad = self.margin * span
        return lo - pad, span + 2 * pad

    def to_element(self) -> ET.Element:
        lo, span = self._bounds()
        scale = self.size / span
        h = self.size

        def fmt(P):
            X = (P[..., 0] - lo[0]) * scale
            Y = h - (P[..., 1] - lo[1]) * scale
            return np.stack([X, Y], axis=-1)

        root = ET.Element("svg", {"xmlns": SVG_NS, "width": str(self.size), "height": str(self.size),
                                  "viewBox": f"0 0 {self.size} {self.size}"})
        defs = ET.SubElement(root, "defs")
        marker = ET.SubElement(defs, "marker", {"id": "arrow", "viewBox": "0 0 10 10", "refX": "10", "refY": "5",
                                                "markerWidth": "6", "markerHeight": "6", "orient": "auto"})
        ET.SubElement(marker, "path", {"d": "M 0 0 L 10 5 L 0 10 z"})
        for layer in self.layers:
            g = ET.SubElement(root, "g", {"stroke": layer.stroke, "fill": layer.fill,
                                          "stroke-width": f"{layer.width:g}"})
            if layer.label:
                ET.SubElement(g, "title").text = layer.label
            P = fmt(layer.data)
            if layer.kind in ("polyline", "polygon"):
                ET.SubElement(g, layer.kind, {"points": _points(P)})
            elif layer.kind == "segments":
                segs = [f"M {a[0]:.3f} {a[1]:.3f} L {b[0]:.3f} {b[1]:.3f}" for a, b in P]
                if layer.arrows:
                    # one path per segment so every segment carries its own arrowhead
                    for d in segs:
                        ET.SubElement(g, "path", {"d": d, "marker-end": "url(#arrow)"})
                else:
                    ET.SubElement(g, "path", {"d": " ".join(segs)})
            elif layer.kind == "triangles":
                d = " ".join(f"M {t[0, 0]:.3f} {t[0, 1]:.3f} L {t[1, 0]:.3f} {t[1, 1]:.3f} "
                             f"L {t[2, 0]:.3f} {t[2, 1]:.3f} Z" for t in P)
                ET.SubElement(g, "path", {"d": d})
            elif layer.kind == "points":
                for x, y in P:
                    ET.SubElement(g, "circle", {"cx": f"{x:.3f}", "cy": f"{y:.3f}", "r": "2"})
        return root

    def tostring(self) -> str:
        root = self.to_element()
        ET.indent(root)
        return ET.tostring(root, encoding="unicode") + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.tostring())
        return path


def _points(P) -> str:
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in P)

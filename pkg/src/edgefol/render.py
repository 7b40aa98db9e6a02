"""SVG phase portraits (domain and surface view) and CSV export.

Rendering is a pure function of its inputs: floats are formatted with a
fixed precision and elements are emitted in deterministic order, so a given
portrait and style always produce byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPortrait
from .geometry import surface_polynomials
from .jets import EdgeJet
from .poly import CompiledPolySet
from .tracer import Portrait

SVG_NS = "http://www.w3.org/2000/svg"


@dataclass(frozen=True)
class RenderStyle:
    """Stroke and camera settings for portrait rendering."""

    curve_width: float = 0.8
    separatrix_width: float = 1.1
    discriminant_width: float = 1.0
    edge_width: float = 1.6
    curve_color: str = "#2b6cb0"
    separatrix_color: str = "#c53030"
    discriminant_color: str = "#718096"
    edge_color: str = "#1a202c"
    marker_color: str = "#c53030"
    marker_radius: float = 2.5
    dash_pattern: str = "6 4"
    size_px: int = 640
    camera_direction: tuple = (0.35, -0.55, 0.76)
    camera_up: tuple = (0.0, 0.0, 1.0)

    def camera_frame(self):
        """Orthonormal (right, up, forward) triple; raises on a degenerate
        camera (direction parallel to the up hint)."""
        d = np.asarray(self.camera_direction, dtype=float)
        nd = np.linalg.norm(d)
        if nd == 0.0:
            raise ValueError("camera direction must be nonzero")
        d = d / nd
        up_hint = np.asarray(self.camera_up, dtype=float)
        nu = np.linalg.norm(up_hint)
        if nu == 0.0:
            raise ValueError("camera up-vector must be nonzero")
        up_hint = up_hint / nu
        right = np.cross(up_hint, d)
        nr = np.linalg.norm(right)
        if nr < 1e-12:
            raise ValueError("camera direction and up-vector are parallel")
        right = right / nr
        up = np.cross(d, right)
        return right, up, d


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    return f"{x:.6g}"


_MAX_POLYLINE_POINTS = 700


def _thin(points_xy):
    """Uniform-stride decimation for display; keeps both endpoints."""
    n = len(points_xy)
    if n <= _MAX_POLYLINE_POINTS:
        return points_xy
    idx = np.linspace(0, n - 1, _MAX_POLYLINE_POINTS).round().astype(int)
    return points_xy[idx]


def _polyline(points_xy, *, color, width, dashed=False, cls="curve") -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in _thin(np.asarray(points_xy)))
    dash = ' stroke-dasharray="6 4"' if dashed else ""
    return (f'<polyline class="{cls}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash} points="{pts}" />')


def portrait_to_svg(portrait: Portrait, style: RenderStyle = RenderStyle(),
                    top_class: str | None = None) -> str:
    """Render the domain phase portrait to an SVG 1.1 document.

    Integral curves are solid polylines, separatrices dashed, the
    discriminant locus gets its own color, and each lifted singular point is
    marked at the origin with a direction tick.  The configuration tag is
    embedded as an XML comment so golden-file tests can assert on it.
    """
    if not portrait.curves:
        raise EmptyPortrait("portrait contains no curves")
    b = portrait.box
    header = (
        f'<svg xmlns="{SVG_NS}" version="1.1" '
        f'width="{style.size_px}" height="{style.size_px}" '
        f'viewBox="{_fmt(-b)} {_fmt(-b)} {_fmt(2 * b)} {_fmt(2 * b)}">'
    )
    parts = [header]
    tag = top_class if top_class is not None else "unclassified"
    parts.append(f"<!-- top_class: {tag} | case: {portrait.case.value} -->")
    scale = 2.0 * b / style.size_px   # stroke widths given in pixels

    for line in portrait.discriminant_locus:
        parts.append(_polyline(
            line, color=style.discriminant_color,
            width=style.discriminant_width * scale, cls="discriminant"))
    for curve in portrait.curves:
        if curve.is_separatrix:
            parts.append(_polyline(
                curve.projected, color=style.separatrix_color,
                width=style.separatrix_width * scale, dashed=True,
                cls="separatrix"))
        else:
            parts.append(_polyline(
                curve.projected, color=style.curve_color,
                width=style.curve_width * scale, cls="curve"))

    tick = 6.0 * style.marker_radius * scale
    for value, lifted_type in portrait.singular_points:
        # all Type-2 singular points sit over the origin; the tick shows the
        # direction (du:dv) of the root
        norm = math.hypot(value, 1.0)
        dx, dy = value / norm, 1.0 / norm
        parts.append(
            f'<line class="singular-tick" x1="{_fmt(-tick * dx)}" '
            f'y1="{_fmt(tick * dy)}" x2="{_fmt(tick * dx)}" '
            f'y2="{_fmt(-tick * dy)}" stroke="{style.marker_color}" '
            f'stroke-width="{_fmt(0.6 * scale)}" />'
        )
        parts.append(
            f'<circle class="singular-marker" cx="0" cy="0" '
            f'r="{_fmt(style.marker_radius * scale)}" '
            f'fill="{style.marker_color}"><title>{lifted_type}</title></circle>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def surface_view_to_svg(curves3d: list, style: RenderStyle = RenderStyle()) -> str:
    """Orthographic projection of 3-space polylines to an SVG document.

    Polylines are depth-sorted painter's style by mean depth along the
    camera direction; the singular edge curve is drawn emphasized.
    """
    right, up, forward = style.camera_frame()
    projected = []
    for sc in curves3d:
        pts = np.asarray(sc.points, dtype=float)
        if len(pts) == 0:
            continue
        xy = np.stack([pts @ right, pts @ up], axis=1)
        depth = float(np.mean(pts @ forward))
        projected.append((depth, xy, sc.kind))
    if not projected:
        raise EmptyPortrait("no curves to render")
    projected.sort(key=lambda item: (item[0], item[2]))

    allpts = np.vstack([xy for _, xy, _ in projected])
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.05 * span
    x0, y0 = lo[0] - pad, -(hi[1] + pad)
    side = span + 2 * pad
    scale = side / style.size_px

    header = (
        f'<svg xmlns="{SVG_NS}" version="1.1" '
        f'width="{style.size_px}" height="{style.size_px}" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(side)} {_fmt(side)}">'
    )
    parts = [header, "<!-- surface view -->"]
    styles = {
        "curve": (style.curve_color, style.curve_width, False),
        "separatrix": (style.separatrix_color, style.separatrix_width, True),
        "discriminant": (style.discriminant_color, style.discriminant_width, False),
        "edge": (style.edge_color, style.edge_width, False),
    }
    for _, xy, kind in projected:
        color, width, dashed = styles.get(kind, styles["curve"])
        parts.append(_polyline(xy, color=color, width=width * scale,
                               dashed=dashed, cls=kind))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def curves_to_csv(portrait: Portrait, jet: EdgeJet | None = None) -> str:
    """Flat CSV of every traced curve: t, u, v, p, x, y, z, curve_id, separatrix."""
    image = None
    if jet is not None:
        image = CompiledPolySet(list(surface_polynomials(jet)))
    lines = ["t,u,v,p,x,y,z,curve_id,separatrix"]
    for cid, curve in enumerate(portrait.curves):
        uvp = curve.samples
        if image is not None:
            xyz = np.stack(image.values(uvp[:, 0], uvp[:, 1]), axis=1)
        else:
            xyz = np.full((len(uvp), 3), np.nan)
        flag = 1 if curve.is_separatrix else 0
        for k in range(len(uvp)):
            lines.append(
                f"{curve.t[k]:.9g},{uvp[k, 0]:.9g},{uvp[k, 1]:.9g},"
                f"{uvp[k, 2]:.9g},{xyz[k, 0]:.9g},{xyz[k, 1]:.9g},"
                f"{xyz[k, 2]:.9g},{cid},{flag}"
            )
    return "\n".join(lines) + "\n"

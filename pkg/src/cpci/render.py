"""Sunburst-glyph SVG rendering of per-vertex probability summaries.

Each vertex gets a disk split into three fixed 120-degree sectors,
counterclockwise from the positive x axis: Maximum [90, 210), Minimum
[210, 330), Saddle [330, 450).  Sector radii encode probability as
r_max * sqrt(p), so swept area is proportional to p.  Per sector the
paint order is: light fill out to p_upper, dark fill out to p_lower on
top of it, then a black arc stroked at the point estimate's radius.
Zero probabilities emit no geometry.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .grid import GridTopology
from .stats import ProbabilitySummary

__all__ = [
    "GlyphStyle",
    "GlyphGeometry",
    "SectorGeometry",
    "SECTORS",
    "glyph_radius",
    "glyph_geometry",
    "render_glyph",
    "render_map",
]

SECTORS = (("max", 90.0, 210.0), ("min", 210.0, 330.0), ("sad", 330.0, 450.0))

_TYPE_LABELS = {"max": "Maximum", "min": "Minimum", "sad": "Saddle"}
_HEX_COLOR = re.compile(r"#[0-9A-Fa-f]{6}\Z")
_REFERENCE_PROBS = (0.25, 0.5, 0.75, 1.0)


def _default_colors() -> dict[str, tuple[str, str]]:
    return {
        "max": ("#F4B6B6", "#C0392B"),
        "min": ("#B6CDF4", "#2B5AC0"),
        "sad": ("#BCE4BC", "#2E8B40"),
    }


@dataclass(frozen=True, eq=False)
class GlyphStyle:
    """Geometry and palette knobs; r_max <= cell/2 keeps glyphs disjoint."""

    r_max: float = 18.0
    cell: float = 40.0
    margin: float = 30.0
    arc_stroke: float = 1.5
    colors: dict[str, tuple[str, str]] = field(default_factory=_default_colors)

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError(f"r_max must be positive, got {self.r_max!r}")
        if not (math.isfinite(self.cell) and self.cell > 0):
            raise ValueError(f"cell must be positive, got {self.cell!r}")
        if self.r_max > self.cell / 2:
            raise ValueError(
                f"r_max={self.r_max} exceeds cell/2={self.cell / 2}; glyphs would overlap")
        if not (math.isfinite(self.margin) and self.margin >= 0):
            raise ValueError(f"margin must be >= 0, got {self.margin!r}")
        if not (math.isfinite(self.arc_stroke) and self.arc_stroke > 0):
            raise ValueError(f"arc_stroke must be positive, got {self.arc_stroke!r}")
        if set(self.colors) != {"max", "min", "sad"}:
            raise ValueError(f"colors must map exactly min/max/sad, got {set(self.colors)}")
        for code, pair in self.colors.items():
            if len(pair) != 2 or not all(_HEX_COLOR.match(c) for c in pair):
                raise ValueError(f"colors[{code!r}] must be a (light, dark) hex pair, got {pair!r}")


@dataclass(frozen=True)
class SectorGeometry:
    """One type's slice: fixed angular span plus the three encoded radii."""

    code: str
    start_deg: float
    end_deg: float
    radius_hat: float
    radius_lower: float
    radius_upper: float


@dataclass(frozen=True)
class GlyphGeometry:
    sectors: tuple[SectorGeometry, SectorGeometry, SectorGeometry]


def glyph_radius(p: float, r_max: float) -> float:
    """Radius encoding probability p: r_max * sqrt(p), so area tracks p."""
    if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 <= p <= 1.0):
        raise ValueError(f"p={p!r} is not a probability")
    return r_max * math.sqrt(p)


def glyph_geometry(summary: ProbabilitySummary, style: GlyphStyle) -> GlyphGeometry:
    sectors = tuple(
        SectorGeometry(
            code=code,
            start_deg=start,
            end_deg=end,
            radius_hat=glyph_radius(summary.by_code(code).p_hat, style.r_max),
            radius_lower=glyph_radius(summary.by_code(code).p_lower, style.r_max),
            radius_upper=glyph_radius(summary.by_code(code).p_upper, style.r_max),
        )
        for code, start, end in SECTORS
    )
    return GlyphGeometry(sectors=sectors)


def _fmt(value: float) -> str:
    # 8 significant digits keep parse-back within 1e-6 relative error
    text = format(float(value), ".8g")
    return "0" if text == "-0" else text


def _point(r: float, deg: float) -> tuple[float, float]:
    # SVG y grows downward; negate sin so angles run counterclockwise on screen
    rad = math.radians(deg)
    return r * math.cos(rad), -r * math.sin(rad)


def _sector_path(r: float, start_deg: float, end_deg: float) -> str:
    x1, y1 = _point(r, start_deg)
    x2, y2 = _point(r, end_deg)
    return (
        f"M 0 0 L {_fmt(x1)} {_fmt(y1)} "
        f"A {_fmt(r)} {_fmt(r)} 0 0 0 {_fmt(x2)} {_fmt(y2)} Z"
    )


def _arc_path(r: float, start_deg: float, end_deg: float) -> str:
    x1, y1 = _point(r, start_deg)
    x2, y2 = _point(r, end_deg)
    return (
        f"M {_fmt(x1)} {_fmt(y1)} "
        f"A {_fmt(r)} {_fmt(r)} 0 0 0 {_fmt(x2)} {_fmt(y2)}"
    )


def _glyph_paths(summary: ProbabilitySummary, style: GlyphStyle) -> list[str]:
    paths = []
    for sector in glyph_geometry(summary, style).sectors:
        light, dark = style.colors[sector.code]
        if sector.radius_upper > 0:
            paths.append(
                f'<path d="{_sector_path(sector.radius_upper, sector.start_deg, sector.end_deg)}"'
                f' fill="{light}"/>')
        if sector.radius_lower > 0:
            paths.append(
                f'<path d="{_sector_path(sector.radius_lower, sector.start_deg, sector.end_deg)}"'
                f' fill="{dark}"/>')
        if sector.radius_hat > 0:
            paths.append(
                f'<path d="{_arc_path(sector.radius_hat, sector.start_deg, sector.end_deg)}"'
                f' fill="none" stroke="#000000" stroke-width="{_fmt(style.arc_stroke)}"/>')
    return paths


def render_glyph(
    summary: ProbabilitySummary,
    style: GlyphStyle,
    center: tuple[float, float],
    vertex: tuple[int, int] | None = None,
) -> str:
    """One glyph as an SVG `<g>` fragment translated to `center`."""
    attrs = ""
    if vertex is not None:
        attrs = f' data-vertex="{vertex[0]},{vertex[1]}"'
    cx, cy = center
    open_tag = f'<g{attrs} transform="translate({_fmt(cx)},{_fmt(cy)})">'
    paths = _glyph_paths(summary, style)
    if not paths:
        return open_tag + "</g>"
    return open_tag + "\n" + "\n".join(paths) + "\n</g>"


def _legend(style: GlyphStyle, origin_x: float) -> tuple[str, float, float]:
    """Legend fragment plus its (width, height): a three-sector key glyph
    with type labels and reference disks for p in {0.25, 0.5, 0.75, 1}."""
    r = style.r_max
    key_cx = 110.0
    key_cy = style.margin + r + 20.0
    parts = [f'<g id="legend" transform="translate({_fmt(origin_x)},0)">']
    key_paths = []
    labels = []
    for code, start, end in SECTORS:
        light, dark = style.colors[code]
        key_paths.append(
            f'<path d="{_sector_path(r, start, end)}" fill="{light}"'
            f' stroke="{dark}" stroke-width="1"/>')
        mid = 0.5 * (start + end)
        lx, ly = _point(r + 8.0, mid)
        anchor = {"max": "end", "min": "middle", "sad": "start"}[code]
        labels.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" text-anchor="{anchor}"'
            f' dominant-baseline="middle" font-family="sans-serif" font-size="12">'
            f"{_TYPE_LABELS[code]}</text>")
    parts.append(f'<g transform="translate({_fmt(key_cx)},{_fmt(key_cy)})">')
    parts.extend(key_paths)
    parts.extend(labels)
    parts.append("</g>")
    disk_y = key_cy + r + 50.0
    disk_gap = 2.0 * r + 18.0
    for k, p in enumerate(_REFERENCE_PROBS):
        cx = 30.0 + r + k * disk_gap
        parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(disk_y)}" r="{_fmt(glyph_radius(p, r))}"'
            f' fill="none" stroke="#888888" stroke-width="1"/>')
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(disk_y + r + 16.0)}" text-anchor="middle"'
            f' font-family="sans-serif" font-size="11">p={_fmt(p)}</text>')
    parts.append("</g>")
    width = max(2 * key_cx, 30.0 + r + 3 * disk_gap + r + 30.0)
    height = disk_y + r + 30.0
    return "\n".join(parts), width, height


def render_map(
    summaries: list[ProbabilitySummary],
    topology: GridTopology,
    style: GlyphStyle = GlyphStyle(),
) -> str:
    """Full SVG document: one glyph per vertex plus the legend.

    Vertex (i, j) is centered at (margin + i*cell, margin + (ny-1-j)*cell),
    so j increases upward on screen.  Output is byte-stable for fixed
    inputs; glyph groups appear in linear vertex order.
    """
    n = topology.n
    if len(summaries) != n:
        raise ValueError(f"expected {n} summaries for {topology.nx}x{topology.ny} grid, got {len(summaries)}")
    grid_w = 2 * style.margin + (topology.nx - 1) * style.cell
    grid_h = 2 * style.margin + (topology.ny - 1) * style.cell
    legend, legend_w, legend_h = _legend(style, grid_w)
    width = grid_w + legend_w
    height = max(grid_h, legend_h)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
    ]
    for v in range(n):
        i, j = topology.coords(v)
        cx = style.margin + i * style.cell
        cy = style.margin + (topology.ny - 1 - j) * style.cell
        parts.append(render_glyph(summaries[v], style, (cx, cy), vertex=(i, j)))
    parts.append(legend)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

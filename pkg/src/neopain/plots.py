"""Static, dependency-free report artifacts: ROC tables and an SVG plot.

The SVG is assembled from formatted strings with fixed precision so that a
rerun with the same inputs produces byte-identical output.
"""

from __future__ import annotations

from pathlib import Path

from neopain.errors import ContractError

_PALETTE = (
    ("face", "#d62728"),
    ("body", "#2ca02c"),
    ("sound", "#1f77b4"),
    ("fused", "#9467bd"),
)
_FALLBACK = ("#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

_W, _H = 560, 420
_ML, _MR, _MT, _MB = 60, 20, 30, 50


def _color(name: str, index: int) -> str:
    for key, color in _PALETTE:
        if key == name:
            return color
    return _FALLBACK[index % len(_FALLBACK)]


def _check_curves(curves: dict) -> None:
    if not curves:
        raise ContractError("no ROC curves to draw")
    for name, points in curves.items():
        for p in points:
            if len(p) != 3:
                raise ContractError(
                    f"curve {name!r}: points must be (fpr, tpr, threshold)"
                )


def write_roc_csv(path, curves: dict) -> None:
    """One row per ROC point: approach,fpr,tpr,threshold."""
    _check_curves(curves)
    lines = ["approach,fpr,tpr,threshold"]
    for name in curves:
        for fpr, tpr, thr in curves[name]:
            lines.append("%s,%.6f,%.6f,%s" % (name, fpr, tpr, _fmt_thr(thr)))
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt_thr(thr: float) -> str:
    if thr == float("inf"):
        return "inf"
    if thr == float("-inf"):
        return "-inf"
    return "%.6f" % thr


def _x(fpr: float) -> float:
    return _ML + fpr * (_W - _ML - _MR)


def _y(tpr: float) -> float:
    return _H - _MB - tpr * (_H - _MT - _MB)


def render_roc_svg(path, curves: dict, title: str = "ROC curves") -> None:
    """Axes in [0, 1], one polyline per approach, chance diagonal, legend."""
    _check_curves(curves)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (_W, _H, _W, _H),
        '<rect width="%d" height="%d" fill="white"/>' % (_W, _H),
        '<text x="%d" y="20" font-family="sans-serif" font-size="14" '
        'text-anchor="middle">%s</text>' % (_W // 2, title),
    ]
    # frame and ticks
    parts.append(
        '<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
        'stroke="black"/>' % (_ML, _MT, _W - _ML - _MR, _H - _MT - _MB)
    )
    for i in range(5):
        v = i / 4.0
        x, y = _x(v), _y(v)
        parts.append('<line x1="%.1f" y1="%d" x2="%.1f" y2="%d" '
                     'stroke="black"/>' % (x, _H - _MB, x, _H - _MB + 5))
        parts.append('<text x="%.1f" y="%d" font-family="sans-serif" '
                     'font-size="11" text-anchor="middle">%.2f</text>'
                     % (x, _H - _MB + 18, v))
        parts.append('<line x1="%d" y1="%.1f" x2="%d" y2="%.1f" '
                     'stroke="black"/>' % (_ML - 5, y, _ML, y))
        parts.append('<text x="%d" y="%.1f" font-family="sans-serif" '
                     'font-size="11" text-anchor="end">%.2f</text>'
                     % (_ML - 8, y + 4, v))
    parts.append('<text x="%d" y="%d" font-family="sans-serif" font-size="12" '
                 'text-anchor="middle">False positive rate</text>'
                 % ((_ML + _W - _MR) // 2, _H - 12))
    parts.append('<text x="16" y="%d" font-family="sans-serif" font-size="12" '
                 'text-anchor="middle" transform="rotate(-90 16 %d)">'
                 'True positive rate</text>'
                 % ((_MT + _H - _MB) // 2, (_MT + _H - _MB) // 2))
    parts.append('<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" '
                 'stroke="#aaaaaa" stroke-dasharray="5,4"/>'
                 % (_x(0.0), _y(0.0), _x(1.0), _y(1.0)))

    legend_y = _MT + 14
    for i, (name, points) in enumerate(curves.items()):
        color = _color(name, i)
        coords = " ".join("%.2f,%.2f" % (_x(fpr), _y(tpr))
                          for fpr, tpr, _ in sorted(points))
        parts.append('<polyline fill="none" stroke="%s" stroke-width="1.8" '
                     'points="%s"/>' % (color, coords))
        lx = _W - _MR - 150
        parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
                     'stroke-width="1.8"/>'
                     % (lx, legend_y, lx + 24, legend_y, color))
        parts.append('<text x="%d" y="%d" font-family="sans-serif" '
                     'font-size="12">%s</text>' % (lx + 30, legend_y + 4, name))
        legend_y += 18
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")

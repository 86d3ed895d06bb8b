"""Minimal SVG emitters for the two report figures (line plot, heatmap).

The CSV files are the authoritative outputs; these are convenience renders.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd")


def _doc(width, height, body):
    return ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="0 0 %d %d" '
            'font-family="sans-serif" font-size="12">\n<rect width="100%%" height="100%%" fill="white"/>\n%s</svg>\n'
            % (width, height, width, height, "".join(body)))


def line_plot(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400) -> str:
    """``series`` maps a legend name to ``(x, y)`` arrays."""
    left, right, top, bottom = 60, 20, 30, 45
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()]) if series else np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    body = ['<text x="%d" y="18" text-anchor="middle">%s</text>\n' % (width // 2, escape(title)),
            '<rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="black"/>\n' % (left, top, pw, ph)]
    for frac in np.linspace(0, 1, 5):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        body.append('<text x="%.1f" y="%d" text-anchor="middle">%.3g</text>\n' % (px(xv), height - bottom + 15, xv))
        body.append('<text x="%d" y="%.1f" text-anchor="end">%.3g</text>\n' % (left - 5, py(yv) + 4, yv))
    body.append('<text x="%d" y="%d" text-anchor="middle">%s</text>\n' % (left + pw // 2, height - 8, escape(xlabel)))
    body.append('<text x="14" y="%d" text-anchor="middle" transform="rotate(-90 14 %d)">%s</text>\n'
                % (top + ph // 2, top + ph // 2, escape(ylabel)))
    for i, (name, (x, y)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join("%.2f,%.2f" % (px(a), py(b)) for a, b in zip(np.asarray(x, float), np.asarray(y, float)))
        body.append('<polyline fill="none" stroke="%s" stroke-width="1.5" points="%s"/>\n' % (color, pts))
        ly = top + 15 + 16 * i
        body.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" stroke-width="2"/>\n'
                    % (left + pw - 110, ly - 4, left + pw - 90, ly - 4, color))
        body.append('<text x="%d" y="%d">%s</text>\n' % (left + pw - 85, ly, escape(name)))
    return _doc(width, height, body)


def heatmap(matrix, row_labels, col_labels, title: str = "", cell: int = 70) -> str:
    """Integer matrix as shaded cells with counts; rows top to bottom."""
    m = np.asarray(matrix)
    left, top = 150, 130
    width, height = left + cell * m.shape[1] + 20, top + cell * m.shape[0] + 20
    peak = float(m.max()) if m.size and m.max() > 0 else 1.0
    body = ['<text x="%d" y="18" text-anchor="middle">%s</text>\n' % (width // 2, escape(title))]
    for j, name in enumerate(col_labels):
        x = left + cell * j + cell // 2
        body.append('<text x="%d" y="%d" text-anchor="start" transform="rotate(-45 %d %d)">%s</text>\n'
                    % (x, top - 8, x, top - 8, escape(str(name))))
    for i, name in enumerate(row_labels):
        y = top + cell * i
        body.append('<text x="%d" y="%d" text-anchor="end">%s</text>\n' % (left - 6, y + cell // 2 + 4,
                                                                          escape(str(name))))
        for j in range(m.shape[1]):
            shade = int(round(255 * (1 - m[i, j] / peak)))
            body.append('<rect x="%d" y="%d" width="%d" height="%d" fill="rgb(%d,%d,255)" stroke="gray"/>\n'
                        % (left + cell * j, y, cell, cell, shade, shade))
            ink = "white" if m[i, j] / peak > 0.5 else "black"
            body.append('<text x="%d" y="%d" text-anchor="middle" fill="%s">%s</text>\n'
                        % (left + cell * j + cell // 2, y + cell // 2 + 4, ink, m[i, j]))
    return _doc(width, height, body)

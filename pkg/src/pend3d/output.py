"""Deterministic CSV and SVG writers.

Floats are written with 17 significant digits in C-locale formatting, so
identical data always gives identical bytes.
"""

import math
import os
import tempfile

from .errors import IoError

TRAJECTORY_COLUMNS = (
    ["t"] + [f"R{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    + ["w1", "w2", "w3", "Gamma1", "Gamma2", "Gamma3", "E", "h_momentum"]
    # appended columns
    + ["Gammadot1", "Gammadot2", "Gammadot3", "theta_dyn"]
)
POINCARE_COLUMNS = ["t", "u", "v", "sign_Gamma3", "E_err", "g_residual"]
EQUILIBRIA_COLUMNS = (
    ["family", "alpha", "gamma_e_1", "gamma_e_2", "gamma_e_3",
     "omega_e_1", "omega_e_2", "omega_e_3", "mu", "residual"]
    # appended columns
    + ["param_gamma", "param_delta"]
)
LINEARIZE_COLUMNS = ["which", "model", "index", "eig_re", "eig_im", "verdict",
                     "fd_eig_re", "fd_eig_im", "fd_rel_err"]
PHASE_COLUMNS = ["method", "theta", "winding", "total"]


def fmt(x):
    """Format one cell: floats with 17 significant digits, None as blank."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        if math.isnan(x):
            return ""
        if x == 0.0:
            x = 0.0  # drop the sign of negative zero
        return format(x, ".16e")
    return str(x)


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_csv(header, rows, path):
    atomic_write(path, csv_text(header, rows))


# ------------------------------------------------------------------ SVG
_W, _H = 480, 480
_M = 60  # margin


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def _nice_range(lo, hi):
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo == hi:
        c = lo if math.isfinite(lo) else 0.0
        return c - 1.0, c + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def svg_text(series, title="", xlabel="x", ylabel="y", xlim=None, ylim=None):
    """Render scatter and line series.

    ``series`` is a list of dicts with keys ``x``, ``y``, ``kind``
    (``"scatter"`` or ``"line"``) and optional ``color``.
    """
    xs = [float(v) for s in series for v in s["x"]]
    ys = [float(v) for s in series for v in s["y"]]
    if xlim is None:
        xlim = _nice_range(min(xs), max(xs)) if xs else (-1.0, 1.0)
    if ylim is None:
        ylim = _nice_range(min(ys), max(ys)) if ys else (-1.0, 1.0)
    x0, x1 = xlim
    y0, y1 = ylim
    pw, ph = _W - 2 * _M, _H - 2 * _M

    def px(x):
        return _M + (x - x0) / (x1 - x0) * pw

    def py(y):
        return _H - _M - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_M}" y="{_M}" width="{pw}" height="{ph}" fill="none" '
        'stroke="black" stroke-width="1"/>',
    ]
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{px(fx):.2f}" y="{_H - _M + 16}" font-size="10" '
                   f'text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{_M - 6}" y="{py(fy) + 3:.2f}" font-size="10" '
                   f'text-anchor="end">{fy:.3g}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 16}" font-size="12" '
               f'text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{_H / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {_H / 2:.1f})">{_esc(ylabel)}</text>')
    if title:
        out.append(f'<text x="{_W / 2:.1f}" y="{_M - 20}" font-size="13" '
                   f'text-anchor="middle">{_esc(title)}</text>')
    for s in series:
        color = s.get("color", "black")
        pts = [(px(float(x)), py(float(y))) for x, y in zip(s["x"], s["y"])]
        if s.get("kind", "scatter") == "line":
            if pts:
                d = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
                out.append(f'<polyline fill="none" stroke="{color}" '
                           f'stroke-width="1" points="{d}"/>')
        else:
            for a, b in pts:
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="1.2" '
                           f'fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(series, path, **kw):
    atomic_write(path, svg_text(series, **kw))

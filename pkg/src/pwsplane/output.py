"""Serialization of traces, return maps, and reports: CSV, text, SVG.

CSV files are plain RFC-4180-style with a header row and repr-exact
floats, so identical inputs produce byte-identical files. Figures are
rendered with matplotlib's SVG backend with a fixed hash salt for the
same reason.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .fields import PiecewiseField
from .integrate import OrbitTrace
from .spectral import OmegaClass

__all__ = [
    "write_trace_csv", "write_events_csv", "write_return_map_csv",
    "write_polyline_csv", "classification_report", "scenario_report_text",
    "portrait_svg", "cycles_svg",
]

_REGIME_COLORS = {"upper": "#1f6fb4", "lower": "#c24a1d", "sliding": "#3a9a3a"}


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_rows(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    Path(path).write_text(buf.getvalue())


def write_trace_csv(trace: OrbitTrace, path) -> None:
    _write_rows(path, ("t", "x", "y", "regime"),
                ((_fmt(t), _fmt(x), _fmt(y), regime)
                 for t, x, y, regime in trace.samples))


def write_events_csv(trace: OrbitTrace, path) -> None:
    _write_rows(path, ("t", "x", "kind"),
                ((_fmt(t), _fmt(x), kind) for t, x, kind in trace.events))


def write_return_map_csv(samples, path) -> None:
    _write_rows(path, ("x0", "P", "flightTime"),
                ((_fmt(s.x0), _fmt(s.value), _fmt(s.flight_time))
                 for s in samples if s.ok))


def write_polyline_csv(points, path) -> None:
    _write_rows(path, ("x", "y"),
                ((_fmt(x), _fmt(y)) for x, y in points))


def classification_report(c: OmegaClass, name: str = "") -> str:
    """Structured text report of the local classification."""
    lines = [f"field: {name}" if name else "field: (inline)"]
    if not c.in_omega0:
        lines += [
            "nondegenerate two-sided equilibrium: no",
            f"reason: {c.reason}",
            "Sigma-structurally stable: undetermined (outside the "
            "nondegenerate class)",
        ]
        return "\n".join(lines) + "\n"
    lines.append("nondegenerate two-sided equilibrium: yes")

    def eig_str(e):
        if e.complex_pair:
            return (f"{e.re1:.12g} +/- {abs(e.im1):.12g}i "
                    f"(trace {e.trace:.12g}, det {e.det:.12g})")
        return (f"{e.re1:.12g}, {e.re2:.12g} "
                f"(trace {e.trace:.12g}, det {e.det:.12g})")

    lines.append(f"upper eigenvalues: {eig_str(c.eig_upper)}")
    lines.append(f"lower eigenvalues: {eig_str(c.eig_lower)}")
    lines.append(f"focal constant ell: {c.ell:.12g}")
    lines.append(f"stratum: {c.stratum}"
                 + (" (degenerate focal constant)" if c.in_omega2 else "")
                 + (" (repeated eigenvalues)" if c.in_omega3 else ""))
    if c.subset:
        lines.append(f"eigenvalue pattern: {c.subset}")
    if c.parameters:
        pstr = ", ".join(f"{k}={v:+d}" for k, v in sorted(c.parameters.items()))
        lines.append(f"normal-form parameters: {pstr}")
    if c.portrait_label:
        lines.append(f"portrait: {c.portrait_label}")
    if c.reductions:
        lines.append(f"canonicalizing reductions: {', '.join(c.reductions)}")
    stable = c.stratum == "Omega1"
    lines.append(f"Sigma-structurally stable: {'yes' if stable else 'no'}")
    return "\n".join(lines) + "\n"


def scenario_report_text(rep) -> str:
    lines = [f"scenario: {rep.name}"]
    for c in rep.checks:
        tag = "PASS" if c.ok else "FAIL"
        lines.append(f"[{tag}] {c.name}: predicted {c.predicted:.12g}, "
                     f"measured {c.measured:.12g}, tol {c.tol:g}")
    for cyc in rep.cycles:
        lines.append(f"cycle: x*={cyc.x_star:.12g} period={cyc.period:.6g} "
                     f"multiplier={cyc.multiplier:.12g} {cyc.stability}")
    lines.append(f"result: {'PASS' if rep.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _new_figure():
    plt.rcParams["svg.hashsalt"] = "pwsplane"
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    return fig, ax


def _save_svg(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def portrait_svg(Z: PiecewiseField, traces, path, title: str = "") -> None:
    """Phase portrait: switching line, regime-colored orbits, events."""
    fig, ax = _new_figure()
    w = Z.halfwidth
    ax.axhline(0.0, color="black", lw=1.2, zorder=1)
    for trace in traces:
        xs, ys, regs = zip(*[(x, y, r) for _, x, y, r in trace.samples]) \
            if trace.samples else ((), (), ())
        # split the polyline at regime changes so colors stay honest
        start = 0
        for i in range(1, len(xs) + 1):
            if i == len(xs) or regs[i] != regs[start]:
                ax.plot(xs[start:i], ys[start:i], lw=0.9,
                        color=_REGIME_COLORS.get(regs[start], "gray"),
                        zorder=2)
                start = i
        for t, x, kind in trace.events:
            ax.plot([x], [0.0], marker="o", ms=3.0, color="black", zorder=3)
    ax.set_xlim(-w, w)
    ax.set_ylim(-w, w)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    _save_svg(fig, path)


def cycles_svg(Z: PiecewiseField, curve_pairs, path, title: str = "") -> None:
    """Overlay of predicted cycle curves (upper/lower polyline pairs)."""
    fig, ax = _new_figure()
    ax.axhline(0.0, color="black", lw=1.2)
    for upper, lower in curve_pairs:
        if len(upper):
            ax.plot(upper[:, 0], upper[:, 1], color=_REGIME_COLORS["upper"],
                    lw=1.0)
        if len(lower):
            ax.plot(lower[:, 0], lower[:, 1], color=_REGIME_COLORS["lower"],
                    lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    _save_svg(fig, path)

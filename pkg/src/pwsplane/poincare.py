"""Poincare return maps on the switching line and limit-cycle detection.

The full map follows an orbit from a positive-axis intercept through the
upper zone, then the lower zone, back to the positive axis. Fields whose
orbits wind clockwise are conjugated by the horizontal reflection first,
so every map is parameterized by a positive intercept of a
counterclockwise field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

from .fields import PiecewiseField
from .integrate import IntegratorConfig, NoReturn, first_return_to_sigma

__all__ = [
    "TAU_HYP", "ReturnMapSample", "LimitCycle", "FixedPointScan",
    "EmptyInterval", "full_map", "map_derivative", "find_fixed_points",
    "scan_fixed_points", "ell_from_map",
]

TAU_HYP = 1e-6      # |multiplier - 1| below this is non-hyperbolic


class EmptyInterval(ValueError):
    """No grid point of the scan interval produced a valid map sample."""


@dataclass(frozen=True)
class ReturnMapSample:
    x0: float
    value: float
    flight_time: float
    ok: bool
    fail_reason: str = ""
    mirrored: bool = False


@dataclass(frozen=True)
class LimitCycle:
    x_star: float
    period: float
    multiplier: float
    hyperbolic: bool
    stability: str      # "Stable" | "Unstable" | "NonHyperbolic"


@dataclass
class FixedPointScan:
    cycles: list = dfield(default_factory=list)
    degenerate: bool = False
    skipped: list = dfield(default_factory=list)   # (x0, reason)


def _oriented(Z: PiecewiseField) -> tuple[PiecewiseField, bool]:
    if Z.upper.f2x(0.0, 0.0) < 0.0:
        return Z.mirrored(), True
    return Z, False


def full_map(Z: PiecewiseField, x0: float,
             cfg: IntegratorConfig | None = None) -> ReturnMapSample:
    """One full turn of the return map starting at (x0, 0), x0 > 0."""
    cfg = cfg or IntegratorConfig()
    if not x0 > cfg.min_amplitude:
        raise ValueError(f"x0 must exceed min_amplitude={cfg.min_amplitude:g}")
    W, mirrored = _oriented(Z)
    try:
        x1, t1 = first_return_to_sigma(W, "upper", x0, cfg)
        x2, t2 = first_return_to_sigma(W, "lower", x1, cfg)
    except NoReturn as e:
        return ReturnMapSample(x0, math.nan, math.nan, False, e.reason,
                               mirrored)
    except ValueError as e:
        return ReturnMapSample(x0, math.nan, math.nan, False, str(e), mirrored)
    return ReturnMapSample(x0, x2, t1 + t2, True, mirrored=mirrored)


def map_derivative(Z: PiecewiseField, x0: float, h: float | None = None,
                   cfg: IntegratorConfig | None = None) -> float:
    """Central-difference derivative of the full map at x0."""
    if h is None:
        h = max(1e-4 * x0, 1e-6)
    a = full_map(Z, x0 + h, cfg)
    b = full_map(Z, x0 - h, cfg)
    if not (a.ok and b.ok):
        bad = a if not a.ok else b
        raise NoReturn(bad.fail_reason)
    return (a.value - b.value) / (2.0 * h)


def _bisect_root(Z, lo, Dlo, hi, cfg):
    """Bisect a sign change of D(x) = P(x) - x down to round-off width."""
    a, b, Da = lo, hi, Dlo
    x_best, D_best = a, abs(Da)
    for _ in range(80):
        m = 0.5 * (a + b)
        s = full_map(Z, m, cfg)
        if not s.ok:
            break
        Dm = s.value - m
        if abs(Dm) < D_best:
            x_best, D_best = m, abs(Dm)
        if abs(Dm) <= 1e-12 * (1.0 + abs(m)) and b - a <= 1e-10 * (1.0 + abs(m)):
            return m
        if (Dm > 0) == (Da > 0):
            a, Da = m, Dm
        else:
            b = m
        if b - a <= 4e-17 * max(1.0, abs(b)):
            break
    return x_best


def scan_fixed_points(Z: PiecewiseField, lo: float, hi: float, grid_n: int,
                      cfg: IntegratorConfig | None = None,
                      multiplier_fn=None) -> FixedPointScan:
    """Locate fixed points of the full map on [lo, hi].

    multiplier_fn, when given, supplies the cycle multiplier analytically
    in place of the central-difference estimate; this is the supported
    route for families whose multipliers sit within round-off of 1.
    """
    cfg = cfg or IntegratorConfig()
    if not lo > cfg.min_amplitude:
        raise ValueError("interval start must exceed min_amplitude")
    if not hi > lo:
        raise ValueError("empty interval")
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    out = FixedPointScan()
    xs, Ds = [], []
    for k in range(grid_n):
        x = lo + (hi - lo) * k / (grid_n - 1)
        s = full_map(Z, x, cfg)
        if not s.ok:
            out.skipped.append((x, s.fail_reason))
            continue
        xs.append(x)
        Ds.append(s.value - x)
    if not xs:
        raise EmptyInterval(f"no valid return-map samples on [{lo:g}, {hi:g}]")
    small = sum(1 for d in Ds if abs(d) < 1e-10)
    if small >= 0.9 * len(Ds):
        # every point is (numerically) fixed: a center band, not cycles
        out.degenerate = True
        return out

    roots = []
    for i in range(len(xs) - 1):
        if Ds[i] == 0.0:
            roots.append(xs[i])
        elif Ds[i] * Ds[i + 1] < 0.0:
            roots.append(_bisect_root(Z, xs[i], Ds[i], xs[i + 1], cfg))
    if Ds and Ds[-1] == 0.0:
        roots.append(xs[-1])

    deduped: list[float] = []
    for r in sorted(roots):
        if not deduped or r - deduped[-1] > 1e-9:
            deduped.append(r)

    for r in deduped:
        s = full_map(Z, r, cfg)
        if multiplier_fn is not None:
            # analytic multiplier: trust its sign even within round-off of 1
            mult = multiplier_fn(r)
            hyperbolic = mult != 1.0
        else:
            mult = map_derivative(Z, r, cfg=cfg)
            hyperbolic = abs(mult - 1.0) > TAU_HYP
        if not hyperbolic:
            stability = "NonHyperbolic"
        else:
            stability = "Stable" if mult < 1.0 else "Unstable"
        out.cycles.append(LimitCycle(r, s.flight_time, mult, hyperbolic,
                                     stability))
    return out


def find_fixed_points(Z: PiecewiseField, lo: float, hi: float, grid_n: int,
                      cfg: IntegratorConfig | None = None,
                      multiplier_fn=None) -> list:
    return scan_fixed_points(Z, lo, hi, grid_n, cfg, multiplier_fn).cycles


def ell_from_map(Z: PiecewiseField, x0_sequence,
                 cfg: IntegratorConfig | None = None) -> float:
    """Focal constant estimated from the small-amplitude map asymptotics.

    For focus-focus fields P(x0)/x0 tends to e^(ell*pi) as x0 shrinks;
    the raw estimates ln(P/x0)/pi are polynomial in x0, so a Neville
    extrapolation of the sequence to x0 = 0 recovers ell.
    """
    xs = [float(v) for v in x0_sequence]
    if len(xs) < 2:
        raise ValueError("need at least two amplitudes")
    if any(b >= a for a, b in zip(xs, xs[1:])):
        raise ValueError("amplitudes must decrease strictly")
    ells = []
    for x0 in xs:
        s = full_map(Z, x0, cfg)
        if not s.ok:
            raise NoReturn(s.fail_reason)
        if not s.value > 0.0:
            raise ValueError(f"map value {s.value:g} not positive at {x0:g}")
        ells.append(math.log(s.value / x0) / math.pi)
    # Neville tableau evaluated at x0 = 0
    n = len(xs)
    q = list(ells)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            q[i] = ((0.0 - xs[i - j]) * q[i] - (0.0 - xs[i]) * q[i - 1]) \
                / (xs[i] - xs[i - j])
    return q[n - 1]

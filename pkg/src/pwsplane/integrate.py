"""Event-driven integration of piecewise fields.

Inside each zone an embedded Dormand-Prince 5(4) pair advances the orbit
adaptively; switching-line hits are bracketed on a cubic Hermite dense
output and located by bisection. When a zone's field carries a declared
first integral, each located switching-line landing is polished by a
Newton solve of H(x, 0) = H(start), which removes essentially all of the
accumulated stepping error in the landing abscissa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

from .fields import PiecewiseField, PlanarField
from .filippov import TAU_SIGMA, classify_sigma_point

__all__ = [
    "IntegratorConfig", "OrbitTrace", "StepUnderflow", "NoReturn",
    "dp45_step", "step_smooth", "integrate_piecewise",
    "first_return_to_sigma",
]


class StepUnderflow(RuntimeError):
    """Adaptive control demanded a step below the representable floor."""


class NoReturn(RuntimeError):
    """The orbit left the local picture without meeting the switching line."""

    def __init__(self, reason: str):
        super().__init__(f"orbit did not return to the switching line ({reason})")
        self.reason = reason    # "TimeOut" | "BoxExit" | "NearOrigin"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 1.0
    event_tol: float = 1e-11    # |y| threshold for a located switching hit
    max_time: float = 200.0
    max_events: int = 1000
    min_amplitude: float = 1e-8  # termination radius around the origin

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "event_tol",
                     "max_time", "min_amplitude"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_events < 1:
            raise ValueError("max_events must be positive")


@dataclass
class OrbitTrace:
    samples: list = dfield(default_factory=list)   # (t, x, y, regime)
    events: list = dfield(default_factory=list)    # (t, x, kind)
    termination: str = ""


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = _A[6] + (0.0,)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
       -92097 / 339200, 187 / 2100, 1 / 40)


def dp45_step(F, x: float, y: float, h: float):
    """One fixed Dormand-Prince step of size h.

    Returns (x5, y5, err_x, err_y, fx_end, fy_end) where the err pair is
    the difference between the embedded 5th- and 4th-order results.
    """
    kx = [0.0] * 7
    ky = [0.0] * 7
    kx[0], ky[0] = F(x, y)
    for i in range(1, 7):
        ai = _A[i]
        xi = x + h * sum(ai[j] * kx[j] for j in range(i))
        yi = y + h * sum(ai[j] * ky[j] for j in range(i))
        kx[i], ky[i] = F(xi, yi)
    x5 = x + h * sum(_B5[j] * kx[j] for j in range(7))
    y5 = y + h * sum(_B5[j] * ky[j] for j in range(7))
    ex = h * sum((_B5[j] - _B4[j]) * kx[j] for j in range(7))
    ey = h * sum((_B5[j] - _B4[j]) * ky[j] for j in range(7))
    # FSAL: stage 7 is the derivative at the 5th-order result
    return x5, y5, ex, ey, kx[6], ky[6]


def _err_norm(ex, ey, x0, y0, x1, y1, cfg: IntegratorConfig) -> float:
    sx = cfg.abs_tol + cfg.rel_tol * max(abs(x0), abs(x1))
    sy = cfg.abs_tol + cfg.rel_tol * max(abs(y0), abs(y1))
    return math.sqrt(0.5 * ((ex / sx) ** 2 + (ey / sy) ** 2))


def _initial_step(F, x, y, cfg: IntegratorConfig) -> float:
    fx, fy = F(x, y)
    speed = math.hypot(fx, fy)
    scale = max(math.hypot(x, y), 1e-3)
    h = 0.01 * scale / speed if speed > 0 else 1e-3
    return min(max(h, 1e-10), cfg.max_step)


def step_smooth(F, p, t: float, cfg: IntegratorConfig, h: float | None = None):
    """One accepted adaptive step; returns ((x, y), t_new, err_estimate)."""
    x, y = p
    if h is None:
        h = _initial_step(F, x, y, cfg)
    while True:
        if h < 1e-14:
            raise StepUnderflow(f"step size {h:g} underflowed at t={t:g}")
        x1, y1, ex, ey, _, _ = dp45_step(F, x, y, h)
        err = _err_norm(ex, ey, x, y, x1, y1, cfg)
        if err <= 1.0:
            return (x1, y1), t + h, math.hypot(ex, ey)
        h *= max(0.2, 0.9 * err ** -0.2)


def _hermite(x0, y0, fx0, fy0, x1, y1, fx1, fy1, h, theta):
    """Cubic Hermite dense output on one step, theta in [0, 1]."""
    t2 = theta * theta
    h00 = 2 * t2 * theta - 3 * t2 + 1
    h10 = t2 * theta - 2 * t2 + theta
    h01 = -2 * t2 * theta + 3 * t2
    h11 = t2 * theta - t2
    x = h00 * x0 + h10 * h * fx0 + h01 * x1 + h11 * h * fx1
    y = h00 * y0 + h10 * h * fy0 + h01 * y1 + h11 * h * fy1
    return x, y


def _locate_sigma(dense, ta, tb, ya_sign, cfg: IntegratorConfig):
    """Bisect a sign-change bracket of y on the dense output."""
    a, b = ta, tb
    for _ in range(200):
        m = 0.5 * (a + b)
        x, y = dense(m)
        if abs(y) <= cfg.event_tol:
            return m, x, y
        if (1.0 if y > 0 else -1.0) == ya_sign:
            a = m
        else:
            b = m
    x, y = dense(0.5 * (a + b))
    return 0.5 * (a + b), x, y


def _polish_landing(field: PlanarField, x: float, h0: float | None) -> float:
    """Newton-correct the landing abscissa onto the level set H(x,0)=h0."""
    if h0 is None or field._c_h is None:
        return x
    for _ in range(6):
        r = field._c_h(x, 0.0) - h0
        d = field._c_hx(x, 0.0)
        if d == 0.0 or not math.isfinite(d):
            break
        step = r / d
        x -= step
        if abs(step) <= 1e-17 * max(1.0, abs(x)):
            break
    return x


class _ZoneResult:
    __slots__ = ("status", "x", "y", "t")

    def __init__(self, status, x, y, t):
        self.status = status    # "sigma" | "box" | "origin" | "timeout"
        self.x, self.y, self.t = x, y, t


def _integrate_zone(Z: PiecewiseField, regime: str, x, y, t, t_max,
                    cfg: IntegratorConfig, trace: OrbitTrace,
                    sigma_h0: float | None) -> _ZoneResult:
    """Advance inside one open zone until a switching hit or exit."""
    F = Z.side(regime)
    zone_sign = 1.0 if regime == "upper" else -1.0
    h = _initial_step(F, x, y, cfg)
    fx, fy = F(x, y)
    while True:
        if t >= t_max:
            return _ZoneResult("timeout", x, y, t)
        h = min(h, cfg.max_step, t_max - t)
        if h < 1e-14:
            raise StepUnderflow(f"step size {h:g} underflowed at t={t:g}")
        x1, y1, ex, ey, fx1, fy1 = dp45_step(F, x, y, h)
        err = _err_norm(ex, ey, x, y, x1, y1, cfg)
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        # accepted; look for a switching-line hit within the step
        def dense(theta, x0=x, y0=y, fx0=fx, fy0=fy,
                  xe=x1, ye=y1, fxe=fx1, fye=fy1, hh=h):
            return _hermite(x0, y0, fx0, fy0, xe, ye, fxe, fye, hh, theta)

        bracket = None
        ys = y
        th_prev = 0.0
        for th in (0.25, 0.5, 0.75, 1.0):
            yv = y1 if th == 1.0 else dense(th)[1]
            if ys * zone_sign > 0.0 and yv * zone_sign <= 0.0:
                bracket = (th_prev, th, 1.0 if ys > 0 else -1.0)
                break
            ys, th_prev = yv, th
        if bracket is not None:
            tha, thb, sa = bracket
            thm, xs, ysv = _locate_sigma(dense, tha, thb, sa, cfg)
            ts = t + thm * h
            xs = _polish_landing(F, xs, sigma_h0)
            trace.samples.append((ts, xs, 0.0, regime))
            return _ZoneResult("sigma", xs, 0.0, ts)
        t += h
        x, y, fx, fy = x1, y1, fx1, fy1
        trace.samples.append((t, x, y, regime))
        if not Z.in_box(x, y):
            return _ZoneResult("box", x, y, t)
        if math.hypot(x, y) < cfg.min_amplitude:
            return _ZoneResult("origin", x, y, t)
        h *= min(5.0, max(0.2, 0.9 * (err + 1e-300) ** -0.2))


def _slide(Z: PiecewiseField, x, t, t_max, cfg: IntegratorConfig,
           trace: OrbitTrace):
    """Integrate along the switching line with the convex-combination speed.

    Returns (status, x, t) with status in {"exit", "pseudo", "timeout",
    "box", "origin"}.
    """
    def vel(xx):
        c = classify_sigma_point(Z, xx)
        return c.velocity if c.velocity is not None else 0.0

    def product(xx):
        return Z.upper(xx, 0.0)[1] * Z.lower(xx, 0.0)[1]

    while t < t_max:
        v = vel(x)
        if abs(v) < cfg.abs_tol:
            return "pseudo", x, t
        h = min(cfg.max_step, t_max - t,
                max(1e-6, 0.01 * max(abs(x), 1e-3) / abs(v)))
        # classical RK4 on the scalar sliding equation
        k1 = v
        k2 = vel(x + 0.5 * h * k1)
        k3 = vel(x + 0.5 * h * k2)
        k4 = vel(x + h * k3)
        x1 = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if product(x1) > 0.0:
            a, b = x, x1
            for _ in range(200):
                m = 0.5 * (a + b)
                if product(m) > 0.0:
                    b = m
                else:
                    a = m
                if abs(b - a) <= 1e-15 * max(1.0, abs(b)):
                    break
            t += h
            trace.samples.append((t, b, 0.0, "sliding"))
            return "exit", b, t
        x, t = x1, t + h
        trace.samples.append((t, x, 0.0, "sliding"))
        if abs(x) > Z.halfwidth:
            return "box", x, t
        if abs(x) < cfg.min_amplitude:
            return "origin", x, t
    return "timeout", x, t


def _sigma_h0(field: PlanarField, x: float) -> float | None:
    if field._c_h is None:
        return None
    return field._c_h(x, 0.0)


def integrate_piecewise(Z: PiecewiseField, p0, t_max: float,
                        cfg: IntegratorConfig | None = None,
                        stop_on_sigma: bool = False,
                        initial_side: str | None = None) -> OrbitTrace:
    """Concatenate zone arcs and sliding segments starting from p0.

    With stop_on_sigma the trace terminates with SigmaReturn at the first
    located switching-line hit after the start. initial_side selects the
    starting zone when p0 lies on the switching line.
    """
    cfg = cfg or IntegratorConfig()
    if not Z.in_box(*p0):
        raise ValueError(f"start point {p0} outside the working box")
    trace = OrbitTrace()
    x, y = float(p0[0]), float(p0[1])
    t = 0.0

    if abs(y) <= cfg.event_tol:
        if initial_side is not None:
            regime = initial_side
        else:
            c = classify_sigma_point(Z, x)
            if c.kind == "Crossing":
                regime = "upper" if c.direction == "upward" else "lower"
            elif c.kind == "Sliding":
                regime = "sliding"
            else:
                trace.termination = "NearOrigin"
                trace.samples.append((t, x, y, "upper"))
                return trace
        y = 0.0
    else:
        regime = "upper" if y > 0 else "lower"
    trace.samples.append((t, x, y, regime))

    while True:
        if len(trace.events) >= cfg.max_events:
            trace.termination = "EventCap"
            return trace
        if regime in ("upper", "lower"):
            field = Z.side(regime)
            h0 = _sigma_h0(field, x) if y == 0.0 else (
                field._c_h(x, y) if field._c_h is not None else None)
            if y == 0.0:
                # nudge off the line so the hit detector sees a fresh arc
                y = (10.0 * cfg.event_tol) * (1.0 if regime == "upper" else -1.0)
            res = _integrate_zone(Z, regime, x, y, t, t_max, cfg, trace, h0)
            x, y, t = res.x, res.y, res.t
            if res.status == "timeout":
                trace.termination = "TimeOut"
                return trace
            if res.status == "box":
                trace.termination = "BoxExit"
                return trace
            if res.status == "origin":
                trace.termination = "NearOrigin"
                return trace
            # switching-line hit
            if abs(Z.side(regime)(x, 0.0)[1]) <= TAU_SIGMA:
                trace.events.append((t, x, "FoldHit"))
            c = classify_sigma_point(Z, x)
            if c.kind == "Crossing":
                trace.events.append(
                    (t, x, "CrossUp" if c.direction == "upward" else "CrossDown"))
                if stop_on_sigma:
                    trace.termination = "SigmaReturn"
                    return trace
                regime = "upper" if c.direction == "upward" else "lower"
            elif c.kind == "Sliding":
                trace.events.append((t, x, "SlideEnter"))
                if stop_on_sigma:
                    trace.termination = "SigmaReturn"
                    return trace
                regime = "sliding"
            else:
                trace.termination = "NearOrigin"
                return trace
        else:   # sliding
            status, x, t = _slide(Z, x, t, t_max, cfg, trace)
            if status == "pseudo":
                trace.events.append((t, x, "PseudoEquilibrium"))
                trace.termination = "TimeOut"
                return trace
            if status == "timeout":
                trace.termination = "TimeOut"
                return trace
            if status == "box":
                trace.termination = "BoxExit"
                return trace
            if status == "origin":
                trace.termination = "NearOrigin"
                return trace
            trace.events.append((t, x, "SlideExit"))
            c = classify_sigma_point(Z, x)
            if c.kind == "Crossing":
                regime = "upper" if c.direction == "upward" else "lower"
                y = 0.0
            else:
                trace.termination = "NearOrigin"
                return trace
        y = 0.0 if regime != "sliding" else y


def first_return_to_sigma(Z: PiecewiseField, side: str, x0: float,
                          cfg: IntegratorConfig | None = None):
    """First switching-line hit of the arc entering the requested zone.

    Returns (x1, flight_time). Raises NoReturn when the orbit times out
    or leaves the working box, and ValueError when the flow at (x0, 0)
    does not enter the requested side.
    """
    cfg = cfg or IntegratorConfig()
    field = Z.side(side)
    f2 = field(x0, 0.0)[1]
    want = 1.0 if side == "upper" else -1.0
    if f2 * want <= 0.0:
        raise ValueError(
            f"flow at ({x0:g}, 0) does not enter the {side} zone "
            f"(normal component {f2:g})")
    trace = integrate_piecewise(Z, (x0, 0.0), cfg.max_time, cfg,
                                stop_on_sigma=True, initial_side=side)
    if trace.termination != "SigmaReturn":
        reason = {"TimeOut": "TimeOut", "BoxExit": "BoxExit",
                  "NearOrigin": "NearOrigin"}.get(trace.termination,
                                                  trace.termination)
        raise NoReturn(reason)
    t1, x1, _, _ = trace.samples[-1]
    return x1, t1

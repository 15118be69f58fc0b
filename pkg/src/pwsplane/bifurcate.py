"""Scenario runners with closed-form oracles.

Each runner builds a catalog family, measures cycles with the return-map
machinery, and compares against the family's exact predictions: cycle
intercepts, multipliers, stability parity, and level-set residuals. The
flat-perturbation family's inner cycles sit within round-off of the
identity map in double precision, so their fixed points and two-sided
stability checks run on a high-precision evaluation of the level-set
relation satisfied by the return map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield

import mpmath as mp
import numpy as np

from .fields import (PiecewiseField, make_counterexample_zstar, make_linear,
                     make_normal_form, make_prop52, make_prop53,
                     make_pseudo_hopf_shift, make_theorem13_perturbation,
                     _check_prop5_params)
from .filippov import fold_fold_classify
from .integrate import IntegratorConfig, integrate_piecewise
from .poincare import (LimitCycle, full_map, map_derivative,
                       scan_fixed_points)

__all__ = [
    "BracketFailure", "MismatchReport", "NoCycleFound", "PreconditionFoldFold",
    "Prop52Scenario", "Prop53Scenario", "Check", "ScenarioReport",
    "fold_root", "saddle_intercepts", "run_prop52", "run_prop53",
    "pseudo_hopf_scan", "theorem13_cycle_demo", "gamma_curves",
]


class BracketFailure(RuntimeError):
    pass


class MismatchReport(AssertionError):
    """A measured quantity disagreed with its closed-form prediction."""

    def __init__(self, checks):
        bad = [c for c in checks if not c.ok]
        lines = [f"{c.name}: predicted {c.predicted:.12g}, "
                 f"measured {c.measured:.12g}, tol {c.tol:g}" for c in bad]
        super().__init__("prediction mismatch:\n" + "\n".join(lines))
        self.checks = checks


class NoCycleFound(RuntimeError):
    def __init__(self, lo, hi):
        super().__init__(f"no crossing limit cycle in window ({lo:g}, {hi:g})")
        self.window = (lo, hi)


class PreconditionFoldFold(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    predicted: float
    measured: float
    tol: float
    ok: bool


def _check(name, predicted, measured, tol, relative=False) -> Check:
    diff = abs(measured - predicted)
    if relative:
        diff /= max(abs(predicted), 1e-300)
    return Check(name, predicted, measured, tol, diff <= tol)


@dataclass
class ScenarioReport:
    name: str
    checks: list = dfield(default_factory=list)
    cycles: list = dfield(default_factory=list)
    extra: dict = dfield(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise MismatchReport(self.checks)


# ---------------------------------------------------------------------------
# polynomial m-cycle family

@dataclass(frozen=True)
class Prop52Scenario:
    a: float
    b: float
    m: int
    eps: float

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 1):
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        _check_prop5_params(self.a, self.b, self.eps)

    def field(self, halfwidth: float = 1.0) -> PiecewiseField:
        return make_prop52(self.a, self.b, self.m, self.eps, halfwidth)

    @property
    def varpi_u(self) -> float:
        d = self.a - self.eps
        return self.eps / math.sqrt(d) if d > 0.0 else math.inf

    @property
    def varpi_l(self) -> float:
        d = self.b - self.eps
        return -self.eps / math.sqrt(d) if d > 0.0 else -1.0

    def interval(self, halfwidth: float = 1.0) -> tuple[float, float]:
        """Search interval: fold root magnitude up to the domain cap."""
        lo = abs(fold_root(self))
        hi = min(-self.varpi_l, self.varpi_u, halfwidth)
        return lo, hi

    def predicted_intercepts(self) -> list[float]:
        return [i * self.eps / self.m for i in range(1, self.m + 1)]

    def predicted_multiplier(self, i: int) -> float:
        r = i / self.m
        prod = 1.0
        for k in range(1, self.m + 1):
            if k != i:
                prod *= r * r - (k / self.m) ** 2
        K = 2.0 * self.eps ** (2 * self.m) * r * prod
        return (1.0 - K) / (1.0 + K)

    def predicted_stability(self, i: int) -> str:
        return "Stable" if (self.m - i) % 2 == 0 else "Unstable"

    def multiplier_fn(self, Z: PiecewiseField):
        """Exact cycle multiplier as a function of the intercept.

        Differentiating the level-set relation linking a cycle's two
        intercepts gives dP/dx = (x - e)/(x + e) at a fixed point, with
        e the perturbation part of the lower field's normal component.
        """
        f2 = Z.lower._c2

        def mu(x: float) -> float:
            e = f2(x, 0.0) - x
            return (x - e) / (x + e)
        return mu


def fold_root(scn: Prop52Scenario) -> float:
    """Root of F(x) = x + eps * d(bump)/dx near 0 by safeguarded Newton."""
    m, eps = scn.m, scn.eps
    if eps == 0.0:
        return 0.0
    lead = math.factorial(m) ** 2 / m ** (2 * m) * eps ** (2 * m + 1)
    r = 2.0 * lead + eps ** (2 * m + 2)
    Z = scn.field()
    F = lambda x: Z.lower(x, 0.0)[1]
    a, b = -r, r
    Fa, Fb = F(a), F(b)
    if Fa * Fb > 0.0:
        raise BracketFailure(f"no sign change of F on [{a:g}, {b:g}]")
    x = (-1) ** (m + 1) * lead
    for _ in range(100):
        Fx = F(x)
        if Fx == 0.0:
            return x
        if Fa * Fx < 0.0:
            b, Fb = x, Fx
        else:
            a, Fa = x, Fx
        d = (Fb - Fa) / (b - a)     # secant slope as derivative surrogate
        step = Fx / d if d != 0.0 else 0.0
        xn = x - step
        if not a < xn < b:
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 1e-17 * max(1.0, abs(xn)):
            return xn
        x = xn
    return x


def saddle_intercepts(scn: Prop52Scenario) -> tuple[float, float]:
    """Switching-line intercepts (x_s, x_u) of the lower saddle manifolds.

    Defined only when b - eps > 0; found by Newton on the level-set
    identity H(x, 0) = H(saddle), seeded at -/+ eps/sqrt(b - eps).
    """
    d = scn.b - scn.eps
    if not d > 0.0:
        raise ValueError("saddle intercepts require b - eps > 0")
    Z = scn.field()
    low = Z.lower
    xe = fold_root(scn)
    ye = -scn.eps / d
    h_e = low._c_h(xe, ye)

    def newton(x0: float) -> float:
        x = x0
        for _ in range(60):
            r = low._c_h(x, 0.0) - h_e
            dr = low._c_hx(x, 0.0)
            if dr == 0.0:
                break
            step = r / dr
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        return x

    seed = scn.eps / math.sqrt(d)
    return newton(-seed), newton(seed)


def gamma_curves(scn, i: int, n: int = 200):
    """Polylines of the i-th predicted cycle from the two first integrals.

    Works for both the polynomial and the flat family; returns (upper,
    lower) arrays of shape (n, 2).
    """
    if isinstance(scn, Prop52Scenario):
        x_star = i * scn.eps / scn.m
        Z = scn.field()
    else:
        x_star = scn.eps / i
        Z = scn.field()
    a_e = scn.a - scn.eps
    b_e = scn.b - scn.eps
    up = Z.upper._c_h
    low = Z.lower._c_h
    h_up = up(x_star, 0.0)
    h_low = low(x_star, 0.0)
    xs = np.linspace(-x_star, x_star, n)

    def branch(h_fn, c2, c1, h_target, want_sign):
        pts = []
        for x in xs:
            c0 = h_fn(float(x), 0.0) - h_target
            disc = c1 * c1 - 4.0 * c2 * c0
            if disc < 0.0:
                disc = 0.0
            for y in ((-c1 + math.sqrt(disc)) / (2.0 * c2),
                      (-c1 - math.sqrt(disc)) / (2.0 * c2)):
                if y * want_sign >= -1e-12:
                    pts.append((float(x), y))
                    break
        return np.asarray(pts)

    upper = branch(up, -(a_e) / 2.0, scn.eps, h_up, +1.0)
    lower = branch(low, -(b_e) / 2.0, -scn.eps, h_low, -1.0)
    return upper, lower


def run_prop52(scn: Prop52Scenario, cfg: IntegratorConfig | None = None,
               grid_n: int = 150, halfwidth: float = 1.0) -> ScenarioReport:
    """Measure the polynomial family's cycles against the exact oracle."""
    cfg = cfg or IntegratorConfig()
    Z = scn.field(halfwidth)
    lo, hi = scn.interval(halfwidth)
    lo = max(lo, 2.0 * cfg.min_amplitude, 1e-3 * scn.eps)
    hi *= 0.98     # stay off the separatrix / domain boundary
    rep = ScenarioReport(f"prop52(a={scn.a:g}, b={scn.b:g}, "
                         f"m={scn.m}, eps={scn.eps:g})")
    rep.extra["interval"] = (lo, hi)
    rep.extra["fold_root"] = fold_root(scn)
    mu = scn.multiplier_fn(Z)
    scan = scan_fixed_points(Z, lo, hi, grid_n, cfg, multiplier_fn=mu)
    rep.cycles = scan.cycles
    rep.extra["degenerate"] = scan.degenerate
    expected = scn.m if scn.eps > 0.0 else 0
    rep.checks.append(_check("cycle count", expected, len(scan.cycles), 0.0))
    if len(scan.cycles) != expected or expected == 0:
        return rep
    for i, c in enumerate(scan.cycles, start=1):
        x_pred = i * scn.eps / scn.m
        rep.checks.append(_check(f"intercept[{i}]", x_pred, c.x_star, 1e-6))
        mult_pred = scn.predicted_multiplier(i)
        mult_fd = map_derivative(Z, c.x_star, cfg=cfg)
        rep.checks.append(_check(f"multiplier[{i}]", mult_pred, mult_fd,
                                 1e-4, relative=True))
        stab_ok = c.stability == scn.predicted_stability(i)
        rep.checks.append(Check(f"stability[{i}]",
                                1.0 if scn.predicted_stability(i) == "Stable"
                                else -1.0,
                                1.0 if c.stability == "Stable" else -1.0,
                                0.0, stab_ok))
        rep.checks.append(_check(f"levelset[{i}]", 0.0,
                                 _cycle_levelset_residual(Z, c.x_star, cfg),
                                 1e-7))
    # nesting: strictly increasing intercepts
    xs = [c.x_star for c in scan.cycles]
    rep.checks.append(Check("nesting", 1.0, 1.0, 0.0,
                            all(p < q for p, q in zip(xs, xs[1:]))))
    return rep


def _cycle_levelset_residual(Z: PiecewiseField, x_star: float,
                             cfg: IntegratorConfig) -> float:
    """Max deviation of one full cycle turn from its two level curves."""
    tr = integrate_piecewise(Z, (x_star, 0.0), cfg.max_time, cfg,
                             initial_side="upper")
    worst = 0.0
    h_up = Z.upper._c_h(x_star, 0.0)
    h_low = Z.lower._c_h(x_star, 0.0)
    crossings = 0
    for t, x, y, regime in tr.samples:
        if crossings >= 2:
            break
        if regime == "upper":
            worst = max(worst, abs(Z.upper._c_h(x, y) - h_up))
        elif regime == "lower":
            worst = max(worst, abs(Z.lower._c_h(x, y) - h_low))
        if y == 0.0 and t > 0.0:
            crossings += 1
    return worst


# ---------------------------------------------------------------------------
# flat family with infinitely many cycles

@dataclass(frozen=True)
class Prop53Scenario:
    a: float
    b: float
    eps: float
    i_max: int = 4

    def __post_init__(self):
        _check_prop5_params(self.a, self.b, self.eps)
        if self.i_max < 1:
            raise ValueError("i_max must be positive")

    def field(self, halfwidth: float = 1.0) -> PiecewiseField:
        return make_prop53(self.a, self.b, self.eps, halfwidth)

    def predicted_intercepts(self) -> list[float]:
        return [self.eps / i for i in range(1, self.i_max + 1)]

    def predicted_multiplier(self, i: int) -> float:
        x = self.eps / i
        return x / (x - math.pi * i * i * math.exp(-i / self.eps)
                    * math.cos(math.pi * i))

    def predicted_stability(self, i: int) -> str:
        return "Stable" if i % 2 == 1 else "Unstable"


def _mp_map_value(x0, eps, dps: int = 80):
    """Return-map value from the level-set relation, in high precision.

    The upper half-turn is exactly x -> -x and the flat bump vanishes on
    x <= 0, so the landing P > 0 solves P^2/2 + eps*g(P) = x0^2/2.
    """
    with mp.workdps(dps):
        x0 = mp.mpf(x0)
        e = mp.mpf(eps)
        target = x0 * x0 / 2

        def phi(P):
            return P * P / 2 + e * mp.e ** (-1 / P) * mp.sin(mp.pi * e / P) \
                - target
        return mp.findroot(phi, x0)


def _mp_fixed_point(i: int, eps: float, dps: int = 80) -> float:
    """Bisect D(x) = P(x) - x between the neighbors of eps/i."""
    with mp.workdps(dps):
        e = mp.mpf(eps)
        lo = e / i * mp.mpf(2 * i) / (2 * i + 1)
        hi = e / i * mp.mpf(2 * i) / (2 * i - 1)

        def D(x):
            return _mp_map_value(x, eps, dps) - x
        Dlo = D(lo)
        if Dlo * D(hi) > 0:
            raise BracketFailure(f"no bracket for fixed point i={i}")
        for _ in range(200):
            mid = (lo + hi) / 2
            Dm = D(mid)
            if Dm == 0 or hi - lo < mp.mpf(10) ** (-dps + 10):
                return float(mid)
            if (Dm > 0) == (Dlo > 0):
                lo, Dlo = mid, Dm
            else:
                hi = mid
        return float((lo + hi) / 2)


def _mp_two_sided_sign(i: int, eps: float, dps: int = 80) -> tuple[int, int]:
    """Signs of D below and above the fixed point eps/i."""
    with mp.workdps(dps):
        e = mp.mpf(eps)
        x = e / i
        below = x * mp.mpf(2 * i) / (2 * i + 1) * mp.mpf("1.2")
        above = x * mp.mpf(2 * i) / (2 * i - 1) * mp.mpf("0.8")
        db = _mp_map_value(below, eps, dps) - below
        da = _mp_map_value(above, eps, dps) - above
        return (1 if db > 0 else -1), (1 if da > 0 else -1)


def run_prop53(scn: Prop53Scenario,
               cfg: IntegratorConfig | None = None) -> ScenarioReport:
    """Verify the flat family's cycle ladder.

    The outermost cycle is confirmed by direct shooting; the inner ones
    live below double-precision resolution of P - x and are certified on
    the high-precision level-set map.
    """
    cfg = cfg or IntegratorConfig()
    Z = scn.field()
    rep = ScenarioReport(f"prop53(a={scn.a:g}, b={scn.b:g}, "
                         f"eps={scn.eps:g}, i_max={scn.i_max})")
    eps = scn.eps
    for i in range(1, scn.i_max + 1):
        x_pred = eps / i
        x_num = _mp_fixed_point(i, eps)
        rep.checks.append(_check(f"intercept[{i}]", x_pred, x_num, 1e-6))
        mult = scn.predicted_multiplier(i)
        # sign(mult - 1) equals the sign of the cos factor; the multiplier
        # itself rounds to 1.0 for i >= 3 in double precision
        c_sign = math.cos(math.pi * i)
        stab = "Stable" if c_sign < 0.0 else "Unstable"
        rep.checks.append(Check(f"stability[{i}]", 0.0, 0.0, 0.0,
                                stab == scn.predicted_stability(i)))
        rep.cycles.append(LimitCycle(x_num, math.nan, mult,
                                     abs(mult - 1.0) > 0.0, stab))
        if i <= 2:
            sb, sa = _mp_two_sided_sign(i, eps)
            want = (1, -1) if scn.predicted_stability(i) == "Stable" \
                else (-1, 1)
            rep.checks.append(Check(f"two_sided[{i}]", 0.0, 0.0, 0.0,
                                    (sb, sa) == want))
    # direct shooting cross-check of the outermost fixed point
    s_lo = full_map(Z, eps * 0.9, cfg)
    s_hi = full_map(Z, eps * 1.1, cfg)
    shoot_ok = (s_lo.ok and s_hi.ok
                and (s_lo.value - eps * 0.9) > 0.0
                and (s_hi.value - eps * 1.1) < 0.0)
    rep.checks.append(Check("shooting_bracket[1]", 0.0, 0.0, 0.0, shoot_ok))
    return rep


# ---------------------------------------------------------------------------
# pseudo-Hopf and the three-parameter demo

def _log_grid_scan(Z, lo, hi, n, cfg, tighten=False):
    """Fixed-point scan on a geometric grid (windows spanning decades)."""
    lo = max(lo, cfg.min_amplitude * 1.001)
    xs = np.geomspace(lo, hi, n)
    samples = []
    for x in xs:
        s = full_map(Z, float(x), cfg)
        if s.ok:
            samples.append((float(x), s.value - float(x)))
    # an identity map across the window is a center band, not a cycle set
    small = sum(1 for _, d in samples if abs(d) < 1e-10)
    if samples and small >= 0.9 * len(samples):
        return [], len(samples)
    cycles = []
    for (xa, da), (xb, db) in zip(samples, samples[1:]):
        if da == 0.0 or da * db < 0.0:
            a, b, Da = xa, xb, da
            for _ in range(80):
                mc = 0.5 * (a + b)
                sm = full_map(Z, mc, cfg)
                if not sm.ok:
                    break
                Dm = sm.value - mc
                if (Dm > 0) == (Da > 0):
                    a, Da = mc, Dm
                else:
                    b = mc
                if b - a <= 1e-12 * max(1.0, b):
                    break
            r = 0.5 * (a + b)
            mult = map_derivative(Z, r, cfg=cfg)
            hyp = abs(mult - 1.0) > 1e-6
            stab = ("Stable" if mult < 1.0 else "Unstable") if hyp \
                else "NonHyperbolic"
            s = full_map(Z, r, cfg)
            cycles.append(LimitCycle(r, s.flight_time, mult, hyp, stab))
    deduped = []
    for c in sorted(cycles, key=lambda c: c.x_star):
        if not deduped or c.x_star - deduped[-1].x_star > 1e-9:
            deduped.append(c)
    return deduped, len(samples)


def pseudo_hopf_scan(base: PiecewiseField, deltas,
                     cfg: IntegratorConfig | None = None,
                     window=None, grid_n: int = 80) -> ScenarioReport:
    """One-parameter shift scan around a two-fold pseudo-focus.

    The base field must carry an invisible-invisible fold-fold at the
    origin with the tangential components pointing inward (upper leftward,
    lower rightward); the report records, per shift value, every detected
    cycle, and checks that cycles appear on exactly one side of zero.
    """
    cfg = cfg or IntegratorConfig()
    if fold_fold_classify(base, 0.0) != "II":
        raise PreconditionFoldFold(
            "origin is not an invisible-invisible fold-fold of the base field")
    x1 = base.upper(0.0, 0.0)[0]
    y1 = base.lower(0.0, 0.0)[0]
    if not (x1 < 0.0 < y1):
        raise PreconditionFoldFold(
            f"tangential components X1={x1:g}, Y1={y1:g} do not satisfy "
            f"X1 < 0 < Y1")
    rep = ScenarioReport("pseudo_hopf")
    per_delta = {}
    for d in sorted(deltas):
        Zd = make_pseudo_hopf_shift(base, d)
        if window is None:
            lo, hi = cfg.min_amplitude, min(10.0 * math.sqrt(abs(d)) if d
                                            else 1.0, base.halfwidth)
        else:
            lo, hi = window
            hi = min(hi, base.halfwidth)
        cycles, n_ok = _log_grid_scan(Zd, lo, hi, grid_n, cfg)
        per_delta[d] = cycles
        rep.extra[f"delta={d:g}"] = {"window": (lo, hi),
                                     "cycles": cycles, "samples": n_ok}
    rep.extra["per_delta"] = per_delta
    neg = any(per_delta[d] for d in per_delta if d < 0)
    pos = any(per_delta[d] for d in per_delta if d > 0)
    rep.checks.append(Check("one_sided", 1.0, 1.0, 0.0, neg != pos))
    rep.cycles = [c for cs in per_delta.values() for c in cs]
    return rep


def theorem13_cycle_demo(base: PiecewiseField, eps1: float, eps2: float,
                         eps3: float, cfg: IntegratorConfig | None = None,
                         window=None, grid_n: int = 120) -> ScenarioReport:
    """Certify a crossing limit cycle of the three-parameter perturbation."""
    cfg = cfg or IntegratorConfig()
    Z = make_theorem13_perturbation(base, eps1, eps2, eps3)
    if window is None:
        lo, hi = cfg.min_amplitude, min(0.5, base.halfwidth)
    else:
        lo, hi = window
    cycles, _ = _log_grid_scan(Z, lo, hi, grid_n, cfg)
    if not cycles:
        raise NoCycleFound(lo, hi)
    rep = ScenarioReport(f"theorem13(eps=({eps1:g}, {eps2:g}, {eps3:g}))")
    rep.cycles = cycles
    rep.extra["window"] = (lo, hi)
    rep.checks.append(Check("cycle_exists", 1.0, float(len(cycles)), 0.0,
                            True))
    return rep


# ---------------------------------------------------------------------------
# focus-focus multiplier law and the separation counterexample

def ell_ff_report(re_up: float = 0.2, re_down: float = -0.5,
                  cfg: IntegratorConfig | None = None) -> ScenarioReport:
    """Check the small-amplitude return-map multiplier of focus pairs.

    Both Jacobians are rotations plus re*I, so the focal constant is
    re_up + re_down and the full-turn ratio tends to exp(ell * pi).
    """
    from .poincare import ell_from_map
    cfg = cfg or IntegratorConfig()
    ell_pred = re_up + re_down
    Z = make_linear([[re_up, -1.0], [1.0, re_up]],
                    [[re_down, -1.0], [1.0, re_down]])
    rep = ScenarioReport(f"ell_ff(re_up={re_up:g}, re_down={re_down:g})")
    ell_hat = ell_from_map(Z, [0.02 / 2 ** k for k in range(6)], cfg)
    rep.checks.append(_check("ell", ell_pred, ell_hat, 1e-6))
    s = full_map(Z, 1e-3, cfg)
    ratio_pred = math.exp(ell_pred * math.pi)
    rep.checks.append(_check("ratio@1e-3", ratio_pred,
                             s.value / 1e-3 if s.ok else math.nan,
                             1e-3, relative=True))
    # canonical strongly-stable focus pair: one full turn contracts by
    # exp(-2*pi)
    Zff = make_normal_form("FF-1")
    s2 = full_map(Zff, 0.1, cfg)
    rep.checks.append(_check("ff_canonical@0.1", math.exp(-2 * math.pi) * 0.1,
                             s2.value if s2.ok else math.nan,
                             1e-3, relative=True))
    return rep


def counterexample_report(cfg: IntegratorConfig | None = None,
                          t_max: float = 200.0) -> ScenarioReport:
    """Contrast the winding lower field with its linearization.

    The nonlinear variant's lower-zone orbit from (-0.1, 0) reaches the
    positive x-axis in finite time; the linearized variant's never does,
    following x = -0.1 e^t, y = -0.1 t e^t until it leaves the box.
    """
    from .integrate import NoReturn, first_return_to_sigma
    cfg = cfg or IntegratorConfig()
    rep = ScenarioReport("counterexample")
    Zs = make_counterexample_zstar(False)
    try:
        x1, t1 = first_return_to_sigma(Zs, "lower", -0.1, cfg)
        rep.checks.append(Check("winding_returns", 1.0, 1.0, 0.0,
                                x1 > 0.0 and t1 <= t_max))
        rep.extra["winding_landing"] = (x1, t1)
    except NoReturn as e:
        rep.checks.append(Check("winding_returns", 1.0, 0.0, 0.0, False))
        rep.extra["winding_failure"] = e.reason

    Zl = make_counterexample_zstar(True)
    tr = integrate_piecewise(Zl, (-0.1, 0.0), t_max, cfg, stop_on_sigma=True)
    no_return = tr.termination in ("BoxExit", "TimeOut")
    rep.checks.append(Check("linearized_no_return", 1.0,
                            1.0 if no_return else 0.0, 0.0, no_return))
    interior = [(t, y) for t, x, y, _ in tr.samples if t > 0.0]
    rep.checks.append(Check("linearized_below_line", 1.0, 1.0, 0.0,
                            all(y < 0.0 for _, y in interior)))
    if len(interior) >= 5:
        step = len(interior) // 5
        worst = 0.0
        for t, y in interior[step - 1::step][:5]:
            y_exact = -0.1 * t * math.exp(t)
            worst = max(worst, abs(y - y_exact) / abs(y_exact))
        rep.checks.append(_check("closed_form_rel_err", 0.0, worst, 1e-6))
        rep.extra["closed_form_worst"] = worst
    else:
        rep.checks.append(Check("closed_form_rel_err", 0.0, 1.0, 0.0, False))
    return rep

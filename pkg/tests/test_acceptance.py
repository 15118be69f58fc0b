"""Acceptance gate: every headline capability, one pass/fail line each.

Each test prints a single "[PASS] criterion N: ..." line (visible under
pytest -s or in captured output on failure) and enforces a wall-clock
budget alongside the scientific tolerances.
"""
import math
import random
import time
from contextlib import contextmanager

import pytest

from pwsplane import expr
from pwsplane.bifurcate import (Prop52Scenario, Prop53Scenario,
                                counterexample_report, ell_ff_report,
                                pseudo_hopf_scan, run_prop52, run_prop53)
from pwsplane.fields import (NORMAL_FORM_LABELS, PiecewiseField,
                             make_counterexample_zstar, make_normal_form,
                             make_prop52, make_theorem13_perturbation,
                             make_z0, planar_field)
from pwsplane.filippov import classify_sigma_point
from pwsplane.integrate import IntegratorConfig, integrate_piecewise
from pwsplane.spectral import classify_local


@contextmanager
def _criterion(n: int, label: str, budget_s: float):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {n}: {label}", flush=True)
        raise
    dt = time.perf_counter() - t0
    print(f"[PASS] criterion {n}: {label} ({dt:.1f}s)", flush=True)
    assert dt <= budget_s, f"criterion {n} exceeded {budget_s:g}s ({dt:.1f}s)"


def test_criterion_1_polynomial_cycle_families(loose_cfg):
    with _criterion(1, "m nested cycles at predicted intercepts, "
                       "multipliers, stability", 30.0):
        for a, b in ((-0.25, -0.25), (0.5, 0.5)):
            for m in (1, 2, 3):
                rep = run_prop52(Prop52Scenario(a, b, m, 0.05), loose_cfg,
                                 grid_n=80)
                rep.raise_if_failed()
                assert len(rep.cycles) == m


def test_criterion_2_flat_cycle_ladder(loose_cfg):
    with _criterion(2, "flat-perturbation ladder of cycles with "
                       "alternating stability", 30.0):
        rep = run_prop53(Prop53Scenario(-0.25, -0.25, 0.05, i_max=4),
                         loose_cfg)
        rep.raise_if_failed()
        assert len(rep.cycles) == 4


def test_criterion_3_focal_constant_from_return_map():
    with _criterion(3, "focus-pair focal constant and full-turn ratio",
                    5.0):
        rep = ell_ff_report()
        rep.raise_if_failed()
        by_name = {c.name: c for c in rep.checks}
        assert abs(by_name["ell"].measured - by_name["ell"].predicted) \
            <= 1e-6
        r = by_name["ratio@1e-3"]
        assert abs(r.measured - r.predicted) <= 1e-3 * abs(r.predicted)


def test_criterion_4_classification_round_trip():
    with _criterion(4, "portrait classification: 11-label round trip, "
                       "strata, reflection invariance", 2.0):
        for label in NORMAL_FORM_LABELS:
            assert classify_local(make_normal_form(label)).portrait_label \
                == label
        for a in (-1.0, 1.0):
            for b in (-1.0, 1.0):
                c = classify_local(make_z0(a, b))
                want = "Omega2" if (a < 0 and b < 0) else "Omega1"
                assert c.stratum == want
        assert classify_local(make_counterexample_zstar(True)).stratum \
            == "Omega3"
        for Z in [make_normal_form(lbl) for lbl in NORMAL_FORM_LABELS] \
                + [make_z0(-1.0, -1.0), make_counterexample_zstar(True)]:
            base = classify_local(Z)
            for W in (Z.mirrored(), Z.flipped(), Z.rotated()):
                c = classify_local(W)
                assert (c.stratum, c.portrait_label) \
                    == (base.stratum, base.portrait_label)


def test_criterion_5_pseudo_hopf_one_sided_cycle(loose_cfg):
    with _criterion(5, "fold-fold shift births one stable cycle on one "
                       "side only", 20.0):
        base = make_theorem13_perturbation(make_normal_form("FF-1"),
                                           0.1, 0.0, 0.0)
        rep = pseudo_hopf_scan(base, [-0.01, 0.01], loose_cfg,
                               window=(1e-6, 0.5), grid_n=60)
        assert rep.passed
        per = rep.extra["per_delta"]
        assert len(per[-0.01]) == 1
        assert per[-0.01][0].stability == "Stable"
        assert per[0.01] == []


def test_criterion_6_winding_counterexample():
    with _criterion(6, "winding orbit returns; its linearization never "
                       "does", 20.0):
        rep = counterexample_report()
        rep.raise_if_failed()


def test_criterion_7_property_suites(loose_cfg):
    with _criterion(7, "convex sliding, invariant drift, event hygiene, "
                       "derivative consistency", 30.0):
        # convex combination at 1000 random sliding points
        rng = random.Random(31415)
        for _ in range(1000):
            x1, y1 = rng.uniform(-5, 5), rng.uniform(-5, 5)
            x2 = rng.uniform(0.01, 5) * rng.choice([1.0, -1.0])
            y2 = -rng.uniform(0.01, 5) * (1.0 if x2 > 0 else -1.0)
            Z = PiecewiseField(
                planar_field("p", "q", {"p": x1, "q": x2}),
                planar_field("p", "q", {"p": y1, "q": y2}))
            c = classify_sigma_point(Z, 0.0)
            assert c.kind == "Sliding" and 0.0 <= c.weight <= 1.0
            lam = c.weight
            assert abs(lam * x2 + (1 - lam) * y2) <= 1e-12
            assert abs(lam * x1 + (1 - lam) * y1 - c.velocity) <= 1e-12

        # first-integral drift along half-orbits, and zone/event hygiene
        Z = make_prop52(-0.25, -0.25, 2, 0.05)
        for side, x0 in (("upper", 0.04), ("lower", -0.04)):
            F = Z.side(side)
            h0 = F.invariant(x0, 0.0)
            tr = integrate_piecewise(Z, (x0, 0.0), 10.0, stop_on_sigma=True,
                                     initial_side=side)
            assert tr.termination == "SigmaReturn"
            for _, x, y, regime in tr.samples:
                if regime == side:
                    assert abs(F.invariant(x, y) - h0) \
                        <= 1e-8 * (1 + abs(h0))
        tr = integrate_piecewise(Z, (0.04, 0.0), 30.0)
        etimes = sorted(t for t, _, _ in tr.events)
        bounds = [0.0] + etimes + [math.inf]
        for lo, hi in zip(bounds, bounds[1:]):
            signs = {1 if y > 0 else -1 for t, _, y, _ in tr.samples
                     if lo + 1e-9 < t < hi - 1e-9 and y != 0.0}
            assert len(signs) <= 1

        # symbolic derivatives against finite differences
        rng = random.Random(20240817)
        checked = 0
        while checked < 100:
            e = _random_expr(rng, 3)
            de = expr.differentiate(e, "x")
            x0 = rng.uniform(0.2, 1.5)
            y0 = rng.uniform(0.2, 1.5)
            h = 1e-6
            try:
                vp = expr.evaluate(e, x0 + h, y0)
                vm = expr.evaluate(e, x0 - h, y0)
                d = expr.evaluate(de, x0, y0)
            except expr.EvalError:
                continue
            if not all(math.isfinite(v) for v in (vp, vm, d)):
                continue
            fd = (vp - vm) / (2 * h)
            if max(abs(vp), abs(vm), abs(d)) > 1e6:
                continue
            assert abs(d - fd) <= 1e-5 * (1 + abs(vp) + abs(d))
            checked += 1


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([expr.parse("x"), expr.parse("y"),
                           expr.parse(repr(round(rng.uniform(0.1, 2), 3)))])
    kind = rng.random()
    a = _random_expr(rng, depth - 1)
    b = _random_expr(rng, depth - 1)
    if kind < 0.6:
        op = rng.choice(["+", "-", "*", "/"])
        return expr.BinOp(op, a, b)
    if kind < 0.9:
        fn = rng.choice(["sin", "cos", "exp", "sqrt", "abs"])
        return expr.Call(fn, a)
    return expr.Neg(a)

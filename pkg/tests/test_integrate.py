"""Event-driven integration: stepping, switching events, sliding."""
import math

import pytest

from pwsplane.fields import (PiecewiseField, make_normal_form, make_prop52,
                             make_z0, planar_field)
from pwsplane.integrate import (IntegratorConfig, NoReturn, dp45_step,
                                first_return_to_sigma, integrate_piecewise,
                                step_smooth)


def _fixed_steps(F, x, y, t_total, n):
    h = t_total / n
    for _ in range(n):
        x, y, _, _, _, _ = dp45_step(F, x, y, h)
    return x, y


class TestConfig:
    def test_defaults(self):
        cfg = IntegratorConfig()
        assert cfg.rel_tol == 1e-9 and cfg.abs_tol == 1e-12
        assert cfg.event_tol == 1e-11 and cfg.min_amplitude == 1e-8

    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(max_events=0)
        with pytest.raises(ValueError):
            IntegratorConfig(event_tol=-1e-11)


class TestSmoothStepping:
    def test_rotation_closes_after_full_turn(self):
        F = planar_field("-y", "x")
        x, y = _fixed_steps(F, 1.0, 0.0, 2.0 * math.pi, 2000)
        assert math.hypot(x - 1.0, y) <= 1e-8

    def test_saddle_preserves_first_integral(self):
        F = planar_field("y", "x")
        x, y = 1.0, 0.0
        h = 1e-3
        for _ in range(1000):
            x, y, _, _, _, _ = dp45_step(F, x, y, h)
            assert abs((x * x - y * y) - 1.0) <= 1e-9

    def test_error_estimate_scales_as_h5(self):
        F = planar_field("-y", "x")
        errs = []
        hs = [0.2, 0.1, 0.05, 0.025]
        for h in hs:
            _, _, ex_, ey_, _, _ = dp45_step(F, 1.0, 0.0, h)
            errs.append(math.hypot(ex_, ey_))
        slopes = [math.log(errs[i] / errs[i + 1]) / math.log(2.0)
                  for i in range(len(hs) - 1)]
        for s in slopes:
            assert 4.5 <= s <= 5.5, slopes

    def test_step_smooth_respects_tolerance(self):
        F = planar_field("-y", "x")
        cfg = IntegratorConfig()
        (x, y), t, err = step_smooth(F, (1.0, 0.0), 0.0, cfg)
        assert t > 0.0
        assert abs(math.hypot(x, y) - 1.0) <= 1e-9


class TestPiecewiseIntegration:
    def test_center_orbit_closes(self):
        Z = make_z0(-1.0, -1.0)
        tr = integrate_piecewise(Z, (0.3, 0.0), 2.0 * math.pi + 0.2)
        kinds = [k for _, _, k in tr.events]
        assert kinds[:2] == ["CrossDown", "CrossUp"]
        # landing abscissa of the full turn
        t_up, x_up, _ = tr.events[1]
        assert abs(x_up - 0.3) <= 1e-7
        assert abs(t_up - 2.0 * math.pi) <= 1e-6

    def test_event_hygiene(self):
        Z = make_prop52(-0.25, -0.25, 2, 0.05)
        tr = integrate_piecewise(Z, (0.04, 0.0), 30.0)
        etimes = sorted(t for t, _, _ in tr.events)
        bounds = [0.0] + etimes + [math.inf]
        for lo, hi in zip(bounds, bounds[1:]):
            signs = {1 if y > 0 else -1
                     for t, _, y, _ in tr.samples
                     if lo + 1e-9 < t < hi - 1e-9 and y != 0.0}
            assert len(signs) <= 1, (lo, hi)

    def test_reversibility(self):
        Z = make_z0(-1.0, -1.0)
        tr = integrate_piecewise(Z, (0.3, 0.1), 2.0)
        t_end, x_end, y_end, _ = tr.samples[-1]
        assert t_end == pytest.approx(2.0, abs=1e-12)
        back = integrate_piecewise(Z.reversed_time(), (x_end, y_end), 2.0)
        _, xb, yb, _ = back.samples[-1]
        assert math.hypot(xb - 0.3, yb - 0.1) <= 1e-6

    def test_box_exit(self):
        Z = make_normal_form("SS")
        tr = integrate_piecewise(Z, (0.2, 0.1), 50.0)
        assert tr.termination == "BoxExit"

    def test_timeout(self):
        Z = make_z0(-1.0, -1.0)
        tr = integrate_piecewise(Z, (0.3, 0.0), 1.0)
        assert tr.termination == "TimeOut"

    def test_start_outside_box_rejected(self):
        with pytest.raises(ValueError):
            integrate_piecewise(make_z0(-1.0, -1.0), (2.0, 0.0), 1.0)

    def test_singular_start_terminates(self):
        tr = integrate_piecewise(make_z0(-1.0, -1.0), (0.0, 0.0), 1.0)
        assert tr.termination == "NearOrigin"


class TestSliding:
    def test_constant_fields_slide_to_box_edge(self):
        Z = PiecewiseField(planar_field("1", "-1"), planar_field("1", "1"))
        tr = integrate_piecewise(Z, (0.0, 0.0), 50.0)
        assert tr.termination == "BoxExit"
        assert all(r == "sliding" for _, _, _, r in tr.samples[1:])
        assert tr.samples[-1][1] > 1.0

    def test_sliding_reaches_pseudo_equilibrium(self):
        # sliding velocity 0.3 - x vanishes at x = 0.3
        Z = PiecewiseField(planar_field("0.3 - x", "-1"),
                           planar_field("0.3 - x", "1"))
        tr = integrate_piecewise(Z, (0.0, 0.0), 100.0)
        kinds = [k for _, _, k in tr.events]
        assert "PseudoEquilibrium" in kinds
        t, x, _ = tr.events[-1]
        assert abs(x - 0.3) <= 1e-6

    def test_slide_exit_to_crossing(self):
        # sliding on x < 0.2 only; the orbit exits the sliding set and
        # crosses upward
        Z = PiecewiseField(planar_field("1", "x - 0.2"),
                           planar_field("1", "1"))
        tr = integrate_piecewise(Z, (-0.5, 0.0), 50.0)
        kinds = [k for _, _, k in tr.events]
        assert "SlideExit" in kinds
        i = kinds.index("SlideExit")
        assert tr.events[i][1] == pytest.approx(0.2, abs=1e-6)


class TestFirstReturn:
    def test_half_turn_of_rotation(self):
        Z = make_normal_form("FS")    # upper piece is the rotation
        x1, t1 = first_return_to_sigma(Z, "upper", 0.2)
        assert abs(x1 + 0.2) <= 1e-8
        assert abs(t1 - math.pi) <= 1e-8

    def test_perturbed_upper_half_map_is_reflection(self):
        Z = make_prop52(-0.25, -0.25, 3, 0.05)
        for x0 in (0.01, 0.03, 0.05):
            x1, _ = first_return_to_sigma(Z, "upper", x0)
            assert abs(x1 + x0) <= 1e-12

    def test_saddle_escape(self):
        Z = make_normal_form("SS")
        with pytest.raises(NoReturn) as ei:
            first_return_to_sigma(Z, "upper", 0.2)
        assert ei.value.reason == "BoxExit"

    def test_wrong_side_rejected(self):
        Z = make_normal_form("FF-1")
        with pytest.raises(ValueError):
            first_return_to_sigma(Z, "lower", 0.2)


def test_invariant_drift_small_along_arcs():
    Z = make_prop52(-0.25, -0.25, 2, 0.05)
    for side, x0 in (("upper", 0.04), ("lower", -0.04)):
        F = Z.side(side)
        h0 = F.invariant(x0, 0.0)
        tr = integrate_piecewise(Z, (x0, 0.0), 10.0, stop_on_sigma=True,
                                 initial_side=side)
        assert tr.termination == "SigmaReturn"
        for t, x, y, regime in tr.samples:
            if regime == side:
                assert abs(F.invariant(x, y) - h0) <= 1e-8 * (1 + abs(h0))

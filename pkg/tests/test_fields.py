"""Field types and the named catalog of piecewise systems."""
import math
import random

import numpy as np
import pytest

from pwsplane import expr as ex
from pwsplane.fields import (FieldError, NORMAL_FORM_LABELS, NotOmega3,
                             ParameterOutOfRange, PiecewiseField, PlanarField,
                             ZeroParameter, make_counterexample_zstar,
                             make_linear, make_normal_form,
                             make_omega3_perturbation, make_prop52,
                             make_prop53, make_pseudo_hopf_shift,
                             make_theorem13_perturbation, make_z0,
                             planar_field)

GRID = [(-0.5 + i * 0.05, -0.5 + j * 0.05)
        for i in range(21) for j in range(21)]


def _max_dev(Z1: PiecewiseField, Z2: PiecewiseField) -> float:
    worst = 0.0
    for x, y in GRID:
        for side in ("upper", "lower"):
            a = Z1.side(side)(x, y)
            b = Z2.side(side)(x, y)
            worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
    return worst


# ---------------------------------------------------------------------------
# basic types

class TestPlanarField:
    def test_call_and_jacobian(self):
        F = planar_field("a*y", "x", {"a": -1.0})
        assert F(0.3, 0.7) == (-0.7, 0.3)
        assert np.allclose(F.jacobian(0.0, 0.0), [[0.0, -1.0], [1.0, 0.0]])
        assert F.f2x(0.0, 0.0) == 1.0

    def test_nonfinite_parameter_rejected(self):
        with pytest.raises(FieldError):
            planar_field("a*y", "x", {"a": math.inf})

    def test_invariant_requires_declaration(self):
        F = planar_field("y", "x")
        with pytest.raises(FieldError):
            F.invariant(0.1, 0.1)

    def test_transformed_reflections(self):
        F = planar_field("x - y^2", "x*y + 1")
        G = F.transformed(flip_x=True)
        for x, y in [(0.2, 0.5), (-0.4, 0.1)]:
            f1, f2 = F(-x, y)
            assert G(x, y) == (-f1, f2)
        H = F.transformed(flip_y=True)
        for x, y in [(0.2, 0.5), (-0.4, 0.1)]:
            f1, f2 = F(x, -y)
            assert H(x, y) == (f1, -f2)
        R = F.transformed(negate_time=True)
        assert R(0.3, 0.4) == tuple(-v for v in F(0.3, 0.4))

    def test_jacobian_entries_equal_symbolic_derivatives(self):
        F = planar_field("sin(x)*y", "x + y^2")
        for x, y in [(0.1, 0.2), (-0.3, 0.4)]:
            J = F.jacobian(x, y)
            assert abs(J[0, 0] - math.cos(x) * y) <= 1e-14
            assert abs(J[0, 1] - math.sin(x)) <= 1e-14
            assert J[1, 0] == 1.0
            assert abs(J[1, 1] - 2 * y) <= 1e-14


class TestPiecewiseField:
    def test_side_lookup(self):
        Z = make_z0(-1.0, -1.0)
        assert Z.side("upper") is Z.upper
        assert Z.side("lower") is Z.lower
        with pytest.raises(ValueError):
            Z.side("middle")

    def test_box(self):
        Z = make_z0(-1.0, -1.0, halfwidth=0.5)
        assert Z.in_box(0.5, -0.5)
        assert not Z.in_box(0.51, 0.0)
        with pytest.raises(FieldError):
            PiecewiseField(Z.upper, Z.lower, halfwidth=0.0)

    def test_mirrored_values(self):
        Z = make_prop52(-0.25, -0.25, 2, 0.05)
        M = Z.mirrored()
        for x, y in [(0.2, 0.3), (-0.1, -0.4)]:
            for side in ("upper", "lower"):
                f1, f2 = Z.side(side)(-x, y)
                g1, g2 = M.side(side)(x, y)
                assert abs(g1 + f1) <= 1e-15 and abs(g2 - f2) <= 1e-15

    def test_flipped_swaps_roles(self):
        Z = make_z0(-1.0, 0.5)
        F = Z.flipped()
        # upper role of the flipped field mirrors the original lower field
        f1, f2 = Z.lower(0.2, -0.3)
        g1, g2 = F.upper(0.2, 0.3)
        assert (g1, g2) == (f1, -f2)

    def test_reversed_time(self):
        Z = make_z0(-1.0, -1.0)
        R = Z.reversed_time()
        assert R.upper(0.2, 0.3) == tuple(-v for v in Z.upper(0.2, 0.3))


# ---------------------------------------------------------------------------
# catalog constructors

class TestLinearAndNormalForms:
    def test_make_linear_values(self):
        Z = make_linear([[-1, -1], [1, -1]], [[-1, -1], [1, -1]])
        assert Z.upper(1.0, 0.0) == (-1.0, 1.0)
        assert Z.lower(0.0, 1.0) == (-1.0, -1.0)

    def test_make_linear_validates_shape(self):
        with pytest.raises(FieldError):
            make_linear([[1, 2, 3]], [[1, 0], [0, 1]])
        with pytest.raises(FieldError):
            make_linear([[1, math.nan], [0, 1]], [[1, 0], [0, 1]])

    def test_zero_matrix_allowed_here(self):
        # degenerate Jacobians are caught later by the equilibrium test,
        # not at construction
        Z = make_linear([[0, 0], [0, 0]], [[1, 0], [0, 1]])
        assert Z.upper(0.5, 0.5) == (0.0, 0.0)

    def test_fs_generator(self):
        Z = make_normal_form("FS")
        assert Z.upper(0.0, 1.0) == (-1.0, 0.0)
        assert Z.upper(1.0, 0.0) == (0.0, 1.0)
        assert Z.lower(0.0, 1.0) == (1.0, 0.0)

    def test_ns1_generator(self):
        Z = make_normal_form("NS-1")
        assert Z.upper(1.0, 1.0) == (3.0, 3.0)     # (2x+y, x+2y)
        assert Z.lower(1.0, 1.0) == (1.0, 1.0)     # (y, x)

    def test_nn3_generator(self):
        Z = make_normal_form("NN-3")
        for side in ("upper", "lower"):
            assert Z.side(side)(1.0, 1.0) == (-1.0, -1.0)  # (-2x+y, x-2y)

    def test_unknown_label(self):
        with pytest.raises(FieldError):
            make_normal_form("XX-9")

    def test_all_labels_construct(self):
        assert len(NORMAL_FORM_LABELS) == 11
        for label in NORMAL_FORM_LABELS:
            Z = make_normal_form(label)
            assert Z.upper(0.0, 0.0) == (0.0, 0.0)
            assert Z.lower(0.0, 0.0) == (0.0, 0.0)


class TestZ0Family:
    def test_values(self):
        Z = make_z0(-1.0, 2.0 ** -3)
        assert Z.upper(0.3, 0.5) == (-0.5, 0.3)
        assert Z.lower(0.3, -0.8) == (-0.1, 0.3)

    def test_zero_parameter(self):
        with pytest.raises(ZeroParameter):
            make_z0(0.0, 1.0)
        with pytest.raises(ZeroParameter):
            make_z0(1.0, 0.0)

    def test_jacobians(self):
        Z = make_z0(-0.25, 0.5)
        assert np.allclose(Z.upper.jacobian(0, 0), [[0, -0.25], [1, 0]],
                           atol=1e-12)
        assert np.allclose(Z.lower.jacobian(0, 0), [[0, 0.5], [1, 0]],
                           atol=1e-12)


class TestProp5Families:
    def test_eps_zero_reduces_to_z0(self):
        for maker in (lambda: make_prop52(-0.25, 0.5, 2, 0.0),
                      lambda: make_prop53(-0.25, 0.5, 0.0)):
            assert _max_dev(maker(), make_z0(-0.25, 0.5)) == 0.0

    def test_m1_lower_second_component(self):
        Z = make_prop52(-0.25, -0.25, 1, 0.1)
        for x in (-0.3, 0.0, 0.17, 0.4):
            want = x + 0.1 * (3 * x * x - 0.1 ** 2)
            assert abs(Z.lower(x, 0.0)[1] - want) <= 1e-15

    def test_parameter_bounds(self):
        with pytest.raises(ParameterOutOfRange):
            make_prop52(0.6, -0.25, 1, 0.05)
        with pytest.raises(ParameterOutOfRange):
            make_prop52(-0.25, 0.0, 1, 0.0)
        with pytest.raises(ParameterOutOfRange):
            make_prop52(-0.25, -0.25, 1, 0.3)   # eps >= min(|a|,|b|)
        with pytest.raises(ParameterOutOfRange):
            make_prop52(-0.25, -0.25, 0, 0.05)
        with pytest.raises(ParameterOutOfRange):
            make_prop53(-0.25, -0.25, 0.25)

    def test_flat_bump_vanishing(self):
        Z = make_prop53(-0.25, -0.25, 0.05)
        # d(bump)/dx term vanishes identically for x <= 0
        assert Z.lower(-1.0, 0.0)[1] == -1.0
        # at x = eps the bump itself is e^(-1/eps) * sin(pi), i.e. tiny
        bump = ex.parse("if(x > 0, exp(-1/x) * sin(pi*eps/x), 0)")
        assert abs(ex.evaluate(bump, 0.05, 0.0, {"eps": 0.05})) < 1e-20

    def test_first_integral_orthogonal_to_field(self):
        rng = random.Random(99)
        for Z in (make_z0(-1.0, 0.5), make_prop52(-0.25, 0.25, 3, 0.05),
                  make_prop53(0.5, -0.25, 0.05)):
            for side in ("upper", "lower"):
                F = Z.side(side)
                hx = ex.compile_expr(ex.differentiate(F.first_integral, "x"),
                                     F.params)
                hy = ex.compile_expr(ex.differentiate(F.first_integral, "y"),
                                     F.params)
                for _ in range(50):
                    x, y = rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)
                    f1, f2 = F(x, y)
                    dot = hx(x, y) * f1 + hy(x, y) * f2
                    assert abs(dot) <= 1e-12 * (1 + abs(f1) + abs(f2))


class TestPerturbationBuilders:
    def test_shift_zero_is_identity(self):
        Z = make_normal_form("FF-1")
        assert make_pseudo_hopf_shift(Z, 0.0) is Z

    def test_shift_moves_normal_component(self):
        Z = make_normal_form("FF-1")
        S = make_pseudo_hopf_shift(Z, 0.01)
        x, y = 0.2, -0.3
        f1, f2 = Z.lower(x, y)
        assert S.lower(x, y) == (f1, f2 + 0.01)
        assert S.upper(x, y) == Z.upper(x, y)

    def test_shift_additivity(self):
        Z = make_normal_form("FF-1")
        twice = make_pseudo_hopf_shift(make_pseudo_hopf_shift(Z, 0.01), 0.02)
        once = make_pseudo_hopf_shift(Z, 0.03)
        assert _max_dev(twice, once) <= 1e-15

    def test_fold_perturbation_identity_at_zero(self):
        Z = make_z0(-1.0, -1.0)
        assert _max_dev(make_theorem13_perturbation(Z, 0.0, 0.0, 0.0), Z) == 0.0

    def test_fold_perturbation_offsets(self):
        Z = make_normal_form("FF-1")
        eps1 = 0.1
        P = make_theorem13_perturbation(Z, eps1, 0.0, 0.0)
        cu = Z.upper.f2x(0.0, 0.0)
        cl = Z.lower.f2x(0.0, 0.0)
        assert abs(P.upper(0.0, 0.0)[0] + cu * eps1) <= 1e-15
        assert abs(P.lower(0.0, 0.0)[0] - cl * eps1) <= 1e-15
        assert P.upper(0.0, 0.0)[1] == 0.0
        assert P.lower(0.0, 0.0)[1] == 0.0

    def test_fold_perturbation_requires_nondegenerate_base(self):
        bad = make_linear([[0, 0], [0, 0]], [[1, 0], [0, 1]])
        with pytest.raises(FieldError):
            make_theorem13_perturbation(bad, 0.1, 0.0, 0.0)

    def test_eigenvalue_split_perturbation(self):
        from pwsplane.spectral import eigen_data
        base = make_linear([[1, 0], [1, 1]], [[1, 0], [1, 1]])
        for eps in (-0.04, 0.04):
            P = make_omega3_perturbation(base, eps)
            e = eigen_data(P.upper.jacobian(0.0, 0.0))
            if eps < 0:
                assert e.complex_pair
                assert abs(abs(e.im1) - math.sqrt(-eps) / 2) <= 1e-12
                assert abs(e.re1 - 1.0) <= 1e-12
            else:
                assert not e.complex_pair
                assert abs(e.re1 - (1.0 + math.sqrt(eps) / 2)) <= 1e-12
                assert abs(e.re2 - (1.0 - math.sqrt(eps) / 2)) <= 1e-12
        assert _max_dev(make_omega3_perturbation(base, 0.0), base) == 0.0

    def test_eigenvalue_split_rejects_distinct(self):
        saddle = make_linear([[0, 1], [1, 0]], [[0, 1], [1, 0]])
        with pytest.raises(NotOmega3):
            make_omega3_perturbation(saddle, 0.01)
        no21 = make_linear([[1, 1], [0, 1]], [[1, 0], [1, 1]])
        with pytest.raises(NotOmega3):
            make_omega3_perturbation(no21, 0.01)


class TestWindingCounterexample:
    def test_linearized_values(self):
        Z = make_counterexample_zstar(True)
        assert Z.lower(0.1, 0.0) == (0.1, 0.1)
        assert Z.upper(0.3, 0.2) == (0.2, 0.3)

    def test_shared_jacobians_at_origin(self):
        Zn = make_counterexample_zstar(False)
        Zl = make_counterexample_zstar(True)
        assert np.allclose(Zn.lower.jacobian(0.0, 0.0),
                           Zl.lower.jacobian(0.0, 0.0), atol=1e-12)
        assert np.allclose(Zn.lower.jacobian(0.0, 0.0),
                           [[1.0, 0.0], [1.0, 1.0]], atol=1e-12)

    def test_radial_term_closed_form(self):
        # at x^2 + y^2 = e^-2 the radial factor equals e^-1 exactly
        Z = make_counterexample_zstar(False)
        x = math.exp(-1.0)
        gamma = Z.lower(x, 0.0)[0] - x
        assert abs(gamma - math.exp(-1.0) / 2.0) <= 1e-14

    def test_default_box(self):
        assert make_counterexample_zstar(False).halfwidth == 0.95


def test_catalog_has_no_sliding_near_origin():
    # tangency condition X2x(0,0) * Y2x(0,0) > 0 across the catalog
    catalog = [make_normal_form(lbl) for lbl in NORMAL_FORM_LABELS]
    catalog += [make_z0(-1.0, -1.0), make_prop52(-0.25, -0.25, 2, 0.05),
                make_prop53(-0.25, -0.25, 0.05),
                make_counterexample_zstar(False),
                make_counterexample_zstar(True)]
    for Z in catalog:
        assert Z.upper.f2x(0.0, 0.0) * Z.lower.f2x(0.0, 0.0) > 0.0

"""Planar smooth fields, piecewise fields split by y=0, and the catalog of
named systems with validated parameters.

A :class:`PiecewiseField` always switches on the line y=0; the upper field
acts on y>0 and the lower field on y<0. Fields are immutable after
construction and safe for concurrent evaluation.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .expr import (BinOp, Call, Cond, Const, Expr, Neg, Param, Var,
                   compile_expr, differentiate, parse, substitute_var)

__all__ = [
    "PlanarField", "PiecewiseField", "FieldError", "ZeroParameter",
    "ParameterOutOfRange", "NotOmega3", "NORMAL_FORM_LABELS",
    "planar_field", "make_linear", "make_normal_form", "make_z0",
    "make_prop52", "make_prop53", "make_pseudo_hopf_shift",
    "make_theorem13_perturbation", "make_omega3_perturbation",
    "make_counterexample_zstar",
]


class FieldError(ValueError):
    pass


class ZeroParameter(FieldError):
    pass


class ParameterOutOfRange(FieldError):
    pass


class NotOmega3(FieldError):
    pass


class PlanarField:
    """A smooth planar vector field (F1, F2) with bound parameters.

    ``first_integral``, when given, is an expression conserved along
    orbits of the field; the integrator uses it to polish switching-line
    hits.
    """

    def __init__(self, f1: Expr, f2: Expr, params: Mapping[str, float] | None = None,
                 first_integral: Expr | None = None):
        self.f1 = f1
        self.f2 = f2
        self.params = dict(params or {})
        for name, value in self.params.items():
            if not math.isfinite(value):
                raise FieldError(f"parameter '{name}' is not finite")
        self.first_integral = first_integral
        self._c1 = compile_expr(f1, self.params)
        self._c2 = compile_expr(f2, self.params)
        # symbolic Jacobian entries d(Fi)/d(x or y)
        self._jac_exprs = (
            differentiate(f1, "x"), differentiate(f1, "y"),
            differentiate(f2, "x"), differentiate(f2, "y"),
        )
        self._cjac = tuple(compile_expr(d, self.params) for d in self._jac_exprs)
        if first_integral is not None:
            self._c_h = compile_expr(first_integral, self.params)
            self._c_hx = compile_expr(differentiate(first_integral, "x"), self.params)
        else:
            self._c_h = None
            self._c_hx = None

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return self._c1(x, y), self._c2(x, y)

    def f2x(self, x: float, y: float) -> float:
        """Partial derivative of the second component with respect to x."""
        return self._cjac[2](x, y)

    def jacobian(self, x: float, y: float) -> np.ndarray:
        j = self._cjac
        return np.array([[j[0](x, y), j[1](x, y)],
                         [j[2](x, y), j[3](x, y)]])

    def invariant(self, x: float, y: float) -> float:
        if self._c_h is None:
            raise FieldError("field has no declared first integral")
        return self._c_h(x, y)

    def transformed(self, flip_x: bool = False, flip_y: bool = False,
                    negate_time: bool = False) -> "PlanarField":
        """Conjugate by coordinate reflections and/or reverse time."""
        f1, f2, h = self.f1, self.f2, self.first_integral
        if flip_x:
            f1 = Neg(substitute_var(f1, "x", Neg(Var("x"))))
            f2 = substitute_var(f2, "x", Neg(Var("x")))
            h = None if h is None else substitute_var(h, "x", Neg(Var("x")))
        if flip_y:
            f1 = substitute_var(f1, "y", Neg(Var("y")))
            f2 = Neg(substitute_var(f2, "y", Neg(Var("y"))))
            h = None if h is None else substitute_var(h, "y", Neg(Var("y")))
        if negate_time:
            f1, f2 = Neg(f1), Neg(f2)
        return PlanarField(f1, f2, self.params, first_integral=h)


class PiecewiseField:
    """Pair of smooth fields split by the switching line y=0."""

    def __init__(self, upper: PlanarField, lower: PlanarField,
                 halfwidth: float = 1.0, name: str = ""):
        if halfwidth <= 0:
            raise FieldError("working-box halfwidth must be positive")
        self.upper = upper
        self.lower = lower
        self.halfwidth = halfwidth
        self.name = name

    def side(self, which: str) -> PlanarField:
        if which == "upper":
            return self.upper
        if which == "lower":
            return self.lower
        raise ValueError(f"side must be 'upper' or 'lower', got {which!r}")

    def in_box(self, x: float, y: float) -> bool:
        return abs(x) <= self.halfwidth and abs(y) <= self.halfwidth

    def mirrored(self) -> "PiecewiseField":
        """Conjugate by (x, y) -> (-x, y); keeps the upper/lower split."""
        return PiecewiseField(self.upper.transformed(flip_x=True),
                              self.lower.transformed(flip_x=True),
                              self.halfwidth, name=self.name + "~mx")

    def flipped(self) -> "PiecewiseField":
        """Conjugate by (x, y) -> (x, -y); swaps the upper/lower roles."""
        return PiecewiseField(self.lower.transformed(flip_y=True),
                              self.upper.transformed(flip_y=True),
                              self.halfwidth, name=self.name + "~my")

    def rotated(self) -> "PiecewiseField":
        return self.mirrored().flipped()

    def reversed_time(self) -> "PiecewiseField":
        return PiecewiseField(self.upper.transformed(negate_time=True),
                              self.lower.transformed(negate_time=True),
                              self.halfwidth, name=self.name + "~rev")


def planar_field(f1: str | Expr, f2: str | Expr,
                 params: Mapping[str, float] | None = None,
                 first_integral: str | Expr | None = None) -> PlanarField:
    """Build a field from expression strings or trees."""
    def conv(e):
        return parse(e) if isinstance(e, str) else e
    h = None if first_integral is None else conv(first_integral)
    return PlanarField(conv(f1), conv(f2), params, first_integral=h)


# ---------------------------------------------------------------------------
# catalog helpers

def _lin_expr(c1: float, c2: float) -> Expr:
    """c1*x + c2*y with trivial-coefficient folding."""
    terms = []
    if c1 != 0.0:
        terms.append(Var("x") if c1 == 1.0 else BinOp("*", Const(float(c1)), Var("x")))
    if c2 != 0.0:
        terms.append(Var("y") if c2 == 1.0 else BinOp("*", Const(float(c2)), Var("y")))
    if not terms:
        return Const(0.0)
    out = terms[0]
    for t in terms[1:]:
        out = BinOp("+", out, t)
    return out


def _linear_planar(A: Sequence[Sequence[float]],
                   first_integral: Expr | None = None) -> PlanarField:
    (a11, a12), (a21, a22) = A
    return PlanarField(_lin_expr(a11, a12), _lin_expr(a21, a22),
                       first_integral=first_integral)


def _check_tangency_condition(Z: PiecewiseField) -> None:
    # condition X2x(0,0) * Y2x(0,0) > 0: no sliding in a punctured
    # neighborhood of the origin
    p = Z.upper.f2x(0.0, 0.0) * Z.lower.f2x(0.0, 0.0)
    if not p > 0.0:
        raise FieldError(
            f"catalog field violates the no-sliding condition at O "
            f"(X2x*Y2x = {p:g} <= 0)")


# ---------------------------------------------------------------------------
# catalog constructors

def make_linear(Aplus: Sequence[Sequence[float]],
                Aminus: Sequence[Sequence[float]],
                halfwidth: float = 1.0) -> PiecewiseField:
    """Piecewise linear field from the two Jacobian matrices."""
    Ap = np.asarray(Aplus, dtype=float)
    Am = np.asarray(Aminus, dtype=float)
    if Ap.shape != (2, 2) or Am.shape != (2, 2):
        raise FieldError("matrices must be 2x2")
    if not (np.isfinite(Ap).all() and np.isfinite(Am).all()):
        raise FieldError("matrix entries must be finite")
    return PiecewiseField(_linear_planar(Ap), _linear_planar(Am),
                          halfwidth, name="linear")


NORMAL_FORM_LABELS = ("FF-1", "FF-2", "FN-1", "FN-2", "FS",
                      "NN-1", "NN-2", "NN-3", "NS-1", "NS-2", "SS")

_FOCUS = {"+1": [[1, -1], [1, 1]], "-1": [[-1, -1], [1, -1]]}


def _nf_matrices(label: str) -> tuple[list, list]:
    rot = [[0, -1], [1, 0]]           # center piece used by the focus side
    node = lambda s: [[2 * s, 1], [1, 2 * s]]
    saddle = [[0, 1], [1, 0]]
    table = {
        "FF-1": (_FOCUS["-1"], _FOCUS["-1"]),
        "FF-2": (_FOCUS["+1"], _FOCUS["+1"]),
        "FN-1": (rot, node(1)),
        "FN-2": (rot, node(-1)),
        "FS": (rot, saddle),
        "NN-1": (node(1), node(1)),
        "NN-2": (node(1), node(-1)),
        "NN-3": (node(-1), node(-1)),
        "NS-1": (node(1), saddle),
        "NS-2": (node(-1), saddle),
        "SS": (saddle, saddle),
    }
    return table[label]


def make_normal_form(label: str, halfwidth: float = 1.0) -> PiecewiseField:
    """Generator of one of the 11 local portraits, by label."""
    if label not in NORMAL_FORM_LABELS:
        raise FieldError(f"unknown portrait label {label!r}; "
                         f"expected one of {', '.join(NORMAL_FORM_LABELS)}")
    Ap, Am = _nf_matrices(label)
    Z = make_linear(Ap, Am, halfwidth)
    Z.name = f"normal_form[{label}]"
    _check_tangency_condition(Z)
    return Z


def _z0_side(coef_name: str, value: float) -> PlanarField:
    # (c*y, x) with first integral x^2/2 - c*y^2/2
    h = BinOp("-", BinOp("/", BinOp("^", Var("x"), Const(2.0)), Const(2.0)),
              BinOp("*", BinOp("/", Param(coef_name), Const(2.0)),
                    BinOp("^", Var("y"), Const(2.0))))
    return PlanarField(BinOp("*", Param(coef_name), Var("y")), Var("x"),
                       {coef_name: value}, first_integral=h)


def make_z0(a: float, b: float, halfwidth: float = 1.0) -> PiecewiseField:
    """Unperturbed two-parameter family: upper (a*y, x), lower (b*y, x)."""
    if a * b == 0.0:
        raise ZeroParameter("make_z0 requires a*b != 0")
    Z = PiecewiseField(_z0_side("a", a), _z0_side("b", b), halfwidth,
                       name=f"z0(a={a:g}, b={b:g})")
    _check_tangency_condition(Z)
    return Z


def _check_prop5_params(a: float, b: float, eps: float) -> None:
    if not 0.0 < abs(a) <= 0.5:
        raise ParameterOutOfRange(f"need 0 < |a| <= 1/2, got a={a:g}")
    if not 0.0 < abs(b) <= 0.5:
        raise ParameterOutOfRange(f"need 0 < |b| <= 1/2, got b={b:g}")
    if not 0.0 <= eps < min(abs(a), abs(b)):
        raise ParameterOutOfRange(
            f"need 0 <= eps < min(|a|, |b|) = {min(abs(a), abs(b)):g}, got eps={eps:g}")


def _upper_perturbed(a: float, eps: float) -> PlanarField:
    # ((a-eps)*y - eps, x), first integral x^2/2 - (a-eps)/2 y^2 + eps*y
    p = {"a": a, "eps": eps}
    f1 = BinOp("-", BinOp("*", BinOp("-", Param("a"), Param("eps")), Var("y")),
               Param("eps"))
    h = BinOp("+",
              BinOp("-", BinOp("/", BinOp("^", Var("x"), Const(2.0)), Const(2.0)),
                    BinOp("*", BinOp("/", BinOp("-", Param("a"), Param("eps")),
                                     Const(2.0)),
                          BinOp("^", Var("y"), Const(2.0)))),
              BinOp("*", Param("eps"), Var("y")))
    return PlanarField(f1, Var("x"), p, first_integral=h)


def _poly_product_expanded(m: int) -> dict[int, Expr]:
    """Coefficients (as expression trees in eps) of prod_i (x^2 - (i*eps/m)^2),
    keyed by the power of x. Exact symbolic expansion, degree 2m."""
    poly: dict[int, Expr] = {0: Const(1.0)}
    for i in range(1, m + 1):
        ci = BinOp("^", BinOp("/", BinOp("*", Const(float(i)), Param("eps")),
                              Const(float(m))), Const(2.0))
        out: dict[int, Expr] = {}
        for k, coef in poly.items():
            out[k + 2] = BinOp("+", out[k + 2], coef) if k + 2 in out else coef
            term = Neg(BinOp("*", ci, coef))
            out[k] = BinOp("+", out[k], term) if k in out else term
        poly = out
    return poly


def _poly_to_expr(poly: Mapping[int, Expr]) -> Expr:
    out: Expr | None = None
    for k in sorted(poly):
        mono = BinOp("*", poly[k], BinOp("^", Var("x"), Const(float(k)))) \
            if k > 0 else poly[k]
        out = mono if out is None else BinOp("+", out, mono)
    return out if out is not None else Const(0.0)


def _lower_perturbed(b: float, eps: float, bump: Expr,
                     params: Mapping[str, float]) -> PlanarField:
    """((b-eps)*y + eps, x + eps*d(bump)/dx) with its first integral."""
    p = dict(params)
    p.update({"b": b, "eps": eps})
    f1 = BinOp("+", BinOp("*", BinOp("-", Param("b"), Param("eps")), Var("y")),
               Param("eps"))
    dbump = differentiate(bump, "x")
    f2 = BinOp("+", Var("x"), BinOp("*", Param("eps"), dbump))
    # H = x^2/2 + eps*bump(x) - (b-eps)/2 y^2 - eps*y
    h = BinOp("-",
              BinOp("-",
                    BinOp("+",
                          BinOp("/", BinOp("^", Var("x"), Const(2.0)), Const(2.0)),
                          BinOp("*", Param("eps"), bump)),
                    BinOp("*", BinOp("/", BinOp("-", Param("b"), Param("eps")),
                                     Const(2.0)),
                          BinOp("^", Var("y"), Const(2.0)))),
              BinOp("*", Param("eps"), Var("y")))
    return PlanarField(f1, f2, p, first_integral=h)


def make_prop52(a: float, b: float, m: int, eps: float,
                halfwidth: float = 1.0) -> PiecewiseField:
    """Polynomial perturbation of z0 carrying exactly m crossing limit cycles.

    The degree-(2m+1) bump x * prod_i (x^2 - (i*eps/m)^2) is expanded
    symbolically at construction so its derivative is exact.
    """
    if not (isinstance(m, int) and m >= 1):
        raise ParameterOutOfRange(f"m must be a positive integer, got {m!r}")
    _check_prop5_params(a, b, eps)
    poly = _poly_product_expanded(m)
    bump = BinOp("*", Var("x"), _poly_to_expr(poly))
    Z = PiecewiseField(_upper_perturbed(a, eps),
                       _lower_perturbed(b, eps, bump, {}),
                       halfwidth,
                       name=f"prop52(a={a:g}, b={b:g}, m={m}, eps={eps:g})")
    _check_tangency_condition(Z)
    return Z


def _smooth_bump() -> Expr:
    # if(x > 0, exp(-1/x) * sin(pi*eps/x), 0): C-infinity, flat at 0
    return parse("if(x > 0, exp(-1/x) * sin(pi*eps/x), 0)")


def make_prop53(a: float, b: float, eps: float,
                halfwidth: float = 1.0) -> PiecewiseField:
    """Flat C-infinity perturbation of z0 with infinitely many cycles."""
    _check_prop5_params(a, b, eps)
    Z = PiecewiseField(_upper_perturbed(a, eps),
                       _lower_perturbed(b, eps, _smooth_bump(), {}),
                       halfwidth,
                       name=f"prop53(a={a:g}, b={b:g}, eps={eps:g})")
    _check_tangency_condition(Z)
    return Z


def make_pseudo_hopf_shift(base: PiecewiseField, delta: float) -> PiecewiseField:
    """Shift the lower field's second component by a constant delta."""
    if delta == 0.0:
        return base
    low = base.lower
    f2 = BinOp("+", low.f2, Const(float(delta)))
    shifted = PlanarField(low.f1, f2, low.params)
    return PiecewiseField(base.upper, shifted, base.halfwidth,
                          name=f"{base.name}+shift({delta:g})")


def make_theorem13_perturbation(base: PiecewiseField, eps1: float, eps2: float,
                                eps3: float) -> PiecewiseField:
    """Three-parameter perturbation turning the origin into a fold-fold.

    The derivative values X2x(0,0) and Y2x(0,0) of the base field are
    baked in as constants at construction.
    """
    from .spectral import omega0_test  # deferred: spectral depends on fields
    res = omega0_test(base)
    if not res.passed:
        raise FieldError(f"base field fails the non-degeneracy test: {res.reason}")
    cu = base.upper.f2x(0.0, 0.0)
    cl = base.lower.f2x(0.0, 0.0)
    up, low = base.upper, base.lower

    u1 = BinOp("+", BinOp("-", up.f1, Const(cu * eps1)),
               BinOp("*", Const(cu * eps1), Var("x")))
    upper = PlanarField(u1, up.f2, up.params)

    l1 = BinOp("+", BinOp("+", low.f1, Const(cl * eps1)),
               BinOp("*", Const(cl * eps1), Var("x")))
    if eps2 != 0.0:
        l1 = BinOp("+", l1, BinOp("*", Const(float(eps2)), low.f2))
    l2 = low.f2 if eps3 == 0.0 else BinOp("+", low.f2, Const(float(eps3)))
    lower = PlanarField(l1, l2, low.params)

    return PiecewiseField(upper, lower, base.halfwidth,
                          name=f"{base.name}+thm13({eps1:g},{eps2:g},{eps3:g})")


def make_omega3_perturbation(base: PiecewiseField, eps: float) -> PiecewiseField:
    """Split the repeated eigenvalue of the upper Jacobian.

    Replaces the upper linear part while keeping the nonlinear remainder;
    eps < 0 yields a complex pair, eps > 0 two distinct real eigenvalues.
    """
    A = base.upper.jacobian(0.0, 0.0)
    disc = (A[0, 0] - A[1, 1]) ** 2 + 4.0 * A[0, 1] * A[1, 0]
    if abs(disc) > 1e-9:
        raise NotOmega3(f"upper Jacobian has distinct eigenvalues (disc={disc:g})")
    a21 = A[1, 0]
    if a21 == 0.0:
        raise NotOmega3("upper Jacobian has a21 = 0")
    if a21 + eps == 0.0:
        raise FieldError("eps equals -a21; perturbed matrix undefined")
    a12_new = (A[0, 1] * a21 + eps / 4.0) / (a21 + eps)
    up = base.upper
    f1 = BinOp("+", up.f1, _lin_expr(0.0, a12_new - A[0, 1]))
    f2 = BinOp("+", up.f2, _lin_expr(eps, 0.0))
    if eps == 0.0:
        f1, f2 = up.f1, up.f2
    return PiecewiseField(PlanarField(f1, f2, up.params), base.lower,
                          base.halfwidth, name=f"{base.name}+omega3({eps:g})")


def make_counterexample_zstar(linearized: bool,
                              halfwidth: float = 0.95) -> PiecewiseField:
    """Saddle over a perturbed non-diagonalizable node.

    The nonlinear variant's lower field carries a radially-weighted term
    that is C^1 yet makes its orbits wind back to the positive x-axis;
    the linearized variant's do not. The term is defined for x^2+y^2 < 1,
    so the default box halfwidth keeps evaluation inside that disk along
    the orbits of interest.
    """
    upper = planar_field("y", "x")
    if linearized:
        lower = planar_field("x", "x + y")
    else:
        gamma = parse("if(x^2 + y^2 > 0,"
                      " sqrt(x^2 + y^2) * (-1/2 * ln(x^2 + y^2))^(-3/2), 0)")
        half_gamma = BinOp("/", gamma, Const(2.0))
        lower = PlanarField(BinOp("+", Var("x"), half_gamma),
                            BinOp("+", BinOp("+", Var("x"), Var("y")), half_gamma),
                            {})
    Z = PiecewiseField(upper, lower, halfwidth,
                       name="zstar_L" if linearized else "zstar")
    _check_tangency_condition(Z)
    return Z

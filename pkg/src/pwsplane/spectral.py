"""Eigen-analysis at the origin and the local portrait classification.

The classification proceeds in layers: the non-degeneracy test (both
fields vanish at O, nonzero Jacobian determinants, matching tangency
directions), then the generic stratum with its six eigenvalue-pattern
subsets, and finally one of 11 portrait labels together with the sign
parameters of its generating normal form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import PiecewiseField, make_normal_form

__all__ = [
    "TAU_DELTA", "TAU_ELL", "EigenData", "Omega0Result", "OmegaClass",
    "NotOmega1", "jacobian_at_origin", "eigen_data", "omega0_test",
    "lyapunov_ell", "classify_local", "normal_form_of",
]

TAU_DELTA = 1e-9    # discriminant tolerance for "repeated eigenvalues"
TAU_ELL = 1e-9      # tolerance for "the focal constant vanishes"
_TAU_EQ = 1e-11     # component magnitude treated as zero at O


class NotOmega1(ValueError):
    pass


@dataclass(frozen=True)
class EigenData:
    """Spectrum of a 2x2 matrix from the trace/determinant closed form.

    A complex pair is stored as (re, +|im|), (re, -|im|); a real pair has
    both imaginary parts zero, first eigenvalue the larger one.
    """
    trace: float
    det: float
    discriminant: float
    re1: float
    im1: float
    re2: float
    im2: float

    @property
    def complex_pair(self) -> bool:
        return self.im1 != 0.0

    @property
    def repeated(self) -> bool:
        return abs(self.discriminant) <= TAU_DELTA


def eigen_data(A: np.ndarray) -> EigenData:
    A = np.asarray(A, dtype=float)
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        im = math.sqrt(-disc) / 2.0
        return EigenData(tr, det, disc, tr / 2.0, im, tr / 2.0, -im)
    r = math.sqrt(disc) / 2.0
    return EigenData(tr, det, disc, tr / 2.0 + r, 0.0, tr / 2.0 - r, 0.0)


def jacobian_at_origin(Z: PiecewiseField) -> tuple[np.ndarray, np.ndarray]:
    return Z.upper.jacobian(0.0, 0.0), Z.lower.jacobian(0.0, 0.0)


@dataclass(frozen=True)
class Omega0Result:
    passed: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


def omega0_test(Z: PiecewiseField) -> Omega0Result:
    """Non-degenerate two-sided equilibrium test at the origin."""
    vu = Z.upper(0.0, 0.0)
    vl = Z.lower(0.0, 0.0)
    if max(abs(vu[0]), abs(vu[1]), abs(vl[0]), abs(vl[1])) > _TAU_EQ:
        return Omega0Result(False, "NotEquilibrium")
    Ap, Am = jacobian_at_origin(Z)
    if np.linalg.det(Ap) * np.linalg.det(Am) == 0.0:
        return Omega0Result(False, "DegenerateJacobian")
    if not Ap[1, 0] * Am[1, 0] > 0.0:
        return Omega0Result(False, "TangencyCondition")
    return Omega0Result(True)


def lyapunov_ell(Aplus: np.ndarray, Aminus: np.ndarray) -> float:
    """Focal constant combining the two spectra; 1 if either is real."""
    ep = eigen_data(Aplus)
    em = eigen_data(Aminus)
    if ep.complex_pair and em.complex_pair:
        return ep.re1 / abs(ep.im1) + em.re1 / abs(em.im1)
    return 1.0


@dataclass(frozen=True)
class OmegaClass:
    in_omega0: bool
    reason: str = ""
    eig_upper: EigenData | None = None
    eig_lower: EigenData | None = None
    ell: float | None = None
    in_omega2: bool = False
    in_omega3: bool = False
    stratum: str | None = None          # "Omega1" | "Omega2" | "Omega3"
    subset: str | None = None           # ff fn fs nn ns ss (generic stratum)
    parameters: dict = field(default_factory=dict)   # subset of alpha..xi
    portrait_label: str | None = None
    reductions: tuple[str, ...] = ()    # which reflections canonicalized


def _nn_parameters(tp: float, tm: float) -> tuple[int, int, tuple[str, ...]]:
    """Sign parameters (gamma, eta) for the node-node subset."""
    if tp * tm > 0.0:
        s = 1 if tp > 0.0 else -1
        return s, s, ()
    # opposite traces: (+,-) is the canonical mixed pattern; (-,+) maps
    # onto it under the central reflection (x,y) -> (-x,-y)
    if tp > 0.0:
        return 1, -1, ()
    return 1, -1, ("central",)


def classify_local(Z: PiecewiseField) -> OmegaClass:
    """Full local classification of the origin."""
    base = omega0_test(Z)
    if not base.passed:
        return OmegaClass(False, base.reason)
    Ap, Am = jacobian_at_origin(Z)
    ep = eigen_data(Ap)
    em = eigen_data(Am)
    ell = lyapunov_ell(Ap, Am)
    omega2 = ep.complex_pair and em.complex_pair and abs(ell) <= TAU_ELL
    omega3 = ep.repeated or em.repeated
    if omega2 or omega3:
        stratum = "Omega3" if omega3 else "Omega2"
        return OmegaClass(True, "", ep, em, ell, omega2, omega3, stratum)

    def kind(e: EigenData) -> str:
        if e.complex_pair:
            return "f"          # focus-type spectrum
        return "n" if e.det > 0.0 else "s"  # node vs saddle

    pair = kind(ep) + kind(em)
    reductions: list[str] = []
    if pair in ("nf", "sf", "sn"):
        # canonical order puts the focus (then node) piece on top; the
        # vertical reflection (x,y) -> (x,-y) swaps the two pieces
        pair = pair[::-1]
        ep, em = em, ep
        reductions.append("vertical")
    subset = {"ff": "ff", "fn": "fn", "fs": "fs",
              "nn": "nn", "ns": "ns", "ss": "ss"}[pair]

    params: dict[str, int] = {}
    if subset == "ff":
        params["alpha"] = 1 if ell > 0.0 else -1
        label = "FF-1" if ell < 0.0 else "FF-2"
    elif subset == "fn":
        beta = 1 if em.trace > 0.0 else -1
        params["beta"] = beta
        label = "FN-1" if beta == 1 else "FN-2"
    elif subset == "fs":
        label = "FS"
    elif subset == "nn":
        gamma, eta, extra = _nn_parameters(ep.trace, em.trace)
        reductions.extend(extra)
        params["gamma"], params["eta"] = gamma, eta
        if gamma == eta:
            label = "NN-1" if gamma == 1 else "NN-3"
        else:
            label = "NN-2"
    elif subset == "ns":
        xi = 1 if ep.trace > 0.0 else -1
        params["xi"] = xi
        label = "NS-1" if xi == 1 else "NS-2"
    else:
        label = "SS"

    return OmegaClass(True, "", ep, em, ell, False, False, "Omega1",
                      subset, params, label, tuple(reductions))


def normal_form_of(c: OmegaClass) -> PiecewiseField:
    if c.stratum != "Omega1" or c.portrait_label is None:
        raise NotOmega1("classification has no generic portrait label")
    return make_normal_form(c.portrait_label)

"""Pointwise classification of the switching line y=0.

Crossing versus sliding follows the Filippov convention: a point of the
switching line is a crossing point when both one-sided fields push through
it the same way (product of second components positive); otherwise the
motion slides along the line with the convex-combination velocity.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fields import PiecewiseField

__all__ = [
    "TAU_SIGMA", "SigmaClassification", "TangencyReport", "SlidingFound",
    "classify_sigma_point", "sliding_velocity", "tangency_classify",
    "fold_fold_classify", "crossing_split_report", "CrossingSplitReport",
]

# tolerance for treating an evaluated component as zero; one order above
# the accumulated round-off of expression evaluation
TAU_SIGMA = 1e-11


class SlidingFound(ValueError):
    """A sampled switching-line point was not a crossing point."""

    def __init__(self, x: float):
        super().__init__(f"sliding detected on the switching line at x={x:.17g}")
        self.x = x


@dataclass(frozen=True)
class SigmaClassification:
    kind: str                       # "Crossing" | "Sliding" | "SingularSliding"
    direction: str | None = None    # "upward" | "downward" (crossing only)
    governing_side: str | None = None   # "upper" | "lower" (crossing only)
    velocity: float | None = None   # sliding velocity (sliding kinds)
    weight: float | None = None     # convex weight lambda in [0, 1]


@dataclass(frozen=True)
class TangencyReport:
    side: str
    category: str   # NotTangent | FoldVisible | FoldInvisible |
    #                 HigherOrderTangency | BoundaryEquilibrium
    product: float | None = None    # F1(q) * F2x(q) when the point is a fold


def classify_sigma_point(Z: PiecewiseField, x: float) -> SigmaClassification:
    """Classify the point (x, 0) of the switching line."""
    x1, x2 = Z.upper(x, 0.0)
    y1, y2 = Z.lower(x, 0.0)
    # snap near-zero normal components so the three-way split is exact
    if abs(x2) <= TAU_SIGMA:
        x2 = 0.0
    if abs(y2) <= TAU_SIGMA:
        y2 = 0.0
    if x2 == 0.0 and y2 == 0.0:
        # singular sliding point: motion on the line is frozen by convention
        return SigmaClassification("SingularSliding", velocity=0.0)
    if x2 * y2 > 0.0:
        direction = "upward" if x2 > 0.0 else "downward"
        governing = "upper" if x2 > 0.0 else "lower"
        return SigmaClassification("Crossing", direction=direction,
                                   governing_side=governing)
    lam = y2 / (y2 - x2)
    s = (y2 * x1 - x2 * y1) / (y2 - x2)
    return SigmaClassification("Sliding", velocity=s, weight=lam)


def sliding_velocity(Z: PiecewiseField, x: float) -> float:
    c = classify_sigma_point(Z, x)
    if c.velocity is None:
        raise ValueError(f"({x:g}, 0) is a crossing point; no sliding velocity")
    return c.velocity


def tangency_classify(Z: PiecewiseField, side: str, x: float) -> TangencyReport:
    """Tangency taxonomy of one side's field at (x, 0).

    Visibility means the tangent parabolic arc lies in the side's own
    half-plane: for the upper field that is F1*F2x > 0, for the lower
    field the inequality reverses because its orbits live in y <= 0.
    """
    field = Z.side(side)
    f1, f2 = field(x, 0.0)
    if abs(f2) > TAU_SIGMA:
        return TangencyReport(side, "NotTangent")
    if abs(f1) <= TAU_SIGMA:
        return TangencyReport(side, "BoundaryEquilibrium")
    product = f1 * field.f2x(x, 0.0)
    if abs(product) <= TAU_SIGMA:
        return TangencyReport(side, "HigherOrderTangency", product=product)
    visible = product > 0.0 if side == "upper" else product < 0.0
    category = "FoldVisible" if visible else "FoldInvisible"
    return TangencyReport(side, category, product=product)


def fold_fold_classify(Z: PiecewiseField, x: float) -> str:
    """One of VV, II, VI, IV (upper letter first), or NotFoldFold."""
    up = tangency_classify(Z, "upper", x)
    low = tangency_classify(Z, "lower", x)
    letters = {"FoldVisible": "V", "FoldInvisible": "I"}
    if up.category not in letters or low.category not in letters:
        return "NotFoldFold"
    return letters[up.category] + letters[low.category]


@dataclass(frozen=True)
class CrossingSplitReport:
    radius: float
    n: int
    right_direction: str
    left_direction: str
    consistent: bool    # matches the sign rule read off X2x(0,0)


def crossing_split_report(Z: PiecewiseField, radius: float,
                          n: int) -> CrossingSplitReport:
    """Verify that the switching line near O splits into two crossing sets.

    Samples n points on each side of the origin; any non-crossing sample
    raises SlidingFound. The expected directions follow the sign of
    X2x(0,0): positive means the right set flows upward and the left set
    downward, negative swaps them.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if radius <= 0 or radius > Z.halfwidth:
        raise ValueError(f"radius must lie in (0, {Z.halfwidth:g}]")
    directions: dict[int, set[str]] = {1: set(), -1: set()}
    for sgn in (1, -1):
        for k in range(1, n + 1):
            x = sgn * radius * k / (n + 1)
            c = classify_sigma_point(Z, x)
            if c.kind != "Crossing":
                raise SlidingFound(x)
            directions[sgn].add(c.direction)
    if len(directions[1]) != 1 or len(directions[-1]) != 1:
        raise SlidingFound(0.0)
    right = directions[1].pop()
    left = directions[-1].pop()
    expect_right = "upward" if Z.upper.f2x(0.0, 0.0) > 0.0 else "downward"
    expect_left = "downward" if expect_right == "upward" else "upward"
    return CrossingSplitReport(radius, n, right, left,
                               consistent=(right == expect_right
                                           and left == expect_left))

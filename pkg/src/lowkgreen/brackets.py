"""Ordered-simplex integrals of exponential weights of the potential.

A bracket of depth n is the integral of a product of n weight factors over
the simplex lower <= z_1 <= ... <= z_n <= upper.  Plain factors are
exp(sign * V); the angle variants replace the factor adjacent to an
infinite end with 2 e^{-V_lim} sinh(V_lim - V), which is what makes the
integral converge when V has a finite limit there.

Evaluation is one cumulative pass per level: with the innermost level
integrated first, level j is the running integral of (weight_j * level_{j-1}),
so the cost is linear in depth.  Semi-infinite ends are truncated where the
declared decay bounds the dropped tail below ``truncation_tail_tol``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._quad import PiecewiseChebFun, build_chebfun
from .errors import DivergentTail, InvalidSpec
from .potential import Decay, EndpointKind, PotentialModel


class BracketKind(enum.Enum):
    PLAIN = "plain"
    ANGLE_LEFT = "angle_left"
    ANGLE_RIGHT = "angle_right"


@dataclass(frozen=True)
class BracketSpec:
    kind: BracketKind
    signs: tuple
    lower: float
    upper: float

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        object.__setattr__(self, "signs", signs)
        if len(signs) < 1 or any(s not in (-1, 1) for s in signs):
            raise InvalidSpec("signs must be a non-empty tuple of +-1")
        if not self.lower <= self.upper:
            raise InvalidSpec(f"lower {self.lower} > upper {self.upper}")
        if self.kind is BracketKind.ANGLE_LEFT:
            if not math.isinf(self.lower) or self.lower > 0:
                raise InvalidSpec("angle-left brackets start at -infinity")
            if signs[0] != -1:
                raise InvalidSpec("the sinh slot of an angle bracket carries -1")
        if self.kind is BracketKind.ANGLE_RIGHT:
            if not math.isinf(self.upper) or self.upper < 0:
                raise InvalidSpec("angle-right brackets end at +infinity")
            if signs[-1] != -1:
                raise InvalidSpec("the sinh slot of an angle bracket carries -1")

    @property
    def depth(self) -> int:
        return len(self.signs)

    def sign_string(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 40
    truncation_tail_tol: float = 1e-14

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "truncation_tail_tol"):
            if getattr(self, name) <= 0:
                raise InvalidSpec(f"{name} must be positive")
        if self.max_depth <= 0:
            raise InvalidSpec("max_depth must be positive")


def _endpoint(model: PotentialModel, side: str):
    ep = model.left if side == "left" else model.right
    if ep is None:
        raise InvalidSpec(
            f"model {model.id!r} declares no {side} endpoint class")
    return ep


def _weight_factory(model: PotentialModel, spec: BracketSpec):
    """List of per-slot weight callables, slot order z_1 .. z_n."""
    out = []
    for j, s in enumerate(spec.signs):
        if spec.kind is BracketKind.ANGLE_LEFT and j == 0:
            v1 = _endpoint(model, "left").limit_value
            if v1 is None:
                raise InvalidSpec("angle-left bracket needs a finite left limit")
            out.append(lambda z, v1=v1: 2.0 * np.exp(-v1)
                       * np.sinh(v1 - model.V(z)))
        elif spec.kind is BracketKind.ANGLE_RIGHT and j == spec.depth - 1:
            v2 = _endpoint(model, "right").limit_value
            if v2 is None:
                raise InvalidSpec("angle-right bracket needs a finite right limit")
            out.append(lambda z, v2=v2: 2.0 * np.exp(-v2)
                       * np.sinh(v2 - model.V(z)))
        else:
            out.append(lambda z, s=s: np.exp(s * model.V(z)))
    return out


def _edge_weight_decay(model: PotentialModel, spec: BracketSpec, side: str) -> Decay:
    """Decay descriptor of the factor adjacent to the infinite end.

    Raises DivergentTail when the adjacent factor does not decay at all
    (the integral cannot exist).
    """
    ep = _endpoint(model, side)
    if spec.kind is not BracketKind.PLAIN:
        if (side == "left") == (spec.kind is BracketKind.ANGLE_LEFT):
            # sinh factor decays like |V - limit|
            return ep.decay
        raise InvalidSpec("angle bracket truncated on the wrong side")
    sign = spec.signs[0] if side == "left" else spec.signs[-1]
    if ep.kind is EndpointKind.PLUS_INFINITY and sign == -1:
        return ep.decay
    if ep.kind is EndpointKind.MINUS_INFINITY and sign == 1:
        return ep.decay
    raise DivergentTail(
        f"slot weight exp({sign:+d}V) does not decay toward the {side} end "
        f"of {model.id!r}")


def _find_cut(weight, anchor: float, direction: int, depth: int,
              decay: Decay, cfg: QuadratureConfig) -> float:
    """Point beyond which the dropped tail mass is below the tail tolerance.

    ``direction`` is -1 for a left (-infinity) cut, +1 for a right one.
    The weighted probe includes the |z|^(depth-1) simplex volume factor.
    """
    tol = cfg.truncation_tail_tol
    scale = 1.0 + abs(float(np.asarray(weight(np.array([anchor])))[0]))
    if decay.is_power_like:
        a = decay.alpha
        if a <= depth:
            raise DivergentTail(
                f"power tail alpha={a} too slow for a depth-{depth} bracket")
        # integral_X^inf z^(depth-1) z^-a dz = X^(depth-a)/(a-depth)
        x_a = (1.0 / ((a - depth) * tol)) ** (1.0 / (a - depth))
        start = max(1.0, x_a, abs(anchor) + 1.0)
    else:
        start = 1.0

    def small(d):
        z = np.array([anchor + direction * d])
        w = abs(float(np.asarray(weight(z))[0]))
        return w * (1.0 + abs(d)) ** (depth - 1) < tol * scale

    # Keep the cut as tight as the tolerance allows: over-deep cuts make the
    # intermediate cumulative functions underflow, and the junk that leaves
    # behind is amplified by growing weights later in the chain.
    d = start if decay.is_power_like else 0.5
    for _ in range(600):
        if small(d) and small(1.3 * d):
            return anchor + direction * 1.15 * 1.3 * d
        d *= 1.3
    raise DivergentTail(
        "could not locate an integrable tail toward the "
        f"{'left' if direction < 0 else 'right'} end")


def _clip_overflow(weights, anchor: float, cut: float) -> float:
    """Pull the cut toward the anchor until every slot weight is representable.

    Where one factor grows its partner decays reciprocally, so at the
    overflow boundary of the growing factor the dropped tail is far below
    any tolerance.
    """
    with np.errstate(over="ignore"):
        for _ in range(400):
            vals = [abs(float(np.asarray(w(np.array([cut])))[0])) for w in weights]
            if all(v < 1e280 for v in vals):
                return cut
            cut = anchor + 0.95 * (cut - anchor)
            if abs(cut - anchor) < 0.25:
                return cut
    return cut


def _ladder(near: float, far: float) -> list:
    """Geometrically graded edges from ``near`` toward ``far``."""
    out = [near]
    step = 1.0
    pos = near
    sgn = 1.0 if far > near else -1.0
    while (far - pos) * sgn > step:
        pos += sgn * step
        out.append(pos)
        step *= 2.0
    out.append(far)
    return out


def _initial_edges(model, lo, hi):
    if math.isinf(lo) or math.isinf(hi):
        raise AssertionError("cuts must be applied before building edges")
    edges = set(_ladder(hi, lo))
    edges.update(_ladder(lo, hi))
    edges.update(b for b in model.breakpoints if lo < b < hi)
    edges.update((lo, hi))
    return sorted(edges)


class BracketChain:
    """Cumulative evaluation of one bracket family against one model.

    ``fun`` is the depth-n cumulative integral as a function of the open
    end: for a left-anchored chain (lower end fixed, possibly truncated
    from -infinity) it maps upper limits to values; for a right-anchored
    chain it maps lower limits.
    """

    def __init__(self, spec, model, cfg, fun, open_side, est_error):
        self.spec = spec
        self.model = model
        self.cfg = cfg
        self.fun = fun
        self.open_side = open_side
        self.est_error = est_error

    def __call__(self, z):
        return self.fun(z)


def build_chain(spec: BracketSpec, model: PotentialModel,
                cfg: QuadratureConfig, open_anchor: Optional[float] = None) -> BracketChain:
    """Build the cumulative chain, choosing the anchored end automatically.

    ``open_anchor`` bounds the variable end (the largest upper limit that
    will be requested for a left-anchored chain, or the smallest lower
    limit for a right-anchored one).
    """
    weights = _weight_factory(model, spec)
    lo, hi = spec.lower, spec.upper
    n = spec.depth

    if math.isinf(lo) and math.isinf(hi):
        if n > 1:
            raise InvalidSpec(
                "doubly infinite brackets are supported at depth 1 only")
        decay_l = _edge_weight_decay(model, spec, "left")
        decay_r = _edge_weight_decay(model, spec, "right")
        cut_lo = _clip_overflow(weights, 0.0, _find_cut(weights[0], 0.0, -1, n, decay_l, cfg))
        cut_hi = _clip_overflow(weights, 0.0, _find_cut(weights[0], 0.0, +1, n, decay_r, cfg))
        fun = _run_chain(weights, model, cfg, cut_lo, cut_hi, from_right=False)
        return BracketChain(spec, model, cfg, fun, "upper", fun.fit_residual)

    if math.isinf(lo):
        anchor = hi if open_anchor is None else max(hi, open_anchor)
        if math.isinf(anchor):
            raise InvalidSpec("left-anchored chain needs a finite upper anchor")
        decay = _edge_weight_decay(model, spec, "left")
        cut = _clip_overflow(weights, anchor,
                             _find_cut(weights[0], anchor, -1, n, decay, cfg))
        fun = _run_chain(weights, model, cfg, cut, anchor, from_right=False)
        return BracketChain(spec, model, cfg, fun, "upper", fun.fit_residual)

    if math.isinf(hi):
        anchor = lo if open_anchor is None else min(lo, open_anchor)
        decay = _edge_weight_decay(model, spec, "right")
        cut = _clip_overflow(weights, anchor,
                             _find_cut(weights[-1], anchor, +1, n, decay, cfg))
        fun = _run_chain(weights, model, cfg, anchor, cut, from_right=True)
        return BracketChain(spec, model, cfg, fun, "lower", fun.fit_residual)

    top = hi if open_anchor is None else max(hi, open_anchor)
    fun = _run_chain(weights, model, cfg, lo, top, from_right=False)
    return BracketChain(spec, model, cfg, fun, "upper", fun.fit_residual)


def _run_chain(weights, model, cfg, lo, hi, from_right):
    """Sequential cumulative integration of the weight chain on [lo, hi]."""
    order = list(reversed(weights)) if from_right else list(weights)
    edges = _initial_edges(model, lo, hi)
    level_tol = cfg.rel_tol / (2.0 * max(1, len(weights)))
    prev: Optional[PiecewiseChebFun] = None
    err = 0.0
    for w in order:
        if prev is None:
            integrand = w
        else:
            integrand = (lambda z, w=w, p=prev: np.asarray(w(z)) * p(z))
        fit = build_chebfun(integrand, edges, rel_tol=level_tol,
                            abs_floor=cfg.abs_tol, max_depth=cfg.max_depth)
        err += fit.fit_residual
        prev = fit.antiderivative(from_right=from_right)
        edges = prev.edges
    prev.fit_residual = err + cfg.truncation_tail_tol
    return prev


def eval_bracket(spec: BracketSpec, model: PotentialModel,
                 cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Value of the n-fold ordered integral."""
    chain = build_chain(spec, model, cfg)
    z = spec.upper if chain.open_side == "upper" else spec.lower
    if math.isinf(z):
        z = chain.fun.hi if chain.open_side == "upper" else chain.fun.lo
    return float(chain(z))


def cumulative_bracket(spec: BracketSpec, model: PotentialModel,
                       grid, cfg: QuadratureConfig = QuadratureConfig()) -> np.ndarray:
    """The cumulative chain evaluated at every grid point.

    For a spec with lower = -infinity the grid supplies the upper limits,
    and symmetrically for upper = +infinity.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.zeros(0)
    if np.any(np.diff(grid) < 0):
        raise InvalidSpec("grid must be sorted ascending")
    if math.isinf(spec.upper) and not math.isinf(spec.lower):
        anchor = float(grid[0])
    else:
        anchor = float(grid[-1])
    chain = build_chain(spec, model, cfg, open_anchor=anchor)
    return np.asarray(chain(grid), dtype=float)

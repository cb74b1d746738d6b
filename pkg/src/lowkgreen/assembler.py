"""Assembly of the small-k Green function expansion.

The reflection-coefficient series at the two positions are combined through
the product representation of the Green function: the expansion of
S(x,k) - 1 at x and y feeds a square root, a reciprocal and an exponential
of integrated coefficients, all performed as truncated Laurent arithmetic
in (ik).  Order bookkeeping in the series type reproduces exactly which
orders the per-case inputs can support, so the achieved order never
overstates what the coefficient data is good for.

The case decides the ingredients: finite-limit sides contribute the
a-family, +infinity sides the b-family, -infinity sides the inverted
(gamma) series; the vanishing-potential route builds two auxiliary
potentials from the zero-energy solutions and runs the same machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ._quad import build_chebfun
from .brackets import BracketKind, BracketSpec, QuadratureConfig, eval_bracket
from .coeffgen import (
    CoefficientEvaluator,
    Side,
    a_terms,
    b_terms,
    btilde_terms,
    gamma_series,
)
from .errors import (
    BranchAmbiguity,
    ExceptionalCase,
    NegativeZeroMode,
    NoClosedForm,
    OrderExceedsValidity,
    ZeroLeadingCoefficient,
)
from .laurent import LaurentSeries, ls_exp, ls_invert, ls_mul, ls_sqrt, ls_log
from .potential import (
    CaseTag,
    Decay,
    EndpointClass,
    EndpointKind,
    PotentialModel,
    classification,
    max_valid_order,
    power_law,
)

#: sign of the leading Green-function coefficient in each case
_LEADING_SIGN = {
    CaseTag.I: +1, CaseTag.II: +1, CaseTag.III: -1,
    CaseTag.IV: -1, CaseTag.V: -1, CaseTag.VI: -1,
}

#: leading order of the Green-function series in each case
_G_MIN_ORDER = {
    CaseTag.I: -1, CaseTag.II: -1, CaseTag.III: 0,
    CaseTag.IV: -2, CaseTag.V: 0, CaseTag.VI: 0,
}


@dataclass
class ExpansionResult:
    case_tag: CaseTag
    x: float
    y: float
    N: int
    g: LaurentSeries
    s_x: LaurentSeries
    s_y: LaurentSeries
    q: Dict[int, float]
    diagnostics: dict = field(default_factory=dict)

    def truncated_sum(self, k, max_order=None) -> complex:
        top = self.N if max_order is None else min(max_order, self.N)
        ik = 1j * complex(k)
        acc = 0.0 + 0.0j
        for n in range(self.g.min_order, top + 1):
            acc += self.g.coeff_or_zero(n) * ik ** n
        return acc

    def to_json_dict(self):
        return {
            "case": self.case_tag.value,
            "x": self.x,
            "y": self.y,
            "order": self.N,
            "g": {str(n): self.g.coeff_or_zero(n).real
                  for n in range(self.g.min_order, self.N + 1)},
            "s_x": {str(n): self.s_x.coeff_or_zero(n).real
                    for n in range(self.s_x.min_order, self.s_x.trunc + 1)},
            "s_y": {str(n): self.s_y.coeff_or_zero(n).real
                    for n in range(self.s_y.min_order, self.s_y.trunc + 1)},
            "q": {str(n): v for n, v in sorted(self.q.items())},
            "diagnostics": self.diagnostics,
        }


def _needed_s_order(case: CaseTag, n_target: int) -> int:
    if case in (CaseTag.I, CaseTag.II):
        return n_target + 1
    if case is CaseTag.III:
        return max(n_target - 1, -1)
    if case is CaseTag.IV:
        m = n_target + 3
        return m if m % 2 == 1 else m + 1
    m = max(n_target - 1, -1)
    if m >= 1 and m % 2 == 0:
        m += 1
    return m


class _GammaField:
    """gamma_n as functions of position, from the odd reciprocal tables."""

    def __init__(self, ev: CoefficientEvaluator, side: Side, max_order: int):
        self.max_order = max_order
        m_top = max_order + 2
        if m_top % 2 == 0:
            m_top += 1
        self.m_top = m_top
        self.fns = {m: ev.coeff_fn(btilde_terms(m, side))
                    for m in range(1, m_top + 1, 2)}

    def at(self, z):
        """dict order -> ndarray of gamma_n over z (orders -1 .. max_order)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        vals = {m: fn(z) for m, fn in self.fns.items()}
        orders = range(-1, self.max_order + 1)
        out = {n: np.zeros_like(z) for n in orders}
        for i in range(z.size):
            coeffs = []
            for m in range(1, self.m_top + 2):
                coeffs.append(vals[m][i] if m % 2 == 1 else 0.0)
            series = LaurentSeries(1, coeffs, trunc=self.m_top + 1)
            g = gamma_series(series)
            for n in orders:
                out[n][i] = g.coeff_or_zero(n).real
        return out


class _SeriesEngine:
    """Per-case coefficient functions s_n(z) for one model on [lo, hi]."""

    def __init__(self, model: PotentialModel, case: CaseTag,
                 cfg: QuadratureConfig, lo: float, hi: float, s_top: int):
        self.model = model
        self.case = case
        self.cfg = cfg
        self.ev = CoefficientEvaluator(model, cfg, lo, hi)
        self.s_top = s_top
        self.parts = {}  # order -> list of callables
        self._gammas = {}
        self._build()

    def s_min(self) -> int:
        if self.case in (CaseTag.III, CaseTag.V, CaseTag.VI):
            return -1
        if self.case is CaseTag.IV:
            return 1
        return 0

    def _gamma(self, side: Side) -> _GammaField:
        if side not in self._gammas:
            self._gammas[side] = _GammaField(self.ev, side, self.s_top)
        return self._gammas[side]

    def _build(self):
        case, top = self.case, self.s_top
        for n in range(self.s_min(), top + 1):
            fns = []
            if case in (CaseTag.I, CaseTag.II) or \
               (case is CaseTag.III and n >= 0):
                fns.append(self.ev.coeff_fn(a_terms(n, Side.RIGHT)))
            if case is CaseTag.I:
                fns.append(self.ev.coeff_fn(a_terms(n, Side.LEFT)))
            if case in (CaseTag.II, CaseTag.IV) and n >= 1 and n % 2 == 1:
                fns.append(self.ev.coeff_fn(b_terms(n, Side.LEFT)))
            if case in (CaseTag.IV, CaseTag.V) and n >= 1 and n % 2 == 1:
                fns.append(self.ev.coeff_fn(b_terms(n, Side.RIGHT)))
            self.parts[n] = fns
        if case in (CaseTag.III, CaseTag.V, CaseTag.VI):
            self._gamma(Side.LEFT)
        if case is CaseTag.VI:
            self._gamma(Side.RIGHT)

    def s_values(self, z) -> Dict[int, np.ndarray]:
        """All coefficient functions evaluated on an array of positions."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = {n: np.zeros_like(z) for n in range(self.s_min(), self.s_top + 1)}
        for n, fns in self.parts.items():
            for fn in fns:
                out[n] = out[n] + fn(z)
        for side in self._gammas:
            gv = self._gammas[side].at(z)
            for n in range(-1, self.s_top + 1):
                if n == -1 or n % 2 == 1:
                    out[n] = out[n] + gv[n]
        return out

    def series_at(self, z: float) -> LaurentSeries:
        vals = self.s_values(np.array([float(z)]))
        lo = self.s_min()
        coeffs = [vals[n][0] for n in range(lo, self.s_top + 1)]
        trunc = self.s_top
        if self.case in (CaseTag.IV, CaseTag.V, CaseTag.VI):
            # the next even coefficient is identically zero
            coeffs.append(0.0)
            trunc += 1
        return LaurentSeries(lo, coeffs, trunc=trunc)

    def q_dict(self, y: float, x: float,
               exact: Optional[Dict[int, float]] = None) -> Dict[int, float]:
        """q_n = -integral_y^x s_{n-1} for every available order."""
        out = {} if exact is None else dict(exact)
        edges = [y, x] + [b for b in self.model.breakpoints if y < b < x]
        for n in range(self.s_min(), self.s_top + 1):
            m = n + 1
            if m in out:
                continue
            if self.case in (CaseTag.IV, CaseTag.V, CaseTag.VI) and n % 2 == 0 \
                    and n != -1:
                out[m] = 0.0
                continue
            if x == y:
                out[m] = 0.0
                continue
            fn = lambda z, n=n: self.s_values(z)[n]
            fit = build_chebfun(fn, edges, rel_tol=self.cfg.rel_tol,
                                abs_floor=self.cfg.abs_tol,
                                max_depth=self.cfg.max_depth)
            out[m] = -fit.integral()
        if self.case in (CaseTag.IV, CaseTag.V, CaseTag.VI):
            out[self.s_top + 2] = 0.0
        return out


def _q_series(q: Dict[int, float], trunc: int) -> LaurentSeries:
    lo = min(q)
    coeffs = [q.get(n, 0.0) for n in range(lo, trunc + 1)]
    return LaurentSeries(lo, coeffs, trunc=trunc)


def _assemble_g(sx: LaurentSeries, sy: LaurentSeries, qser: LaurentSeries,
                case: CaseTag) -> LaurentSeries:
    one_minus_sx = -sx
    one_minus_sy = -sy
    prod = ls_mul(one_minus_sx, one_minus_sy)
    root = ls_sqrt(prod, branch=1)
    denom = ls_mul(LaurentSeries.monomial(2.0, 1), root)
    g = ls_mul(ls_invert(denom), ls_exp(qser))
    lead = g.coeff(g.val) if g.val is not None else 0.0
    if abs(lead) < 1e-13:
        raise BranchAmbiguity("leading Green coefficient below tolerance")
    if (lead.real > 0) != (_LEADING_SIGN[case] > 0):
        g = -g
    return g


def s_series(model: PotentialModel, x: float, N: int,
             cfg: QuadratureConfig = QuadratureConfig()) -> LaurentSeries:
    """Coefficients of S(x,k) - 1 through order N at one position."""
    case, reflected = classification(model)
    if N > max_valid_order(model):
        raise OrderExceedsValidity(
            f"order {N} exceeds validity {max_valid_order(model)}")
    m = model
    if reflected:
        m = model.reflected()
        x = -x
    eng = _SeriesEngine(m, case, cfg, x, x, N)
    return eng.series_at(x)


def q_values(model: PotentialModel, x: float, y: float, N: int,
             cfg: QuadratureConfig = QuadratureConfig()) -> Dict[int, float]:
    """q_n(x, y) for n up to N + 1 (N is the coefficient order used)."""
    if x < y:
        x, y = y, x
    case, reflected = classification(model)
    m = model
    if reflected:
        m = model.reflected()
        x, y = -y, -x
    eng = _SeriesEngine(m, case, cfg, y, x, N)
    return eng.q_dict(y, x)


def green_series(model: PotentialModel, x: float, y: float, N: int,
                 cfg: QuadratureConfig = QuadratureConfig()) -> ExpansionResult:
    """Green-function expansion through order N via the series pipeline."""
    xo, yo = float(x), float(y)
    if x < y:
        x, y = y, x
    case, reflected = classification(model)
    validity = max_valid_order(model)
    if N > validity:
        raise OrderExceedsValidity(f"order {N} exceeds validity {validity}")
    if N < _G_MIN_ORDER[case]:
        raise OrderExceedsValidity(
            f"order {N} below the leading order {_G_MIN_ORDER[case]}")
    m = model
    if reflected:
        m = model.reflected()
        x, y = -y, -x
    s_top = _needed_s_order(case, N)
    eng = _SeriesEngine(m, case, cfg, y, x, s_top)
    sx = eng.series_at(x)
    sy = eng.series_at(y)
    q = eng.q_dict(y, x)
    qser = _q_series(q, max(q) if q else 0)
    g = _assemble_g(sx, sy, qser, case)
    imag_worst = max(g.max_imag(), sx.max_imag(), sy.max_imag())
    g = g.real_part_series()
    parity_worst = 0.0
    if case in (CaseTag.IV, CaseTag.V, CaseTag.VI):
        scale = max(abs(g.coeff_or_zero(n)) for n in range(g.min_order, g.trunc + 1))
        for n in range(g.min_order, g.trunc + 1):
            if (n - g.min_order) % 2 == 1:
                parity_worst = max(parity_worst, abs(g.coeff_or_zero(n)) / scale)
    achieved = min(N, g.trunc)
    return ExpansionResult(
        case_tag=case, x=xo, y=yo, N=achieved,
        g=g.truncated(achieved), s_x=sx, s_y=sy,
        q={n: float(v) for n, v in q.items()},
        diagnostics={
            "validity": validity if validity != math.inf else "unbounded",
            "reflected": reflected,
            "max_imag": imag_worst,
            "odd_parity_residual": parity_worst,
            "s_order_used": s_top,
        },
    )


# -- printed closed forms -------------------------------------------------------


def _limits(model):
    v1 = model.left.limit_value if model.left else None
    v2 = model.right.limit_value if model.right else None
    return v1, v2


def closed_form_g(model: PotentialModel, x: float, y: float,
                  case_tag: CaseTag, which: int,
                  cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Direct evaluation of a printed closed-form coefficient.

    Only the (case, order) pairs with a printed form exist; everything else
    raises NoClosedForm.  Serves as the cross-check oracle for the series
    assembler.
    """
    if x < y:
        x, y = y, x
    inf = math.inf
    pref = float(np.exp(-0.5 * (model.V(x) + model.V(y))))
    v1, v2 = _limits(model)

    def plain(signs, lo, hi):
        return eval_bracket(BracketSpec(BracketKind.PLAIN, signs, lo, hi),
                            model, cfg)

    def angle_l(signs, hi):
        return eval_bracket(BracketSpec(BracketKind.ANGLE_LEFT, signs, -inf, hi),
                            model, cfg)

    def angle_r(signs, lo):
        return eval_bracket(BracketSpec(BracketKind.ANGLE_RIGHT, signs, lo, inf),
                            model, cfg)

    key = (case_tag, which)
    if key == (CaseTag.I, -1):
        return pref / (np.exp(-v1) + np.exp(-v2))
    if key == (CaseTag.I, 0):
        s = (angle_l((-1,), x) + angle_r((-1,), x)
             + angle_l((-1,), y) + angle_r((-1,), y))
        return pref / 2 * (s / (np.exp(-v1) + np.exp(-v2)) ** 2
                           + plain((1,), y, x))
    if key == (CaseTag.II, -1):
        return pref * np.exp(v1)
    if key == (CaseTag.II, 0):
        s = (angle_l((-1,), x) + plain((-1,), x, inf)
             + angle_l((-1,), y) + plain((-1,), y, inf))
        return pref / 2 * (np.exp(2 * v1) * s + plain((1,), y, x))
    if key == (CaseTag.III, 0):
        return -pref * plain((1,), x, inf)
    if key == (CaseTag.III, 1):
        return -pref * np.exp(-v1) * plain((1,), x, inf) * plain((1,), y, inf)
    if key == (CaseTag.IV, -2):
        return -pref / plain((-1,), -inf, inf)
    if key == (CaseTag.IV, 0):
        tot = plain((-1,), -inf, inf)
        s = (plain((-1, -1, 1), -inf, x) + plain((1, -1, -1), x, inf)
             + plain((-1, -1, 1), -inf, y) + plain((1, -1, -1), y, inf))
        return pref * (-s / tot ** 2 + plain((1,), y, x) / 2)
    if key == (CaseTag.V, 0):
        return -pref * plain((1,), x, inf)
    if key == (CaseTag.V, 2):
        ipx = plain((1,), x, inf)
        return pref * ((plain((-1,), -inf, x) * ipx
                        + plain((-1,), -inf, y) * plain((1,), y, x)
                        + plain((-1, 1), y, x)) * ipx
                       + 2 * plain((-1, 1, 1), x, inf))
    if key == (CaseTag.VI, 0):
        return (-pref * plain((1,), -inf, y) * plain((1,), x, inf)
                / plain((1,), -inf, inf))
    raise NoClosedForm(f"no printed closed form for case {case_tag.value}, "
                       f"order {which}")


# -- vanishing-potential route -----------------------------------------------------


def _aux_model(name, psi, breakpoints, side_of_one):
    """Fokker-Planck potential -2*log(psi) built from a zero-energy solution."""

    def V(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        for i, zz in enumerate(z):
            v = psi(zz)
            if v <= 0:
                raise NegativeZeroMode(
                    f"zero-energy solution is not positive at z={zz:g}")
            out[i] = -2.0 * math.log(v)
        return out

    def f(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        for i, zz in enumerate(z):
            v, dv = psi.value_and_slope(zz)
            out[i] = dv / v
        return out

    if side_of_one == "left":
        left = EndpointClass(EndpointKind.FINITE_LIMIT,
                             Decay("exponential"), 0.0)
        right = EndpointClass(EndpointKind.MINUS_INFINITY, power_law(2.0))
    else:
        left = EndpointClass(EndpointKind.MINUS_INFINITY, power_law(2.0))
        right = EndpointClass(EndpointKind.FINITE_LIMIT,
                              Decay("exponential"), 0.0)
    return PotentialModel(id=name, left=left, right=right, eval_V=V, eval_f=f,
                          discontinuities=breakpoints)


def generic_expansion(model: PotentialModel, x: float, y: float, N: int,
                      cfg: QuadratureConfig = QuadratureConfig(),
                      solver_cfg=None) -> ExpansionResult:
    """Expansion for V_S vanishing at both ends, via zero-energy solutions.

    The two solutions normalized at the two infinities define a pair of
    auxiliary potentials; the right-going family is evaluated on one and
    the left-going family on the other, which keeps every coefficient
    finite to all orders the underlying decay supports.
    """
    from .oracle import SolverConfig, zero_energy_modes

    xo, yo = float(x), float(y)
    if x < y:
        x, y = y, x
    scfg = solver_cfg if solver_cfg is not None else SolverConfig()
    psi_m, psi_p, wr = zero_energy_modes(model, scfg)
    mid = 0.5 * (x + y)
    vm, dm = psi_m.value_and_slope(mid)
    vp, dp = psi_p.value_and_slope(mid)
    scale = abs(vm * dp) + abs(dm * vp) + abs(vm * vp)
    if abs(wr) < 1e-8 * scale:
        raise ExceptionalCase(
            "zero-energy solutions are proportional; use the finite-limit "
            "route on the -2*log(psi) potential")

    disc = tuple(model.discontinuities)
    m_minus = _aux_model(model.id + "+down", psi_m, disc, "left")
    m_plus = _aux_model(model.id + "+up", psi_p, disc, "right")

    def s_minus_one(z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty_like(z)
        for i, zz in enumerate(z):
            out[i] = -0.5 * wr / (psi_m(zz) * psi_p(zz))
        return out

    s_top = max(N - 1, 0)
    eng_r = CoefficientEvaluator(m_minus, cfg, y, x)
    eng_l = CoefficientEvaluator(m_plus, cfg, y, x)
    fns = {-1: s_minus_one}
    for n in range(0, s_top + 1):
        fr = eng_r.coeff_fn(a_terms(n, Side.RIGHT))
        fl = eng_l.coeff_fn(a_terms(n, Side.LEFT))
        fns[n] = (lambda z, fr=fr, fl=fl: fr(z) + fl(z))

    def series_at(z):
        coeffs = [float(fns[n](np.array([z]))[0]) for n in range(-1, s_top + 1)]
        return LaurentSeries(-1, coeffs, trunc=s_top)

    sx = series_at(x)
    sy = series_at(y)
    # q0 has the closed form from integrating the slopes of the log-solutions
    q0 = 0.25 * float((m_minus.V(x) - m_minus.V(y)
                       - m_plus.V(x) + m_plus.V(y))[0])
    q = {0: q0}
    edges = [y, x] + [b for b in model.breakpoints if y < b < x]
    for n in range(0, s_top + 1):
        fit = build_chebfun(fns[n], edges, rel_tol=cfg.rel_tol,
                            abs_floor=cfg.abs_tol, max_depth=cfg.max_depth)
        q[n + 1] = -fit.integral()
    qser = _q_series(q, max(q))
    g = _assemble_g(sx, sy, qser, CaseTag.III)
    imag_worst = g.max_imag()
    g = g.real_part_series()
    achieved = min(N, g.trunc)

    # the printed order-0/1 forms in terms of the zero-energy data
    vmx, dmx = psi_m.value_and_slope(x)
    vpx, dpx = psi_p.value_and_slope(x)
    vmy, dmy = psi_m.value_and_slope(y)
    vpy, dpy = psi_p.value_and_slope(y)
    fmx, fpx = dmx / vmx, dpx / vpx
    fmy, fpy = dmy / vmy, dpy / vpy
    g0_ref = -math.exp(0.25 * (-2 * math.log(vmx) + 2 * math.log(vpx)
                               + 2 * math.log(vmy) - 2 * math.log(vpy))) \
        / math.sqrt((fmx - fpx) * (fmy - fpy))
    diag = {
        "route": "generic",
        "wronskian": wr,
        "max_imag": imag_worst,
        "g0_closed_residual": abs(g.coeff_or_zero(0).real / g0_ref - 1.0),
    }
    if achieved >= 1:
        evm = lambda z: float(m_minus.V(np.array([z]))[0])
        evp = lambda z: float(m_plus.V(np.array([z]))[0])
        fit = build_chebfun(
            lambda z: np.exp(m_minus.V(z)) + np.exp(m_plus.V(z)),
            edges, rel_tol=cfg.rel_tol, abs_floor=cfg.abs_tol)
        integ = fit.integral()
        g1_ref = 0.5 * (integ
                        + (math.exp(evm(x)) + math.exp(evp(x))) / (fmx - fpx)
                        + (math.exp(evm(y)) + math.exp(evp(y))) / (fmy - fpy)) \
            * g0_ref
        diag["g1_closed_residual"] = abs(g.coeff_or_zero(1).real / g1_ref - 1.0)
    return ExpansionResult(
        case_tag=CaseTag.III, x=xo, y=yo, N=achieved,
        g=g.truncated(achieved), s_x=sx, s_y=sy,
        q={n: float(v) for n, v in q.items()}, diagnostics=diag)


# -- derived outputs ------------------------------------------------------------


def log_form(result: ExpansionResult):
    """Coefficients p_1.. of the exponent representation of the expansion."""
    g = result.g
    if g.val is None or abs(g.coeff(g.val)) < 1e-13:
        raise ZeroLeadingCoefficient("leading Green coefficient vanishes")
    p = ls_log(g)
    return [p.coeff_or_zero(m).real for m in range(1, p.trunc + 1)]


def pole_resummed(g_m2: float, g_0: float, g_2: float, k) -> complex:
    """Rational resummation reproducing the nearest pole pair from the
    order-0 and order-2 coefficients."""
    if g_0 == 0:
        raise ZeroLeadingCoefficient("order-0 coefficient must be nonzero")
    ik = 1j * complex(k)
    denom = 1.0 - ik * ik * (g_2 / g_0)
    if denom == 0:
        raise ZeroDivisionError("evaluation at the induced pole")
    return g_m2 / (ik * ik) + g_0 / denom

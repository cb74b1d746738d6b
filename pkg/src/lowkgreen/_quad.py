"""Piecewise Chebyshev representation with adaptive panel refinement.

Functions are fit panel-by-panel at Chebyshev-Lobatto nodes; a panel is
split when the trailing Chebyshev coefficients fail to fall below the
requested tolerance relative to the panel scale.  Antiderivatives of the
interpolant are exact and evaluable anywhere, which is what lets nested
ordered integrals be computed one cumulative pass at a time.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .errors import ToleranceNotMet

DEGREE = 16
# Lobatto nodes cos(pi*j/n), j = 0..n (descending 1 -> -1)
_NODES = np.cos(np.pi * np.arange(DEGREE + 1) / DEGREE)


def cheb_coeffs(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients from values at the Lobatto nodes (DCT-I)."""
    n = len(values) - 1
    ext = np.concatenate([values, values[-2:0:-1]])
    c = np.fft.rfft(ext).real / n
    c[0] *= 0.5
    c[n] *= 0.5
    return c[: n + 1]


def _panel_integral(coef: np.ndarray, width: float) -> float:
    k = np.arange(0, len(coef), 2)
    return 0.5 * width * float(np.sum(2.0 * coef[k] / (1.0 - k * k)))


class PiecewiseChebFun:
    """A function stored as Chebyshev coefficients on contiguous panels."""

    def __init__(self, edges, coef_list):
        self.edges = np.asarray(edges, dtype=float)
        self.coefs = list(coef_list)
        self.fit_residual = 0.0

    @property
    def lo(self):
        return self.edges[0]

    @property
    def hi(self):
        return self.edges[-1]

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        # constant extension outside the domain
        zc = np.clip(zz, self.lo, self.hi)
        idx = np.clip(np.searchsorted(self.edges, zc, side="right") - 1,
                      0, len(self.coefs) - 1)
        out = np.empty_like(zc)
        for i in np.unique(idx):
            sel = idx == i
            a, b = self.edges[i], self.edges[i + 1]
            t = (2.0 * zc[sel] - a - b) / (b - a)
            out[sel] = _cheb.chebval(t, self.coefs[i])
        return float(out[0]) if scalar else out

    def antiderivative(self, from_right: bool = False) -> "PiecewiseChebFun":
        """Cumulative integral vanishing at the left (or right) domain end.

        Offsets are accumulated from the anchored end so that values near it
        stay accurate relative to the local scale (no global cancellation).
        """
        widths = np.diff(self.edges)
        locals_ = []
        panel_totals = []
        for coef, w in zip(self.coefs, widths):
            ic = _cheb.chebint(coef) * (0.5 * w)
            edge = -1.0 if not from_right else 1.0
            base = _cheb.chebval(edge, ic)
            jc = ic if not from_right else -ic
            jc = jc.copy()
            jc[0] -= _cheb.chebval(edge, jc)
            locals_.append(jc)
            panel_totals.append(_cheb.chebval(1.0, ic) - base
                                if not from_right else base - _cheb.chebval(-1.0, ic))
        panel_totals = np.asarray(panel_totals)
        if not from_right:
            offsets = np.concatenate([[0.0], np.cumsum(panel_totals)])[:-1]
        else:
            offsets = np.concatenate([np.cumsum(panel_totals[::-1])[::-1], [0.0]])[1:]
        out = []
        for jc, off in zip(locals_, offsets):
            kc = jc.copy()
            kc[0] += off
            out.append(kc)
        return PiecewiseChebFun(self.edges, out)

    def integral(self) -> float:
        return float(sum(_panel_integral(c, w)
                         for c, w in zip(self.coefs, np.diff(self.edges))))

    def scale(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.coefs), default=0.0)


def build_chebfun(f, edges, rel_tol=1e-12, abs_floor=0.0, max_depth=40) -> PiecewiseChebFun:
    """Adaptively fit ``f`` on [edges[0], edges[-1]] with mandatory breakpoints.

    ``abs_floor`` is the magnitude below which a panel counts as zero.
    Panels that fail to converge are tolerated if, after the whole domain is
    fitted, their residual is negligible against the global scale (this is
    what rounding noise near breakpoints and deep tails looks like).
    """
    edges = np.asarray(sorted(set(float(e) for e in edges)), dtype=float)
    if len(edges) < 2:
        raise ValueError("need at least two edges")
    out_edges = [edges[0]]
    out_coefs = []
    unconverged = []

    def fit(a, b, depth, prev_tail, stalls):
        x = 0.5 * (a + b) + 0.5 * (b - a) * _NODES
        vals = np.asarray(f(x), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ToleranceNotMet(
                f"integrand is not finite on [{a:g}, {b:g}] "
                "(weight overflow; tail cut too deep?)")
        coef = cheb_coeffs(vals)
        scale = float(np.max(np.abs(coef)))
        tail = float(np.max(np.abs(coef[-2:])))
        degenerate = (b - a) <= 1e-14 * max(1.0, abs(a), abs(b))
        ok = tail <= rel_tol * scale or degenerate
        if ok and not degenerate and scale > 0.0:
            # guard against deceptive node agreement
            tprobe = np.array([-0.5219, 0.3874])
            zprobe = 0.5 * (a + b) + 0.5 * (b - a) * tprobe
            resid = float(np.max(np.abs(np.asarray(f(zprobe), dtype=float)
                                        - _cheb.chebval(tprobe, coef))))
            ok = resid <= 10.0 * rel_tol * scale
            tail = max(tail, resid / 10.0)
        # rounding noise does not improve under subdivision while smooth
        # structure improves spectrally, so a tail that shrinks by less than
        # a factor of ~3 per split has hit the double-precision floor of the
        # sampled values
        stalls = stalls + 1 if tail > 0.3 * prev_tail else 0
        if ok or depth >= max_depth or stalls >= 2:
            if not ok:
                unconverged.append(tail)
            out_edges.append(b)
            out_coefs.append(coef)
            return
        mid = 0.5 * (a + b)
        fit(a, mid, depth + 1, tail, stalls)
        fit(mid, b, depth + 1, tail, stalls)

    for a, b in zip(edges[:-1], edges[1:]):
        fit(a, b, 0, math.inf, 0)
    fun = PiecewiseChebFun(out_edges, out_coefs)
    fun.fit_residual = rel_tol
    if unconverged:
        global_scale = max(fun.scale(), abs_floor)
        worst = max(unconverged) / global_scale
        if worst > 1e3 * rel_tol:
            raise ToleranceNotMet(
                f"panel refinement hit max depth with residual {worst:.2e}")
        fun.fit_residual = max(rel_tol, worst)
    return fun

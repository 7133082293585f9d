"""Integration geometry shared by the force and decoherence terms.

Two structures recur in every term.

*Light-cone region.*  ``zeta_2d(k1, k2) >= 0`` is the ellipse
``(1 - v^2)(k1 - c)^2 + k2^2 <= R^2`` with ``R = w/sqrt(1 - v^2)`` and
``c = -w v/(1 - v^2)``.  On it ``u = k1 v - w`` is negative, so of the two
principal-value poles ``u = +/-O`` only ``u = -O``, i.e. ``k1 = (w - O)/v``,
can fall inside.  It does so exactly when the window below is open.

*Window.*  ``zeta_-(k2) > 0`` on ``|k2| < k*`` with ``k* = sqrt(vartheta)/v``,
nonempty iff ``v O > |w - O|``.  Terms with ``1/zeta_-`` are log-divergent at
``k*`` from either side.  Each side is reported as a Hadamard finite part
with unit momentum scale; an inside part and an outside part with matching
residues add up to the principal value, which is what the physical sums need.
Both sides are integrated in ``s = sqrt(|k2 - k*|)``, which also absorbs the
``1/sqrt(zeta_-)`` endpoint behaviour.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from .kernels import zeta_2d
from .quadrature import (
    PVPole,
    QuadratureResult,
    Region,
    integrate_1d,
    integrate_2d_region,
    integrate_oscillatory,
    integrate_semi_infinite,
    oscillation_panels,
    principal_value_1d,
)

log = logging.getLogger(__name__)

POLE_WARN = 1e-6       # pole within this fraction of the slice width from its end


def window_half_width(p):
    """``k*`` if the window ``zeta_-(k2) > 0`` is nonempty, else ``None``."""
    # factored so that neither cancellation nor underflow of v^2 O^2 closes it
    vo, d = p.v * p.o_tilde, abs(p.w_tilde - p.o_tilde)
    if p.v == 0 or not vo > d:
        return None
    return math.sqrt(vo - d) * math.sqrt(vo + d) / p.v


def light_cone_geometry(p):
    """Return ``(c, R, s)`` with slice half-width ``h(k2) = sqrt(R^2 - k2^2)/s``."""
    g = 1.0 - p.v * p.v
    return -p.w_tilde * p.v / g, p.w_tilde / math.sqrt(g), math.sqrt(g)


def light_cone_region(p):
    c, R, s = light_cone_geometry(p)

    def slices(k2):
        r2 = R * R - k2 * k2
        if r2 <= 0:
            return []
        h = math.sqrt(r2) / s
        return [(c - h, c + h)]

    return Region(
        boundary=lambda k1, k2: zeta_2d(k1, k2, p),
        bbox=(c - R / s, c + R / s, -R, R),
        slices=slices,
    )


def _sinc(z):
    return np.sinc(z / math.pi)


def region_pv_integral(p, weight, tol):
    """``int dk2 PV int dk1 W(k1, k2) / (k1 v - w + O)`` over the light cone.

    ``weight(t, k1, k2, h)`` must return ``W * dk1/dt`` for the slice map
    ``k1 = c + h sin t``, i.e. already multiplied by ``h cos t``.  This lets
    integrands carrying ``1/sqrt(zeta_2d)`` cancel the vanishing Jacobian
    analytically.
    """
    v, w, o = p.v, p.w_tilde, p.o_tilde
    kp = (w - o) / v if v > 0 else None
    flags = set()

    def inner(k2, lo, hi, itol):
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pole_t = None
        if kp is not None and lo < kp < hi:
            # atan2 keeps sin(t0) exact when the pole is close to a slice end
            pole_t = math.atan2(kp - c, math.sqrt((hi - kp) * (kp - lo)))
            if min(kp - lo, hi - kp) < POLE_WARN * (hi - lo):
                flags.add("pv_pole_near_branch_point")
        elif kp is not None and (kp == lo or kp == hi):
            log.info("PV pole meets the slice end at k2=%.17g", k2)
            flags.add("pv_pole_at_branch_point")

        if pole_t is None:
            def integrand(t):
                k1 = c + h * np.sin(t)
                return weight(t, k1, k2, h) / (k1 * v - w + o)
            return integrate_1d(integrand, -math.pi / 2, math.pi / 2, itol)

        t0 = pole_t

        def numerator(t):
            # (t - t0)/(sin t - sin t0) without cancellation
            k1 = c + h * np.sin(t)
            ratio = 1.0 / (np.cos(0.5 * (t + t0)) * _sinc(0.5 * (t - t0)))
            return weight(t, k1, k2, h) * ratio / (v * h)

        return principal_value_1d(numerator, PVPole(t0), -math.pi / 2, math.pi / 2, itol)

    ks = window_half_width(p)
    bps = (-ks, ks) if ks is not None else ()
    res = integrate_2d_region(None, light_cone_region(p), tol, inner=inner, breakpoints=bps)
    if flags:
        res = QuadratureResult(res.value, res.abs_error_estimate, res.evaluations,
                               res.converged, tuple(sorted(set(res.flags) | flags)))
    return res


def inside_window_integral(p, smooth, osc, singular, tol):
    """``int_0^{k*} dk2`` of ``smooth + osc*cos(phase) + singular/zeta_-``.

    The caller passes functions of ``s = sqrt(k* - k2)`` that already include
    the Jacobian ``2 s``:

    * ``smooth(s)``: non-oscillating part,
    * ``osc(s)``: amplitude multiplying ``cos(2 sqrt(zeta_-)/v)``,
    * ``singular(s)``: ``G(s)`` such that the ``1/zeta_-`` term is ``G(s)/s``,
      with ``G`` already containing its own ``cos`` factor.

    The ``G/s`` piece is a finite part with unit scale.
    """
    ks = window_half_width(p)
    if ks is None:
        return QuadratureResult.exact(0.0)
    S = math.sqrt(ks)
    v = p.v

    def phase(s):
        return 2.0 * s * np.sqrt(2.0 * ks - s * s)

    parts = []
    part_tol = tol.scaled(1.0 / 3.0)
    if smooth is not None:
        parts.append(integrate_1d(smooth, 0.0, S, part_tol))
    if osc is not None:
        parts.append(integrate_oscillatory(osc, phase, 0.0, S, part_tol))
    offset = 0.0
    if singular is not None:
        g0 = float(singular(np.array([0.0]))[0])

        def subtracted(s):
            return (singular(s) - g0) / s

        edges = oscillation_panels(phase, 0.0, S)
        parts.append(integrate_1d(subtracted, 0.0, S, part_tol, breakpoints=edges[1:-1]))
        offset = g0 * math.log(S)
    del v
    return QuadratureResult.total(parts, offset)


def outside_window_integral(p, regular, singular, tol):
    """``int_{k*}^inf dk2`` of a term behaving like ``1/zeta_-`` at ``k*``.

    ``singular(s)`` is ``G(s)`` with the term equal to ``G(s)/s`` in
    ``s = sqrt(k2 - k*)`` (Jacobian included); it must decay at least like
    ``exp(-s^2)``.  ``regular(k2)`` is an optional smooth companion term
    integrated over ``[k*, inf)`` in ``k2`` directly.
    """
    ks = window_half_width(p)
    if ks is None:
        raise ValueError("outside_window_integral needs an open window")
    parts = []
    part_tol = tol.scaled(0.25)
    g0 = float(singular(np.array([0.0]))[0])
    parts.append(integrate_1d(lambda s: (singular(s) - g0) / s, 0.0, 1.0, part_tol))
    parts.append(integrate_semi_infinite(lambda s: singular(s) / s, 1.0, 0.25, part_tol))
    if regular is not None:
        parts.append(integrate_semi_infinite(regular, ks, 0.5, part_tol))
    return QuadratureResult.total(parts)

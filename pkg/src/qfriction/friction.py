"""Frictional force on the moving particle.

The force is ``-A (w-O)/(4 w O) F1 - A/(4 w sqrt(1-v^2)) F2 - A/(16 w O) F3``
with ``A = a^2 lambda^2 g^2``:

* ``F1`` lives on the window ``zeta_-(k2) > 0`` and is empty unless
  ``w/(1+v) < O < w/(1-v)``,
* ``F2`` is a principal-value integral over the light cone and carries one
  thermal occupation, so it vanishes at zero temperature,
* ``F3`` collects two exponentially suppressed tails; its ``zeta_+`` part is
  the only contribution left at zero temperature.
"""
from __future__ import annotations

import dataclasses
import functools
import logging
import math

import numpy as np

from . import __version__
from .integrands import (
    inside_window_integral,
    outside_window_integral,
    region_pv_integral,
    window_half_width,
)
from .kernels import bose_occupation, vartheta
from .quadrature import DEFAULT_TOLERANCE, QuadratureResult, integrate_semi_infinite
from .sweep import SweepTable, parallel_map

log = logging.getLogger(__name__)

__all__ = [
    "ForceBreakdown",
    "f1_window_is_open",
    "force_term_f1",
    "force_term_f2",
    "force_term_f3",
    "force_term_f3_plus",
    "friction_force",
    "velocity_sweep",
    "exp_lorentzian_tail",
]

WINDOW_EDGE_DIVERGENCE = "window_edge_divergence"


def f1_window_is_open(p):
    """Whether ``zeta_-(k2) > 0`` somewhere, and the open ``k2`` interval.

    Returns
    -------
    (bool, tuple or None)
        ``(True, (-k*, k*))`` when ``v O > |w - O|``, else ``(False, None)``.
    """
    ks = window_half_width(p)
    if ks is None:
        return False, None
    return True, (-ks, ks)


def _occupations(p):
    return bose_occupation(p.w_tilde, p.beta), bose_occupation(p.o_tilde, p.beta)


def exp_lorentzian_tail(v, q, tol=None):
    """``int_0^inf exp(-(2/v) sqrt(v^2 k^2 + q^2)) / (v^2 k^2 + q^2) dk``.

    With ``k = (q/v) sinh y`` this is
    ``1/(q v) * int_0^inf exp(-z cosh y)/cosh y dy`` with ``z = 2q/v``,
    smooth and double-exponentially decaying for any ``q > 0``.
    """
    tol = tol or DEFAULT_TOLERANCE
    if not q > 0:
        raise ValueError("exp_lorentzian_tail needs q > 0")
    z = 2.0 * q / v
    if z > 700.0:
        return QuadratureResult.exact(0.0, ("underflow",))
    scale = min(1.0, 1.0 / math.sqrt(z))

    def f(y):
        c = np.cosh(y)
        return np.exp(-z * (c - 1.0)) / c

    # exp(-z) factored out so the integrand is O(1) at y = 0
    r = integrate_semi_infinite(f, 0.0, scale, tol)
    return r.scaled(math.exp(-z) / (q * v))


def force_term_f1(p, tol=None):
    """Oscillatory window term ``F1``.

    Zero when the window is closed or at zero temperature.  When it is open,
    the ``cos(2 sqrt(zeta_-)/v)/zeta_-`` piece is log-divergent at the window
    edge; it is returned as a unit-scale finite part whose divergence cancels
    against the matching part of :func:`force_term_f3` in the total force.
    """
    tol = tol or DEFAULT_TOLERANCE
    ks = window_half_width(p)
    if ks is None or p.zero_temperature:
        return QuadratureResult.exact(0.0)
    v = p.v
    th = vartheta(p)
    nw, no = _occupations(p)
    a_coef = 4 * no**3 + no**2
    b_coef = no * (4 * no + 2) - nw
    c_coef = 0.25 * (no - nw)
    sq_th = math.sqrt(th)

    def m(s):
        return np.sqrt(2.0 * ks - s * s)

    def smooth(s):
        # cos^2 = (1 + cos)/2 split; the 2 s Jacobian cancels the 1/2
        return s * a_coef / th + b_coef / (v * m(s) * sq_th)

    def singular(s):
        mm = m(s)
        return -2.0 * c_coef * np.cos(2.0 * s * mm) / (v * v * mm * mm)

    r = inside_window_integral(p, smooth, smooth, singular, tol).scaled(1.0 / math.pi)
    return dataclasses.replace(r, flags=r.flags + ("finite_part",))


def _f2_weight(p):
    v, w, o, beta = p.v, p.w_tilde, p.o_tilde, p.beta
    g = math.sqrt(1.0 - v * v)

    def weight(t, k1, k2, h):
        u = k1 * v - w
        z1 = v * v * (u * u - k1 * k1) + w * w
        n = bose_occupation(-u, beta)
        # sin(2 sqrt(zeta))/sqrt(zeta) * dk1/dt, with sqrt(zeta) = g h cos t
        s = np.sin(2.0 * g * h * np.cos(t)) / g
        return k1 * n / (u - o) * s / np.sqrt(z1)

    return weight


def force_term_f2(p, tol=None):
    """Principal-value light-cone term ``F2``; exact 0 at ``v = 0`` or ``T = 0``."""
    tol = tol or DEFAULT_TOLERANCE
    if p.v == 0 or p.zero_temperature:
        return QuadratureResult.exact(0.0)
    r = region_pv_integral(p, _f2_weight(p), tol)
    return r.scaled(1.0 / (2 * math.pi))


def _tail_minus(p, tol):
    """``int_0^inf theta(-zeta_-) exp(-(2/v) sqrt(-zeta_-))/zeta_- dk2``.

    A unit-scale finite part when the window is open.
    """
    v = p.v
    ks = window_half_width(p)
    if ks is None:
        th = vartheta(p)
        if th == 0:
            return QuadratureResult(math.nan, math.inf, 0, False, (WINDOW_EDGE_DIVERGENCE,))
        return exp_lorentzian_tail(v, math.sqrt(-th), tol).scaled(-1.0)

    def singular(s):
        mm2 = 2.0 * ks + s * s
        return -2.0 * np.exp(-2.0 * s * np.sqrt(mm2)) / (v * v * mm2)

    r = outside_window_integral(p, None, singular, tol)
    return dataclasses.replace(r, flags=r.flags + ("finite_part",))


def _tail_plus(p, tol):
    q = math.sqrt((p.w_tilde + p.o_tilde) ** 2 - (p.v * p.o_tilde) ** 2)
    return exp_lorentzian_tail(p.v, q, tol).scaled(-1.0)


def force_term_f3(p, tol=None):
    """Exponential-tail term ``F3`` over all ``k2`` (even integrand, doubled)."""
    tol = tol or DEFAULT_TOLERANCE
    if p.v == 0:
        return QuadratureResult.exact(0.0)
    w, o = p.w_tilde, p.o_tilde
    nw, no = _occupations(p)
    parts = []
    sub = tol.scaled(0.5)
    plus = _tail_plus(p, sub).scaled(-(w + o) * (no + nw + 1.0) / math.pi)
    parts.append(plus)
    cm = (w - o) * (no - nw)
    if cm != 0:
        parts.append(_tail_minus(p, sub).scaled(-cm / math.pi))
    return QuadratureResult.total(parts)


def force_term_f3_plus(p, tol=None):
    """Occupation-free ``zeta_+`` part of ``F3``, the whole ``F3`` at ``T = 0``."""
    tol = tol or DEFAULT_TOLERANCE
    if p.v == 0:
        return QuadratureResult.exact(0.0)
    w, o = p.w_tilde, p.o_tilde
    return _tail_plus(p, tol).scaled(-(w + o) / math.pi)


@dataclasses.dataclass(frozen=True)
class ForceBreakdown:
    """Force terms with their prefactors.

    ``total`` is in natural units with ``a^2 lambda^2 g^2`` applied;
    :attr:`bracket` is the same combination with that factor set to one.
    """

    f1: float
    f2: float
    f3: float
    f1_prefactor: float
    f2_prefactor: float
    f3_prefactor: float
    total: float
    error_estimate: float
    converged: bool
    coupling: float
    unit_prefactors: tuple
    bracket_error: float = 0.0
    flags: tuple = ()
    mode: str = "full"

    @property
    def bracket(self):
        u1, u2, u3 = self.unit_prefactors
        return u1 * self.f1 + u2 * self.f2 + u3 * self.f3


def _unit_prefactors(p):
    w, o, v = p.w_tilde, p.o_tilde, p.v
    return (
        -(w - o) / (4.0 * w * o),
        -1.0 / (4.0 * w * math.sqrt(1.0 - v * v)),
        -1.0 / (16.0 * w * o),
    )


def friction_force(p, tol=None, mode="full"):
    """Assemble the force.

    Parameters
    ----------
    p : ModelParams
    tol : Tolerance, optional
        Per-term target.
    mode : {"full", "nonrelativistic"}
        ``"nonrelativistic"`` leaves out the window term (``f1`` is reported
        as 0).

    Returns
    -------
    ForceBreakdown
    """
    if mode not in ("full", "nonrelativistic"):
        raise ValueError(f"mode must be 'full' or 'nonrelativistic', got {mode!r}")
    tol = tol or DEFAULT_TOLERANCE
    coupling = p.a**2 * p.lambda_c**2 * p.g_c**2
    units = _unit_prefactors(p)
    pf = tuple(coupling * u for u in units)
    if mode == "full":
        r1 = force_term_f1(p, tol)
    else:
        r1 = QuadratureResult.exact(0.0)
    r2 = force_term_f2(p, tol)
    r3 = force_term_f3(p, tol)
    terms = (r1, r2, r3)
    # + 0.0 turns a signed zero into 0
    total = pf[0] * r1.value + pf[1] * r2.value + pf[2] * r3.value + 0.0
    err = math.fsum(abs(c) * r.abs_error_estimate for c, r in zip(pf, terms))
    berr = math.fsum(abs(c) * r.abs_error_estimate for c, r in zip(units, terms))
    flags = tuple(dict.fromkeys(f for r in terms for f in r.flags))
    return ForceBreakdown(
        f1=r1.value, f2=r2.value, f3=r3.value,
        f1_prefactor=pf[0], f2_prefactor=pf[1], f3_prefactor=pf[2],
        total=total, error_estimate=err,
        converged=all(r.converged for r in terms),
        coupling=coupling, unit_prefactors=units, bracket_error=berr,
        flags=flags, mode=mode,
    )


FORCE_COLUMNS = [
    "v", "f1", "f2", "f3", "total", "bracket", "error_estimate",
    "bracket_error", "converged", "error",
]


def _force_point(p0, tol, mode, v):
    return friction_force(p0.replace(v=v), tol, mode)


def params_metadata(p, tol, skip=()):
    meta = {"tool_version": __version__}
    for f in dataclasses.fields(p):
        if f.name not in skip:
            meta[f.name] = getattr(p, f.name)
    meta["tol_abs"] = tol.abs_tol
    meta["tol_rel"] = tol.rel_tol
    return meta


def velocity_sweep(p0, v_grid, tol=None, *, jobs=1, mode="full"):
    """Force at each velocity of an increasing grid.

    Points are independent and run on ``jobs`` worker processes; the table
    keeps grid order.  A point that raises is recorded with its error text
    and empty numeric cells.
    """
    tol = tol or DEFAULT_TOLERANCE
    grid = [float(v) for v in v_grid]
    if any(not 0.0 <= v < 1.0 for v in grid):
        raise ValueError("every v must satisfy 0 <= v < 1")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("v grid must be strictly increasing")
    results = parallel_map(functools.partial(_force_point, p0, tol, mode), grid, jobs)
    rows = []
    for v, (fb, error) in zip(grid, results):
        if fb is None:
            log.warning("force at v=%r failed: %s", v, error)
            rows.append([v, None, None, None, None, None, None, None, False, error])
        else:
            rows.append([v, fb.f1, fb.f2, fb.f3, fb.total, fb.bracket, fb.error_estimate,
                         fb.bracket_error, fb.converged, ""])
    meta = params_metadata(p0, tol, skip=("v",))
    meta["mode"] = mode
    return SweepTable(FORCE_COLUMNS, rows, meta)

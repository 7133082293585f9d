"""Imaginary part of the influence action and the decoherence-time estimate.

The estimate is ``t_d = 1/B`` in units of the global factor
``A = 4/(g^2 q0^2 (1 - cos delta))``, with

    B = (pi w/a) [(1 + 9 v^2/8)(2 n(w) + 1) - f(w beta) v^2]
        + (c^2/a) [S2 + S3 - S1]

where ``c = a^{3/2} lambda`` is the dimensionless plate coupling.  ``S1``
lives on the same window as the force term ``F1`` and is empty unless
``w/(1+v) < O < w/(1-v)``; when the window is open the log singularities of
``S1`` and ``S3`` at its edge cancel only in the combination ``S3 - S1``.
Everything dimensionless is carried per unit of ``a``, so ``t_d`` at
``v = 0`` and no plate coupling is ``a/(pi w (2 n + 1))``.
"""
from __future__ import annotations

import dataclasses
import functools
import logging
import math

import numpy as np
import scipy.constants

from .friction import exp_lorentzian_tail, params_metadata
from .integrands import (
    inside_window_integral,
    outside_window_integral,
    region_pv_integral,
    window_half_width,
)
from .kernels import bose_occupation, f_thermal, f_thermal_consistent, vartheta
from .quadrature import DEFAULT_TOLERANCE, QuadratureResult, integrate_1d
from .sweep import SweepTable, parallel_map

log = logging.getLogger(__name__)

__all__ = [
    "PerturbativeBreakdown",
    "DecoherenceBreakdown",
    "im_s1_exact",
    "im_s1_smallv",
    "plate_term_s1",
    "plate_term_s2",
    "plate_term_s3",
    "decoherence_time",
    "global_factor",
    "decoherence_velocity_sweep",
    "resonance_sweep",
]

EXPANSIONS = ("consistent", "printed")
S3_CONVENTIONS = ("continuous", "printed")


class PerturbativeBreakdown(ArithmeticError):
    """The bracket is not positive, so ``Im S ~ 1`` is never reached at this order."""

    def __init__(self, message, breakdown=None):
        super().__init__(message)
        self.breakdown = breakdown


def im_s1_exact(p, tol=None):
    """Vacuum part of ``Im S`` as the exact ``k1`` integral.

    ``int dk1 (2 n(|k1 v - w|) + 1) sqrt(((k1 v - w)^2 - k1^2)/zeta_1(k1))``
    over ``-w/(1-v) <= k1 <= w/(1+v)``.  At ``v = 0`` this is
    ``pi w (2 n(w) + 1)/2``; :func:`im_s1_smallv` approximates twice this.
    """
    tol = tol or DEFAULT_TOLERANCE
    v, w, beta = p.v, p.w_tilde, p.beta
    g2 = 1.0 - v * v
    c = -w * v / g2
    h = w / g2
    g = math.sqrt(g2)

    def f(t):
        ct = np.cos(t)
        k1 = c + h * np.sin(t)
        u = k1 * v - w
        z1 = v * v * (u * u - k1 * k1) + w * w
        n = bose_occupation(-u, beta)
        # sqrt(u^2 - k1^2) = g h cos t, times dk1/dt = h cos t
        return (2.0 * n + 1.0) * g * h * h * ct * ct / np.sqrt(z1)

    return integrate_1d(f, -math.pi / 2, math.pi / 2, tol)


def im_s1_smallv(p, expansion="consistent"):
    """Small-velocity closed form ``pi w [(1 + 9v^2/8)(2n+1) - f v^2]`` per ``a``.

    Parameters
    ----------
    expansion : {"consistent", "printed"}
        Thermal ``v^2`` weight: ``"consistent"`` uses
        :func:`~qfriction.kernels.f_thermal_consistent`, which matches the
        exact integral to ``O(v^4)``; ``"printed"`` uses
        :func:`~qfriction.kernels.f_thermal`.
    """
    if expansion not in EXPANSIONS:
        raise ValueError(f"expansion must be one of {EXPANSIONS}, got {expansion!r}")
    w, v = p.w_tilde, p.v
    n = bose_occupation(w, p.beta)
    f = f_thermal_consistent(p) if expansion == "consistent" else f_thermal(p)
    return math.pi * w * ((1.0 + 9.0 * v * v / 8.0) * (2.0 * n + 1.0) - f * v * v)


def plate_term_s1(p, tol=None):
    """Window term ``S1``; 0 when the window is closed.

    With the window open its ``cos(2 sqrt(zeta_-)/v)/zeta_-`` piece is a
    unit-scale finite part, matched by the one in :func:`plate_term_s3`.
    """
    tol = tol or DEFAULT_TOLERANCE
    ks = window_half_width(p)
    if ks is None:
        return QuadratureResult.exact(0.0)
    v, o = p.v, p.o_tilde
    th = vartheta(p)
    n = bose_occupation(o, p.beta)
    d = 8 * n**3 + 8 * n**2 + n

    def smooth(s):
        return 2.0 * s * d / th

    def singular(s):
        m2 = 2.0 * ks - s * s
        return 2.0 * (2.0 * n + 1.0) * np.cos(2.0 * s * np.sqrt(m2)) / (v * v * m2)

    use = smooth if d != 0 else None
    r = inside_window_integral(p, use, use, singular, tol).scaled(v / o)
    return dataclasses.replace(r, flags=r.flags + ("finite_part",))


def _s2_weight(p):
    v, w, o, beta = p.v, p.w_tilde, p.o_tilde, p.beta
    g = math.sqrt(1.0 - v * v)

    def weight(t, k1, k2, h):
        u = k1 * v - w
        z1 = v * v * (u * u - k1 * k1) + w * w
        n = bose_occupation(np.abs(u), beta)
        x = 2.0 * g * h * np.cos(t)  # 2 sqrt(zeta)
        # sin(x)/sqrt(zeta) * [1/sqrt(zeta) + 2n/sqrt(zeta_1)] * dk1/dt
        vac = 2.0 * np.sinc(x / math.pi) / g
        th = np.sin(x) / g * 2.0 * n / np.sqrt(z1)
        return (vac + th) / (math.pi * (u - o))

    return weight


def plate_term_s2(p, tol=None):
    """Principal-value light-cone term ``S2`` (vacuum plus thermal part).

    Evaluated from the same expression at ``v = 0``, where the pole is absent
    unless ``w == O``.
    """
    tol = tol or DEFAULT_TOLERANCE
    if p.v == 0 and p.w_tilde == p.o_tilde:
        raise ValueError("S2 at v = 0 needs w_tilde != o_tilde (pole fills the region)")
    return region_pv_integral(p, _s2_weight(p), tol)


def plate_term_s3(p, tol=None, convention="continuous"):
    """Exponential-tail term ``S3``.

    Parameters
    ----------
    convention : {"continuous", "printed"}
        Sign of the ``zeta_-`` tail.  ``"continuous"`` takes it with the sign
        that makes the term positive and cancels the edge singularity of
        ``S1``; ``"printed"`` keeps the opposite sign.
    """
    if convention not in S3_CONVENTIONS:
        raise ValueError(f"convention must be one of {S3_CONVENTIONS}, got {convention!r}")
    tol = tol or DEFAULT_TOLERANCE
    if p.v == 0:
        return QuadratureResult.exact(0.0)
    v, w, o = p.v, p.w_tilde, p.o_tilde
    n = bose_occupation(o, p.beta)
    sigma = -1.0 if convention == "continuous" else 1.0
    pref = v / o * (2.0 * n + 1.0)
    sub = tol.scaled(0.5)
    q_plus = math.sqrt((w + o) ** 2 - (v * o) ** 2)
    # -e_+/zeta_+ = +exp(...)/|zeta_+|
    parts = [exp_lorentzian_tail(v, q_plus, sub).scaled(pref)]
    ks = window_half_width(p)
    th = vartheta(p)
    if ks is None and th == 0:
        return QuadratureResult(math.nan, math.inf, 0, False, ("window_edge_divergence",))
    if ks is None:
        parts.append(exp_lorentzian_tail(v, math.sqrt(-th), sub).scaled(-sigma * pref))
    else:
        def singular(s):
            mm2 = 2.0 * ks + s * s
            return -2.0 * np.exp(-2.0 * s * np.sqrt(mm2)) / (v * v * mm2)

        r = outside_window_integral(p, None, singular, sub).scaled(sigma * pref)
        parts.append(dataclasses.replace(r, flags=r.flags + ("finite_part",)))
    return QuadratureResult.total(parts)


def global_factor(p, variant="phase"):
    """Prefactor ``A`` converting A-units to natural units.

    ``"phase"``: ``4/(g^2 q0^2 (1 - cos delta))`` for two trajectories that
    differ by a phase ``delta``.  ``"amplitude"``: ``8/(g^2 q0^2)`` for two
    in-phase trajectories whose amplitudes differ by ``q0``.
    """
    if variant == "phase":
        one_minus_cos = 1.0 - math.cos(p.delta)
        if one_minus_cos == 0:
            raise ValueError("delta with cos(delta) == 1: identical histories never decohere")
        return 4.0 / (p.g_c**2 * p.q0**2 * one_minus_cos)
    if variant == "amplitude":
        return 8.0 / (p.g_c**2 * p.q0**2)
    raise ValueError(f"variant must be 'phase' or 'amplitude', got {variant!r}")


@dataclasses.dataclass(frozen=True)
class DecoherenceBreakdown:
    """Contributions to the decoherence bracket and the resulting time.

    ``im_s1``, ``s1_plate``, ``s2``, ``s3`` and ``bracket_dimless`` are
    dimensionless; ``bracket = bracket_dimless / a`` and ``t_d = 1/bracket``
    are in A-units.
    """

    im_s1: float
    s1_plate: float
    s2: float
    s3: float
    plate_coupling_sq: float
    bracket_dimless: float
    bracket: float
    t_d: float
    error_estimate: float
    converged: bool
    window_open: bool
    flags: tuple = ()
    t_d_seconds: float | None = None


def decoherence_time(p, tol=None, *, expansion="consistent", s3_convention="continuous",
                     window_term=True):
    """Decoherence-time estimate for parameters ``p``.

    Parameters
    ----------
    p : ModelParams
    tol : Tolerance, optional
    expansion : {"consistent", "printed"}
        Passed to :func:`im_s1_smallv`.
    s3_convention : {"continuous", "printed"}
        Passed to :func:`plate_term_s3`.
    window_term : bool
        Subtract ``S1`` when its window is open.  It is always reported.

    Raises
    ------
    ValueError
        If ``cos(delta) == 1``.
    PerturbativeBreakdown
        If the bracket is not positive; the exception carries the breakdown.
    """
    tol = tol or DEFAULT_TOLERANCE
    A = global_factor(p)
    im_s1 = im_s1_smallv(p, expansion)
    c2 = p.plate_coupling**2
    window_open = window_half_width(p) is not None
    zero = QuadratureResult.exact(0.0)
    if c2 == 0:
        r1 = r2 = r3 = zero
    else:
        r1 = plate_term_s1(p, tol) if window_open else zero
        r2 = plate_term_s2(p, tol)
        r3 = plate_term_s3(p, tol, s3_convention)
    s1_used = r1.value if window_term else 0.0
    plate = r2.value + r3.value - s1_used
    bracket_dimless = im_s1 + c2 * plate
    bracket = bracket_dimless / p.a
    used = (r1, r2, r3) if window_term else (r2, r3)
    berr = c2 * math.fsum(r.abs_error_estimate for r in used)
    flags = tuple(dict.fromkeys(f for r in (r1, r2, r3) for f in r.flags))
    converged = all(r.converged for r in used)
    if not (bracket > 0) or not math.isfinite(bracket):
        bd = DecoherenceBreakdown(im_s1, r1.value, r2.value, r3.value, c2, bracket_dimless,
                                  bracket, math.nan, math.inf, converged, window_open, flags)
        raise PerturbativeBreakdown(
            f"bracket = {bracket_dimless!r} (per a) is not positive", bd)
    t_d = 1.0 / bracket
    err = t_d * (berr / bracket_dimless)
    t_sec = A * t_d / scipy.constants.c
    return DecoherenceBreakdown(
        im_s1=im_s1, s1_plate=r1.value, s2=r2.value, s3=r3.value,
        plate_coupling_sq=c2, bracket_dimless=bracket_dimless, bracket=bracket,
        t_d=t_d, error_estimate=err, converged=converged, window_open=window_open,
        flags=flags, t_d_seconds=t_sec,
    )


DECOHERENCE_COLUMNS = [
    "im_s1", "s1_plate", "s2", "s3", "bracket", "t_d", "t_d_err", "converged", "error",
]


def _td_point(p0, tol, options, axis, value):
    return decoherence_time(p0.replace(**{axis: value}), tol, **options)


def _sweep(p0, axis, grid, tol, jobs, options):
    tol = tol or DEFAULT_TOLERANCE
    grid = [float(x) for x in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"{axis} grid must be strictly increasing")
    fn = functools.partial(_td_point, p0, tol, dict(options), axis)
    rows = []
    for x, (bd, error) in zip(grid, parallel_map(fn, grid, jobs)):
        if bd is None:
            log.warning("decoherence at %s=%r failed: %s", axis, x, error)
            rows.append([x] + [None] * 7 + [False, error])
        else:
            rows.append([x, bd.im_s1, bd.s1_plate, bd.s2, bd.s3, bd.bracket, bd.t_d,
                         bd.error_estimate, bd.converged, ""])
    meta = params_metadata(p0, tol, skip=(axis,))
    for k, val in options.items():
        meta[k] = val
    table = SweepTable([axis] + DECOHERENCE_COLUMNS, rows, meta)
    i = table.argmin("t_d")
    table.metadata["argmin_" + axis] = grid[i] if i is not None else math.nan
    return table


def decoherence_velocity_sweep(p0, v_grid, tol=None, *, jobs=1, **options):
    """``t_d`` along an increasing velocity grid (other parameters from ``p0``)."""
    if any(not 0.0 <= v < 1.0 for v in v_grid):
        raise ValueError("every v must satisfy 0 <= v < 1")
    return _sweep(p0, "v", v_grid, tol, jobs, options)


def resonance_sweep(p0, o_grid, tol=None, *, jobs=1, **options):
    """``t_d`` along an increasing plate-frequency grid; records the argmin."""
    if any(not o > 0 for o in o_grid):
        raise ValueError("plate frequencies must be positive")
    return _sweep(p0, "o_tilde", o_grid, tol, jobs, options)

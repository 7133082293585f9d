"""Adaptive quadrature primitives with explicit error estimates.

Everything here is built on one globally adaptive 21-point Gauss-Kronrod
rule.  Integrands are called with 1-d ``numpy`` arrays of abscissae and must
return arrays of the same shape.

Summation is always done with :func:`math.fsum` over panels sorted by their
left endpoint, so a result depends only on the integrand and the tolerance.
"""
from __future__ import annotations

import dataclasses
import heapq
import logging
import math
from typing import Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Tolerance",
    "DEFAULT_TOLERANCE",
    "QuadratureResult",
    "PVPole",
    "Region",
    "integrate_1d",
    "integrate_semi_infinite",
    "principal_value_1d",
    "oscillation_panels",
    "integrate_oscillatory",
    "integrate_2d_region",
    "find_slices",
]

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452970,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# nodes on [-1, 1], left to right, with matching Kronrod / Gauss weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_gauss_idx = [1, 3, 5, 7, 9]
for _i, _w in zip(_gauss_idx, _WG):
    _GW[_i] = _w
    _GW[20 - _i] = _w
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclasses.dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_evaluations: int = 10_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be > 0")
        if self.max_evaluations < 21:
            raise ValueError("max_evaluations must allow at least one panel (21)")

    def target(self, value):
        return max(self.abs_tol, self.rel_tol * abs(value))

    def scaled(self, factor):
        """Tighten (factor < 1) or loosen both tolerances."""
        return dataclasses.replace(
            self, abs_tol=self.abs_tol * factor, rel_tol=self.rel_tol * factor)


DEFAULT_TOLERANCE = Tolerance()
INNER_BUDGET = 20_000  # evaluations per slice of a 2D region integral


@dataclasses.dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool
    flags: tuple = ()

    def __float__(self):
        return float(self.value)

    def scaled(self, factor):
        return dataclasses.replace(
            self, value=self.value * factor,
            abs_error_estimate=self.abs_error_estimate * abs(factor))

    @classmethod
    def exact(cls, value=0.0, flags=()):
        """A result known without quadrature (empty support, symmetry)."""
        return cls(float(value), 0.0, 0, True, tuple(flags))

    @classmethod
    def total(cls, parts, offset=0.0):
        """Sum of independent results plus an exactly known ``offset``."""
        parts = list(parts)
        flags = tuple(dict.fromkeys(fl for r in parts for fl in r.flags))
        return cls(
            math.fsum([offset] + [r.value for r in parts]),
            math.fsum(r.abs_error_estimate for r in parts),
            sum(r.evaluations for r in parts),
            all(r.converged for r in parts),
            flags,
        )


@dataclasses.dataclass(frozen=True)
class PVPole:
    location: float
    order: int = 1

    def __post_init__(self):
        if self.order != 1:
            raise ValueError("only simple poles are supported")


def _gk21(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = center + half * _NODES
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    resk = float(np.dot(_KW, fx))
    resg = float(np.dot(_GW, fx))
    mean = 0.5 * resk
    resabs = float(np.dot(_KW, np.abs(fx))) * abs(half)
    resasc = float(np.dot(_KW, np.abs(fx - mean))) * abs(half)
    value = resk * half
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    if not np.all(np.isfinite(fx)):
        value, err = math.nan, math.inf
    return value, err


def _adaptive(f, edges, tol, return_panels=False, spent=None):
    """Global adaptive GK21 over consecutive panels ``edges[i]..edges[i+1]``.

    With ``return_panels`` the final ``(a, b)`` panels are returned as well.
    ``spent()``, if given, reports evaluations made inside ``f`` itself; they
    count against ``tol.max_evaluations`` too.
    """
    tol = tol or DEFAULT_TOLERANCE
    panels = {}
    heap = []
    evaluations = 0
    counter = 0
    for a, b in zip(edges[:-1], edges[1:]):
        if b == a:
            continue
        val, err = _gk21(f, a, b)
        evaluations += 21
        panels[counter] = (a, b, val, err)
        heapq.heappush(heap, (-err, counter))
        counter += 1
    if not panels:
        res = QuadratureResult(0.0, 0.0, 0, True)
        return (res, []) if return_panels else res
    flags = []
    total_val = math.fsum(p[2] for p in panels.values())
    total_err = math.fsum(p[3] for p in panels.values())
    since_resum = 0
    while True:
        if not math.isfinite(total_val):
            flags.append("nonfinite")
            break
        if total_err <= tol.target(total_val):
            break
        used = evaluations + (spent() if spent is not None else 0)
        if used + 42 > tol.max_evaluations:
            flags.append("max_evaluations")
            break
        _, key = heapq.heappop(heap)
        a, b, val, err = panels.pop(key)
        mid = 0.5 * (a + b)
        if not (a < mid < b) or (b - a) < 64 * _EPS * max(abs(a), abs(b), _TINY):
            # cannot split further; keep the panel and give up
            panels[key] = (a, b, val, err)
            flags.append("roundoff")
            break
        v1, e1 = _gk21(f, a, mid)
        v2, e2 = _gk21(f, mid, b)
        evaluations += 42
        for lo_, hi_, vv, ee in ((a, mid, v1, e1), (mid, b, v2, e2)):
            panels[counter] = (lo_, hi_, vv, ee)
            heapq.heappush(heap, (-ee, counter))
            counter += 1
        total_val += v1 + v2 - val
        total_err += e1 + e2 - err
        since_resum += 1
        if since_resum >= 64:
            total_val = math.fsum(p[2] for p in panels.values())
            total_err = math.fsum(p[3] for p in panels.values())
            since_resum = 0
    ordered = sorted(panels.values(), key=lambda p: p[0])
    value = math.fsum(p[2] for p in ordered)
    err = math.fsum(p[3] for p in ordered)
    converged = math.isfinite(value) and err <= tol.target(value)
    res = QuadratureResult(value, err, evaluations, converged, tuple(flags))
    if return_panels:
        return res, [(p[0], p[1]) for p in ordered]
    return res


def integrate_1d(f, lo, hi, tol=None, *, breakpoints=()):
    """Adaptive integral of ``f`` over ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    lo, hi : float
        Finite limits with ``lo < hi``.
    tol : Tolerance, optional
    breakpoints : sequence of float
        Interior points where ``f`` is known to be non-smooth.

    Returns
    -------
    QuadratureResult
        ``converged`` is False when the evaluation budget ran out or the
        panels hit floating-point resolution.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("integrate_1d needs finite limits; see integrate_semi_infinite")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    inner = sorted(x for x in set(breakpoints) if lo < x < hi)
    return _adaptive(f, [lo, *inner, hi], tol or DEFAULT_TOLERANCE)


def integrate_semi_infinite(f, lo, decay_scale, tol=None, *, breakpoints=()):
    """Integral of ``f`` over ``[lo, inf)`` for an exponentially decaying ``f``.

    The domain is truncated at ``lo + N*decay_scale`` with ``exp(-N) < rel_tol``
    and then extended panel by panel (each ``8*decay_scale`` wide) until the
    last panel is negligible.  The remaining tail is bounded assuming the
    ratio between the last two panels persists geometrically; that bound is
    added to ``abs_error_estimate``.
    """
    tol = tol or DEFAULT_TOLERANCE
    if not decay_scale > 0:
        raise ValueError("decay_scale must be > 0")
    n_scales = max(8, math.ceil(-math.log(tol.rel_tol)) + 1)
    hi = lo + n_scales * decay_scale
    inner_tol = tol.scaled(0.5)
    head = integrate_1d(f, lo, hi, inner_tol, breakpoints=breakpoints)
    parts = [head]
    prev = abs(head.value)
    width = 8.0 * decay_scale
    tail_bound = 0.0
    for _ in range(200):
        piece = integrate_1d(f, hi, hi + width, inner_tol)
        parts.append(piece)
        hi += width
        cur = abs(piece.value)
        total = math.fsum(r.value for r in parts)
        ratio = cur / prev if prev > 0 else 0.0
        if ratio < 1.0:
            tail_bound = cur * ratio / (1.0 - ratio)
        else:
            tail_bound = math.inf
        prev = cur
        if tail_bound <= 0.25 * tol.target(total):
            break
    res = QuadratureResult.total(parts)
    err = res.abs_error_estimate + tail_bound
    converged = res.converged and err <= tol.target(res.value)
    flags = res.flags if converged or math.isfinite(tail_bound) else res.flags + ("tail",)
    return QuadratureResult(res.value, err, res.evaluations, converged, flags)


def principal_value_1d(g, pole, lo, hi, tol=None):
    """Cauchy principal value of ``g(x)/(x - x0)`` over ``[lo, hi]``.

    Uses pole subtraction::

        PV = int (g(x) - g(x0))/(x - x0) dx + g(x0) * log((hi - x0)/(x0 - lo))

    The subtracted integrand is integrated on ``[lo, x0]`` and ``[x0, hi]``
    separately and takes the value ``g'(x0)`` (central difference) when an
    abscissa falls within ``1e-9*(hi - lo)`` of the pole.
    """
    x0 = pole.location if isinstance(pole, PVPole) else float(pole)
    if not lo < x0 < hi:
        raise ValueError(f"pole {x0} must lie strictly inside ({lo}, {hi})")
    g0 = float(np.asarray(g(np.array([x0])), dtype=float)[0])
    if not math.isfinite(g0):
        raise ValueError(f"numerator is not finite at the pole x0={x0}")
    width = hi - lo
    near = 1e-9 * width
    deriv = []

    def slope():
        if not deriv:
            h = min(1e-5 * width, 0.5 * (x0 - lo), 0.5 * (hi - x0))
            gp, gm = np.asarray(g(np.array([x0 + h, x0 - h])), dtype=float)
            deriv.append((gp - gm) / (2 * h))
        return deriv[0]

    def subtracted(x):
        dx = x - x0
        small = np.abs(dx) < near
        safe = np.where(small, 1.0, dx)
        out = (np.asarray(g(x), dtype=float) - g0) / safe
        if np.any(small):
            out = np.where(small, slope(), out)
        return out

    body = integrate_1d(subtracted, lo, hi, tol, breakpoints=(x0,))
    log_term = g0 * math.log((hi - x0) / (x0 - lo))
    return QuadratureResult(
        body.value + log_term, float(body.abs_error_estimate + _EPS * abs(log_term)),
        body.evaluations + 1, body.converged, body.flags)


def _numeric_derivative(phase, x, h):
    return (np.asarray(phase(x + h), dtype=float) - np.asarray(phase(x - h), dtype=float)) / (2 * h)


def oscillation_panels(phase, lo, hi, dphase=None, per_period=4, max_panels=1_000_000):
    """Panel edges on ``[lo, hi]`` with at most ``1/per_period`` of a period each.

    The local period ``2*pi/|phase'|`` is sampled at each tentative panel's
    midpoint.  Where ``phase'`` vanishes the rest of the interval is one panel.
    """
    span = hi - lo
    h = 1e-7 * max(span, 1e-300)
    if dphase is None:
        def dphase(x):
            return _numeric_derivative(phase, x, h)
    edges = [lo]
    x = lo
    while x < hi and len(edges) <= max_panels:
        rate = abs(float(np.asarray(dphase(np.array([x])))[0]))
        width = hi - x if rate == 0 else 2 * math.pi / (per_period * rate)
        # refine with the rate at the tentative midpoint
        mid = min(x + 0.5 * width, hi)
        rate_mid = abs(float(np.asarray(dphase(np.array([mid])))[0]))
        rate = max(rate, rate_mid)
        width = hi - x if rate == 0 else 2 * math.pi / (per_period * rate)
        x = min(x + width, hi)
        if hi - x < 1e-12 * span:
            x = hi
        edges.append(x)
    if edges[-1] != hi:
        edges.append(hi)
    return edges


def integrate_oscillatory(f_smooth, phase, lo, hi, tol=None, *, kind="cos", dphase=None):
    """Integral of ``f_smooth(x) * cos(phase(x))`` (or ``sin``) over ``[lo, hi]``.

    The interval is cut into panels no wider than a quarter of the local
    oscillation period and the adaptive rule runs over all panels jointly.
    """
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    trig = np.cos if kind == "cos" else np.sin

    def integrand(x):
        return np.asarray(f_smooth(x), dtype=float) * trig(np.asarray(phase(x), dtype=float))

    edges = oscillation_panels(phase, lo, hi, dphase=dphase)
    return _adaptive(integrand, edges, tol or DEFAULT_TOLERANCE)


@dataclasses.dataclass(frozen=True)
class Region:
    """Planar region ``{(x, y) : boundary(x, y) >= 0}`` inside ``bbox``.

    ``bbox`` is ``(xlo, xhi, ylo, yhi)``.  ``slices(y)`` may return the
    x-intervals of the region at height ``y`` in closed form; otherwise they are
    located by scanning and bisection.
    """

    boundary: Callable
    bbox: tuple
    slices: Optional[Callable] = None

    def contains(self, x, y):
        return np.asarray(self.boundary(x, y)) >= 0


def _bisect(fn, a, b, xtol):
    fa = fn(a)
    for _ in range(200):
        if b - a <= xtol:
            break
        m = 0.5 * (a + b)
        fm = fn(m)
        if (fm >= 0) == (fa >= 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def find_slices(region, y, n_scan=257, xtol=1e-12):
    """x-intervals where ``region.boundary(., y) >= 0``, ends bisected to ``xtol``."""
    if region.slices is not None:
        return list(region.slices(y))
    xlo, xhi = region.bbox[0], region.bbox[1]
    xs = np.linspace(xlo, xhi, n_scan)
    inside = np.asarray(region.boundary(xs, np.full_like(xs, y))) >= 0

    def fn(x):
        return float(region.boundary(np.array([x]), np.array([y]))[0])

    out = []
    start = xlo if inside[0] else None
    for i in range(1, n_scan):
        if inside[i] and not inside[i - 1]:
            start = _bisect(fn, xs[i - 1], xs[i], xtol)
        elif inside[i - 1] and not inside[i]:
            out.append((start, _bisect(fn, xs[i - 1], xs[i], xtol)))
            start = None
    if start is not None:
        out.append((start, xhi))
    return [(a, b) for a, b in out if b > a]


def _sine_map(lo, hi):
    """``x = c + h*sin(t)`` on ``t in [-pi/2, pi/2]``; returns (x(t), dx/dt)."""
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return (lambda t: c + h * np.sin(t)), (lambda t: h * np.cos(t))


def integrate_2d_region(f, region, tol=None, *, inner=None, breakpoints=()):
    """Iterated integral of ``f(x, y)`` over a :class:`Region`.

    The outer integral runs over ``y`` and the inner one over each x-slice.
    Every outer sub-interval (between consecutive ``breakpoints``) and every
    slice is mapped by ``x = c + h*sin(t)``, which turns square-root behaviour
    at its ends, such as vanishing slice lengths or ``1/sqrt(boundary)``
    integrands, into smooth functions of ``t``.

    Parameters
    ----------
    f : callable
        ``f(x, y)`` vectorised in ``x`` for scalar ``y``.
    inner : callable, optional
        ``inner(y, lo, hi, tol) -> QuadratureResult`` replacing the default
        slice integrator (used for slices that carry principal-value poles).
    breakpoints : sequence of float
        Outer ``y`` values where the slice integral is not smooth.
    """
    tol = tol or DEFAULT_TOLERANCE
    ylo, yhi = region.bbox[2], region.bbox[3]
    # slices are cheap but can sit on a cancellation floor near branch
    # points; their errors are integrated below, so each gets a fixed budget
    inner_tol = dataclasses.replace(
        tol.scaled(0.01), max_evaluations=min(tol.max_evaluations, INNER_BUDGET))
    stats = {"evals": 0, "flags": []}
    inner_err = {}

    def default_inner(y, lo, hi, itol):
        x_of, jac = _sine_map(lo, hi)
        return integrate_1d(lambda t: f(x_of(t), y) * jac(t), -math.pi / 2, math.pi / 2, itol)

    slice_integral = inner or default_inner
    cuts = [ylo, *sorted(y for y in set(breakpoints) if ylo < y < yhi), yhi]
    maps = [_sine_map(a, b) for a, b in zip(cuts[:-1], cuts[1:])]

    def outer(taus):
        out = np.empty(len(taus))
        for i, tau in enumerate(taus):
            k = min(int(tau // math.pi), len(maps) - 1)
            t = tau - k * math.pi - math.pi / 2
            y = float(maps[k][0](t))
            jac = float(maps[k][1](t))
            acc, err = [], 0.0
            for lo, hi in find_slices(region, y):
                r = slice_integral(y, lo, hi, inner_tol)
                stats["evals"] += r.evaluations
                if not r.converged:
                    stats["flags"].append("inner_not_converged")
                stats["flags"].extend(r.flags)
                acc.append(r.value)
                err += r.abs_error_estimate
            out[i] = math.fsum(acc) * jac
            inner_err[float(tau)] = err * abs(jac)
        return out

    edges = [k * math.pi for k in range(len(maps) + 1)]
    res, panels = _adaptive(outer, edges, tol, return_panels=True,
                            spent=lambda: stats["evals"])
    flags = tuple(dict.fromkeys(res.flags + tuple(stats["flags"])))
    # inner errors integrated with the Kronrod rule of the final outer panels
    parts = []
    for a, b in panels:
        center, half = 0.5 * (a + b), 0.5 * (b - a)
        errs = np.array([inner_err.get(float(x), 0.0) for x in center + half * _NODES])
        parts.append(abs(half) * float(np.dot(_KW, errs)))
    err = res.abs_error_estimate + math.fsum(parts)
    converged = res.converged and math.isfinite(err) and err <= tol.target(res.value)
    return QuadratureResult(
        res.value, err, res.evaluations + stats["evals"], converged, flags)

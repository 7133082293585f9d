"""Slow reference integrators for certifying the production quadrature.

Nothing here shares code paths with :mod:`qfriction.quadrature`: 1D integrals
use the composite trapezoid rule with one Richardson step, principal values
use symmetric excision extrapolated in the excision width, and region
integrals use plain Monte Carlo or a dense tensor grid.  Cost is not a
concern; these routines are meant for tests and for spot checks of new
parameter regimes.

Light-cone integrals are sampled in hemisphere coordinates
``k1 = c + R sin(theta) cos(phi)/g``, ``k2 = R sin(theta) sin(phi)`` with
``g = sqrt(1 - v^2)``, in which ``sqrt(zeta_2d) = R cos(theta)`` and
``dk1 dk2 = R^2 sin(theta) cos(theta)/g dtheta dphi``; every ``1/sqrt(zeta)``
integrand becomes bounded.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .kernels import bose_occupation, vartheta

__all__ = [
    "OracleConfig",
    "oracle_integrate_1d",
    "oracle_pv",
    "oracle_mc_2d",
    "oracle_f2",
    "oracle_s2",
    "oracle_f3",
    "oracle_f3_plus",
    "oracle_s3",
    "oracle_window_pair",
    "oracle_f1",
    "oracle_im_s1",
]

_MC_CHUNK = 1 << 16


@dataclasses.dataclass(frozen=True)
class OracleConfig:
    """Oracle resolution.

    Parameters
    ----------
    grid_points : int
        Points of the coarser trapezoid grid (the fine grid has ``2n - 1``).
    mc_samples : int
        Monte Carlo sample count, at least ``100_000``.
    pv_epsilons : tuple of float
        Strictly decreasing positive excision half-widths.
    seed : int
        Key of the counter-based random stream.
    """

    grid_points: int = 200_001
    mc_samples: int = 1_000_000
    pv_epsilons: tuple = (4e-3, 2e-3, 1e-3, 5e-4)
    seed: int = 20240611

    def __post_init__(self):
        if self.grid_points < 3:
            raise ValueError("grid_points must be >= 3")
        if self.mc_samples < 100_000:
            raise ValueError("mc_samples must be >= 1e5")
        eps = tuple(self.pv_epsilons)
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("pv_epsilons must be positive and strictly decreasing")


def _trapezoid(f, lo, hi, n):
    x = np.linspace(lo, hi, n)
    y = np.asarray(f(x), dtype=float)
    h = (hi - lo) / (n - 1)
    return h * (math.fsum(y[1:-1]) + 0.5 * (y[0] + y[-1]))


def oracle_integrate_1d(f, lo, hi, cfg=None):
    """Trapezoid on ``n`` and ``2n - 1`` points, one Richardson step."""
    cfg = cfg or OracleConfig()
    n = cfg.grid_points
    coarse = _trapezoid(f, lo, hi, n)
    fine = _trapezoid(f, lo, hi, 2 * n - 1)
    return float((4.0 * fine - coarse) / 3.0)


def _extrapolate_zero(xs, ys, powers):
    """Value at ``x = 0`` of ``y = c0 + sum_j c_j x^powers[j]`` through the points."""
    xs = np.asarray(xs, dtype=float)
    cols = [np.ones_like(xs)] + [xs**k for k in powers]
    A = np.stack(cols[: len(xs)], axis=1)
    coef = np.linalg.solve(A, np.asarray(ys, dtype=float))
    return float(coef[0])


def oracle_pv(g, pole, lo, hi, cfg=None):
    """``PV int_lo^hi g(x)/(x - pole) dx`` by symmetric excision.

    Each side is integrated in ``s = log|x - pole|``, where the integrand is
    simply ``+-g``; the excised integrals are then extrapolated to zero width
    in odd powers of the width, which is exact for a smooth ``g``.
    """
    cfg = cfg or OracleConfig()
    x0 = float(getattr(pole, "location", pole))
    if not lo < x0 < hi:
        raise ValueError("pole must lie strictly inside (lo, hi)")
    eps = [e for e in cfg.pv_epsilons if e < min(x0 - lo, hi - x0)]
    if not eps:
        raise ValueError("every excision width exceeds the distance to an endpoint")
    vals = []
    for e in eps:
        left = oracle_integrate_1d(lambda s: g(x0 - np.exp(s)), math.log(e), math.log(x0 - lo), cfg)
        right = oracle_integrate_1d(lambda s: g(x0 + np.exp(s)), math.log(e), math.log(hi - x0), cfg)
        vals.append(right - left)
    return _extrapolate_zero(eps, vals, (1, 3, 5, 7, 9))


def _uniform_stream(seed, n, dim):
    """``n`` points in ``[0, 1)^dim`` from fixed-size Philox chunks.

    Chunk ``i`` always comes from the same jumped stream, so any split of the
    work over chunks reproduces the serial draw bit for bit.
    """
    out = []
    for i in range(-(-n // _MC_CHUNK)):
        m = min(_MC_CHUNK, n - i * _MC_CHUNK)
        gen = np.random.Generator(np.random.Philox(key=seed).jumped(i))
        out.append(gen.random((_MC_CHUNK, dim))[:m])
    return np.concatenate(out)


def oracle_mc_2d(f, contains, bbox, cfg=None):
    """Monte Carlo ``int f dA`` over ``{contains}`` within ``bbox``.

    Parameters
    ----------
    f : callable
        ``f(x, y)`` on arrays.
    contains : callable
        ``contains(x, y)`` boolean mask of the region.
    bbox : (xlo, xhi, ylo, yhi)

    Returns
    -------
    (float, float)
        Estimate and its standard error.
    """
    cfg = cfg or OracleConfig()
    xlo, xhi, ylo, yhi = bbox
    u = _uniform_stream(cfg.seed, cfg.mc_samples, 2)
    x = xlo + (xhi - xlo) * u[:, 0]
    y = ylo + (yhi - ylo) * u[:, 1]
    mask = np.asarray(contains(x, y), dtype=bool)
    vals = np.zeros(len(x))
    vals[mask] = f(x[mask], y[mask])
    area = (xhi - xlo) * (yhi - ylo)
    mean = float(np.mean(vals)) * area
    se = float(np.std(vals, ddof=1)) * area / math.sqrt(len(vals))
    return mean, se


# ---------------------------------------------------------------- term oracles

def _hemisphere(p):
    v, w = p.v, p.w_tilde
    g = math.sqrt(1.0 - v * v)
    return -w * v / (g * g), w / g, g


def _light_cone_density(p, term):
    """``f(theta, phi)`` such that the light-cone integral is ``int f dtheta dphi``."""
    v, w, o, beta = p.v, p.w_tilde, p.o_tilde, p.beta
    c, R, g = _hemisphere(p)

    def f(theta, phi):
        st, ct = np.sin(theta), np.cos(theta)
        k1 = c + R * st * np.cos(phi) / g
        sq = R * ct  # sqrt(zeta_2d)
        u = k1 * v - w
        z1 = v * v * (u * u - k1 * k1) + w * w
        n = bose_occupation(np.abs(u), beta)
        jac = R * R * st / g  # cos(theta) kept aside to cancel 1/sqrt(zeta)
        # sin(2 sqrt(zeta))/sqrt(zeta) * cos(theta), bounded
        s2 = np.where(sq > 0, np.sin(2.0 * sq) / R, 2.0 * ct)
        den = u * u - o * o
        if term == "f2":
            return jac * k1 * n / den * s2 / np.sqrt(z1) / (2.0 * math.pi)
        # S2: the 1/sqrt(zeta) bracket term absorbs the remaining cos(theta)
        vac = np.where(sq > 0, np.sin(2.0 * sq) / sq, 2.0) / R
        th = s2 * 2.0 * n / np.sqrt(z1)
        return jac * (vac + th) / (math.pi * den)

    return f


def _check_no_pole(p):
    if p.v > 0 and vartheta(p) > 0:
        raise ValueError("the dense-grid oracle needs the principal-value pole outside the region")


def _dense_2d(f, n_theta, n_phi):
    def row_integral(nt):
        theta = np.linspace(0.0, 0.5 * math.pi, nt)
        phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
        rows = np.array([float(np.sum(f(t, phi))) * (2.0 * math.pi / n_phi) for t in theta])
        h = 0.5 * math.pi / (nt - 1)
        return h * (math.fsum(rows[1:-1]) + 0.5 * (rows[0] + rows[-1]))

    coarse = row_integral(n_theta)
    fine = row_integral(2 * n_theta - 1)
    return float((4.0 * fine - coarse) / 3.0)


def _mc_light_cone(p, f, cfg, excise):
    v, w, o = p.v, p.w_tilde, p.o_tilde
    c, R, g = _hemisphere(p)
    kp = (w - o) / v if v > 0 else None

    def contains(theta, phi):
        if kp is None or not excise:
            return np.ones_like(theta, dtype=bool)
        k1 = c + R * np.sin(theta) * np.cos(phi) / g
        return np.abs(k1 - kp) > excise

    return oracle_mc_2d(f, contains, (0.0, 0.5 * math.pi, 0.0, 2.0 * math.pi), cfg)


def oracle_f2(p, cfg=None, method="mc"):
    """Reference ``F2``.  ``method="mc"`` returns ``(mean, stderr)``, ``"grid"`` a float.

    Monte Carlo excises ``|k1 - pole| < pv_epsilons[-1]`` when the pole is in
    the region.
    """
    cfg = cfg or OracleConfig()
    if p.v == 0 or p.zero_temperature:
        return (0.0, 0.0) if method == "mc" else 0.0
    f = _light_cone_density(p, "f2")
    if method == "grid":
        _check_no_pole(p)
        return _dense_2d(f, max(201, cfg.grid_points // 200), 2048)
    return _mc_light_cone(p, f, cfg, cfg.pv_epsilons[-1])


def oracle_s2(p, cfg=None, method="mc"):
    """Reference ``S2``, same conventions as :func:`oracle_f2`."""
    cfg = cfg or OracleConfig()
    f = _light_cone_density(p, "s2")
    if method == "grid":
        _check_no_pole(p)
        return _dense_2d(f, max(201, cfg.grid_points // 200), 2048)
    return _mc_light_cone(p, f, cfg, cfg.pv_epsilons[-1])


def _tail_grid(p, zeta_of, cutoff=None):
    """``int_0^K exp(-(2/v) sqrt(-zeta))/zeta dk2`` on a uniform grid (zeta < 0)."""
    v = p.v
    K = cutoff if cutoff is not None else 40.0

    def f(k):
        z = zeta_of(k)
        return np.exp(-2.0 / v * np.sqrt(-z)) / z

    return f, K


def _zeta_plus(p):
    v, w, o = p.v, p.w_tilde, p.o_tilde
    return lambda k: v * v * o * o - (w + o) ** 2 - v * v * k * k


def _zeta_minus(p):
    v, w, o = p.v, p.w_tilde, p.o_tilde
    return lambda k: v * v * o * o - (w - o) ** 2 - v * v * k * k


def _tail(p, zeta, cfg):
    f, K = _tail_grid(p, zeta)
    return oracle_integrate_1d(f, 0.0, K, cfg)


def oracle_f3_plus(p, cfg=None):
    """Occupation-free ``zeta_+`` part of ``F3`` on a dense ``k2`` grid."""
    cfg = cfg or OracleConfig()
    if p.v == 0:
        return 0.0
    w, o = p.w_tilde, p.o_tilde
    return -(w + o) / math.pi * _tail(p, _zeta_plus(p), cfg)


def oracle_f3(p, cfg=None):
    """``F3`` on a dense ``k2`` grid (window closed)."""
    cfg = cfg or OracleConfig()
    if p.v == 0:
        return 0.0
    _check_no_pole(p)
    w, o = p.w_tilde, p.o_tilde
    nw, no = bose_occupation(w, p.beta), bose_occupation(o, p.beta)
    plus = (w + o) * (no + nw + 1.0) * _tail(p, _zeta_plus(p), cfg)
    cm = (w - o) * (no - nw)
    minus = cm * _tail(p, _zeta_minus(p), cfg) if cm != 0 else 0.0
    return -(plus + minus) / math.pi


def oracle_s3(p, cfg=None, convention="continuous"):
    """``S3`` on a dense ``k2`` grid (window closed)."""
    cfg = cfg or OracleConfig()
    if p.v == 0:
        return 0.0
    _check_no_pole(p)
    v, o = p.v, p.o_tilde
    n = bose_occupation(o, p.beta)
    sigma = -1.0 if convention == "continuous" else 1.0
    t = sigma * _tail(p, _zeta_minus(p), cfg) - _tail(p, _zeta_plus(p), cfg)
    return v / o * (2.0 * n + 1.0) * t


def oracle_im_s1(p, cfg=None):
    """Exact ``Im S`` vacuum integral on a dense ``k1 = c + h sin t`` grid."""
    cfg = cfg or OracleConfig()
    v, w = p.v, p.w_tilde
    g2 = 1.0 - v * v
    c, h = -w * v / g2, w / g2

    def f(t):
        k1 = c + h * np.sin(t)
        u = k1 * v - w
        q = np.maximum(u * u - k1 * k1, 0.0)
        z1 = v * v * q + w * w
        n = bose_occupation(np.abs(u), p.beta)
        return (2.0 * n + 1.0) * np.sqrt(q / z1) * h * np.cos(t)

    return oracle_integrate_1d(f, -0.5 * math.pi, 0.5 * math.pi, cfg)


def oracle_f1(p, cfg=None):
    """``F1`` on a dense grid in ``s = sqrt(k* - |k2|)``.

    Only for parameters where the ``cos/zeta_-`` piece drops out
    (``n(O) == n(w)``); otherwise use :func:`oracle_window_pair`.
    """
    cfg = cfg or OracleConfig()
    v, w, o, beta = p.v, p.w_tilde, p.o_tilde, p.beta
    th = vartheta(p)
    if not (v > 0 and th > 0) or p.zero_temperature:
        return 0.0
    nw, no = bose_occupation(w, beta), bose_occupation(o, beta)
    if no != nw:
        raise ValueError("F1 alone is a finite part here; use oracle_window_pair")
    ks = math.sqrt(th) / v
    a4 = 4 * no**3 + no**2
    b = no * (4 * no + 2) - nw

    def f(s):
        k = ks - s * s
        z = np.maximum(v * v * (ks * ks - k * k), 0.0)
        m = np.sqrt(np.maximum(2.0 * ks - s * s, 0.0))
        cos2 = np.cos(np.sqrt(z) / v) ** 2
        # 2 s / sqrt(z) = 2 / (v m), finite at s = 0
        return 2.0 * (s * a4 / th * cos2 + cos2 * b / (v * m * math.sqrt(th)))

    # int dk2/(2 pi) over the full window is the half window over pi
    return oracle_integrate_1d(f, 0.0, math.sqrt(ks), cfg) / math.pi


def oracle_window_pair(p, cfg=None, kind="force"):
    """Principal value across the window edge of the two edge-singular terms.

    ``kind="force"``: the force-weighted sum of ``F1`` and the ``zeta_-``
    part of ``F3`` (with their unit prefactors).  ``kind="decoherence"``:
    ``-S1`` plus the ``zeta_-`` part of ``S3`` (continuous convention).
    Computed by excising ``|k2 - k*| < eps`` on both sides, in the variable
    ``s = sqrt(|k2 - k*|)``, and extrapolating in ``eps``.
    """
    cfg = cfg or OracleConfig()
    v, w, o, beta = p.v, p.w_tilde, p.o_tilde, p.beta
    th = vartheta(p)
    if not (v > 0 and th > 0):
        raise ValueError("window is closed")
    ks = math.sqrt(th) / v
    nw, no = bose_occupation(w, beta), bose_occupation(o, beta)

    def zm(k):
        return v * v * (ks * ks - k * k)

    if kind == "force":
        u1 = -(w - o) / (4.0 * w * o)
        u3 = -1.0 / (16.0 * w * o)
        a4 = 4 * no**3 + no**2
        b = no * (4 * no + 2) - nw
        cc = 0.25 * (no - nw)

        def inside(k):
            z = zm(k)
            ph = 2.0 * np.sqrt(z) / v
            val = (1 + np.cos(ph)) / 2 * (a4 / th + b / (np.sqrt(z) * math.sqrt(th))) - np.cos(ph) * cc / z
            return u1 * val / math.pi

        def outside(k):
            z = zm(k)
            return u3 * (-(w - o) * (no - nw) * np.exp(-2.0 / v * np.sqrt(-z)) / z) / math.pi
    elif kind == "decoherence":
        d = 8 * no**3 + 8 * no**2 + no

        def inside(k):
            z = zm(k)
            ph = 2.0 * np.sqrt(z) / v
            val = np.cos(ph) * (2 * no + 1) / z + (1 + np.cos(ph)) * d / th
            return -(v / o) * val

        def outside(k):
            z = zm(k)
            return (v / o) * (2 * no + 1) * (-np.exp(-2.0 / v * np.sqrt(-z)) / z)
    else:
        raise ValueError("kind must be 'force' or 'decoherence'")

    S = math.sqrt(ks)
    eps = [e for e in cfg.pv_epsilons if e < S]
    vals = []
    for e in eps:
        a = oracle_integrate_1d(lambda s: 2 * s * inside(ks - s * s), e, S, cfg)
        # the outer tail decays like exp(-2 s^2)
        b1 = oracle_integrate_1d(lambda s: 2 * s * outside(ks + s * s), e, 8.0, cfg)
        vals.append(a + b1)
    return _extrapolate_zero(eps, vals, (1, 2, 3, 4, 5))

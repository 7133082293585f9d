"""Closed-form scalar kernels shared by the force and decoherence integrands.

All frequencies and momenta are dimensionless: a momentum ``k`` stands for
``a*k`` and a frequency ``w`` for ``a*w``, with ``a`` the particle-plate
separation.  The inverse temperature is measured in units of ``a`` as well.

Zero temperature is the value :data:`ZERO_TEMPERATURE` (``math.inf``).  It is
handled by explicit branches, never by letting ``exp`` overflow, so every
occupation factor is exactly ``0.0`` there.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = [
    "ZERO_TEMPERATURE",
    "ModelParams",
    "bose_occupation",
    "zeta_2d",
    "zeta_1",
    "zeta_pm",
    "vartheta",
    "f_thermal",
    "f_thermal_consistent",
]

ZERO_TEMPERATURE = math.inf


def _is_zero_temperature(beta):
    return beta == math.inf


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the particle/plate system.

    Parameters
    ----------
    w_tilde : float
        Particle frequency times separation, ``a*omega_0`` (> 0).
    o_tilde : float
        Plate oscillator frequency times separation, ``a*Omega`` (> 0).
    v : float
        Velocity in units of c, ``0 <= v < 1``.
    beta : float
        Inverse temperature in units of ``a``; ``ZERO_TEMPERATURE`` for T = 0.
    a : float
        Separation in meters.
    lambda_c, g_c : float
        Plate-field and particle-field couplings (m^{3/2} and m^{1/2}).
    q0 : float
        Amplitude of the classical internal trajectory.
    delta : float
        Phase offset between the two trajectories compared for decoherence.
    """

    w_tilde: float
    o_tilde: float
    v: float = 0.0
    beta: float = ZERO_TEMPERATURE
    a: float = 1e-6
    lambda_c: float = 1.0
    g_c: float = 1.0
    q0: float = 1.0
    delta: float = math.pi / 2

    def __post_init__(self):
        for name in ("w_tilde", "o_tilde", "a", "q0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not (0.0 <= self.v < 1.0):
            raise ValueError(f"v must satisfy 0 <= v < 1, got {self.v!r}")
        if not (self.beta > 0) or math.isnan(self.beta):
            raise ValueError(f"beta must be > 0 or ZERO_TEMPERATURE, got {self.beta!r}")
        for name in ("lambda_c", "g_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")

    @property
    def zero_temperature(self):
        return _is_zero_temperature(self.beta)

    @property
    def plate_coupling(self):
        """Dimensionless plate coupling ``a**1.5 * lambda_c``."""
        return self.a**1.5 * self.lambda_c

    def with_plate_coupling(self, coupling):
        """Copy with ``lambda_c`` chosen so that ``a**1.5 * lambda_c == coupling``."""
        return dataclasses.replace(self, lambda_c=coupling / self.a**1.5)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def bose_occupation(x, beta):
    """Bose-Einstein occupation ``1/(exp(x*beta) - 1)``.

    Evaluated through ``expm1`` so that ``x*beta << 1`` keeps full relative
    precision.  Accepts scalars or arrays for ``x``; ``beta`` is scalar.

    Raises
    ------
    ValueError
        If any ``x`` is negative, or zero at finite ``beta``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("bose_occupation needs x >= 0 (pass |k0|)")
    if _is_zero_temperature(beta):
        out = np.zeros_like(xa)
    else:
        if not beta > 0:
            raise ValueError(f"beta must be > 0, got {beta!r}")
        if np.any(xa == 0):
            raise ValueError("occupation diverges at x = 0 for finite beta")
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(xa * beta)
    if np.ndim(x) == 0:
        return float(out)
    return out


def zeta_2d(k1, k2, p):
    """``(k1*v - w)**2 - k1**2 - k2**2``; nonnegative on the light-cone region."""
    u = k1 * p.v - p.w_tilde
    return u * u - k1 * k1 - k2 * k2


def zeta_1(k1, p):
    u = k1 * p.v - p.w_tilde
    return p.v * p.v * (u * u - k1 * k1) + p.w_tilde**2


def zeta_pm(k2, sign, p):
    """``v**2 O**2 - (w +/- O)**2 - v**2 k2**2`` for ``sign`` in {+1, -1}."""
    if sign not in (1, -1, "+", "-"):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    s = 1.0 if sign in (1, "+") else -1.0
    v, w, o = p.v, p.w_tilde, p.o_tilde
    return v * v * o * o - (w + s * o) ** 2 - v * v * k2 * k2


def vartheta(p):
    v, w, o = p.v, p.w_tilde, p.o_tilde
    return v * v * o * o - (w - o) ** 2


def _exp_n2(x):
    # n_B(x)**2 * exp(x) for unit beta, written in terms of exp(-x)
    em = math.exp(-x)
    return em / (-math.expm1(-x)) ** 2


def _x_coth_half(x):
    # x*(e^x + 1)/(e^x - 1) with the x -> 0 limit of 2
    if x < 1e-4:
        return 2.0 + x * x / 6.0
    return x / math.tanh(0.5 * x)


def f_thermal(p):
    """Thermal ``v**2`` weight of the vacuum influence action, as printed.

    ``x n^2 e^x / 4 * (8 + x (e^x+1)/(e^x-1))`` with ``x = w*beta``.  This is the
    literal published combination; :func:`f_thermal_consistent` is the one that
    matches the small-velocity expansion of the exact integral.
    """
    if p.zero_temperature:
        return 0.0
    x = p.w_tilde * p.beta
    return x * _exp_n2(x) / 4.0 * (8.0 + _x_coth_half(x))


def f_thermal_consistent(p):
    """Thermal ``v**2`` weight that reproduces the exact integral to O(v**4).

    Differs from :func:`f_thermal` by the sign of the second-derivative piece:
    ``x n^2 e^x / 4 * (8 - x (e^x+1)/(e^x-1))``.
    """
    if p.zero_temperature:
        return 0.0
    x = p.w_tilde * p.beta
    return x * _exp_n2(x) / 4.0 * (8.0 - _x_coth_half(x))

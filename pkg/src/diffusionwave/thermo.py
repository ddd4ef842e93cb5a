"""Barotropic pressure laws and the thermodynamic potentials they induce.

A law p(z) = k z^gamma comes with an internal-energy potential h linked to it
through p = z h' - h and h'' = p'/z.  Relative (Bregman) versions of p and h
are the basic bricks of every entropy diagnostic in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["PressureLaw", "entropy_generator"]


@dataclass(frozen=True)
class PressureLaw:
    """gamma-law pressure p(z) = k z^gamma with k > 0 and gamma >= 1."""

    k: float
    gamma: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"pressure coefficient must be positive, got k={self.k}")
        if not self.gamma >= 1:
            raise DomainError(f"adiabatic exponent must be >= 1, got gamma={self.gamma}")

    # -- pressure -----------------------------------------------------------

    def pressure(self, z):
        """Return (p, p') at density z >= 0.

        At z = 0: p = 0 and p' = 0 for gamma > 1, p' = k for gamma = 1.
        """
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("density must be nonnegative")
        k, g = self.k, self.gamma
        p = k * z**g
        if g == 1.0:
            dp = np.full_like(z, k)
        else:
            with np.errstate(divide="ignore"):
                dp = np.where(z > 0, k * g * z ** (g - 1), 0.0)
        if p.ndim == 0:
            return float(p), float(dp)
        return p, dp

    # -- potential ----------------------------------------------------------

    def potential(self, z):
        """Return (h, h', h'') at density z.

        gamma > 1:  h = k z^gamma / (gamma-1); z = 0 is allowed (h = h' = 0,
        h'' follows the power formula and may be infinite for gamma < 2).
        gamma = 1:  h = k z log z, defined for z > 0 only.
        """
        z = np.asarray(z, dtype=float)
        if np.any(z < 0):
            raise DomainError("density must be nonnegative")
        k, g = self.k, self.gamma
        if g == 1.0:
            if np.any(z == 0):
                raise DomainError("h'(z) diverges at z = 0 for gamma = 1")
            h = k * z * np.log(z)
            dh = k * (np.log(z) + 1.0)
            d2h = k / z
        else:
            h = k / (g - 1.0) * z**g
            dh = k * g / (g - 1.0) * np.where(z > 0, z ** (g - 1), 0.0)
            with np.errstate(divide="ignore"):
                d2h = np.where(z > 0, k * g * z ** (g - 2), _d2h_at_zero(k, g))
        if h.ndim == 0:
            return float(h), float(dh), float(d2h)
        return h, dh, d2h

    # -- relative quantities ------------------------------------------------

    def relative(self, rho, rho_bar):
        """Bregman distances (h_rel, p_rel) of rho from the reference rho_bar.

        h_rel = h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar) >= 0, and
        analogously for the pressure; for gamma-laws p_rel = (gamma-1) h_rel.
        A vacuum reference rho_bar = 0 is only admissible for gamma > 1.
        """
        rho = np.asarray(rho, dtype=float)
        rho_bar = np.asarray(rho_bar, dtype=float)
        if np.any(rho < 0) or np.any(rho_bar < 0):
            raise DomainError("densities must be nonnegative")
        if self.gamma == 1.0 and np.any(rho_bar == 0):
            raise DomainError("vacuum reference requires gamma > 1")
        h = self._h_value(rho)
        hb = self._h_value(rho_bar)
        _, dhb, _ = self.potential(rho_bar)
        p, _ = self.pressure(rho)
        pb, dpb = self.pressure(rho_bar)
        h_rel = h - hb - dhb * (rho - rho_bar)
        p_rel = np.asarray(p) - pb - dpb * (rho - rho_bar)
        if h_rel.ndim == 0:
            return float(h_rel), float(p_rel)
        return h_rel, p_rel

    def _h_value(self, z):
        # h alone, with the limit value h(0) = 0 taken for gamma = 1 as well
        z = np.asarray(z, dtype=float)
        if self.gamma == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(z > 0, self.k * z * np.log(np.where(z > 0, z, 1.0)), 0.0)
        return self.k / (self.gamma - 1.0) * z**self.gamma

    # -- vacuum admissibility ----------------------------------------------

    def vacuum_admissible(self):
        """Whether relative quantities against rho_bar = 0 are defined.

        Returns (ok, c) where c is the least constant with p'(z) <= c p(z)/z;
        for gamma-laws that constant is gamma, and admissibility holds exactly
        for gamma > 1 (the integral of p/z^2 near zero diverges for gamma = 1).
        """
        if self.gamma > 1.0:
            return True, self.gamma
        return False, None


def _d2h_at_zero(k, g):
    if g > 2:
        return 0.0
    if g == 2:
        return k * g
    return math.inf


def entropy_generator(exponent, z):
    """Convex generator F_p with F_p''(z) = z^(p-2) and F_p(1) = F_p'(1) = 0.

    Three branches: power form for p outside {0, 1}, z log z - z + 1 for
    p = 1, and z - log z - 1 for p = 0.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("entropy generator requires z > 0")
    p = float(exponent)
    if p == 1.0:
        out = z * np.log(z) - z + 1.0
    elif p == 0.0:
        out = z - np.log(z) - 1.0
    else:
        out = (z**p - p * z + p - 1.0) / (p * (p - 1.0))
    if out.ndim == 0:
        return float(out)
    return out

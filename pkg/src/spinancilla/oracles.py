"""Closed-form references: free-fermion chain solution and the J = 0 boson orbit.

The chain maps to free fermions with dispersion
epsilon_k = |J| sqrt(1 + h^2 - 2 h cos k); the even-parity ground state
occupies the antiperiodic momenta k = pi (2m + 1) / L.  At J = 0 the
coupled model is a displaced oscillator per collective-S_x sector, giving
the boson occupation in closed form.
"""

from __future__ import annotations

import numpy as np

from .hilbert import ConfigurationError, ModelParams


def _radicand(k: np.ndarray, h: float) -> np.ndarray:
    # (1-h)^2 + 4h sin^2(k/2) equals 1 + h^2 - 2h cos k without the
    # catastrophic cancellation near k = 0, h = 1
    return (1.0 - h) ** 2 + 4.0 * h * np.sin(k / 2.0) ** 2


def dispersion(k, h: float, J: float):
    """Quasiparticle energy epsilon_k; accepts scalar or array momenta."""
    if J == 0:
        raise ConfigurationError("dispersion needs |J| > 0")
    k = np.asarray(k, dtype=float)
    eps = abs(J) * np.sqrt(_radicand(k, h))
    return float(eps) if eps.ndim == 0 else eps


def group_velocity(k, h: float, J: float):
    """Analytic d(epsilon)/dk."""
    if J == 0:
        raise ConfigurationError("group velocity needs |J| > 0")
    k = np.asarray(k, dtype=float)
    radicand = _radicand(k, h)
    vel = np.where(
        radicand > 0,
        abs(J) * h * np.sin(k) / np.sqrt(np.where(radicand > 0, radicand, 1.0)),
        0.0,
    )
    return float(vel) if vel.ndim == 0 else vel


def max_group_velocity(h: float, J: float) -> float:
    """Fastest quasiparticle, |J| min(1, h); bounds the entanglement cone."""
    if h < 0:
        raise ConfigurationError(f"field must be non-negative, got h={h}")
    return abs(J) * min(1.0, h)


def antiperiodic_momenta(L: int) -> np.ndarray:
    """Momentum set k = pi (2m + 1) / L, m = 0..L-1 (even-parity sector)."""
    return np.pi * (2.0 * np.arange(L) + 1.0) / L


def tfic_ground_energy(L: int, h: float, J: float) -> float:
    """Ground state energy of the periodic chain, -sum_k epsilon_k over the
    antiperiodic momenta (the even-fermion sector holds the ground state)."""
    if L % 2:
        raise ConfigurationError(f"ground-energy formula needs even L, got {L}")
    return float(-np.sum(dispersion(antiperiodic_momenta(L), h, J)))


def displaced_occupation(t, m: float, params: ModelParams):
    """Boson occupation <N(t)> at J = 0 from an S_x eigenstate (eigenvalue m)
    times vacuum: (2 g / omega_c)^2 sin^2(omega_c t / 2) with g = lam m / sqrt(L)."""
    if abs(m) > params.L:
        raise ConfigurationError(f"|m| cannot exceed L={params.L}, got {m}")
    g = params.lam * m / np.sqrt(params.L)
    t = np.asarray(t, dtype=float)
    occ = (2.0 * g / params.omega_c) ** 2 * np.sin(params.omega_c * t / 2.0) ** 2
    return float(occ) if occ.ndim == 0 else occ

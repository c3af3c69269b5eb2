"""Hamiltonian assembly for the chain, the ancilla coupling, and helpers.

The chain term is H = -J sum_i sigma^z_i sigma^z_{i+1} + h sum_i sigma^x_i
with a wraparound bond on periodic chains; J is a signed input and is used
exactly as given.  The ancilla term is
H = omega_c a^dag a + (lam/sqrt(L)) (a^dag + a) sum_i sigma^x_i with the
ladder operators hard-truncated at level q-1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    ConfigurationError,
    ModelParams,
    lowering_operator,
    number_operator,
)

_AXES = ("x", "y", "z")


def _spin_z_values(L: int) -> np.ndarray:
    """Per-config z eigenvalues, shape (2^L, L); bit 1 = up = +1."""
    configs = np.arange(1 << L)
    return 2.0 * ((configs[:, None] >> np.arange(L)) & 1) - 1.0


def ising_bond_diagonal(L: int, periodic: bool = True) -> np.ndarray:
    """Diagonal of sum_i sigma^z_i sigma^z_{i+1} over spin configs."""
    z = _spin_z_values(L)
    bonds = L if periodic else L - 1
    total = np.zeros(1 << L)
    for i in range(bonds):
        total += z[:, i] * z[:, (i + 1) % L]
    return total


@lru_cache(maxsize=64)
def collective_spin_chain(axis: str, L: int) -> sp.csr_matrix:
    """S_mu = sum_i sigma^mu_i on the 2^L spin space."""
    if axis not in _AXES:
        raise ConfigurationError(f"axis must be one of {_AXES}, got {axis!r}")
    dim = 1 << L
    configs = np.arange(dim)
    if axis == "z":
        diag = 2.0 * np.bitwise_count(configs) - L
        return sp.diags(diag, format="csr")
    rows = np.empty(L * dim, dtype=np.int64)
    vals = np.empty(L * dim, dtype=complex if axis == "y" else float)
    for i in range(L):
        flipped = configs ^ (1 << i)
        rows[i * dim : (i + 1) * dim] = flipped
        if axis == "x":
            vals[i * dim : (i + 1) * dim] = 1.0
        else:
            # sigma^y flips the bit with amplitude +i from up, -i from down
            bit = (configs >> i) & 1
            vals[i * dim : (i + 1) * dim] = 1.0j * (2.0 * bit - 1.0)
    cols = np.tile(configs, L)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def ising_chain_matrix(L: int, J: float, h: float, periodic: bool = True) -> sp.csr_matrix:
    """Chain-only Hamiltonian on the 2^L spin space (no boson factor)."""
    ham = sp.diags(-J * ising_bond_diagonal(L, periodic), format="csr")
    if h != 0.0:
        ham = (ham + h * collective_spin_chain("x", L)).tocsr()
    ham.sort_indices()
    return ham


@lru_cache(maxsize=16)
def build_ising(params: ModelParams) -> sp.csr_matrix:
    """Chain Hamiltonian embedded in the composite space (identity on the boson)."""
    chain = ising_chain_matrix(params.L, params.J, params.h, params.periodic)
    out = sp.kron(sp.identity(params.q, format="csr"), chain, format="csr")
    out.sort_indices()
    return out


@lru_cache(maxsize=16)
def build_dicke(params: ModelParams) -> sp.csr_matrix:
    """Ancilla energy plus the uniform transverse spin-boson coupling."""
    if params.lam != 0.0 and params.q < 2:
        raise ConfigurationError("nonzero coupling needs at least two boson levels")
    spin_dim = params.spin_dim
    ham = params.omega_c * sp.kron(
        number_operator(params.q), sp.identity(spin_dim, format="csr"), format="csr"
    )
    if params.lam != 0.0:
        a = lowering_operator(params.q)
        quadrature = (a + a.T).tocsr()
        coupling = sp.kron(quadrature, collective_spin_chain("x", params.L), format="csr")
        ham = (ham + (params.lam / np.sqrt(params.L)) * coupling).tocsr()
    out = ham.tocsr()
    out.sort_indices()
    return out


@lru_cache(maxsize=16)
def build_hamiltonian(params: ModelParams) -> sp.csr_matrix:
    """Full H = chain + ancilla terms on the composite space."""
    out = (build_ising(params) + build_dicke(params)).tocsr()
    out.sort_indices()
    return out


@lru_cache(maxsize=32)
def collective_spin(axis: str, params: ModelParams) -> sp.csr_matrix:
    """S_mu tensored with the identity on the ancilla."""
    chain = collective_spin_chain(axis, params.L)
    out = sp.kron(sp.identity(params.q, format="csr"), chain, format="csr")
    out.sort_indices()
    return out


def boson_number(params: ModelParams) -> sp.csr_matrix:
    """a^dag a embedded in the composite space."""
    return sp.kron(
        number_operator(params.q), sp.identity(params.spin_dim, format="csr"), format="csr"
    )


def build_displaced(params: ModelParams) -> sp.csr_matrix:
    """J = 0 Hamiltonian rebuilt from displaced boson operators; test oracle only.

    b = a + lam/(sqrt(L) omega_c) S_x removes the spin-boson coupling:
    H = omega_c b^dag b - lam^2/(L omega_c) S_x^2 + h S_x.  Completing the
    square produces the quadratic S_x term with a minus sign; since S_x
    commutes with a, the identity holds exactly even on the truncated space.
    """
    if params.J != 0.0:
        raise ConfigurationError("displaced frame is exact only at J = 0")
    spin_dim = params.spin_dim
    sx = sp.kron(
        sp.identity(params.q, format="csr"),
        collective_spin_chain("x", params.L),
        format="csr",
    )
    a_full = sp.kron(
        lowering_operator(params.q), sp.identity(spin_dim, format="csr"), format="csr"
    )
    shift = params.lam / (np.sqrt(params.L) * params.omega_c)
    b = (a_full + shift * sx).tocsr()
    ham = params.omega_c * (b.conj().T @ b)
    ham = ham - (params.lam**2 / (params.L * params.omega_c)) * (sx @ sx)
    ham = ham + params.h * sx
    out = ham.tocsr()
    out.sort_indices()
    return out

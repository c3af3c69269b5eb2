"""Composite Hilbert space: L spin-1/2 sites tensored with one q-level boson.

Index conventions (frozen; all other modules rely on them):

* flat index = boson_level * 2**L + spin_config, so the spin configuration
  is the fast index and spin partial traces stay cache friendly.
* spin_config is an L-bit integer; bit i is the spin at site i, with bit
  value 1 meaning "up" along z.
* Single-site 2x2 matrices are written in the (|up>, |down>) basis, i.e.
  sigma_z = diag(+1, -1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DIM_CEILING_DEFAULT = 2**21

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
IDENTITY_2 = np.eye(2)


class ConfigurationError(ValueError):
    """Raised for parameter sets that violate a model invariant."""


class SmallAncillaWarning(UserWarning):
    """Boson truncation q <= L: results may not be converged in q."""


@dataclass(frozen=True)
class ModelParams:
    """Full parameter point of the coupled chain-ancilla model.

    Energies are in units of |J|; times elsewhere are in units of 1/|J|.
    ``lam`` is the spin-ancilla coupling strength (the bare coupling, not
    the lam**2/omega_c knob the CLI exposes).
    """

    L: int
    q: int
    J: float = -1.0
    h: float = 0.0
    omega_c: float = 0.5
    lam: float = 0.0
    periodic: bool = True
    dim_ceiling: int = field(default=DIM_CEILING_DEFAULT, repr=False)

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ConfigurationError(f"need at least two sites, got L={self.L}")
        if self.q < 1:
            raise ConfigurationError(f"boson dimension must be >= 1, got q={self.q}")
        if self.omega_c <= 0:
            raise ConfigurationError(f"omega_c must be positive, got {self.omega_c}")
        dim = (1 << self.L) * self.q
        if dim > self.dim_ceiling:
            raise ConfigurationError(
                f"composite dimension 2^{self.L} * {self.q} = {dim} exceeds "
                f"the ceiling {self.dim_ceiling}"
            )
        if self.q <= self.L:
            warnings.warn(
                f"q={self.q} <= L={self.L}; converged results need q >> L",
                SmallAncillaWarning,
                stacklevel=2,
            )

    @property
    def spin_dim(self) -> int:
        return 1 << self.L

    @property
    def lambda2_over_omega(self) -> float:
        return self.lam**2 / self.omega_c


def composite_dim(params: ModelParams) -> int:
    """Dimension of the composite space, 2**L * q."""
    return params.spin_dim * params.q


def compose_index(spin_config: int, boson_level: int, params: ModelParams) -> int:
    """Flat index of a basis state from its (spin_config, boson_level) pair."""
    if not 0 <= spin_config < params.spin_dim:
        raise IndexError(f"spin_config {spin_config} out of range for L={params.L}")
    if not 0 <= boson_level < params.q:
        raise IndexError(f"boson_level {boson_level} out of range for q={params.q}")
    return boson_level * params.spin_dim + spin_config


def decompose_index(flat: int, params: ModelParams) -> tuple[int, int]:
    """Inverse of :func:`compose_index`; returns (spin_config, boson_level)."""
    if not 0 <= flat < composite_dim(params):
        raise IndexError(f"flat index {flat} out of range")
    return flat % params.spin_dim, flat // params.spin_dim


@dataclass(frozen=True)
class SubsystemSpec:
    """Which tensor factors survive a partial trace.

    ``retained_spins`` is an ordered tuple of site indices; the j-th entry
    becomes bit j of the reduced spin index.  The complement (including the
    ancilla unless ``retain_ancilla``) is traced out.
    """

    retained_spins: tuple[int, ...] = ()
    retain_ancilla: bool = False

    def __post_init__(self) -> None:
        if len(set(self.retained_spins)) != len(self.retained_spins):
            raise ConfigurationError("duplicate site in retained_spins")
        if not self.retained_spins and not self.retain_ancilla:
            raise ConfigurationError("at least one factor must be retained")

    def validate(self, params: ModelParams) -> None:
        for site in self.retained_spins:
            if not 0 <= site < params.L:
                raise ConfigurationError(f"site {site} out of range for L={params.L}")

    def retained_dim(self, params: ModelParams) -> int:
        dim = 1 << len(self.retained_spins)
        if self.retain_ancilla:
            dim *= params.q
        return dim

    @classmethod
    def spins(cls, L: int) -> "SubsystemSpec":
        """All spin sites, ancilla traced out."""
        return cls(retained_spins=tuple(range(L)), retain_ancilla=False)

    @classmethod
    def ancilla(cls) -> "SubsystemSpec":
        """Ancilla only, every spin traced out."""
        return cls(retained_spins=(), retain_ancilla=True)

    @classmethod
    def half_chain(cls, L: int, which: str = "low") -> "SubsystemSpec":
        """Half of the chain: sites [0, L/2) for "low", [L/2, L) for "high"."""
        if L % 2:
            raise ConfigurationError(f"half-chain split needs even L, got {L}")
        if which == "low":
            return cls(retained_spins=tuple(range(L // 2)))
        if which == "high":
            return cls(retained_spins=tuple(range(L // 2, L)))
        raise ConfigurationError(f"unknown half {which!r}")


def lowering_operator(q: int) -> sp.csr_matrix:
    """Truncated boson annihilation operator a on q levels; a kills |q-1> + 1 level up."""
    if q == 1:
        return sp.csr_matrix((1, 1))
    amp = np.sqrt(np.arange(1.0, q))
    return sp.diags(amp, offsets=1, shape=(q, q), format="csr")


def number_operator(q: int) -> sp.csr_matrix:
    return sp.diags(np.arange(q, dtype=float), format="csr")


def site_operator_on_chain(op2x2: np.ndarray, site: int, L: int) -> sp.csr_matrix:
    """2^L x 2^L operator acting as op2x2 on ``site`` and identity elsewhere.

    op2x2 is given in the (|up>, |down>) basis; the chain basis follows the
    bit convention of this module (bit value 1 = up), so the local matrix
    index is 1 - bit.
    """
    op = np.asarray(op2x2)
    if op.shape != (2, 2):
        raise ConfigurationError(f"site operator must be 2x2, got {op.shape}")
    if not 0 <= site < L:
        raise IndexError(f"site {site} out of range for L={L}")
    dim = 1 << L
    configs = np.arange(dim)
    bit = (configs >> site) & 1
    rows, cols, vals = [], [], []
    for b_from in (0, 1):
        src = configs[bit == b_from]
        for b_to in (0, 1):
            element = op[1 - b_to, 1 - b_from]
            if element == 0:
                continue
            dst = (src & ~(1 << site)) | (b_to << site)
            rows.append(dst)
            cols.append(src)
            vals.append(np.full(src.size, element))
    if not rows:
        return sp.csr_matrix((dim, dim))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    out = mat.tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def embed_site_operator(op2x2: np.ndarray, site: int, params: ModelParams) -> sp.csr_matrix:
    """Embed a single-site operator into the full composite space."""
    chain_op = site_operator_on_chain(op2x2, site, params.L)
    return sp.kron(sp.identity(params.q, format="csr"), chain_op, format="csr")


def embed_boson_operator(opqxq, params: ModelParams) -> sp.csr_matrix:
    """Embed a q x q boson operator into the full composite space."""
    op = sp.csr_matrix(opqxq)
    if op.shape != (params.q, params.q):
        raise ConfigurationError(
            f"boson operator must be {params.q}x{params.q}, got {op.shape}"
        )
    return sp.kron(op, sp.identity(params.spin_dim, format="csr"), format="csr")


def hermiticity_defect(mat) -> float:
    """max |M - M^dagger| over all elements (0.0 for an exactly Hermitian M)."""
    if sp.issparse(mat):
        diff = (mat - mat.conj().T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
    m = np.asarray(mat)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def assert_hermitian(mat, rel_tol: float = 1e-13) -> None:
    """Enforce the Hermiticity invariant max|M - M^H| <= rel_tol * max|M|."""
    if sp.issparse(mat):
        scale = float(np.max(np.abs(mat.data))) if mat.nnz else 0.0
    else:
        scale = float(np.max(np.abs(mat))) if np.asarray(mat).size else 0.0
    defect = hermiticity_defect(mat)
    if defect > rel_tol * max(scale, 1e-300):
        raise ConfigurationError(
            f"operator is not Hermitian: defect {defect:.3e} vs scale {scale:.3e}"
        )

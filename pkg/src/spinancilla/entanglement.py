"""Information-theoretic metrics: partial traces, entropies, QFI, and MEL.

All entropies use the natural logarithm.  The Fisher information follows
the spectral sum F = 2 sum_{ab} (v_a - v_b)^2 / (v_a + v_b) |<u_a|O|u_b>|^2
over density-matrix eigenpairs with v_a + v_b above a degeneracy cutoff;
for a pure state this reduces exactly to 4 * variance.  Multipartite
entanglement loss compares the collective-operator variance of the full
pure state against F/4 evaluated on the spin reduced density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .dynamics import PureState
from .hamiltonian import collective_spin, collective_spin_chain
from .hilbert import ConfigurationError, ModelParams, SubsystemSpec

QFI_DEGENERACY_CUTOFF = 1e-12
DENSE_RDM_CEILING = 4096


class InvariantViolation(RuntimeError):
    """A hard numerical invariant (norm, trace, PSD, bound) failed."""


@dataclass
class ReducedDensityMatrix:
    """Dense Hermitian, PSD, trace-one matrix over a retained subsystem."""

    matrix: np.ndarray
    subsystem: SubsystemSpec

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(
        self,
        trace_tol: float = 1e-10,
        herm_tol: float = 1e-12,
        psd_tol: float = 1e-10,
    ) -> None:
        trace_err = abs(np.trace(self.matrix).real - 1.0)
        if trace_err > trace_tol:
            raise InvariantViolation(f"RDM trace deviates from 1 by {trace_err:.3e}")
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if herm > herm_tol:
            raise InvariantViolation(f"RDM Hermiticity defect {herm:.3e}")
        lowest = float(np.linalg.eigvalsh(_symmetrize(self.matrix)).min())
        if lowest < -psd_tol:
            raise InvariantViolation(f"RDM eigenvalue {lowest:.3e} below PSD floor")


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def partial_trace(
    state: PureState,
    keep: SubsystemSpec,
    params: ModelParams,
    dense_ceiling: int = DENSE_RDM_CEILING,
) -> ReducedDensityMatrix:
    """Trace every factor not named in ``keep`` out of a pure composite state."""
    keep.validate(params)
    state.check_normalized()
    dim_keep = keep.retained_dim(params)
    if dim_keep > dense_ceiling:
        raise ConfigurationError(
            f"retained dimension {dim_keep} exceeds dense ceiling {dense_ceiling}"
        )
    L = params.L
    # tensor axes: 0 = boson, 1 + (L - 1 - i) = site i (fast spin index last)
    psi = state.amplitudes.reshape((params.q,) + (2,) * L)
    axis_of_site = {site: 1 + (L - 1 - site) for site in range(L)}
    kept_axes = []
    if keep.retain_ancilla:
        kept_axes.append(0)
    # bit j of the reduced spin index is retained_spins[j]; row-major order
    # means the last listed axis varies fastest
    kept_axes.extend(axis_of_site[site] for site in reversed(keep.retained_spins))
    env_axes = [ax for ax in range(L + 1) if ax not in kept_axes]
    mat = psi.transpose(kept_axes + env_axes).reshape(dim_keep, -1)
    rho = mat @ mat.conj().T
    return ReducedDensityMatrix(rho, keep)


def _probabilities(matrix: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh(_symmetrize(matrix))
    return np.clip(vals, 0.0, 1.0)


def entropy_of_probabilities(probs: np.ndarray) -> float:
    """-sum p ln p with 0 ln 0 := 0; probabilities are clamped to [0, 1]."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log(p)))


def vn_entropy(rho) -> float:
    """von Neumann entropy in nats of an RDM (or raw density matrix)."""
    matrix = rho.matrix if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho)
    return entropy_of_probabilities(_probabilities(matrix))


def mutual_information_half(
    state: PureState, params: ModelParams, convention: str = "eq2"
) -> float:
    """Half-chain mutual information with the ancilla traced out.

    I(ab;c) = S(a|bc) + S(b|ac) - S(ab|c) with a and b the two half-chains
    and c the ancilla.  convention="half" emits half of that value (the
    variant S_half - S_ancilla/2 under half-chain symmetry).
    """
    if params.L % 2:
        raise ConfigurationError(f"half-chain mutual information needs even L, got {params.L}")
    if convention not in ("eq2", "half"):
        raise ConfigurationError(f"unknown MI convention {convention!r}")
    s_low = vn_entropy(partial_trace(state, SubsystemSpec.half_chain(params.L, "low"), params))
    s_high = vn_entropy(partial_trace(state, SubsystemSpec.half_chain(params.L, "high"), params))
    s_spins = vn_entropy(partial_trace(state, SubsystemSpec.spins(params.L), params))
    value = s_low + s_high - s_spins
    return 0.5 * value if convention == "half" else value


def variance(state: PureState, operator) -> float:
    """<O^2> - <O>^2 for a Hermitian operator on the composite state."""
    psi = state.amplitudes
    w = operator @ psi
    mean = np.vdot(psi, w).real
    second = np.vdot(w, w).real
    return float(second - mean**2)


def qfi(rho, operator, cutoff: float = QFI_DEGENERACY_CUTOFF) -> float:
    """Quantum Fisher information of a density matrix for a Hermitian generator.

    Uses the full eigendecomposition; pairs whose eigenvalue sum falls
    below ``cutoff`` contribute nothing.
    """
    matrix = rho.matrix if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho)
    vals, vecs = np.linalg.eigh(_symmetrize(matrix))
    vals = np.clip(vals, 0.0, 1.0)
    op_eig = vecs.conj().T @ (operator @ vecs)
    sums = vals[:, None] + vals[None, :]
    diffs = vals[:, None] - vals[None, :]
    weights = np.where(sums > cutoff, diffs**2 / np.where(sums > cutoff, sums, 1.0), 0.0)
    return float(2.0 * np.sum(weights * np.abs(op_eig) ** 2))


def fisher_density(F: float, params: ModelParams) -> tuple[float, int]:
    """Fisher density f = F/L and the witnessed partite level floor(f)+1 (0 if f = 0)."""
    if F < 0:
        raise ConfigurationError(f"QFI must be non-negative, got {F}")
    f = F / params.L
    level = int(np.floor(f)) + 1 if f > 0 else 0
    return f, level


def cramer_rao_bound(F: float) -> float:
    """Best phase variance 1/F allowed by the Fisher information (inf at F = 0)."""
    return float("inf") if F == 0 else 1.0 / F


def mel(state: PureState, mu: str, params: ModelParams) -> float:
    """Multipartite entanglement loss along the collective axis mu.

    variance of S_mu tensor identity on the pure composite state, minus a
    quarter of the QFI of the spin reduced density matrix for the reduced
    S_mu.  Zero whenever the spin sector is pure.
    """
    full_op = collective_spin(mu, params)
    var = variance(state, full_op)
    rho = partial_trace(state, SubsystemSpec.spins(params.L), params)
    reduced_op = collective_spin_chain(mu, params.L)
    return var - 0.25 * qfi(rho, reduced_op)


@dataclass
class MetricSample:
    """All per-time metrics of one quench record (CSV column order)."""

    t: float
    S_vN_A: float
    MI_half: float
    var_Sx: float
    var_Sz: float
    F_Sx: float
    F_Sz: float
    f_Sx: float
    f_Sz: float
    MEL_Sx: float
    MEL_Sz: float
    n_boson: float
    mag_x: float
    mag_z: float
    zz_nn: float
    energy: float
    norm_err: float


METRIC_FIELDS = tuple(f.name for f in fields(MetricSample))


def _qfi_from_spectrum(
    probs: np.ndarray,
    vecs: np.ndarray,
    operator,
    cutoff: float = QFI_DEGENERACY_CUTOFF,
) -> float:
    """QFI from the nonzero spectral block of a low-rank density matrix.

    ``vecs`` holds the eigenvectors with eigenvalue above ``cutoff`` as
    columns; eigenpairs outside that block carry eigenvalue zero, and their
    pair weights reduce to v_a, summed exactly via <u_a|O^2|u_a>.
    """
    if probs.size == 0:
        return 0.0
    ov = operator @ vecs
    op_eig = vecs.conj().T @ ov
    second_moment = np.einsum("ia,ia->a", ov.conj(), ov).real
    in_block = np.sum(np.abs(op_eig) ** 2, axis=1)
    sums = probs[:, None] + probs[None, :]
    diffs = probs[:, None] - probs[None, :]
    weights = np.where(sums > cutoff, diffs**2 / np.where(sums > cutoff, sums, 1.0), 0.0)
    block_part = 2.0 * np.sum(weights * np.abs(op_eig) ** 2)
    null_part = 4.0 * np.sum(probs * (second_moment - in_block))
    return float(block_part + null_part)


class MetricCalculator:
    """Evaluates every MetricSample field for one parameter point.

    Operator factors are built once per instance; per-sample work uses the
    singular value decomposition of the amplitude matrix (boson row, spin
    column), whose right singular vectors are the spin RDM eigenvectors.
    """

    def __init__(
        self,
        params: ModelParams,
        hamiltonian,
        mi_convention: str = "eq2",
    ) -> None:
        if params.L % 2:
            raise ConfigurationError("metric evaluation needs even L for the half-chain MI")
        if mi_convention not in ("eq2", "half"):
            raise ConfigurationError(f"unknown MI convention {mi_convention!r}")
        self.params = params
        self.ham = hamiltonian
        self.mi_factor = 0.5 if mi_convention == "half" else 1.0
        L, q = params.L, params.q
        self.sx_full = collective_spin("x", params)
        self.sz_full = collective_spin("z", params)
        self.sx_chain = collective_spin_chain("x", L)
        self.sz_chain = collective_spin_chain("z", L)
        configs = np.arange(1 << L)
        z = 2.0 * ((configs[:, None] >> np.arange(L)) & 1) - 1.0
        bonds = L if params.periodic else L - 1
        zz = np.zeros(1 << L)
        for i in range(bonds):
            zz += z[:, i] * z[:, (i + 1) % L]
        self.zz_nn_diag = np.tile(zz / bonds, q)
        self.n_diag = np.repeat(np.arange(q, dtype=float), 1 << L)
        self.entropy_ceiling = np.log(min(1 << L, q)) if min(1 << L, q) > 1 else 0.0

    def _half_chain_entropies(self, psi: np.ndarray) -> tuple[float, float]:
        L, q = self.params.L, self.params.q
        half = 1 << (L // 2)
        cube = psi.reshape(q, half, half)  # (boson, high sites, low sites)
        svals_low = np.linalg.svd(cube.reshape(q * half, half), compute_uv=False)
        svals_high = np.linalg.svd(
            cube.transpose(0, 2, 1).reshape(q * half, half), compute_uv=False
        )
        return (
            entropy_of_probabilities(svals_low**2),
            entropy_of_probabilities(svals_high**2),
        )

    def sample(self, state: PureState) -> MetricSample:
        params = self.params
        psi = state.amplitudes
        norm_err = abs(float(np.linalg.norm(psi)) - 1.0)
        mat = psi.reshape(params.q, params.spin_dim)
        _, svals, vh = np.linalg.svd(mat, full_matrices=False)
        probs = np.clip(svals**2, 0.0, 1.0)
        s_ancilla = entropy_of_probabilities(probs)

        block = probs > QFI_DEGENERACY_CUTOFF
        # right singular vectors (rows of vh) are spin-RDM eigenvectors
        spin_vecs = vh[block].T
        spin_probs = probs[block]
        f_sx = _qfi_from_spectrum(spin_probs, spin_vecs, self.sx_chain)
        f_sz = _qfi_from_spectrum(spin_probs, spin_vecs, self.sz_chain)

        wx = self.sx_full @ psi
        mean_sx = np.vdot(psi, wx).real
        var_sx = np.vdot(wx, wx).real - mean_sx**2
        wz = self.sz_full @ psi
        mean_sz = np.vdot(psi, wz).real
        var_sz = np.vdot(wz, wz).real - mean_sz**2

        s_low, s_high = self._half_chain_entropies(psi)
        mi = (s_low + s_high - s_ancilla) * self.mi_factor

        density = np.abs(psi) ** 2
        return MetricSample(
            t=float(state.time_tag),
            S_vN_A=s_ancilla,
            MI_half=float(mi),
            var_Sx=float(var_sx),
            var_Sz=float(var_sz),
            F_Sx=f_sx,
            F_Sz=f_sz,
            f_Sx=f_sx / params.L,
            f_Sz=f_sz / params.L,
            MEL_Sx=float(var_sx - 0.25 * f_sx),
            MEL_Sz=float(var_sz - 0.25 * f_sz),
            n_boson=float(density @ self.n_diag),
            mag_x=float(mean_sx / params.L),
            mag_z=float(mean_sz / params.L),
            zz_nn=float(density @ self.zz_nn_diag),
            energy=float(np.vdot(psi, self.ham @ psi).real),
            norm_err=norm_err,
        )

    def check_invariants(self, sample: MetricSample, norm_tol: float = 1e-9) -> None:
        """Hard per-sample invariants: norm, MEL floor, entropy ceiling."""
        if sample.norm_err > norm_tol:
            raise InvariantViolation(
                f"norm error {sample.norm_err:.3e} at t={sample.t} exceeds {norm_tol}"
            )
        for name in ("MEL_Sx", "MEL_Sz"):
            value = getattr(sample, name)
            if value < -1e-8:
                raise InvariantViolation(f"{name} = {value:.3e} below -1e-8 at t={sample.t}")
        if not -1e-9 <= sample.S_vN_A <= self.entropy_ceiling + 1e-9:
            raise InvariantViolation(
                f"S_vN_A = {sample.S_vN_A} outside [0, {self.entropy_ceiling}] at t={sample.t}"
            )

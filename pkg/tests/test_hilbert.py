"""Index conventions, operator embedding, and parameter validation."""

import numpy as np
import pytest
import scipy.sparse as sp

from spinancilla.hilbert import (
    ConfigurationError,
    ModelParams,
    SmallAncillaWarning,
    SubsystemSpec,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    IDENTITY_2,
    compose_index,
    composite_dim,
    decompose_index,
    embed_boson_operator,
    embed_site_operator,
    hermiticity_defect,
    lowering_operator,
    number_operator,
)


@pytest.mark.parametrize(
    "L,q,expected", [(10, 30, 30720), (12, 40, 163840), (2, 1, 4)]
)
def test_composite_dim(L, q, expected):
    assert composite_dim(ModelParams(L=L, q=q)) == expected


def test_dimension_ceiling_rejected():
    with pytest.raises(ConfigurationError):
        ModelParams(L=18, q=40)  # 2^18 * 40 > 2^21


def test_small_ancilla_warns():
    with pytest.warns(SmallAncillaWarning):
        ModelParams(L=8, q=4)


@pytest.mark.parametrize("L,q", [(3, 4), (2, 1), (4, 3)])
def test_index_bijection(L, q):
    params = ModelParams(L=L, q=q)
    seen = set()
    for spin in range(1 << L):
        for boson in range(q):
            flat = compose_index(spin, boson, params)
            assert decompose_index(flat, params) == (spin, boson)
            seen.add(flat)
    assert seen == set(range(composite_dim(params)))


def test_invalid_params():
    with pytest.raises(ConfigurationError):
        ModelParams(L=1, q=4)
    with pytest.raises(ConfigurationError):
        ModelParams(L=4, q=0)
    with pytest.raises(ConfigurationError):
        ModelParams(L=4, q=8, omega_c=0.0)


def test_sigma_z_site0_diagonal():
    # bit 1 = up and sigma_z = diag(+1, -1) in (up, down) order, so the
    # diagonal over flat indices 0..3 (configs 00, 01, 10, 11) alternates
    # starting from down at site 0
    params = ModelParams(L=2, q=1)
    op = embed_site_operator(PAULI_Z, 0, params)
    assert np.allclose(op.toarray().real.diagonal(), [-1.0, 1.0, -1.0, 1.0])


def test_embed_identity_is_identity():
    params = ModelParams(L=3, q=2)
    op = embed_site_operator(IDENTITY_2, 1, params)
    assert (op != sp.identity(composite_dim(params))).nnz == 0


@pytest.mark.parametrize("site", [0, 1, 2])
def test_pauli_involution(site):
    params = ModelParams(L=3, q=2)
    op = embed_site_operator(PAULI_X, site, params)
    diff = (op @ op - sp.identity(composite_dim(params))).tocsr()
    assert diff.nnz == 0 or np.max(np.abs(diff.data)) < 1e-15


def test_disjoint_factors_commute_exactly():
    params = ModelParams(L=4, q=3)
    a = embed_site_operator(PAULI_X, 1, params)
    b = embed_site_operator(PAULI_Z, 3, params)
    comm = a @ b - b @ a
    assert comm.nnz == 0 or np.max(np.abs(comm.data)) == 0.0
    c = embed_boson_operator(number_operator(3), params)
    comm2 = a @ c - c @ a
    assert comm2.nnz == 0 or np.max(np.abs(comm2.data)) == 0.0


def test_embed_preserves_hermiticity():
    params = ModelParams(L=3, q=4)
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        for site in range(3):
            assert hermiticity_defect(embed_site_operator(pauli, site, params)) == 0.0
    n = embed_boson_operator(number_operator(4), params)
    assert hermiticity_defect(n) == 0.0


def test_boson_number_embedding():
    params = ModelParams(L=2, q=3)
    op = embed_boson_operator(number_operator(3), params).toarray().real
    expected = np.repeat([0.0, 1.0, 2.0], 4)
    assert np.allclose(np.diag(op), expected)


def test_vacuum_annihilation_and_ladder_element():
    params = ModelParams(L=2, q=3)
    a = embed_boson_operator(lowering_operator(3), params)
    vacuum = np.zeros(composite_dim(params))
    vacuum[compose_index(0b01, 0, params)] = 1.0
    assert np.linalg.norm(a @ vacuum) == 0.0
    adag = a.conj().T
    lifted = adag @ vacuum
    assert lifted[compose_index(0b01, 1, params)] == pytest.approx(1.0)


def test_ladder_truncation_kills_top_level():
    a = lowering_operator(4)
    top = np.zeros(4)
    top[3] = 1.0
    assert np.linalg.norm(a.conj().T @ top) == 0.0


def test_site_out_of_range():
    params = ModelParams(L=3, q=2)
    with pytest.raises(IndexError):
        embed_site_operator(PAULI_X, 3, params)


def test_boson_dim_mismatch():
    params = ModelParams(L=2, q=3)
    with pytest.raises(ConfigurationError):
        embed_boson_operator(number_operator(4), params)


def test_subsystem_spec_validation():
    with pytest.raises(ConfigurationError):
        SubsystemSpec(retained_spins=(), retain_ancilla=False)
    with pytest.raises(ConfigurationError):
        SubsystemSpec(retained_spins=(0, 0))
    spec = SubsystemSpec(retained_spins=(5,))
    with pytest.raises(ConfigurationError):
        spec.validate(ModelParams(L=4, q=2))
    half = SubsystemSpec.half_chain(4, "high")
    assert half.retained_spins == (2, 3)
    assert SubsystemSpec.spins(3).retained_dim(ModelParams(L=3, q=7)) == 8
    assert SubsystemSpec.ancilla().retained_dim(ModelParams(L=3, q=7)) == 7

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavity_w.subspace import (
    CouplingConfig,
    GroupPartition,
    SubspaceState,
    WState,
    basis_ket,
    fidelity,
    make_w_state,
)

S2 = 1 / math.sqrt(2)
S3 = 1 / math.sqrt(3)


@pytest.mark.parametrize(
    "n, sign, embed, offset, expected",
    [
        (1, -1, 3, 1, [-1, 0, 0, 0]),
        (2, 1, 2, 1, [S2, S2, 0]),
        (3, -1, 5, 1, [-S3, -S3, -S3, 0, 0, 0]),
        (2, -1, 4, 3, [0, 0, -S2, -S2, 0]),
    ],
)
def test_make_w_state(n, sign, embed, offset, expected):
    s = make_w_state(n, sign, embed_into=embed, offset=offset)
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)
    assert s.photonic == 0


@pytest.mark.parametrize("n, embed, offset", [(0, 3, 1), (3, 2, 1), (2, 3, 3), (1, 3, 0)])
def test_make_w_state_rejects_bad_embedding(n, embed, offset):
    with pytest.raises(ValueError):
        make_w_state(n, 1, embed_into=embed, offset=offset)


def test_w_state_type_expands():
    assert WState(3, -1).expand(5) == make_w_state(3, -1, 5)
    with pytest.raises(ValueError):
        WState(2, 0)


@given(st.integers(1, 12), st.sampled_from([1, -1]), st.integers(0, 5))
def test_w_state_structure(n, sign, extra):
    s = make_w_state(n, sign, embed_into=n + extra, offset=1 + extra)
    nonzero = s.atomic[np.abs(s.atomic) > 0]
    assert nonzero.size == n
    assert np.all(nonzero == nonzero[0])
    assert s.photonic == 0
    assert abs(s.norm - 1) < 1e-12


def test_fidelity_examples():
    w_plus = make_w_state(2, 1)
    w_minus = make_w_state(2, -1)
    assert fidelity(w_plus, w_plus) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(w_plus, w_minus) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(basis_ket(2, 1), w_plus) == pytest.approx(0.5, abs=1e-15)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError):
        fidelity(basis_ket(2, 1), basis_ket(3, 1))


@st.composite
def normalized(draw, dim):
    re = draw(st.lists(st.floats(-1, 1), min_size=dim, max_size=dim))
    im = draw(st.lists(st.floats(-1, 1), min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    v[0] += 1.5  # keep away from the zero vector
    return SubspaceState(v / np.linalg.norm(v))


@given(normalized(4), normalized(4), st.floats(0, 2 * math.pi))
def test_fidelity_symmetric_bounded_phase_free(a, b, phi):
    f = fidelity(a, b)
    assert 0 <= f <= 1
    assert f == pytest.approx(fidelity(b, a), abs=1e-14)
    rotated = SubspaceState(a.amplitudes * np.exp(1j * phi))
    assert fidelity(rotated, b) == pytest.approx(f, abs=1e-14)


def test_state_rejects_unnormalized():
    with pytest.raises(ValueError):
        SubspaceState(np.zeros(3))
    with pytest.raises(ValueError):
        SubspaceState([1.0, 1e-5, 0.0])


def test_state_is_immutable():
    s = basis_ket(2, 1)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


@pytest.mark.parametrize("bad", [[], [1.0, 0.0], [1.0, -2.0], [1.0, math.inf], [math.nan]])
def test_coupling_config_validation(bad):
    with pytest.raises(ValueError):
        CouplingConfig(np.array(bad, dtype=float))


def test_coupling_config_units_and_equality_flag():
    cfg = CouplingConfig.of(1.0, 2.0, f_ref=3.0)
    np.testing.assert_allclose(cfg.physical_couplings, [3.0, 6.0])
    assert not cfg.has_equal_couplings
    assert CouplingConfig.uniform(3).has_equal_couplings


def test_group_partition():
    p = GroupPartition(2, 1.5, 3, 0.5)
    assert p.n_atoms == 5
    np.testing.assert_array_equal(p.to_config().couplings, [1.5, 1.5, 0.5, 0.5, 0.5])
    assert p.omega == pytest.approx(math.sqrt(2 * 2.25 + 3 * 0.25))
    for args in [(0, 1, 1, 1), (1, 1, 0, 1), (1, 0, 1, 1), (1, 1, 1, -1)]:
        with pytest.raises(ValueError):
            GroupPartition(*args)

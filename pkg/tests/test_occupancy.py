# tests/test_occupancy.py
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import InvalidDomainError
from app.models import ModelParams, OccupancyConfig, StatisticsKind
from app.occupancy import (
    be_pmf,
    be_pmf_vector,
    count_be,
    count_fd,
    count_mb,
    mb_pmf,
    mb_pmf_vector,
    multiplicity,
    pmf_vector,
)

MB = StatisticsKind.MB
BE = StatisticsKind.BE


# ============================================================
# COMPTAGE
# ============================================================

def test_counting_two_entities_two_states():
    """Test des trois comptages pour N = M = 2"""
    assert count_mb(2, 2) == 4
    assert count_be(2, 2) == 3
    assert count_fd(2, 2) == 1


@pytest.mark.parametrize("N, M", [(0, 0), (0, 3), (1, 1), (3, 2), (5, 5), (10, 4)])
def test_counting_identities(N, M):
    """Test FD <= BE <= MB et cas limites"""
    assert count_be(N, M) <= count_mb(N, M)
    if N <= M:
        assert count_fd(N, M) <= count_be(N, M)
    if N == 0:
        assert count_mb(N, M) == count_be(N, M) == 1


def test_count_be_two_states():
    """Test BE à deux états : N + 1 arrangements"""
    assert all(count_be(N, 2) == N + 1 for N in range(101))


def test_count_fd_pauli_violation():
    """Test FD lève une erreur si N > M"""
    with pytest.raises(InvalidDomainError):
        count_fd(3, 2)


@pytest.mark.parametrize("N, M", [(-1, 2), (2, -1), (3, 0)])
def test_counting_invalid_domain(N, M):
    with pytest.raises(InvalidDomainError):
        count_mb(N, M)
    with pytest.raises(InvalidDomainError):
        count_be(N, M)


@pytest.mark.parametrize("N", [1, 2, 5, 11, 20])
def test_multiplicities_sum_to_mb_count(N):
    """Test sum_n C(N, n) = 2^N"""
    total = sum(multiplicity(OccupancyConfig(n=n, total=N)) for n in range(N + 1))
    assert total == count_mb(N, 2)


def test_occupancy_config_rejects_n_above_total():
    with pytest.raises(ValueError):
        OccupancyConfig(n=4, total=3)


# ============================================================
# PMF MAXWELL-BOLTZMANN
# ============================================================

@pytest.mark.parametrize("n, expected", [(0, 0.0005), (1, 0.0054), (5, 0.2256), (6, 0.2256),
                                         (10, 0.0054), (11, 0.0005)])
def test_mb_pmf_eleven_entities(n, expected):
    """Test des valeurs de référence pour N = 11, p1 = 0.5"""
    value = mb_pmf(OccupancyConfig(n=n, total=11), ModelParams(kind=MB, p1=0.5))
    assert round(value, 4) == expected


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("p1", [0.0, 0.13, 0.5, 0.77, 1.0])
def test_mb_pmf_matches_enumeration(N, p1):
    """Test de la pmf MB contre l'énumération des 2^N affectations"""
    expected = np.zeros(N + 1)
    for assignment in itertools.product([0, 1], repeat=N):
        k = sum(assignment)
        expected[k] += p1 ** k * (1 - p1) ** (N - k)
    np.testing.assert_allclose(mb_pmf_vector(N, p1), expected, rtol=1e-12, atol=1e-15)


def test_mb_pmf_degenerate_probabilities():
    """Test p1 = 0 et p1 = 1 concentrent la masse aux extrémités"""
    assert mb_pmf_vector(7, 0.0).tolist() == [1.0] + [0.0] * 7
    assert mb_pmf_vector(7, 1.0).tolist() == [0.0] * 7 + [1.0]
    assert mb_pmf_vector(80, 1.0)[-1] == pytest.approx(1.0)
    assert mb_pmf_vector(80, 0.0)[0] == pytest.approx(1.0)


def test_mb_pmf_log_space_matches_direct():
    """Test de la continuité entre calcul direct et espace logarithmique"""
    N = 60
    direct = np.array([math.comb(N, k) * 0.3 ** k * 0.7 ** (N - k) for k in range(N + 1)])
    np.testing.assert_allclose(mb_pmf_vector(N, 0.3), direct, rtol=1e-9, atol=1e-300)


# ============================================================
# PMF BOSE-EINSTEIN
# ============================================================

def test_be_pmf_reference_value():
    """Test BE pour n = 7, N = 11, p1 = 0.16"""
    value = be_pmf(OccupancyConfig(n=7, total=11), ModelParams(kind=BE, p1=0.16))
    assert value == pytest.approx(0.06788, abs=1e-5)


@pytest.mark.parametrize("N", [1, 4, 11])
def test_be_pmf_uniform_at_half(N):
    """Test BE uniforme à 1/(N+1) pour p1 = 0.5"""
    np.testing.assert_allclose(be_pmf_vector(N, 0.5), np.full(N + 1, 1 / (N + 1)), rtol=1e-12)


def test_be_pmf_not_uniform_elsewhere():
    pmf = be_pmf_vector(5, 0.3)
    assert np.ptp(pmf) > 0
    assert pmf[0] > pmf[-1]


def test_be_pmf_rejects_empty_configuration():
    with pytest.raises(InvalidDomainError):
        be_pmf_vector(0, 0.5)


def test_pmf_kind_mismatch():
    """Test qu'on ne passe pas des paramètres BE à mb_pmf"""
    cfg = OccupancyConfig(n=1, total=3)
    with pytest.raises(InvalidDomainError):
        mb_pmf(cfg, ModelParams(kind=BE, p1=0.5))
    with pytest.raises(InvalidDomainError):
        be_pmf(cfg, ModelParams(kind=MB, p1=0.5))


def test_scalar_agrees_with_vector():
    cfg = OccupancyConfig(n=3, total=9)
    assert be_pmf(cfg, ModelParams(kind=BE, p1=0.42)) == pytest.approx(be_pmf_vector(9, 0.42)[3])
    assert mb_pmf(cfg, ModelParams(kind=MB, p1=0.42)) == pytest.approx(mb_pmf_vector(9, 0.42)[3])


# ============================================================
# PROPRIÉTÉS
# ============================================================

@pytest.mark.parametrize("kind", [MB, BE])
def test_normalization_sweep(kind):
    """Test que les pmf somment à 1 pour N = 1..100 et p1 sur une grille"""
    grid = np.linspace(0.0, 1.0, 101)
    for N in range(1, 101):
        pmf = pmf_vector(kind, N, grid)
        assert pmf.shape == (len(grid), N + 1)
        assert (pmf >= 0).all()
        np.testing.assert_allclose(pmf.sum(axis=1), 1.0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(N=st.integers(min_value=1, max_value=60),
       milli=st.integers(min_value=1, max_value=999),
       data=st.data())
def test_symmetry_under_state_swap(N, milli, data):
    """Test p(n; N, p1) = p(N - n; N, 1 - p1) pour MB et BE"""
    n = data.draw(st.integers(min_value=0, max_value=N))
    p1 = milli / 1000
    for kind in (MB, BE):
        left = pmf_vector(kind, N, p1)[n]
        right = pmf_vector(kind, N, 1 - p1)[N - n]
        assert left == pytest.approx(right, rel=1e-9, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(N=st.integers(min_value=1, max_value=120),
       p1=st.floats(min_value=0.0, max_value=1.0))
def test_pmf_is_a_distribution(N, p1):
    for kind in (MB, BE):
        pmf = pmf_vector(kind, N, p1)
        assert len(pmf) == N + 1
        assert (pmf >= 0).all()
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)

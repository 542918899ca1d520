import math

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from app.errors import InvalidDomainError
from app.models import ModelParams, OccupancyConfig, StatisticsKind

# Au-delà de ce N, les binomiales sont évaluées en espace logarithmique
LOG_SPACE_THRESHOLD = 50


# ============================================================
# FONCTIONS DE COMPTAGE
# ============================================================

def _check_counts(N: int, M: int) -> None:
    if N < 0 or M < 0:
        raise InvalidDomainError(f"N et M doivent être positifs (N={N}, M={M})")
    if M == 0 and N > 0:
        raise InvalidDomainError(f"{N} entités ne peuvent occuper 0 état")


def count_mb(N: int, M: int) -> int:
    """Nombre d'arrangements d'entités discernables : M^N"""
    _check_counts(N, M)
    return M ** N


def count_be(N: int, M: int) -> int:
    """Nombre d'arrangements d'entités indiscernables : C(N+M-1, N)"""
    _check_counts(N, M)
    if N == 0:
        return 1
    return math.comb(N + M - 1, N)


def count_fd(N: int, M: int) -> int:
    """Nombre d'arrangements avec exclusion de Pauli : C(M, N)"""
    _check_counts(N, M)
    if N > M:
        raise InvalidDomainError(f"exclusion de Pauli violée : N={N} > M={M}")
    return math.comb(M, N)


def multiplicity(cfg: OccupancyConfig) -> int:
    """T(n, 1; N-n, 2) = N! / n!(N-n)!"""
    return math.comb(cfg.total, cfg.n)


# ============================================================
# DISTRIBUTIONS À DEUX ÉTATS
# ============================================================

def mb_pmf_vector(N: int, p1) -> np.ndarray:
    """
    pmf Maxwell-Boltzmann sur n = 0..N.

    `p1` peut être un scalaire (résultat de forme (N+1,)) ou un tableau
    (résultat de forme (len(p1), N+1)).
    """
    if N < 0:
        raise InvalidDomainError(f"N={N} négatif")
    p = np.asarray(p1, dtype=float)
    n = np.arange(N + 1)
    if p.ndim:
        p = p[:, None]

    if N <= LOG_SPACE_THRESHOLD:
        weights = np.array([math.comb(N, k) for k in n], dtype=float)
        return weights * p ** n * (1.0 - p) ** (N - n)

    log_weights = gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
    return np.exp(log_weights + xlogy(n, p) + xlog1py(N - n, -p))


def be_pmf_vector(N: int, p1) -> np.ndarray:
    """pmf Bose-Einstein linéaire : (n p1 + (N-n) p2) / (N(N+1)/2)"""
    if N < 1:
        raise InvalidDomainError("N = 0 : dénominateur nul")
    p = np.asarray(p1, dtype=float)
    n = np.arange(N + 1)
    if p.ndim:
        p = p[:, None]
    return (n * p + (N - n) * (1.0 - p)) / (N * (N + 1) / 2)


def pmf_vector(kind: StatisticsKind, N: int, p1) -> np.ndarray:
    if StatisticsKind(kind) is StatisticsKind.MB:
        return mb_pmf_vector(N, p1)
    return be_pmf_vector(N, p1)


def mb_pmf(cfg: OccupancyConfig, params: ModelParams) -> float:
    if params.kind is not StatisticsKind.MB:
        raise InvalidDomainError(f"paramètres {params.kind.value} passés à mb_pmf")
    return float(mb_pmf_vector(cfg.total, params.p1)[cfg.n])


def be_pmf(cfg: OccupancyConfig, params: ModelParams) -> float:
    if params.kind is not StatisticsKind.BE:
        raise InvalidDomainError(f"paramètres {params.kind.value} passés à be_pmf")
    N, n, p = cfg.total, cfg.n, params.p1
    return (n * p + (N - n) * (1.0 - p)) / (N * (N + 1) / 2)

from typing import Optional, Sequence

import numpy as np

from app.errors import InvalidDistributionError, InvalidDomainError
from app.models import CountVector, SampleHistogram, StatisticsKind
from app.occupancy import be_pmf_vector

# Nombre d'essais simulés par bloc (borne la mémoire du processus MB)
CHUNK_SIZE = 100_000


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_mb_process(N: int, p1: float, draws: int, seed: Optional[int] = None) -> SampleHistogram:
    """
    Remplit `draws` cages de N entités discernables, chacune tirée dans
    l'état 1 avec probabilité p1, et compte les entités dans l'état 1.
    """
    if draws < 1 or not 0.0 <= p1 <= 1.0 or N < 0:
        raise InvalidDomainError(f"paramètres invalides (N={N}, p1={p1}, draws={draws})")
    rng = _rng(seed)
    counts = np.zeros(N + 1, dtype=np.int64)
    remaining = draws
    while remaining > 0:
        size = min(CHUNK_SIZE, remaining)
        picks = rng.random((size, N)) < p1
        counts += np.bincount(picks.sum(axis=1), minlength=N + 1)
        remaining -= size
    return SampleHistogram(total_entities=N, draws=draws, counts=counts.tolist())


def sample_pmf(pmf: Sequence[float], draws: int, seed: Optional[int] = None) -> SampleHistogram:
    """Tirages catégoriels iid par inversion de la fonction de répartition"""
    probs = np.asarray(pmf, dtype=float)
    if probs.ndim != 1 or len(probs) == 0:
        raise InvalidDistributionError("pmf vide")
    if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-9:
        raise InvalidDistributionError(f"pmf non normalisée (somme={probs.sum()!r})")
    if draws < 1:
        raise InvalidDomainError("draws doit être >= 1")

    cdf = np.cumsum(probs)
    u = _rng(seed).random(draws) * cdf[-1]
    indices = np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)
    counts = np.bincount(indices, minlength=len(probs))
    return SampleHistogram(total_entities=len(probs) - 1, draws=draws, counts=counts.tolist())


def simulate(kind: StatisticsKind, N: int, p1: float, draws: int,
             seed: Optional[int] = None) -> SampleHistogram:
    """MB : processus des cages ; BE : tirage direct dans la pmf"""
    if StatisticsKind(kind) is StatisticsKind.MB:
        return sample_mb_process(N, p1, draws, seed)
    return sample_pmf(be_pmf_vector(N, p1), draws, seed)


def total_variation(h: SampleHistogram, pmf: Sequence[float]) -> float:
    probs = np.asarray(pmf, dtype=float)
    if len(probs) != len(h.counts):
        raise InvalidDomainError(f"longueurs différentes: {len(h.counts)} vs {len(probs)}")
    return float(0.5 * np.abs(np.asarray(h.frequencies) - probs).sum())


def histogram_to_counts(h: SampleHistogram) -> CountVector:
    """Convertit un histogramme simulé en CountVector ajustable"""
    return CountVector(
        total_entities=h.total_entities,
        counts={n: float(c) for n, c in enumerate(h.counts)},
    )

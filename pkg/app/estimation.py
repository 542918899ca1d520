from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.metrics import r2_score

from app.errors import DegenerateVarianceError, EmptyDataError, InvalidDomainError
from app.models import CountVector, FitOptions, FitResult, ModelParams, StatisticsKind
from app.monitoring import get_logger
from app.occupancy import pmf_vector

logger = get_logger()

GRID_STEP = 1e-3
REFINE_XATOL = 1e-10
# En dessous, la RSS est considérée nulle (ajustement exact)
RSS_FLOOR = 1e-12


def to_frequencies(cv: CountVector) -> np.ndarray:
    """Fréquences relatives sur les indices inclus (ordre croissant de n)"""
    values = np.asarray(cv.values(), dtype=float)
    total = values.sum()
    if total <= 0:
        raise EmptyDataError(f"total nul pour N={cv.total_entities}")
    return values / total


def apply_mask(cv: CountVector, lo: int, hi: int) -> CountVector:
    """Restreint le CountVector aux indices lo <= n <= hi"""
    kept = {n: c for n, c in cv.counts.items() if lo <= n <= hi}
    if len(kept) < 2:
        raise EmptyDataError(f"le masque {lo}..{hi} laisse moins de 2 indices")
    return CountVector(total_entities=cv.total_entities, counts=kept)


def r_squared(frequencies: Sequence[float], model_values: Sequence[float]) -> float:
    """
    Coefficient de détermination 1 - SS_res/SS_tot, non borné inférieurement.

    Lève DegenerateVarianceError si toutes les fréquences sont égales.
    """
    y = np.asarray(frequencies, dtype=float)
    y_hat = np.asarray(model_values, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1 or len(y) < 2:
        raise InvalidDomainError("vecteurs de même longueur (>= 2) attendus")
    if np.ptp(y) <= 1e-12 * np.abs(y).max():
        raise DegenerateVarianceError("SS_tot = 0")
    return float(r2_score(y, y_hat))


def _targets(cv: CountVector, options: FitOptions) -> Tuple[np.ndarray, float]:
    """Cible de l'ajustement et facteur d'échelle du modèle"""
    frequencies = to_frequencies(cv)
    if options.raw_counts:
        values = np.asarray(cv.values(), dtype=float)
        return values, float(values.sum())
    return frequencies, 1.0


def model_values(kind: StatisticsKind, cv: CountVector, p1, options: FitOptions,
                 scale: float = 1.0) -> np.ndarray:
    """pmf du modèle restreinte au masque (renormalisée si demandé)"""
    indices = cv.included_indices
    values = pmf_vector(kind, cv.total_entities, p1)[..., indices]
    if options.renormalize_mask:
        mass = values.sum(axis=-1, keepdims=True)
        values = np.divide(values, mass, out=np.zeros_like(values), where=mass > 0)
    return values * scale


def _fit_be_closed_form(cv: CountVector, y: np.ndarray, scale: float) -> float:
    # pmf_BE(n) = a_n + p1 * b_n : projection linéaire puis bornage
    N = cv.total_entities
    n = np.asarray(cv.included_indices, dtype=float)
    denom = N * (N + 1) / 2
    a = scale * (N - n) / denom
    b = scale * (2 * n - N) / denom
    p1 = float(np.dot(b, y - a) / np.dot(b, b))
    return min(1.0, max(0.0, p1))


def _fit_numeric(kind: StatisticsKind, cv: CountVector, y: np.ndarray, scale: float,
                 options: FitOptions) -> float:
    # Grille grossière puis raffinement borné autour du meilleur point
    grid = np.linspace(0.0, 1.0, int(round(1 / GRID_STEP)) + 1)
    rss_grid = ((model_values(kind, cv, grid, options, scale) - y) ** 2).sum(axis=1)
    best = int(np.argmin(rss_grid))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]

    def objective(p: float) -> float:
        return float(((model_values(kind, cv, p, options, scale) - y) ** 2).sum())

    refined = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                              options={"xatol": REFINE_XATOL})
    if refined.fun < rss_grid[best]:
        return float(refined.x)
    return float(grid[best])


def fit(cv: CountVector, kind: StatisticsKind, options: Optional[FitOptions] = None) -> FitResult:
    """
    Ajuste p1 par moindres carrés (maximisation du R²) pour le modèle `kind`.
    """
    options = options or FitOptions()
    kind = StatisticsKind(kind)
    if options.mask is not None:
        cv = apply_mask(cv, *options.mask)

    y, scale = _targets(cv, options)
    if kind is StatisticsKind.BE and not options.renormalize_mask:
        p1 = _fit_be_closed_form(cv, y, scale)
    else:
        p1 = _fit_numeric(kind, cv, y, scale, options)

    fitted = model_values(kind, cv, p1, options, scale)
    rss = float(((fitted - y) ** 2).sum())
    try:
        r2 = r_squared(y, fitted)
    except DegenerateVarianceError:
        # Données uniformes : R² = 1 seulement pour un ajustement exact
        r2 = 1.0 if rss < RSS_FLOOR else None

    logger.debug("fit_completed", extra={
        "custom_dimensions": {
            "event_type": "fit",
            "kind": kind.value,
            "N": cv.total_entities,
            "p1": p1,
            "rss": rss,
            "r_squared": r2
        }
    })

    return FitResult(
        params=ModelParams(kind=kind, p1=p1),
        rss=rss,
        r_squared=r2,
        n_points=len(y),
        included_indices=cv.included_indices,
        raw_counts=options.raw_counts,
    )


def fit_both(cv: CountVector, options: Optional[FitOptions] = None) -> Tuple[FitResult, FitResult]:
    """Ajuste MB puis BE sur le même CountVector"""
    return fit(cv, StatisticsKind.MB, options), fit(cv, StatisticsKind.BE, options)

import math
from typing import Optional

from app.errors import IncompatibleFitsError
from app.models import FitResult, ModelComparison, SelectionThresholds, Strength, Winner

# Chaque modèle n'a qu'un paramètre libre (p1)
FREE_PARAMETERS = 1
RSS_FLOOR = 1e-12


def bic(fit: FitResult) -> float:
    """
    BIC gaussien des moindres carrés : m ln(RSS/m) + k ln(m).
    """
    m = fit.n_points
    rss = max(fit.rss, RSS_FLOOR)
    return m * math.log(rss / m) + FREE_PARAMETERS * math.log(m)


def classify_strength(delta_bic: float, thresholds: SelectionThresholds) -> Strength:
    magnitude = abs(delta_bic)
    if magnitude < thresholds.t_weak:
        return Strength.WEAK
    if magnitude <= thresholds.t_strong:
        return Strength.POSITIVE
    return Strength.STRONG


def compare(fit_mb: FitResult, fit_be: FitResult,
            thresholds: Optional[SelectionThresholds] = None) -> ModelComparison:
    """
    Compare deux ajustements du même CountVector.

    delta_bic = BIC_MB - BIC_BE ; une valeur positive favorise BE.
    """
    thresholds = thresholds or SelectionThresholds()
    if (fit_mb.n_points != fit_be.n_points
            or fit_mb.included_indices != fit_be.included_indices):
        raise IncompatibleFitsError(
            f"masques différents: {fit_mb.included_indices} vs {fit_be.included_indices}"
        )

    delta = bic(fit_mb) - bic(fit_be)
    if abs(delta) < thresholds.tie_tolerance:
        winner = Winner.TIE
        candidates = [r for r in (fit_mb.r_squared, fit_be.r_squared) if r is not None]
        r2 = max(candidates) if candidates else None
    elif delta > 0:
        winner, r2 = Winner.BE, fit_be.r_squared
    else:
        winner, r2 = Winner.MB, fit_mb.r_squared

    return ModelComparison(
        delta_bic=delta,
        winner=winner,
        strength=classify_strength(delta, thresholds),
        r_squared_winner=r2,
    )


def verdict_text(comparison: ModelComparison) -> str:
    """Libellé de la colonne « Best Model » : `BE strong`, `MB weak`, `Tie`..."""
    if comparison.winner is Winner.TIE:
        return "Tie"
    return f"{comparison.winner.value} {comparison.strength.value.lower()}"

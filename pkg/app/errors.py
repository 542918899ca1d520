from typing import List, Optional


class OccupancyStatsError(ValueError):
    """Erreur de base du toolkit de statistiques d'occupation"""


class InvalidDomainError(OccupancyStatsError):
    """Arguments hors du domaine d'une fonction de comptage ou d'une pmf"""


class EmptyDataError(OccupancyStatsError):
    """Aucune donnée exploitable (total nul, jeu vide)"""


class DegenerateVarianceError(OccupancyStatsError):
    """SS_tot nul : toutes les fréquences sont égales"""


class IncompatibleFitsError(OccupancyStatsError):
    """Les deux ajustements ne portent pas sur le même masque"""


class InvalidDistributionError(OccupancyStatsError):
    """Vecteur de probabilités non normalisé ou négatif"""


class LexiconGapError(OccupancyStatsError):
    """Référence numérique manquante dans le lexique"""


class ReportFormatError(OccupancyStatsError):
    """Format de rapport inconnu"""


class SearchClientError(OccupancyStatsError):
    """Échec d'une requête vers l'API de recherche"""


class DatasetError(OccupancyStatsError):
    """Erreur de lecture ou de validation d'un jeu de données.

    `diagnostics` contient un message par ligne/enregistrement fautif.
    """

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        self.diagnostics = list(diagnostics or [])
        detail = message
        if self.diagnostics:
            detail += "\n  " + "\n  ".join(self.diagnostics)
        super().__init__(detail)

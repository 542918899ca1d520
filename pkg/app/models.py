from datetime import datetime
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app import config
from app.errors import LexiconGapError

NonNegativeCount = Annotated[float, Field(ge=0, allow_inf_nan=False)]


# ============================================================
# ÉNUMÉRATIONS
# ============================================================

class StatisticsKind(str, Enum):
    """Type de statistique : Maxwell-Boltzmann ou Bose-Einstein"""
    MB = "MB"
    BE = "BE"


class Winner(str, Enum):
    MB = "MB"
    BE = "BE"
    TIE = "Tie"


class Strength(str, Enum):
    WEAK = "Weak"
    POSITIVE = "Positive"
    STRONG = "Strong"


# ============================================================
# MODÈLES D'OCCUPATION
# ============================================================

class OccupancyConfig(BaseModel):
    """État p_{n,N-n} : n entités dans l'état 1, N-n dans l'état 2"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="Nombre d'entités dans l'état 1")
    total: int = Field(..., ge=1, description="Nombre total d'entités N")

    @model_validator(mode="after")
    def _n_within_total(self):
        if self.n > self.total:
            raise ValueError(f"n={self.n} dépasse total={self.total}")
        return self


class ModelParams(BaseModel):
    """Type de statistique et paramètre libre p1 (p2 = 1 - p1)"""
    model_config = ConfigDict(frozen=True)

    kind: StatisticsKind
    p1: float = Field(..., ge=0.0, le=1.0, description="Probabilité de l'état 1")

    @property
    def p2(self) -> float:
        return 1.0 - self.p1


# ============================================================
# ESTIMATION
# ============================================================

class CountVector(BaseModel):
    """
    Comptages empiriques par configuration n.

    Les indices absents de `counts` sont masqués : ils ne participent ni à
    la RSS ni à SS_tot.
    """
    model_config = ConfigDict(frozen=True)

    total_entities: int = Field(..., ge=1, description="N")
    counts: Dict[int, NonNegativeCount]

    @model_validator(mode="after")
    def _indices_in_range(self):
        bad = [n for n in self.counts if n < 0 or n > self.total_entities]
        if bad:
            raise ValueError(f"indices hors de 0..{self.total_entities}: {sorted(bad)}")
        if len(self.counts) < 2:
            raise ValueError("au moins 2 indices doivent être inclus")
        return self

    @property
    def included_indices(self) -> List[int]:
        return sorted(self.counts)

    def values(self) -> List[float]:
        return [self.counts[n] for n in self.included_indices]


class FitOptions(BaseModel):
    """Options d'ajustement partagées par la CLI, l'API et la bibliothèque"""
    raw_counts: bool = Field(False, description="Ajuster les comptages bruts au lieu des fréquences")
    renormalize_mask: bool = Field(False, description="Renormaliser la pmf sur le masque")
    mask: Optional[Tuple[int, int]] = Field(None, description="Plage lo..hi d'indices conservés")

    @field_validator("mask")
    @classmethod
    def _ordered_mask(cls, value):
        if value is not None and (value[0] < 0 or value[0] > value[1]):
            raise ValueError(f"masque invalide: {value[0]}..{value[1]}")
        return value


class FitResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ModelParams
    rss: float = Field(..., ge=0.0)
    r_squared: Optional[float] = Field(None, le=1.0, description="None si SS_tot = 0 et RSS > 0")
    n_points: int = Field(..., ge=2)
    included_indices: List[int]
    raw_counts: bool = False


# ============================================================
# SÉLECTION DE MODÈLE
# ============================================================

class SelectionThresholds(BaseModel):
    t_weak: float = Field(config.BIC_T_WEAK, ge=0.0)
    t_strong: float = Field(config.BIC_T_STRONG, ge=0.0)
    tie_tolerance: float = Field(1e-9, ge=0.0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.t_weak > self.t_strong:
            raise ValueError("t_weak doit être <= t_strong")
        return self


class ModelComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_bic: float = Field(..., description="BIC_MB - BIC_BE (positif : BE)")
    winner: Winner
    strength: Strength
    r_squared_winner: Optional[float] = None


# ============================================================
# MONTE CARLO
# ============================================================

class SampleHistogram(BaseModel):
    model_config = ConfigDict(frozen=True)

    total_entities: int = Field(..., ge=0)
    draws: int = Field(..., ge=1)
    counts: List[int]

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.counts) != self.total_entities + 1:
            raise ValueError("counts doit couvrir les indices 0..N")
        if any(c < 0 for c in self.counts) or sum(self.counts) != self.draws:
            raise ValueError("la somme des comptages doit valoir draws")
        return self

    @property
    def frequencies(self) -> List[float]:
        return [c / self.draws for c in self.counts]


# ============================================================
# JEUX DE DONNÉES ET RAPPORTS
# ============================================================

class ConceptSpec(BaseModel):
    """Ligne de la liste des concepts (id, N, concept, état 1, état 2)"""
    model_config = ConfigDict(frozen=True)

    id: int
    total: int = Field(..., ge=1)
    concept_name: str = Field(..., min_length=1)
    state1_label: str = Field(..., min_length=1)
    state2_label: str = Field(..., min_length=1)
    group: Optional[str] = Field(None, description="Regroupement (paire d'états du web)")

    @model_validator(mode="after")
    def _distinct_labels(self):
        if self.state1_label.strip().lower() == self.state2_label.strip().lower():
            raise ValueError(f"états identiques: {self.state1_label}")
        return self


class DatasetRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    concept: ConceptSpec
    data: CountVector
    incomplete: bool = False

    @model_validator(mode="after")
    def _same_total(self):
        if self.data.total_entities != self.concept.total:
            raise ValueError(
                f"concept {self.concept.id}: N={self.concept.total} "
                f"mais CountVector N={self.data.total_entities}"
            )
        return self


class AnalysisRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    concept: ConceptSpec
    fit_mb: FitResult
    fit_be: FitResult
    comparison: ModelComparison
    incomplete: bool = False

    @model_validator(mode="after")
    def _same_mask(self):
        if self.fit_mb.included_indices != self.fit_be.included_indices:
            raise ValueError("les deux ajustements doivent partager le même masque")
        return self


class AnalysisFailure(BaseModel):
    concept_id: int
    error: str


class AnalysisResult(BaseModel):
    rows: List[AnalysisRow]
    failures: List[AnalysisFailure] = Field(default_factory=list)


# ============================================================
# EXPÉRIENCE WEB
# ============================================================

class StateLexeme(BaseModel):
    model_config = ConfigDict(frozen=True)

    singular: str = Field(..., min_length=1)
    plural: str = Field(..., min_length=1)

    def form(self, count: int) -> str:
        return self.singular if count == 1 else self.plural


class WebPair(BaseModel):
    """Paire d'états (j) de l'expérience web"""
    model_config = ConfigDict(frozen=True)

    pair_id: int
    concept: str = Field(..., min_length=1)
    state1: StateLexeme
    state2: StateLexeme

    @property
    def label(self) -> str:
        return f"j={self.pair_id}"


class NumberLexicon(BaseModel):
    """Références textuelles de chaque entier ("3", "three", ...)"""
    model_config = ConfigDict(frozen=True)

    references: Dict[int, List[str]]

    @field_validator("references")
    @classmethod
    def _non_empty(cls, value):
        for number, refs in value.items():
            if number < 0:
                raise ValueError(f"entier négatif: {number}")
            if not refs or any(not r.strip() for r in refs):
                raise ValueError(f"aucune référence valide pour {number}")
        return value

    def refs(self, number: int) -> List[str]:
        if number not in self.references:
            raise LexiconGapError(f"aucune référence pour le nombre {number}")
        return self.references[number]

    def require(self, lo: int, hi: int) -> None:
        missing = [k for k in range(lo, hi + 1) if k not in self.references]
        if missing:
            raise LexiconGapError(f"références manquantes pour {missing}")


class SentenceSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: OccupancyConfig
    sentences: List[str]

    @field_validator("sentences")
    @classmethod
    def _distinct(cls, value):
        if not value:
            raise ValueError("ensemble de phrases vide")
        if len(set(value)) != len(value):
            raise ValueError("phrases dupliquées")
        return value


class CountCacheEntry(BaseModel):
    sentence: str
    hits: int = Field(..., ge=0)
    retrieved_at: datetime
    source: Literal["live", "fixture"]
    origin: str = ""


class StateCount(BaseModel):
    """Total des hits d'un état, avec les erreurs par phrase"""
    state: OccupancyConfig
    hits: int = Field(..., ge=0)
    incomplete: bool = False
    errors: List[str] = Field(default_factory=list)


class TrendSummary(BaseModel):
    pair: str
    label: Literal["MB only", "BE only", "Mixed", "Inconclusive"]
    significant_rows: int
    mb_rows: int
    be_rows: int


# ============================================================
# SCHÉMAS DE L'API
# ============================================================

class CountingRequest(BaseModel):
    N: int = Field(..., ge=0, le=10_000, description="Nombre d'entités")
    M: int = Field(..., ge=0, le=10_000, description="Nombre d'états")

    class Config:
        json_schema_extra = {"example": {"N": 2, "M": 2}}


class CountingResponse(BaseModel):
    mb: int
    be: int
    fd: Optional[int] = Field(None, description="None si N > M (exclusion de Pauli)")


class FitRequest(BaseModel):
    data: CountVector
    kind: Literal["MB", "BE", "both"] = "both"
    options: FitOptions = Field(default_factory=FitOptions)

    class Config:
        json_schema_extra = {
            "example": {
                "data": {"total_entities": 3, "counts": {"0": 10, "1": 30, "2": 30, "3": 10}},
                "kind": "both"
            }
        }


class AnalyzeRequest(BaseModel):
    records: List[DatasetRecord]
    thresholds: SelectionThresholds = Field(default_factory=SelectionThresholds)
    options: FitOptions = Field(default_factory=FitOptions)


class SimulateRequest(BaseModel):
    kind: StatisticsKind
    n: int = Field(..., ge=1, le=200)
    p1: float = Field(..., ge=0.0, le=1.0)
    draws: int = Field(..., ge=1, le=10_000_000)
    seed: int = Field(42, ge=0, lt=2**64)


class SimulateResponse(BaseModel):
    histogram: SampleHistogram
    total_variation: float = Field(..., description="Distance à la pmf exacte")


class HealthResponse(BaseModel):
    status: str = Field(..., description="État de l'API")
    data_available: bool = Field(..., description="Jeux de données embarqués présents")

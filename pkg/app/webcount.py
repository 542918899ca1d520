import hashlib
import json
import os
import threading
import time
from abc import ABC, abstractmethod
from datetime import datetime, timezone
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
import requests
from joblib import Parallel, delayed
from pydantic import BaseModel, ValidationError

from app import config
from app.errors import InvalidDomainError, SearchClientError
from app.models import (
    AnalysisResult,
    AnalysisRow,
    ConceptSpec,
    CountCacheEntry,
    CountVector,
    DatasetRecord,
    FitOptions,
    NumberLexicon,
    OccupancyConfig,
    SelectionThresholds,
    SentenceSet,
    StateCount,
    StateLexeme,
    TrendSummary,
    WebPair,
    Winner,
)
from app.monitoring import get_logger
from app.report import analyze

logger = get_logger()

SIGNIFICANT_R2 = 0.65
MAX_ATTEMPTS = 3
BACKOFF_SECONDS = 0.5


# ============================================================
# LEXIQUES
# ============================================================

def load_lexicon(path: str = config.NUMBER_LEXICON_FILE) -> NumberLexicon:
    """Références des nombres : JSON {"0": ["0", "no", "zero"], ...}"""
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return NumberLexicon(references={int(k): v for k, v in raw.items()})


def load_pairs(path: str = config.WEB_PAIRS_FILE) -> List[WebPair]:
    """Paires d'états : CSV pair_id,concept,singular1,plural1,singular2,plural2"""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    return [
        WebPair(
            pair_id=int(row["pair_id"]),
            concept=row["concept"],
            state1=StateLexeme(singular=row["singular1"], plural=row["plural1"]),
            state2=StateLexeme(singular=row["singular2"], plural=row["plural2"]),
        )
        for row in df.to_dict(orient="records")
    ]


def generate_sentences(k: int, N: int, lex1: StateLexeme, lex2: StateLexeme,
                       numbers: NumberLexicon) -> SentenceSet:
    """
    Phrases qui désignent l'état « k entités dans l'état 1, N-k dans l'état 2 ».

    Pour chaque paire de références (u pour k, v pour N-k) : `u F1 and v F2`
    et `v F2 and u F1`, au singulier quand le nombre vaut 1.
    """
    state = OccupancyConfig(n=k, total=N)
    form1, form2 = lex1.form(k), lex2.form(N - k)
    sentences, seen = [], set()
    for u in numbers.refs(k):
        for v in numbers.refs(N - k):
            for sentence in (f"{u} {form1} and {v} {form2}", f"{v} {form2} and {u} {form1}"):
                sentence = sentence.lower()
                if sentence not in seen:
                    seen.add(sentence)
                    sentences.append(sentence)
    return SentenceSet(state=state, sentences=sentences)


# ============================================================
# CLIENTS DE COMPTAGE
# ============================================================

class HitCountClient(ABC):
    """Nombre de pages contenant exactement une phrase"""
    source = "live"
    origin = ""

    @abstractmethod
    def count(self, sentence: str) -> int:
        ...

    def is_cacheable(self, sentence: str) -> bool:
        return True


class FixtureClient(HitCountClient):
    source = "fixture"

    def __init__(self, hits: Mapping[str, int]):
        self.hits = dict(hits)
        self.requests = 0
        # Empreinte du contenu : deux fixtures différentes ne partagent pas le cache
        canonical = json.dumps(self.hits, sort_keys=True, separators=(",", ":"))
        self.origin = hashlib.sha1(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str = config.WEB_FIXTURE_FILE) -> "FixtureClient":
        with open(path, encoding="utf-8") as f:
            return cls(json.load(f))

    def count(self, sentence: str) -> int:
        self.requests += 1
        if sentence not in self.hits:
            logger.warning("fixture_miss", extra={
                "custom_dimensions": {"event_type": "fixture_miss", "sentence": sentence}
            })
            return 0
        return int(self.hits[sentence])

    def is_cacheable(self, sentence: str) -> bool:
        return sentence in self.hits


class SearchApiClient(HitCountClient):
    """
    Client HTTP JSON d'une API de recherche web (schéma Bing v7 :
    `webPages.totalEstimatedMatches`). La requête est entre guillemets
    pour imposer la phrase exacte.
    """
    source = "live"

    def __init__(self, endpoint: str, api_key: str,
                 key_header: str = config.SEARCH_API_KEY_HEADER,
                 timeout: float = 10.0, session: Optional[requests.Session] = None):
        self.endpoint = endpoint
        self.origin = endpoint
        self.api_key = api_key
        self.key_header = key_header
        self.timeout = timeout
        self.session = session or requests.Session()

    @classmethod
    def from_env(cls) -> "SearchApiClient":
        endpoint = os.getenv("SEARCH_API_ENDPOINT", config.SEARCH_API_ENDPOINT or "")
        api_key = os.getenv("SEARCH_API_KEY", config.SEARCH_API_KEY or "")
        if not endpoint or not api_key:
            raise SearchClientError("SEARCH_API_ENDPOINT et SEARCH_API_KEY doivent être définis")
        return cls(endpoint, api_key)

    def count(self, sentence: str) -> int:
        try:
            response = self.session.get(
                self.endpoint,
                params={"q": f'"{sentence}"', "count": 1},
                headers={self.key_header: self.api_key},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except (requests.RequestException, ValueError) as e:
            raise SearchClientError(f"requête échouée pour {sentence!r}: {e}") from e
        return int(payload.get("webPages", {}).get("totalEstimatedMatches", 0))


# ============================================================
# CACHE ET LIMITE DE DÉBIT
# ============================================================

class HitCache:
    """Cache persistant JSON-lines des CountCacheEntry, sûr entre threads"""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._entries: Dict[Tuple[str, str, str], CountCacheEntry] = {}
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = CountCacheEntry.model_validate_json(line)
                except ValidationError:
                    logger.warning("cache_corrupt_line", extra={
                        "custom_dimensions": {"event_type": "cache", "path": self.path, "line": lineno}
                    })
                    continue
                self._entries[(entry.source, entry.origin, entry.sentence)] = entry

    def get(self, sentence: str, source: str, origin: str = "") -> Optional[CountCacheEntry]:
        with self._lock:
            return self._entries.get((source, origin, sentence))

    def put(self, entry: CountCacheEntry) -> None:
        with self._lock:
            self._entries[(entry.source, entry.origin, entry.sentence)] = entry
            if self.path:
                with open(self.path, "a", encoding="utf-8", newline="\n") as f:
                    f.write(entry.model_dump_json() + "\n")

    def __len__(self) -> int:
        return len(self._entries)


class RateLimiter:
    """Espacement minimal de 1/rate secondes entre deux requêtes (global)"""

    def __init__(self, rate: Optional[float],
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate is not None and rate <= 0:
            raise InvalidDomainError(f"débit invalide: {rate}")
        self.interval = 1.0 / rate if rate else 0.0
        self._clock = clock
        self._sleep = sleep
        self._next = float("-inf")
        self._lock = threading.Lock()

    def wait(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = self._clock()
            if now < self._next:
                self._sleep(self._next - now)
                now = self._next
            self._next = now + self.interval


# ============================================================
# COLLECTE
# ============================================================

def fetch_counts(ss: SentenceSet, client: HitCountClient, cache: Optional[HitCache] = None,
                 rate_limiter: Optional[RateLimiter] = None, max_in_flight: int = 1,
                 sleep: Callable[[float], None] = time.sleep) -> StateCount:
    """
    Somme des hits des phrases d'un état.

    Chaque requête réussie est mise en cache, indexée par la source et
    l'origine du client (endpoint ou empreinte de la fixture) ; les phrases
    absentes de la fixture ne le sont jamais. Un échec après 3 tentatives
    contribue 0 hit et marque l'état incomplet.
    """

    def lookup(sentence: str) -> Tuple[int, Optional[str]]:
        if cache is not None:
            cached = cache.get(sentence, client.source, client.origin)
            if cached is not None:
                return cached.hits, None

        for attempt in range(MAX_ATTEMPTS):
            if rate_limiter is not None:
                rate_limiter.wait()
            try:
                hits = client.count(sentence)
                break
            except SearchClientError as e:
                error = str(e)
                logger.warning("search_retry", extra={
                    "custom_dimensions": {
                        "event_type": "search_retry",
                        "sentence": sentence,
                        "attempt": attempt + 1,
                        "error": error
                    }
                })
                if attempt < MAX_ATTEMPTS - 1:
                    sleep(BACKOFF_SECONDS * 2 ** attempt)
        else:
            return 0, error

        if cache is not None and client.is_cacheable(sentence):
            cache.put(CountCacheEntry(
                sentence=sentence, hits=hits, retrieved_at=datetime.now(timezone.utc),
                source=client.source, origin=client.origin,
            ))
        return hits, None

    if max_in_flight > 1:
        results = Parallel(n_jobs=max_in_flight, backend="threading")(
            delayed(lookup)(s) for s in ss.sentences
        )
    else:
        results = [lookup(s) for s in ss.sentences]

    errors = [e for _, e in results if e]
    return StateCount(
        state=ss.state,
        hits=sum(h for h, _ in results),
        incomplete=bool(errors),
        errors=errors,
    )


def build_web_dataset(pairs: Sequence[WebPair], n_values: Sequence[int],
                      k_range: Tuple[int, Optional[int]], client: HitCountClient,
                      numbers: NumberLexicon, cache: Optional[HitCache] = None,
                      rate_limiter: Optional[RateLimiter] = None,
                      max_in_flight: int = 1) -> List[DatasetRecord]:
    """
    Un CountVector par (paire, N), restreint à k_min <= k <= k_max (k_max
    défaut : N). Identifiant du concept : pair_id * 100 + N.
    """
    k_min, k_max = k_range
    records = []
    for pair in pairs:
        for N in n_values:
            lo, hi = max(k_min, 0), min(N if k_max is None else k_max, N)
            if hi - lo + 1 < 2:
                logger.warning("web_cell_skipped", extra={
                    "custom_dimensions": {
                        "event_type": "web_cell_skipped",
                        "pair": pair.label,
                        "N": N,
                        "k_range": f"{lo}..{hi}"
                    }
                })
                continue

            counts, incomplete = {}, False
            for k in range(lo, hi + 1):
                ss = generate_sentences(k, N, pair.state1, pair.state2, numbers)
                state_count = fetch_counts(ss, client, cache, rate_limiter, max_in_flight)
                counts[k] = float(state_count.hits)
                incomplete = incomplete or state_count.incomplete

            records.append(DatasetRecord(
                concept=ConceptSpec(
                    id=pair.pair_id * 100 + N,
                    total=N,
                    concept_name=pair.concept,
                    state1_label=pair.state1.singular,
                    state2_label=pair.state2.singular,
                    group=pair.label,
                ),
                data=CountVector(total_entities=N, counts=counts),
                incomplete=incomplete,
            ))
    return records


# ============================================================
# TENDANCES ET RAPPORT
# ============================================================

def classify_trends(grouped: Mapping[str, Sequence[AnalysisRow]],
                    min_r_squared: float = SIGNIFICANT_R2) -> Dict[str, TrendSummary]:
    """
    Type de chaque paire : `MB only`, `BE only`, `Mixed` ou `Inconclusive`.

    Seules les lignes dont le R² du meilleur modèle atteint `min_r_squared`
    sont prises en compte.
    """
    summaries = {}
    for pair, rows in grouped.items():
        if len({r.concept.total for r in rows}) < 2:
            raise InvalidDomainError(f"{pair}: au moins deux valeurs de N sont nécessaires")
        significant = [
            r for r in rows
            if r.comparison.r_squared_winner is not None
            and r.comparison.r_squared_winner >= min_r_squared
        ]
        mb = sum(r.comparison.winner is Winner.MB for r in significant)
        be = sum(r.comparison.winner is Winner.BE for r in significant)
        if not significant:
            label = "Inconclusive"
        elif mb == len(significant):
            label = "MB only"
        elif be == len(significant):
            label = "BE only"
        else:
            label = "Mixed"
        summaries[pair] = TrendSummary(pair=pair, label=label,
                                       significant_rows=len(significant), mb_rows=mb, be_rows=be)
    return summaries


class WebExperiment(BaseModel):
    pairs: List[WebPair]
    n_values: List[int]
    records: List[DatasetRecord]
    result: AnalysisResult
    trends: Dict[str, TrendSummary]


def run_web_experiment(pairs: Sequence[WebPair], n_values: Sequence[int],
                       k_range: Tuple[int, Optional[int]], client: HitCountClient,
                       numbers: NumberLexicon, cache: Optional[HitCache] = None,
                       rate_limiter: Optional[RateLimiter] = None,
                       thresholds: Optional[SelectionThresholds] = None,
                       options: Optional[FitOptions] = None,
                       max_in_flight: int = 1) -> WebExperiment:
    """Chaîne complète : phrases -> hits -> CountVectors -> ajustements -> tendances"""
    records = build_web_dataset(pairs, n_values, k_range, client, numbers,
                                cache, rate_limiter, max_in_flight)
    result = analyze(records, thresholds, options)

    trends = {}
    if len(set(n_values)) >= 2:
        grouped = {p.label: [r for r in result.rows if r.concept.group == p.label] for p in pairs}
        trends = classify_trends({k: v for k, v in grouped.items()
                                  if len({r.concept.total for r in v}) >= 2})

    logger.info("web_experiment_completed", extra={
        "custom_dimensions": {
            "event_type": "web_experiment",
            "pairs": len(pairs),
            "records": len(records),
            "incomplete": sum(r.incomplete for r in records)
        }
    })
    return WebExperiment(pairs=list(pairs), n_values=list(n_values), records=records,
                         result=result, trends=trends)


def _web_cell(row: Optional[AnalysisRow], min_r_squared: float) -> str:
    if row is None:
        return "n/a"
    r2 = row.comparison.r_squared_winner
    r2_text = "-" if r2 is None or r2 < min_r_squared else f"{r2:.2f}"
    delta_text = f"{row.comparison.delta_bic:.1f}"
    if delta_text == "-0.0":
        delta_text = "0.0"
    cell = f"{delta_text},{r2_text}"
    return cell + "*" if row.incomplete else cell


def emit_web_report(experiment: WebExperiment, min_r_squared: float = SIGNIFICANT_R2) -> str:
    """
    Grille N x paires : `ΔBIC,R²` par cellule (`-` si R² < 0.65, `*` si
    incomplet), puis une ligne `Type` avec la tendance de chaque paire.
    """
    by_cell = {(r.concept.group, r.concept.total): r for r in experiment.result.rows}
    labels = [p.label for p in experiment.pairs]

    rows = [
        [str(N)] + [_web_cell(by_cell.get((label, N)), min_r_squared) for label in labels]
        for N in experiment.n_values
    ]
    rows.append(["Type"] + [
        experiment.trends[label].label if label in experiment.trends else "n/a"
        for label in labels
    ])
    df = pd.DataFrame(rows, columns=["N"] + labels)
    return df.to_csv(sep="\t", index=False, lineterminator="\n")

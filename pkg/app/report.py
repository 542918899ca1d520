import json
import os
import re
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import ValidationError

from app.errors import DatasetError, EmptyDataError, OccupancyStatsError, ReportFormatError
from app.estimation import fit_both, to_frequencies
from app.models import (
    AnalysisFailure,
    AnalysisResult,
    AnalysisRow,
    ConceptSpec,
    CountVector,
    DatasetRecord,
    FitOptions,
    SelectionThresholds,
)
from app.monitoring import get_logger
from app.occupancy import be_pmf_vector, mb_pmf_vector
from app.selection import compare, verdict_text

logger = get_logger()

SPEC_COLUMNS = ["id", "N", "concept", "state1", "state2"]
REPORT_COLUMNS = ["id", "P_MB", "R2_MB", "P_BE", "R2_BE", "delta_BIC", "verdict"]
COUNT_COLUMN = re.compile(r"^c(\d+)$")
MASKED_CELL = "-"


# ============================================================
# LECTURE / ÉCRITURE DES JEUX DE DONNÉES
# ============================================================

def _infer_format(path: str, fmt: Optional[str]) -> str:
    fmt = (fmt or os.path.splitext(path)[1].lstrip(".")).lower()
    if fmt not in ("csv", "json"):
        raise DatasetError(f"format de jeu de données inconnu: {fmt!r}")
    return fmt


def _parse_csv_row(row: dict, count_columns: dict, line: int) -> DatasetRecord:
    errors = []
    try:
        record_id = int(row["id"])
        N = int(row["N"])
    except ValueError:
        raise DatasetError(f"ligne {line}: id et N doivent être entiers")
    if N < 1:
        raise DatasetError(f"ligne {line} (id={record_id}): N={N} < 1")

    counts = {}
    for n in range(N + 1):
        if n not in count_columns:
            errors.append(f"colonne c{n} absente")
            continue
        cell = row[count_columns[n]].strip()
        if cell == MASKED_CELL:
            continue
        if cell == "":
            errors.append(f"c{n} vide (utiliser '{MASKED_CELL}' pour masquer)")
            continue
        try:
            counts[n] = float(cell)
        except ValueError:
            errors.append(f"c{n}={cell!r} n'est pas un nombre")
    extra = [f"c{n}" for n, col in count_columns.items() if n > N and row[col].strip()]
    if extra:
        errors.append(f"{len(extra)} comptage(s) au-delà de N={N}: {', '.join(extra)}")
    if errors:
        raise DatasetError(f"ligne {line} (id={record_id}): forme invalide", errors)

    return DatasetRecord(
        concept=ConceptSpec(
            id=record_id, total=N, concept_name=row["concept"],
            state1_label=row["state1"], state2_label=row["state2"],
        ),
        data=CountVector(total_entities=N, counts=counts),
    )


def _load_csv(path: str) -> List[DatasetRecord]:
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path}: fichier vide")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"{path}: CSV illisible", [str(e).strip()])
    missing = [c for c in SPEC_COLUMNS if c not in df.columns]
    if missing:
        raise DatasetError(f"{path}: colonnes manquantes {missing}")
    count_columns = {
        int(m.group(1)): col for col in df.columns if (m := COUNT_COLUMN.match(col))
    }

    records, diagnostics = [], []
    for i, row in enumerate(df.to_dict(orient="records")):
        line = i + 2  # ligne 1 = en-tête
        try:
            records.append(_parse_csv_row(row, count_columns, line))
        except DatasetError as e:
            diagnostics.append(str(e))
        except ValidationError as e:
            diagnostics.append(f"ligne {line} (id={row['id']}): {e.errors()[0]['msg']}")
    if diagnostics:
        raise DatasetError(f"{path}: {len(diagnostics)} enregistrement(s) invalide(s)", diagnostics)
    return records


def _load_json(path: str) -> List[DatasetRecord]:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"{path}: JSON invalide (ligne {e.lineno}, colonne {e.colno})")
    if not isinstance(raw, list):
        raise DatasetError(f"{path}: liste d'enregistrements attendue, {type(raw).__name__} trouvé")

    records, diagnostics = [], []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            diagnostics.append(f"enregistrement {i}: objet attendu, {type(item).__name__} trouvé")
            continue
        try:
            records.append(DatasetRecord(
                concept=ConceptSpec(
                    id=item["id"], total=item["N"], concept_name=item["concept"],
                    state1_label=item["state1"], state2_label=item["state2"],
                ),
                data=CountVector(total_entities=item["N"], counts=item["counts"]),
                incomplete=item.get("incomplete", False),
            ))
        except KeyError as e:
            diagnostics.append(f"enregistrement {i}: champ {e} manquant")
        except ValidationError as e:
            diagnostics.append(f"enregistrement {i} (id={item.get('id')}): {e.errors()[0]['msg']}")
    if diagnostics:
        raise DatasetError(f"{path}: {len(diagnostics)} enregistrement(s) invalide(s)", diagnostics)
    return records


def load_dataset(path: str, fmt: Optional[str] = None) -> List[DatasetRecord]:
    """
    Charge un jeu de données CSV ou JSON et valide chaque enregistrement.

    CSV : en-tête `id,N,concept,state1,state2,c0,...,cK`. Les cellules c0..cN
    sont obligatoires (`-` pour un indice masqué), celles au-delà de N vides.
    """
    fmt = _infer_format(path, fmt)
    if not os.path.exists(path):
        raise DatasetError(f"fichier introuvable: {path}")
    records = _load_csv(path) if fmt == "csv" else _load_json(path)
    logger.info("dataset_loaded", extra={
        "custom_dimensions": {"event_type": "dataset_load", "path": path, "records": len(records)}
    })
    return records


def _format_count(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def save_dataset(records: Sequence[DatasetRecord], path: str, fmt: Optional[str] = None) -> None:
    """Écrit un jeu de données que `load_dataset` relit à l'identique"""
    fmt = _infer_format(path, fmt)
    if fmt == "json":
        payload = [
            {
                "id": r.concept.id,
                "N": r.concept.total,
                "concept": r.concept.concept_name,
                "state1": r.concept.state1_label,
                "state2": r.concept.state2_label,
                "counts": {str(n): r.data.counts[n] for n in r.data.included_indices},
                "incomplete": r.incomplete,
            }
            for r in records
        ]
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
        return

    max_n = max(r.concept.total for r in records)
    rows = []
    for r in records:
        cells = [str(r.concept.id), str(r.concept.total), r.concept.concept_name,
                 r.concept.state1_label, r.concept.state2_label]
        for n in range(max_n + 1):
            if n > r.concept.total:
                cells.append("")
            elif n in r.data.counts:
                cells.append(_format_count(r.data.counts[n]))
            else:
                cells.append(MASKED_CELL)
        rows.append(cells)
    columns = SPEC_COLUMNS + [f"c{n}" for n in range(max_n + 1)]
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, lineterminator="\n")


def load_concepts(path: str) -> List[ConceptSpec]:
    """Liste des concepts et de leurs états (sans comptages)"""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    return [
        ConceptSpec(id=int(row["id"]), total=int(row["N"]), concept_name=row["concept"],
                    state1_label=row["state1"], state2_label=row["state2"])
        for row in df.to_dict(orient="records")
    ]


# ============================================================
# ANALYSE
# ============================================================

def _analyze_record(record: DatasetRecord, thresholds: SelectionThresholds,
                    options: FitOptions) -> Union[AnalysisRow, AnalysisFailure]:
    try:
        fit_mb, fit_be = fit_both(record.data, options)
        return AnalysisRow(
            concept=record.concept,
            fit_mb=fit_mb,
            fit_be=fit_be,
            comparison=compare(fit_mb, fit_be, thresholds),
            incomplete=record.incomplete,
        )
    except (OccupancyStatsError, ValidationError) as e:
        return AnalysisFailure(concept_id=record.concept.id, error=str(e))


def analyze(records: Sequence[DatasetRecord], thresholds: Optional[SelectionThresholds] = None,
            options: Optional[FitOptions] = None, n_jobs: int = 1) -> AnalysisResult:
    """
    Ajuste MB et BE sur chaque enregistrement puis compare les deux modèles.

    L'ordre des enregistrements est conservé ; les échecs sont collectés
    sans interrompre le lot.
    """
    if not records:
        raise EmptyDataError("aucun enregistrement à analyser")
    thresholds = thresholds or SelectionThresholds()
    options = options or FitOptions()

    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_analyze_record)(r, thresholds, options) for r in records
    )
    rows = [o for o in outcomes if isinstance(o, AnalysisRow)]
    failures = [o for o in outcomes if isinstance(o, AnalysisFailure)]

    for failure in failures:
        logger.warning("analysis_failed", extra={
            "custom_dimensions": {
                "event_type": "analysis_failure",
                "concept_id": failure.concept_id,
                "error": failure.error
            }
        })
    logger.info("analysis_completed", extra={
        "custom_dimensions": {
            "event_type": "analysis",
            "rows": len(rows),
            "failures": len(failures)
        }
    })
    return AnalysisResult(rows=rows, failures=failures)


# ============================================================
# RAPPORTS
# ============================================================

def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "NA"
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _report_cells(row: AnalysisRow) -> List[str]:
    return [
        str(row.concept.id),
        _fmt(row.fit_mb.params.p1),
        _fmt(row.fit_mb.r_squared),
        _fmt(row.fit_be.params.p1),
        _fmt(row.fit_be.r_squared),
        _fmt(row.comparison.delta_bic),
        verdict_text(row.comparison),
    ]


def emit_report(rows: Sequence[AnalysisRow], fmt: str = "tsv") -> str:
    """
    Rapport d'analyse au format tsv, json ou markdown.

    Le JSON est un rapport de résultats sans les comptages : le format
    relu par `load_dataset` est celui de `save_dataset`.
    """
    if not rows:
        raise EmptyDataError("aucune ligne à rapporter")

    if fmt == "tsv":
        df = pd.DataFrame([_report_cells(r) for r in rows], columns=REPORT_COLUMNS)
        return df.to_csv(sep="\t", index=False, lineterminator="\n")

    if fmt == "markdown":
        lines = ["| " + " | ".join(REPORT_COLUMNS) + " |",
                 "|" + "---|" * len(REPORT_COLUMNS)]
        lines += ["| " + " | ".join(_report_cells(r)) + " |" for r in rows]
        return "\n".join(lines) + "\n"

    if fmt == "json":
        payload = [
            {
                "id": r.concept.id,
                "concept": r.concept.concept_name,
                "state1": r.concept.state1_label,
                "state2": r.concept.state2_label,
                "N": r.concept.total,
                "P_MB": r.fit_mb.params.p1,
                "R2_MB": r.fit_mb.r_squared,
                "RSS_MB": r.fit_mb.rss,
                "P_BE": r.fit_be.params.p1,
                "R2_BE": r.fit_be.r_squared,
                "RSS_BE": r.fit_be.rss,
                "n_points": r.fit_mb.n_points,
                "delta_BIC": r.comparison.delta_bic,
                "winner": r.comparison.winner.value,
                "strength": r.comparison.strength.value,
                "verdict": verdict_text(r.comparison),
                "incomplete": r.incomplete,
            }
            for r in rows
        ]
        return json.dumps(payload, indent=2) + "\n"

    raise ReportFormatError(f"format de rapport inconnu: {fmt!r}")


def emit_plotdata(row: AnalysisRow, cv: CountVector) -> str:
    """
    Courbes à superposer : fréquences empiriques, MB ajustée, BE ajustée.

    Une ligne par n = 0..N ; la fréquence empirique est vide hors masque.
    """
    N = row.concept.total
    indices = row.fit_mb.included_indices
    masked = CountVector(total_entities=N, counts={n: cv.counts[n] for n in indices})
    empirical = np.full(N + 1, np.nan)
    empirical[indices] = to_frequencies(masked)

    df = pd.DataFrame({
        "n": np.arange(N + 1),
        "empirical_freq": empirical,
        "mb_fit": mb_pmf_vector(N, row.fit_mb.params.p1),
        "be_fit": be_pmf_vector(N, row.fit_be.params.p1),
    })
    return df.to_csv(index=False, lineterminator="\n")

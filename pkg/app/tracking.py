import os
import tempfile
from typing import Sequence

import mlflow

from app import config
from app.models import AnalysisRow, FitOptions, SelectionThresholds
from app.report import emit_report


def log_analysis(rows: Sequence[AnalysisRow], thresholds: SelectionThresholds,
                 options: FitOptions, run_name: str = "concept-analysis",
                 experiment: str = "occupancy-statistics") -> str:
    """
    Enregistre une analyse dans MLflow : seuils et options en paramètres,
    P/R²/ΔBIC par concept en métriques, rapport TSV en artefact.

    Retourne l'identifiant du run.
    """
    mlflow.set_tracking_uri(config.MLFLOW_TRACKING_URI)
    mlflow.set_experiment(experiment)

    with mlflow.start_run(run_name=run_name) as run:
        mlflow.log_params({
            "t_weak": thresholds.t_weak,
            "t_strong": thresholds.t_strong,
            "raw_counts": options.raw_counts,
            "renormalize_mask": options.renormalize_mask,
            "mask": "none" if options.mask is None else f"{options.mask[0]}..{options.mask[1]}",
        })

        for row in rows:
            prefix = f"concept_{row.concept.id}"
            metrics = {
                f"{prefix}_p_mb": row.fit_mb.params.p1,
                f"{prefix}_p_be": row.fit_be.params.p1,
                f"{prefix}_delta_bic": row.comparison.delta_bic,
            }
            if row.fit_mb.r_squared is not None:
                metrics[f"{prefix}_r2_mb"] = row.fit_mb.r_squared
            if row.fit_be.r_squared is not None:
                metrics[f"{prefix}_r2_be"] = row.fit_be.r_squared
            mlflow.log_metrics(metrics)

        with tempfile.TemporaryDirectory() as tmp:
            report_path = os.path.join(tmp, "report.tsv")
            with open(report_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(emit_report(rows, "tsv"))
            mlflow.log_artifact(report_path)

        mlflow.set_tags({
            "task": "occupancy_model_selection",
            "concepts": str(len(rows))
        })
        return run.info.run_id

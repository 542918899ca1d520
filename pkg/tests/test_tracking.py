# tests/test_tracking.py
from unittest.mock import patch

from app.models import FitOptions, SelectionThresholds
from app.report import analyze, load_dataset
from app.tracking import log_analysis
from tests.conftest import data_path


def test_log_analysis_with_mock():
    """Test l'enregistrement MLflow avec un mock du client"""
    rows = analyze(load_dataset(data_path("synthetic_concepts.csv"))).rows
    with patch("app.tracking.mlflow") as mock_mlflow:
        mock_mlflow.start_run.return_value.__enter__.return_value.info.run_id = "run-123"
        run_id = log_analysis(rows, SelectionThresholds(), FitOptions(mask=(1, 7)))

    assert run_id == "run-123"
    params = mock_mlflow.log_params.call_args.args[0]
    assert params["mask"] == "1..7"
    assert params["t_strong"] == 6.0
    assert mock_mlflow.log_metrics.call_count == len(rows)
    first_metrics = mock_mlflow.log_metrics.call_args_list[0].args[0]
    assert first_metrics["concept_1_delta_bic"] == rows[0].comparison.delta_bic
    mock_mlflow.log_artifact.assert_called_once()

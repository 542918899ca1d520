import argparse
import sys
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app import config
from app.errors import DatasetError, OccupancyStatsError
from app.estimation import fit
from app.models import FitOptions, SelectionThresholds, StatisticsKind
from app.montecarlo import simulate, total_variation
from app.monitoring import get_logger
from app.occupancy import pmf_vector
from app.report import analyze, emit_plotdata, emit_report, load_dataset
from app.webcount import (
    FixtureClient,
    HitCache,
    RateLimiter,
    SearchApiClient,
    emit_web_report,
    load_lexicon,
    load_pairs,
    run_web_experiment,
)

logger = get_logger()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse sort en 2 par défaut ; 2 est réservé aux erreurs de données
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: erreur: {message}\n")


def _parse_mask(text: Optional[str]):
    if text is None:
        return None
    try:
        lo, hi = (int(part) for part in text.split(".."))
    except ValueError:
        raise UsageError(f"masque invalide {text!r} (attendu lo..hi)")
    return lo, hi


def _fit_options(args) -> FitOptions:
    try:
        return FitOptions(
            raw_counts=args.raw_counts,
            renormalize_mask=args.renormalize_mask,
            mask=_parse_mask(args.mask),
        )
    except ValidationError as e:
        raise UsageError(f"options d'ajustement invalides: {e}")


def _thresholds(args) -> SelectionThresholds:
    try:
        return SelectionThresholds(t_weak=args.t_weak, t_strong=args.t_strong)
    except ValidationError as e:
        raise UsageError(f"seuils invalides: {e}")


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mask", help="Plage d'indices conservés, ex. 3..11")
    parser.add_argument("--raw-counts", action="store_true", help="Ajuster les comptages bruts")
    parser.add_argument("--renormalize-mask", action="store_true",
                        help="Renormaliser la pmf sur le masque")


def _add_threshold_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--t-weak", type=float, default=config.BIC_T_WEAK)
    parser.add_argument("--t-strong", type=float, default=config.BIC_T_STRONG)


# ============================================================
# SOUS-COMMANDES
# ============================================================

def cmd_fit(args) -> int:
    options = _fit_options(args)
    kinds = [StatisticsKind.MB, StatisticsKind.BE] if args.model == "both" \
        else [StatisticsKind(args.model.upper())]

    rows = []
    for record in load_dataset(args.input):
        for kind in kinds:
            result = fit(record.data, kind, options)
            rows.append({
                "id": record.concept.id,
                "model": kind.value,
                "p1": result.params.p1,
                "rss": result.rss,
                "r_squared": result.r_squared,
                "n_points": result.n_points,
            })
    _write(pd.DataFrame(rows).to_csv(sep="\t", index=False, lineterminator="\n"), args.output)
    return EXIT_OK


def cmd_analyze(args) -> int:
    thresholds = _thresholds(args)
    options = _fit_options(args)
    result = analyze(load_dataset(args.input), thresholds, options, n_jobs=args.jobs)

    for failure in result.failures:
        print(f"concept {failure.concept_id}: {failure.error}", file=sys.stderr)
    if not result.rows:
        return EXIT_DATA

    _write(emit_report(result.rows, args.format), args.output)
    if args.track:
        from app.tracking import log_analysis
        run_id = log_analysis(result.rows, thresholds, options)
        print(f"MLflow run : {run_id}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    kind = StatisticsKind(args.kind.upper())
    hist = simulate(kind, args.n, args.p1, args.draws, args.seed)
    pmf = pmf_vector(kind, args.n, args.p1)
    df = pd.DataFrame({
        "n": np.arange(args.n + 1),
        "count": hist.counts,
        "frequency": hist.frequencies,
        "pmf": pmf,
    })
    _write(df.to_csv(index=False, lineterminator="\n"), args.output)
    print(f"variation totale vs pmf : {total_variation(hist, pmf):.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_plotdata(args) -> int:
    records = [r for r in load_dataset(args.input) if r.concept.id == args.id]
    if not records:
        raise DatasetError(f"aucun concept d'id {args.id} dans {args.input}")
    record = records[0]
    result = analyze([record], options=_fit_options(args))
    if not result.rows:
        raise DatasetError(result.failures[0].error)
    _write(emit_plotdata(result.rows[0], record.data), args.output)
    return EXIT_OK


def cmd_webcount(args) -> int:
    if args.n_min > args.n_max:
        raise UsageError("--n-min doit être <= --n-max")

    if args.mode == "fixture":
        client = FixtureClient.from_file(args.fixture)
        rate = args.rate
    else:
        client = SearchApiClient.from_env()
        rate = args.rate if args.rate is not None else config.SEARCH_RATE_LIMIT

    experiment = run_web_experiment(
        pairs=load_pairs(args.pairs),
        n_values=list(range(args.n_min, args.n_max + 1)),
        k_range=(args.k_min, args.k_max),
        client=client,
        numbers=load_lexicon(args.lexicon),
        cache=HitCache(args.cache),
        rate_limiter=RateLimiter(rate),
        thresholds=_thresholds(args),
        max_in_flight=args.max_in_flight,
    )
    for failure in experiment.result.failures:
        print(f"cellule {failure.concept_id}: {failure.error}", file=sys.stderr)
    _write(emit_web_report(experiment), args.output)
    return EXIT_OK


# ============================================================
# PARSER
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="concept-stats",
                     description="Ajustement MB / BE de données d'occupation et sélection par ΔBIC")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="Ajuster MB et/ou BE sur chaque enregistrement")
    p.add_argument("--input", required=True)
    p.add_argument("--model", choices=["mb", "be", "both"], default="both")
    p.add_argument("--output")
    _add_fit_flags(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("analyze", help="Ajuster, comparer et produire le rapport")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--format", choices=["tsv", "json", "markdown"], default="tsv")
    p.add_argument("--jobs", type=int, default=1, help="Enregistrements traités en parallèle")
    p.add_argument("--track", action="store_true", help="Enregistrer le run dans MLflow")
    _add_threshold_flags(p)
    _add_fit_flags(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("simulate", help="Histogramme Monte Carlo d'un modèle")
    p.add_argument("--kind", choices=["mb", "be"], required=True)
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--p1", type=float, default=0.5)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--output")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("plotdata", help="Courbes empirique / MB / BE d'un concept")
    p.add_argument("--input", required=True)
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--output")
    _add_fit_flags(p)
    p.set_defaults(handler=cmd_plotdata)

    p = sub.add_parser("webcount", help="Expérience web : phrases, hits, ajustements, tendances")
    p.add_argument("--pairs", default=config.WEB_PAIRS_FILE)
    p.add_argument("--lexicon", default=config.NUMBER_LEXICON_FILE)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=15)
    p.add_argument("--k-min", type=int, default=3)
    p.add_argument("--k-max", type=int)
    p.add_argument("--mode", choices=["live", "fixture"], default="fixture")
    p.add_argument("--fixture", default=config.WEB_FIXTURE_FILE)
    p.add_argument("--rate", type=float, help="Requêtes par seconde (live : SEARCH_RATE_LIMIT)")
    p.add_argument("--cache", default=config.HIT_CACHE_PATH)
    p.add_argument("--max-in-flight", type=int, default=1)
    p.add_argument("--output")
    _add_threshold_flags(p)
    p.set_defaults(handler=cmd_webcount)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"erreur: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OccupancyStatsError, ValidationError, FileNotFoundError) as e:
        logger.error("cli_data_error", extra={
            "custom_dimensions": {"event_type": "cli_error", "command": args.command, "error": str(e)}
        })
        print(f"erreur de données: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

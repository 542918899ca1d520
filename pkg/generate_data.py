# generate_data.py
import argparse
import json

import numpy as np

from app import config
from app.models import CountVector, DatasetRecord
from app.montecarlo import sample_pmf
from app.occupancy import be_pmf_vector, mb_pmf_vector
from app.report import load_concepts, save_dataset
from app.webcount import generate_sentences, load_lexicon, load_pairs

PARTICIPANTS = 88

# id du concept -> (poids MB du mélange, p1)
GENERATORS = {
    1: (0.0, 0.16),
    2: (1.0, 0.57),
    3: (0.15, 0.96),
    4: (0.55, 0.71),
    5: (0.1, 0.39),
    6: (0.5, 0.62),
    7: (0.2, 0.64),
    8: (0.46, 0.47),
    9: (0.9, 0.45),
    10: (0.42, 0.63),
    11: (0.0, 1.00),
    12: (0.25, 0.21),
    13: (0.45, 0.71),
    14: (0.0, 0.91),
}


def mixture_pmf(N, mb_weight, p1):
    return mb_weight * mb_pmf_vector(N, p1) + (1 - mb_weight) * be_pmf_vector(N, p1)


def generate_synthetic_dataset(output_file=config.SYNTHETIC_DATASET, jitter=0.2,
                               draws=None, seed=42):
    """
    Génère les comptages des 14 concepts à partir d'un mélange MB/BE.

    Sans `draws`, une modulation sinusoïdale déterministe perturbe les
    comptages (jeu de données embarqué) ; avec `draws`, chaque concept est
    ré-échantillonné par tirage multinomial.
    """
    records = []
    for spec in load_concepts(config.CONCEPTS_FILE):
        mb_weight, p1 = GENERATORS[spec.id]
        pmf = mixture_pmf(spec.total, mb_weight, p1)
        n = np.arange(spec.total + 1)

        if draws is None:
            counts = np.rint(PARTICIPANTS * pmf * (1 + jitter * np.sin(1.7 * spec.id + 2.3 * n)))
        else:
            counts = np.asarray(sample_pmf(pmf / pmf.sum(), draws, seed + spec.id).counts)

        records.append(DatasetRecord(
            concept=spec,
            data=CountVector(total_entities=spec.total,
                             counts={int(k): float(c) for k, c in zip(n, counts)}),
        ))

    save_dataset(records, output_file)
    print(f"Dataset créé : {len(records)} concepts -> {output_file}")


def _web_regime(pair_id, N):
    # Paires 1-3 : MB pour les petits N, BE ensuite ; paire 4 : MB partout
    shift = 7 if pair_id == 2 else 8
    if pair_id < 4 and N >= shift:
        return be_pmf_vector(N, 0.2)
    return mb_pmf_vector(N, 0.5 + 0.03 * pair_id if pair_id < 4 else 0.45)


def generate_web_fixture(output_file=config.WEB_FIXTURE_FILE, n_values=range(3, 16),
                         scale=50_000, jitter=0.06, jitter_slope=0.018):
    """
    Fixture de hits par phrase : le total d'un état suit le régime de la
    paire, modulé d'un bruit qui croît avec N, puis est réparti sur les
    phrases de l'état avec des poids décroissants.
    """
    lexicon = load_lexicon(config.NUMBER_LEXICON_FILE)
    hits = {}
    for pair in load_pairs(config.WEB_PAIRS_FILE):
        j = pair.pair_id
        for N in n_values:
            pmf = _web_regime(j, N)
            amplitude = jitter + jitter_slope * (N - 3)
            for k in range(N + 1):
                sentences = generate_sentences(k, N, pair.state1, pair.state2, lexicon).sentences
                total = scale * pmf[k] * (1 + amplitude * np.sin(0.9 * j + 1.3 * N + 2.1 * k))
                s = len(sentences)
                weight_sum = s * (s + 1) / 2
                for i, sentence in enumerate(sentences):
                    hits[sentence] = int(total * (s - i) / weight_sum)

    with open(output_file, "w", encoding="utf-8", newline="\n") as f:
        json.dump(hits, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"Fixture web créée : {len(hits)} phrases -> {output_file}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Génération des jeux de données synthétiques")
    parser.add_argument("--draws", type=int, help="Tirage multinomial de DRAWS réponses par concept")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--web-fixture", action="store_true", help="Régénérer aussi la fixture web")
    args = parser.parse_args()

    generate_synthetic_dataset(draws=args.draws, seed=args.seed)
    if args.web_fixture:
        generate_web_fixture()

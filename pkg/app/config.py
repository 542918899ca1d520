import os

# ============================================================
# CHEMINS
# ============================================================

DATA_DIR = os.getenv("DATA_DIR", "data")
CONCEPTS_FILE = os.path.join(DATA_DIR, "concepts.csv")
SYNTHETIC_DATASET = os.path.join(DATA_DIR, "synthetic_concepts.csv")
WEB_PAIRS_FILE = os.path.join(DATA_DIR, "web_pairs.csv")
NUMBER_LEXICON_FILE = os.path.join(DATA_DIR, "number_lexicon.json")
WEB_FIXTURE_FILE = os.path.join(DATA_DIR, "web_fixture.json")
HIT_CACHE_PATH = os.getenv("HIT_CACHE_PATH", os.path.join(DATA_DIR, "hit_cache.jsonl"))

# ============================================================
# API DE RECHERCHE
# ============================================================

SEARCH_API_ENDPOINT = os.getenv("SEARCH_API_ENDPOINT")
SEARCH_API_KEY = os.getenv("SEARCH_API_KEY")
SEARCH_API_KEY_HEADER = os.getenv("SEARCH_API_KEY_HEADER", "Ocp-Apim-Subscription-Key")
SEARCH_RATE_LIMIT = float(os.getenv("SEARCH_RATE_LIMIT", "1.0"))

# ============================================================
# SÉLECTION DE MODÈLE
# ============================================================

BIC_T_WEAK = float(os.getenv("BIC_T_WEAK", "2"))
BIC_T_STRONG = float(os.getenv("BIC_T_STRONG", "6"))

# ============================================================
# MONITORING
# ============================================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
APPINSIGHTS_CONN = os.getenv("APPLICATIONINSIGHTS_CONNECTION_STRING")
MLFLOW_TRACKING_URI = os.getenv("MLFLOW_TRACKING_URI", "./mlruns")

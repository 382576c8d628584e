"""Feature-assisted score-SDE super-resolution bindings."""

import importlib

__all__ = [
    "FeatureExtractor",
    "NoiseSchedule",
    "ScoreNetwork",
    "cmc_rank_k",
    "cosine_similarity",
    "degrade",
    "gaussian",
    "load_eval_network",
    "merge_features",
    "psnr",
    "render",
    "super_resolve",
    "time_embedding",
    "verification_auc",
]

try:
    _core = importlib.import_module("._fasr", __name__)
except ImportError:  # running against a bare build tree
    _core = importlib.import_module("_fasr")

for _name in __all__:
    globals()[_name] = getattr(_core, _name)
del _name, _core, importlib

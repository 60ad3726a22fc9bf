"""Event-extraction news recommendation pipeline.

Thin wrapper around the compiled ``eenr._eenr`` module. Pipeline stages mirror
the ``eenr`` CLI subcommands and return their JSON summaries as dicts; the
sequence-model and metric primitives work on plain Python lists.
"""

import json as _json

from ._eenr import (  # noqa: F401
    auc,
    crf_log_partition,
    default_config,
    mrr,
    ndcg,
    time_split_sizes,
    variant_names,
    viterbi,
)
from . import _eenr as _core


def _stage(name):
    fn = getattr(_core, name)

    def wrapper(*args, **kwargs):
        return _json.loads(fn(*args, **kwargs))

    wrapper.__name__ = name
    wrapper.__doc__ = fn.__doc__
    return wrapper


gen_data = _stage("gen_data")
train_ee = _stage("train_ee")
eval_ee = _stage("eval_ee")
extract = _stage("extract")
build_graph = _stage("build_graph")
embed_graph = _stage("embed_graph")
train_rec = _stage("train_rec")
evaluate = _stage("evaluate")
ablate = _stage("ablate")
fraction_study = _stage("fraction_study")


def config(**overrides):
    """Default configuration dict, with optional section overrides."""
    cfg = _json.loads(default_config())
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg

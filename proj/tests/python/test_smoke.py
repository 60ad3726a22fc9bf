"""End-to-end smoke tests for the compiled eenr module."""

import json
import math

import pytest

eenr = pytest.importorskip("eenr")


def test_metrics_hand_values():
    assert eenr.auc([0.9, 0.1], [1, 0]) == 1.0
    assert eenr.mrr([5, 4, 3, 2, 1], [1, 0, 1, 0, 0]) == pytest.approx(2.0 / 3.0)
    assert eenr.ndcg([5, 4, 3], [0, 1, 0], 5) == pytest.approx(1.0 / math.log2(3.0))


def test_viterbi_against_enumeration():
    emissions = [[0.5, -0.2, 0.1], [0.0, 0.3, -0.4], [0.2, 0.2, 0.9]]
    transitions = [[0.1, -0.1, 0.0], [0.3, 0.0, -0.2], [0.0, 0.1, 0.2]]

    def path_score(path):
        score = emissions[0][path[0]]
        for t in range(1, len(path)):
            score += emissions[t][path[t]] + transitions[path[t - 1]][path[t]]
        return score

    best = max(
        ((a, b, c) for a in range(3) for b in range(3) for c in range(3)),
        key=path_score,
    )
    assert tuple(eenr.viterbi(emissions, transitions)) == best

    total = 0.0
    for a in range(3):
        for b in range(3):
            for c in range(3):
                total += math.exp(path_score((a, b, c)))
    assert eenr.crf_log_partition(emissions, transitions) == pytest.approx(math.log(total))


def test_time_split_proportions():
    sizes = eenr.time_split_sizes(list(range(10)))
    assert sizes == (7, 1, 2)


def test_config_overrides():
    cfg = eenr.config(data={"n_users": 5}, seed=9)
    assert cfg["data"]["n_users"] == 5
    assert cfg["seed"] == 9
    assert cfg["trainer"]["neg_ratio"] == 4


def test_pipeline_runs_end_to_end(tmp_path):
    cfg = eenr.config(
        data={
            "n_users": 10,
            "n_news": 25,
            "n_impressions": 120,
            "ee_sentences": 40,
            "n_event_types": 4,
        },
        ee={"char_dim": 16, "hidden": 16, "epochs": 4, "batch_size": 8},
        graph={"dim": 5, "walks_per_node": 4, "epochs": 2},
        encoder={
            "word_dim": 8,
            "d_sem": 6,
            "etype_dim": 5,
            "category_dim": 5,
            "history_len": 4,
            "max_seq_len": 12,
        },
        trainer={"epochs": 1, "batch_size": 32, "predictor_hidden": 4},
        seed=7,
    )
    cfg_json = json.dumps(cfg)
    out = tmp_path / "data"

    summary = eenr.gen_data(cfg_json, str(out), 7)
    assert summary["news"] == 25

    model = str(tmp_path / "ee_model")
    trained = eenr.train_ee(cfg_json, summary["files"]["ee_corpus"], model)
    assert trained["epochs"] == 4
    assert trained["nll_per_epoch"][-1] < trained["nll_per_epoch"][0]

    scored = eenr.eval_ee(model, summary["files"]["ee_corpus"])
    assert 0.0 <= scored["span_f1"] <= 1.0

    extracted = str(tmp_path / "news_extracted.jsonl")
    eenr.extract(model, summary["files"]["news"], extracted)

    graph = str(tmp_path / "etype_graph.tsv")
    eenr.build_graph(cfg_json, extracted, summary["files"]["impressions"], graph)
    emb = str(tmp_path / "etype_emb.json")
    eenr.embed_graph(cfg_json, graph, emb)

    rec = str(tmp_path / "rec_model")
    result = eenr.train_rec(cfg_json, extracted, summary["files"]["impressions"], emb, "EENR", rec)
    assert result["variant"] == "EENR"

    metrics = eenr.evaluate(cfg_json, rec, extracted, summary["files"]["impressions"], emb)
    assert 0.0 <= metrics["metrics"]["auc"] <= 1.0


def test_variant_names():
    assert eenr.variant_names() == ["TITLE", "TITLE+RA", "TITLE+ET+RA", "TITLE+NT+RA", "EENR"]

import json
import math

import pytest

import motifscope as ms


def test_version():
    assert ms.__version__.count(".") == 2


def test_featurize_edges_swap():
    feats = ms.featurize_edges(
        "0xe",
        [("0xe", "0xc", "Stablecoin"), ("0xc", "0xe", "Cryptocurrency")],
        types={"0xc": "contract"},
    )
    assert feats["m3(E,C)"] == 1
    assert feats["(E,C)Stablecoin"] == 1
    assert feats["(C,E)Cryptocurrency"] == 1
    only_motifs = ms.featurize_edges("0xe", [("0xe", "0xa", "Other")], mode="M")
    assert only_motifs == {"m1(E,A)": 1}


def test_bad_inputs_raise():
    with pytest.raises(ms.ConfigError):
        ms.featurize_edges("0xe", [("0xe", "0xa", "NotACategory")])
    with pytest.raises(ValueError):
        ms.stats("/does/not/exist")


def test_itemset_and_clustering():
    samples = [{"a": 1, "b": 2}] * 9 + [{"a": 1}]
    keys, support = ms.mine_itemset(samples, 0.8)
    assert keys == ["a", "b"]
    assert support == pytest.approx(0.9)

    pts = [[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]]
    z = ms.linkage(pts, "ward")
    assert len(z) == 3
    labels = ms.cut_tree(z, len(pts), 2)
    assert labels == [0, 0, 1, 1]
    assert ms.silhouette(pts, labels) > 0.9
    assert math.isclose(ms.silhouette(pts, [0, 1, 2, 3]), 0.0)


def test_synth_pipeline_and_model(tmp_path):
    corpus = tmp_path / "in"
    summary = ms.synth(str(corpus), 1000, seed=2, skew="uniform")
    assert summary["transactions"] == 1000
    out = tmp_path / "out"
    result = ms.run_pipeline(
        {
            "transfers": str(corpus / "transfers.csv"),
            "tokens": str(corpus / "tokens.json"),
            "accounts": str(corpus / "accounts.json"),
            "methods": str(corpus / "methods.csv"),
            "out_dir": str(out),
            "folds": 3,
            "compare_models": ["dt"],
            "min_matches": 1,
        }
    )
    assert result["supervised"]
    assert "signatures.json" in result["artifacts"]

    model = ms.Model.load(str(out / "model.json"))
    sigs = ms.Signatures.load(str(out / "signatures.json"))
    rows = ms.featurize_store(str(out / "store"), threads=2)
    assert len(rows) == ms.stats(str(out / "store"))["transactions"]
    truth = {}
    for line in (corpus / "truth.csv").read_text().splitlines()[1:]:
        fields = line.split(",")
        truth[fields[0]] = fields[2]
    hits = sum(model.predict(r["features"]) == truth[r["tx_hash"]] for r in rows)
    assert hits / len(rows) > 0.9
    assert any(sigs.match(r["features"]) for r in rows)
    report = json.loads((out / "report.json").read_text())
    assert report["mean"]["f1"] > 0.9

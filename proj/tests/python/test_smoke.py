import os
import subprocess

import numpy as np
import pytest

import ntlbench


def test_metrics_match_a_recount():
    preds = [1, 0, 1, 1, 0, 0, 1, 0]
    labels = [1, 0, 0, 1, 1, 0, 1, 0]
    m = ntlbench.metrics(preds, labels)
    assert {k: m["confusion"][k] for k in ("tp", "tn", "fp", "fn")} == {"tp": 3, "tn": 3, "fp": 1, "fn": 1}
    assert m["accuracy"] == 0.75
    assert m["auc"] == pytest.approx((0.75 + 0.75) / 2, abs=1e-15)


def test_single_point_auc_is_exact():
    assert ntlbench.single_point_auc(0.40, 0.53) == 0.465
    assert ntlbench.single_point_auc(0.75, 0.35) == 0.55


def test_defuzzify_symmetric_and_empty():
    assert ntlbench.defuzzify_centroid([1.0] * 101) == pytest.approx(0.5, abs=1e-12)
    assert ntlbench.defuzzify_centroid([0.0] * 101) is None


def test_subsample_hits_the_level_exactly():
    labels = [i % 2 for i in range(2000)]
    for level in ntlbench.default_levels():
        ids = ntlbench.subsample(labels, level, 1000, 7)
        assert len(ids) == 1000
        assert sum(labels[i] for i in ids) == round(1000 * level)
        assert ids == ntlbench.subsample(labels, level, 1000, 7)


def test_svm_separates_blobs():
    rng = np.random.default_rng(0)
    y = np.arange(100) % 2
    x = np.column_stack([np.where(y == 1, 3.0, -3.0) + rng.normal(0, 0.5, 100), rng.normal(0, 1, 100)])
    model = ntlbench.train_svm(x, y.tolist(), {"seed": 1})
    assert model["type"] == "svm"
    scores = np.asarray(ntlbench.svm_decision(model, x))
    assert np.array_equal(scores > 0, y == 1)


def test_dataset_features_and_rules():
    ds = ntlbench.generate_synthetic({"n_customers": 200, "ntl_fraction": 0.25, "seed": 5})
    assert ds.customer_count == 200
    ids, x, labels = ntlbench.feature_matrix(ds, 12)
    assert x.shape == (len(ids), 12)
    assert set(labels) <= {0, 1}
    rows = ntlbench.attributes(ds)
    rules = ntlbench.shipped_rules()
    assert ntlbench.normalize_rules(ntlbench.normalize_rules(rules)) == ntlbench.normalize_rules(rules)
    label, fired = ntlbench.classify_boolean(rules, {k: v for k, v in rows[0].items() if k not in ("customer_id", "label")})
    assert label in (0, 1) and (label == 1) == bool(fired)


def test_bad_rules_raise_ntl_error():
    with pytest.raises(ntlbench.NtlError):
        ntlbench.normalize_rules("rule r: no_such_attribute > 1")


def test_run_experiment_small():
    report, curves = ntlbench.run_experiment({
        "synthetic": {"n_customers": 400, "ntl_fraction": 0.2, "seed": 1},
        "classifiers": [{"type": "boolean"}, {"type": "svm", "svm": {"epochs": 5}}],
        "levels": [0.0, 0.3],
        "target_size": 150,
        "folds": 3,
        "master_seed": 9,
    })
    assert [t["status"] for t in report["training"]] == ["skipped", "ok"]
    assert "svm_by_validation" in curves


def test_cli_in_process_and_binary(tmp_path):
    code, _, err = ntlbench.cli(["--frobnicate"])
    assert code == 1 and "Usage" in err
    assert ntlbench.cli(["gen", "--out", str(tmp_path / "d"), "--customers", "50", "--seed", "2"])[0] == 0
    binary = os.environ.get("NTLBENCH_CLI")
    if binary:
        ok = subprocess.run([binary, "validate", "--consumption", str(tmp_path / "d" / "consumption.csv"),
                             "--inspections", str(tmp_path / "d" / "inspections.csv")], capture_output=True)
        assert ok.returncode == 0
        missing = subprocess.run([binary, "validate", "--consumption", "/nonexistent.csv", "--inspections", "/x.csv"],
                                 capture_output=True)
        assert missing.returncode == 2

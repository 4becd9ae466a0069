import pathlib

import pytest

import anongbdt as ag

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


def test_synthetic_overlap():
    d0, d1, common = ag.gen_synthetic(40, 30, 2, 1, overlap=0.5, seed=3)
    assert d0.n == 40 and d1.n == 30
    assert len(set(d0.ids) & set(d1.ids)) == common == 15


def test_train_and_infer_roundtrip():
    d0, d1, _ = ag.gen_synthetic(150, 120, 2, 2, overlap=0.7, seed=4)
    cfg = ag.TrainConfig(T=1, D=3, B=4)
    run = ag.train(d0, d1, cfg, seed=4)
    again = ag.train(d0, d1, cfg, seed=4)
    assert run["hashes"] == again["hashes"]
    assert run["traffic"][0]["bytes_sent"] > 0
    p = ag.infer(d0, d1, *run["models"], seed=5)
    assert len(p) == d0.n
    matched = set(d1.ids)
    assert all(q == 0.5 for q, i in zip(p, d0.ids) if i not in matched)


def test_secure_matches_reference_predictions():
    d0, d1, _ = ag.gen_synthetic(120, 120, 2, 2, overlap=1.0, seed=6)
    cfg = ag.TrainConfig(T=2, D=3, B=4)
    run = ag.train(d0, d1, cfg, protocol="base", seed=6)
    p = ag.infer(d0, d1, *run["models"], seed=7)
    ref = ag.plain_reference(d0, d1, cfg)
    assert max(abs(a - b) for a, b in zip(p, ref["p"])) < 0.02


def test_bundled_csv_and_errors(tmp_path):
    d0 = ag.load_csv(str(DATA / "bcw_party0.csv"))
    assert d0.n == 569 and d0.m == 15 and len(d0.y) == 569
    bad = tmp_path / "dup.csv"
    bad.write_text("id,a\n1,2\n1,3\n")
    with pytest.raises(ValueError):
        ag.load_csv(str(bad))
    with pytest.raises(ValueError):
        ag.TrainConfig(D=1)


def test_f1_and_sigmoid():
    assert ag.f1_score([0.9, 0.7, 0.2], [1, 0, 0]) == pytest.approx(2 / 3)
    assert ag.sigmoid_approx(0.0) == pytest.approx(0.5)
    assert ag.sigmoid_approx(10.0) == 1.0

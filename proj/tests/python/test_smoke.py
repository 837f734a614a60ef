"""Smoke tests for the compiled extension: wiring, determinism, and a few
cheap distributional sanity checks. The heavy verification lives in the C++
acceptance suite."""

import math
import os
import subprocess

import pytest

import rectiles as rt


def test_stream_determinism():
    a = rt.RandomStream(123, "smoke", 0)
    b = rt.RandomStream(123, "smoke", 0)
    assert [a.uniform() for _ in range(100)] == [b.uniform() for _ in range(100)]
    c = rt.RandomStream(123, "smoke", 1)
    assert a.uniform() != c.uniform()


def test_uniform_support_and_exponential():
    s = rt.RandomStream(7, "unif", 0)
    us = [s.uniform() for _ in range(10000)]
    assert all(0.0 < u < 1.0 for u in us)
    t = rt.RandomStream(7, "unif", 0)
    e_stream = rt.RandomStream(7, "unif", 0)
    u = t.uniform()
    assert e_stream.exponential() == pytest.approx(-math.log(u), rel=0, abs=0)


def test_records_match_bruteforce():
    s = rt.RandomStream(11, "rec", 0)
    pts = rt.sample_ppp(s, rt.Rect(0, 4, 0, 4))
    fast = rt.extract_records(pts)
    slow = sorted(
        (p for p in pts if not any(q.t < p.t and q.x < p.x for q in pts)),
        key=lambda p: p.t,
    )
    assert [(p.t, p.x) for p in fast] == [(p.t, p.x) for p in slow]


def test_matrix_is_rank_one_and_sums():
    s = rt.RandomStream(13, "m1n", 0)
    m = rt.sample_m1n(s, 3)
    e = m.entries
    for i in range(3):
        for k in range(3):
            for j in range(3):
                for l in range(3):
                    lhs = e[i][j] * e[k][l]
                    rhs = e[i][l] * e[k][j]
                    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)
    assert m.entry_sum() == pytest.approx(m.spanned_area(), rel=1e-12)
    r = rt.antidiagonal_reflect(m)
    assert r.entry(0, 0) == m.entry(2, 2)
    assert r.entry(2, 2) == m.entry(0, 0)


def test_chain_labels_and_tiles():
    s = rt.RandomStream(17, "chain", 0)
    chain = rt.simulate_quadrant_chain(s, -1, 3)
    assert chain.label_min <= -1 and chain.label_max >= 3
    r0, r1 = chain.record(0), chain.record(1)
    assert r0.x > r0.t and r1.t > r1.x
    tiles = rt.tile_matrix_from_chain(chain, 1, 2)
    span = (chain.record(3).t - r1.t) * (r1.x - chain.record(3).x)
    assert tiles.entry_sum() == pytest.approx(span, rel=1e-12)


def test_box_records_conserve_area():
    s = rt.RandomStream(19, "box", 0)
    for _ in range(200):
        res = rt.box_records(s, rt.Rect(0, 1, 0, 1))
        assert res.tiles.n == len(res.records) + 1
        assert res.tiles.entry_sum() == pytest.approx(1.0, rel=1e-12)


def test_identity_catalog_and_batches():
    names = rt.identity_names()
    assert "eq1_lhs" in names and len(names) == 14
    s = rt.RandomStream(23, "batch", 0)
    rows = rt.sample_identity(s, "prop1_lhs", 2, 50)
    assert len(rows) == 50 and len(rows[0]) == 4
    with pytest.raises(ValueError):
        rt.sample_identity(s, "nope", 1, 10)


def test_permutation_test_and_tame():
    assert rt.tame([0.0, 1.0]) == [0.0, 0.5]
    s = rt.RandomStream(29, "perm", 0)
    g = rt.RandomStream(29, "gen", 0)
    a = [[g.uniform()] for _ in range(300)]
    b = [[g.uniform()] for _ in range(300)]
    rep = rt.permutation_test(a, b, "ks", 99, 0.05, s)
    assert 1.0 / 100.0 <= rep.p_value <= 1.0
    identical = rt.permutation_test(a, a, "energy", 39, 0.05, s)
    assert identical.p_value == 1.0
    d, p = rt.ks_two_sample([1, 2, 3], [1.5, 2.5])
    assert d == pytest.approx(1.0 / 3.0)
    assert rt.binomial_upper_quantile(20, 0.05, 0.99) == 4


def test_tiny_suite_runs_clean():
    cfg = rt.RunConfig()
    cfg.identities = ["eq2_lhs"]
    cfg.draws_per_side = 500
    cfg.replicates = 5
    cfg.permutations = 39
    code, report = rt.run_test_suite(cfg)
    assert code == 0
    assert "summary check=eq2" in report
    code2, report2 = rt.run_test_suite(cfg)
    assert (code2, report2) == (code, report)


def test_cli_sample_csv(tmp_path):
    cli = os.environ.get("RECTILES_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI binary not available")
    out = tmp_path / "csv"
    subprocess.run(
        [cli, "sample", "--identities", "eq2_lhs", "--N", "3", "--out", str(out)],
        check=True,
        capture_output=True,
    )
    text = (out / "eq2_lhs_n1.csv").read_bytes().decode()
    lines = text.split("\n")
    assert lines[0] == "draw,c_1"
    assert len([ln for ln in lines if ln]) == 4
    assert "\r" not in text

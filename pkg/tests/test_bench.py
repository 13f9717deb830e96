import csv
import io
import json

import pytest

from probkg.bench import (
    DEFAULT_BUCKETS,
    BenchCase,
    BenchConfig,
    Bucket,
    bucket_of,
    percentile_gain,
    percentile_gain_ratio,
    run_bench,
    to_csv,
    write_outputs,
)


def small_config(**kw):
    base = dict(per_bucket=2, repetitions=1, seed=5, n_cap=18)
    base.update(kw)
    return BenchConfig(**base)


def test_gain_ratio():
    assert percentile_gain_ratio(100e-6, 18e-6) == pytest.approx(0.82)
    assert percentile_gain_ratio(5.0, 5.0) == 0


def test_percentile_gain():
    gains = [0.1, 0.5, 0.9, 0.2, 0.7]
    assert percentile_gain(gains, 100) == 0.1
    assert percentile_gain(gains, 20) == 0.9
    assert percentile_gain(gains, 50) == 0.5
    assert percentile_gain([0.3], 90) == 0.3


def test_default_buckets_partition():
    for d in range(2, 16):
        for n in range(1, 40):
            assert bucket_of(DEFAULT_BUCKETS, d, n) >= 0
    assert bucket_of(DEFAULT_BUCKETS, 1, 3) == -1
    assert bucket_of(DEFAULT_BUCKETS, 16, 3) == -1
    with pytest.raises(ValueError):
        bucket_of((Bucket(1, 5), Bucket(3, 7)), 4, 2)


def test_rows_and_agreement():
    result = run_bench(small_config())
    rows = result.bucket_rows()
    cfg = result.config
    assert len(rows) == len(cfg.buckets) * len(cfg.engines)
    assert sorted(t.case.bucket for t in result.timings) == sorted(
        bi for bi in range(len(cfg.buckets)) for _ in range(cfg.per_bucket))
    for t in result.timings:
        assert cfg.buckets[t.case.bucket].contains(*t.case.signature[:2])
    assert result.max_prob_disagreement() <= 1e-9


def test_oracle_cap_reports_timeout():
    result = run_bench(small_config(oracle_var_cap=4))
    oracle_rows = [r for r in result.bucket_rows() if r["engine"] == "oracle"]
    assert any(r["mean_us"] == "time-out" for r in oracle_rows)
    assert result.totals()["oracle"] is None


def test_identical_engines_gain_zero():
    cases = [BenchCase(0, [frozenset({1, 2}), frozenset({2})], 2, {1: 0.5, 2: 0.5})]
    result = run_bench(small_config(engines=("semiring", "kc")), cases)
    t = result.timings[0]
    t.times["kc"] = t.times["semiring"]
    assert result.gains("kc") == {0: [0.0]}


def test_graph_generator():
    result = run_bench(small_config(generator="graph", graph_edges=30, graph_queries=15))
    assert result.timings
    assert result.max_prob_disagreement() <= 1e-9


def test_unknown_generator():
    with pytest.raises(ValueError):
        run_bench(small_config(generator="nope"))


def test_config_from_file(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"per_bucket": 3, "buckets": [[2, 5, 1, 6]],
                                "adaptive.d_max": 7, "engines": ["semiring", "kc"]}))
    cfg = BenchConfig.load(path)
    assert cfg.per_bucket == 3 and cfg.buckets == (Bucket(2, 5, 1, 6),)
    assert cfg.engine.d_max == 7 and cfg.engines == ("semiring", "kc")


def test_write_outputs(tmp_path):
    result = run_bench(small_config(buckets=(Bucket(2, 5, 1, 6), Bucket(13, 16))))
    paths = write_outputs(result, tmp_path)
    rows = list(csv.DictReader(io.StringIO(paths["buckets"].read_text())))
    assert len(rows) == 2 * 4
    assert paths["bucket_times"].stat().st_size > 0
    assert paths["percentile_gains"].read_bytes()[:4] == b"\x89PNG"
    summary = json.loads(paths["summary"].read_text())
    assert summary["cases"] == 4
    assert to_csv([]) == ""

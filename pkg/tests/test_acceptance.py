"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line."""
import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from cascadelab.builder import build_final_graph, build_snapshot, snapshot_series
from cascadelab.classifiers import mlp_init, mlp_loss_and_grad
from cascadelab.cli import main
from cascadelab.evolution import series_stats
from cascadelab.experiments import ExperimentConfig, run_final_stage
from cascadelab.extract import final_table
from cascadelab.metrics import auc
from cascadelab.report import read_csv_rows
from cascadelab.static import topological
from cascadelab.synthgen import gen_dataset

import oracles
from conftest import random_connected_pairs, make_graph
from test_builder import _connected_to_seed, _random_cascade

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\nacceptance {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def test_01_topology_oracles(verdict):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    worst, bad = 0.0, 0
    for _ in range(200):
        n = rng.randint(1, 200)
        g = make_graph(n, random_connected_pairs(n, rng.randint(0, 3 * n), rng))
        adj = oracles.adjacency(g.vertices, [e.pair for e in g.edges])
        t = topological(g)
        reals = [(t.clustering, oracles.clustering(adj)),
                 (t.assortativity, oracles.pearson_assortativity(adj)),
                 (t.avg_path_length, oracles.avg_path_length(adj))]
        worst = max([worst] + [abs(a - b) for a, b in reals])
        bad += t.diameter != oracles.diameter(adj)
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-10 and bad == 0 and elapsed < 60,
            f"200 graphs, max real error {worst:.1e}, diameter mismatches {bad}, {elapsed:.1f}s")


def test_02_auc_oracle(verdict):
    r = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(r.integers(2, 1001))
        # few distinct levels force many ties
        scores = r.integers(0, int(r.integers(1, 20)), n) / 7.0
        labels = r.integers(0, 2, n)
        labels[0], labels[1] = 0, 1
        pos, neg = scores[labels == 1], scores[labels == 0]
        # O(P*N) pair counting, vectorized
        diff = pos[:, None] - neg[None, :]
        ref = ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size
        worst = max(worst, abs(auc(scores, labels) - ref))
    verdict(2, worst <= 1e-12, f"1000 instances, max error {worst:.1e}")


def test_03_formulas(verdict):
    s = series_stats([1, 2, 3])
    expected = (2, 14 / 6, 216 / 84, np.sqrt(2 / 3), 2 / 3, 3)
    err = max(abs(a - b) for a, b in zip(s.values(), expected))
    ones = all(series_stats([1.0] * n).linear_weighted_mean == 1.0
               and series_stats([1.0] * n).quadratic_weighted_mean == 1.0 for n in range(1, 97))
    verdict(3, err <= 1e-12 and ones, f"[1,2,3] max error {err:.1e}, ones exact for n=1..96: {ones}")


def test_04_builder_fidelity(via_scenario, verdict):
    g = build_final_graph(*via_scenario)
    edges = {e.pair: e.type for e in g.edges}
    fig_ok = (g.vertices == {"s", "v2", "v3", "v4"} and
              edges == {("s", "v2"): "comment", ("s", "v4"): "comment",
                        ("v2", "v4"): "friendship", ("v2", "v3"): "reshare"})
    failures = []
    for seed in range(1000):
        post, inter, friends = _random_cascade(seed)
        series = snapshot_series(post, inter, friends)
        for prev, cur in zip(series, series[1:]):
            if not (prev.vertices <= cur.vertices and prev.edge_pairs() <= cur.edge_pairs()):
                failures.append((seed, "monotone"))
                break
        ks = {1, 96} | set(random.Random(seed).sample(range(2, 96), 10))
        for k in sorted(ks):
            if series[k - 1] != build_snapshot(post, inter, friends, 30 * k) \
                    or not _connected_to_seed(series[k - 1]):
                failures.append((seed, k))
                break
    verdict(4, fig_ok and not failures,
            f"figure scenario {'exact' if fig_ok else 'WRONG'}, 1000 cascades, failures {failures[:5]}")


@pytest.mark.slow
def test_05_null_calibration(verdict):
    lo, hi = 0.45, 0.55
    metrics = ("auc", "kappa_scaled", "f1")
    runs = {}
    for seed in range(10):
        table = final_table(gen_dataset("null", 500, seed=seed))
        rep = run_final_stage(table, config=ExperimentConfig(seed=seed))
        for kind, c in rep["classifiers"].items():
            vals = (c["full"]["mean"]["auc"], c["full"]["mean"]["kappa_scaled"],
                    c["balanced"]["mean"]["f1"])
            runs.setdefault(kind, []).append(vals)
    # the criterion is judged on the 10-seed mean; single runs carry ~0.02 sampling noise
    means = {(k, m): float(np.mean([v[i] for v in vals]))
             for k, vals in runs.items() for i, m in enumerate(metrics)}
    single = [x for vals in runs.values() for v in vals for x in v]
    stray = sum(not lo <= x <= hi for x in single)
    ok = all(lo <= v <= hi for v in means.values())
    verdict(5, ok, f"10-seed means in [{min(means.values()):.3f}, {max(means.values()):.3f}]; "
                   f"single runs in [{min(single):.3f}, {max(single):.3f}], "
                   f"{stray} of {len(single)} outside the band")


@pytest.mark.slow
def test_06_separable_signal(verdict):
    table = final_table(gen_dataset("separable", 500, seed=0))
    rep = run_final_stage(table, ("rf",), ExperimentConfig(kinds=("rf",)))
    value = rep["classifiers"]["rf"]["full"]["mean"]["auc"]
    verdict(6, value >= 0.9, f"RF final-stage AUC {value:.3f}")


def test_07_report_structure(tmp_path, verdict):
    data, out_f, out_e = tmp_path / "data", tmp_path / "final", tmp_path / "early"
    fast = ["--reps", "1", "--hyper", "rf_trees=10", "--hyper", "mlp_epochs=100"]
    inputs = ["--posts", str(data / "posts.jsonl"), "--interactions",
              str(data / "interactions.jsonl"), "--friendships", str(data / "friendships.csv")]
    codes = [main(["synth", "--preset", "separable", "--n-per-class", "30", "--out", str(data)]),
             main(["experiment"] + inputs + ["--out", str(out_f)] + fast),
             main(["experiment"] + inputs + ["--out", str(out_e), "--scenario", "early"] + fast)]
    table = read_csv_rows(out_f / "table.csv")
    table_ok = ([r["classifier"] for r in table] == ["ld", "rf", "mlp"] and
                all(list(r)[1:] == ["precision", "recall", "accuracy", "f1"] for r in table))
    roc = read_csv_rows(out_f / "roc.csv")
    roc_ok = {r["classifier"] for r in roc} == {"ld", "rf", "mlp"}
    curves = read_csv_rows(out_e / "curves_early.csv")
    per = {}
    for r in curves:
        per.setdefault((r["classifier"], r["metric"]), []).append(int(r["delta"]))
    curves_ok = len(per) == 18 and all(v == list(range(30, 2881, 30)) for v in per.values())
    readme = (ROOT / "README.md").read_text()
    doc_ok = "0.654" in readme and "0.742" in readme and "0.675" in readme and "0.695" in readme
    verdict(7, codes == [0, 0, 0] and table_ok and roc_ok and curves_ok and doc_ok,
            f"table 3x4 {table_ok}, roc csv {roc_ok}, 96-point curves {curves_ok}, "
            f"reference values documented {doc_ok}")


def test_08_mlp_gradient(verdict):
    r = np.random.default_rng(0)
    Z = r.normal(size=(5, 3))
    y = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
    params = mlp_init(3, 6, r)
    _, grads = mlp_loss_and_grad(params, Z, y)
    eps, worst = 1e-6, 0.0
    for name, p in params.items():
        for ix in np.ndindex(p.shape):
            old = p[ix]
            p[ix] = old + eps
            up = mlp_loss_and_grad(params, Z, y)[0]
            p[ix] = old - eps
            down = mlp_loss_and_grad(params, Z, y)[0]
            p[ix] = old
            num = (up - down) / (2 * eps)
            ana = grads[name][ix]
            worst = max(worst, abs(num - ana) / max(1e-8, abs(num) + abs(ana)))
    verdict(8, worst < 1e-5, f"max relative error {worst:.1e}")


@pytest.mark.slow
def test_09_extraction_performance(verdict):
    ds = gen_dataset("separable", 5000, seed=9)
    groups = ds.by_post()
    biggest = max(len({i.user_id for i in v}) + 1 for v in groups.values())
    t0 = time.perf_counter()
    par = final_table(ds, workers=4)
    elapsed = time.perf_counter() - t0
    seq = final_table(ds, workers=1)
    same = par.post_ids == seq.post_ids and par.X.tobytes() == seq.X.tobytes()
    verdict(9, len(par.post_ids) == 10000 and biggest <= 500 and elapsed < 60 and same,
            f"10000 cascades (largest {biggest} vertices) in {elapsed:.1f}s with 4 workers, "
            f"bit-identical to sequential: {same}")


@pytest.mark.slow
def test_10_early_stage_determinism(tmp_path, verdict):
    data = tmp_path / "data"
    assert main(["synth", "--preset", "null", "--n-per-class", "40", "--seed", "3",
                 "--out", str(data)]) == 0
    inputs = ["--posts", str(data / "posts.jsonl"), "--interactions",
              str(data / "interactions.jsonl"), "--friendships", str(data / "friendships.csv")]
    args = ["--scenario", "early", "--seed", "17", "--reps", "2", "--hyper", "rf_trees=10",
            "--hyper", "mlp_epochs=100"]
    blobs = []
    for run, workers in (("a", "1"), ("b", "2")):
        out = tmp_path / run
        assert main(["experiment"] + inputs + args + ["--out", str(out), "--workers", workers]) == 0
        doc = json.loads((out / "metrics.json").read_text())
        # output dir and worker count are run metadata; compare everything else byte for byte
        doc["config"].pop("out"), doc["config"].pop("workers"), doc.pop("config_hash")
        blobs.append(json.dumps(doc, sort_keys=True, indent=1).encode())
    # a second run into the same directory must reproduce the file exactly
    first = (tmp_path / "a" / "metrics.json").read_bytes()
    assert main(["experiment"] + inputs + args + ["--out", str(tmp_path / "a"), "--workers", "1"]) == 0
    again = (tmp_path / "a" / "metrics.json").read_bytes()
    verdict(10, first == again and blobs[0] == blobs[1],
            f"rerun byte-identical {first == again}, 1 vs 2 workers identical {blobs[0] == blobs[1]}")

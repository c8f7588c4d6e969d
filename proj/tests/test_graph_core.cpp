#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "gsp/dataset_io.hpp"
#include "gsp/graph.hpp"
#include "gsp/sbm.hpp"
#include "gsp/split.hpp"

#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace gsp;
using namespace testutil;

namespace {

// Reference normalization done the obvious dense way: build A + I, take
// row-sum degrees, scale both sides by D^{-1/2}.
DenseMatrix dense_normalized(const SparseMatrix& a) {
    int n = a.rows;
    DenseMatrix ai = a.densify();
    for (int i = 0; i < n; ++i) ai.at(i, i) += 1.0;
    std::vector<double> inv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += ai.at(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(deg);
    }
    DenseMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) = inv_sqrt[i] * ai.at(i, j) * inv_sqrt[j];
    return out;
}

SparseMatrix random_adjacency(Rng& rng, int n, double p) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    return adjacency_from_edges(n, edges);
}

}  // namespace

TEST_CASE("single isolated node normalizes to the identity") {
    SparseMatrix a = adjacency_from_edges(1, {});
    SparseMatrix an = normalize_adjacency(a);
    REQUIRE(an.nnz() == 1);
    REQUIRE(an.densify().at(0, 0) == 1.0);
}

TEST_CASE("one edge on two nodes gives four entries of one half") {
    SparseMatrix a = adjacency_from_edges(2, {{0, 1}});
    DenseMatrix an = normalize_adjacency(a).densify();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(an.at(i, j) == 0.5);
}

TEST_CASE("path graph normalization matches the dense reference") {
    SparseMatrix a = adjacency_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    DenseMatrix got = normalize_adjacency(a).densify();
    DenseMatrix want = dense_normalized(a);
    REQUIRE(max_abs_diff(got, want) <= 1e-12);
    // endpoints have degree 2 after the self-loop, interior nodes 3
    REQUIRE(std::abs(got.at(0, 0) - 0.5) <= 1e-12);
    REQUIRE(std::abs(got.at(2, 2) - 1.0 / 3.0) <= 1e-12);
    REQUIRE(std::abs(got.at(0, 1) - 1.0 / std::sqrt(6.0)) <= 1e-12);
}

TEST_CASE("normalization is symmetric and matches the dense reference on random graphs") {
    Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + int(rng.below(20));
        SparseMatrix a = random_adjacency(rng, n, 0.3);
        SparseMatrix an = normalize_adjacency(a);
        REQUIRE_NOTHROW(an.validate());
        DenseMatrix d = an.densify();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                REQUIRE(std::abs(d.at(i, j) - d.at(j, i)) <= 1e-12);
        REQUIRE(max_abs_diff(d, dense_normalized(a)) <= 1e-12);
    }
}

TEST_CASE("normalization rejects self-loops and negative weights") {
    SparseMatrix with_loop = SparseMatrix::from_sorted_triples(
        2, 2, {{0, 0}, {0, 1}, {1, 0}}, {1.0, 1.0, 1.0});
    REQUIRE_THROWS_AS(normalize_adjacency(with_loop), ValidationError);
    SparseMatrix negative = SparseMatrix::from_sorted_triples(
        2, 2, {{0, 1}, {1, 0}}, {-1.0, -1.0});
    REQUIRE_THROWS_AS(normalize_adjacency(negative), ValidationError);
}

TEST_CASE("adjacency_from_edges symmetrizes and collapses duplicates") {
    SparseMatrix a = adjacency_from_edges(3, {{0, 1}, {1, 0}, {0, 1}, {1, 2}});
    REQUIRE(a.nnz() == 4);
    DenseMatrix d = a.densify();
    REQUIRE(d.at(0, 1) == 1.0);
    REQUIRE(d.at(1, 0) == 1.0);
    REQUIRE(d.at(1, 2) == 1.0);
    REQUIRE(d.at(2, 1) == 1.0);
    REQUIRE(d.at(0, 2) == 0.0);
}

TEST_CASE("degree one-hot puts each node in its clamped degree column") {
    SparseMatrix a = adjacency_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    DenseMatrix f = degree_onehot_features(a, 32);
    REQUIRE(f.cols == 32);
    int expect_col[5] = {1, 2, 2, 2, 1};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 32; ++j)
            REQUIRE(f.at(i, j) == (j == expect_col[i] ? 1.0 : 0.0));
    DenseMatrix clamped = degree_onehot_features(a, 2);
    for (int i = 0; i < 5; ++i) REQUIRE(clamped.at(i, 1) == 1.0);
}

TEST_CASE("loads the small node dataset fixture") {
    Dataset ds = load_dataset(fixtures_dir() + "/mini_node.json");
    REQUIRE(ds.task == TaskKind::Node);
    REQUIRE(ds.classes == 2);
    REQUIRE(ds.graphs.size() == 1);
    REQUIRE(ds.num_items() == 2);
    REQUIRE(ds.feature_dim() == 2);
    REQUIRE(ds.label_of(0) == 0);
    REQUIRE(ds.label_of(1) == 1);
    REQUIRE(ds.graphs[0].adjacency.nnz() == 2);
}

TEST_CASE("loads the small graph dataset fixture") {
    Dataset ds = load_dataset(fixtures_dir() + "/mini_graph.json");
    REQUIRE(ds.task == TaskKind::Graph);
    REQUIRE(ds.graphs.size() == 4);
    REQUIRE(ds.num_items() == 4);
    std::vector<int> want_labels = {0, 1, 1, 0};
    for (int i = 0; i < 4; ++i) REQUIRE(ds.label_of(i) == want_labels[i]);
}

TEST_CASE("loader rejects every malformed fixture") {
    fs::path dir = fs::path(fixtures_dir()) / "malformed";
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        INFO(entry.path().filename().string());
        REQUIRE_THROWS_AS(load_dataset(entry.path().string()), std::runtime_error);
        ++count;
    }
    REQUIRE(count >= 20);
}

TEST_CASE("featureless graphs get degree one-hot columns") {
    std::string path = scratch_dir() + "/featureless.json";
    std::ofstream(path) << R"({"task": "graph", "classes": 2, "graphs": [
        {"numNodes": 3, "edges": [[0, 1], [1, 2]], "graphLabel": 0},
        {"numNodes": 2, "edges": [[0, 1]], "graphLabel": 1}]})";
    Dataset ds = load_dataset(path, 8);
    REQUIRE(ds.feature_dim() == 8);
    REQUIRE(ds.graphs[0].features.at(1, 2) == 1.0);
    REQUIRE(ds.graphs[0].features.at(0, 1) == 1.0);
    REQUIRE(ds.graphs[1].features.at(0, 1) == 1.0);
}

TEST_CASE("save then load reproduces the dataset exactly") {
    SbmConfig cfg;
    cfg.sizes = {20, 15, 15};
    cfg.feature_dim = 8;
    cfg.seed = 7;
    Dataset ds = synthesize_sbm(cfg);
    std::string path = scratch_dir() + "/roundtrip.json";
    save_dataset(ds, path);
    Dataset back = load_dataset(path);

    REQUIRE(back.task == ds.task);
    REQUIRE(back.classes == ds.classes);
    REQUIRE(back.graphs.size() == ds.graphs.size());
    const Graph& g0 = ds.graphs[0];
    const Graph& g1 = back.graphs[0];
    REQUIRE(g1.num_nodes == g0.num_nodes);
    REQUIRE(g1.node_labels == g0.node_labels);
    REQUIRE(g1.adjacency.offsets == g0.adjacency.offsets);
    REQUIRE(g1.adjacency.indices == g0.adjacency.indices);
    REQUIRE(g1.adjacency.values == g0.adjacency.values);
    REQUIRE(bitwise_equal(g1.features, g0.features));
}

TEST_CASE("csv feature import replaces node features") {
    std::string path = scratch_dir() + "/feat.csv";
    std::ofstream(path) << "dim=3\n1,2,3\n4,5,6\n";
    DenseMatrix f = load_features_csv(path, 2);
    REQUIRE(f.rows == 2);
    REQUIRE(f.cols == 3);
    REQUIRE(f.at(0, 0) == 1.0);
    REQUIRE(f.at(1, 2) == 6.0);
}

TEST_CASE("csv import rejects malformed files") {
    auto write = [&](const std::string& name, const std::string& body) {
        std::string path = scratch_dir() + "/" + name;
        std::ofstream(path) << body;
        return path;
    };
    REQUIRE_THROWS_AS(load_features_csv(write("no_header.csv", "1,2\n3,4\n"), 2), ParseError);
    REQUIRE_THROWS_AS(load_features_csv(write("bad_dim.csv", "dim=x\n1\n"), 1), ParseError);
    REQUIRE_THROWS_AS(load_features_csv(write("short_row.csv", "dim=2\n1\n2,3\n"), 2),
                      ValidationError);
    REQUIRE_THROWS_AS(load_features_csv(write("long_row.csv", "dim=2\n1,2,3\n"), 1),
                      ValidationError);
    REQUIRE_THROWS_AS(load_features_csv(write("bad_cell.csv", "dim=2\n1,zzz\n"), 1), ParseError);
    REQUIRE_THROWS_AS(load_features_csv(write("few_rows.csv", "dim=2\n1,2\n"), 3),
                      ValidationError);
    REQUIRE_THROWS_AS(load_features_csv("/nonexistent/feat.csv", 2), ParseError);
}

TEST_CASE("one-shot split takes one item per class") {
    SbmConfig cfg;
    cfg.sizes = {10, 10, 10};
    cfg.seed = 3;
    Dataset ds = synthesize_sbm(cfg);
    FewShotSplit split = kshot_split(ds, 1, 0);
    REQUIRE(split.train_ids.size() == 3);
    std::set<int> seen_classes;
    for (int id : split.train_ids) seen_classes.insert(ds.label_of(id));
    REQUIRE(seen_classes.size() == 3);
}

TEST_CASE("leftover items split one to nine between validation and test") {
    SbmConfig cfg;
    cfg.sizes = {52, 52};
    cfg.seed = 5;
    Dataset ds = synthesize_sbm(cfg);
    FewShotSplit split = kshot_split(ds, 2, 0);
    REQUIRE(split.train_ids.size() == 4);
    REQUIRE(split.val_ids.size() == 10);
    REQUIRE(split.test_ids.size() == 90);
}

TEST_CASE("split is deterministic in the seed and partitions every item") {
    SbmConfig cfg;
    cfg.sizes = {30, 25, 20};
    cfg.seed = 11;
    Dataset ds = synthesize_sbm(cfg);
    FewShotSplit a = kshot_split(ds, 3, 17);
    FewShotSplit b = kshot_split(ds, 3, 17);
    REQUIRE(a.train_ids == b.train_ids);
    REQUIRE(a.val_ids == b.val_ids);
    REQUIRE(a.test_ids == b.test_ids);

    FewShotSplit c = kshot_split(ds, 3, 18);
    REQUIRE(a.train_ids != c.train_ids);

    std::vector<int> all;
    all.insert(all.end(), a.train_ids.begin(), a.train_ids.end());
    all.insert(all.end(), a.val_ids.begin(), a.val_ids.end());
    all.insert(all.end(), a.test_ids.begin(), a.test_ids.end());
    std::sort(all.begin(), all.end());
    REQUIRE(int(all.size()) == ds.num_items());
    for (int i = 0; i < int(all.size()); ++i) REQUIRE(all[i] == i);
}

TEST_CASE("classes smaller than k contribute all their items to train") {
    SbmConfig cfg;
    cfg.sizes = {2, 40};
    cfg.seed = 2;
    Dataset ds = synthesize_sbm(cfg);
    FewShotSplit split = kshot_split(ds, 5, 0);
    REQUIRE(split.train_ids.size() == 7);
    int from_small = 0;
    for (int id : split.train_ids)
        if (ds.label_of(id) == 0) ++from_small;
    REQUIRE(from_small == 2);
}

TEST_CASE("stratified split applies the one to nine cut per class") {
    SbmConfig cfg;
    cfg.sizes = {31, 61};
    cfg.seed = 9;
    Dataset ds = synthesize_sbm(cfg);
    FewShotSplit split = kshot_split(ds, 1, 0, true);
    // leftovers are 30 and 60, so validation takes 3 + 6
    REQUIRE(split.val_ids.size() == 9);
    REQUIRE(split.test_ids.size() == 81);
    int val_small = 0;
    for (int id : split.val_ids)
        if (ds.label_of(id) == 0) ++val_small;
    REQUIRE(val_small == 3);
}

TEST_CASE("split rejects an empty class and bad k") {
    Dataset ds = load_dataset(fixtures_dir() + "/mini_node.json");
    ds.classes = 3;  // no item carries label 2
    REQUIRE_THROWS_AS(kshot_split(ds, 1, 0), ValidationError);
    Dataset ok = load_dataset(fixtures_dir() + "/mini_node.json");
    REQUIRE_THROWS_AS(kshot_split(ok, 0, 0), ValidationError);
}

TEST_CASE("extreme block model produces two disjoint cliques") {
    Dataset ds = synthesize_sbm(2, {6, 5}, 1.0, 0.0, 4, 0);
    REQUIRE(ds.num_items() == 11);
    REQUIRE(ds.classes == 2);
    DenseMatrix a = ds.graphs[0].adjacency.densify();
    const std::vector<int>& labels = ds.graphs[0].node_labels;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            double want = (i != j && labels[i] == labels[j]) ? 1.0 : 0.0;
            REQUIRE(a.at(i, j) == want);
        }
}

TEST_CASE("block sizes add up and labels follow blocks") {
    Dataset ds = synthesize_sbm(2, {10, 10}, 0.3, 0.05, 4, 1);
    REQUIRE(ds.num_items() == 20);
    for (int i = 0; i < 10; ++i) REQUIRE(ds.label_of(i) == 0);
    for (int i = 10; i < 20; ++i) REQUIRE(ds.label_of(i) == 1);
}

TEST_CASE("empirical edge count sits within three sigma of its mean") {
    std::vector<int> sizes = {25, 25};
    double p_in = 0.3, p_out = 0.05;
    double in_pairs = 2 * (25.0 * 24.0 / 2.0);
    double out_pairs = 25.0 * 25.0;
    double mean_edges = p_in * in_pairs + p_out * out_pairs;
    double var_edges = in_pairs * p_in * (1 - p_in) + out_pairs * p_out * (1 - p_out);

    const int trials = 20;
    double total = 0.0;
    for (int s = 0; s < trials; ++s) {
        Dataset ds = synthesize_sbm(2, sizes, p_in, p_out, 4, 100 + s);
        total += ds.graphs[0].adjacency.nnz() / 2.0;
    }
    double sigma_total = std::sqrt(trials * var_edges);
    REQUIRE(std::abs(total - trials * mean_edges) <= 3.0 * sigma_total);
}

TEST_CASE("block model generation is deterministic and validates its config") {
    SbmConfig cfg;
    cfg.sizes = {8, 8};
    cfg.seed = 55;
    Dataset a = synthesize_sbm(cfg);
    Dataset b = synthesize_sbm(cfg);
    REQUIRE(a.graphs[0].adjacency.indices == b.graphs[0].adjacency.indices);
    REQUIRE(bitwise_equal(a.graphs[0].features, b.graphs[0].features));

    REQUIRE_THROWS_AS(synthesize_sbm(3, {8, 8}, 0.3, 0.05, 4, 0), ValidationError);
    SbmConfig bad = cfg;
    bad.p_in = 1.5;
    REQUIRE_THROWS_AS(synthesize_sbm(bad), ValidationError);
    bad = cfg;
    bad.sizes = {};
    REQUIRE_THROWS_AS(synthesize_sbm(bad), ValidationError);
    bad = cfg;
    bad.feature_dim = 0;
    REQUIRE_THROWS_AS(synthesize_sbm(bad), ValidationError);
}

TEST_CASE("only informative columns separate block means") {
    SbmConfig cfg;
    cfg.sizes = {40, 40};
    cfg.feature_dim = 10;
    cfg.informative_dims = 3;
    cfg.mean_scale = 5.0;
    cfg.noise_std = 0.1;
    cfg.seed = 21;
    Dataset ds = synthesize_sbm(cfg);
    const DenseMatrix& f = ds.graphs[0].features;
    for (int j = 0; j < 10; ++j) {
        double m0 = 0.0, m1 = 0.0;
        for (int i = 0; i < 40; ++i) m0 += f.at(i, j) / 40.0;
        for (int i = 40; i < 80; ++i) m1 += f.at(i, j) / 40.0;
        if (j >= 3) REQUIRE(std::abs(m0 - m1) < 0.5);
    }
    // at scale 5 with noise 0.1 at least one signal column must split wide
    double best = 0.0;
    for (int j = 0; j < 3; ++j) {
        double m0 = 0.0, m1 = 0.0;
        for (int i = 0; i < 40; ++i) m0 += f.at(i, j) / 40.0;
        for (int i = 40; i < 80; ++i) m1 += f.at(i, j) / 40.0;
        best = std::max(best, std::abs(m0 - m1));
    }
    REQUIRE(best > 1.0);
}

TEST_CASE("node task batch passes the graph through unchanged") {
    Dataset ds = load_dataset(fixtures_dir() + "/mini_node.json");
    Batch b = make_batch(ds);
    REQUIRE(b.segment_ids.empty());
    REQUIRE(b.num_graphs == 1);
    REQUIRE(bitwise_equal(b.features, ds.graphs[0].features));
    SparseMatrix an = normalize_adjacency(ds.graphs[0].adjacency);
    REQUIRE(b.a_norm.offsets == an.offsets);
    REQUIRE(b.a_norm.indices == an.indices);
    REQUIRE(b.a_norm.values == an.values);
}

TEST_CASE("graph task batch stacks blocks on the diagonal") {
    Dataset ds = load_dataset(fixtures_dir() + "/mini_graph.json");
    Batch b = make_batch(ds);
    int total = 0;
    for (const Graph& g : ds.graphs) total += g.num_nodes;
    REQUIRE(b.a_norm.rows == total);
    REQUIRE(b.features.rows == total);
    REQUIRE(int(b.segment_ids.size()) == total);
    REQUIRE(b.num_graphs == 4);
    REQUIRE_NOTHROW(b.a_norm.validate());

    DenseMatrix dense = b.a_norm.densify();
    int base = 0;
    for (int gi = 0; gi < 4; ++gi) {
        const Graph& g = ds.graphs[gi];
        DenseMatrix block = normalize_adjacency(g.adjacency).densify();
        for (int i = 0; i < g.num_nodes; ++i) {
            REQUIRE(b.segment_ids[base + i] == gi);
            for (int j = 0; j < g.num_nodes; ++j)
                REQUIRE(dense.at(base + i, base + j) == block.at(i, j));
            for (int j = 0; j < g.features.cols; ++j)
                REQUIRE(b.features.at(base + i, j) == g.features.at(i, j));
        }
        // nothing off the diagonal block
        for (int i = 0; i < g.num_nodes; ++i)
            for (int j = 0; j < total; ++j)
                if (j < base || j >= base + g.num_nodes)
                    REQUIRE(dense.at(base + i, j) == 0.0);
        base += g.num_nodes;
    }
}

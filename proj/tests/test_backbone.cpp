#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <vector>

#include "gsp/backbone.hpp"
#include "gsp/graph.hpp"
#include "gsp/tape.hpp"

#include "test_util.hpp"

using namespace gsp;
using namespace testutil;

TEST_CASE("one identity layer over an identity adjacency is the identity map") {
    FrozenBackbone b = FrozenBackbone::from_weights({DenseMatrix::identity(3)});
    SparseMatrix a = SparseMatrix::identity(4);
    Rng rng(1);
    DenseMatrix x = random_matrix(rng, 4, 3);
    DenseMatrix h = b.forward(a, x);
    REQUIRE(bitwise_equal(h, x));
}

TEST_CASE("zero weights produce zero embeddings") {
    std::vector<DenseMatrix> w = {DenseMatrix(3, 5), DenseMatrix(5, 5)};
    FrozenBackbone b = FrozenBackbone::from_weights(std::move(w));
    SparseMatrix a = normalize_adjacency(adjacency_from_edges(4, {{0, 1}, {2, 3}}));
    Rng rng(2);
    DenseMatrix h = b.forward(a, random_matrix(rng, 4, 3));
    for (double v : h.values) REQUIRE(v == 0.0);
}

TEST_CASE("asking for weight gradients fails because weights are frozen") {
    Rng rng(3);
    FrozenBackbone b(3, 4, 2, rng);
    SparseMatrix a = SparseMatrix::identity(5);
    DenseMatrix x = random_matrix(rng, 5, 3);

    Tape tape;
    int xid = tape.leaf(x);
    int h = b.forward_tape(tape, a, xid);
    int loss = tape.sum(h);

    // locate the weight constants that forward_tape pushed
    std::vector<int> weight_ids;
    for (int id = 0; id < int(tape.size()); ++id)
        if (tape.node(id).op == Tape::Op::Constant) weight_ids.push_back(id);
    REQUIRE(weight_ids.size() == 2);
    REQUIRE_THROWS_AS(tape.backward(loss, weight_ids), std::invalid_argument);

    auto grads = tape.backward(loss, {xid});
    REQUIRE(grads[0].same_shape(x));
}

TEST_CASE("plain forward and tape forward agree bitwise") {
    Rng rng(4);
    FrozenBackbone b(6, 8, 3, rng);
    SparseMatrix a = normalize_adjacency(adjacency_from_edges(7, {{0, 1}, {1, 2}, {3, 4}, {5, 6}}));
    DenseMatrix x = random_matrix(rng, 7, 6);

    DenseMatrix plain = b.forward(a, x);
    Tape tape;
    DenseMatrix taped = tape.value(b.forward_tape(tape, a, tape.leaf(x)));
    REQUIRE(bitwise_equal(plain, taped));
}

TEST_CASE("relu applies to every layer except the last") {
    // one negative weight layer then identity keeps the sign visible
    DenseMatrix w1(1, 1);
    w1.at(0, 0) = -1.0;
    FrozenBackbone two = FrozenBackbone::from_weights({w1, DenseMatrix::identity(1)});
    SparseMatrix a = SparseMatrix::identity(1);
    DenseMatrix x(1, 1);
    x.at(0, 0) = 1.0;
    // layer 1 output -1 hits relu, so the final output is 0
    REQUIRE(two.forward(a, x).at(0, 0) == 0.0);

    FrozenBackbone one = FrozenBackbone::from_weights({w1});
    // single layer is linear, no relu
    REQUIRE(one.forward(a, x).at(0, 0) == -1.0);
}

TEST_CASE("forward rejects mismatched dimensions") {
    Rng rng(5);
    FrozenBackbone b(3, 4, 1, rng);
    SparseMatrix a = SparseMatrix::identity(4);
    DenseMatrix wrong_cols = random_matrix(rng, 4, 2);
    REQUIRE_THROWS(b.forward(a, wrong_cols));
    DenseMatrix wrong_rows = random_matrix(rng, 3, 3);
    REQUIRE_THROWS(b.forward(a, wrong_rows));
}

TEST_CASE("layer dims must chain") {
    std::vector<DenseMatrix> bad = {DenseMatrix(3, 4), DenseMatrix(5, 4)};
    REQUIRE_THROWS_AS(FrozenBackbone::from_weights(std::move(bad)), ValidationError);
    REQUIRE_THROWS_AS(FrozenBackbone::from_weights({}), ValidationError);
}

TEST_CASE("readout means rows by segment") {
    DenseMatrix h(3, 2, {2.0, 4.0, 4.0, 8.0, 1.0, 1.0});
    DenseMatrix pooled = readout(h, {0, 0, 1}, 2);
    REQUIRE(pooled.rows == 2);
    REQUIRE(pooled.at(0, 0) == 3.0);
    REQUIRE(pooled.at(0, 1) == 6.0);
    REQUIRE(pooled.at(1, 0) == 1.0);
}

TEST_CASE("weights survive a save and load round trip bitwise") {
    Rng rng(6);
    FrozenBackbone b(5, 7, 3, rng);
    std::string path = scratch_dir() + "/weights_roundtrip.json";
    save_weights(b, path);
    LoadedWeights lw = load_weights(path);

    REQUIRE(lw.backbone.layers() == 3);
    REQUIRE(lw.backbone.input_dim() == 5);
    REQUIRE(lw.backbone.hidden_dim() == 7);
    REQUIRE_FALSE(lw.has_adapter);
    for (int l = 0; l < 3; ++l)
        REQUIRE(bitwise_equal(lw.backbone.weights()[l], b.weights()[l]));

    SparseMatrix a = normalize_adjacency(adjacency_from_edges(4, {{0, 1}, {1, 2}}));
    DenseMatrix x = random_matrix(rng, 4, 5);
    REQUIRE(bitwise_equal(lw.backbone.forward(a, x), b.forward(a, x)));
}

TEST_CASE("adapter block survives the round trip") {
    Rng rng(7);
    FrozenBackbone b(5, 6, 2, rng);
    DenseMatrix adapter = random_matrix(rng, 9, 5);
    std::string path = scratch_dir() + "/weights_adapter.json";
    save_weights(b, path, &adapter);
    LoadedWeights lw = load_weights(path);
    REQUIRE(lw.has_adapter);
    REQUIRE(bitwise_equal(lw.adapter, adapter));
}

TEST_CASE("truncated weights file fails to parse") {
    Rng rng(8);
    FrozenBackbone b(3, 4, 2, rng);
    std::string path = scratch_dir() + "/weights_trunc.json";
    save_weights(b, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream(path) << text.substr(0, text.size() / 2);
    REQUIRE_THROWS_AS(load_weights(path), ParseError);
    REQUIRE_THROWS_AS(load_weights("/nonexistent/weights.json"), ParseError);
}

TEST_CASE("layer count must match the stored weight blocks") {
    Rng rng(9);
    FrozenBackbone b(3, 4, 2, rng);
    std::string path = scratch_dir() + "/weights_layers.json";
    save_weights(b, path);
    std::ifstream in(path);
    nlohmann::ordered_json root = nlohmann::ordered_json::parse(in);
    in.close();
    root["layers"] = 3;
    std::ofstream(path) << root.dump(1);
    REQUIRE_THROWS_AS(load_weights(path), ValidationError);
}

TEST_CASE("unsupported format version is rejected") {
    Rng rng(10);
    FrozenBackbone b(3, 4, 1, rng);
    std::string path = scratch_dir() + "/weights_version.json";
    save_weights(b, path);
    std::ifstream in(path);
    nlohmann::ordered_json root = nlohmann::ordered_json::parse(in);
    in.close();
    root["format_version"] = 99;
    std::ofstream(path) << root.dump(1);
    REQUIRE_THROWS_AS(load_weights(path), ValidationError);
}

TEST_CASE("wrong value count in a weight block is rejected") {
    Rng rng(11);
    FrozenBackbone b(3, 4, 1, rng);
    std::string path = scratch_dir() + "/weights_count.json";
    save_weights(b, path);
    std::ifstream in(path);
    nlohmann::ordered_json root = nlohmann::ordered_json::parse(in);
    in.close();
    root["weights"][0].erase(0);
    std::ofstream(path) << root.dump(1);
    REQUIRE_THROWS_AS(load_weights(path), ValidationError);
}

TEST_CASE("init bounds scale with fan-in") {
    Rng rng(12);
    FrozenBackbone b(16, 4, 2, rng);
    double bound0 = 1.0 / 4.0;   // 1/sqrt(16)
    double bound1 = 1.0 / 2.0;   // 1/sqrt(4)
    for (double v : b.weights()[0].values) REQUIRE(std::abs(v) <= bound0);
    for (double v : b.weights()[1].values) REQUIRE(std::abs(v) <= bound1);
    REQUIRE(max_abs(b.weights()[0]) > 0.0);
}

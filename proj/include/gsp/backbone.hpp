#pragma once
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsp/errors.hpp"
#include "gsp/matrix.hpp"
#include "gsp/rng.hpp"
#include "gsp/tape.hpp"

namespace gsp {

constexpr int kWeightsFormatVersion = 1;

// Stack of GCN layers H_l = act(A_hat H_{l-1} W_l), relu everywhere except
// the last layer, which stays linear so embeddings keep both signs for the
// dot-product edge scorer. Weights never receive gradients after pretraining;
// the tape enforces that because they enter as constants.
class FrozenBackbone {
public:
    FrozenBackbone() = default;
    FrozenBackbone(int input_dim, int hidden_dim, int layers, Rng& rng)
        : input_dim_(input_dim), hidden_dim_(hidden_dim) {
        if (layers < 1) throw ValidationError("backbone: layers must be >= 1");
        int d_in = input_dim;
        for (int l = 0; l < layers; ++l) {
            int d_out = hidden_dim;
            DenseMatrix w(d_in, d_out);
            double bound = 1.0 / std::sqrt(double(d_in));
            for (double& v : w.values) v = rng.uniform(-bound, bound);
            weights_.push_back(std::move(w));
            d_in = d_out;
        }
    }

    static FrozenBackbone from_weights(std::vector<DenseMatrix> weights) {
        if (weights.empty()) throw ValidationError("backbone: no layers");
        FrozenBackbone b;
        b.input_dim_ = weights[0].rows;
        b.hidden_dim_ = weights.back().cols;
        for (std::size_t l = 1; l < weights.size(); ++l)
            if (weights[l].rows != weights[l - 1].cols)
                throw ValidationError("backbone: layer dims must chain");
        b.weights_ = std::move(weights);
        return b;
    }

    int input_dim() const { return input_dim_; }
    int hidden_dim() const { return hidden_dim_; }
    int embed_dim() const { return weights_.back().cols; }
    int layers() const { return int(weights_.size()); }
    const std::vector<DenseMatrix>& weights() const { return weights_; }

    // Plain forward, no tape. Bitwise-matches the tape path because both run
    // the same kernels in the same order.
    DenseMatrix forward(const SparseMatrix& a_norm, const DenseMatrix& x) const {
        check_dims(x.cols == input_dim_, "backbone forward: feature dim");
        check_dims(a_norm.rows == x.rows, "backbone forward: adjacency vs features");
        DenseMatrix h = x;
        for (int l = 0; l < layers(); ++l) {
            h = mm_nn(spmm(a_norm, h), weights_[l]);
            if (l + 1 < layers())
                for (double& v : h.values) v = v > 0.0 ? v : 0.0;
        }
        return h;
    }

    // Tape forward from an existing node id (the prompted features). Weights
    // enter as constants, so backward() refuses to differentiate them.
    int forward_tape(Tape& tape, const SparseMatrix& a_norm, int x_id) const {
        int h = x_id;
        for (int l = 0; l < layers(); ++l) {
            int w = tape.constant(weights_[l]);
            h = tape.matmul(tape.spmm(a_norm, h), w);
            if (l + 1 < layers()) h = tape.relu(h);
        }
        return h;
    }

    void replace_weights(std::vector<DenseMatrix> w) {
        FrozenBackbone checked = from_weights(std::move(w));
        checked.input_dim_ = input_dim_;
        checked.hidden_dim_ = hidden_dim_;
        *this = std::move(checked);
    }

private:
    int input_dim_ = 0;
    int hidden_dim_ = 0;
    std::vector<DenseMatrix> weights_;
};

inline DenseMatrix readout(const DenseMatrix& h, const std::vector<int>& segment_ids,
                           int num_segments) {
    Tape t;
    int x = t.constant(h);
    return t.value(t.mean_pool_segments(x, segment_ids, num_segments));
}

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const DenseMatrix& m) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (double v : m.values) arr.push_back(v);
    return arr;
}

inline DenseMatrix matrix_from_json(const nlohmann::ordered_json& arr, int rows, int cols,
                                    const std::string& where) {
    if (!arr.is_array() || int(arr.size()) != rows * cols)
        throw ValidationError(where + ": expected " + std::to_string(rows * cols) +
                              " values, got " + std::to_string(arr.size()));
    std::vector<double> vals;
    vals.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw ValidationError(where + ": expected numbers");
        vals.push_back(v.get<double>());
    }
    return DenseMatrix(rows, cols, std::move(vals));
}

}  // namespace detail

// Weights file: {format_version, input_dim, hidden_dim, layers,
// weights:[row-major arrays]}, optionally followed by an "adapter" block
// when pretraining trained a raw-feature adapter. Doubles serialize with
// shortest-round-trip precision, so save then load reproduces every bit.
inline void save_weights(const FrozenBackbone& b, const std::string& path,
                         const DenseMatrix* adapter = nullptr) {
    nlohmann::ordered_json root;
    root["format_version"] = kWeightsFormatVersion;
    root["input_dim"] = b.input_dim();
    root["hidden_dim"] = b.hidden_dim();
    root["layers"] = b.layers();
    nlohmann::ordered_json ws = nlohmann::ordered_json::array();
    for (const DenseMatrix& w : b.weights()) ws.push_back(detail::matrix_to_json(w));
    root["weights"] = std::move(ws);
    if (adapter) {
        nlohmann::ordered_json ja;
        ja["rows"] = adapter->rows;
        ja["cols"] = adapter->cols;
        ja["values"] = detail::matrix_to_json(*adapter);
        root["adapter"] = std::move(ja);
    }
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << root.dump(1) << '\n';
}

struct LoadedWeights {
    FrozenBackbone backbone;
    bool has_adapter = false;
    DenseMatrix adapter;
};

inline LoadedWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    nlohmann::ordered_json root;
    try {
        root = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    auto need = [&](const char* key) -> const nlohmann::ordered_json& {
        auto it = root.find(key);
        if (it == root.end()) throw ValidationError(path + ": missing field '" + std::string(key) + "'");
        return *it;
    };
    int version = need("format_version").get<int>();
    if (version != kWeightsFormatVersion)
        throw ValidationError(path + ": format_version " + std::to_string(version) +
                              " unsupported (expected " +
                              std::to_string(kWeightsFormatVersion) + ")");
    int input_dim = need("input_dim").get<int>();
    int hidden_dim = need("hidden_dim").get<int>();
    int layers = need("layers").get<int>();
    if (input_dim < 1 || hidden_dim < 1 || layers < 1)
        throw ValidationError(path + ": dims and layers must be >= 1");
    const auto& ws = need("weights");
    if (!ws.is_array() || int(ws.size()) != layers)
        throw ValidationError(path + ": metadata says " + std::to_string(layers) +
                              " layers but file has " + std::to_string(ws.size()) +
                              " weight blocks");
    std::vector<DenseMatrix> weights;
    int d_in = input_dim;
    for (int l = 0; l < layers; ++l) {
        int d_out = hidden_dim;
        weights.push_back(detail::matrix_from_json(
            ws[l], d_in, d_out, path + ".weights[" + std::to_string(l) + "]"));
        d_in = d_out;
    }
    LoadedWeights out;
    out.backbone = FrozenBackbone::from_weights(std::move(weights));
    auto ja = root.find("adapter");
    if (ja != root.end() && !ja->is_null()) {
        int rows = (*ja).at("rows").get<int>();
        int cols = (*ja).at("cols").get<int>();
        if (cols != input_dim)
            throw ValidationError(path + ".adapter: output dim " + std::to_string(cols) +
                                  " must equal input_dim " + std::to_string(input_dim));
        out.adapter = detail::matrix_from_json((*ja).at("values"), rows, cols, path + ".adapter");
        out.has_adapter = true;
    }
    return out;
}

}  // namespace gsp

#pragma once
#include <algorithm>
#include <string>
#include <vector>

#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "gsp/rng.hpp"

namespace gsp {

struct FewShotSplit {
    std::vector<int> train_ids;
    std::vector<int> val_ids;
    std::vector<int> test_ids;
    int k = 0;
    std::uint64_t seed = 0;
};

// Per-class k-shot training selection, then the leftover items split into
// validation and test at 1:9 (val gets floor(rem/10), test the rest). All
// randomness comes from one stream seeded by `seed`, consumed in class order
// first and then for the leftover shuffle, so the split is a pure function
// of (dataset, k, seed). `stratified` applies the 1:9 cut per class instead
// of globally.
inline FewShotSplit kshot_split(const Dataset& ds, int k, std::uint64_t seed,
                                bool stratified = false) {
    if (k < 1) throw ValidationError("kshot_split: k must be >= 1");
    int n = ds.num_items();
    std::vector<std::vector<int>> by_class(ds.classes);
    for (int i = 0; i < n; ++i) by_class[ds.label_of(i)].push_back(i);
    for (int c = 0; c < ds.classes; ++c)
        if (by_class[c].empty())
            throw ValidationError("kshot_split: class " + std::to_string(c) + " has no items");

    Rng rng(seed);
    FewShotSplit split;
    split.k = k;
    split.seed = seed;
    std::vector<std::vector<int>> rest_by_class(ds.classes);
    for (int c = 0; c < ds.classes; ++c) {
        std::vector<int>& items = by_class[c];
        rng.shuffle(items);
        int take = std::min<int>(k, int(items.size()));
        for (int t = 0; t < take; ++t) split.train_ids.push_back(items[t]);
        for (int t = take; t < int(items.size()); ++t) rest_by_class[c].push_back(items[t]);
    }

    auto cut = [&](std::vector<int>& rest) {
        rng.shuffle(rest);
        int nval = int(rest.size()) / 10;
        for (int t = 0; t < int(rest.size()); ++t)
            (t < nval ? split.val_ids : split.test_ids).push_back(rest[t]);
    };
    if (stratified) {
        for (int c = 0; c < ds.classes; ++c) cut(rest_by_class[c]);
    } else {
        std::vector<int> rest;
        for (int c = 0; c < ds.classes; ++c)
            rest.insert(rest.end(), rest_by_class[c].begin(), rest_by_class[c].end());
        cut(rest);
    }
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.val_ids.begin(), split.val_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

}  // namespace gsp

#pragma once

// Mixed-radix index codecs for tuples over agent subsets. Everything tabular
// in this library (kernels, policies, Q tables) is flat storage addressed
// through one of these, so the digit order convention matters: member order is
// ascending agent id and the FIRST member is the fastest-varying digit.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpi {

struct SubsetCodec {
    std::vector<int> members;        // sorted agent ids
    std::vector<int> sizes;          // per-member digit size
    std::vector<std::int64_t> strides;
    std::int64_t size = 1;

    std::int64_t encode(const std::vector<int>& local) const {
        std::int64_t idx = 0;
        for (std::size_t k = 0; k < members.size(); ++k) idx += strides[k] * local[k];
        return idx;
    }

    // reads digits for this subset out of a full global tuple
    std::int64_t encode_global(const std::vector<int>& global_tuple) const {
        return encode_global(global_tuple.data());
    }

    std::int64_t encode_global(const int* global_tuple) const {
        std::int64_t idx = 0;
        for (std::size_t k = 0; k < members.size(); ++k)
            idx += strides[k] * global_tuple[members[k]];
        return idx;
    }

    void decode(std::int64_t idx, std::vector<int>& local) const {
        local.resize(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
            local[k] = int(idx % sizes[k]);
            idx /= sizes[k];
        }
    }

    std::vector<int> decode(std::int64_t idx) const {
        std::vector<int> out;
        decode(idx, out);
        return out;
    }
};

inline SubsetCodec make_codec(const std::vector<int>& members, const std::vector<int>& global_sizes) {
    SubsetCodec c;
    c.members = members;
    for (std::size_t k = 0; k + 1 < members.size(); ++k)
        if (members[k] >= members[k + 1])
            throw std::invalid_argument("codec: members must be sorted and distinct");
    c.sizes.reserve(members.size());
    c.strides.reserve(members.size());
    for (int m : members) {
        if (m < 0 || m >= int(global_sizes.size()))
            throw std::invalid_argument("codec: member id out of range");
        if (global_sizes[m] <= 0) throw std::invalid_argument("codec: nonpositive digit size");
        c.strides.push_back(c.size);
        c.sizes.push_back(global_sizes[m]);
        c.size *= global_sizes[m];
    }
    return c;
}

// Writes the subset's digits into a prefilled global tuple (defaults stay
// wherever the subset has no member). This is the extension operator: missing
// coordinates are whatever `global_tuple` already holds.
inline void scatter(const SubsetCodec& c, std::int64_t idx, std::vector<int>& global_tuple) {
    for (std::size_t k = 0; k < c.members.size(); ++k) {
        global_tuple[c.members[k]] = int(idx % c.sizes[k]);
        idx /= c.sizes[k];
    }
}

// Precomputed index transform: for every index of `from`, the index of `to`
// after extending with `defaults`. Both codecs must use the same global sizes.
inline std::vector<std::int64_t> map_subset_index(const SubsetCodec& from, const SubsetCodec& to,
                                                  const std::vector<int>& defaults) {
    std::vector<std::int64_t> map(std::size_t(from.size), 0);
    std::vector<int> tuple = defaults;
    for (std::int64_t x = 0; x < from.size; ++x) {
        scatter(from, x, tuple);
        map[std::size_t(x)] = to.encode_global(tuple);
    }
    return map;
}

}  // namespace lpi

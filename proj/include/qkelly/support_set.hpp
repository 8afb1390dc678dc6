#ifndef QKELLY_SUPPORT_SET_HPP
#define QKELLY_SUPPORT_SET_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkelly {

/// Nonempty subset of outcome indices (0-based, sorted). The anchor is the smallest index.
struct SupportSet {
    std::vector<int> idx;

    SupportSet() = default;
    explicit SupportSet(std::vector<int> indices) : idx(std::move(indices))
    {
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        if (idx.empty()) throw std::invalid_argument("support set must be nonempty");
    }

    static SupportSet full(int m)
    {
        std::vector<int> v(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = i;
        return SupportSet(std::move(v));
    }

    static SupportSet from_mask(std::uint32_t mask)
    {
        std::vector<int> v;
        for (int i = 0; i < 32; ++i)
            if (mask & (1U << i)) v.push_back(i);
        return SupportSet(std::move(v));
    }

    int anchor() const { return idx.front(); }
    int size() const { return static_cast<int>(idx.size()); }
    /// Dimension of the ratio chart, |S| - 1.
    int chart_dim() const { return size() - 1; }

    bool contains(int i) const { return std::binary_search(idx.begin(), idx.end(), i); }

    std::uint32_t mask() const
    {
        std::uint32_t b = 0;
        for (int i : idx) b |= 1U << i;
        return b;
    }

    bool subset_of(const SupportSet& other) const { return (mask() & ~other.mask()) == 0; }

    /// Chart coordinates, i.e. S without its anchor.
    std::vector<int> free_indices() const { return {idx.begin() + 1, idx.end()}; }

    /// 1-based rendering, e.g. "{1,2}".
    std::string to_string() const
    {
        std::string s = "{";
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (j) s += ",";
            s += std::to_string(idx[j] + 1);
        }
        return s + "}";
    }

    auto operator<=>(const SupportSet&) const = default;
};

/// All nonempty subsets of {0..m-1}, larger sets first, then lexicographic.
inline std::vector<SupportSet> all_supports(int m)
{
    if (m < 1 || m > 20) throw std::invalid_argument("outcome count out of range for support enumeration");
    std::vector<SupportSet> out;
    for (std::uint32_t mask = 1; mask < (1U << m); ++mask) out.push_back(SupportSet::from_mask(mask));
    std::sort(out.begin(), out.end(), [](const SupportSet& a, const SupportSet& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.idx < b.idx;
    });
    return out;
}

} // namespace qkelly

#endif // QKELLY_SUPPORT_SET_HPP

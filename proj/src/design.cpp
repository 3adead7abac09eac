#include "csh/design.hpp"

#include <algorithm>
#include <string>

#include "csh/rational.hpp"

namespace csh::design {

std::int64_t DesignParams::N() const {
    std::uint64_t n = checked_pow(static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(k - 1));
    if (n > static_cast<std::uint64_t>(INT64_MAX)) throw ConstraintError("q^(k-1) out of range");
    return static_cast<std::int64_t>(n);
}

void DesignParams::validate() const {
    if (q < 2) throw ConstraintError("q must be >= 2, got " + std::to_string(q));
    if (k < 2) throw ConstraintError("k must be >= 2, got " + std::to_string(k));
    (void)N();  // rejects overflowing parameter pairs
}

bool ResolvableDesign::block_contains(int server, int point) const {
    const auto& b = blocks[server - 1];
    return std::binary_search(b.begin(), b.end(), point);
}

CodewordMatrix build_spc_matrix(const DesignParams& params) {
    params.validate();
    const int q = params.q, k = params.k;
    const std::int64_t n = params.N();

    CodewordMatrix T;
    T.params = params;
    T.rows.assign(k, std::vector<int>(n, 0));

    // Column j encodes message number j (0-based), digits in base q with the
    // first message symbol varying slowest.
    for (std::int64_t j = 0; j < n; ++j) {
        std::int64_t rem = j;
        int sum = 0;
        for (int i = k - 2; i >= 0; --i) {
            int digit = static_cast<int>(rem % q);
            rem /= q;
            T.rows[i][j] = digit;
            sum += digit;
        }
        T.rows[k - 1][j] = (q - sum % q) % q;  // parity: negated symbol sum
    }
    return T;
}

ResolvableDesign build_design(const CodewordMatrix& T) {
    const int q = T.params.q, k = T.params.k;
    const std::int64_t n = T.params.N();

    ResolvableDesign d;
    d.params = T.params;
    d.blocks.assign(static_cast<std::size_t>(k) * q, {});
    for (int i = 0; i < k; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            d.blocks[static_cast<std::size_t>(i) * q + T.rows[i][j]].push_back(static_cast<int>(j + 1));

    d.classes.assign(k, {});
    for (int i = 0; i < k; ++i)
        for (int l = 0; l < q; ++l)
            d.classes[i].push_back(i * q + l + 1);
    return d;
}

namespace {

// Intersection of the blocks selected by `shifts` for classes in `use`,
// exploiting that block membership of point p is determined by T — but we
// only have the design here, so intersect the sorted lists directly.
std::vector<int> intersect_blocks(const ResolvableDesign& d, const std::vector<int>& servers) {
    std::vector<int> acc = d.block(servers[0]);
    for (std::size_t i = 1; i < servers.size() && !acc.empty(); ++i) {
        const auto& b = d.block(servers[i]);
        std::vector<int> next;
        std::set_intersection(acc.begin(), acc.end(), b.begin(), b.end(), std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

}  // namespace

std::vector<ServerGroup> enumerate_groups(const ResolvableDesign& design) {
    const int q = design.params.q, k = design.params.k;
    std::vector<ServerGroup> groups;
    std::vector<int> shifts(k, 0);

    // Odometer over (j_1, ..., j_k), last coordinate fastest = lex order.
    for (;;) {
        std::vector<int> members(k);
        for (int i = 0; i < k; ++i) members[i] = i * q + shifts[i] + 1;
        if (intersect_blocks(design, members).empty()) groups.push_back(ServerGroup{members});

        int pos = k - 1;
        while (pos >= 0 && shifts[pos] == q - 1) shifts[pos--] = 0;
        if (pos < 0) break;
        ++shifts[pos];
    }
    return groups;
}

int missing_point(const ResolvableDesign& design, const ServerGroup& group, int excluded_index) {
    if (excluded_index < 1 || excluded_index > group.size())
        throw ConstraintError("excluded member index out of range");
    std::vector<int> others;
    for (int i = 1; i <= group.size(); ++i)
        if (i != excluded_index) others.push_back(group.members[i - 1]);
    std::vector<int> common = intersect_blocks(design, others);
    if (common.size() != 1)
        throw ProtocolError("k-1 blocks from distinct classes must meet in exactly one point");
    return common[0];
}

}  // namespace csh::design

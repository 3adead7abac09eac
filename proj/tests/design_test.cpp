#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "csh/design.hpp"
#include "csh/errors.hpp"
#include "csh/rational.hpp"

using namespace csh;
using namespace csh::design;

namespace {

ResolvableDesign make(int q, int k) { return build_design(build_spc_matrix(DesignParams{q, k})); }

// Brute-force group oracle: try every one-block-per-class selection and keep
// the ones whose blocks share no point.
std::set<std::vector<int>> group_oracle(const ResolvableDesign& d) {
    const int q = d.params.q, k = d.params.k;
    std::set<std::vector<int>> out;
    std::vector<int> shifts(k, 0);
    for (;;) {
        std::vector<int> members(k);
        for (int i = 0; i < k; ++i) members[i] = i * q + shifts[i] + 1;
        std::set<int> common(d.block(members[0]).begin(), d.block(members[0]).end());
        for (int i = 1; i < k; ++i) {
            std::set<int> next;
            for (int p : d.block(members[i]))
                if (common.count(p)) next.insert(p);
            common = next;
        }
        if (common.empty()) out.insert(members);
        int pos = k - 1;
        while (pos >= 0 && shifts[pos] == q - 1) shifts[pos--] = 0;
        if (pos < 0) break;
        ++shifts[pos];
    }
    return out;
}

}  // namespace

TEST_CASE("codeword matrix reproduces the q=2 k=3 reference") {
    CodewordMatrix T = build_spc_matrix(DesignParams{2, 3});
    CHECK(T.rows == std::vector<std::vector<int>>{{0, 0, 1, 1}, {0, 1, 0, 1}, {0, 1, 1, 0}});
}

TEST_CASE("codeword matrix for the degenerate k=2 code") {
    CodewordMatrix T = build_spc_matrix(DesignParams{2, 2});
    CHECK(T.rows == std::vector<std::vector<int>>{{0, 1}, {0, 1}});
}

TEST_CASE("codeword matrix over Z_3, frozen from direct encoding") {
    CodewordMatrix T = build_spc_matrix(DesignParams{3, 3});
    CHECK(T.rows == std::vector<std::vector<int>>{{0, 0, 0, 1, 1, 1, 2, 2, 2},
                                                  {0, 1, 2, 0, 1, 2, 0, 1, 2},
                                                  {0, 2, 1, 2, 1, 0, 1, 0, 2}});
    for (int j = 1; j <= 9; ++j)
        CHECK((T.at(1, j) + T.at(2, j) + T.at(3, j)) % 3 == 0);
    // systematic part enumerates all messages exactly once
    std::set<std::pair<int, int>> msgs;
    for (int j = 1; j <= 9; ++j) msgs.insert({T.at(1, j), T.at(2, j)});
    CHECK(msgs.size() == 9);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(build_spc_matrix(DesignParams{1, 3}), ConstraintError);
    CHECK_THROWS_AS(build_spc_matrix(DesignParams{2, 1}), ConstraintError);
    CHECK_THROWS_AS(build_spc_matrix(DesignParams{2, 200}), ConstraintError);  // q^(k-1) overflow
}

TEST_CASE("design blocks and classes match the worked q=2 k=3 example") {
    ResolvableDesign d = make(2, 3);
    CHECK(d.blocks == std::vector<std::vector<int>>{
                          {1, 2}, {3, 4}, {1, 3}, {2, 4}, {1, 4}, {2, 3}});
    CHECK(d.classes == std::vector<std::vector<int>>{{1, 2}, {3, 4}, {5, 6}});
}

TEST_CASE("k=2 design has singleton blocks forming two identical-shape classes") {
    ResolvableDesign d = make(2, 2);
    CHECK(d.blocks == std::vector<std::vector<int>>{{1}, {2}, {1}, {2}});
    CHECK(d.classes == std::vector<std::vector<int>>{{1, 2}, {3, 4}});
}

TEST_CASE("q=3 k=3 design: nine blocks of size three, classes partition [9]") {
    ResolvableDesign d = make(3, 3);
    CHECK(d.num_blocks() == 9);
    for (const auto& b : d.blocks) CHECK(b.size() == 3);
    for (const auto& cls : d.classes) {
        std::vector<int> seen(10, 0);
        for (int id : cls)
            for (int p : d.block(id)) ++seen[p];
        for (int p = 1; p <= 9; ++p) CHECK(seen[p] == 1);
    }
}

TEST_CASE("groups of the q=2 k=3 design are exactly the worked example's four") {
    ResolvableDesign d = make(2, 3);
    auto groups = enumerate_groups(d);
    REQUIRE(groups.size() == 4);
    CHECK(groups[0].members == std::vector<int>{1, 3, 6});
    CHECK(groups[1].members == std::vector<int>{1, 4, 5});
    CHECK(groups[2].members == std::vector<int>{2, 3, 5});
    CHECK(groups[3].members == std::vector<int>{2, 4, 6});
}

TEST_CASE("k=2 groups pair disjoint singletons") {
    ResolvableDesign d = make(2, 2);
    auto groups = enumerate_groups(d);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].members == std::vector<int>{1, 4});
    CHECK(groups[1].members == std::vector<int>{2, 3});
}

TEST_CASE("group enumeration matches the brute-force oracle") {
    for (auto [q, k] : {std::pair{3, 3}, {2, 4}, {4, 3}}) {
        ResolvableDesign d = make(q, k);
        auto groups = enumerate_groups(d);
        auto expect = group_oracle(d);
        CHECK(groups.size() == expect.size());
        CHECK(groups.size() ==
              checked_pow(q, static_cast<std::uint64_t>(k) - 1) * static_cast<std::uint64_t>(q - 1));
        for (const auto& g : groups) CHECK(expect.count(g.members) == 1);
    }
}

TEST_CASE("missing points of the worked example group {U1, U3, U6}") {
    ResolvableDesign d = make(2, 3);
    ServerGroup g{{1, 3, 6}};
    CHECK(missing_point(d, g, 1) == 3);  // U1 wants the value on file 3
    CHECK(missing_point(d, g, 2) == 2);  // U3 on file 2
    CHECK(missing_point(d, g, 3) == 1);  // U6 on file 1
    CHECK_THROWS_AS(missing_point(d, g, 0), ConstraintError);
    CHECK_THROWS_AS(missing_point(d, g, 4), ConstraintError);
}

TEST_CASE("missing point never lies in the excluded block") {
    for (auto [q, k] : {std::pair{2, 3}, {3, 3}, {2, 4}, {4, 3}}) {
        ResolvableDesign d = make(q, k);
        for (const auto& g : enumerate_groups(d))
            for (int l = 1; l <= k; ++l) {
                int p = missing_point(d, g, l);
                CHECK_FALSE(d.block_contains(g.members[l - 1], p));
                for (int m = 1; m <= k; ++m)
                    if (m != l) CHECK(d.block_contains(g.members[m - 1], p));
            }
    }
}

TEST_CASE("structure properties over the q,k grid") {
    for (int q = 2; q <= 4; ++q)
        for (int k = 2; k <= 4; ++k) {
            ResolvableDesign d = make(q, k);
            const auto N = d.params.N();
            const std::uint64_t block_size = checked_pow(q, static_cast<std::uint64_t>(k) - 2);

            CHECK(d.num_blocks() == k * q);
            for (const auto& b : d.blocks) CHECK(b.size() == block_size);

            for (const auto& cls : d.classes) {
                std::vector<int> seen(N + 1, 0);
                for (int id : cls)
                    for (int p : d.block(id)) ++seen[p];
                for (int p = 1; p <= N; ++p) CHECK(seen[p] == 1);
            }

            // any k-1 blocks from distinct classes meet in exactly one point
            std::vector<int> shifts(k, 0);
            for (int skip = 0; skip < k; ++skip) {
                std::fill(shifts.begin(), shifts.end(), 0);
                for (;;) {
                    std::set<int> common;
                    bool first = true;
                    for (int i = 0; i < k; ++i) {
                        if (i == skip) continue;
                        const auto& b = d.block(i * q + shifts[i] + 1);
                        if (first) {
                            common.insert(b.begin(), b.end());
                            first = false;
                        } else {
                            std::set<int> next;
                            for (int p : b)
                                if (common.count(p)) next.insert(p);
                            common = next;
                        }
                    }
                    CHECK(common.size() == 1);
                    int pos = k - 1;
                    while (pos >= 0 && (pos == skip ? true : shifts[pos] == q - 1)) {
                        if (pos != skip) shifts[pos] = 0;
                        --pos;
                    }
                    if (pos < 0) break;
                    ++shifts[pos];
                }
            }

            auto groups = enumerate_groups(d);
            CHECK(groups.size() == checked_pow(q, static_cast<std::uint64_t>(k) - 1) *
                                       static_cast<std::uint64_t>(q - 1));

            std::vector<std::uint64_t> joined(k * q + 1, 0);
            std::vector<std::set<int>> delivered(k * q + 1);
            for (const auto& g : groups)
                for (int l = 1; l <= k; ++l) {
                    ++joined[g.members[l - 1]];
                    // distinct groups deliver distinct missing points
                    int p = missing_point(d, g, l);
                    CHECK(delivered[g.members[l - 1]].insert(p).second);
                }
            for (int s = 1; s <= k * q; ++s) {
                CHECK(joined[s] == block_size * static_cast<std::uint64_t>(q - 1));
                CHECK(delivered[s].size() == static_cast<std::size_t>(N) - block_size);
            }
        }
}

#pragma once

#include <cstdint>
#include <vector>

#include "csh/errors.hpp"

namespace csh::design {

/// Parameters of the (k, k-1) single-parity-check construction over Z_q.
///   K = k*q servers, N = q^(k-1) points.
struct DesignParams {
    int q = 0;  ///< alphabet size; blocks per parallel class
    int k = 0;  ///< code length; number of parallel classes

    int K() const { return k * q; }
    std::int64_t N() const;

    /// Throws ConstraintError unless q >= 2, k >= 2 and q^(k-1) fits in int64.
    void validate() const;
};

/// The k x q^(k-1) matrix T whose columns are all SPC codewords.
///
/// Codewords are c = (u_1, ..., u_{k-1}, p) with p = -(u_1+...+u_{k-1}) mod q,
/// so every column sums to 0 mod q. Message vectors are enumerated in
/// lexicographic order with the first coordinate varying slowest, which makes
/// every downstream index deterministic.
struct CodewordMatrix {
    DesignParams params;
    std::vector<std::vector<int>> rows;  ///< rows[i][j] = T_{i+1, j+1} in Z_q

    int at(int row, int col) const { return rows[row - 1][col - 1]; }  // 1-based
};

/// Resolvable design induced by T: block B_{i,l} = { j : T_{i,j} = l }.
///
/// Blocks are stored in server order: index s = (i-1)*q + l + 1 corresponds to
/// B_{i,l}, so server U_s maps exactly the files in blocks[s-1]. Class i is
/// the slice of q consecutive blocks { B_{i,0}, ..., B_{i,q-1} }, and each
/// class partitions the point set [N].
struct ResolvableDesign {
    DesignParams params;
    std::vector<std::vector<int>> blocks;   ///< blocks[s-1] = sorted 1-based points
    std::vector<std::vector<int>> classes;  ///< classes[i-1] = block ids of class i

    int num_blocks() const { return static_cast<int>(blocks.size()); }
    const std::vector<int>& block(int server) const { return blocks[server - 1]; }
    int class_of(int server) const { return (server - 1) / params.q + 1; }
    bool block_contains(int server, int point) const;
};

/// One block per parallel class, listed in class order, with empty common
/// intersection. Every (k-1)-subset of the members meets in exactly one
/// point; the member left out is the one that misses that point.
struct ServerGroup {
    std::vector<int> members;  ///< k block/server ids, class order

    int size() const { return static_cast<int>(members.size()); }
};

/// Enumerate all codewords of the (k, k-1) SPC code over Z_q into T.
CodewordMatrix build_spc_matrix(const DesignParams& params);

/// Blocks and parallel classes from the codeword matrix.
ResolvableDesign build_design(const CodewordMatrix& T);

/// All one-block-per-class selections with empty common intersection, in
/// lexicographic order of the per-class shifts (j_1, ..., j_k).
/// There are exactly q^(k-1) * (q-1) of them.
std::vector<ServerGroup> enumerate_groups(const ResolvableDesign& design);

/// The unique point shared by every member except members[excluded_index-1].
/// The excluded member's block does not contain it.
int missing_point(const ResolvableDesign& design, const ServerGroup& group, int excluded_index);

}  // namespace csh::design

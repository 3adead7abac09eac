#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "csh/analysis.hpp"
#include "csh/design.hpp"
#include "csh/simnet.hpp"
#include "csh/workloads.hpp"

namespace csh::singlejob {

struct SingleJobSpec {
    design::DesignParams params;
    int Q = 0;  ///< output function count, multiple of K
    Bytes data;
    std::shared_ptr<const workloads::SingleJobWorkload> workload;

    void validate() const;
};

/// File and reduce-function assignment. Files follow the block incidence
/// (server B_{i,l} maps file w_n iff n is in its block); functions go
/// round-robin, server s reduces {s, s+K, ...}.
struct PlacementPlan {
    std::vector<std::vector<int>> map_files;     ///< per server, sorted 1-based file ids
    std::vector<std::vector<int>> reduce_funcs;  ///< per server, ascending function ids
};

PlacementPlan place(const SingleJobSpec& spec);

struct RunOptions {
    simnet::CostModel cost;
    bool concat_rounds = false;        ///< one round per group carrying all Q/K values
    bool randomized_matching = false;  ///< exercise a non-canonical matching
    std::uint64_t matching_seed = 0;
    std::uint64_t seed = 0;  ///< recorded in reports; drives nothing in the protocol
};

struct SingleJobRun {
    simnet::RunMeta meta;
    simnet::ShuffleTranscript transcript;
    std::vector<simnet::LoadReport> loads;
    std::map<int, Bytes> reduce_outputs;  ///< function -> final value
    std::uint64_t total_map_ops = 0;
};

/// The coded protocol end to end: placement, map, group-wise coded shuffle,
/// reduce, load accounting. Computation load is r = k by construction.
SingleJobRun run_single_coded(const SingleJobSpec& spec, const RunOptions& opt = {});

/// Uncoded baseline at replication r over an N = K file split with cyclic
/// placement; every needed value travels exactly once, unicast.
SingleJobRun run_single_uncoded(const SingleJobSpec& spec, int r, const RunOptions& opt = {});

/// Coded shuffle phases (encode, bus, decode) on an already mapped cluster;
/// exposed so tests can drive the shuffle in isolation.
void run_shuffle(simnet::Cluster& cluster, const design::ResolvableDesign& dsgn,
                 const std::vector<design::ServerGroup>& groups, const PlacementPlan& plan, int Q,
                 const RunOptions& opt);

/// {proposed, uncoded(r), cdc(r)} plus the file requirements, exact.
analysis::SingleJobFormulas predict_loads(const design::DesignParams& params, int r);

}  // namespace csh::singlejob

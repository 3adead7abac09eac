#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "csh/analysis.hpp"
#include "csh/design.hpp"
#include "csh/simnet.hpp"
#include "csh/workloads.hpp"

namespace csh::camr {

struct MultiJobSpec {
    design::DesignParams params;
    int gamma = 1;  ///< files per batch; N = k * gamma
    int Q = 0;      ///< functions per job, multiple of K (defaults to K)
    std::shared_ptr<const workloads::MultiJobWorkload> workload;

    int J() const { return static_cast<int>(params.N()); }  ///< jobs = points
    int N() const { return params.k * gamma; }              ///< files per job

    void validate() const;
};

/// Owners of job j are the k blocks containing point j, in class order.
struct OwnerMap {
    std::vector<std::vector<int>> owners;  ///< owners[j-1] = k server ids

    const std::vector<int>& of(int job) const { return owners[job - 1]; }
    /// Position (1..k) of `server` in X^(j), or 0 if not an owner.
    int position(int job, int server) const;
};

/// Batches of each job keyed by owner position: files_of(j, p) is the batch
/// labeled with the p-th owner of X^(j), which that owner does not store.
/// The b-th batch in file order carries the label of owner (b mod k) + 1,
/// the cyclic assignment the worked examples use.
struct BatchPlan {
    int gamma = 0;
    std::vector<std::vector<std::vector<int>>> batch_files;  ///< [job-1][pos-1] -> file ids

    const std::vector<int>& files_of(int job, int owner_pos) const {
        return batch_files[job - 1][owner_pos - 1];
    }
};

std::pair<OwnerMap, BatchPlan> place_multi(const MultiJobSpec& spec);

/// Precomputed protocol context shared by the stage drivers.
struct Context {
    MultiJobSpec spec;
    design::ResolvableDesign dsgn;
    std::vector<design::ServerGroup> groups;
    OwnerMap owners;
    BatchPlan batches;
};

Context build_context(const MultiJobSpec& spec);

struct RunOptions {
    simnet::CostModel cost;
    bool randomized_matching = false;
    std::uint64_t matching_seed = 0;
    std::uint64_t seed = 0;
};

/// Map phase: owners map and per-batch aggregate everything they store.
void map_phase(simnet::Cluster& cluster, const Context& ctx);

/// Stage 1: per job, one coded round among its owners; each owner recovers
/// the aggregate of its own-labeled (missing) batch.
void stage1(simnet::Cluster& cluster, const Context& ctx, const RunOptions& opt);

/// Stage 2: per empty-intersection group, one coded round; the member left
/// out of each (k-1)-subset recovers the aggregate of the batch those
/// members share for the job they jointly own.
void stage2(simnet::Cluster& cluster, const Context& ctx, const RunOptions& opt);

/// Stage 3: within each parallel class, the unique same-class owner unicasts
/// one aggregate per (receiver, job) covering all batches it stores.
void stage3(simnet::Cluster& cluster, const Context& ctx, const RunOptions& opt);

/// Combine local and received aggregates into every (server, job) output;
/// verifies the pieces tile [N] disjointly before applying the combiner.
std::map<simnet::ValueKey, Bytes> reduce_all(simnet::Cluster& cluster, const Context& ctx);

struct MultiJobRun {
    simnet::RunMeta meta;
    simnet::ShuffleTranscript transcript;
    std::vector<simnet::LoadReport> loads;  ///< stage1..3 and total
    std::map<simnet::ValueKey, Bytes> reduce_outputs;  ///< (job, function) -> value
    std::uint64_t max_ops_per_server = 0;
};

MultiJobRun run_multi(const MultiJobSpec& spec, const RunOptions& opt = {});

analysis::MultiJobFormulas predict_loads_multi(const design::DesignParams& params);

}  // namespace csh::camr

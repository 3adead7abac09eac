#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "csh/bytes.hpp"
#include "csh/rational.hpp"

namespace csh::simnet {

/// How transmitted bytes are charged against the communication load.
struct CostModel {
    enum class Mode {
        MulticastOnce,  ///< a coded packet's payload counts once, whatever the fan-out
        PerReceiver,    ///< payload charged once per receiver (basic linear broadcast)
    };
    Mode mode = Mode::MulticastOnce;
    std::uint64_t header_bytes = 0;  ///< fixed per-transmission overhead, 0 = pure payload accounting

    std::string name() const { return mode == Mode::MulticastOnce ? "multicast-once" : "per-receiver"; }
};

struct TransmitEntry {
    std::uint64_t round_id = 0;   ///< sequential shuffle round counter
    std::string stage;            ///< "single", "stage1".."stage3", "uncoded"
    int sender = 0;               ///< server id
    std::vector<int> receivers;   ///< server ids
    std::uint64_t payload_bytes = 0;
    std::int64_t group_id = -1;   ///< group index / job id, -1 for plain unicast
    int gamma = 0;                ///< function-slab index, 0 when not applicable
    Rational pad_slack_bytes;     ///< payload minus the ideal fractional packet size

    std::uint64_t charged_bytes(const CostModel& cm) const {
        std::uint64_t once = payload_bytes + cm.header_bytes;
        return cm.mode == CostModel::Mode::PerReceiver ? once * receivers.size() : once;
    }
};

/// Ordered record of every transmission; loads are computed from it.
struct ShuffleTranscript {
    std::vector<TransmitEntry> entries;
    std::map<std::string, std::uint64_t> phase_totals;  ///< phase -> payload bytes moved

    std::uint64_t payload_bytes() const;
    std::uint64_t charged_bytes(const CostModel& cm) const;
    std::uint64_t charged_bytes_for_stage(const std::string& stage, const CostModel& cm) const;
    Rational pad_slack_bytes() const;
    Rational pad_slack_bytes_for_stage(const std::string& stage) const;
};

/// Measured vs. predicted normalized load for one scheme (or CAMR stage).
struct LoadReport {
    std::string scheme;        ///< uncoded-r | proposed | cdc | ccdc | camr
    std::string stage = "total";
    std::uint64_t total_bits = 0;   ///< charged bits under the active cost model
    Rational denominator_bits;      ///< Q*N*B (single job) or J*Q*B (multi-job)
    Rational normalized_load;       ///< total_bits / denominator_bits
    Rational adjusted_load;         ///< (total_bits - padding slack) / denominator_bits
    Rational predicted_load;
    bool has_prediction = false;
};

/// (job, function, file) identity of one intermediate value. job = 0 in the
/// single-job protocol.
struct ValueKey {
    int job = 0;
    int function = 0;
    int file = 0;
    auto operator<=>(const ValueKey&) const = default;
};

/// B-bit combiner output covering a set of files of one (job, function).
struct AggregateValue {
    int job = 0;
    int function = 0;
    std::vector<int> covered_files;  ///< sorted
    Bytes payload;
};

struct InboxMessage {
    std::size_t entry_index = 0;  ///< transcript entry that justified the delivery
    std::string stage;
    std::int64_t group_id = -1;
    int gamma = 0;
    int sender = 0;
    Bytes payload;
};

struct WorkerState {
    int id = 0;
    std::map<int, Bytes> stored_files;            ///< single-job: file -> payload
    std::map<ValueKey, Bytes> stored_job_files;   ///< multi-job: key.file used, key.job used
    std::map<ValueKey, Bytes> mapped;             ///< single-job intermediate values
    std::map<ValueKey, Bytes> batch_aggs;         ///< multi-job per-batch aggregates, file = batch label
    std::vector<InboxMessage> inbox;
    std::map<ValueKey, Bytes> received;           ///< decoded single-job values
    std::vector<AggregateValue> received_aggs;    ///< decoded multi-job aggregates
    std::map<ValueKey, Bytes> reduce_outputs;     ///< function (and job) -> final value
    std::uint64_t map_ops = 0;                    ///< workload-defined cost counter
};

/// K workers plus the message bus. Workers exchange data only through
/// send(), which records a transcript entry and delivers to each receiver's
/// inbox; the driver replays phases in order, single-threaded.
class Cluster {
public:
    explicit Cluster(int num_workers);

    int size() const { return static_cast<int>(workers_.size()); }
    WorkerState& worker(int id) { return workers_[id - 1]; }
    const WorkerState& worker(int id) const { return workers_[id - 1]; }

    std::size_t send(int sender, std::span<const int> receivers, const Bytes& payload,
                     const std::string& stage, std::int64_t group_id, int gamma,
                     std::uint64_t round_id, const Rational& pad_slack);

    void add_phase_bytes(const std::string& phase, std::uint64_t bytes);

    ShuffleTranscript& transcript() { return transcript_; }
    const ShuffleTranscript& transcript() const { return transcript_; }

private:
    std::vector<WorkerState> workers_;
    ShuffleTranscript transcript_;
};

/// Context a run leaves behind so loads can be recomputed from a transcript
/// alone. denominator_bits is Q*N*B (single job) or J*Q*B (multi-job); for
/// variable-width workloads it is the actual intermediate byte total and
/// value_bits is 0.
struct RunMeta {
    std::string protocol;  ///< "single" | "multi"
    std::string scheme;    ///< "proposed" | "uncoded-r" | "camr" | "matvec-uncoded"
    std::string workload;
    int q = 0, k = 0;
    int Q = 0;
    int J = 0;      ///< multi-job only
    int gamma = 0;  ///< multi-job batch size
    int r = 0;      ///< uncoded replication factor
    std::uint64_t seed = 0;
    std::string cost_model = "multicast-once";
    std::uint64_t header_bytes = 0;
    std::uint64_t value_bits = 0;  ///< fixed B, 0 when variable
    Rational denominator_bits;
};

/// MPI-communicator budget comparison between the prior single-job scheme
/// (C(K, r+1) groups) and the design-based one (q^(k-1)(q-1) with k = K/q).
struct CommunicatorLimits {
    std::uint64_t open_mpi = (1ULL << 30) - 1;
    std::uint64_t mpich = 16000;
    std::uint64_t mvapich = 2000;
};

struct GroupCountAudit {
    std::uint64_t prior_groups = 0;
    std::uint64_t proposed_groups = 0;
    bool prior_overflowed = false;  ///< C(K, r+1) exceeded 64 bits; count saturated
    bool prior_exceeds_open_mpi = false, prior_exceeds_mpich = false, prior_exceeds_mvapich = false;
    bool proposed_exceeds_open_mpi = false, proposed_exceeds_mpich = false, proposed_exceeds_mvapich = false;
};

GroupCountAudit group_count_audit(int K, int r, int q, const CommunicatorLimits& limits = {});

}  // namespace csh::simnet

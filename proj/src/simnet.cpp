#include "csh/simnet.hpp"

#include <string>

#include "csh/errors.hpp"

namespace csh::simnet {

std::uint64_t ShuffleTranscript::payload_bytes() const {
    std::uint64_t total = 0;
    for (const auto& e : entries) total += e.payload_bytes;
    return total;
}

std::uint64_t ShuffleTranscript::charged_bytes(const CostModel& cm) const {
    std::uint64_t total = 0;
    for (const auto& e : entries) total += e.charged_bytes(cm);
    return total;
}

std::uint64_t ShuffleTranscript::charged_bytes_for_stage(const std::string& stage, const CostModel& cm) const {
    std::uint64_t total = 0;
    for (const auto& e : entries)
        if (e.stage == stage) total += e.charged_bytes(cm);
    return total;
}

Rational ShuffleTranscript::pad_slack_bytes() const {
    Rational total;
    for (const auto& e : entries) total += e.pad_slack_bytes;
    return total;
}

Rational ShuffleTranscript::pad_slack_bytes_for_stage(const std::string& stage) const {
    Rational total;
    for (const auto& e : entries)
        if (e.stage == stage) total += e.pad_slack_bytes;
    return total;
}

Cluster::Cluster(int num_workers) {
    if (num_workers < 1) throw ConstraintError("cluster needs at least one worker");
    workers_.resize(num_workers);
    for (int i = 0; i < num_workers; ++i) workers_[i].id = i + 1;
}

std::size_t Cluster::send(int sender, std::span<const int> receivers, const Bytes& payload,
                          const std::string& stage, std::int64_t group_id, int gamma,
                          std::uint64_t round_id, const Rational& pad_slack) {
    if (sender < 1 || sender > size()) throw ConstraintError("sender id out of range");
    TransmitEntry entry;
    entry.round_id = round_id;
    entry.stage = stage;
    entry.sender = sender;
    entry.receivers.assign(receivers.begin(), receivers.end());
    entry.payload_bytes = payload.size();
    entry.group_id = group_id;
    entry.gamma = gamma;
    entry.pad_slack_bytes = pad_slack;
    transcript_.entries.push_back(entry);
    std::size_t index = transcript_.entries.size() - 1;

    for (int r : receivers) {
        if (r < 1 || r > size()) throw ConstraintError("receiver id out of range");
        InboxMessage msg;
        msg.entry_index = index;
        msg.stage = stage;
        msg.group_id = group_id;
        msg.gamma = gamma;
        msg.sender = sender;
        msg.payload = payload;
        workers_[r - 1].inbox.push_back(std::move(msg));
    }
    transcript_.phase_totals["Shuffle"] += payload.size();
    return index;
}

void Cluster::add_phase_bytes(const std::string& phase, std::uint64_t bytes) {
    transcript_.phase_totals[phase] += bytes;
}

GroupCountAudit group_count_audit(int K, int r, int q, const CommunicatorLimits& limits) {
    if (K < 2 || r < 1 || r >= K) throw ConstraintError("need 1 <= r < K");
    if (q < 2 || K % q != 0) throw ConstraintError("q must be >= 2 and divide K");
    const int k = K / q;

    GroupCountAudit audit;
    try {
        audit.prior_groups = binomial(static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(r) + 1);
    } catch (const ConstraintError&) {
        audit.prior_groups = UINT64_MAX;
        audit.prior_overflowed = true;
    }
    audit.proposed_groups =
        checked_pow(static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(k) - 1) *
        static_cast<std::uint64_t>(q - 1);

    audit.prior_exceeds_open_mpi = audit.prior_groups > limits.open_mpi;
    audit.prior_exceeds_mpich = audit.prior_groups > limits.mpich;
    audit.prior_exceeds_mvapich = audit.prior_groups > limits.mvapich;
    audit.proposed_exceeds_open_mpi = audit.proposed_groups > limits.open_mpi;
    audit.proposed_exceeds_mpich = audit.proposed_groups > limits.mpich;
    audit.proposed_exceeds_mvapich = audit.proposed_groups > limits.mvapich;
    return audit;
}

}  // namespace csh::simnet

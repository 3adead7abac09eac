#include "csh/camr.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "csh/errors.hpp"
#include "csh/exchange.hpp"

namespace csh::camr {

namespace {

using simnet::AggregateValue;
using simnet::Cluster;
using simnet::ValueKey;

exchange::Matching stage_matching(const RunOptions& opt, int k, std::uint64_t salt,
                                  std::int64_t group_id, int gamma) {
    if (!opt.randomized_matching) return exchange::canonical_matchings(k);
    SplitMix64 mix(opt.matching_seed ^ salt ^ (static_cast<std::uint64_t>(group_id) << 24) ^
                   static_cast<std::uint64_t>(gamma));
    return exchange::randomized_matchings(k, mix.next());
}

const Bytes& batch_agg(const simnet::WorkerState& w, int job, int function, int pos) {
    auto it = w.batch_aggs.find(ValueKey{job, function, pos});
    if (it == w.batch_aggs.end())
        throw ProtocolError("server " + std::to_string(w.id) + " missing batch aggregate (job=" +
                            std::to_string(job) + ", f=" + std::to_string(function) +
                            ", batch=" + std::to_string(pos) + ")");
    return it->second;
}

// One coded exchange: every member recovers the aggregate it misses.
struct CodedRound {
    std::uint64_t round_id = 0;
    std::string stage;
    std::int64_t group_id = 0;
    int gamma = 0;
    std::uint64_t salt = 0;
    std::vector<int> members;                    ///< server ids, class order
    std::vector<ValueKey> chunk_keys;            ///< per member position, the aggregate it misses
    std::vector<std::vector<int>> covered_files; ///< per member position
};

void run_coded_rounds(Cluster& cluster, const std::vector<CodedRound>& rounds, std::size_t B,
                      const RunOptions& opt) {
    struct Packet {
        const CodedRound* round;
        int sender_pos;
        Bytes payload;
    };

    // Pack/Encode
    std::vector<Packet> schedule;
    for (const CodedRound& round : rounds) {
        const int k = static_cast<int>(round.members.size());
        const exchange::Matching matching =
            stage_matching(opt, k, round.salt, round.group_id, round.gamma);
        for (int m = 1; m <= k; ++m) {
            const auto& encoder = cluster.worker(round.members[m - 1]);
            std::vector<const Bytes*> ptrs(k, nullptr);
            for (int l = 1; l <= k; ++l) {
                if (l == m) continue;
                const ValueKey& key = round.chunk_keys[l - 1];
                const Bytes& chunk = batch_agg(encoder, key.job, key.function, key.file);
                if (chunk.size() != B) throw ProtocolError("aggregate width drifted from B");
                ptrs[l - 1] = &chunk;
            }
            exchange::CodedPacket pkt = exchange::encode_member(m, ptrs, matching, B);
            cluster.add_phase_bytes("PackEncode", pkt.payload.size());
            schedule.push_back({&round, m, std::move(pkt.payload)});
        }
    }

    // Shuffle
    for (const Packet& pkt : schedule) {
        const CodedRound& round = *pkt.round;
        const int k = static_cast<int>(round.members.size());
        std::vector<int> receivers;
        for (int m = 1; m <= k; ++m)
            if (m != pkt.sender_pos) receivers.push_back(round.members[m - 1]);
        Rational slack = Rational(static_cast<std::int64_t>(pkt.payload.size())) -
                         Rational(static_cast<std::int64_t>(B), k - 1);
        cluster.send(round.members[pkt.sender_pos - 1], receivers, pkt.payload, round.stage,
                     round.group_id, round.gamma, round.round_id, slack);
    }

    // Unpack/Decode
    std::map<std::pair<std::int64_t, int>, const CodedRound*> by_key;
    for (const CodedRound& round : rounds) by_key[{round.group_id, round.gamma}] = &round;

    if (rounds.empty()) return;
    const std::string stage = rounds.front().stage;
    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        std::map<std::pair<std::int64_t, int>, std::vector<exchange::CodedPacket>> incoming;
        for (const auto& msg : w.inbox) {
            if (msg.stage != stage) continue;
            const CodedRound* round = by_key.at({msg.group_id, msg.gamma});
            int sender_pos = 0;
            for (int m = 1; m <= static_cast<int>(round->members.size()); ++m)
                if (round->members[m - 1] == msg.sender) sender_pos = m;
            incoming[{msg.group_id, msg.gamma}].push_back(exchange::CodedPacket{sender_pos, msg.payload});
        }
        for (auto& [key, packets] : incoming) {
            const CodedRound& round = *by_key.at(key);
            const int k = static_cast<int>(round.members.size());
            int me = 0;
            for (int m = 1; m <= k; ++m)
                if (round.members[m - 1] == s) me = m;
            if (me == 0) throw ProtocolError("stage packet delivered to a non-member");

            std::vector<const Bytes*> ptrs(k, nullptr);
            for (int l = 1; l <= k; ++l) {
                if (l == me) continue;
                const ValueKey& ck = round.chunk_keys[l - 1];
                ptrs[l - 1] = &batch_agg(w, ck.job, ck.function, ck.file);
            }
            const exchange::Matching matching =
                stage_matching(opt, k, round.salt, round.group_id, round.gamma);
            Bytes chunk = exchange::decode_round(packets, ptrs, me, B, B, matching);
            cluster.add_phase_bytes("UnpackDecode", chunk.size());

            AggregateValue agg;
            agg.job = round.chunk_keys[me - 1].job;
            agg.function = round.chunk_keys[me - 1].function;
            agg.covered_files = round.covered_files[me - 1];
            agg.payload = std::move(chunk);
            w.received_aggs.push_back(std::move(agg));
        }
    }
}

}  // namespace

void MultiJobSpec::validate() const {
    params.validate();
    if (gamma < 1) throw ConstraintError("batch size gamma must be >= 1");
    if (!workload) throw ConstraintError("multi-job spec needs a workload");
    const int K = params.K();
    if (Q < 1 || Q % K != 0) throw ConstraintError("Q must be a multiple of K = " + std::to_string(K));
    if (workload->num_jobs() != J())
        throw ConstraintError("workload has " + std::to_string(workload->num_jobs()) +
                              " jobs, the design needs J = q^(k-1) = " + std::to_string(J()));
    if (workload->files_per_job() != N())
        throw ConstraintError("workload files per job != k*gamma = " + std::to_string(N()));
    if (workload->num_functions() != Q) throw ConstraintError("workload function count != Q");
    if (workload->value_bytes() == 0) throw ConstraintError("aggregated workloads need a fixed width");
}

int OwnerMap::position(int job, int server) const {
    const auto& X = owners[job - 1];
    for (int p = 1; p <= static_cast<int>(X.size()); ++p)
        if (X[p - 1] == server) return p;
    return 0;
}

std::pair<OwnerMap, BatchPlan> place_multi(const MultiJobSpec& spec) {
    spec.validate();
    const auto dsgn = design::build_design(design::build_spc_matrix(spec.params));
    const int k = spec.params.k, J = spec.J(), N = spec.N();

    OwnerMap owners;
    owners.owners.assign(J, std::vector<int>(k, 0));
    for (int s = 1; s <= spec.params.K(); ++s)
        for (int p : dsgn.block(s)) owners.owners[p - 1][dsgn.class_of(s) - 1] = s;

    // Batch b (file order) carries the label of owner (b mod k) + 1; with
    // owners listed in class order this reproduces the worked examples.
    BatchPlan batches;
    batches.gamma = spec.gamma;
    batches.batch_files.assign(J, std::vector<std::vector<int>>(k));
    for (int j = 1; j <= J; ++j)
        for (int b = 1; b <= k; ++b) {
            int pos = b % k + 1;
            for (int n = (b - 1) * spec.gamma + 1; n <= b * spec.gamma && n <= N; ++n)
                batches.batch_files[j - 1][pos - 1].push_back(n);
        }
    return {std::move(owners), std::move(batches)};
}

Context build_context(const MultiJobSpec& spec) {
    Context ctx;
    ctx.spec = spec;
    ctx.dsgn = design::build_design(design::build_spc_matrix(spec.params));
    ctx.groups = design::enumerate_groups(ctx.dsgn);
    auto [owners, batches] = place_multi(spec);
    ctx.owners = std::move(owners);
    ctx.batches = std::move(batches);
    return ctx;
}

void map_phase(Cluster& cluster, const Context& ctx) {
    const auto& wl = *ctx.spec.workload;
    const int k = ctx.spec.params.k, Q = ctx.spec.Q;

    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        for (int p : ctx.dsgn.block(s)) {
            const int job = p;
            const int own_pos = ctx.owners.position(job, s);
            for (int pos = 1; pos <= k; ++pos) {
                if (pos == own_pos) continue;  // the batch bearing our own label is never stored
                for (int n : ctx.batches.files_of(job, pos)) {
                    Bytes payload = wl.file_payload(job, n);
                    cluster.add_phase_bytes("CodeGen", payload.size());
                    w.stored_job_files[ValueKey{job, 0, n}] = std::move(payload);
                }
            }
        }
    }

    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        for (int p : ctx.dsgn.block(s)) {
            const int job = p;
            const int own_pos = ctx.owners.position(job, s);
            for (int pos = 1; pos <= k; ++pos) {
                if (pos == own_pos) continue;
                // map the batch, then fold each function's values into one aggregate
                std::vector<workloads::MapResult> results;
                for (int n : ctx.batches.files_of(job, pos)) {
                    results.push_back(wl.map_file(job, w.stored_job_files.at(ValueKey{job, 0, n})));
                    w.map_ops += results.back().ops;
                    for (const Bytes& v : results.back().values) cluster.add_phase_bytes("Map", v.size());
                }
                for (int f = 1; f <= Q; ++f) {
                    std::vector<Bytes> vals;
                    vals.reserve(results.size());
                    for (const auto& r : results) vals.push_back(r.values[f - 1]);
                    w.batch_aggs[ValueKey{job, f, pos}] = wl.aggregate(vals);
                }
            }
        }
    }
}

void stage1(Cluster& cluster, const Context& ctx, const RunOptions& opt) {
    const int k = ctx.spec.params.k, K = ctx.spec.params.K(), J = ctx.spec.J();
    std::vector<CodedRound> rounds;
    std::uint64_t id = 0;
    for (int g = 1; g <= ctx.spec.Q / K; ++g)
        for (int j = 1; j <= J; ++j) {
            CodedRound round;
            round.round_id = ++id;
            round.stage = "stage1";
            round.group_id = j;
            round.gamma = g;
            round.salt = 0x51a9e1;
            round.members = ctx.owners.of(j);
            for (int p = 1; p <= k; ++p) {
                const int server = round.members[p - 1];
                const int f = server + (g - 1) * K;
                round.chunk_keys.push_back(ValueKey{j, f, p});
                round.covered_files.push_back(ctx.batches.files_of(j, p));
            }
            rounds.push_back(std::move(round));
        }
    run_coded_rounds(cluster, rounds, ctx.spec.workload->value_bytes(), opt);
}

void stage2(Cluster& cluster, const Context& ctx, const RunOptions& opt) {
    const int k = ctx.spec.params.k, K = ctx.spec.params.K();
    std::vector<CodedRound> rounds;
    std::uint64_t id = 0;
    for (int g = 1; g <= ctx.spec.Q / K; ++g)
        for (std::size_t gi = 0; gi < ctx.groups.size(); ++gi) {
            const auto& G = ctx.groups[gi];
            CodedRound round;
            round.round_id = ++id;
            round.stage = "stage2";
            round.group_id = static_cast<std::int64_t>(gi) + 1;
            round.gamma = g;
            round.salt = 0x52a9e2;
            round.members = G.members;
            for (int c = 1; c <= k; ++c) {
                const int server = G.members[c - 1];
                const int job = design::missing_point(ctx.dsgn, G, c);
                // The leftover owner shares the excluded member's parallel
                // class; its position in X^(j) class order is exactly c.
                const int remaining = ctx.owners.of(job)[c - 1];
                if (ctx.dsgn.class_of(remaining) != ctx.dsgn.class_of(server) ||
                    ctx.owners.position(job, server) != 0)
                    throw ProtocolError("owner-class mismatch in stage 2 group construction");
                const int f = server + (g - 1) * K;
                round.chunk_keys.push_back(ValueKey{job, f, c});
                round.covered_files.push_back(ctx.batches.files_of(job, c));
            }
            rounds.push_back(std::move(round));
        }
    run_coded_rounds(cluster, rounds, ctx.spec.workload->value_bytes(), opt);
}

void stage3(Cluster& cluster, const Context& ctx, const RunOptions& /*opt*/) {
    const int k = ctx.spec.params.k, q = ctx.spec.params.q, K = ctx.spec.params.K();
    const int N = ctx.spec.N();
    const std::size_t B = ctx.spec.workload->value_bytes();

    // send phase: ascending (receiver, sender, job) within each class
    std::uint64_t id = 0;
    for (int g = 1; g <= ctx.spec.Q / K; ++g)
        for (int i = 1; i <= k; ++i)
            for (int ri = 0; ri < q; ++ri) {
                const int receiver = (i - 1) * q + ri + 1;
                const int f = receiver + (g - 1) * K;
                for (int si = 0; si < q; ++si) {
                    const int sender = (i - 1) * q + si + 1;
                    if (sender == receiver) continue;
                    auto& sw = cluster.worker(sender);
                    for (int job : ctx.dsgn.block(sender)) {
                        // all of the sender's stored batches of this job
                        const int s_pos = ctx.owners.position(job, sender);
                        std::vector<Bytes> parts;
                        for (int pos = 1; pos <= k; ++pos)
                            if (pos != s_pos) parts.push_back(batch_agg(sw, job, f, pos));
                        Bytes payload = ctx.spec.workload->aggregate(parts);
                        if (payload.size() != B) throw ProtocolError("aggregate width drifted from B");
                        cluster.add_phase_bytes("PackEncode", payload.size());
                        int rcv[1] = {receiver};
                        cluster.send(sender, rcv, payload, "stage3", job, g, ++id, Rational(0));
                    }
                }
            }

    // receive phase
    for (int s = 1; s <= K; ++s) {
        auto& w = cluster.worker(s);
        for (const auto& msg : w.inbox) {
            if (msg.stage != "stage3") continue;
            const int job = static_cast<int>(msg.group_id);
            const int s_pos = ctx.owners.position(job, msg.sender);
            AggregateValue agg;
            agg.job = job;
            agg.function = s + (msg.gamma - 1) * K;
            const auto& missing = ctx.batches.files_of(job, s_pos);
            for (int n = 1; n <= N; ++n)
                if (!std::binary_search(missing.begin(), missing.end(), n)) agg.covered_files.push_back(n);
            agg.payload = msg.payload;
            cluster.add_phase_bytes("UnpackDecode", agg.payload.size());
            w.received_aggs.push_back(std::move(agg));
        }
    }
}

std::map<ValueKey, Bytes> reduce_all(Cluster& cluster, const Context& ctx) {
    const int k = ctx.spec.params.k, K = ctx.spec.params.K(), J = ctx.spec.J(), N = ctx.spec.N();
    std::map<ValueKey, Bytes> outputs;

    for (int s = 1; s <= K; ++s) {
        auto& w = cluster.worker(s);
        for (int g = 1; g <= ctx.spec.Q / K; ++g) {
            const int f = s + (g - 1) * K;
            for (int j = 1; j <= J; ++j) {
                struct Piece {
                    const std::vector<int>* files;
                    const Bytes* payload;
                };
                std::vector<Piece> pieces;
                const int own_pos = ctx.owners.position(j, s);
                if (own_pos != 0) {
                    for (int pos = 1; pos <= k; ++pos)
                        if (pos != own_pos)
                            pieces.push_back({&ctx.batches.files_of(j, pos), &batch_agg(w, j, f, pos)});
                }
                for (const auto& agg : w.received_aggs)
                    if (agg.job == j && agg.function == f) pieces.push_back({&agg.covered_files, &agg.payload});

                std::vector<int> cover(N + 1, 0);
                for (const Piece& p : pieces)
                    for (int n : *p.files) ++cover[n];
                for (int n = 1; n <= N; ++n)
                    if (cover[n] != 1)
                        throw ProtocolError("aggregation cover broken at server " + std::to_string(s) +
                                            ", job " + std::to_string(j) + ", file " + std::to_string(n));

                std::sort(pieces.begin(), pieces.end(),
                          [](const Piece& a, const Piece& b) { return a.files->front() < b.files->front(); });
                std::vector<Bytes> payloads;
                payloads.reserve(pieces.size());
                for (const Piece& p : pieces) payloads.push_back(*p.payload);
                Bytes out = ctx.spec.workload->aggregate(payloads);
                cluster.add_phase_bytes("Reduce", out.size());
                w.reduce_outputs[ValueKey{j, f, 0}] = out;
                outputs[ValueKey{j, f, 0}] = std::move(out);
            }
        }
    }
    return outputs;
}

MultiJobRun run_multi(const MultiJobSpec& spec, const RunOptions& opt) {
    Context ctx = build_context(spec);
    Cluster cluster(spec.params.K());

    map_phase(cluster, ctx);
    stage1(cluster, ctx, opt);
    stage2(cluster, ctx, opt);
    stage3(cluster, ctx, opt);

    MultiJobRun run;
    run.reduce_outputs = reduce_all(cluster, ctx);
    run.transcript = cluster.transcript();
    for (int s = 1; s <= cluster.size(); ++s)
        run.max_ops_per_server = std::max(run.max_ops_per_server, cluster.worker(s).map_ops);

    const std::size_t B = spec.workload->value_bytes();
    const Rational denominator(static_cast<std::int64_t>(spec.J()) * spec.Q * static_cast<std::int64_t>(B) * 8);
    const auto predicted = predict_loads_multi(spec.params);

    run.meta.protocol = "multi";
    run.meta.scheme = "camr";
    run.meta.workload = spec.workload->name();
    run.meta.q = spec.params.q;
    run.meta.k = spec.params.k;
    run.meta.Q = spec.Q;
    run.meta.J = spec.J();
    run.meta.gamma = spec.gamma;
    run.meta.seed = opt.seed;
    run.meta.cost_model = opt.cost.name();
    run.meta.header_bytes = opt.cost.header_bytes;
    run.meta.value_bits = B * 8;
    run.meta.denominator_bits = denominator;

    auto stage_report = [&](const std::string& stage, const Rational& predicted_load) {
        simnet::LoadReport rep;
        rep.scheme = "camr";
        rep.stage = stage;
        rep.total_bits = run.transcript.charged_bytes_for_stage(stage, opt.cost) * 8;
        rep.denominator_bits = denominator;
        Rational slack_bits = run.transcript.pad_slack_bytes_for_stage(stage) * Rational(8);
        if (opt.cost.mode == simnet::CostModel::Mode::PerReceiver) {
            Rational scaled;
            for (const auto& e : run.transcript.entries)
                if (e.stage == stage)
                    scaled += e.pad_slack_bytes * Rational(8 * static_cast<std::int64_t>(e.receivers.size()));
            slack_bits = scaled;
        }
        rep.normalized_load = Rational(static_cast<std::int64_t>(rep.total_bits)) / denominator;
        rep.adjusted_load =
            (Rational(static_cast<std::int64_t>(rep.total_bits)) - slack_bits) / denominator;
        rep.predicted_load = predicted_load;
        rep.has_prediction = true;
        return rep;
    };
    run.loads.push_back(stage_report("stage1", predicted.stage1));
    run.loads.push_back(stage_report("stage2", predicted.stage2));
    run.loads.push_back(stage_report("stage3", predicted.stage3));

    simnet::LoadReport total;
    total.scheme = "camr";
    total.stage = "total";
    total.total_bits = run.transcript.charged_bytes(opt.cost) * 8;
    total.denominator_bits = denominator;
    total.normalized_load = Rational(static_cast<std::int64_t>(total.total_bits)) / denominator;
    Rational slack_total;
    for (const auto& rep : run.loads) slack_total += rep.normalized_load - rep.adjusted_load;
    total.adjusted_load = total.normalized_load - slack_total;
    total.predicted_load = predicted.camr_total;
    total.has_prediction = true;
    run.loads.push_back(total);
    return run;
}

analysis::MultiJobFormulas predict_loads_multi(const design::DesignParams& params) {
    return analysis::multi_job_formulas(params);
}

}  // namespace csh::camr

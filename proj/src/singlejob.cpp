#include "csh/singlejob.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "csh/errors.hpp"
#include "csh/exchange.hpp"

namespace csh::singlejob {

namespace {

using simnet::Cluster;
using simnet::ValueKey;

std::uint64_t round_matching_seed(std::uint64_t base, std::int64_t group_id, int gamma) {
    SplitMix64 mix(base ^ (static_cast<std::uint64_t>(group_id) << 20) ^ static_cast<std::uint64_t>(gamma));
    return mix.next();
}

exchange::Matching round_matching(const RunOptions& opt, int k, std::int64_t group_id, int gamma) {
    if (!opt.randomized_matching) return exchange::canonical_matchings(k);
    return exchange::randomized_matchings(k, round_matching_seed(opt.matching_seed, group_id, gamma));
}

struct RoundMeta {
    std::size_t common_len = 0;
    std::vector<std::size_t> chunk_lens;               // per member position
    std::vector<std::vector<std::size_t>> slab_lens;   // concat mode: per member, per slab
};

struct ScheduledPacket {
    std::uint64_t round_id = 0;
    std::int64_t group_id = 0;
    int gamma = 0;
    int sender_pos = 0;
    Bytes payload;
};

// Distribute file payloads per the plan and run every map task. Map results
// are cached per file (map calls are pure), but each holder is charged its
// own ops. Returns the total intermediate bytes over unique (function, file)
// pairs, the Definition-3 normalization basis for variable-width workloads.
std::uint64_t load_and_map(Cluster& cluster, const workloads::SingleJobWorkload& wl,
                           const std::vector<Bytes>& files, const std::vector<std::vector<int>>& map_files,
                           std::uint64_t* total_ops) {
    const int Q = wl.num_functions();
    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        for (int n : map_files[s - 1]) {
            w.stored_files[n] = files[n - 1];
            cluster.add_phase_bytes("CodeGen", files[n - 1].size());
        }
    }

    std::map<int, workloads::MapResult> cache;
    std::uint64_t unique_bytes = 0;
    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        for (auto& [n, payload] : w.stored_files) {
            auto it = cache.find(n);
            if (it == cache.end()) {
                it = cache.emplace(n, wl.map_file(payload)).first;
                for (const Bytes& v : it->second.values) unique_bytes += v.size();
            }
            for (int f = 1; f <= Q; ++f) {
                w.mapped[ValueKey{0, f, n}] = it->second.values[f - 1];
                cluster.add_phase_bytes("Map", it->second.values[f - 1].size());
            }
            w.map_ops += it->second.ops;
            if (total_ops) *total_ops += it->second.ops;
        }
    }
    return unique_bytes;
}

const Bytes& held_value(const simnet::WorkerState& w, int function, int file) {
    auto it = w.mapped.find(ValueKey{0, function, file});
    if (it == w.mapped.end())
        throw ProtocolError("server " + std::to_string(w.id) + " asked for value (f=" +
                            std::to_string(function) + ", n=" + std::to_string(file) +
                            ") it did not map");
    return it->second;
}

}  // namespace

void SingleJobSpec::validate() const {
    params.validate();
    if (!workload) throw ConstraintError("single-job spec needs a workload");
    if (Q < 1 || Q % params.K() != 0)
        throw ConstraintError("Q must be a multiple of K = " + std::to_string(params.K()));
    if (workload->num_functions() != Q)
        throw ConstraintError("workload provides " + std::to_string(workload->num_functions()) +
                              " functions, spec promises Q = " + std::to_string(Q));
}

PlacementPlan place(const SingleJobSpec& spec) {
    spec.validate();
    const auto dsgn = design::build_design(design::build_spc_matrix(spec.params));
    const int K = spec.params.K();

    PlacementPlan plan;
    plan.map_files.resize(K);
    plan.reduce_funcs.resize(K);
    for (int s = 1; s <= K; ++s) {
        plan.map_files[s - 1] = dsgn.block(s);
        for (int f = s; f <= spec.Q; f += K) plan.reduce_funcs[s - 1].push_back(f);
    }
    return plan;
}

void run_shuffle(Cluster& cluster, const design::ResolvableDesign& dsgn,
                 const std::vector<design::ServerGroup>& groups, const PlacementPlan& plan, int Q,
                 const RunOptions& opt) {
    const int k = dsgn.params.k;
    const int K = dsgn.params.K();
    const int slabs = Q / K;
    const int rounds_per_group = opt.concat_rounds ? 1 : slabs;

    // --- Pack/Encode ---------------------------------------------------
    std::map<std::pair<std::int64_t, int>, RoundMeta> metas;
    std::vector<ScheduledPacket> schedule;
    std::uint64_t round_id = 0;
    for (int round = 1; round <= rounds_per_group; ++round) {
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& G = groups[gi];
            const std::int64_t group_id = static_cast<std::int64_t>(gi) + 1;
            ++round_id;

            std::vector<int> points(k);
            for (int l = 1; l <= k; ++l) points[l - 1] = design::missing_point(dsgn, G, l);

            // Chunk l is the value(s) the excluded member l is missing;
            // every other member holds file points[l-1] and has mapped it.
            auto chunk_for = [&](const simnet::WorkerState& holder, int l) {
                const int server = G.members[l - 1];
                Bytes chunk;
                if (opt.concat_rounds) {
                    for (int g = 1; g <= slabs; ++g) {
                        const Bytes& v = held_value(holder, plan.reduce_funcs[server - 1][g - 1], points[l - 1]);
                        chunk.insert(chunk.end(), v.begin(), v.end());
                    }
                } else {
                    chunk = held_value(holder, plan.reduce_funcs[server - 1][round - 1], points[l - 1]);
                }
                return chunk;
            };

            // Round metadata is master-side bookkeeping: the common length
            // covers all k chunks, including the one each encoder misses.
            RoundMeta meta;
            meta.chunk_lens.resize(k);
            meta.slab_lens.assign(k, {});
            for (int l = 1; l <= k; ++l) {
                const int holder_pos = l == 1 ? 2 : 1;
                const auto& holder = cluster.worker(G.members[holder_pos - 1]);
                if (opt.concat_rounds) {
                    const int server = G.members[l - 1];
                    std::size_t total = 0;
                    for (int g = 1; g <= slabs; ++g) {
                        std::size_t len =
                            held_value(holder, plan.reduce_funcs[server - 1][g - 1], points[l - 1]).size();
                        meta.slab_lens[l - 1].push_back(len);
                        total += len;
                    }
                    meta.chunk_lens[l - 1] = total;
                } else {
                    meta.chunk_lens[l - 1] = chunk_for(holder, l).size();
                }
                meta.common_len = std::max(meta.common_len, meta.chunk_lens[l - 1]);
            }
            metas[{group_id, round}] = meta;

            const exchange::Matching matching = round_matching(opt, k, group_id, round);
            for (int m = 1; m <= k; ++m) {
                const auto& encoder = cluster.worker(G.members[m - 1]);
                std::vector<Bytes> own(k);
                std::vector<const Bytes*> ptrs(k, nullptr);
                for (int l = 1; l <= k; ++l) {
                    if (l == m) continue;
                    own[l - 1] = chunk_for(encoder, l);
                    ptrs[l - 1] = &own[l - 1];
                }
                exchange::CodedPacket pkt = exchange::encode_member(m, ptrs, matching, meta.common_len);
                cluster.add_phase_bytes("PackEncode", pkt.payload.size());
                schedule.push_back({round_id, group_id, round, m, std::move(pkt.payload)});
            }
        }
    }

    // --- Shuffle --------------------------------------------------------
    for (const auto& pkt : schedule) {
        const auto& G = groups[pkt.group_id - 1];
        const auto& meta = metas[{pkt.group_id, pkt.gamma}];
        std::vector<int> receivers;
        for (int m = 1; m <= k; ++m)
            if (m != pkt.sender_pos) receivers.push_back(G.members[m - 1]);
        Rational ideal(static_cast<std::int64_t>(meta.common_len), k - 1);
        Rational slack = Rational(static_cast<std::int64_t>(pkt.payload.size())) - ideal;
        cluster.send(G.members[pkt.sender_pos - 1], receivers, pkt.payload, "single", pkt.group_id,
                     pkt.gamma, pkt.round_id, slack);
    }

    // --- Unpack/Decode ---------------------------------------------------
    for (int s = 1; s <= K; ++s) {
        auto& w = cluster.worker(s);
        std::map<std::pair<std::int64_t, int>, std::vector<exchange::CodedPacket>> rounds;
        for (const auto& msg : w.inbox) {
            if (msg.stage != "single") continue;
            const auto& G = groups[msg.group_id - 1];
            int sender_pos = 0;
            for (int m = 1; m <= k; ++m)
                if (G.members[m - 1] == msg.sender) sender_pos = m;
            rounds[{msg.group_id, msg.gamma}].push_back({sender_pos, msg.payload});
        }
        for (auto& [key, packets] : rounds) {
            const auto [group_id, round] = key;
            const auto& G = groups[group_id - 1];
            const auto& meta = metas.at(key);
            int me = 0;
            for (int m = 1; m <= k; ++m)
                if (G.members[m - 1] == s) me = m;
            if (me == 0) throw ProtocolError("server received a packet for a group it is not in");

            std::vector<int> points(k);
            for (int l = 1; l <= k; ++l) points[l - 1] = design::missing_point(dsgn, G, l);

            std::vector<Bytes> own(k);
            std::vector<const Bytes*> ptrs(k, nullptr);
            for (int l = 1; l <= k; ++l) {
                if (l == me) continue;
                const int server = G.members[l - 1];
                if (opt.concat_rounds) {
                    for (int g = 1; g <= Q / K; ++g) {
                        const Bytes& v = held_value(w, plan.reduce_funcs[server - 1][g - 1], points[l - 1]);
                        own[l - 1].insert(own[l - 1].end(), v.begin(), v.end());
                    }
                } else {
                    own[l - 1] = held_value(w, plan.reduce_funcs[server - 1][round - 1], points[l - 1]);
                }
                ptrs[l - 1] = &own[l - 1];
            }

            const exchange::Matching matching = round_matching(opt, k, group_id, round);
            Bytes chunk = exchange::decode_round(packets, ptrs, me, meta.chunk_lens[me - 1],
                                                 meta.common_len, matching);
            cluster.add_phase_bytes("UnpackDecode", chunk.size());

            if (opt.concat_rounds) {
                std::size_t off = 0;
                for (int g = 1; g <= Q / K; ++g) {
                    std::size_t len = meta.slab_lens[me - 1][g - 1];
                    Bytes piece(chunk.begin() + off, chunk.begin() + off + len);
                    off += len;
                    w.received[ValueKey{0, plan.reduce_funcs[s - 1][g - 1], points[me - 1]}] = std::move(piece);
                }
            } else {
                w.received[ValueKey{0, plan.reduce_funcs[s - 1][round - 1], points[me - 1]}] = std::move(chunk);
            }
        }
    }
}

namespace {

// Reduce phase plus output collection, shared by coded and uncoded paths.
void reduce_phase(Cluster& cluster, const SingleJobSpec& spec, const PlacementPlan& plan, int n_files,
                  SingleJobRun& run) {
    for (int s = 1; s <= cluster.size(); ++s) {
        auto& w = cluster.worker(s);
        for (int f : plan.reduce_funcs[s - 1]) {
            std::vector<Bytes> values;
            values.reserve(n_files);
            for (int n = 1; n <= n_files; ++n) {
                auto m = w.mapped.find(ValueKey{0, f, n});
                if (m != w.mapped.end()) {
                    values.push_back(m->second);
                    continue;
                }
                auto r = w.received.find(ValueKey{0, f, n});
                if (r == w.received.end())
                    throw ProtocolError("decodability failure: server " + std::to_string(s) +
                                        " missing value (f=" + std::to_string(f) +
                                        ", n=" + std::to_string(n) + ") after shuffle");
                values.push_back(r->second);
            }
            Bytes out = spec.workload->reduce(f, values);
            cluster.add_phase_bytes("Reduce", out.size());
            w.reduce_outputs[ValueKey{0, f, 0}] = out;
            run.reduce_outputs[f] = std::move(out);
        }
    }
}

simnet::LoadReport make_report(const std::string& scheme, const simnet::ShuffleTranscript& t,
                               const simnet::CostModel& cost, const Rational& denominator_bits,
                               const Rational& predicted) {
    simnet::LoadReport rep;
    rep.scheme = scheme;
    rep.total_bits = t.charged_bytes(cost) * 8;
    rep.denominator_bits = denominator_bits;
    Rational slack_bits = t.pad_slack_bytes() * Rational(8);
    if (cost.mode == simnet::CostModel::Mode::PerReceiver) {
        // every receiver was charged a copy of the padding
        Rational scaled;
        for (const auto& e : t.entries)
            scaled += e.pad_slack_bytes * Rational(8 * static_cast<std::int64_t>(e.receivers.size()));
        slack_bits = scaled;
    }
    if (denominator_bits.num() != 0) {
        rep.normalized_load = Rational(static_cast<std::int64_t>(rep.total_bits)) / denominator_bits;
        rep.adjusted_load = (Rational(static_cast<std::int64_t>(rep.total_bits)) - slack_bits) / denominator_bits;
    }
    rep.predicted_load = predicted;
    rep.has_prediction = true;
    return rep;
}

}  // namespace

SingleJobRun run_single_coded(const SingleJobSpec& spec, const RunOptions& opt) {
    spec.validate();
    const int K = spec.params.K();
    const auto N = static_cast<int>(spec.params.N());

    // CodeGen
    const auto dsgn = design::build_design(design::build_spc_matrix(spec.params));
    const auto groups = design::enumerate_groups(dsgn);
    const PlacementPlan plan = place(spec);
    const std::vector<Bytes> files = spec.workload->split(spec.data, N);

    SingleJobRun run;
    Cluster cluster(K);
    std::uint64_t unique_bytes =
        load_and_map(cluster, *spec.workload, files, plan.map_files, &run.total_map_ops);

    run_shuffle(cluster, dsgn, groups, plan, spec.Q, opt);
    reduce_phase(cluster, spec, plan, N, run);

    const std::size_t B = spec.workload->fixed_value_bytes();
    Rational denominator = B > 0 ? Rational(static_cast<std::int64_t>(spec.Q) * N * B * 8)
                                 : Rational(static_cast<std::int64_t>(unique_bytes) * 8);

    run.meta.protocol = "single";
    run.meta.scheme = "proposed";
    run.meta.workload = spec.workload->name();
    run.meta.q = spec.params.q;
    run.meta.k = spec.params.k;
    run.meta.Q = spec.Q;
    run.meta.r = spec.params.k;
    run.meta.seed = opt.seed;
    run.meta.cost_model = opt.cost.name();
    run.meta.header_bytes = opt.cost.header_bytes;
    run.meta.value_bits = B * 8;
    run.meta.denominator_bits = denominator;

    run.transcript = cluster.transcript();
    run.loads.push_back(make_report("proposed", run.transcript, opt.cost, denominator,
                                    predict_loads(spec.params, spec.params.k).proposed));
    return run;
}

SingleJobRun run_single_uncoded(const SingleJobSpec& spec, int r, const RunOptions& opt) {
    spec.validate();
    const int K = spec.params.K();
    if (r < 1 || r > K) throw ConstraintError("replication r must be in [1, K]");

    // Cyclic placement over an N = K file split: file n lives on servers
    // n, n+1, ..., n+r-1 (mod K).
    std::vector<std::vector<int>> holders(K);
    PlacementPlan plan;
    plan.map_files.resize(K);
    plan.reduce_funcs.resize(K);
    for (int n = 1; n <= K; ++n)
        for (int t = 0; t < r; ++t) {
            int s = (n - 1 + t) % K + 1;
            holders[n - 1].push_back(s);
            plan.map_files[s - 1].push_back(n);
        }
    for (int s = 1; s <= K; ++s) {
        std::sort(plan.map_files[s - 1].begin(), plan.map_files[s - 1].end());
        for (int f = s; f <= spec.Q; f += K) plan.reduce_funcs[s - 1].push_back(f);
    }

    const std::vector<Bytes> files = spec.workload->split(spec.data, K);

    SingleJobRun run;
    Cluster cluster(K);
    std::uint64_t unique_bytes =
        load_and_map(cluster, *spec.workload, files, plan.map_files, &run.total_map_ops);

    // Shuffle: each needed value unicast once, from the file's first holder.
    std::uint64_t round_id = 0;
    for (int s = 1; s <= K; ++s) {
        ++round_id;
        for (int f : plan.reduce_funcs[s - 1]) {
            for (int n = 1; n <= K; ++n) {
                const auto& w = cluster.worker(s);
                if (w.mapped.count(ValueKey{0, f, n})) continue;
                int sender = holders[n - 1].front();
                const Bytes& value = held_value(cluster.worker(sender), f, n);
                cluster.add_phase_bytes("PackEncode", value.size());
                int receivers[1] = {s};
                cluster.send(sender, receivers, value, "uncoded", -1, 0, round_id, Rational(0));
            }
        }
    }
    for (int s = 1; s <= K; ++s) {
        auto& w = cluster.worker(s);
        for (const auto& msg : w.inbox) cluster.add_phase_bytes("UnpackDecode", msg.payload.size());
    }
    // Unpack: receivers index the unicast values straight off the bus.
    for (int s = 1; s <= K; ++s) {
        auto& w = cluster.worker(s);
        std::size_t cursor = 0;
        for (int f : plan.reduce_funcs[s - 1])
            for (int n = 1; n <= K; ++n) {
                if (w.mapped.count(ValueKey{0, f, n})) continue;
                w.received[ValueKey{0, f, n}] = w.inbox[cursor++].payload;
            }
    }

    reduce_phase(cluster, spec, plan, K, run);

    const std::size_t B = spec.workload->fixed_value_bytes();
    Rational denominator = B > 0 ? Rational(static_cast<std::int64_t>(spec.Q) * K * B * 8)
                                 : Rational(static_cast<std::int64_t>(unique_bytes) * 8);

    run.meta.protocol = "single";
    run.meta.scheme = "uncoded-r";
    run.meta.workload = spec.workload->name();
    run.meta.q = spec.params.q;
    run.meta.k = spec.params.k;
    run.meta.Q = spec.Q;
    run.meta.r = r;
    run.meta.seed = opt.seed;
    run.meta.cost_model = opt.cost.name();
    run.meta.header_bytes = opt.cost.header_bytes;
    run.meta.value_bits = B * 8;
    run.meta.denominator_bits = denominator;

    run.transcript = cluster.transcript();
    run.loads.push_back(make_report("uncoded-r", run.transcript, opt.cost, denominator,
                                    predict_loads(spec.params, r).uncoded));
    return run;
}

analysis::SingleJobFormulas predict_loads(const design::DesignParams& params, int r) {
    return analysis::single_job_formulas(params, r);
}

}  // namespace csh::singlejob

#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csh/camr.hpp"
#include "csh/errors.hpp"
#include "csh/exchange.hpp"
#include "csh/json_io.hpp"
#include "csh/pipeline.hpp"
#include "csh/singlejob.hpp"
#include "csh/workloads.hpp"

namespace {

using namespace csh;

void emit(const std::string& text, const std::string& path) {
    if (path.empty())
        std::cout << text;
    else
        io::write_file(path, text);
}

int cmd_gen_design(int q, int k, const std::string& out) {
    design::DesignParams params{q, k};
    auto dsgn = design::build_design(design::build_spc_matrix(params));
    auto groups = design::enumerate_groups(dsgn);
    emit(io::dumps(io::design_to_json(dsgn, groups)), out);
    return 0;
}

int cmd_gen_data_sort(std::uint64_t records, std::uint64_t seed, const std::string& out) {
    Bytes data = workloads::generate_sort_records(records, seed);
    io::write_file(out, std::string(data.begin(), data.end()));
    std::cerr << "wrote " << data.size() << " bytes (" << records << " records) to " << out << "\n";
    return 0;
}

int cmd_gen_data_matvec(int jobs, int m, int n, std::uint64_t seed, const std::string& base) {
    auto jvec = workloads::generate_matvec_jobs(jobs, m, n, seed);
    Bytes blob;
    for (const auto& job : jvec) {
        for (std::int64_t v : job.A) put_u64_le(blob, static_cast<std::uint64_t>(v));
        for (std::int64_t v : job.b) put_u64_le(blob, static_cast<std::uint64_t>(v));
    }
    io::write_file(base + ".bin", std::string(blob.begin(), blob.end()));
    io::json sidecar;
    sidecar["m"] = m;
    sidecar["n"] = n;
    sidecar["J"] = jobs;
    sidecar["element_bits"] = 64;
    io::write_file(base + ".json", io::dumps(sidecar));
    std::cerr << "wrote " << blob.size() << " bytes to " << base << ".bin\n";
    return 0;
}

std::vector<workloads::MatVecJob> load_matvec(const std::string& base) {
    io::json sidecar = io::json::parse(io::read_file(base + ".json"));
    const int m = sidecar.at("m").get<int>();
    const int n = sidecar.at("n").get<int>();
    const int jobs = sidecar.at("J").get<int>();
    if (sidecar.at("element_bits").get<int>() != 64)
        throw ConstraintError("only 64-bit matvec elements are supported");
    std::string blob = io::read_file(base + ".bin");
    const std::size_t expect = static_cast<std::size_t>(jobs) * (static_cast<std::size_t>(m) * n + n) * 8;
    if (blob.size() != expect) throw ConstraintError("matvec blob size does not match the sidecar");

    Bytes bytes(blob.begin(), blob.end());
    std::vector<workloads::MatVecJob> out(jobs);
    std::size_t at = 0;
    for (auto& job : out) {
        job.m = m;
        job.n = n;
        job.A.resize(static_cast<std::size_t>(m) * n);
        job.b.resize(n);
        for (auto& v : job.A) v = static_cast<std::int64_t>(get_u64_le(bytes, (at++) * 8));
        for (auto& v : job.b) v = static_cast<std::int64_t>(get_u64_le(bytes, (at++) * 8));
    }
    return out;
}

struct SingleArgs {
    int q = 2, k = 3, Q = 0, r = 1;
    std::string workload = "wordcount";
    std::string scheme = "proposed";
    std::string input, report, transcript, output;
    std::uint64_t seed = 1, records = 10000, tokens = 4096;
    std::uint64_t header_bytes = 0;
    bool per_receiver = false, concat_rounds = false, randomized_matching = false;
    bool sampled_splitters = false;
};

int cmd_run_single(const SingleArgs& a) {
    singlejob::SingleJobSpec spec;
    spec.params = design::DesignParams{a.q, a.k};
    spec.params.validate();
    spec.Q = a.Q > 0 ? a.Q : spec.params.K();

    if (a.workload == "sort") {
        if (!a.input.empty()) {
            std::string raw = io::read_file(a.input);
            spec.data.assign(raw.begin(), raw.end());
        } else {
            spec.data = workloads::generate_sort_records(a.records, a.seed);
        }
        spec.workload = a.sampled_splitters
                            ? std::make_shared<workloads::SortWorkload>(
                                  spec.Q, workloads::SortWorkload::sampled_splitters(spec.data, spec.Q))
                            : std::make_shared<workloads::SortWorkload>(spec.Q);
    } else if (a.workload == "wordcount") {
        spec.workload = std::make_shared<workloads::WordCountWorkload>(spec.Q);
        if (!a.input.empty()) {
            std::string raw = io::read_file(a.input);
            spec.data.assign(raw.begin(), raw.end());
        } else {
            spec.data = workloads::generate_word_text(a.tokens, spec.Q, a.seed);
        }
    } else {
        throw ConstraintError("unknown workload: " + a.workload + " (expected sort or wordcount)");
    }

    singlejob::RunOptions opt;
    opt.cost.mode = a.per_receiver ? simnet::CostModel::Mode::PerReceiver
                                   : simnet::CostModel::Mode::MulticastOnce;
    opt.cost.header_bytes = a.header_bytes;
    opt.concat_rounds = a.concat_rounds;
    opt.randomized_matching = a.randomized_matching;
    opt.matching_seed = a.seed;
    opt.seed = a.seed;

    singlejob::SingleJobRun run = a.scheme == "uncoded"
                                      ? singlejob::run_single_uncoded(spec, a.r, opt)
                                      : singlejob::run_single_coded(spec, opt);

    emit(io::dumps(io::run_report(run.meta, run.transcript, run.loads)), a.report);
    if (!a.transcript.empty())
        io::write_file(a.transcript, io::dumps(io::transcript_to_json(run.meta, run.transcript)));
    if (!a.output.empty()) {
        Bytes all;
        for (const auto& [f, payload] : run.reduce_outputs)
            all.insert(all.end(), payload.begin(), payload.end());
        io::write_file(a.output, std::string(all.begin(), all.end()));
    }
    return 0;
}

struct MultiArgs {
    int q = 2, k = 3, gamma = 2, Q = 0;
    std::string workload = "wordcount";
    std::string input, report, transcript, loads_csv;
    std::uint64_t seed = 1, tokens = 64;
    int m = 120, n = 6;
    std::uint64_t header_bytes = 0;
    bool per_receiver = false, randomized_matching = false;
    bool float_elements = false;
};

int cmd_run_multi(const MultiArgs& a) {
    camr::MultiJobSpec spec;
    spec.params = design::DesignParams{a.q, a.k};
    spec.params.validate();
    spec.Q = a.Q > 0 ? a.Q : spec.params.K();
    spec.gamma = a.gamma;

    const int J = spec.J();
    if (a.workload == "wordcount") {
        spec.workload = std::make_shared<workloads::MultiJobWordCount>(J, spec.N(), spec.Q, a.seed, a.tokens);
    } else if (a.workload == "matvec") {
        spec.gamma = 1;  // files are the k block-columns
        if (a.float_elements) {
            if (!a.input.empty())
                throw ConstraintError("--float-elements only supports synthesized inputs");
            spec.workload = std::make_shared<workloads::MatVecMultiWorkloadF>(
                workloads::generate_matvec_jobs_f64(J, a.m, a.n, a.seed), spec.params);
        } else {
            auto jobs = a.input.empty() ? workloads::generate_matvec_jobs(J, a.m, a.n, a.seed)
                                        : load_matvec(a.input);
            spec.workload =
                std::make_shared<workloads::MatVecMultiWorkload>(std::move(jobs), spec.params);
        }
    } else {
        throw ConstraintError("unknown workload: " + a.workload + " (expected wordcount or matvec)");
    }

    camr::RunOptions opt;
    opt.cost.mode = a.per_receiver ? simnet::CostModel::Mode::PerReceiver
                                   : simnet::CostModel::Mode::MulticastOnce;
    opt.cost.header_bytes = a.header_bytes;
    opt.randomized_matching = a.randomized_matching;
    opt.matching_seed = a.seed;
    opt.seed = a.seed;

    camr::MultiJobRun run = camr::run_multi(spec, opt);
    emit(io::dumps(io::run_report(run.meta, run.transcript, run.loads)), a.report);
    if (!a.transcript.empty())
        io::write_file(a.transcript, io::dumps(io::transcript_to_json(run.meta, run.transcript)));
    if (!a.loads_csv.empty()) io::write_file(a.loads_csv, io::loads_to_csv(run.loads));
    return 0;
}

bool verify_check(const std::string& label, bool ok) {
    std::cout << (ok ? "[ ok ] " : "[FAIL] ") << label << "\n";
    return ok;
}

int cmd_verify(int q, int k, int rounds, std::uint64_t seed) {
    design::DesignParams params{q, k};
    params.validate();
    const auto N = params.N();
    auto dsgn = design::build_design(design::build_spc_matrix(params));
    auto groups = design::enumerate_groups(dsgn);
    bool all = true;

    // parallel classes partition the point set
    bool partitions = true;
    for (const auto& cls : dsgn.classes) {
        std::vector<int> seen(N + 1, 0);
        for (int b : cls)
            for (int p : dsgn.block(b)) ++seen[p];
        for (int p = 1; p <= N; ++p) partitions = partitions && seen[p] == 1;
    }
    all &= verify_check("every parallel class partitions [N]", partitions);

    std::uint64_t block_size = checked_pow(q, static_cast<std::uint64_t>(k) - 2);
    bool sizes = true;
    for (const auto& b : dsgn.blocks) sizes = sizes && b.size() == block_size;
    all &= verify_check("all blocks have size q^(k-2)", sizes);

    bool lemma3 = true;
    for (const auto& g : groups)
        for (int l = 1; l <= k; ++l) (void)design::missing_point(dsgn, g, l);  // throws if not 1
    all &= verify_check("k-1 blocks from distinct classes meet in one point", lemma3);

    std::uint64_t expect_groups =
        checked_pow(q, static_cast<std::uint64_t>(k) - 1) * static_cast<std::uint64_t>(q - 1);
    all &= verify_check("group count is q^(k-1)(q-1)", groups.size() == expect_groups);

    std::vector<std::uint64_t> member_counts(params.K() + 1, 0);
    for (const auto& g : groups)
        for (int s : g.members) ++member_counts[s];
    bool memb = true;
    for (int s = 1; s <= params.K(); ++s)
        memb = memb && member_counts[s] == block_size * static_cast<std::uint64_t>(q - 1);
    all &= verify_check("each block joins q^(k-2)(q-1) groups", memb);

    // coded exchange round-trips, canonical and randomized matchings
    SplitMix64 rng(seed);
    bool roundtrip = true, traffic = true;
    for (int it = 0; it < rounds; ++it) {
        std::size_t len = 1 + rng.below(512);
        std::vector<Bytes> chunks(k);
        for (auto& c : chunks) rng.fill(c, len);
        auto matching = it % 2 == 0 ? exchange::canonical_matchings(k)
                                    : exchange::randomized_matchings(k, rng.next());
        auto packets = exchange::encode_round(chunks, matching);
        std::uint64_t bytes = 0;
        for (const auto& p : packets) bytes += p.payload.size();
        traffic = traffic && bytes == static_cast<std::uint64_t>(k) * exchange::packet_length(len, k);
        for (int me = 1; me <= k; ++me) {
            std::vector<exchange::CodedPacket> received;
            for (const auto& p : packets)
                if (p.sender != me) received.push_back(p);
            std::vector<const Bytes*> locals(k, nullptr);
            for (int j = 1; j <= k; ++j)
                if (j != me) locals[j - 1] = &chunks[j - 1];
            Bytes got = exchange::decode_round(received, locals, me, len, len, matching);
            roundtrip = roundtrip && got == chunks[me - 1];
        }
    }
    all &= verify_check("coded exchange round-trip recovers every chunk", roundtrip);
    all &= verify_check("per-round traffic is k*ceil(B/(k-1))", traffic);

    std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES\n");
    return all ? 0 : 3;
}

int cmd_report(const std::string& transcript_path, const std::string& format, const std::string& out) {
    auto [meta, transcript] = io::transcript_from_json(io::json::parse(io::read_file(transcript_path)));
    analysis::SchemeComparison cmp = analysis::reconcile(meta, transcript);
    if (format == "json")
        emit(io::dumps(io::comparison_to_json(cmp)), out);
    else if (format == "csv")
        emit(analysis::comparison_to_csv(cmp), out);
    else
        emit(analysis::comparison_to_markdown(cmp), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coded shuffle simulator: resolvable-design placement, XOR multicast shuffle, "
                 "byte-exact load accounting"};
    app.require_subcommand(1);

    // gen-design
    auto* gd = app.add_subcommand("gen-design", "construct the design and its shuffle groups");
    int gd_q = 2, gd_k = 3;
    std::string gd_out;
    gd->add_option("--q", gd_q, "alphabet size")->envname("CSH_Q");
    gd->add_option("--k", gd_k, "code length")->envname("CSH_K");
    gd->add_option("--out", gd_out, "output path (stdout if omitted)");

    // gen-data
    auto* gdata = app.add_subcommand("gen-data", "generate deterministic input data");
    std::string gdata_mode = "sort", gdata_out = "data.bin";
    std::uint64_t gdata_records = 100000, gdata_seed = 1;
    int gdata_jobs = 4, gdata_m = 120, gdata_n = 6;
    gdata->add_option("--mode", gdata_mode, "sort | matvec")->check(CLI::IsMember({"sort", "matvec"}));
    gdata->add_option("--records", gdata_records, "100-byte records to generate");
    gdata->add_option("--seed", gdata_seed, "generator seed")->envname("CSH_SEED");
    gdata->add_option("--out", gdata_out, "output path (matvec: base name for .bin/.json)");
    gdata->add_option("--jobs", gdata_jobs, "matvec job count");
    gdata->add_option("--m", gdata_m, "matvec rows");
    gdata->add_option("--n", gdata_n, "matvec columns per job");

    // run-single
    auto* rs = app.add_subcommand("run-single", "single-job protocol run with load accounting");
    SingleArgs sa;
    rs->add_option("--q", sa.q)->envname("CSH_Q");
    rs->add_option("--k", sa.k)->envname("CSH_K");
    rs->add_option("--Q", sa.Q, "output functions (default K)");
    rs->add_option("--workload", sa.workload, "sort | wordcount")
        ->check(CLI::IsMember({"sort", "wordcount"}));
    rs->add_option("--scheme", sa.scheme, "proposed | uncoded")
        ->check(CLI::IsMember({"proposed", "uncoded"}));
    rs->add_option("--r", sa.r, "uncoded replication factor");
    rs->add_option("--input", sa.input, "input file (synthesized from --seed if omitted)");
    rs->add_option("--records", sa.records, "synthetic record count for sort");
    rs->add_option("--tokens", sa.tokens, "synthetic token count for wordcount");
    rs->add_option("--seed", sa.seed)->envname("CSH_SEED");
    rs->add_option("--report", sa.report, "report JSON path (stdout if omitted)");
    rs->add_option("--transcript", sa.transcript, "full transcript JSON path");
    rs->add_option("--output", sa.output, "write concatenated reduce outputs");
    rs->add_option("--header-bytes", sa.header_bytes, "per-transmission header overhead");
    rs->add_flag("--per-receiver-accounting", sa.per_receiver,
                 "charge each coded packet once per receiver");
    rs->add_flag("--concat-rounds", sa.concat_rounds, "concatenate Q/K values into one round per group");
    rs->add_flag("--randomized-matching", sa.randomized_matching, "use seeded random packet matchings");
    rs->add_flag("--sampled-splitters", sa.sampled_splitters,
                 "derive sort splitters from input quantiles instead of equal key-space widths");

    // run-multi
    auto* rm = app.add_subcommand("run-multi", "aggregated multi-job protocol run");
    MultiArgs ma;
    rm->add_option("--q", ma.q)->envname("CSH_Q");
    rm->add_option("--k", ma.k)->envname("CSH_K");
    rm->add_option("--gamma", ma.gamma, "files per batch");
    rm->add_option("--Q", ma.Q, "functions per job (default K)");
    rm->add_option("--workload", ma.workload, "wordcount | matvec")
        ->check(CLI::IsMember({"wordcount", "matvec"}));
    rm->add_option("--input", ma.input, "matvec input base path (see gen-data --mode matvec)");
    rm->add_option("--m", ma.m, "synthetic matvec rows");
    rm->add_option("--n", ma.n, "synthetic matvec columns");
    rm->add_option("--tokens", ma.tokens, "tokens per wordcount file");
    rm->add_option("--seed", ma.seed)->envname("CSH_SEED");
    rm->add_option("--report", ma.report, "report JSON path (stdout if omitted)");
    rm->add_option("--transcript", ma.transcript, "full transcript JSON path");
    rm->add_option("--loads-csv", ma.loads_csv, "per-stage loads as CSV");
    rm->add_option("--header-bytes", ma.header_bytes);
    rm->add_flag("--per-receiver-accounting", ma.per_receiver);
    rm->add_flag("--randomized-matching", ma.randomized_matching);
    rm->add_flag("--float-elements", ma.float_elements,
                 "synthesize IEEE double matvec entries instead of 64-bit integers");

    // verify
    auto* vf = app.add_subcommand("verify", "run the design and exchange property suites");
    int vf_q = 3, vf_k = 3, vf_rounds = 50;
    std::uint64_t vf_seed = 1;
    vf->add_option("--q", vf_q)->envname("CSH_Q");
    vf->add_option("--k", vf_k)->envname("CSH_K");
    vf->add_option("--rounds", vf_rounds, "randomized exchange rounds");
    vf->add_option("--seed", vf_seed)->envname("CSH_SEED");

    // report
    auto* rp = app.add_subcommand("report", "comparison table from a transcript JSON");
    std::string rp_transcript, rp_format = "markdown", rp_out;
    rp->add_option("--transcript", rp_transcript, "transcript JSON path")->required();
    rp->add_option("--format", rp_format, "markdown | csv | json")
        ->check(CLI::IsMember({"markdown", "csv", "json"}));
    rp->add_option("--out", rp_out, "output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
        if (gd->parsed()) return cmd_gen_design(gd_q, gd_k, gd_out);
        if (gdata->parsed())
            return gdata_mode == "matvec"
                       ? cmd_gen_data_matvec(gdata_jobs, gdata_m, gdata_n, gdata_seed, gdata_out)
                       : cmd_gen_data_sort(gdata_records, gdata_seed, gdata_out);
        if (rs->parsed()) return cmd_run_single(sa);
        if (rm->parsed()) return cmd_run_multi(ma);
        if (vf->parsed()) return cmd_verify(vf_q, vf_k, vf_rounds, vf_seed);
        if (rp->parsed()) return cmd_report(rp_transcript, rp_format, rp_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" ? 0 : 1;
    } catch (const ConstraintError& e) {
        std::cerr << "constraint violation: " << e.what() << "\n";
        return 2;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

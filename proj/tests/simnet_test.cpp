#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "csh/errors.hpp"
#include "csh/json_io.hpp"
#include "csh/pipeline.hpp"
#include "csh/workloads.hpp"

using namespace csh;
using namespace csh::simnet;

namespace {

singlejob::SingleJobSpec small_spec(std::uint64_t seed = 3) {
    singlejob::SingleJobSpec spec;
    spec.params = design::DesignParams{2, 3};
    spec.Q = 6;
    spec.workload = std::make_shared<workloads::WordCountWorkload>(6);
    spec.data = workloads::generate_word_text(500, 6, seed);
    return spec;
}

}  // namespace

TEST_CASE("bus delivery conserves every transmitted byte") {
    Cluster cluster(4);
    Bytes payload = {1, 2, 3, 4, 5};
    int receivers[2] = {2, 4};
    cluster.send(1, receivers, payload, "single", 7, 1, 1, Rational(0));

    REQUIRE(cluster.transcript().entries.size() == 1);
    const auto& e = cluster.transcript().entries[0];
    CHECK(e.payload_bytes == 5);
    CHECK(e.receivers == std::vector<int>{2, 4});
    CHECK(cluster.worker(2).inbox.size() == 1);
    CHECK(cluster.worker(4).inbox.size() == 1);
    CHECK(cluster.worker(2).inbox[0].payload == payload);
    CHECK(cluster.worker(3).inbox.empty());
    CHECK(cluster.transcript().phase_totals.at("Shuffle") == 5);

    CHECK_THROWS_AS(cluster.send(0, receivers, payload, "single", 0, 0, 0, Rational(0)),
                    ConstraintError);
    int bad[1] = {9};
    CHECK_THROWS_AS(cluster.send(1, bad, payload, "single", 0, 0, 0, Rational(0)), ConstraintError);
}

TEST_CASE("cost models charge multicasts once or per receiver, plus headers") {
    TransmitEntry e;
    e.payload_bytes = 100;
    e.receivers = {2, 3, 4};

    CostModel once;
    CHECK(e.charged_bytes(once) == 100);
    CostModel per{CostModel::Mode::PerReceiver, 0};
    CHECK(e.charged_bytes(per) == 300);
    CostModel header{CostModel::Mode::MulticastOnce, 40};
    CHECK(e.charged_bytes(header) == 140);
    CostModel both{CostModel::Mode::PerReceiver, 40};
    CHECK(e.charged_bytes(both) == 420);
}

TEST_CASE("identical specs and seeds produce byte-identical transcripts") {
    auto run_a = singlejob::run_single_coded(small_spec());
    auto run_b = singlejob::run_single_coded(small_spec());
    CHECK(io::dumps(io::transcript_to_json(run_a.meta, run_a.transcript)) ==
          io::dumps(io::transcript_to_json(run_b.meta, run_b.transcript)));

    camr::MultiJobSpec mspec;
    mspec.params = design::DesignParams{2, 3};
    mspec.gamma = 2;
    mspec.Q = 6;
    mspec.workload = std::make_shared<workloads::MultiJobWordCount>(4, 6, 6, 17);
    auto multi_a = camr::run_multi(mspec);
    auto multi_b = camr::run_multi(mspec);
    CHECK(io::dumps(io::transcript_to_json(multi_a.meta, multi_a.transcript)) ==
          io::dumps(io::transcript_to_json(multi_b.meta, multi_b.transcript)));
}

TEST_CASE("the pipeline conserves bytes between transcript and deliveries") {
    // rerun the coded example and cross-check entry sums against phase totals
    auto run = singlejob::run_single_coded(small_spec());
    std::uint64_t entry_bytes = 0;
    for (const auto& e : run.transcript.entries) entry_bytes += e.payload_bytes;
    CHECK(entry_bytes == run.transcript.payload_bytes());
    CHECK(entry_bytes == run.transcript.phase_totals.at("Shuffle"));
}

TEST_CASE("pipeline dispatcher runs both protocols") {
    SinglePipelineSpec single;
    single.spec = small_spec();
    auto result = run_pipeline(single);
    CHECK(result.meta.scheme == "proposed");
    CHECK(result.reduce_outputs.size() == 6);

    SinglePipelineSpec uncoded = single;
    uncoded.uncoded = true;
    uncoded.r = 3;
    auto uresult = run_pipeline(uncoded);
    CHECK(uresult.meta.scheme == "uncoded-r");
    CHECK(uresult.reduce_outputs == result.reduce_outputs);

    MultiPipelineSpec multi;
    multi.spec.params = design::DesignParams{2, 3};
    multi.spec.gamma = 1;
    multi.spec.Q = 6;
    multi.spec.workload = std::make_shared<workloads::MultiJobWordCount>(4, 3, 6, 23);
    auto mresult = run_pipeline(multi);
    CHECK(mresult.meta.scheme == "camr");
    CHECK(mresult.reduce_outputs.size() == 4u * 6u);
}

TEST_CASE("empty sort input flows through with zero shuffle bytes") {
    singlejob::SingleJobSpec spec;
    spec.params = design::DesignParams{2, 3};
    spec.Q = 6;
    spec.workload = std::make_shared<workloads::SortWorkload>(6);
    spec.data = {};
    auto run = singlejob::run_single_coded(spec);
    CHECK(run.transcript.payload_bytes() == 0);
    for (const auto& [f, out] : run.reduce_outputs) CHECK(out.empty());
}

TEST_CASE("per-receiver accounting doubles the worked example's bytes") {
    auto once = singlejob::run_single_coded(small_spec());
    singlejob::RunOptions opt;
    opt.cost.mode = CostModel::Mode::PerReceiver;
    auto per = singlejob::run_single_coded(small_spec(), opt);
    CHECK(per.transcript.charged_bytes(opt.cost) == 2 * once.transcript.charged_bytes(CostModel{}));
}

TEST_CASE("group count audit reproduces the communicator-limit discussion") {
    auto a = group_count_audit(16, 3, 4);
    CHECK(a.prior_groups == 1820);
    CHECK(a.proposed_groups == 192);
    CHECK_FALSE(a.prior_exceeds_open_mpi);
    CHECK_FALSE(a.proposed_exceeds_mvapich);

    auto b = group_count_audit(50, 10, 5);
    CHECK(b.prior_groups == binomial(50, 11));
    CHECK(b.prior_exceeds_mpich);
    CHECK(b.prior_exceeds_mvapich);
    CHECK(b.prior_exceeds_open_mpi);
    CHECK(b.proposed_groups == 7812500);  // 5^9 * 4
    CHECK_FALSE(b.proposed_exceeds_open_mpi);
    CHECK(b.proposed_exceeds_mpich);

    auto c = group_count_audit(50, 10, 2);  // the (q,k) = (2,25) alternative
    CHECK(c.proposed_groups == 16777216);
    CHECK_FALSE(c.proposed_exceeds_open_mpi);

    CHECK_THROWS_AS(group_count_audit(16, 0, 4), ConstraintError);
    CHECK_THROWS_AS(group_count_audit(16, 3, 5), ConstraintError);
}

TEST_CASE("transcripts survive a JSON round trip") {
    auto run = singlejob::run_single_coded(small_spec());
    auto doc = io::transcript_to_json(run.meta, run.transcript);
    auto [meta, transcript] = io::transcript_from_json(doc);
    CHECK(meta.scheme == run.meta.scheme);
    CHECK(meta.denominator_bits == run.meta.denominator_bits);
    CHECK(transcript.entries.size() == run.transcript.entries.size());
    CHECK(io::dumps(io::transcript_to_json(meta, transcript)) == io::dumps(doc));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "csh/errors.hpp"
#include "csh/workloads.hpp"

using namespace csh;
using namespace csh::workloads;

TEST_CASE("equal-width splitters are the scaled key-space boundaries") {
    auto two = SortWorkload::equal_width_splitters(2);
    REQUIRE(two.size() == 1);
    CHECK(two[0] == Bytes{0x80, 0, 0, 0, 0, 0, 0, 0, 0, 0});

    auto four = SortWorkload::equal_width_splitters(4);
    REQUIRE(four.size() == 3);
    CHECK(four[0] == Bytes{0x40, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(four[1] == Bytes{0x80, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    CHECK(four[2] == Bytes{0xC0, 0, 0, 0, 0, 0, 0, 0, 0, 0});

    // a divisor that does not divide 2^80: floor(2^80 / 3) ends in ...55
    auto three = SortWorkload::equal_width_splitters(3);
    CHECK(three[0] == Bytes{0x55, 0x55, 0x55, 0x55, 0x55, 0x55, 0x55, 0x55, 0x55, 0x55});
    CHECK(three[1] == Bytes{0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA, 0xAA});
}

TEST_CASE("a record below the first splitter lands in bucket one only") {
    SortWorkload sort(4);
    Bytes rec(kRecordBytes, 0);
    rec[0] = 0x01;
    auto result = sort.map_file(rec);
    CHECK(result.values[0] == rec);
    for (int f = 2; f <= 4; ++f) CHECK(result.values[f - 1].empty());
}

TEST_CASE("bucketing is a partition and concatenated sorted buckets equal the oracle") {
    Bytes data = generate_sort_records(500, 42);
    SortWorkload sort(6);
    auto result = sort.map_file(data);

    std::size_t total = 0;
    for (const auto& v : result.values) total += v.size();
    CHECK(total == data.size());

    Bytes glued;
    for (int f = 1; f <= 6; ++f) {
        Bytes bucket_sorted = sort.reduce(f, std::vector<Bytes>{result.values[f - 1]});
        glued.insert(glued.end(), bucket_sorted.begin(), bucket_sorted.end());
    }
    CHECK(glued == SortWorkload::oracle_sort(data));
}

TEST_CASE("uniform keys spread evenly across buckets") {
    const std::size_t n = 20000;
    const int Q = 4;
    Bytes data = generate_sort_records(n, 7);
    SortWorkload sort(Q);
    auto result = sort.map_file(data);
    // binomial concentration: each bucket within 4 sigma of n/Q
    const double mean = static_cast<double>(n) / Q;
    const double sigma = std::sqrt(n * (1.0 / Q) * (1.0 - 1.0 / Q));
    for (const auto& v : result.values) {
        double count = static_cast<double>(v.size()) / kRecordBytes;
        CHECK(std::abs(count - mean) < 4 * sigma);
    }
}

TEST_CASE("malformed record length is rejected") {
    SortWorkload sort(2);
    CHECK_THROWS_AS(sort.map_file(Bytes(55, 0)), ConstraintError);
    CHECK_THROWS_AS(sort.split(Bytes(55, 0), 2), ConstraintError);
    CHECK_THROWS_AS(SortWorkload::oracle_sort(Bytes(101, 0)), ConstraintError);
}

TEST_CASE("record-aligned split covers the data in order") {
    Bytes data = generate_sort_records(11, 3);
    SortWorkload sort(2);
    auto files = sort.split(data, 4);
    Bytes glued;
    for (const auto& f : files) {
        CHECK(f.size() % kRecordBytes == 0);
        glued.insert(glued.end(), f.begin(), f.end());
    }
    CHECK(glued == data);
}

TEST_CASE("word count values are exact 8-byte counts") {
    WordCountWorkload wc(3);
    std::string text = "w001 w002 w001 w003 w001 w002 junk w0010";
    Bytes data(text.begin(), text.end());
    auto result = wc.map_file(data);
    CHECK(get_u64_le(result.values[0]) == 3);
    CHECK(get_u64_le(result.values[1]) == 2);
    CHECK(get_u64_le(result.values[2]) == 1);

    Bytes total = wc.reduce(1, result.values);
    CHECK(get_u64_le(total) == 6);
}

TEST_CASE("token split preserves counts") {
    WordCountWorkload wc(5);
    Bytes data = generate_word_text(997, 5, 123);
    auto whole = wc.map_file(data);
    auto files = wc.split(data, 7);
    for (int f = 1; f <= 5; ++f) {
        std::uint64_t sum = 0;
        for (const auto& file : files) sum += get_u64_le(wc.map_file(file).values[f - 1]);
        CHECK(sum == get_u64_le(whole.values[f - 1]));
    }
}

TEST_CASE("multi-job word count aggregates by summation") {
    MultiJobWordCount wl(4, 6, 6, 9);
    Bytes a, b;
    put_u64_le(a, 5);
    put_u64_le(b, 11);
    CHECK(get_u64_le(wl.aggregate(std::vector<Bytes>{a, b})) == 16);
    CHECK(wl.value_bytes() == 8);
    // payloads are deterministic in (seed, job, file)
    CHECK(wl.file_payload(2, 3) == wl.file_payload(2, 3));
    CHECK(wl.file_payload(2, 3) != wl.file_payload(2, 4));
}

TEST_CASE("identity matrix job multiplies exactly") {
    const int m = 12, n = 12;
    MatVecJob job;
    job.m = m;
    job.n = n;
    job.A.assign(static_cast<std::size_t>(m) * n, 0);
    for (int i = 0; i < m; ++i) job.A[static_cast<std::size_t>(i) * n + i] = 1;
    job.b.assign(n, 0);
    job.b[0] = 1;

    auto c = job.dense_product();
    CHECK(c[0] == 1);
    for (int i = 1; i < m; ++i) CHECK(c[i] == 0);

    auto run = matvec_uncoded({job}, design::DesignParams{2, 3});
    CHECK(run.results[0] == c);
}

TEST_CASE("uncoded matvec: exact results, load k-1, per-server cost J m n / (q k)") {
    design::DesignParams params{2, 3};
    auto jobs = generate_matvec_jobs(4, 12, 6, 77);
    auto run = matvec_uncoded(jobs, params);
    for (int j = 0; j < 4; ++j) CHECK(run.results[j] == jobs[j].dense_product());
    CHECK(run.loads.at(0).normalized_load == Rational(2));  // k - 1
    CHECK(run.ops_per_server == 4ull * (12 / 2) * (6 / 3));
    CHECK_THROWS_AS(matvec_uncoded(generate_matvec_jobs(1, 10, 6, 1), params), ConstraintError);
}

TEST_CASE("camr matvec: exact results, cost overhead k-1, shuffle gain as predicted") {
    design::DesignParams params{2, 3};
    auto jobs = generate_matvec_jobs(4, 12, 6, 88);
    auto coded = matvec_camr(jobs, params);
    auto plain = matvec_uncoded(jobs, params);

    for (int j = 0; j < 4; ++j) {
        CHECK(coded.results[j] == jobs[j].dense_product());
        CHECK(plain.results[j] == jobs[j].dense_product());
    }
    CHECK(coded.ops_per_server == 2 * plain.ops_per_server);  // overhead k-1
    // B is divisible by k-1 here, so the byte ratio is exactly the formula
    CHECK(Rational(static_cast<std::int64_t>(plain.shuffle_payload_bytes),
                   static_cast<std::int64_t>(coded.shuffle_payload_bytes)) == Rational(2));
}

TEST_CASE("matvec workload exposes the reducer row width") {
    design::DesignParams params{2, 3};
    auto jobs = generate_matvec_jobs(4, 12, 6, 5);
    MatVecMultiWorkload wl(jobs, params);
    CHECK(wl.value_bytes() == (12 / 6) * 8);
    CHECK(wl.files_per_job() == 3);
    CHECK(wl.num_functions() == 6);

    auto r = wl.map_file(1, wl.file_payload(1, 1));
    CHECK(r.ops == 12ull * 2);
    CHECK(r.values.size() == 6);

    // block columns tile the matrix: summing the three per-column products
    // over every reducer's slice reproduces the dense product
    std::vector<std::int64_t> sum(12, 0);
    for (int file = 1; file <= 3; ++file) {
        auto part = wl.map_file(1, wl.file_payload(1, file));
        for (int f = 1; f <= 6; ++f)
            for (int row = 0; row < 2; ++row)
                sum[(f - 1) * 2 + row] +=
                    static_cast<std::int64_t>(get_u64_le(part.values[f - 1], row * 8));
    }
    CHECK(sum == jobs[0].dense_product());
}

TEST_CASE("sampled splitters balance a skewed key distribution") {
    // keys concentrated in the low half of the space: equal-width splitters
    // starve the upper buckets, sampled ones stay balanced
    SplitMix64 rng(64);
    Bytes data;
    for (int r = 0; r < 4000; ++r) {
        Bytes rec;
        rng.fill(rec, kRecordBytes);
        rec[0] &= 0x0F;  // skew: first key byte in [0, 16)
        data.insert(data.end(), rec.begin(), rec.end());
    }

    auto splitters = SortWorkload::sampled_splitters(data, 4);
    SortWorkload sampled(4, splitters);
    auto counts = sampled.map_file(data);
    for (const auto& bucket : counts.values) {
        double n = static_cast<double>(bucket.size()) / kRecordBytes;
        // near-even split around 1000 records per bucket
        CHECK(n > 600);
        CHECK(n < 1500);
    }

    // partition-sort identity holds for sampled boundaries too
    Bytes glued;
    for (int f = 1; f <= 4; ++f) {
        Bytes sorted = sampled.reduce(f, std::vector<Bytes>{counts.values[f - 1]});
        glued.insert(glued.end(), sorted.begin(), sorted.end());
    }
    CHECK(glued == SortWorkload::oracle_sort(data));

    CHECK(SortWorkload::sampled_splitters({}, 4) == SortWorkload::equal_width_splitters(4));
}

TEST_CASE("floating-point matvec stays within 1e-9 relative of the dense oracle") {
    design::DesignParams params{2, 3};
    auto jobs = generate_matvec_jobs_f64(4, 12, 6, 404);
    auto coded = matvec_camr_f64(jobs, params);
    auto plain = matvec_uncoded_f64(jobs, params);

    auto close = [](double got, double want) {
        double scale = std::max(1.0, std::abs(want));
        return std::abs(got - want) <= 1e-9 * scale;
    };
    for (int j = 0; j < 4; ++j) {
        auto want = jobs[j].dense_product();
        for (int row = 0; row < 12; ++row) {
            CHECK(close(coded.results[j][row], want[row]));
            CHECK(close(plain.results[j][row], want[row]));
        }
    }
    // cost counters are arithmetic-independent
    CHECK(coded.ops_per_server == 2 * plain.ops_per_server);
}

TEST_CASE("matvec divisibility violations are rejected") {
    CHECK_THROWS_AS(MatVecMultiWorkload(generate_matvec_jobs(4, 10, 6, 1), design::DesignParams{2, 3}),
                    ConstraintError);  // K does not divide m
    CHECK_THROWS_AS(MatVecMultiWorkload(generate_matvec_jobs(4, 12, 7, 1), design::DesignParams{2, 3}),
                    ConstraintError);  // k does not divide n
}

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "csh/bytes.hpp"
#include "csh/design.hpp"
#include "csh/simnet.hpp"

namespace csh::workloads {

struct MapResult {
    std::vector<Bytes> values;  ///< one intermediate value per function, index f-1
    std::uint64_t ops = 0;      ///< workload cost counter (multiply-adds for matvec)
};

/// Q map/reduce function pairs over N files of one data set.
class SingleJobWorkload {
public:
    virtual ~SingleJobWorkload() = default;
    virtual std::string name() const = 0;
    virtual int num_functions() const = 0;
    /// Intermediate value width in bytes; 0 means variable (sort buckets).
    virtual std::size_t fixed_value_bytes() const = 0;
    /// Cut the raw data set into n disjoint files (record/token aligned).
    virtual std::vector<Bytes> split(const Bytes& data, int n_files) const = 0;
    /// All Q intermediate values of one file.
    virtual MapResult map_file(const Bytes& file) const = 0;
    /// Final output of function f from its N intermediate values, file order.
    virtual Bytes reduce(int function, std::span<const Bytes> values) const = 0;
};

/// J jobs, each with N files and Q functions whose values combine under an
/// associative-commutative aggregate of fixed width.
class MultiJobWorkload {
public:
    virtual ~MultiJobWorkload() = default;
    virtual std::string name() const = 0;
    virtual int num_jobs() const = 0;
    virtual int files_per_job() const = 0;
    virtual int num_functions() const = 0;
    virtual std::size_t value_bytes() const = 0;  ///< B, fixed
    virtual Bytes file_payload(int job, int file) const = 0;
    virtual MapResult map_file(int job, const Bytes& file) const = 0;
    /// The combiner alpha; closed over value_bytes()-wide payloads.
    virtual Bytes aggregate(std::span<const Bytes> values) const = 0;
};

// ---------------------------------------------------------------------------
// TeraSort-style key-range sort
// ---------------------------------------------------------------------------

inline constexpr std::size_t kKeyBytes = 10;
inline constexpr std::size_t kRecordBytes = 100;  ///< 10-byte key + 90-byte value

/// Function f collects the records of bucket f; reducing sorts the bucket.
/// Buckets are key ranges under equal-width splitters of the 2^80 key space.
class SortWorkload final : public SingleJobWorkload {
public:
    explicit SortWorkload(int num_buckets);
    SortWorkload(int num_buckets, std::vector<Bytes> splitters);

    std::string name() const override { return "sort"; }
    int num_functions() const override { return buckets_; }
    std::size_t fixed_value_bytes() const override { return 0; }
    std::vector<Bytes> split(const Bytes& data, int n_files) const override;
    MapResult map_file(const Bytes& file) const override;
    Bytes reduce(int function, std::span<const Bytes> values) const override;

    const std::vector<Bytes>& splitters() const { return splitters_; }

    /// floor(i * 2^80 / buckets) for i = 1..buckets-1, 10 bytes big-endian.
    static std::vector<Bytes> equal_width_splitters(int buckets);
    /// Quantile keys sampled from the records themselves; balances buckets
    /// under skewed key distributions. Falls back to equal width on empty
    /// input.
    static std::vector<Bytes> sampled_splitters(const Bytes& records, int buckets);
    /// Reference sort of a flat record array (lexicographic, key-major).
    static Bytes oracle_sort(const Bytes& records);

private:
    int buckets_;
    std::vector<Bytes> splitters_;
};

/// Deterministic TeraGen-like data: n 100-byte records with random keys.
Bytes generate_sort_records(std::size_t n_records, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Word count
// ---------------------------------------------------------------------------

/// Token for vocabulary slot i (1-based), "w001", "w002", ...
std::string vocab_word(int index);

/// Whitespace-separated token stream over vocab_word(1..vocab_size).
Bytes generate_word_text(std::size_t n_tokens, int vocab_size, std::uint64_t seed);

/// Function f counts vocab_word(f); values are 8-byte little-endian counts.
class WordCountWorkload final : public SingleJobWorkload {
public:
    explicit WordCountWorkload(int num_words) : words_(num_words) {}

    std::string name() const override { return "wordcount"; }
    int num_functions() const override { return words_; }
    std::size_t fixed_value_bytes() const override { return 8; }
    std::vector<Bytes> split(const Bytes& data, int n_files) const override;
    MapResult map_file(const Bytes& file) const override;
    Bytes reduce(int function, std::span<const Bytes> values) const override;

private:
    int words_;
};

/// Multi-job word count: job j counts Q words in its own generated corpus.
/// Function f of job j targets vocab slot ((f-1 + j-1) mod vocab) + 1.
class MultiJobWordCount final : public MultiJobWorkload {
public:
    MultiJobWordCount(int jobs, int files_per_job, int functions, std::uint64_t seed,
                      std::size_t tokens_per_file = 64);

    std::string name() const override { return "wordcount"; }
    int num_jobs() const override { return jobs_; }
    int files_per_job() const override { return files_; }
    int num_functions() const override { return functions_; }
    std::size_t value_bytes() const override { return 8; }
    Bytes file_payload(int job, int file) const override;
    MapResult map_file(int job, const Bytes& file) const override;
    Bytes aggregate(std::span<const Bytes> values) const override;

    int target_slot(int job, int function) const;
    int vocab_size() const { return vocab_; }

private:
    int jobs_, files_, functions_, vocab_;
    std::uint64_t seed_;
    std::size_t tokens_per_file_;
};

// ---------------------------------------------------------------------------
// Batched matrix-vector multiplication
// ---------------------------------------------------------------------------

/// One job: c = A * b with A of size m x n. T is int64 (the default, exact)
/// or double (the flag-gated floating-point mode, 1e-9 relative tolerance).
template <typename T>
struct MatVecJobT {
    int m = 0;
    int n = 0;
    std::vector<T> A;  ///< row-major, m*n entries
    std::vector<T> b;  ///< n entries

    std::vector<T> dense_product() const;
};

using MatVecJob = MatVecJobT<std::int64_t>;
using MatVecJobF = MatVecJobT<double>;

std::vector<MatVecJob> generate_matvec_jobs(int jobs, int m, int n, std::uint64_t seed,
                                            std::int64_t lo = -100, std::int64_t hi = 100);
std::vector<MatVecJobF> generate_matvec_jobs_f64(int jobs, int m, int n, std::uint64_t seed,
                                                 double lo = -100.0, double hi = 100.0);

/// CAMR view of J matvec jobs: files are the k block-columns of A (gamma = 1),
/// function f yields the rows of reducer f, aggregate is vector addition.
/// Entries travel as 64-bit little-endian words (two's complement or IEEE).
template <typename T>
class MatVecMultiWorkloadT final : public MultiJobWorkload {
public:
    MatVecMultiWorkloadT(std::vector<MatVecJobT<T>> jobs, design::DesignParams params);

    std::string name() const override { return "matvec"; }
    int num_jobs() const override { return static_cast<int>(jobs_.size()); }
    int files_per_job() const override { return params_.k; }
    int num_functions() const override { return params_.K(); }
    std::size_t value_bytes() const override { return rows_per_reducer_ * 8; }
    Bytes file_payload(int job, int file) const override;
    MapResult map_file(int job, const Bytes& file) const override;
    Bytes aggregate(std::span<const Bytes> values) const override;

    const MatVecJobT<T>& job(int j) const { return jobs_[j - 1]; }
    int rows_per_reducer() const { return rows_per_reducer_; }

private:
    std::vector<MatVecJobT<T>> jobs_;
    design::DesignParams params_;
    int rows_per_reducer_;
};

using MatVecMultiWorkload = MatVecMultiWorkloadT<std::int64_t>;
using MatVecMultiWorkloadF = MatVecMultiWorkloadT<double>;

template <typename T>
struct MatVecRunT {
    std::vector<std::vector<T>> results;  ///< c^(j) per job
    std::uint64_t ops_per_server = 0;     ///< multiply-adds, uniform across servers
    std::uint64_t shuffle_payload_bytes = 0;
    simnet::ShuffleTranscript transcript;
    std::vector<simnet::LoadReport> loads;
};

using MatVecRun = MatVecRunT<std::int64_t>;
using MatVecRunF = MatVecRunT<double>;

/// Baseline: each server owns one of the q x k grid blocks of every A^(j),
/// reducers collect k-1 row-segment partials per job by unicast.
MatVecRun matvec_uncoded(const std::vector<MatVecJob>& jobs, const design::DesignParams& params,
                         const simnet::CostModel& cost = {});
MatVecRunF matvec_uncoded_f64(const std::vector<MatVecJobF>& jobs, const design::DesignParams& params,
                              const simnet::CostModel& cost = {});

/// The aggregated multi-job protocol applied to the same jobs.
MatVecRun matvec_camr(const std::vector<MatVecJob>& jobs, const design::DesignParams& params,
                      const simnet::CostModel& cost = {});
MatVecRunF matvec_camr_f64(const std::vector<MatVecJobF>& jobs, const design::DesignParams& params,
                           const simnet::CostModel& cost = {});

}  // namespace csh::workloads

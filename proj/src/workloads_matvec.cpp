#include <algorithm>
#include <bit>
#include <string>

#include "csh/camr.hpp"
#include "csh/errors.hpp"
#include "csh/workloads.hpp"

namespace csh::workloads {

namespace {

template <typename T>
void put_scalar(Bytes& out, T v);
template <>
void put_scalar<std::int64_t>(Bytes& out, std::int64_t v) {
    put_u64_le(out, static_cast<std::uint64_t>(v));
}
template <>
void put_scalar<double>(Bytes& out, double v) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

template <typename T>
T get_scalar(const Bytes& in, std::size_t index);
template <>
std::int64_t get_scalar<std::int64_t>(const Bytes& in, std::size_t index) {
    return static_cast<std::int64_t>(get_u64_le(in, index * 8));
}
template <>
double get_scalar<double>(const Bytes& in, std::size_t index) {
    return std::bit_cast<double>(get_u64_le(in, index * 8));
}

template <typename T>
Bytes add_vectors(std::span<const Bytes> values) {
    if (values.empty()) throw ConstraintError("aggregate of zero vectors");
    Bytes out = values.front();
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i].size() != out.size()) throw ConstraintError("vector width mismatch in aggregate");
        Bytes sum;
        sum.reserve(out.size());
        for (std::size_t e = 0; e < out.size() / 8; ++e)
            put_scalar<T>(sum, get_scalar<T>(out, e) + get_scalar<T>(values[i], e));
        out = std::move(sum);
    }
    return out;
}

}  // namespace

template <typename T>
std::vector<T> MatVecJobT<T>::dense_product() const {
    std::vector<T> c(m, T{});
    for (int row = 0; row < m; ++row)
        for (int col = 0; col < n; ++col) c[row] += A[static_cast<std::size_t>(row) * n + col] * b[col];
    return c;
}

template struct MatVecJobT<std::int64_t>;
template struct MatVecJobT<double>;

std::vector<MatVecJob> generate_matvec_jobs(int jobs, int m, int n, std::uint64_t seed,
                                            std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) throw ConstraintError("bad entry range");
    SplitMix64 rng(seed);
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    std::vector<MatVecJob> out(jobs);
    for (auto& job : out) {
        job.m = m;
        job.n = n;
        job.A.resize(static_cast<std::size_t>(m) * n);
        job.b.resize(n);
        for (auto& e : job.A) e = lo + static_cast<std::int64_t>(rng.below(span));
        for (auto& e : job.b) e = lo + static_cast<std::int64_t>(rng.below(span));
    }
    return out;
}

std::vector<MatVecJobF> generate_matvec_jobs_f64(int jobs, int m, int n, std::uint64_t seed,
                                                 double lo, double hi) {
    if (hi <= lo) throw ConstraintError("bad entry range");
    SplitMix64 rng(seed);
    auto uniform = [&] { return lo + (hi - lo) * (static_cast<double>(rng.next() >> 11) * 0x1.0p-53); };
    std::vector<MatVecJobF> out(jobs);
    for (auto& job : out) {
        job.m = m;
        job.n = n;
        job.A.resize(static_cast<std::size_t>(m) * n);
        job.b.resize(n);
        for (auto& e : job.A) e = uniform();
        for (auto& e : job.b) e = uniform();
    }
    return out;
}

template <typename T>
MatVecMultiWorkloadT<T>::MatVecMultiWorkloadT(std::vector<MatVecJobT<T>> jobs, design::DesignParams params)
    : jobs_(std::move(jobs)), params_(params) {
    params_.validate();
    if (jobs_.empty()) throw ConstraintError("no matvec jobs");
    const int m = jobs_.front().m, n = jobs_.front().n;
    for (const auto& j : jobs_)
        if (j.m != m || j.n != n || static_cast<int>(j.A.size()) != m * n ||
            static_cast<int>(j.b.size()) != n)
            throw ConstraintError("matvec jobs must share dimensions");
    if (m % params_.K() != 0) throw ConstraintError("K must divide m");
    if (n % params_.k != 0) throw ConstraintError("k must divide n");
    if (m % params_.q != 0) throw ConstraintError("q must divide m");
    rows_per_reducer_ = m / params_.K();
}

// File `c` of job j is block-column c of A^(j) plus the matching slice of b.
template <typename T>
Bytes MatVecMultiWorkloadT<T>::file_payload(int job, int file) const {
    const MatVecJobT<T>& J = jobs_[job - 1];
    const int cols = J.n / params_.k;
    const int col0 = (file - 1) * cols;
    Bytes out;
    out.reserve(static_cast<std::size_t>(J.m + 1) * cols * 8);
    for (int row = 0; row < J.m; ++row)
        for (int c = 0; c < cols; ++c) put_scalar<T>(out, J.A[static_cast<std::size_t>(row) * J.n + col0 + c]);
    for (int c = 0; c < cols; ++c) put_scalar<T>(out, J.b[col0 + c]);
    return out;
}

template <typename T>
MapResult MatVecMultiWorkloadT<T>::map_file(int job, const Bytes& file) const {
    const MatVecJobT<T>& J = jobs_[job - 1];
    const int cols = J.n / params_.k;
    if (file.size() != static_cast<std::size_t>(J.m + 1) * cols * 8)
        throw ConstraintError("matvec file payload has the wrong size");

    // y = A_c * b_c computed once; function f gets its reducer's row range.
    std::vector<T> y(J.m, T{});
    for (int row = 0; row < J.m; ++row)
        for (int c = 0; c < cols; ++c)
            y[row] += get_scalar<T>(file, static_cast<std::size_t>(row) * cols + c) *
                      get_scalar<T>(file, static_cast<std::size_t>(J.m) * cols + c);

    MapResult out;
    out.ops = static_cast<std::uint64_t>(J.m) * cols;
    out.values.reserve(params_.K());
    for (int f = 1; f <= params_.K(); ++f) {
        Bytes v;
        v.reserve(static_cast<std::size_t>(rows_per_reducer_) * 8);
        for (int row = (f - 1) * rows_per_reducer_; row < f * rows_per_reducer_; ++row)
            put_scalar<T>(v, y[row]);
        out.values.push_back(std::move(v));
    }
    return out;
}

template <typename T>
Bytes MatVecMultiWorkloadT<T>::aggregate(std::span<const Bytes> values) const {
    return add_vectors<T>(values);
}

template class MatVecMultiWorkloadT<std::int64_t>;
template class MatVecMultiWorkloadT<double>;

namespace {

template <typename T>
MatVecRunT<T> matvec_uncoded_impl(const std::vector<MatVecJobT<T>>& jobs,
                                  const design::DesignParams& params, const simnet::CostModel& cost) {
    params.validate();
    const int q = params.q, k = params.k, K = params.K();
    const int J = static_cast<int>(jobs.size());
    if (jobs.empty()) throw ConstraintError("no matvec jobs");
    const int m = jobs.front().m, n = jobs.front().n;
    if (m % K != 0 || n % k != 0 || m % q != 0)
        throw ConstraintError("matvec uncoded needs K|m, k|n, q|m");
    const int rows_per_reducer = m / K;
    const int block_rows = m / q, block_cols = n / k;

    // Server s maps grid block (row (s-1)/k + 1, column (s-1)%k + 1); its
    // reduce rows fall inside its own block-row, so it needs the k-1 partials
    // of the other servers mapping that block-row.
    simnet::Cluster cluster(K);
    std::vector<std::vector<std::vector<T>>> partial(J, std::vector<std::vector<T>>(K));
    for (int s = 1; s <= K; ++s) {
        const int grow = (s - 1) / k, gcol = (s - 1) % k;
        auto& w = cluster.worker(s);
        for (int j = 1; j <= J; ++j) {
            const MatVecJobT<T>& job = jobs[j - 1];
            std::vector<T> y(block_rows, T{});
            for (int row = 0; row < block_rows; ++row)
                for (int c = 0; c < block_cols; ++c)
                    y[row] += job.A[static_cast<std::size_t>(grow * block_rows + row) * n +
                                    gcol * block_cols + c] *
                              job.b[gcol * block_cols + c];
            partial[j - 1][s - 1] = std::move(y);
            w.map_ops += static_cast<std::uint64_t>(block_rows) * block_cols;
            cluster.add_phase_bytes("Map", static_cast<std::uint64_t>(block_rows) * 8);
        }
    }

    std::uint64_t round_id = 0;
    for (int j = 1; j <= J; ++j)
        for (int t = 1; t <= K; ++t) {
            ++round_id;
            const int trow = (t - 1) / k;
            for (int s = trow * k + 1; s <= (trow + 1) * k; ++s) {
                if (s == t) continue;
                // rows of reducer t inside block-row trow
                const int local0 = (t - 1) * rows_per_reducer - trow * block_rows;
                Bytes payload;
                for (int row = local0; row < local0 + rows_per_reducer; ++row)
                    put_scalar<T>(payload, partial[j - 1][s - 1][row]);
                int rcv[1] = {t};
                cluster.send(s, rcv, payload, "uncoded", j, 0, round_id, Rational(0));
            }
        }

    MatVecRunT<T> run;
    run.results.assign(J, std::vector<T>(m, T{}));
    for (int j = 1; j <= J; ++j)
        for (int t = 1; t <= K; ++t) {
            const int trow = (t - 1) / k;
            const int local0 = (t - 1) * rows_per_reducer - trow * block_rows;
            for (int row = 0; row < rows_per_reducer; ++row)
                run.results[j - 1][(t - 1) * rows_per_reducer + row] = partial[j - 1][t - 1][local0 + row];
        }
    for (int t = 1; t <= K; ++t)
        for (const auto& msg : cluster.worker(t).inbox) {
            const int j = static_cast<int>(msg.group_id);
            for (int row = 0; row < rows_per_reducer; ++row)
                run.results[j - 1][(t - 1) * rows_per_reducer + row] += get_scalar<T>(msg.payload, row);
        }

    run.ops_per_server = static_cast<std::uint64_t>(J) * block_rows * block_cols;
    run.transcript = cluster.transcript();
    run.shuffle_payload_bytes = run.transcript.payload_bytes();

    simnet::LoadReport rep;
    rep.scheme = "matvec-uncoded";
    rep.total_bits = run.transcript.charged_bytes(cost) * 8;
    rep.denominator_bits =
        Rational(static_cast<std::int64_t>(J) * K * rows_per_reducer * 8 * 8);  // J*Q*B, Q=K
    rep.normalized_load = Rational(static_cast<std::int64_t>(rep.total_bits)) / rep.denominator_bits;
    rep.adjusted_load = rep.normalized_load;
    rep.predicted_load = Rational(k - 1);
    rep.has_prediction = true;
    run.loads.push_back(rep);
    return run;
}

template <typename T>
MatVecRunT<T> matvec_camr_impl(const std::vector<MatVecJobT<T>>& jobs,
                               const design::DesignParams& params, const simnet::CostModel& cost) {
    params.validate();
    if (static_cast<std::int64_t>(jobs.size()) != params.N())
        throw ConstraintError("CAMR matvec needs J = q^(k-1) jobs");

    camr::MultiJobSpec spec;
    spec.params = params;
    spec.gamma = 1;  // one block-column per batch
    spec.Q = params.K();
    auto workload = std::make_shared<MatVecMultiWorkloadT<T>>(jobs, params);
    spec.workload = workload;

    camr::RunOptions opt;
    opt.cost = cost;
    camr::MultiJobRun multi = camr::run_multi(spec, opt);

    MatVecRunT<T> run;
    const int m = jobs.front().m, K = params.K();
    const int rows = workload->rows_per_reducer();
    run.results.assign(jobs.size(), std::vector<T>(m, T{}));
    for (int j = 1; j <= static_cast<int>(jobs.size()); ++j)
        for (int f = 1; f <= K; ++f) {
            const Bytes& v = multi.reduce_outputs.at(simnet::ValueKey{j, f, 0});
            for (int row = 0; row < rows; ++row)
                run.results[j - 1][(f - 1) * rows + row] = get_scalar<T>(v, row);
        }
    run.ops_per_server = multi.max_ops_per_server;
    run.transcript = std::move(multi.transcript);
    run.shuffle_payload_bytes = run.transcript.payload_bytes();
    run.loads = std::move(multi.loads);
    return run;
}

}  // namespace

MatVecRun matvec_uncoded(const std::vector<MatVecJob>& jobs, const design::DesignParams& params,
                         const simnet::CostModel& cost) {
    return matvec_uncoded_impl(jobs, params, cost);
}

MatVecRunF matvec_uncoded_f64(const std::vector<MatVecJobF>& jobs, const design::DesignParams& params,
                              const simnet::CostModel& cost) {
    return matvec_uncoded_impl(jobs, params, cost);
}

MatVecRun matvec_camr(const std::vector<MatVecJob>& jobs, const design::DesignParams& params,
                      const simnet::CostModel& cost) {
    return matvec_camr_impl(jobs, params, cost);
}

MatVecRunF matvec_camr_f64(const std::vector<MatVecJobF>& jobs, const design::DesignParams& params,
                           const simnet::CostModel& cost) {
    return matvec_camr_impl(jobs, params, cost);
}

}  // namespace csh::workloads

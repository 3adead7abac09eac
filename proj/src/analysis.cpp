#include "csh/analysis.hpp"

#include <sstream>

#include "csh/errors.hpp"

namespace csh::analysis {

SingleJobFormulas single_job_formulas(const design::DesignParams& params, int r) {
    params.validate();
    const int k = params.k, K = params.K();
    if (r < 1 || r > K) throw ConstraintError("r must be in [1, K]");

    SingleJobFormulas f;
    f.r = r;
    f.proposed = Rational(1, k - 1) * (Rational(1) - Rational(k, K));
    f.uncoded = Rational(1) - Rational(r, K);
    f.cdc = Rational(1, r) * (Rational(1) - Rational(r, K));
    f.files_proposed = checked_pow(params.q, static_cast<std::uint64_t>(k) - 1);
    f.files_cdc = binomial(static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(r));
    return f;
}

MultiJobFormulas multi_job_formulas(const design::DesignParams& params) {
    params.validate();
    const int q = params.q, k = params.k, K = params.K();

    MultiJobFormulas f;
    f.stage1 = Rational(k, static_cast<std::int64_t>(K) * (k - 1));
    f.stage2 = Rational(static_cast<std::int64_t>(q - 1) * k, static_cast<std::int64_t>(K) * (k - 1));
    f.stage3 = Rational(q - 1, q);
    f.camr_total = Rational(static_cast<std::int64_t>(k) * (q - 1) + 1, static_cast<std::int64_t>(q) * (k - 1));
    f.mu = Rational(k - 1, K);
    // (1 - mu)(mu K + 1) / (mu K) at mu K = k - 1
    f.ccdc_at_same_mu = (Rational(1) - f.mu) * Rational(k) / Rational(k - 1);
    f.j_min_camr = checked_pow(q, static_cast<std::uint64_t>(k) - 1);
    f.j_min_ccdc = binomial(static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(k));
    return f;
}

MatVecFormulas matvec_formulas(const design::DesignParams& params) {
    params.validate();
    const int q = params.q, k = params.k;

    MatVecFormulas f;
    f.uncoded_load = Rational(k - 1);
    f.camr_load = multi_job_formulas(params).camr_total;
    f.compute_overhead = Rational(k - 1);
    f.shuffle_gain = Rational(static_cast<std::int64_t>(k - 1) * (k - 1) * q,
                              static_cast<std::int64_t>(k) * (q - 1) + 1);
    return f;
}

FormulaBundle formulas(const design::DesignParams& params, int r) {
    FormulaBundle bundle;
    bundle.single = single_job_formulas(params, r);
    bundle.multi = multi_job_formulas(params);
    bundle.matvec = matvec_formulas(params);
    bundle.group_count = checked_pow(params.q, static_cast<std::uint64_t>(params.k) - 1) *
                         static_cast<std::uint64_t>(params.q - 1);
    return bundle;
}

Rational padding_slack_bound_bytes(int k, std::uint64_t coded_rounds) {
    return Rational(static_cast<std::int64_t>(coded_rounds) * k);
}

namespace {

ComparisonRow measured_row(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& t,
                           const std::string& scheme, const std::string& stage,
                           const Rational& predicted) {
    if (meta.denominator_bits.num() == 0)
        throw ConstraintError("cannot normalize: empty workload produced zero intermediate bits");

    simnet::CostModel cost;
    cost.mode = meta.cost_model == "per-receiver" ? simnet::CostModel::Mode::PerReceiver
                                                  : simnet::CostModel::Mode::MulticastOnce;
    cost.header_bytes = meta.header_bytes;

    ComparisonRow row;
    row.scheme = scheme;
    row.stage = stage;
    row.r_or_k = meta.scheme == "uncoded-r" ? meta.r : meta.k;
    row.q = meta.q;
    row.predicted_load = predicted;
    row.has_measured = true;
    row.measured_bits =
        stage == "total" ? t.charged_bytes(cost) * 8 : t.charged_bytes_for_stage(stage, cost) * 8;

    Rational slack_bits;
    for (const auto& e : t.entries) {
        if (stage != "total" && e.stage != stage) continue;
        Rational copies(cost.mode == simnet::CostModel::Mode::PerReceiver
                            ? static_cast<std::int64_t>(e.receivers.size())
                            : 1);
        slack_bits += e.pad_slack_bytes * Rational(8) * copies;
    }
    row.measured_load = Rational(static_cast<std::int64_t>(row.measured_bits)) / meta.denominator_bits;
    row.adjusted_load =
        (Rational(static_cast<std::int64_t>(row.measured_bits)) - slack_bits) / meta.denominator_bits;
    row.deviation = (row.adjusted_load - predicted).abs();

    const bool pure_accounting = meta.cost_model == "multicast-once" && meta.header_bytes == 0;
    if (!pure_accounting) {
        row.within_slack = true;
        row.note = "cost model differs from the load definition; prediction not comparable";
    } else if (meta.value_bits == 0) {
        row.within_slack = true;
        row.note = "variable-width intermediate values; prediction is a fixed-width formula";
    } else {
        row.within_slack = row.deviation == Rational(0);
    }
    return row;
}

}  // namespace

SchemeComparison reconcile(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& t) {
    design::DesignParams params{meta.q, meta.k};
    SchemeComparison cmp;

    if (meta.protocol == "single") {
        const auto f = single_job_formulas(params, meta.r == 0 ? meta.k : meta.r);
        const std::uint64_t groups = checked_pow(meta.q, static_cast<std::uint64_t>(meta.k) - 1) *
                                     static_cast<std::uint64_t>(meta.q - 1);
        if (meta.scheme == "proposed") {
            ComparisonRow row = measured_row(meta, t, "proposed", "total", f.proposed);
            row.files_or_jobs_required = f.files_proposed;
            row.groups_count = groups;
            cmp.rows.push_back(row);
        } else {
            ComparisonRow row = measured_row(meta, t, "uncoded-r", "total", f.uncoded);
            row.files_or_jobs_required = params.K();
            cmp.rows.push_back(row);
        }
        ComparisonRow cdc;
        cdc.scheme = "cdc";
        cdc.stage = "total";
        cdc.r_or_k = f.r;
        cdc.q = meta.q;
        cdc.predicted_load = f.cdc;
        cdc.files_or_jobs_required = f.files_cdc;
        cdc.groups_count = binomial(static_cast<std::uint64_t>(params.K()),
                                    static_cast<std::uint64_t>(f.r) + 1);
        cdc.note = "prior scheme, prediction only";
        cmp.rows.push_back(cdc);
    } else if (meta.protocol == "multi") {
        const auto f = multi_job_formulas(params);
        const char* stages[] = {"stage1", "stage2", "stage3", "total"};
        const Rational preds[] = {f.stage1, f.stage2, f.stage3, f.camr_total};
        for (int i = 0; i < 4; ++i) {
            ComparisonRow row = measured_row(meta, t, meta.scheme, stages[i], preds[i]);
            row.files_or_jobs_required = f.j_min_camr;
            row.groups_count = checked_pow(meta.q, static_cast<std::uint64_t>(meta.k) - 1) *
                               static_cast<std::uint64_t>(meta.q - 1);
            cmp.rows.push_back(row);
        }
        ComparisonRow ccdc;
        ccdc.scheme = "ccdc";
        ccdc.stage = "total";
        ccdc.r_or_k = meta.k;
        ccdc.q = meta.q;
        ccdc.predicted_load = f.ccdc_at_same_mu;
        ccdc.files_or_jobs_required = f.j_min_ccdc;
        ccdc.note = "prior aggregated scheme, prediction only";
        cmp.rows.push_back(ccdc);
    } else {
        throw ConstraintError("unknown protocol in transcript meta: " + meta.protocol);
    }
    return cmp;
}

namespace {

std::string load_cell(const Rational& r) { return r.str() + " (" + r.decimal(4) + ")"; }

}  // namespace

std::string comparison_to_markdown(const SchemeComparison& cmp) {
    std::ostringstream out;
    out << "| scheme | stage | r/k | q | files-or-jobs | groups | predicted | measured bits | measured | "
           "adjusted | deviation | ok | note |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& row : cmp.rows) {
        out << "| " << row.scheme << " | " << row.stage << " | " << row.r_or_k << " | " << row.q << " | "
            << row.files_or_jobs_required << " | " << row.groups_count << " | "
            << load_cell(row.predicted_load) << " | ";
        if (row.has_measured)
            out << row.measured_bits << " | " << load_cell(row.measured_load) << " | "
                << load_cell(row.adjusted_load) << " | " << row.deviation.str() << " | "
                << (row.within_slack ? "yes" : "NO") << " | ";
        else
            out << "- | - | - | - | - | ";
        out << row.note << " |\n";
    }
    return out.str();
}

std::string comparison_to_csv(const SchemeComparison& cmp) {
    std::ostringstream out;
    out << "scheme,stage,r_or_k,q,files_or_jobs,groups,predicted,measured_bits,measured,adjusted,"
           "deviation,within_slack,note\n";
    for (const auto& row : cmp.rows) {
        out << row.scheme << ',' << row.stage << ',' << row.r_or_k << ',' << row.q << ','
            << row.files_or_jobs_required << ',' << row.groups_count << ',' << row.predicted_load.str()
            << ',';
        if (row.has_measured)
            out << row.measured_bits << ',' << row.measured_load.str() << ',' << row.adjusted_load.str()
                << ',' << row.deviation.str() << ',' << (row.within_slack ? "yes" : "no") << ',';
        else
            out << ",,,,,";
        out << '"' << row.note << '"' << '\n';
    }
    return out.str();
}

}  // namespace csh::analysis

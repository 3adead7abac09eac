#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csh/design.hpp"
#include "csh/rational.hpp"
#include "csh/simnet.hpp"

namespace csh::analysis {

/// Single-job load formulas at computation load r, all exact rationals.
struct SingleJobFormulas {
    int r = 0;
    Rational proposed;  ///< (1/(k-1)) (1 - k/K), at r = k
    Rational uncoded;   ///< 1 - r/K
    Rational cdc;       ///< (1/r) (1 - r/K)
    std::uint64_t files_proposed = 0;  ///< q^(k-1)
    std::uint64_t files_cdc = 0;       ///< C(K, r), eta_1 = 1
};

SingleJobFormulas single_job_formulas(const design::DesignParams& params, int r);

/// Multi-job (aggregated) load and job-count formulas.
struct MultiJobFormulas {
    Rational stage1;  ///< k / (K (k-1))
    Rational stage2;  ///< (q-1) k / (K (k-1))
    Rational stage3;  ///< (q-1) / q
    Rational camr_total;       ///< (k(q-1)+1) / (q(k-1))
    Rational ccdc_at_same_mu;  ///< (1-mu)(mu K + 1) / (mu K) at mu = (k-1)/K
    Rational mu;               ///< (k-1)/K
    std::uint64_t j_min_camr = 0;  ///< q^(k-1)
    std::uint64_t j_min_ccdc = 0;  ///< C(K, mu K + 1) = C(K, k)
};

MultiJobFormulas multi_job_formulas(const design::DesignParams& params);

/// Matvec-specific ratios from the block-partition formulation.
struct MatVecFormulas {
    Rational uncoded_load;         ///< k - 1
    Rational camr_load;            ///< same as camr_total
    Rational compute_overhead;     ///< M_camr / M_uncoded = k - 1
    Rational shuffle_gain;         ///< (k-1)^2 q / (k(q-1)+1)
};

MatVecFormulas matvec_formulas(const design::DesignParams& params);

/// Everything in one bundle, the `formulas` operation.
struct FormulaBundle {
    SingleJobFormulas single;
    MultiJobFormulas multi;
    MatVecFormulas matvec;
    std::uint64_t group_count = 0;  ///< q^(k-1)(q-1)
};

FormulaBundle formulas(const design::DesignParams& params, int r);

/// One scheme (or stage) in a measured-vs-predicted comparison table.
struct ComparisonRow {
    std::string scheme;
    std::string stage = "total";
    int r_or_k = 0;
    int q = 0;
    std::uint64_t files_or_jobs_required = 0;
    std::uint64_t groups_count = 0;
    Rational predicted_load;
    bool has_measured = false;
    std::uint64_t measured_bits = 0;
    Rational measured_load;
    Rational adjusted_load;  ///< measured minus padding slack
    Rational deviation;      ///< |adjusted - predicted|
    bool within_slack = true;
    std::string note;
};

struct SchemeComparison {
    std::vector<ComparisonRow> rows;
};

/// Join measured byte counts with the closed-form predictions. Deviations
/// beyond the padding-slack bound (or any deviation after slack subtraction
/// on fixed-width runs) are flagged via within_slack = false.
SchemeComparison reconcile(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& transcript);

/// Upper bound on total padding bytes of a coded shuffle: every coded packet
/// wastes under one byte, k packets per round.
Rational padding_slack_bound_bytes(int k, std::uint64_t coded_rounds);

std::string comparison_to_markdown(const SchemeComparison& cmp);
std::string comparison_to_csv(const SchemeComparison& cmp);

}  // namespace csh::analysis

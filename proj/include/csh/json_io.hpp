#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csh/analysis.hpp"
#include "csh/design.hpp"
#include "csh/simnet.hpp"

namespace csh::io {

using nlohmann::json;

/// {q, k, blocks, classes, groups}, the gen-design schema.
json design_to_json(const design::ResolvableDesign& dsgn, const std::vector<design::ServerGroup>& groups);

/// {meta, entries, totals}, the transcript schema.
json transcript_to_json(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& transcript);
std::pair<simnet::RunMeta, simnet::ShuffleTranscript> transcript_from_json(const json& doc);

json loads_to_json(const std::vector<simnet::LoadReport>& loads);
std::string loads_to_csv(const std::vector<simnet::LoadReport>& loads);

json comparison_to_json(const analysis::SchemeComparison& cmp);

/// Run report: meta + per-phase byte counts + loads + transcript summary +
/// the measured-vs-predicted comparison.
json run_report(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& transcript,
                const std::vector<simnet::LoadReport>& loads);

/// dump(2) with a trailing newline; object keys are emitted sorted, so the
/// bytes are stable across runs.
std::string dumps(const json& doc);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

}  // namespace csh::io

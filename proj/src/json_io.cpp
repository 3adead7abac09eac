#include "csh/json_io.hpp"

#include <fstream>
#include <sstream>

#include "csh/errors.hpp"

namespace csh::io {

std::string rational_to_string(const Rational& r) { return r.str(); }

Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

json design_to_json(const design::ResolvableDesign& dsgn, const std::vector<design::ServerGroup>& groups) {
    json doc;
    doc["q"] = dsgn.params.q;
    doc["k"] = dsgn.params.k;
    doc["blocks"] = dsgn.blocks;
    doc["classes"] = dsgn.classes;
    json gs = json::array();
    for (const auto& g : groups) gs.push_back(g.members);
    doc["groups"] = gs;
    return doc;
}

namespace {

json meta_to_json(const simnet::RunMeta& meta) {
    json m;
    m["protocol"] = meta.protocol;
    m["scheme"] = meta.scheme;
    m["workload"] = meta.workload;
    m["q"] = meta.q;
    m["k"] = meta.k;
    m["Q"] = meta.Q;
    m["J"] = meta.J;
    m["gamma"] = meta.gamma;
    m["r"] = meta.r;
    m["seed"] = meta.seed;
    m["cost_model"] = meta.cost_model;
    m["header_bytes"] = meta.header_bytes;
    m["value_bits"] = meta.value_bits;
    m["denominator_bits"] = rational_to_string(meta.denominator_bits);
    return m;
}

simnet::RunMeta meta_from_json(const json& m) {
    simnet::RunMeta meta;
    meta.protocol = m.at("protocol").get<std::string>();
    meta.scheme = m.at("scheme").get<std::string>();
    meta.workload = m.at("workload").get<std::string>();
    meta.q = m.at("q").get<int>();
    meta.k = m.at("k").get<int>();
    meta.Q = m.at("Q").get<int>();
    meta.J = m.at("J").get<int>();
    meta.gamma = m.at("gamma").get<int>();
    meta.r = m.at("r").get<int>();
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.cost_model = m.at("cost_model").get<std::string>();
    meta.header_bytes = m.at("header_bytes").get<std::uint64_t>();
    meta.value_bits = m.at("value_bits").get<std::uint64_t>();
    meta.denominator_bits = rational_from_string(m.at("denominator_bits").get<std::string>());
    return meta;
}

}  // namespace

json transcript_to_json(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& transcript) {
    json doc;
    doc["meta"] = meta_to_json(meta);

    json entries = json::array();
    for (const auto& e : transcript.entries) {
        json je;
        je["round"] = e.round_id;
        je["stage"] = e.stage;
        je["sender"] = e.sender;
        je["receivers"] = e.receivers;
        je["bytes"] = e.payload_bytes;
        je["group"] = e.group_id;
        je["gamma"] = e.gamma;
        je["pad_slack"] = rational_to_string(e.pad_slack_bytes);
        entries.push_back(je);
    }
    doc["entries"] = entries;

    json totals;
    totals["payload_bytes"] = transcript.payload_bytes();
    totals["pad_slack_bytes"] = rational_to_string(transcript.pad_slack_bytes());
    totals["phases"] = transcript.phase_totals;
    json stages = json::object();
    simnet::CostModel plain;
    for (const auto& e : transcript.entries) {
        if (!stages.contains(e.stage)) stages[e.stage] = 0;
        stages[e.stage] = stages[e.stage].get<std::uint64_t>() + e.payload_bytes;
    }
    totals["stage_payload_bytes"] = stages;
    totals["charged_bytes_multicast_once"] = transcript.charged_bytes(plain);
    doc["totals"] = totals;
    return doc;
}

std::pair<simnet::RunMeta, simnet::ShuffleTranscript> transcript_from_json(const json& doc) {
    simnet::RunMeta meta = meta_from_json(doc.at("meta"));
    simnet::ShuffleTranscript t;
    for (const auto& je : doc.at("entries")) {
        simnet::TransmitEntry e;
        e.round_id = je.at("round").get<std::uint64_t>();
        e.stage = je.at("stage").get<std::string>();
        e.sender = je.at("sender").get<int>();
        e.receivers = je.at("receivers").get<std::vector<int>>();
        e.payload_bytes = je.at("bytes").get<std::uint64_t>();
        e.group_id = je.at("group").get<std::int64_t>();
        e.gamma = je.at("gamma").get<int>();
        e.pad_slack_bytes = rational_from_string(je.at("pad_slack").get<std::string>());
        t.entries.push_back(std::move(e));
    }
    if (doc.at("totals").contains("phases"))
        t.phase_totals = doc.at("totals").at("phases").get<std::map<std::string, std::uint64_t>>();
    return {meta, t};
}

json loads_to_json(const std::vector<simnet::LoadReport>& loads) {
    json arr = json::array();
    for (const auto& rep : loads) {
        json jr;
        jr["scheme"] = rep.scheme;
        jr["stage"] = rep.stage;
        jr["total_bits"] = rep.total_bits;
        jr["denominator_bits"] = rational_to_string(rep.denominator_bits);
        jr["normalized_load"] = rational_to_string(rep.normalized_load);
        jr["normalized_load_decimal"] = rep.normalized_load.decimal(4);
        jr["adjusted_load"] = rational_to_string(rep.adjusted_load);
        if (rep.has_prediction) {
            jr["predicted_load"] = rational_to_string(rep.predicted_load);
            jr["predicted_load_decimal"] = rep.predicted_load.decimal(4);
        }
        arr.push_back(jr);
    }
    return arr;
}

std::string loads_to_csv(const std::vector<simnet::LoadReport>& loads) {
    std::ostringstream out;
    out << "scheme,stage,total_bits,normalized_load,adjusted_load,predicted_load\n";
    for (const auto& rep : loads) {
        out << rep.scheme << ',' << rep.stage << ',' << rep.total_bits << ','
            << rep.normalized_load.str() << ',' << rep.adjusted_load.str() << ','
            << (rep.has_prediction ? rep.predicted_load.str() : std::string()) << '\n';
    }
    return out.str();
}

json comparison_to_json(const analysis::SchemeComparison& cmp) {
    json arr = json::array();
    for (const auto& row : cmp.rows) {
        json jr;
        jr["scheme"] = row.scheme;
        jr["stage"] = row.stage;
        jr["r_or_k"] = row.r_or_k;
        jr["q"] = row.q;
        jr["files_or_jobs_required"] = row.files_or_jobs_required;
        jr["groups_count"] = row.groups_count;
        jr["predicted_load"] = rational_to_string(row.predicted_load);
        jr["predicted_load_decimal"] = row.predicted_load.decimal(4);
        if (row.has_measured) {
            jr["measured_bits"] = row.measured_bits;
            jr["measured_load"] = rational_to_string(row.measured_load);
            jr["measured_load_decimal"] = row.measured_load.decimal(4);
            jr["adjusted_load"] = rational_to_string(row.adjusted_load);
            jr["deviation"] = rational_to_string(row.deviation);
            jr["within_slack"] = row.within_slack;
        }
        if (!row.note.empty()) jr["note"] = row.note;
        arr.push_back(jr);
    }
    return arr;
}

json run_report(const simnet::RunMeta& meta, const simnet::ShuffleTranscript& transcript,
                const std::vector<simnet::LoadReport>& loads) {
    json doc;
    doc["meta"] = meta_to_json(meta);
    doc["phases"] = transcript.phase_totals;
    doc["loads"] = loads_to_json(loads);

    json summary;
    summary["entries"] = transcript.entries.size();
    summary["payload_bytes"] = transcript.payload_bytes();
    summary["pad_slack_bytes"] = rational_to_string(transcript.pad_slack_bytes());
    doc["transcript_summary"] = summary;

    doc["comparison"] = comparison_to_json(analysis::reconcile(meta, transcript));
    return doc;
}

std::string dumps(const json& doc) { return doc.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConstraintError("cannot open for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ConstraintError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConstraintError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace csh::io

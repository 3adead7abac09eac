#pragma once

#include <variant>

#include "csh/camr.hpp"
#include "csh/singlejob.hpp"

namespace csh::simnet {

/// Outcome of a full six-phase pipeline run, protocol-agnostic.
struct PipelineResult {
    RunMeta meta;
    ShuffleTranscript transcript;
    std::vector<LoadReport> loads;
    std::map<ValueKey, Bytes> reduce_outputs;  ///< (job, function) keyed; job 0 for single
};

struct SinglePipelineSpec {
    singlejob::SingleJobSpec spec;
    singlejob::RunOptions options;
    bool uncoded = false;
    int r = 1;  ///< replication for the uncoded baseline
};

struct MultiPipelineSpec {
    camr::MultiJobSpec spec;
    camr::RunOptions options;
};

using PipelineSpec = std::variant<SinglePipelineSpec, MultiPipelineSpec>;

/// CodeGen -> Map -> Pack/Encode -> Shuffle -> Unpack/Decode -> Reduce with
/// barriers between phases; deterministic given the spec and seed.
PipelineResult run_pipeline(const PipelineSpec& spec);

}  // namespace csh::simnet

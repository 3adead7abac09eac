#include "csh/pipeline.hpp"

namespace csh::simnet {

PipelineResult run_pipeline(const PipelineSpec& spec) {
    PipelineResult result;
    if (const auto* single = std::get_if<SinglePipelineSpec>(&spec)) {
        singlejob::SingleJobRun run = single->uncoded
                                          ? singlejob::run_single_uncoded(single->spec, single->r, single->options)
                                          : singlejob::run_single_coded(single->spec, single->options);
        result.meta = std::move(run.meta);
        result.transcript = std::move(run.transcript);
        result.loads = std::move(run.loads);
        for (auto& [f, payload] : run.reduce_outputs)
            result.reduce_outputs[ValueKey{0, f, 0}] = std::move(payload);
    } else {
        const auto& multi = std::get<MultiPipelineSpec>(spec);
        camr::MultiJobRun run = camr::run_multi(multi.spec, multi.options);
        result.meta = std::move(run.meta);
        result.transcript = std::move(run.transcript);
        result.loads = std::move(run.loads);
        result.reduce_outputs = std::move(run.reduce_outputs);
    }
    return result;
}

}  // namespace csh::simnet

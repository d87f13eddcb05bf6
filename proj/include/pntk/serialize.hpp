#pragma once

#include <string>

#include <json.hpp>

#include "pntk/bounds.hpp"
#include "pntk/experiments.hpp"
#include "pntk/kernel.hpp"
#include "pntk/objective.hpp"
#include "pntk/pnn.hpp"

namespace pntk {

using ordered_json = nlohmann::ordered_json;

// Binary state container: a little-endian u64 header length, a JSON header
// (shapes, dimensions, prior flag), then the raw f64 payload written mu then
// sigma per layer, then the output signs, then the prior copies when the
// header says they are present. Round trips are bitwise exact.
void save_state(const PNNState& state, const std::string& path);
PNNState load_state(const std::string& path);

// Same container layout for a kernel matrix; lambda_min is recomputed on
// load rather than trusted from the file.
void save_kernel(const KernelMatrix& k, const std::string& path);
KernelMatrix load_kernel(const std::string& path);

void save_trace_csv(const TrainTrace& trace, const std::string& path);

// Report writers. Key order is fixed and wall-clock measurements are kept
// out of the files, so identical runs produce bit-identical artifacts.
ordered_json to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const ordered_json& j);
ordered_json to_json(const BoundReport& report);
ordered_json to_json(const ConcentrationReport& report);
ordered_json to_json(const DriftStudyReport& report);
ordered_json to_json(const GradNormReport& report);
ordered_json to_json(const KrrEquivalenceReport& report);
ordered_json to_json(const ConvergenceReport& report);
ordered_json to_json(const KernelStabilityReport& report);
ordered_json to_json(const ValidityReport& report);
ordered_json to_json(const GridSearchResult& result);

void write_json(const ordered_json& j, const std::string& path);
void write_grid_csv(const GridSearchResult& result, const std::string& path);

}  // namespace pntk

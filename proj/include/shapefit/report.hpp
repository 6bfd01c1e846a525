#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "shapefit/experiment.hpp"

namespace shapefit {

/// RFC 4180 CSV. Phase grid columns: n,q,sigma,trial,seed,relative_error,
/// iterations,status. Noise sweep columns: sigma,trial,seed,relative_error.
/// Reals use 17 significant digits; refused trials print "nan".
std::string experiment_csv(const ExperimentResult& result);

/// Self-contained SVG. Phase grid: grayscale heatmap of the cell means
/// clipped to [0, 1], white at 0 and black at 1 or more (cells with no
/// solved trial are drawn black and hatched). Noise sweep: log-log line of
/// mean error against sigma (sigma = 0 is listed in the caption only).
/// The resolved config is embedded in a <metadata> element.
std::string experiment_svg(const ExperimentResult& result);

/// Run manifest: resolved config, RNG algorithm, per-cell summaries and the
/// names of the sibling output files.
nlohmann::json experiment_manifest(const ExperimentResult& result);

/// Writes <mode>.csv, <mode>.svg and <mode>.json into config.out_dir,
/// creating it if needed. Returns the paths written; throws IoError.
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentResult& result);

}  // namespace shapefit

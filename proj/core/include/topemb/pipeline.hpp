#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "topemb/clustering.hpp"
#include "topemb/error.hpp"
#include "topemb/manifold.hpp"
#include "topemb/retrieval.hpp"
#include "topemb/separability.hpp"

namespace topemb {

std::string_view toolkit_version();

// Stage names in execution order.
inline constexpr std::string_view kStages[] = {"separability", "gap",       "cluster",    "spectra",
                                               "manifold",     "retrieval", "correlation"};

struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  std::vector<std::string> stages;  // empty: all
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  SvmParams svm;
  double train_fraction = 0.8;
  std::size_t histogram_bins = 40;
  ClusteringParams clustering;
  std::string cluster_modality = "a";  // "a" | "b"
  double spectrum_epsilon = kDefaultEffectiveDimEpsilon;
  std::size_t spectrum_min_points = 3;
  LayoutParams layout;
  std::vector<std::size_t> ks = {1, 5};
  Direction correlation_direction = Direction::AtoB;
  std::size_t min_queries = 5;
  bool log_auc = false;

  bool stage_enabled(std::string_view stage) const;
  void validate() const;
};

// Unknown keys at any level are rejected with InvalidArgument. Relative
// paths are resolved against `base_dir`.
PipelineConfig parse_pipeline_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_json(const PipelineConfig& config);

struct PipelineResult {
  std::vector<std::filesystem::path> artifacts;  // relative to output_dir, in write order
};

// Runs the enabled stages (computing unexported prerequisites when needed)
// and writes their artifacts plus run.json. Throws on the first failure.
PipelineResult run_pipeline(const PipelineConfig& config);

// {"error": <ErrorCode>, "stage": ..., "message": ...}
std::string error_json(ErrorCode code, std::string_view stage, std::string_view message);

// Wraps run_pipeline: on an Error writes <output_dir>/error.json and
// returns a nonzero exit code.
int run_pipeline_reporting(const PipelineConfig& config);

}  // namespace topemb

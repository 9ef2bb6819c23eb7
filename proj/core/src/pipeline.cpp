#include "topemb/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "topemb/embed_store.hpp"
#include "topemb/parallel.hpp"
#include "topemb/report.hpp"
#include "topemb/spectra.hpp"

#ifndef TOPEMB_VERSION
#define TOPEMB_VERSION "0.0.0"
#endif

namespace topemb {

std::string_view toolkit_version() { return TOPEMB_VERSION; }

bool PipelineConfig::stage_enabled(std::string_view stage) const {
  return stages.empty() || std::find(stages.begin(), stages.end(), stage) != stages.end();
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  for (const auto& s : stages)
    if (std::find(std::begin(kStages), std::end(kStages), s) == std::end(kStages)) fail("unknown stage: " + s);
  if (manifest.empty()) fail("pipeline config needs a manifest");
  if (output_dir.empty()) fail("pipeline config needs an output_dir");
  if (cluster_modality != "a" && cluster_modality != "b") fail("cluster modality must be \"a\" or \"b\"");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must be in (0, 1)");
  if (histogram_bins < 1) fail("histogram bins must be >= 1");
  if (ks.empty()) fail("retrieval needs at least one k");
  if (threads < 1) fail("threads must be >= 1");
}

namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

void reject_unknown(const Json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(ErrorCode::InvalidArgument, "unknown key in " + where + ": " + key);
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("pipeline config: ") + e.what());
  }
  PipelineConfig c;
  try {
    reject_unknown(j,
                   {"manifest", "output_dir", "stages", "seed", "threads", "separability", "gap", "cluster",
                    "spectra", "manifold", "retrieval", "correlation"},
                   "pipeline config");
    std::string manifest, out;
    read_opt(j, "manifest", manifest);
    read_opt(j, "output_dir", out);
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
      if (p.empty()) return {};
      std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    c.manifest = resolve(manifest);
    c.output_dir = resolve(out);
    read_opt(j, "stages", c.stages);
    read_opt(j, "seed", c.seed);
    read_opt(j, "threads", c.threads);
    c.svm.seed = c.seed;
    c.layout.seed = c.seed;

    if (j.contains("separability")) {
      const Json& s = j.at("separability");
      reject_unknown(s, {"lambda", "epochs", "train_fraction"}, "separability");
      read_opt(s, "lambda", c.svm.lambda);
      read_opt(s, "epochs", c.svm.epochs);
      read_opt(s, "train_fraction", c.train_fraction);
    }
    if (j.contains("gap")) {
      const Json& s = j.at("gap");
      reject_unknown(s, {"bins"}, "gap");
      read_opt(s, "bins", c.histogram_bins);
    }
    if (j.contains("cluster")) {
      const Json& s = j.at("cluster");
      reject_unknown(s, {"min_cluster_size", "min_samples", "metric", "allow_single_cluster", "modality"},
                     "cluster");
      read_opt(s, "min_cluster_size", c.clustering.min_cluster_size);
      read_opt(s, "min_samples", c.clustering.min_samples);
      if (s.contains("metric")) c.clustering.metric = parse_metric(s.at("metric").get<std::string>());
      read_opt(s, "allow_single_cluster", c.clustering.allow_single_cluster);
      read_opt(s, "modality", c.cluster_modality);
    }
    if (j.contains("spectra")) {
      const Json& s = j.at("spectra");
      reject_unknown(s, {"epsilon", "min_points"}, "spectra");
      read_opt(s, "epsilon", c.spectrum_epsilon);
      read_opt(s, "min_points", c.spectrum_min_points);
    }
    if (j.contains("manifold")) {
      const Json& s = j.at("manifold");
      reject_unknown(s,
                     {"n_neighbors", "min_dist", "output_metric", "epochs", "metric", "learning_rate",
                      "negative_sample_rate"},
                     "manifold");
      read_opt(s, "n_neighbors", c.layout.n_neighbors);
      read_opt(s, "min_dist", c.layout.min_dist);
      if (s.contains("output_metric")) c.layout.space = parse_output_space(s.at("output_metric").get<std::string>());
      read_opt(s, "epochs", c.layout.n_epochs);
      if (s.contains("metric")) c.layout.metric = parse_metric(s.at("metric").get<std::string>());
      read_opt(s, "learning_rate", c.layout.learning_rate);
      read_opt(s, "negative_sample_rate", c.layout.negative_sample_rate);
    }
    if (j.contains("retrieval")) {
      const Json& s = j.at("retrieval");
      reject_unknown(s, {"ks"}, "retrieval");
      read_opt(s, "ks", c.ks);
    }
    if (j.contains("correlation")) {
      const Json& s = j.at("correlation");
      reject_unknown(s, {"direction", "min_queries", "log_auc"}, "correlation");
      if (s.contains("direction")) c.correlation_direction = parse_direction(s.at("direction").get<std::string>());
      read_opt(s, "min_queries", c.min_queries);
      read_opt(s, "log_auc", c.log_auc);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_text_file(path), path.parent_path());
}

std::string pipeline_config_json(const PipelineConfig& c) {
  OJson j;
  j["manifest"] = c.manifest.string();
  j["output_dir"] = c.output_dir.string();
  j["stages"] = c.stages;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["separability"] = {{"lambda", c.svm.lambda}, {"epochs", c.svm.epochs}, {"train_fraction", c.train_fraction}};
  j["gap"] = {{"bins", c.histogram_bins}};
  j["cluster"] = {{"min_cluster_size", c.clustering.min_cluster_size},
                  {"min_samples", c.clustering.min_samples},
                  {"metric", std::string(to_string(c.clustering.metric))},
                  {"allow_single_cluster", c.clustering.allow_single_cluster},
                  {"modality", c.cluster_modality}};
  j["spectra"] = {{"epsilon", c.spectrum_epsilon}, {"min_points", c.spectrum_min_points}};
  j["manifold"] = {{"n_neighbors", c.layout.n_neighbors},
                   {"min_dist", c.layout.min_dist},
                   {"output_metric", std::string(to_string(c.layout.space))},
                   {"epochs", c.layout.n_epochs},
                   {"metric", std::string(to_string(c.layout.metric))},
                   {"learning_rate", c.layout.learning_rate},
                   {"negative_sample_rate", c.layout.negative_sample_rate}};
  j["retrieval"] = {{"ks", c.ks}};
  j["correlation"] = {{"direction", std::string(to_string(c.correlation_direction))},
                      {"min_queries", c.min_queries},
                      {"log_auc", c.log_auc}};
  return j.dump(2);
}

namespace {

class StageError : public Error {
 public:
  StageError(const Error& e, std::string stage) : Error(e.code(), e.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct Context {
  const PipelineConfig& config;
  PipelineResult result;

  void write(const std::string& name, const std::string& text) {
    write_text_file(config.output_dir / name, text);
    result.artifacts.emplace_back(name);
  }
};

template <typename F>
auto in_stage(const char* stage, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e, stage);
  }
}

PipelineResult run_stages(const PipelineConfig& cfg) {
  Context ctx{cfg, {}};
  in_stage("setup", [&] {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir))
      throw Error(ErrorCode::IoError, "cannot create output directory " + cfg.output_dir.string());
    return 0;
  });
  const std::size_t saved_threads = num_threads();
  set_num_threads(cfg.threads);
  struct Restore {
    std::size_t n;
    ~Restore() { set_num_threads(n); }
  } restore{saved_threads};

  const PairedDataset ds = in_stage("load", [&] { return load_dataset(cfg.manifest); });

  if (cfg.stage_enabled("separability")) {
    in_stage("separability", [&] {
      ctx.write("table1.json", classifier_report_json(modality_separability(ds, cfg.train_fraction, cfg.svm)) + "\n");
      return 0;
    });
  }
  if (cfg.stage_enabled("gap")) {
    in_stage("gap", [&] {
      const GapReport g = paired_cosine_distribution(ds, cfg.histogram_bins);
      std::ostringstream csv;
      write_histogram_csv(csv, g.histogram);
      ctx.write("fig3.csv", csv.str());
      ctx.write("gap.json", gap_report_json(g) + "\n");
      return 0;
    });
  }

  const bool need_clusters = cfg.stage_enabled("cluster") || cfg.stage_enabled("spectra") ||
                             cfg.stage_enabled("correlation");
  const EmbeddingSet& cluster_set = cfg.cluster_modality == "a" ? ds.a : ds.b;
  Clustering clustering;
  if (need_clusters) {
    clustering = in_stage("cluster", [&] { return cluster(cluster_set, cfg.clustering); });
    if (cfg.stage_enabled("cluster")) {
      in_stage("cluster", [&] {
        std::ostringstream csv;
        write_clustering_csv(csv, clustering, cluster_set.ids);
        ctx.write("clusters.csv", csv.str());
        ctx.write("clusters.json", clustering_summary_json(clustering) + "\n");
        return 0;
      });
    }
  }

  std::vector<SpectrumReport> cluster_spectra;
  if (cfg.stage_enabled("spectra") || cfg.stage_enabled("correlation")) {
    cluster_spectra = in_stage("spectra", [&] {
      return per_cluster_spectra(cluster_set, clustering, {cfg.spectrum_min_points, cfg.spectrum_epsilon});
    });
    if (cfg.stage_enabled("spectra")) {
      in_stage("spectra", [&] {
        std::vector<SpectrumReport> all;
        all.push_back(spectrum_of_points(ds.a.vectors, ds.a.modality, cfg.spectrum_epsilon));
        all.push_back(spectrum_of_points(ds.b.vectors, ds.b.modality, cfg.spectrum_epsilon));
        std::vector<SpectrumReport> per_cluster_named = cluster_spectra;
        for (auto& r : per_cluster_named) r.source = "cluster " + r.source;
        std::ostringstream csv;
        all.insert(all.end(), cluster_spectra.begin(), cluster_spectra.end());
        write_spectra_csv(csv, all);
        ctx.write("spectra.csv", csv.str());
        std::vector<SpectrumReport> global(all.begin(), all.begin() + 2);
        ctx.write("spectra.svg", svg_spectrum_plot(global, "covariance spectrum"));
        if (!per_cluster_named.empty())
          ctx.write("spectra_clusters.svg",
                    svg_spectrum_plot(per_cluster_named, "per-cluster spectra (" + cluster_set.modality + ")"));
        return 0;
      });
    }
  }

  if (cfg.stage_enabled("manifold")) {
    in_stage("manifold", [&] {
      const EmbeddingSet both = concat_modalities(ds);
      const Layout lay = umap(both.vectors, cfg.layout);
      std::ostringstream csv;
      write_layout_csv(csv, lay, both);
      ctx.write("layout.csv", csv.str());
      ScatterPlot plot;
      const std::size_t n = ds.count();
      plot.points.reserve(2 * n);
      for (std::size_t i = 0; i < lay.size(); ++i) {
        if (lay.space == OutputSpace::Sphere)
          plot.points.push_back({lay.coords(i, 1), lay.coords(i, 0)});
        else
          plot.points.push_back({lay.coords(i, 0), lay.coords(i, 1)});
        plot.groups.push_back(i < n ? 0 : 1);
      }
      for (std::size_t i = 0; i < n; ++i) plot.segments.emplace_back(i, n + i);
      plot.group_names = {ds.a.modality, ds.b.modality};
      plot.title = lay.space == OutputSpace::Sphere ? "layout (haversine)" : "layout (plane)";
      plot.x_label = lay.space == OutputSpace::Sphere ? "longitude" : "x";
      plot.y_label = lay.space == OutputSpace::Sphere ? "latitude" : "y";
      ctx.write("layout.svg", svg_scatter(plot));
      return 0;
    });
  }

  if (cfg.stage_enabled("retrieval")) {
    in_stage("retrieval", [&] {
      std::vector<RetrievalReport> reports;
      reports.push_back(cross_modal_retrieve(ds, Direction::AtoB, cfg.ks));
      reports.push_back(cross_modal_retrieve(ds, Direction::BtoA, cfg.ks));
      ctx.write("table2.json", retrieval_reports_json(reports) + "\n");
      return 0;
    });
  }

  if (cfg.stage_enabled("correlation")) {
    in_stage("correlation", [&] {
      const PerClusterTop1 top1 = per_cluster_top1(ds, cfg.correlation_direction, clustering, cfg.min_queries);
      const ClusterAccuracyCorrelation corr = auc_accuracy_correlation(top1, cluster_spectra, cfg.log_auc);
      std::ostringstream csv;
      write_correlation_csv(csv, corr);
      ctx.write("fig15.csv", csv.str());
      ctx.write("fig15.json", correlation_json(corr) + "\n");
      ctx.write("fig15.svg", svg_correlation_plot(corr));
      return 0;
    });
  }

  in_stage("report", [&] {
    OJson run;
    run["toolkit"] = "topemb";
    run["version"] = std::string(toolkit_version());
    run["config"] = OJson::parse(pipeline_config_json(cfg));
    run["dataset"] = {{"name", ds.name}, {"n", ds.count()}, {"d", ds.dim()},
                      {"modality_a", ds.a.modality}, {"modality_b", ds.b.modality}};
    std::vector<std::string> names;
    for (const auto& p : ctx.result.artifacts) names.push_back(p.string());
    run["artifacts"] = names;
    ctx.write("run.json", run.dump(2) + "\n");
    return 0;
  });
  return ctx.result;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) { return run_stages(config); }

std::string error_json(ErrorCode code, std::string_view stage, std::string_view message) {
  OJson j;
  j["error"] = std::string(to_string(code));
  j["stage"] = std::string(stage);
  j["message"] = std::string(message);
  return j.dump(2);
}

int run_pipeline_reporting(const PipelineConfig& config) {
  try {
    run_stages(config);
    return 0;
  } catch (const StageError& e) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    try {
      write_text_file(config.output_dir / "error.json", error_json(e.code(), e.stage(), e.what()) + "\n");
    } catch (const Error&) {
      // the output directory itself is unusable; the exit code still reports failure
    }
    return 2;
  }
}

}  // namespace topemb

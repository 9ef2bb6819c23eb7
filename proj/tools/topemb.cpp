// topemb: command-line front end for the embedding-topology toolkit.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "topemb/clustering.hpp"
#include "topemb/csv.hpp"
#include "topemb/embed_store.hpp"
#include "topemb/error.hpp"
#include "topemb/gaplab.hpp"
#include "topemb/manifold.hpp"
#include "topemb/parallel.hpp"
#include "topemb/pipeline.hpp"
#include "topemb/report.hpp"
#include "topemb/retrieval.hpp"
#include "topemb/separability.hpp"
#include "topemb/spectra.hpp"
#include "topemb/synthetic.hpp"

namespace fs = std::filesystem;
using namespace topemb;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  bool out_set = false;
  std::size_t threads = 1;
};

fs::path prepare_out(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + g.out);
  return g.out;
}

void say(const fs::path& p) { std::cout << p.string() << '\n'; }

void write_out(const fs::path& dir, const std::string& name, const std::string& text) {
  write_text_file(dir / name, text);
  say(dir / name);
}

const EmbeddingSet& pick(const PairedDataset& ds, const std::string& modality) {
  if (modality == "a") return ds.a;
  if (modality == "b") return ds.b;
  throw Error(ErrorCode::InvalidArgument, "modality must be a or b");
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_double(item);
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw Error(ErrorCode::InvalidArgument, "k must be a positive integer: " + item);
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw Error(ErrorCode::InvalidArgument, "no k values given");
  return ks;
}

bool parse_on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, "expected on or off, got " + v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topemb: modality-gap and embedding-topology analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string manifest;
  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("manifest,--manifest,-m", manifest, "Dataset manifest (JSON)")->required();
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and write a normalized copy");
  add_manifest(ingest);

  // separate
  auto* separate = app.add_subcommand("separate", "Linear SVM modality separability");
  add_manifest(separate);
  double train_fraction = 0.8;
  SvmParams svm;
  separate->add_option("--train-fraction", train_fraction);
  separate->add_option("--lambda", svm.lambda);
  separate->add_option("--epochs", svm.epochs);

  // pca
  auto* pca = app.add_subcommand("pca", "Project both modalities onto the top principal components");
  add_manifest(pca);
  std::size_t pca_k = 2;
  pca->add_option("--k", pca_k);

  // gap
  auto* gap = app.add_subcommand("gap", "Paired cosine histogram and centroid gap");
  add_manifest(gap);
  std::size_t bins = 40;
  gap->add_option("--bins", bins);

  // cluster
  auto* clus = app.add_subcommand("cluster", "HDBSCAN on one modality");
  add_manifest(clus);
  ClusteringParams cparams;
  std::string modality = "a";
  std::string metric = "cosine";
  clus->add_option("--modality", modality)->check(CLI::IsMember({"a", "b"}));
  clus->add_option("--min-cluster-size", cparams.min_cluster_size);
  clus->add_option("--min-samples", cparams.min_samples);
  clus->add_option("--metric", metric)->check(CLI::IsMember({"cosine", "euclidean"}));
  clus->add_flag("--allow-single-cluster", cparams.allow_single_cluster);

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "Covariance singular-value spectra (global or per cluster)");
  add_manifest(spec);
  std::string clusters_csv;
  double epsilon = kDefaultEffectiveDimEpsilon;
  spec->add_option("--modality", modality)->check(CLI::IsMember({"a", "b"}));
  spec->add_option("--clusters", clusters_csv, "id,label CSV from `cluster`");
  spec->add_option("--epsilon", epsilon);

  // umap
  auto* um = app.add_subcommand("umap", "2-D layout of both modalities");
  add_manifest(um);
  LayoutParams lparams;
  std::string output_metric = "plane";
  um->add_option("--n-neighbors", lparams.n_neighbors);
  um->add_option("--min-dist", lparams.min_dist);
  um->add_option("--output-metric", output_metric)->check(CLI::IsMember({"plane", "haversine"}));
  um->add_option("--epochs", lparams.n_epochs);

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "Cross-modal top-k retrieval");
  add_manifest(ret);
  std::string direction = "a2b";
  std::string ks_text = "1,5";
  ret->add_option("--direction", direction)->check(CLI::IsMember({"a2b", "b2a"}));
  ret->add_option("--k", ks_text, "Comma-separated k values");

  // correlate
  auto* cor = app.add_subcommand("correlate", "Per-cluster spectrum AUC against top-1 retrieval");
  add_manifest(cor);
  std::size_t min_queries = 5;
  bool log_auc = false;
  cor->add_option("--clusters", clusters_csv, "id,label CSV from `cluster`")->required();
  cor->add_option("--modality", modality)->check(CLI::IsMember({"a", "b"}));
  cor->add_option("--direction", direction)->check(CLI::IsMember({"a2b", "b2a"}));
  cor->add_option("--min-queries", min_queries);
  cor->add_flag("--log-auc", log_auc);

  // gaplab
  auto* lab = app.add_subcommand("gaplab", "Contrastive toy laboratory");
  lab->require_subcommand(1);
  LabConfig lab_cfg;
  std::string loss = "infonce";
  std::string hopfield = "off";
  std::string lab_config_file;
  auto add_lab_options = [&](CLI::App* sub) {
    sub->add_option("--config", lab_config_file, "LabConfig JSON");
    sub->add_option("--steps", lab_cfg.steps);
    sub->add_option("--batch", lab_cfg.batch);
    sub->add_option("--samples", lab_cfg.samples);
    sub->add_option("--temperature", lab_cfg.temperature);
    sub->add_option("--beta", lab_cfg.hopfield_beta);
    sub->add_option("--lr", lab_cfg.learning_rate);
  };
  auto* lab_run = lab->add_subcommand("run", "Train one configuration");
  add_lab_options(lab_run);
  lab_run->add_option("--loss", loss)->check(CLI::IsMember({"infonce", "infoloob"}));
  lab_run->add_option("--hopfield", hopfield)->check(CLI::IsMember({"on", "off"}));
  auto* lab_ablate = lab->add_subcommand("ablate", "2x2 loss x Hopfield grid");
  add_lab_options(lab_ablate);
  auto* lab_synth = lab->add_subcommand("synth", "Write a planted-dimension paired dataset");
  PlantedParams planted;
  lab_synth->add_option("--dims", planted.intrinsic_dims, "Intrinsic dimension per cluster")->delimiter(',');
  lab_synth->add_option("--points", planted.points_per_cluster);
  lab_synth->add_option("--dim", planted.dim);
  lab_synth->add_option("--noise", planted.noise);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run the full analysis from a JSON config");
  std::string pipe_config;
  std::vector<std::string> stages;
  pipe->add_option("--config,-c", pipe_config, "PipelineConfig JSON")->required();
  pipe->add_option("--stages", stages, "Subset of stages")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  g.seed_set = app.get_option("--seed")->count() > 0;
  g.out_set = app.get_option("--out")->count() > 0;
  set_num_threads(g.threads);

  try {
    if (*ingest) {
      const PairedDataset ds = load_dataset(manifest);
      const fs::path out = prepare_out(g);
      say(save_dataset(ds, out));
      std::cout << "pairs " << ds.count() << " dim " << ds.dim() << '\n';
    } else if (*separate) {
      const PairedDataset ds = load_dataset(manifest);
      svm.seed = g.seed;
      const ClassifierReport r = modality_separability(ds, train_fraction, svm);
      write_out(prepare_out(g), "table1.json", classifier_report_json(r) + "\n");
    } else if (*pca) {
      const PairedDataset ds = load_dataset(manifest);
      const EmbeddingSet both = concat_modalities(ds);
      const PcaResult p = pca_project(both, pca_k);
      std::ostringstream csv;
      csv << "id,modality";
      for (std::size_t k = 0; k < pca_k; ++k) csv << ",pc" << (k + 1);
      csv << '\n';
      for (std::size_t i = 0; i < both.count(); ++i) {
        csv << both.ids[i] << ',' << csv_escape(both.modality_of(i));
        for (std::size_t k = 0; k < pca_k; ++k) csv << ',' << format_double(p.projection(i, k));
        csv << '\n';
      }
      const fs::path out = prepare_out(g);
      write_out(out, "pca.csv", csv.str());
      std::cout << "explained_variance " << format_double(p.explained_variance) << '\n';
    } else if (*gap) {
      const PairedDataset ds = load_dataset(manifest);
      const GapReport r = paired_cosine_distribution(ds, bins);
      const fs::path out = prepare_out(g);
      std::ostringstream csv;
      write_histogram_csv(csv, r.histogram);
      write_out(out, "fig3.csv", csv.str());
      write_out(out, "gap.json", gap_report_json(r) + "\n");
    } else if (*clus) {
      const PairedDataset ds = load_dataset(manifest);
      cparams.metric = parse_metric(metric);
      const EmbeddingSet& set = pick(ds, modality);
      const Clustering c = cluster(set, cparams);
      const fs::path out = prepare_out(g);
      std::ostringstream csv;
      write_clustering_csv(csv, c, set.ids);
      write_out(out, "clusters.csv", csv.str());
      write_out(out, "clusters.json", clustering_summary_json(c) + "\n");
    } else if (*spec) {
      const PairedDataset ds = load_dataset(manifest);
      const EmbeddingSet& set = pick(ds, modality);
      std::vector<SpectrumReport> reports;
      if (clusters_csv.empty()) {
        reports.push_back(spectrum_of_points(set.vectors, set.modality, epsilon));
      } else {
        std::istringstream in(read_text_file(clusters_csv));
        const Clustering c = clustering_from_labels(read_clustering_csv(in));
        if (c.labels.size() != set.count())
          throw Error(ErrorCode::HeaderMismatch, "cluster labels do not match the dataset size");
        reports = per_cluster_spectra(set, c, {3, epsilon});
      }
      const fs::path out = prepare_out(g);
      std::ostringstream csv;
      write_spectra_csv(csv, reports);
      write_out(out, "spectra.csv", csv.str());
      write_out(out, "spectra.svg", svg_spectrum_plot(reports, "covariance spectrum"));
    } else if (*um) {
      const PairedDataset ds = load_dataset(manifest);
      lparams.space = parse_output_space(output_metric);
      lparams.seed = g.seed;
      const EmbeddingSet both = concat_modalities(ds);
      const Layout lay = umap(both.vectors, lparams);
      const fs::path out = prepare_out(g);
      std::ostringstream csv;
      write_layout_csv(csv, lay, both);
      write_out(out, "layout.csv", csv.str());
      ScatterPlot plot;
      const std::size_t n = ds.count();
      for (std::size_t i = 0; i < lay.size(); ++i) {
        if (lay.space == OutputSpace::Sphere)
          plot.points.push_back({lay.coords(i, 1), lay.coords(i, 0)});
        else
          plot.points.push_back({lay.coords(i, 0), lay.coords(i, 1)});
        plot.groups.push_back(i < n ? 0 : 1);
      }
      for (std::size_t i = 0; i < n; ++i) plot.segments.emplace_back(i, n + i);
      plot.group_names = {ds.a.modality, ds.b.modality};
      write_out(out, "layout.svg", svg_scatter(plot));
    } else if (*ret) {
      const PairedDataset ds = load_dataset(manifest);
      const std::vector<std::size_t> ks = parse_ks(ks_text);
      const RetrievalReport r = cross_modal_retrieve(ds, parse_direction(direction), ks);
      write_out(prepare_out(g), "table2.json", retrieval_reports_json({&r, 1}) + "\n");
      for (std::size_t i = 0; i < r.ks.size(); ++i)
        std::cout << "top" << r.ks[i] << ' ' << format_double(r.accuracy[i]) << '\n';
    } else if (*cor) {
      const PairedDataset ds = load_dataset(manifest);
      const EmbeddingSet& set = pick(ds, modality);
      std::istringstream in(read_text_file(clusters_csv));
      const Clustering c = clustering_from_labels(read_clustering_csv(in));
      if (c.labels.size() != set.count())
        throw Error(ErrorCode::HeaderMismatch, "cluster labels do not match the dataset size");
      const auto spectra = per_cluster_spectra(set, c);
      const auto top1 = per_cluster_top1(ds, parse_direction(direction), c, min_queries);
      const auto corr = auc_accuracy_correlation(top1, spectra, log_auc);
      const fs::path out = prepare_out(g);
      std::ostringstream csv;
      write_correlation_csv(csv, corr);
      write_out(out, "fig15.csv", csv.str());
      write_out(out, "fig15.json", correlation_json(corr) + "\n");
      write_out(out, "fig15.svg", svg_correlation_plot(corr));
      std::cout << "pearson_r " << format_double(corr.pearson_r) << '\n';
    } else if (*lab) {
      if (*lab_synth) {
        planted.seed = g.seed;
        const PlantedClusters p = planted_clusters(planted);
        const fs::path out = prepare_out(g);
        say(save_dataset(p.data, out));
        std::ostringstream csv;
        write_clustering_csv(csv, clustering_from_labels(p.labels), p.data.a.ids);
        write_out(out, "truth.csv", csv.str());
      } else {
        LabConfig cfg = lab_cfg;
        if (!lab_config_file.empty()) {
          // file values first, then explicit flags on top
          LabConfig from_file = parse_lab_config_json(read_text_file(lab_config_file));
          CLI::App* sub = *lab_run ? lab_run : lab_ablate;
          auto given = [&](const char* name) { return sub->get_option(name)->count() > 0; };
          if (given("--steps")) from_file.steps = cfg.steps;
          if (given("--batch")) from_file.batch = cfg.batch;
          if (given("--samples")) from_file.samples = cfg.samples;
          if (given("--temperature")) from_file.temperature = cfg.temperature;
          if (given("--beta")) from_file.hopfield_beta = cfg.hopfield_beta;
          if (given("--lr")) from_file.learning_rate = cfg.learning_rate;
          cfg = from_file;
        }
        if (g.seed_set || lab_config_file.empty()) cfg.seed = g.seed;
        const fs::path out = prepare_out(g);
        if (*lab_run) {
          cfg.loss = parse_loss_kind(loss);
          cfg.use_hopfield = parse_on_off(hopfield);
          const LabRun run = train(cfg);
          save_lab_run(run, out);
          say(out / "run.json");
          say(out / "manifest.json");
        } else {
          const LabAblation ab = ablation_2x2(cfg);
          for (const LabRun& run : ab.runs) {
            const std::string name =
                std::string(to_string(run.config.loss)) + (run.config.use_hopfield ? "_hopfield" : "_plain");
            save_lab_run(run, out / name);
          }
          write_out(out, "ablation.csv", ablation_table_csv(ab.table));
        }
      }
    } else if (*pipe) {
      PipelineConfig cfg = load_pipeline_config(pipe_config);
      if (g.seed_set) {
        cfg.seed = g.seed;
        cfg.svm.seed = g.seed;
        cfg.layout.seed = g.seed;
      }
      if (g.out_set) cfg.output_dir = g.out;
      if (app.get_option("--threads")->count() > 0) cfg.threads = g.threads;
      if (!stages.empty()) cfg.stages = stages;
      const int rc = run_pipeline_reporting(cfg);
      if (rc != 0) {
        std::cerr << read_text_file(cfg.output_dir / "error.json");
        return rc;
      }
      say(cfg.output_dir / "run.json");
    }
  } catch (const Error& e) {
    std::cerr << error_json(e.code(), app.get_subcommands().front()->get_name(), e.what()) << '\n';
    return 2;
  }
  return 0;
}

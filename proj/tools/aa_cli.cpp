// Command-line entry point: ingest, pipeline, cluster, serve, simulate, eval,
// export, generate-corpus.
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aa/common/error.hpp"
#include "aa/corpus.hpp"
#include "aa/eval.hpp"
#include "aa/service.hpp"
#include "aa/session.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_data_dir() {
  const char* env = std::getenv("AA_DATA_DIR");
  return env != nullptr && *env != '\0' ? env : "aa-data";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aa::Error(aa::ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw aa::Error(aa::ErrorCode::kParse, "'" + path + "': " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw aa::Error(aa::ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw aa::Error(aa::ErrorCode::kInvalidArgument, "invalid seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw aa::Error(aa::ErrorCode::kInvalidArgument, "no seeds given");
  return seeds;
}

// A dataset argument is a JSONL path, or the id of a dataset in the data dir.
aa::Dataset resolve_dataset(const std::string& arg, const std::string& data_dir) {
  if (fs::exists(arg)) return aa::ingest_dataset(arg);
  const auto stored = fs::path(data_dir) / "datasets" / (arg + ".jsonl");
  if (fs::exists(stored)) return aa::ingest_dataset(stored);
  throw aa::Error(aa::ErrorCode::kNotFound, "no dataset file or id '" + arg + "'");
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

struct Common {
  std::string config_path;
  std::string format = "json";
  std::string data_dir = default_data_dir();
};

json config_section(const Common& c, const char* key) {
  if (c.config_path.empty()) return json::object();
  const auto j = read_json_file(c.config_path);
  if (!j.is_object()) throw aa::Error(aa::ErrorCode::kInvalidArgument, "config file must hold a JSON object");
  return j.value(key, json::object());
}

int cmd_ingest(const std::string& file, const Common& c) {
  aa::service::Store store(c.data_dir, aa::labeling::default_resources());
  const auto id = store.add_dataset(read_file(file));
  const auto d = store.dataset(id);
  if (c.format == "table") {
    std::printf("dataset_id  %s\nsize        %zu\ngold        %s\n", id.c_str(), d->size(), d->has_gold() ? "yes" : "no");
  } else {
    print({{"dataset_id", id}, {"size", d->size()}, {"has_gold", d->has_gold()}, {"data_dir", c.data_dir}});
  }
  return 0;
}

int cmd_pipeline(const std::string& dataset_arg, const std::string& k, double pca_var, bool pca_var_set,
                 std::uint64_t seed, bool curve_only, const Common& c) {
  auto config = aa::config_from_json(config_section(c, "session"));
  config.rng_seed = seed;
  if (pca_var_set) config.pca_variance = pca_var;
  if (k != "auto") {
    try {
      config.fixed_k = std::stoul(k);
    } catch (const std::exception&) {
      throw aa::Error(aa::ErrorCode::kInvalidArgument, "--k must be 'auto' or a positive integer");
    }
  }
  config.validate();
  auto session = aa::Session::create(resolve_dataset(dataset_arg, c.data_dir), config, aa::labeling::default_resources(),
                                     [] { return std::int64_t{0}; });
  const auto& p = session.pipeline();
  const auto& d = session.dataset();
  json clusters = json::array();
  for (std::size_t cl = 0; cl < session.clustering().k; ++cl) {
    json pivots = json::array();
    for (auto r : session.cluster_pivots(cl)) pivots.push_back({{"id", d[r].id}, {"text", d[r].text}});
    clusters.push_back({{"cluster", cl},
                        {"size", session.cluster_members(cl).size()},
                        {"label", session.cluster_label(cl).canonical},
                        {"pivots", pivots}});
  }
  json sse = json::array();
  for (std::size_t i = 0; i < p.ks.size(); ++i) sse.push_back({{"k", p.ks[i]}, {"sse", p.sse[i]}});
  json zero = json::array();
  for (auto r : p.zero_rows) zero.push_back(d[r].id);
  if (curve_only) {
    if (c.format == "table") {
      for (std::size_t i = 0; i < p.ks.size(); ++i) {
        std::printf("%4zu  %.6f%s\n", p.ks[i], p.sse[i], p.ks[i] == p.k ? "  <- k" : "");
      }
      if (p.no_elbow) std::printf("no elbow; k = %zu\n", p.k);
      return 0;
    }
    print({{"sse_curve", sse}, {"k", p.k}, {"no_elbow", p.no_elbow}, {"seed", seed}});
    return 0;
  }
  if (c.format == "table") {
    std::printf("points %zu  embedding_dim %zu  components %zu  explained %.4f  k %zu%s\n", p.points, p.embedding_dim,
                p.components, p.explained_fraction, p.k, p.no_elbow ? "  (no elbow)" : "");
    for (const auto& cl : clusters) {
      std::printf("%4zu  %5zu  %s\n", cl["cluster"].get<std::size_t>(), cl["size"].get<std::size_t>(),
                  cl["label"].get<std::string>().c_str());
    }
    return 0;
  }
  print({{"points", p.points},
         {"embedding_dim", p.embedding_dim},
         {"components", p.components},
         {"explained_variance_fraction", p.explained_fraction},
         {"zero_rows", zero},
         {"sse_curve", sse},
         {"k", p.k},
         {"no_elbow", p.no_elbow},
         {"seed", seed},
         {"clusters", clusters}});
  return 0;
}

aa::service::Server* g_server = nullptr;

int cmd_serve(std::string listen, const std::string& static_dir, std::size_t max_upload_mb, const Common& c) {
  if (listen.empty()) {
    const char* env = std::getenv("AA_LISTEN");
    listen = env != nullptr && *env != '\0' ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = aa::service::parse_listen(listen);
  aa::service::Store store(c.data_dir, aa::labeling::default_resources());
  store.load();
  aa::service::ServerOptions options;
  options.static_dir = static_dir;
  options.max_upload_bytes = max_upload_mb << 20;
  aa::service::Server server(store, options);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::fprintf(stderr, "listening on %s:%d (data dir %s, %zu sessions)\n", host.c_str(), port, c.data_dir.c_str(),
               store.session_ids().size());
  if (!server.listen(host, port)) throw aa::Error(aa::ErrorCode::kIo, "cannot listen on " + listen);
  return 0;
}

struct SimulateArgs {
  std::string mode = "both";
  double budget = 1500.0;
  double eps = 0.05;
  std::string seeds = "1,2,3,4";
  std::string cost_model;
  std::string cv_sampling = "downsample";
  std::string train;
  std::string test;
};

int cmd_simulate(const SimulateArgs& a, const Common& c) {
  aa::eval::ExperimentOptions o;
  if (a.mode == "both") {
    o.modes = {aa::eval::Mode::kAa, aa::eval::Mode::kBaseline};
  } else {
    o.modes = {aa::eval::parse_mode(a.mode)};
  }
  o.seeds = parse_seeds(a.seeds);
  o.budget = a.budget;
  o.eps = a.eps;
  if (!(o.budget >= 0.0)) throw aa::Error(aa::ErrorCode::kInvalidArgument, "--budget must be non-negative");
  if (!(o.eps >= 0.0 && o.eps <= 1.0)) throw aa::Error(aa::ErrorCode::kInvalidArgument, "--eps must be in [0, 1]");
  o.cost = aa::eval::cost_model_from_json(a.cost_model.empty() ? config_section(c, "cost_model")
                                                               : read_json_file(a.cost_model));
  o.session = aa::config_from_json(config_section(c, "session"));
  if (a.cv_sampling == "downsample") {
    o.cv_sampling = aa::eval::CvSampling::kDownsample;
  } else if (a.cv_sampling == "pooled") {
    o.cv_sampling = aa::eval::CvSampling::kPooled;
  } else {
    throw aa::Error(aa::ErrorCode::kInvalidArgument, "--cv-sampling must be 'downsample' or 'pooled'");
  }
  const fs::path corpus = fs::path(AA_DEFAULT_DATA_DIR) / "corpus";
  auto train = aa::ingest_dataset(a.train.empty() ? corpus / "movie_train.jsonl" : fs::path(a.train));
  auto test = aa::ingest_dataset(a.test.empty() ? corpus / "movie_test.jsonl" : fs::path(a.test));
  const auto data = aa::eval::prepare_simulation(std::move(train), std::move(test), aa::labeling::default_resources());
  const auto report = aa::eval::run_experiment(data, o);
  if (c.format == "table") {
    std::cout << aa::eval::report_to_table(report);
  } else {
    print(aa::eval::report_to_json(report, o));
  }
  return 0;
}

std::map<std::string, std::string> read_gold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aa::Error(aa::ErrorCode::kIo, "cannot open '" + path + "'");
  std::map<std::string, std::string> gold;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw aa::Error(aa::ErrorCode::kParse, "gold line " + std::to_string(n) + ": expected {\"id\", \"gold_label\"}");
    }
    const char* key = j.contains("gold_label") ? "gold_label" : "label";
    if (!j.contains(key) || !j[key].is_string()) {
      throw aa::Error(aa::ErrorCode::kParse, "gold line " + std::to_string(n) + ": missing gold_label");
    }
    gold[j["id"].get<std::string>()] = j[key].get<std::string>();
  }
  return gold;
}

std::vector<aa::LabelledRow> session_labels(const std::string& id, const Common& c) {
  aa::service::Store store(c.data_dir, aa::labeling::default_resources());
  const auto entry = store.open_session(id);
  std::lock_guard lock(entry->mutex);
  return entry->aa ? entry->aa->export_labels() : entry->baseline->export_labels();
}

int cmd_eval(const std::string& session_id, const std::string& gold_path, const std::string& mapping_path,
             const Common& c) {
  const auto labelled = session_labels(session_id, c);
  if (labelled.empty()) throw aa::Error(aa::ErrorCode::kPrecondition, "no labelled data");
  const auto gold_by_id = read_gold(gold_path);
  std::vector<std::string> session, gold;
  std::size_t missing = 0;
  for (const auto& r : labelled) {
    auto it = gold_by_id.find(r.id);
    if (it == gold_by_id.end()) {
      ++missing;
      continue;
    }
    session.push_back(r.label);
    gold.push_back(it->second);
  }
  if (session.empty()) throw aa::Error(aa::ErrorCode::kPrecondition, "no labelled row has a gold label");
  const auto overrides = mapping_path.empty() ? std::map<std::string, std::string>{}
                                              : aa::eval::load_mapping_overrides(mapping_path);
  const auto mapping = aa::eval::map_labels(session, gold, overrides);
  std::vector<std::string> mapped;
  for (const auto& l : session) {
    const auto m = mapping.apply(l);
    mapped.push_back(m ? *m : "unmapped:" + l);
  }
  const double kappa = aa::eval::cohens_kappa(mapped, gold);
  const double f1 = aa::eval::macro_f1(mapped, gold);
  const auto classes = aa::eval::per_class_scores(mapped, gold);
  if (c.format == "table") {
    std::printf("kappa %.4f  macro_f1 %.4f  rows %zu  missing_gold %zu\n", kappa, f1, session.size(), missing);
    std::printf("%-24s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1", "support");
    for (const auto& s : classes) {
      std::printf("%-24s %9.4f %9.4f %9.4f %8zu\n", s.label.c_str(), s.precision, s.recall, s.f1, s.support);
    }
    return 0;
  }
  json table = json::array();
  for (const auto& s : classes) {
    table.push_back(
        {{"label", s.label}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}});
  }
  json map_json = json::object();
  for (const auto& [k, v] : mapping.table) map_json[k] = v ? json(*v) : json(nullptr);
  print({{"session_id", session_id},
         {"rows", session.size()},
         {"missing_gold", missing},
         {"kappa", std::isfinite(kappa) ? json(kappa) : json(nullptr)},
         {"macro_f1", f1},
         {"per_class", table},
         {"mapping", map_json},
         {"unmapped", mapping.unmapped()}});
  return 0;
}

int cmd_export(const std::string& session_id, const std::string& out_path, const Common& c) {
  const auto labelled = session_labels(session_id, c);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw aa::Error(aa::ErrorCode::kIo, "cannot write '" + out_path + "'");
  aa::write_labels_jsonl(out, labelled);
  print({{"session_id", session_id}, {"rows", labelled.size()}, {"out", out_path}});
  return 0;
}

int cmd_generate_corpus(const std::string& out_dir, std::uint64_t seed) {
  const auto corpus = aa::corpus::generate_movie_corpus(seed);
  fs::create_directories(out_dir);
  const auto write = [](const fs::path& p, const aa::Dataset& d) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw aa::Error(aa::ErrorCode::kIo, "cannot write '" + p.string() + "'");
    aa::write_dataset(out, d);
  };
  write(fs::path(out_dir) / "movie_train.jsonl", corpus.train);
  write(fs::path(out_dir) / "movie_test.jsonl", corpus.test);
  print({{"train", corpus.train.size()}, {"test", corpus.test.size()}, {"out_dir", out_dir}, {"seed", seed}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active annotation: cluster-guided intent labelling"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON config file with optional 'session' and 'cost_model' objects");
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--data-dir", common.data_dir, "Data directory (env AA_DATA_DIR)");

  std::string ingest_file;
  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL dataset and register it in the data dir");
  ingest->add_option("file", ingest_file)->required();

  std::string dataset_arg, k = "auto";
  double pca_var = 0.95;
  std::uint64_t seed = 0;
  auto* pipeline = app.add_subcommand("pipeline", "Embed, reduce and cluster a dataset; print the clusters");
  pipeline->add_option("dataset", dataset_arg, "JSONL path or dataset id")->required();
  pipeline->add_option("--k", k, "Cluster count or 'auto'");
  auto* pca_opt = pipeline->add_option("--pca-var", pca_var, "Variance fraction kept by PCA");
  pipeline->add_option("--seed", seed);

  auto* cluster = app.add_subcommand("cluster", "Print the elbow SSE curve and the chosen k");
  cluster->add_option("dataset", dataset_arg, "JSONL path or dataset id")->required();
  auto* cluster_pca_opt = cluster->add_option("--pca-var", pca_var, "Variance fraction kept by PCA");
  cluster->add_option("--seed", seed);

  std::string listen, static_dir;
  std::size_t max_upload_mb = 50;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--listen", listen, "host:port (env AA_LISTEN)");
  serve->add_option("--static-dir", static_dir, "Directory served under /");
  serve->add_option("--max-upload-mb", max_upload_mb);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the simulated-annotator comparison");
  simulate->add_option("--mode", sim.mode)->check(CLI::IsMember({"aa", "baseline", "both"}));
  simulate->add_option("--budget", sim.budget);
  simulate->add_option("--eps", sim.eps);
  simulate->add_option("--seeds,--seed", sim.seeds, "Comma-separated seeds");
  simulate->add_option("--cost-model", sim.cost_model, "JSON cost model file");
  simulate->add_option("--cv-sampling", sim.cv_sampling, "downsample|pooled");
  simulate->add_option("--train", sim.train, "Training JSONL with gold labels (default: bundled corpus)");
  simulate->add_option("--test", sim.test, "Test JSONL with gold labels (default: bundled corpus)");

  std::string session_id, gold_path, mapping_path, out_path;
  auto* eval = app.add_subcommand("eval", "Score a session's labels against gold labels");
  eval->add_option("--session", session_id)->required();
  eval->add_option("--gold", gold_path)->required();
  eval->add_option("--mapping", mapping_path, "JSON object of label overrides");

  auto* exp = app.add_subcommand("export", "Write a session's labels as JSONL");
  exp->add_option("--session", session_id)->required();
  exp->add_option("--out", out_path)->required();

  std::string corpus_dir = (fs::path(AA_DEFAULT_DATA_DIR) / "corpus").string();
  std::uint64_t corpus_seed = 2140;
  auto* gen = app.add_subcommand("generate-corpus", "Regenerate the bundled synthetic corpus");
  gen->add_option("--out-dir", corpus_dir);
  gen->add_option("--seed", corpus_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_file, common);
    if (*pipeline) return cmd_pipeline(dataset_arg, k, pca_var, pca_opt->count() > 0, seed, false, common);
    if (*cluster) return cmd_pipeline(dataset_arg, "auto", pca_var, cluster_pca_opt->count() > 0, seed, true, common);
    if (*serve) return cmd_serve(listen, static_dir, max_upload_mb, common);
    if (*simulate) return cmd_simulate(sim, common);
    if (*eval) return cmd_eval(session_id, gold_path, mapping_path, common);
    if (*exp) return cmd_export(session_id, out_path, common);
    if (*gen) return cmd_generate_corpus(corpus_dir, corpus_seed);
  } catch (const aa::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", aa::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}

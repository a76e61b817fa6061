#include "repositioner/cli/cli.hpp"

#include "repositioner/service/api.hpp"
#include "repositioner/service/evaluate.hpp"
#include "repositioner/service/server.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

namespace repositioner::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<int> g_signal{0};

extern "C" void remember_signal(int sig) { g_signal.store(sig); }

struct Settings {
  std::string config;
  std::string data;
  std::string artifacts;
  std::string model;
  std::string entity;
  std::string host;
  std::string static_dir;
  std::size_t top = 20;
  std::uint64_t seed = 0;
  int port = 0;
  double holdout = 0.1;
  int k = 10;
};

struct Resolved {
  data::KeyValueFile config;
  fs::path data;
  fs::path artifacts;
  std::uint64_t seed = 0;
};

// Flags win over the config file; the environment only supplies a default
// artifact directory.
Resolved resolve(const Settings& s, const CLI::App& sub) {
  Resolved r;
  if (!s.config.empty()) {
    require(fs::exists(s.config), ErrorCode::validation, "config file " + s.config + " does not exist");
    r.config = data::KeyValueFile::load(s.config);
  }
  if (!s.data.empty())
    r.data = s.data;
  else if (auto d = r.config.get("data"))
    r.data = r.config.resolve_path(*d);
  if (!s.artifacts.empty())
    r.artifacts = s.artifacts;
  else if (auto a = r.config.get("artifacts"))
    r.artifacts = r.config.resolve_path(*a);
  else if (const char* env = std::getenv("REPOSITIONER_ARTIFACTS"); env && *env)
    r.artifacts = env;
  else
    r.artifacts = "artifacts";
  if (const CLI::Option* opt = sub.get_option_no_throw("--seed"); opt && opt->count() > 0)
    r.seed = s.seed;
  else if (auto v = r.config.get("seed")) {
    try {
      std::size_t used = 0;
      r.seed = std::stoull(*v, &used);
      require(used == v->size(), ErrorCode::parse, "trailing characters");
    } catch (const std::exception&) {
      fail(ErrorCode::validation, "seed must be a 64-bit unsigned integer, got '" + *v + "'");
    }
  }
  return r;
}

data::Dataset load_data(const Resolved& r) {
  require(!r.data.empty(), ErrorCode::validation, "no data manifest given (use --data or data = ... in --config)");
  require(fs::exists(r.data), ErrorCode::validation, "data manifest " + r.data.string() + " does not exist");
  return data::load_dataset(r.data);
}

std::vector<service::ModelKind> model_list(const std::string& name) {
  if (name == "all") return {service::kAllModelKinds.begin(), service::kAllModelKinds.end()};
  return {service::parse_model_kind(name)};
}

std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_ingest(const Resolved& r, std::ostream& out) {
  const data::Dataset ds = load_data(r);
  for (const auto& [key, value] : data::dataset_counts(ds)) out << key << '\t' << value << '\n';
  out << "fingerprint\t" << ds.fingerprint << '\n';
  return kOk;
}

int cmd_train(const Settings& s, const Resolved& r, std::ostream& out, std::ostream& err) {
  const data::Dataset ds = load_data(r);
  const service::ArtifactStore store(r.artifacts);
  const service::TrainOptions options{r.config, r.seed};
  for (service::ModelKind kind : model_list(s.model)) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = service::train_model(kind, ds, options);
    const service::ArtifactEntry e = store.save(model->bundle());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << "trained " << e.kind << " in " << format_score(secs) << " s\n";
    out << e.kind << '\t' << e.version;
    for (const auto& [file, sum] : e.checksums) out << '\t' << file << '=' << sum;
    out << '\n';
  }
  return kOk;
}

int cmd_predict(const Settings& s, const Resolved& r, std::ostream& out) {
  require(!s.entity.empty(), ErrorCode::validation, "predict needs --entity");
  require(s.top >= 1, ErrorCode::validation, "--top must be at least 1");
  const service::ModelKind kind = service::parse_model_kind(s.model);
  const data::Dataset ds = load_data(r);
  const service::ArtifactStore store(r.artifacts);
  const auto model = service::restore_model(store.load(std::string(service::to_string(kind))), ds);
  const data::EntityRef query =
      data::resolve_entity(ds.directory, s.entity, service::query_kind(service::center_of(kind)));
  const predict::RankedList list = model->rank(query, s.top);
  std::size_t rank = 0;
  for (const auto& e : list.entries)
    out << ++rank << '\t' << e.entity.id << '\t' << e.entity.name << '\t' << format_score(e.score) << '\n';
  return kOk;
}

int cmd_eval(const Settings& s, const Resolved& r, std::ostream& out) {
  const data::Dataset ds = load_data(r);
  const service::TrainOptions options{r.config, r.seed};
  out << "model\theld_out\tqueries\tauroc\thits@" << s.k << '\n';
  for (service::ModelKind kind : model_list(s.model)) {
    const service::EvalReport rep = service::evaluate_holdout(kind, ds, options, s.holdout, s.k);
    out << service::to_string(kind) << '\t' << rep.held_out << '\t' << rep.queries << '\t' << format_score(rep.auroc)
        << '\t' << format_score(rep.hits) << '\n';
  }
  return kOk;
}

int cmd_serve(const Settings& s, const Resolved& r, std::ostream& out, std::ostream& err) {
  auto ds = std::make_shared<const data::Dataset>(load_data(r));
  const service::ArtifactStore store(r.artifacts);
  service::Registry registry(service::load_snapshot(ds, store));
  service::ApiOptions api_options;
  if (auto layers = r.config.get("similarity.layers")) {
    api_options.similarity_layers.clear();
    std::stringstream in(*layers);
    std::string item;
    while (std::getline(in, item, ','))
      if (const auto b = item.find_first_not_of(" \t"); b != std::string::npos)
        api_options.similarity_layers.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  const service::Api api(registry, api_options);
  service::ServerOptions so;
  so.host = !s.host.empty() ? s.host : r.config.get_or("serve.host", "127.0.0.1");
  so.port = s.port != 0 ? s.port : static_cast<int>(r.config.get_int("serve.port", 8080));
  if (!s.static_dir.empty()) so.static_dir = s.static_dir;
  so.log = &out;
  service::HttpServer server(api, so);
  const int port = server.bind();
  err << "serving on http://" << so.host << ':' << port << " with " << registry.current()->models.size()
      << " models\n";

  g_signal.store(0);
  std::signal(SIGINT, remember_signal);
  std::signal(SIGTERM, remember_signal);
  std::signal(SIGHUP, remember_signal);
  std::thread watcher([&] {
    while (true) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      const int sig = g_signal.exchange(0);
      if (sig == SIGHUP) {
        try {
          registry.replace(service::load_snapshot(ds, store));
          err << "reloaded artifacts from " << store.dir().string() << '\n';
        } catch (const std::exception& e) {
          err << "reload failed, keeping the previous models: " << e.what() << '\n';
        }
      } else if (sig == SIGINT || sig == SIGTERM) {
        server.stop();
        return;
      }
    }
  });
  server.run();
  g_signal.store(SIGTERM);
  watcher.join();
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io:
    case ErrorCode::non_finite:
    case ErrorCode::convergence:
    case ErrorCode::checksum: return kRuntimeError;
    default: return kValidationError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Drug repositioning models: data ingestion, training, prediction and serving.", "repositioner");
  app.require_subcommand(1);
  Settings s;
  auto common = [&s](CLI::App* sub) {
    sub->add_option("--config", s.config, "key=value config file (data, artifacts, seed, <model>.<key>)");
    sub->add_option("--data", s.data, "data manifest");
  };
  auto with_artifacts = [&s](CLI::App* sub) {
    sub->add_option("--artifacts", s.artifacts, "artifact directory (default $REPOSITIONER_ARTIFACTS)");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "validate the data manifest and print counts");
  common(ingest);
  CLI::App* train = app.add_subcommand("train", "train a model kind and save a versioned artifact");
  common(train);
  with_artifacts(train);
  train->add_option("--model", s.model, "model kind or 'all'")->required();
  train->add_option("--seed", s.seed, "random seed");
  CLI::App* predict = app.add_subcommand("predict", "rank drugs for a disease or target");
  common(predict);
  with_artifacts(predict);
  predict->add_option("--model", s.model, "model kind")->required();
  predict->add_option("--entity", s.entity, "disease or target id or name")->required();
  predict->add_option("--top", s.top, "number of drugs")->capture_default_str();
  CLI::App* eval = app.add_subcommand("eval", "train on a split and score held-out links");
  common(eval);
  eval->add_option("--model", s.model, "model kind or 'all'")->required();
  eval->add_option("--seed", s.seed, "random seed");
  eval->add_option("--holdout", s.holdout, "fraction of links held out")->capture_default_str();
  eval->add_option("--k", s.k, "cutoff for hits@k")->capture_default_str();
  CLI::App* serve = app.add_subcommand("serve", "serve the HTTP API over trained artifacts");
  common(serve);
  with_artifacts(serve);
  serve->add_option("--port", s.port, "listen port (default serve.port or 8080)");
  serve->add_option("--host", s.host, "listen address (default serve.host or 127.0.0.1)");
  serve->add_option("--static", s.static_dir, "directory served at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kValidationError;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) {
      const Resolved r = resolve(s, *sub);
      const std::string name = sub->get_name();
      if (name == "ingest") return cmd_ingest(r, out);
      if (name == "train") return cmd_train(s, r, out, err);
      if (name == "predict") return cmd_predict(s, r, out);
      if (name == "eval") return cmd_eval(s, r, out);
      if (name == "serve") return cmd_serve(s, r, out, err);
    }
  } catch (const AmbiguousNameError& e) {
    err << "error: " << e.what() << "; candidates:";
    for (const auto& c : e.candidates()) err << ' ' << c;
    err << '\n';
    return kValidationError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kValidationError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace repositioner::cli

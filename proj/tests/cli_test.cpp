#include "repositioner/cli/cli.hpp"

#include "support/fixture_registry.hpp"

#include "httplib.h"
#include "json.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace repositioner;
using json = nlohmann::ordered_json;
using repositioner::testing::trained_fixture;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> fields;
    std::istringstream cells(line);
    for (std::string f; std::getline(cells, f, '\t');) fields.push_back(f);
    out.push_back(fields);
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Data and artifact flags pointing at the trained fixture.
std::vector<std::string> with_fixture(std::vector<std::string> args) {
  const auto& fx = trained_fixture();
  args.insert(args.end(), {"--data", fx.files.manifest.string(), "--artifacts", fx.store.dir().string()});
  return args;
}

}  // namespace

TEST(CliUsage, MissingOrUnknownSubcommandAndFlagsExitOne) {
  EXPECT_EQ(invoke({}).code, cli::kValidationError);
  const Outcome unknown = invoke({"frobnicate"});
  EXPECT_EQ(unknown.code, cli::kValidationError);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(invoke({"ingest", "--no-such-flag"}).code, cli::kValidationError);
  EXPECT_EQ(invoke({"predict", "--model", "diskge"}).code, cli::kValidationError);
  EXPECT_EQ(invoke({"train", "--model", "diskge", "--seed", "not-a-number"}).code, cli::kValidationError);
  const Outcome help = invoke({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  for (const char* sub : {"ingest", "train", "predict", "eval", "serve"})
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
}

TEST(CliIngest, CountsEqualFixtureLedger) {
  const auto& fx = trained_fixture();
  const Outcome r = invoke({"ingest", "--data", fx.files.manifest.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::map<std::string, std::size_t> printed;
  std::string fingerprint;
  for (const auto& row : rows(r.out)) {
    ASSERT_EQ(row.size(), 2u);
    if (row[0] == "fingerprint")
      fingerprint = row[1];
    else
      printed[row[0]] = std::stoul(row[1]);
  }
  EXPECT_EQ(printed, fx.files.ledger);
  EXPECT_EQ(fingerprint, fx.dataset->fingerprint);
}

TEST(CliIngest, ConfigSuppliesDataPathAndBadInputsExitOne) {
  const auto& fx = trained_fixture();
  EXPECT_EQ(invoke({"ingest", "--config", fx.files.config.string()}).code, cli::kOk);
  EXPECT_EQ(invoke({"ingest"}).code, cli::kValidationError);
  EXPECT_EQ(invoke({"ingest", "--data", "/nonexistent/dataset.conf"}).code, cli::kValidationError);
  EXPECT_EQ(invoke({"ingest", "--config", "/nonexistent/train.conf"}).code, cli::kValidationError);

  const fs::path dir = repositioner::testing::scratch_dir("cli-bad-data");
  fixtures::write_service_fixture(dir);
  std::ofstream(dir / "layer_chemical.tsv", std::ios::app) << "DB00001\tDB00002\t-3\n";
  const Outcome bad = invoke({"ingest", "--data", (dir / "dataset.conf").string()});
  EXPECT_EQ(bad.code, cli::kValidationError);
  EXPECT_NE(bad.err.find("negative weight"), std::string::npos) << bad.err;
  EXPECT_TRUE(bad.out.empty());
  fs::remove_all(dir);
}

TEST(CliTrain, RotateTwiceGivesIdenticalChecksums) {
  const auto& fx = trained_fixture();
  const fs::path dir = repositioner::testing::scratch_dir("cli-train");
  const std::vector<std::string> base = {"train", "--config", fx.files.config.string(), "--model", "rotate",
                                         "--seed", "7"};
  auto a = base, b = base;
  a.insert(a.end(), {"--artifacts", (dir / "a").string()});
  b.insert(b.end(), {"--artifacts", (dir / "b").string()});
  const Outcome first = invoke(a), second = invoke(b);
  ASSERT_EQ(first.code, cli::kOk) << first.err;
  ASSERT_EQ(second.code, cli::kOk) << second.err;
  EXPECT_EQ(first.out, second.out);
  const auto fields = rows(first.out).at(0);
  ASSERT_EQ(fields.size(), 4u);
  EXPECT_EQ(fields[0], "diskge");
  EXPECT_EQ(read_file(dir / "a" / "diskge" / fields[1] / "tensors.bin"),
            read_file(dir / "b" / "diskge" / fields[1] / "tensors.bin"));
  EXPECT_EQ(fields[1], fx.snapshot->entry(service::ModelKind::diskge)->version);
  fs::remove_all(dir);
}

TEST(CliPredict, TwentyRowTableForExampleQuery) {
  const Outcome r = invoke(with_fixture({"predict", "--model", "diskge", "--entity", "C0342731", "--top", "20"}));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), 20u);
  for (std::size_t i = 0; i < table.size(); ++i) {
    ASSERT_EQ(table[i].size(), 4u);
    EXPECT_EQ(table[i][0], std::to_string(i + 1));
    EXPECT_EQ(table[i][1].rfind("DB", 0), 0u);
    if (i) {
      EXPECT_GE(std::stod(table[i - 1][3]), std::stod(table[i][3]));
    }
  }
  EXPECT_TRUE(r.err.empty());
}

TEST(CliPredict, OrderingEqualsServiceForEveryModel) {
  const auto& fx = trained_fixture();
  service::Registry registry(fx.snapshot);
  const service::Api api(registry);
  for (service::ModelKind kind : service::kAllModelKinds) {
    const std::string model(service::to_string(kind));
    const std::string entity = service::center_of(kind) == service::Center::disease_centric ? "C0342731" : "NR1H4";
    const Outcome r = invoke(with_fixture({"predict", "--model", model, "--entity", entity, "--top", "30"}));
    ASSERT_EQ(r.code, cli::kOk) << model << ": " << r.err;
    const json body = json::parse(api.predict(
        json{{"center", service::to_string(service::center_of(kind))}, {"model", model}, {"entity", entity}, {"top_n", 30}}
            .dump()).body);
    const auto table = rows(r.out);
    ASSERT_EQ(table.size(), body["results"].size()) << model;
    for (std::size_t i = 0; i < table.size(); ++i) {
      EXPECT_EQ(table[i][1], body["results"][i]["drug"]["id"]) << model << " rank " << i + 1;
      EXPECT_EQ(table[i][2], body["results"][i]["drug"]["name"]);
      EXPECT_NEAR(std::stod(table[i][3]), body["results"][i]["score"].get<double>(),
                  1e-9 * (1.0 + std::abs(body["results"][i]["score"].get<double>())));
    }
  }
}

TEST(CliPredict, NameAndIdFormsAgree) {
  const Outcome by_id = invoke(with_fixture({"predict", "--model", "tarkge", "--entity", "9971"}));
  const Outcome by_name = invoke(with_fixture({"predict", "--model", "tarkge", "--entity", "NR1H4"}));
  ASSERT_EQ(by_id.code, cli::kOk);
  EXPECT_EQ(by_id.out, by_name.out);
  EXPECT_EQ(rows(by_id.out).size(), 20u);
}

TEST(CliPredict, ErrorsMapToExitCodes) {
  const Outcome ambiguous = invoke(with_fixture({"predict", "--model", "hetdr", "--entity", "Periodic fever syndrome"}));
  EXPECT_EQ(ambiguous.code, cli::kValidationError);
  EXPECT_NE(ambiguous.err.find("C9000028 C9000029"), std::string::npos) << ambiguous.err;
  EXPECT_TRUE(ambiguous.out.empty());
  EXPECT_EQ(invoke(with_fixture({"predict", "--model", "diskge", "--entity", "zzz-unknown"})).code,
            cli::kValidationError);
  EXPECT_EQ(invoke(with_fixture({"predict", "--model", "transe", "--entity", "C0342731"})).code, cli::kValidationError);
  EXPECT_EQ(invoke(with_fixture({"predict", "--model", "diskge", "--entity", "C0342731", "--top", "0"})).code,
            cli::kValidationError);

  const auto& fx = trained_fixture();
  const fs::path dir = repositioner::testing::scratch_dir("cli-tamper");
  fs::copy(fx.store.dir(), dir / "artifacts", fs::copy_options::recursive);
  const std::string version = fx.snapshot->entry(service::ModelKind::diskge)->version;
  const fs::path blob = dir / "artifacts" / "diskge" / version / "tensors.bin";
  std::string bytes = read_file(blob);
  bytes[7] = static_cast<char>(bytes[7] ^ 0x10);
  std::ofstream(blob, std::ios::binary) << bytes;
  const Outcome tampered = invoke({"predict", "--data", fx.files.manifest.string(), "--artifacts", (dir / "artifacts").string(),
                            "--model", "diskge", "--entity", "C0342731"});
  EXPECT_EQ(tampered.code, cli::kRuntimeError);
  EXPECT_NE(tampered.err.find("checksum"), std::string::npos) << tampered.err;
  fs::remove_all(dir);
}

TEST(CliConfig, FlagsWinOverConfigWhichWinsOverEnvironment) {
  const auto& fx = trained_fixture();
  const fs::path dir = repositioner::testing::scratch_dir("cli-config");
  std::ofstream(dir / "serve.conf") << "data = " << fx.files.manifest.string() << "\nartifacts = "
                                    << fx.store.dir().string() << "\n";
  std::ofstream(dir / "empty.conf") << "data = " << fx.files.manifest.string() << "\n";
  const std::vector<std::string> query = {"--model", "diskge", "--entity", "C0342731", "--top", "3"};

  auto run_with = [&](std::vector<std::string> args) {
    args.insert(args.end(), query.begin(), query.end());
    return invoke(args);
  };
  EXPECT_EQ(run_with({"predict", "--config", (dir / "serve.conf").string()}).code, cli::kOk);
  EXPECT_EQ(run_with({"predict", "--config", (dir / "serve.conf").string(), "--artifacts", (dir / "none").string()}).code,
            cli::kValidationError);

  ::setenv("REPOSITIONER_ARTIFACTS", fx.store.dir().c_str(), 1);
  EXPECT_EQ(run_with({"predict", "--config", (dir / "empty.conf").string()}).code, cli::kOk);
  ::setenv("REPOSITIONER_ARTIFACTS", (dir / "none").c_str(), 1);
  EXPECT_EQ(run_with({"predict", "--config", (dir / "empty.conf").string()}).code, cli::kValidationError);
  EXPECT_EQ(run_with({"predict", "--config", (dir / "serve.conf").string()}).code, cli::kOk);
  ::unsetenv("REPOSITIONER_ARTIFACTS");

  std::ofstream(dir / "seed.conf") << "data = " << fx.files.manifest.string() << "\nseed = 12abc\n";
  const Outcome bad_seed = invoke({"train", "--config", (dir / "seed.conf").string(), "--model", "aopedf", "--artifacts",
                            (dir / "out").string()});
  EXPECT_EQ(bad_seed.code, cli::kValidationError);
  EXPECT_NE(bad_seed.err.find("seed"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CliEval, PrintsAurocAndHitsForHeldOutLinks) {
  const auto& fx = trained_fixture();
  const Outcome r = invoke({"eval", "--config", fx.files.config.string(), "--model", "hetdr", "--seed", "7", "--k", "5"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0], (std::vector<std::string>{"model", "held_out", "queries", "auroc", "hits@5"}));
  EXPECT_EQ(table[1][0], "hetdr");
  EXPECT_GT(std::stoul(table[1][1]), 0u);
  const double auroc = std::stod(table[1][3]), hits = std::stod(table[1][4]);
  EXPECT_GT(auroc, 0.5);
  EXPECT_LE(auroc, 1.0);
  EXPECT_GE(hits, 0.0);
  EXPECT_LE(hits, 1.0);
  EXPECT_EQ(invoke({"eval", "--config", fx.files.config.string(), "--model", "hetdr", "--holdout", "1.5"}).code,
            cli::kValidationError);
}

TEST(CliServe, ServesReloadsOnHangupAndStopsOnTerm) {
  const auto& fx = trained_fixture();
  const fs::path dir = repositioner::testing::scratch_dir("cli-serve");
  fs::copy(fx.store.dir(), dir / "artifacts", fs::copy_options::recursive);
  const fs::path err_path = dir / "stderr.txt", out_path = dir / "stdout.txt";

  const pid_t pid = ::fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    if (!std::freopen(err_path.c_str(), "w", stderr) || !std::freopen(out_path.c_str(), "w", stdout)) std::_Exit(126);
    ::execl(REPOSITIONER_CLI_PATH, REPOSITIONER_CLI_PATH, "serve", "--data", fx.files.manifest.c_str(), "--artifacts",
            (dir / "artifacts").c_str(), "--port", "0", static_cast<char*>(nullptr));
    std::_Exit(127);
  }

  auto wait_for = [&](const std::string& needle) {
    for (int i = 0; i < 200; ++i) {
      if (read_file(err_path).find(needle) != std::string::npos) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return false;
  };
  ASSERT_TRUE(wait_for("serving on http://127.0.0.1:")) << read_file(err_path);
  const std::string banner = read_file(err_path);
  const auto colon = banner.find(':', banner.find("127.0.0.1"));
  const int port = std::stoi(banner.substr(colon + 1));

  httplib::Client client("127.0.0.1", port);
  const auto before = client.Get("/api/models");
  ASSERT_TRUE(before);
  EXPECT_EQ(before->status, 200);

  // Remove one kind and reload: the swapped snapshot no longer lists it as trained.
  fs::remove_all(dir / "artifacts");
  const service::ArtifactStore reduced(dir / "artifacts");
  reduced.save(fx.snapshot->model(service::ModelKind::tarkge)->bundle());
  ::kill(pid, SIGHUP);
  ASSERT_TRUE(wait_for("reloaded artifacts")) << read_file(err_path);
  const auto after = client.Get("/api/models");
  ASSERT_TRUE(after);
  for (const auto& m : json::parse(after->body)["models"])
    EXPECT_EQ(m["trained"].get<bool>(), m["kind"] == "tarkge") << m.dump();

  ::kill(pid, SIGTERM);
  int status = 0;
  ASSERT_EQ(::waitpid(pid, &status, 0), pid);
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);

  std::istringstream log(read_file(out_path));
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line); ++lines) EXPECT_EQ(json::parse(line)["path"], "/api/models");
  EXPECT_EQ(lines, 2u);
  fs::remove_all(dir);
}

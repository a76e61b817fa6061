#include "repositioner/service/artifact.hpp"

#include "repositioner/hash.hpp"

#include "json.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace repositioner::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTensorMagic = "RPTENSOR1\n";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  require(pos + 8 <= in.size(), ErrorCode::checksum, "tensor blob is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::io, "short write to " + path.string());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json entry_to_json(const ArtifactEntry& e) {
  json checksums = json::object();
  for (const auto& [file, sum] : e.checksums) checksums[file] = sum;
  return {{"kind", e.kind},       {"center", e.center},           {"version", e.version},
          {"created", e.created}, {"fingerprint", e.fingerprint}, {"checksums", checksums}};
}

ArtifactEntry entry_from_json(const json& j) {
  ArtifactEntry e;
  e.kind = j.at("kind").get<std::string>();
  e.center = j.at("center").get<std::string>();
  e.version = j.at("version").get<std::string>();
  e.created = j.at("created").get<std::string>();
  e.fingerprint = j.at("fingerprint").get<std::string>();
  for (const auto& [file, sum] : j.at("checksums").items()) e.checksums.emplace_back(file, sum.get<std::string>());
  return e;
}

}  // namespace

void ModelBundle::put(const std::string& name, Matrix value) {
  for (auto& [n, v] : tensors)
    if (n == name) {
      v = std::move(value);
      return;
    }
  tensors.emplace_back(name, std::move(value));
}

void ModelBundle::put(const std::string& name, std::vector<std::string> value) {
  for (auto& [n, v] : lists)
    if (n == name) {
      v = std::move(value);
      return;
    }
  lists.emplace_back(name, std::move(value));
}

bool ModelBundle::has_tensor(const std::string& name) const {
  for (const auto& [n, v] : tensors)
    if (n == name) return true;
  return false;
}

const Matrix& ModelBundle::tensor(const std::string& name) const {
  for (const auto& [n, v] : tensors)
    if (n == name) return v;
  fail(ErrorCode::not_found, "artifact has no tensor '" + name + "'");
}

const std::vector<std::string>& ModelBundle::list(const std::string& name) const {
  for (const auto& [n, v] : lists)
    if (n == name) return v;
  fail(ErrorCode::not_found, "artifact has no list '" + name + "'");
}

double ModelBundle::scalar(const std::string& name) const {
  const Matrix& m = tensor(name);
  require(m.size() == 1, ErrorCode::validation, "artifact tensor '" + name + "' is not a scalar");
  return m(0, 0);
}

std::string ModelBundle::config_value(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : config)
    if (k == key) return v;
  return fallback;
}

std::string encode_tensors(const ModelBundle& bundle) {
  std::string out(kTensorMagic);
  put_u64(out, bundle.tensors.size());
  for (const auto& [name, m] : bundle.tensors) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
  }
  return out;
}

std::string encode_meta(const ModelBundle& bundle) {
  json config = json::array();
  for (const auto& [k, v] : bundle.config) config.push_back({k, v});
  json lists = json::array();
  for (const auto& [name, items] : bundle.lists) lists.push_back({{"name", name}, {"items", items}});
  const json meta = {{"format", 1},   {"kind", bundle.kind},   {"center", bundle.center},
                     {"fingerprint", bundle.fingerprint}, {"config", config}, {"lists", lists}};
  return meta.dump(2) + "\n";
}

ModelBundle decode_bundle(const std::string& meta_text, const std::string& tensors) {
  ModelBundle b;
  json meta;
  try {
    meta = json::parse(meta_text);
    b.kind = meta.at("kind").get<std::string>();
    b.center = meta.at("center").get<std::string>();
    b.fingerprint = meta.at("fingerprint").get<std::string>();
    for (const auto& kv : meta.at("config")) b.config.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    for (const auto& l : meta.at("lists"))
      b.lists.emplace_back(l.at("name").get<std::string>(), l.at("items").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("malformed artifact metadata: ") + e.what());
  }
  require(tensors.compare(0, kTensorMagic.size(), kTensorMagic) == 0, ErrorCode::parse, "not a tensor blob");
  std::size_t pos = kTensorMagic.size();
  const std::uint64_t count = get_u64(tensors, pos);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = get_u64(tensors, pos);
    require(pos + len <= tensors.size(), ErrorCode::checksum, "tensor blob is truncated");
    std::string name = tensors.substr(pos, len);
    pos += len;
    const auto rows = static_cast<Index>(get_u64(tensors, pos));
    const auto cols = static_cast<Index>(get_u64(tensors, pos));
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = std::bit_cast<double>(get_u64(tensors, pos));
    b.tensors.emplace_back(std::move(name), std::move(m));
  }
  require(pos == tensors.size(), ErrorCode::parse, "trailing bytes in tensor blob");
  return b;
}

ArtifactEntry ArtifactStore::save(const ModelBundle& bundle) const {
  const std::string tensors = encode_tensors(bundle);
  const std::string meta = encode_meta(bundle);
  ArtifactEntry entry;
  entry.kind = bundle.kind;
  entry.center = bundle.center;
  entry.fingerprint = bundle.fingerprint;
  entry.created = utc_now();
  entry.checksums = {{"meta.json", sha256_hex(meta)}, {"tensors.bin", sha256_hex(tensors)}};
  entry.version = sha256_hex(entry.checksums[0].second + entry.checksums[1].second).substr(0, 16);

  const fs::path target = dir_ / entry.kind / entry.version;
  std::error_code ec;
  fs::create_directories(target, ec);
  require(!ec, ErrorCode::io, "cannot create " + target.string() + ": " + ec.message());
  write_bytes(target / "meta.json", meta);
  write_bytes(target / "tensors.bin", tensors);

  std::vector<ArtifactEntry> all = entries();
  std::erase_if(all, [&](const ArtifactEntry& e) { return e.kind == entry.kind && e.version == entry.version; });
  all.push_back(entry);
  json manifest = {{"format", 1}, {"artifacts", json::array()}};
  for (const auto& e : all) manifest["artifacts"].push_back(entry_to_json(e));
  write_bytes(dir_ / "manifest.json", manifest.dump(2) + "\n");
  return entry;
}

std::vector<ArtifactEntry> ArtifactStore::entries() const {
  const fs::path path = dir_ / "manifest.json";
  if (!fs::exists(path)) return {};
  std::vector<ArtifactEntry> out;
  try {
    const json manifest = json::parse(read_bytes(path));
    for (const auto& e : manifest.at("artifacts")) out.push_back(entry_from_json(e));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "malformed artifact manifest " + path.string() + ": " + e.what());
  }
  return out;
}

ArtifactEntry ArtifactStore::latest(const std::string& kind) const {
  const auto all = entries();
  for (auto it = all.rbegin(); it != all.rend(); ++it)
    if (it->kind == kind) return *it;
  fail(ErrorCode::not_found, "no trained artifact for model '" + kind + "' in " + dir_.string());
}

ArtifactEntry ArtifactStore::find(const std::string& kind, const std::string& version) const {
  for (const auto& e : entries())
    if (e.kind == kind && e.version == version) return e;
  fail(ErrorCode::not_found, "unknown version '" + version + "' of model '" + kind + "'");
}

ModelBundle ArtifactStore::load(const std::string& kind, const std::string& version) const {
  const ArtifactEntry entry = version.empty() ? latest(kind) : find(kind, version);
  const fs::path base = dir_ / entry.kind / entry.version;
  std::string meta, tensors;
  for (const auto& [file, sum] : entry.checksums) {
    std::string bytes = read_bytes(base / file);
    require(sha256_hex(bytes) == sum, ErrorCode::checksum,
            "checksum mismatch for " + (base / file).string() + " (artifact is corrupt)");
    if (file == "meta.json") meta = std::move(bytes);
    if (file == "tensors.bin") tensors = std::move(bytes);
  }
  ModelBundle bundle = decode_bundle(meta, tensors);
  require(bundle.kind == entry.kind && bundle.fingerprint == entry.fingerprint, ErrorCode::checksum,
          "artifact metadata disagrees with the manifest entry");
  return bundle;
}

}  // namespace repositioner::service

#include "topemb/embed_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "topemb/error.hpp"

namespace topemb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'O', 'P', 'E'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

std::vector<unsigned char> slurp(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PayloadHeader parse_header(const std::vector<unsigned char>& bytes, const fs::path& path) {
  if (bytes.size() < kPayloadHeaderBytes)
    throw Error(ErrorCode::CorruptPayload, "truncated header: " + path.string());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
    throw Error(ErrorCode::CorruptPayload, "bad magic: " + path.string());
  PayloadHeader h;
  h.version = get_le<std::uint32_t>(bytes.data() + 4);
  h.d = get_le<std::uint32_t>(bytes.data() + 8);
  h.n = get_le<std::uint64_t>(bytes.data() + 12);
  if (h.version != kPayloadVersion)
    throw Error(ErrorCode::CorruptPayload,
                "unsupported payload version " + std::to_string(h.version));
  return h;
}

}  // namespace

EmbeddingSet make_set(Matrix vectors, std::string modality) {
  EmbeddingSet set;
  set.ids.resize(vectors.rows());
  for (std::size_t i = 0; i < set.ids.size(); ++i) set.ids[i] = static_cast<std::int64_t>(i);
  set.vectors = std::move(vectors);
  set.modality = std::move(modality);
  validate(set);
  return set;
}

void validate(const EmbeddingSet& set) {
  if (set.count() < 1) throw Error(ErrorCode::InvalidArgument, "embedding set must have N >= 1");
  if (set.dim() < 2) throw Error(ErrorCode::InvalidArgument, "embedding set must have D >= 2");
  if (set.ids.size() != set.count())
    throw Error(ErrorCode::InvalidArgument, "ids must match row count");
  for (std::size_t i = 1; i < set.ids.size(); ++i)
    if (set.ids[i] <= set.ids[i - 1])
      throw Error(ErrorCode::InvalidArgument, "ids must be unique and ascending");
  if (!set.row_modality.empty() && set.row_modality.size() != set.count())
    throw Error(ErrorCode::InvalidArgument, "row modality tags must match row count");
}

PairedDataset make_paired(EmbeddingSet a, EmbeddingSet b, std::string name) {
  validate(a);
  validate(b);
  if (a.count() != b.count() || a.dim() != b.dim())
    throw Error(ErrorCode::HeaderMismatch, "paired sets differ in N or D");
  if (a.ids != b.ids) throw Error(ErrorCode::HeaderMismatch, "paired sets have misaligned ids");
  return PairedDataset{std::move(a), std::move(b), std::move(name)};
}

Manifest read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "no such manifest: " + path.string());
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("manifest does not parse: ") + e.what());
  }
  Manifest m;
  try {
    m.version = j.at("version").get<int>();
    m.name = j.value("name", std::string{});
    m.notes = j.value("notes", std::string{});
    for (const auto& s : j.at("sets")) {
      ManifestEntry e;
      e.path = s.at("path").get<std::string>();
      e.modality = s.at("modality").get<std::string>();
      e.n = s.at("n").get<std::uint64_t>();
      e.d = s.at("d").get<std::uint32_t>();
      e.normalized = s.value("normalized", true);
      m.sets.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("manifest field error: ") + e.what());
  }
  if (m.version != 1)
    throw Error(ErrorCode::InvalidManifest, "unsupported manifest version " + std::to_string(m.version));
  return m;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  json j;
  j["version"] = manifest.version;
  j["name"] = manifest.name;
  if (!manifest.notes.empty()) j["notes"] = manifest.notes;
  j["sets"] = json::array();
  for (const auto& e : manifest.sets) {
    j["sets"].push_back({{"path", e.path},
                         {"modality", e.modality},
                         {"n", e.n},
                         {"d", e.d},
                         {"normalized", e.normalized}});
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

PayloadHeader read_payload_header(const fs::path& path) {
  return parse_header(slurp(path), path);
}

Matrix read_payload(const fs::path& path) {
  const auto bytes = slurp(path);
  const PayloadHeader h = parse_header(bytes, path);
  const std::uint64_t values = h.n * h.d;
  const std::uint64_t expected = kPayloadHeaderBytes + values * 4;
  if (bytes.size() != expected)
    throw Error(ErrorCode::CorruptPayload,
                path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(bytes.size()));
  std::vector<double> data(values);
  const unsigned char* p = bytes.data() + kPayloadHeaderBytes;
  for (std::uint64_t i = 0; i < values; ++i, p += 4) {
    const float f = std::bit_cast<float>(get_le<std::uint32_t>(p));
    if (!std::isfinite(f))
      throw Error(ErrorCode::CorruptPayload, path.string() + ": non-finite value");
    data[i] = static_cast<double>(f);
  }
  return Matrix(h.n, h.d, std::move(data));
}

void write_payload(const fs::path& path, const Matrix& vectors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kPayloadVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vectors.cols()));
  put_le<std::uint64_t>(out, vectors.rows());
  for (double v : vectors.data())
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

PairedDataset load_dataset(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  if (m.sets.size() != 2)
    throw Error(ErrorCode::InvalidManifest, "a paired dataset needs exactly 2 sets");
  const fs::path base = manifest_path.parent_path();
  std::vector<EmbeddingSet> sets;
  for (const auto& e : m.sets) {
    const fs::path file = base / e.path;
    const auto header = read_payload_header(file);
    if (header.n != e.n || header.d != e.d)
      throw Error(ErrorCode::HeaderMismatch,
                  file.string() + ": header (n=" + std::to_string(header.n) +
                      ", d=" + std::to_string(header.d) + ") disagrees with manifest (n=" +
                      std::to_string(e.n) + ", d=" + std::to_string(e.d) + ")");
    Matrix vectors = read_payload(file);
    if (e.normalized) normalize_rows(vectors);
    sets.push_back(make_set(std::move(vectors), e.modality));
  }
  return make_paired(std::move(sets[0]), std::move(sets[1]), m.name);
}

fs::path save_dataset(const PairedDataset& ds, const fs::path& dir, bool normalize_on_load,
                      const std::string& notes) {
  fs::create_directories(dir);
  const std::string stem = ds.name.empty() ? std::string("dataset") : ds.name;
  Manifest m;
  m.name = ds.name;
  m.notes = notes;
  const std::array<const EmbeddingSet*, 2> sets = {&ds.a, &ds.b};
  const std::array<const char*, 2> suffix = {"_a.tope", "_b.tope"};
  for (std::size_t s = 0; s < 2; ++s) {
    const std::string file = stem + suffix[s];
    write_payload(dir / file, sets[s]->vectors);
    m.sets.push_back({file, sets[s]->modality, sets[s]->count(),
                      static_cast<std::uint32_t>(sets[s]->dim()), normalize_on_load});
  }
  const fs::path manifest = dir / "manifest.json";
  write_manifest(m, manifest);
  return manifest;
}

void normalize_rows(Matrix& vectors) {
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    auto row = vectors.row(r);
    const double n = norm(row);
    if (!(n >= kZeroNormThreshold))
      throw Error(ErrorCode::ZeroVector, "row " + std::to_string(r) + " has norm " + std::to_string(n));
    if (std::abs(n - 1.0) <= kUnitTolerance) continue;
    for (double& v : row) v /= n;
  }
}

EmbeddingSet normalize(const EmbeddingSet& set) {
  EmbeddingSet out = set;
  normalize_rows(out.vectors);
  return out;
}

EmbeddingSet concat_modalities(const PairedDataset& ds) {
  EmbeddingSet out;
  out.vectors = vstack(ds.a.vectors, ds.b.vectors);
  out.modality = ds.a.modality + "+" + ds.b.modality;
  const std::size_t n = ds.count();
  out.ids.resize(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) out.ids[i] = static_cast<std::int64_t>(i);
  out.row_modality.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) out.row_modality.push_back(ds.a.modality_of(i));
  for (std::size_t i = 0; i < n; ++i) out.row_modality.push_back(ds.b.modality_of(i));
  return out;
}

void round_to_storage(Matrix& vectors) {
  for (double& v : vectors.data()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace topemb

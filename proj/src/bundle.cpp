// SPDX-License-Identifier: Apache-2.0

#include "artrip/bundle.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "artrip/csv.hpp"
#include "artrip/error.hpp"

namespace artrip {

namespace {

constexpr std::string_view kMagic = "ARTRIPB1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error("bundle: truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

void put_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

Matrix read_matrix(Reader& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = in.f64();
  }
  return m;
}

}  // namespace

std::uint64_t vocab_hash(const std::vector<std::int64_t>& ids) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::int64_t id : ids) {
    const auto u = static_cast<std::uint64_t>(id);
    for (int i = 0; i < 8; ++i) {
      h ^= (u >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string serialize_bundle(const ModelBundle& b) {
  const ModelParams& p = b.params;
  if (static_cast<int>(b.vocab_ids.size()) != p.num_pois) throw Error("bundle: vocabulary size mismatch");
  if (b.guidance.num_pois() != p.num_pois || static_cast<int>(b.guidance.poi_totals.size()) != p.num_pois ||
      static_cast<int>(b.confidence.values.size()) != b.guidance.m_max) {
    throw Error("bundle: guidance shape mismatch");
  }

  std::ostringstream m;
  m << "format=artrip-bundle-1\n";
  m << "arch=" << to_string(b.config.arch) << "\n";
  m << "embed_dim=" << b.config.embed_dim << "\n";
  m << "num_layers=" << b.config.num_layers << "\n";
  m << "num_heads=" << b.config.num_heads << "\n";
  m << "hidden_dim=" << b.config.hidden_dim << "\n";
  m << "alpha=" << csv::format_double(b.config.alpha) << "\n";
  m << "learning_rate=" << csv::format_double(b.config.learning_rate) << "\n";
  m << "epochs=" << b.config.epochs << "\n";
  m << "seed=" << b.config.seed << "\n";
  m << "split_seed=" << b.split_seed << "\n";
  m << "guiding=" << (b.guiding ? 1 : 0) << "\n";
  m << "drifting=" << (b.drifting ? 1 : 0) << "\n";
  m << "num_pois=" << p.num_pois << "\n";
  m << "m_max=" << p.m_max << "\n";
  m << "guidance_m_max=" << b.guidance.m_max << "\n";
  m << "vocab_hash=" << hex64(vocab_hash(b.vocab_ids)) << "\n";
  for (const auto& blk : p.blocks) m << "block=" << blk.name << " " << blk.value.rows() << " " << blk.value.cols() << "\n";
  const std::string manifest = m.str();

  std::string out(kMagic);
  put_u64(out, manifest.size());
  out += manifest;
  for (std::int64_t id : b.vocab_ids) put_u64(out, static_cast<std::uint64_t>(id));
  for (const auto& blk : p.blocks) put_matrix(out, blk.value);
  put_matrix(out, b.guidance.values);
  for (double f : b.guidance.poi_totals) put_f64(out, f);
  for (double c : b.confidence.values) put_f64(out, c);
  return out;
}

ModelBundle parse_bundle(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) throw Error("bundle: bad magic");
  const std::uint64_t manifest_size = in.u64();
  const std::string manifest(in.take(manifest_size));

  std::map<std::string, std::string> kv;
  struct BlockShape {
    std::string name;
    Eigen::Index rows, cols;
  };
  std::vector<BlockShape> shapes;
  std::istringstream lines(manifest);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("bundle: malformed manifest line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "block") {
      std::istringstream ss(value);
      BlockShape s;
      if (!(ss >> s.name >> s.rows >> s.cols)) throw Error("bundle: malformed block line '" + line + "'");
      shapes.push_back(s);
    } else {
      kv[key] = value;
    }
  }
  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("bundle: manifest missing '" + key + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& key) {
    auto v = csv::parse_int(get(key));
    if (!v) throw Error("bundle: bad integer for '" + key + "'");
    return *v;
  };
  auto get_double = [&](const std::string& key) {
    auto v = csv::parse_double(get(key));
    if (!v) throw Error("bundle: bad number for '" + key + "'");
    return *v;
  };
  if (get("format") != "artrip-bundle-1") throw Error("bundle: unsupported format");

  ModelBundle b;
  b.config.arch = parse_arch(get("arch"));
  b.config.embed_dim = static_cast<int>(get_int("embed_dim"));
  b.config.num_layers = static_cast<int>(get_int("num_layers"));
  b.config.num_heads = static_cast<int>(get_int("num_heads"));
  b.config.hidden_dim = static_cast<int>(get_int("hidden_dim"));
  b.config.alpha = get_double("alpha");
  b.config.learning_rate = get_double("learning_rate");
  b.config.epochs = static_cast<int>(get_int("epochs"));
  b.config.seed = std::stoull(get("seed"));
  b.split_seed = std::stoull(get("split_seed"));
  b.guiding = get_int("guiding") != 0;
  b.drifting = get_int("drifting") != 0;

  const int k = static_cast<int>(get_int("num_pois"));
  const int m_max = static_cast<int>(get_int("m_max"));
  const int g_max = static_cast<int>(get_int("guidance_m_max"));
  if (k <= 0 || m_max <= 0 || g_max < 0) throw Error("bundle: bad dimensions");

  b.vocab_ids.reserve(k);
  for (int i = 0; i < k; ++i) b.vocab_ids.push_back(static_cast<std::int64_t>(in.u64()));
  if (hex64(vocab_hash(b.vocab_ids)) != get("vocab_hash")) throw Error("bundle: vocabulary hash mismatch");

  ModelParams& p = b.params;
  p.arch = b.config.arch;
  p.num_pois = k;
  p.m_max = m_max;
  p.embed_dim = b.config.embed_dim;
  p.num_layers = b.config.arch == Arch::kOneShotEncoder ? b.config.num_layers : 0;
  p.num_heads = b.config.num_heads;
  p.hidden_dim = b.config.hidden_dim;
  for (const auto& s : shapes) p.blocks.push_back({s.name, read_matrix(in, s.rows, s.cols)});

  // The block list must match what this build would create for the config.
  const ModelParams expected = init_params(b.config, k, m_max);
  if (expected.blocks.size() != p.blocks.size()) throw Error("bundle: parameter layout mismatch");
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    if (expected.blocks[i].name != p.blocks[i].name || expected.blocks[i].value.rows() != p.blocks[i].value.rows() ||
        expected.blocks[i].value.cols() != p.blocks[i].value.cols()) {
      throw Error("bundle: parameter block '" + p.blocks[i].name + "' does not match the config");
    }
  }

  b.guidance.m_max = g_max;
  b.guidance.values = read_matrix(in, k, g_max);
  b.guidance.poi_totals.resize(k);
  for (double& f : b.guidance.poi_totals) f = in.f64();
  b.confidence.values.resize(g_max);
  for (double& c : b.confidence.values) c = in.f64();
  if (!in.done()) throw Error("bundle: trailing bytes");
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  csv::write_file(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(csv::read_file(path)); }

}  // namespace artrip

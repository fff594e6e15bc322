#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gnnsafe/errors.hpp"
#include "gnnsafe/graph.hpp"

namespace gnnsafe {

namespace detail {

// On-disk numeric payloads are little-endian; this code assumes a
// little-endian host (checked once at load time).
inline void require_little_endian() {
  const std::uint32_t probe = 1;
  unsigned char b;
  std::memcpy(&b, &probe, 1);
  if (b != 1) throw FormatError("big-endian hosts are not supported");
}

template <typename T>
std::vector<T> read_binary(const std::filesystem::path& path, std::size_t expected_count,
                           const std::string& what) {
  require_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open " + what);
  std::vector<T> out(expected_count);
  in.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(expected_count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != expected_count * sizeof(T))
    throw FormatError(path.string() + ": " + what + " shorter than advertised");
  char extra;
  if (in.read(&extra, 1))
    throw FormatError(path.string() + ": " + what + " longer than advertised");
  return out;
}

template <typename T>
void write_binary(const std::filesystem::path& path, const std::vector<T>& data) {
  require_little_endian();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

inline nlohmann::ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

template <typename T>
T json_field(const nlohmann::ordered_json& j, const std::string& field,
             const std::string& file) {
  if (!j.contains(field)) throw FormatError(file + ": missing field '" + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(file + ": field '" + field + "' has the wrong type");
  }
}

inline std::vector<std::size_t> json_index_list(const nlohmann::ordered_json& j,
                                                const std::string& field,
                                                const std::string& file) {
  const auto raw = json_field<std::vector<std::int64_t>>(j, field, file);
  std::vector<std::size_t> out;
  out.reserve(raw.size());
  for (const std::int64_t v : raw) {
    if (v < 0) throw FormatError(file + ": field '" + field + "' contains a negative index");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace detail

/// Loads a dataset directory: meta.json, edges.tsv, features.bin, labels.bin.
/// Edges are symmetrized and de-duplicated; self-loops are dropped; 32-bit
/// feature floats widen to 64-bit.
inline Graph load_graph(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  const nlohmann::ordered_json meta = detail::read_json(meta_path);
  Graph g;
  const auto get_count = [&](const char* field) {
    const auto v = detail::json_field<std::int64_t>(meta, field, meta_path.string());
    if (v < 0) throw FormatError(meta_path.string() + ": field '" + std::string(field) +
                                 "' is negative");
    return static_cast<std::size_t>(v);
  };
  g.num_nodes = get_count("num_nodes");
  const std::size_t num_features = get_count("num_features");
  g.num_classes = get_count("num_classes");
  g.name = detail::json_field<std::string>(meta, "name", meta_path.string());

  const auto edges_path = dir / "edges.tsv";
  std::ifstream edges_in(edges_path);
  if (!edges_in) throw FormatError(edges_path.string() + ": cannot open");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(edges_in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::int64_t src = -1, dst = -1;
    if (!(ls >> src >> dst) || src < 0 || dst < 0)
      throw FormatError(edges_path.string() + ": malformed edge at line " +
                        std::to_string(lineno));
    if (static_cast<std::size_t>(src) >= g.num_nodes ||
        static_cast<std::size_t>(dst) >= g.num_nodes)
      throw FormatError(edges_path.string() + ": node id out of range at line " +
                        std::to_string(lineno));
    edges.emplace_back(static_cast<std::size_t>(src), static_cast<std::size_t>(dst));
  }
  g.adjacency = build_adjacency(g.num_nodes, edges);

  const std::vector<float> feat32 =
      detail::read_binary<float>(dir / "features.bin", g.num_nodes * num_features, "features.bin");
  g.features = DenseMatrix(g.num_nodes, num_features);
  for (std::size_t i = 0; i < feat32.size(); ++i)
    g.features.data()[i] = static_cast<double>(feat32[i]);

  const auto labels_path = dir / "labels.bin";
  g.labels = detail::read_binary<std::int32_t>(labels_path, g.num_nodes, "labels.bin");
  for (const std::int32_t y : g.labels)
    if (y < -1 || y >= static_cast<std::int32_t>(g.num_classes))
      throw FormatError(labels_path.string() + ": label out of range [-1, num_classes)");

  g.validate();
  return g;
}

/// Writes a dataset directory; load_graph inverts it exactly provided the
/// feature values are representable in 32-bit floats.
inline void save_graph(const Graph& g, const std::filesystem::path& dir) {
  g.validate();
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["num_nodes"] = g.num_nodes;
  meta["num_features"] = g.num_features();
  meta["num_classes"] = g.num_classes;
  meta["name"] = g.name;
  detail::write_json(dir / "meta.json", meta);

  std::ofstream edges_out(dir / "edges.tsv", std::ios::trunc);
  if (!edges_out) throw std::runtime_error((dir / "edges.tsv").string() + ": cannot open for writing");
  for (const auto& [s, d] : edge_list(g.adjacency)) edges_out << s << "\t" << d << "\n";
  if (!edges_out.flush()) throw std::runtime_error((dir / "edges.tsv").string() + ": write failed");

  std::vector<float> feat32(g.features.size());
  for (std::size_t i = 0; i < feat32.size(); ++i)
    feat32[i] = static_cast<float>(g.features.data()[i]);
  detail::write_binary(dir / "features.bin", feat32);
  detail::write_binary(dir / "labels.bin", g.labels);
}

inline Splits load_splits(const std::filesystem::path& path) {
  const nlohmann::ordered_json j = detail::read_json(path);
  Splits s;
  s.train = detail::json_index_list(j, "train", path.string());
  s.valid = detail::json_index_list(j, "valid", path.string());
  s.test = detail::json_index_list(j, "test", path.string());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline void save_splits(const Splits& s, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["train"] = s.train;
  j["valid"] = s.valid;
  j["test"] = s.test;
  detail::write_json(path, j);
}

/// Benchmark directory layout: dataset subdirectories plus benchmark.json
/// naming the role of each ("id", "ood_test[i]", "ood_exposure") and the ood
/// masks. Units may reference the id subdirectory (label leave-out shares the
/// graph); referenced directories are loaded once and shared.
inline void save_benchmark(const Benchmark& b, const std::filesystem::path& dir) {
  b.validate();
  std::filesystem::create_directories(dir);
  std::map<const Graph*, std::string> where;
  save_graph(*b.id_graph, dir / "id");
  save_splits(b.splits, dir / "id" / "splits.json");
  where[b.id_graph.get()] = "id";

  nlohmann::ordered_json manifest;
  manifest["id"] = "id";
  manifest["ood_test"] = nlohmann::ordered_json::array();
  for (std::size_t u = 0; u < b.ood_test.size(); ++u) {
    const OODUnit& unit = b.ood_test[u];
    std::string sub;
    if (auto it = where.find(unit.graph.get()); it != where.end()) {
      sub = it->second;
    } else {
      sub = "ood_test_" + std::to_string(u);
      save_graph(*unit.graph, dir / sub);
      where[unit.graph.get()] = sub;
    }
    nlohmann::ordered_json entry;
    entry["dir"] = sub;
    entry["mask"] = unit.ood_mask;
    manifest["ood_test"].push_back(entry);
  }
  if (b.ood_exposure) {
    std::string sub;
    if (auto it = where.find(b.ood_exposure->graph.get()); it != where.end()) {
      sub = it->second;
    } else {
      sub = "ood_exposure";
      save_graph(*b.ood_exposure->graph, dir / sub);
    }
    nlohmann::ordered_json entry;
    entry["dir"] = sub;
    entry["mask"] = b.ood_exposure->ood_mask;
    manifest["ood_exposure"] = entry;
  }
  if (!b.class_remap.empty()) manifest["class_remap"] = b.class_remap;
  detail::write_json(dir / "benchmark.json", manifest);
}

inline Benchmark load_benchmark(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "benchmark.json";
  const nlohmann::ordered_json manifest = detail::read_json(manifest_path);
  std::map<std::string, std::shared_ptr<const Graph>> cache;
  const auto graph_at = [&](const std::string& sub) {
    if (auto it = cache.find(sub); it != cache.end()) return it->second;
    auto g = std::make_shared<const Graph>(load_graph(dir / sub));
    cache[sub] = g;
    return std::static_pointer_cast<const Graph>(g);
  };

  Benchmark b;
  const auto id_sub =
      detail::json_field<std::string>(manifest, "id", manifest_path.string());
  b.id_graph = graph_at(id_sub);
  b.splits = load_splits(dir / id_sub / "splits.json");

  if (!manifest.contains("ood_test") || !manifest["ood_test"].is_array())
    throw FormatError(manifest_path.string() + ": missing field 'ood_test'");
  for (const auto& entry : manifest["ood_test"]) {
    OODUnit u;
    u.graph = graph_at(detail::json_field<std::string>(entry, "dir", manifest_path.string()));
    u.ood_mask = detail::json_index_list(entry, "mask", manifest_path.string());
    std::sort(u.ood_mask.begin(), u.ood_mask.end());
    b.ood_test.push_back(std::move(u));
  }
  if (manifest.contains("ood_exposure")) {
    const auto& entry = manifest["ood_exposure"];
    OODUnit u;
    u.graph = graph_at(detail::json_field<std::string>(entry, "dir", manifest_path.string()));
    u.ood_mask = detail::json_index_list(entry, "mask", manifest_path.string());
    std::sort(u.ood_mask.begin(), u.ood_mask.end());
    b.ood_exposure = std::move(u);
  }
  if (manifest.contains("class_remap"))
    b.class_remap = detail::json_field<std::vector<std::int32_t>>(manifest, "class_remap",
                                                                  manifest_path.string());
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return b;
}

}  // namespace gnnsafe

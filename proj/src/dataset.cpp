#include "redress/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace redress {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* parse_double(const char* p, const char* end, double& out, const std::string& file,
                         std::size_t line) {
  auto [ptr, ec] = std::from_chars(p, end, out);
  if (ec != std::errc()) {
    throw DataError(file + ":" + std::to_string(line) + ": malformed number");
  }
  return ptr;
}

}  // namespace

Dataset load_dataset(const std::string& directory) {
  namespace fs = std::filesystem;
  const std::string edges_path = (fs::path(directory) / "edges.tsv").string();
  const std::string feats_path = (fs::path(directory) / "features.csv").string();
  const std::string meta_path = (fs::path(directory) / "meta.json").string();

  Dataset d;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
    d.meta.nodes = meta.at("nodes").get<std::size_t>();
    d.meta.edges = meta.at("edges").get<std::size_t>();
    d.meta.features = meta.at("features").get<std::size_t>();
    d.meta.name = meta.at("name").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(meta_path + ": " + e.what());
  }

  // features.csv: one comma-separated row per node.
  {
    const std::string text = read_file(feats_path);
    std::vector<double> values;
    std::size_t rows = 0, cols = 0, line = 1;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
      const char* eol = static_cast<const char*>(memchr(p, '\n', end - p));
      if (eol == nullptr) eol = end;
      if (eol > p) {
        std::size_t row_cols = 0;
        while (p < eol) {
          double v;
          p = parse_double(p, eol, v, feats_path, line);
          values.push_back(v);
          ++row_cols;
          if (p < eol) {
            if (*p != ',') throw DataError(feats_path + ":" + std::to_string(line) +
                                           ": expected ','");
            ++p;
          }
        }
        if (cols == 0) {
          cols = row_cols;
        } else if (row_cols != cols) {
          throw DataError(feats_path + ":" + std::to_string(line) + ": ragged row, expected " +
                          std::to_string(cols) + " values, got " + std::to_string(row_cols));
        }
        ++rows;
      }
      p = eol + 1;
      ++line;
    }
    if (rows == 0 || cols == 0) throw DataError(feats_path + ": empty feature matrix");
    d.features.rows = rows;
    d.features.cols = cols;
    d.features.values = std::move(values);
  }

  // edges.tsv: "u<TAB>v" per line, 0-indexed, undirected.
  EdgeList edges;
  {
    const std::string text = read_file(edges_path);
    const char* p = text.data();
    const char* end = p + text.size();
    std::size_t line = 1;
    while (p < end) {
      const char* eol = static_cast<const char*>(memchr(p, '\n', end - p));
      if (eol == nullptr) eol = end;
      if (eol > p) {
        std::uint32_t u, v;
        auto r1 = std::from_chars(p, eol, u);
        if (r1.ec != std::errc() || r1.ptr >= eol || *r1.ptr != '\t') {
          throw DataError(edges_path + ":" + std::to_string(line) + ": expected 'u<TAB>v'");
        }
        auto r2 = std::from_chars(r1.ptr + 1, eol, v);
        if (r2.ec != std::errc()) {
          throw DataError(edges_path + ":" + std::to_string(line) + ": expected 'u<TAB>v'");
        }
        if (u >= d.features.rows || v >= d.features.rows) {
          throw DataError(edges_path + ":" + std::to_string(line) + ": node id out of range");
        }
        if (u == v) {
          throw DataError(edges_path + ":" + std::to_string(line) + ": self-loop");
        }
        edges.push_back({u, v});
      }
      p = eol + 1;
      ++line;
    }
  }

  d.graph = Graph::from_edges(d.features.rows, edges);

  if (d.meta.nodes != d.features.rows) {
    throw DataError(meta_path + ": node count " + std::to_string(d.meta.nodes) +
                    " does not match features.csv rows " + std::to_string(d.features.rows));
  }
  if (d.meta.features != d.features.cols) {
    throw DataError(meta_path + ": feature count " + std::to_string(d.meta.features) +
                    " does not match features.csv columns " + std::to_string(d.features.cols));
  }
  if (d.meta.edges != d.graph.edge_count()) {
    throw DataError(meta_path + ": edge count " + std::to_string(d.meta.edges) +
                    " does not match deduplicated edges.tsv (" +
                    std::to_string(d.graph.edge_count()) + ")");
  }
  return d;
}

void save_dataset(const std::string& directory, const Dataset& d) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  {
    std::ofstream out(fs::path(directory) / "edges.tsv");
    for (const Edge& e : d.graph.undirected_edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out(fs::path(directory) / "features.csv");
    char buf[64];
    std::string linebuf;
    for (std::size_t i = 0; i < d.features.rows; ++i) {
      linebuf.clear();
      for (std::size_t j = 0; j < d.features.cols; ++j) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d.features.at(i, j));
        if (j > 0) linebuf.push_back(',');
        linebuf.append(buf, ptr);
      }
      linebuf.push_back('\n');
      out << linebuf;
    }
  }
  {
    nlohmann::json meta = {{"nodes", d.meta.nodes},
                           {"edges", d.meta.edges},
                           {"features", d.meta.features},
                           {"name", d.meta.name}};
    std::ofstream out(fs::path(directory) / "meta.json");
    out << meta.dump(2) << '\n';
  }
}

}  // namespace redress

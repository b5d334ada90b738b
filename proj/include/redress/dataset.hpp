#pragma once

#include <string>

#include "redress/graph.hpp"
#include "redress/matrix.hpp"

namespace redress {

struct DatasetMeta {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t features = 0;
  std::string name;
};

struct Dataset {
  Graph graph;
  DenseMatrix features;  // |V| x d, row i = node i
  DatasetMeta meta;
};

// Reads edges.tsv / features.csv / meta.json from a directory. Duplicate
// undirected edges in the file are collapsed; the loader validates meta.json
// counts against the parsed content. Throws DataError with the offending
// line number on malformed input.
Dataset load_dataset(const std::string& directory);

// Writes the same three files. load(save(d)) is identity.
void save_dataset(const std::string& directory, const Dataset& d);

}  // namespace redress

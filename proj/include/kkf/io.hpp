#pragma once

#include <string>
#include <vector>

#include "kkf/graph.hpp"

namespace kkf {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Rows are slots, columns are nodes; no header.
Matrix load_signals_csv(const std::string& path);
void write_signals_csv(const std::string& path, const Matrix& signals);

/// Edge list with header "src,dst,weight" and 0-based node ids, one line per
/// unordered pair. Node count is `num_nodes` when nonzero, else max id + 1.
Graph load_graph_csv(const std::string& path, std::size_t num_nodes = 0);
void write_graph_csv(const std::string& path, const Graph& g);

/// Header "path,link"; one line per (path, link) incidence.
RoutingMatrix load_routing_csv(const std::string& path);

/// Header row plus one row per entry of the columns; first column is an
/// integer slot counter starting at 1.
void write_slot_table_csv(const std::string& path, const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& columns);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace kkf

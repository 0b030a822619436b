#include "kkf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace kkf {

namespace {

std::string where(const std::string& path, std::size_t line) { return path + ":" + std::to_string(line); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& path, std::size_t line) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::NonNumeric, where(path, line) + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

std::size_t parse_index(std::string_view field, const std::string& path, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::NonNumeric, where(path, line) + ": '" + std::string(field) + "' is not a node index");
  }
  return v;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!trim(line).empty()) lines.emplace_back(no, std::move(line));
  }
  return lines;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string>>& lines, const std::string& path,
                   const std::vector<std::string_view>& header) {
  if (lines.empty() || split(lines.front().second) != header) {
    std::string want;
    for (std::size_t i = 0; i < header.size(); ++i) want += (i ? "," : "") + std::string(header[i]);
    throw Error(ErrorCode::ParseError,
                where(path, lines.empty() ? 1 : lines.front().first) + ": expected header '" + want + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Matrix load_signals_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, path + ": no rows");
  std::vector<std::vector<double>> rows;
  for (const auto& [no, text] : lines) {
    const auto fields = split(text);
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw Error(ErrorCode::RaggedRows, where(path, no) + ": expected " + std::to_string(rows.front().size()) +
                                             " columns, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, path, no));
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_signals_csv(const std::string& path, const Matrix& signals) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < signals.rows(); ++i) {
    for (Eigen::Index j = 0; j < signals.cols(); ++j) out << (j ? "," : "") << format_double(signals(i, j));
    out << '\n';
  }
}

Graph load_graph_csv(const std::string& path, std::size_t num_nodes) {
  const auto lines = read_lines(path);
  expect_header(lines, path, {"src", "dst", "weight"});
  struct Edge {
    std::size_t i, j;
    double w;
  };
  std::vector<Edge> edges;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::size_t max_id = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [no, text] = lines[k];
    const auto fields = split(text);
    if (fields.size() != 3) {
      throw Error(ErrorCode::RaggedRows, where(path, no) + ": expected 3 columns, found " + std::to_string(fields.size()));
    }
    Edge e{parse_index(fields[0], path, no), parse_index(fields[1], path, no), parse_number(fields[2], path, no)};
    if (e.i == e.j) throw Error(ErrorCode::NonzeroDiagonal, where(path, no) + ": self loop at node " + std::to_string(e.i));
    const auto key = std::minmax(e.i, e.j);
    if (!seen.emplace(key, no).second) {
      throw Error(ErrorCode::ParseError, where(path, no) + ": pair (" + std::to_string(key.first) + "," +
                                             std::to_string(key.second) + ") listed twice");
    }
    max_id = std::max({max_id, e.i, e.j});
    edges.push_back(e);
  }
  const std::size_t n = num_nodes ? num_nodes : (edges.empty() ? 0 : max_id + 1);
  if (!edges.empty() && max_id >= n) {
    throw Error(ErrorCode::DimensionMismatch, path + ": node id " + std::to_string(max_id) + " exceeds node count " +
                                                  std::to_string(n));
  }
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const Edge& e : edges) {
    a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.w;
    a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.w;
  }
  return build_graph(a);
}

void write_graph_csv(const std::string& path, const Graph& g) {
  auto out = open_out(path);
  out << "src,dst,weight\n";
  const Matrix& a = g.adjacency();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) out << i << ',' << j << ',' << format_double(a(i, j)) << '\n';
    }
  }
}

RoutingMatrix load_routing_csv(const std::string& path) {
  const auto lines = read_lines(path);
  expect_header(lines, path, {"path", "link"});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t paths = 0, links = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [no, text] = lines[k];
    const auto fields = split(text);
    if (fields.size() != 2) {
      throw Error(ErrorCode::RaggedRows, where(path, no) + ": expected 2 columns, found " + std::to_string(fields.size()));
    }
    pairs.emplace_back(parse_index(fields[0], path, no), parse_index(fields[1], path, no));
    paths = std::max(paths, pairs.back().first + 1);
    links = std::max(links, pairs.back().second + 1);
  }
  RoutingMatrix r;
  r.entries.setZero(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(links));
  for (const auto& [p, l] : pairs) r.entries(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(l)) = 1;
  return r;
}

void write_slot_table_csv(const std::string& path, const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw Error(ErrorCode::DimensionMismatch, "one name per column required");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw Error(ErrorCode::RaggedRows, "columns of " + path + " differ in length");
  }
  auto out = open_out(path);
  out << "slot";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    out << r + 1;
    for (const auto& c : columns) out << ',' << format_double(c[r]);
    out << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kkf

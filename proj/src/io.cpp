#include <sawcub/io.hpp>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sawcub {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, Index line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

Index parse_count(const std::string& s, Index line) {
  const double v = parse_double(s, line);
  if (v < 0 || v != std::floor(v) || v > 1e12)
    throw ParseError("line " + std::to_string(line) + ": expected a nonnegative integer, got '" + s + "'");
  return static_cast<Index>(v);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Non-empty lines with their 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(const std::string& text) {
    std::istringstream in(text);
    std::string l;
    Index n = 0;
    while (std::getline(in, l)) {
      ++n;
      if (!l.empty() && l.back() == '\r') l.pop_back();
      if (l.find_first_not_of(" \t") == std::string::npos) continue;
      lines_.emplace_back(n, l);
    }
  }
  bool done() const { return at_ >= lines_.size(); }
  std::vector<std::string> next(Index& number) {
    if (done()) throw ParseError("unexpected end of file");
    number = lines_[at_].first;
    return split(lines_[at_++].second);
  }

 private:
  std::vector<std::pair<Index, std::string>> lines_;
  std::size_t at_ = 0;
};

json weights_json(const VectorXd& w) {
  json a = json::array();
  for (Index p = 0; p < w.size(); ++p) a.push_back(w(p));
  return a;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("rule file lacks field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("rule file field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string emit_rule(const RuleFile& file) {
  const auto& r = file.rule;
  json j;
  j["schema_version"] = file.schema_version;
  j["M"] = file.points;
  j["k"] = r.subspaces();
  json idx = json::array();
  for (Index g : r.indices) idx.push_back(g + 1);
  j["indices"] = idx;
  json w = json::array();
  for (const auto& v : r.per_subspace_weights) w.push_back(weights_json(v));
  j["weights"] = w;
  j["mode_counts"] = r.per_subspace_mode_counts;
  j["m_max"] = r.m_max;
  json order = json::array();
  for (Index i : r.visit_order) order.push_back(i + 1);
  j["visit_order"] = order;
  j["metadata"] = file.metadata;
  return j.dump(2) + "\n";
}

RuleFile parse_rule(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("rule file must hold a JSON object");
  RuleFile f;
  f.schema_version = field<int>(j, "schema_version");
  if (f.schema_version != kRuleSchemaVersion)
    throw ParseError("unsupported rule schema version " + std::to_string(f.schema_version));
  f.points = field<Index>(j, "M");
  const auto k = field<Index>(j, "k");
  const auto idx = field<std::vector<Index>>(j, "indices");
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (idx[p] < 1 || idx[p] > f.points)
      throw ParseError("rule index " + std::to_string(idx[p]) + " outside [1, M]");
    if (p > 0 && idx[p] <= idx[p - 1]) throw ParseError("rule indices must be strictly increasing");
    f.rule.indices.push_back(idx[p] - 1);
  }
  const auto w = field<std::vector<std::vector<double>>>(j, "weights");
  if (static_cast<Index>(w.size()) != k) throw ParseError("rule file has " + std::to_string(w.size()) +
                                                          " weight arrays, expected k = " + std::to_string(k));
  for (const auto& v : w) {
    if (v.size() != idx.size()) throw ParseError("weight array length differs from card(E)");
    f.rule.per_subspace_weights.push_back(Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size())));
  }
  if (j.contains("mode_counts")) f.rule.per_subspace_mode_counts = field<std::vector<Index>>(j, "mode_counts");
  if (j.contains("m_max")) f.rule.m_max = field<Index>(j, "m_max");
  if (j.contains("visit_order"))
    for (Index i : field<std::vector<Index>>(j, "visit_order")) f.rule.visit_order.push_back(i - 1);
  if (j.contains("metadata")) f.metadata = j["metadata"];
  return f;
}

std::string emit_family_csv(const SubspaceFamily<double>& family) {
  family.validate();
  std::string out = std::to_string(family.points()) + "," + std::to_string(family.subspaces()) + "\n";
  for (Index g = 0; g < family.points(); ++g) out += (g ? "," : "") + fmt(family.full_weights(g));
  out += "\n";
  for (const auto& a : family.sample_matrices) {
    out += std::to_string(a.cols()) + "\n";
    for (Index g = 0; g < a.rows(); ++g) {
      for (Index c = 0; c < a.cols(); ++c) out += (c ? "," : "") + fmt(a(g, c));
      out += "\n";
    }
  }
  return out;
}

SubspaceFamily<double> parse_family_csv(const std::string& text) {
  LineReader in(text);
  Index ln = 0;
  auto head = in.next(ln);
  if (head.size() != 2) throw ParseError("family CSV must start with a 'M,k' line");
  const Index M = parse_count(head[0], ln), k = parse_count(head[1], ln);
  if (M < 1 || k < 1) throw ParseError("family CSV needs M >= 1 and k >= 1");

  SubspaceFamily<double> f;
  auto wrow = in.next(ln);
  if (static_cast<Index>(wrow.size()) != M) throw ParseError("line " + std::to_string(ln) + ": expected M weights");
  f.full_weights.resize(M);
  for (Index g = 0; g < M; ++g) f.full_weights(g) = parse_double(wrow[g], ln);

  for (Index i = 0; i < k; ++i) {
    auto hdr = in.next(ln);
    if (hdr.size() != 1) throw ParseError("line " + std::to_string(ln) + ": expected a column count");
    const Index n = parse_count(hdr[0], ln);
    if (n < 1) throw ParseError("line " + std::to_string(ln) + ": subspace needs at least one column");
    MatrixXd a(M, n);
    for (Index g = 0; g < M; ++g) {
      auto row = in.next(ln);
      if (static_cast<Index>(row.size()) != n)
        throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(n) + " values");
      for (Index c = 0; c < n; ++c) a(g, c) = parse_double(row[c], ln);
    }
    f.sample_matrices.push_back(std::move(a));
  }
  if (!in.done()) throw ParseError("trailing data after the last subspace block");
  try {
    f.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("family CSV: ") + e.what());
  }
  return f;
}

std::string emit_sparsity_csv(const AdaptiveRule<double>& rule, Index points, const std::string& label) {
  std::string out = "strategy," + label + "\n";
  for (const auto& w : rule.per_subspace_weights) {
    std::vector<char> row(static_cast<std::size_t>(points), '0');
    for (Index p = 0; p < rule.size(); ++p)
      if (w(p) > 0) row[rule.indices[p]] = '1';
    for (Index g = 0; g < points; ++g) {
      if (g) out += ',';
      out += row[g];
    }
    out += "\n";
  }
  return out;
}

std::string emit_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "strategy,card_E,max_residual,wall_time_s\n";
  for (const auto& r : rows)
    out += r.strategy + "," + std::to_string(r.points) + "," + fmt(r.max_residual) + "," + fmt(r.wall_time_s) + "\n";
  return out;
}

MatrixXd load_snapshots(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    LineReader in(read_text(path));
    Index ln = 0;
    auto head = in.next(ln);
    if (head.size() != 2) throw ParseError("snapshot CSV must start with a 'M,P' line");
    const Index M = parse_count(head[0], ln), P = parse_count(head[1], ln);
    MatrixXd d(M, P);
    for (Index g = 0; g < M; ++g) {
      auto row = in.next(ln);
      if (static_cast<Index>(row.size()) != P)
        throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(P) + " values");
      for (Index t = 0; t < P; ++t) d(g, t) = parse_double(row[t], ln);
    }
    if (!in.done()) throw ParseError("trailing data after the snapshot rows");
    return d;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path.string());
  std::int64_t dims[2];
  if (!f.read(reinterpret_cast<char*>(dims), sizeof dims) || dims[0] < 0 || dims[1] < 0)
    throw ParseError("snapshot file lacks a valid M,P header");
  MatrixXd d(dims[0], dims[1]);
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(d.size()));
  if (!f.read(reinterpret_cast<char*>(d.data()), bytes)) throw ParseError("snapshot file is truncated");
  if (f.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in snapshot file");
  require_finite(d);
  return d;
}

void save_snapshots(const std::filesystem::path& path, const MatrixXd& snapshots) {
  if (path.extension() == ".csv") {
    std::string out = std::to_string(snapshots.rows()) + "," + std::to_string(snapshots.cols()) + "\n";
    for (Index g = 0; g < snapshots.rows(); ++g) {
      for (Index t = 0; t < snapshots.cols(); ++t) out += (t ? "," : "") + fmt(snapshots(g, t));
      out += "\n";
    }
    write_text(path, out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  const std::int64_t dims[2] = {snapshots.rows(), snapshots.cols()};
  f.write(reinterpret_cast<const char*>(dims), sizeof dims);
  f.write(reinterpret_cast<const char*>(snapshots.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(snapshots.size())));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

}  // namespace sawcub

#include "latpos/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace latpos {

namespace {

struct File {
  std::FILE *f;
  explicit File(const fs::path &path) : f(std::fopen(path.c_str(), "w")) {
    if (!f)
      throw std::runtime_error("cannot write " + path.string());
  }
  ~File() {
    if (f)
      std::fclose(f);
  }
  File(const File &) = delete;
  File &operator=(const File &) = delete;
};

void put_stamp(std::FILE *f, const std::optional<CsvStamp> &stamp) {
  if (stamp)
    std::fprintf(f, "# %s\n", stamp->text.c_str());
}

std::vector<double> parse_row(const std::string &line, const fs::path &path, long lineno) {
  std::vector<double> out;
  const char *p = line.c_str();
  while (*p) {
    char *end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p)
      throw ValidationError("csv", path.string() + ":" + std::to_string(lineno) +
                                       ": not a number");
    out.push_back(v);
    p = end;
    while (*p == ' ' || *p == '\t' || *p == '\r')
      ++p;
    if (*p == ',')
      ++p;
    else if (*p)
      throw ValidationError("csv", path.string() + ":" + std::to_string(lineno) +
                                       ": expected ','");
  }
  return out;
}

// Calls fn(values, lineno) for every data row; skips comments, blank lines
// and a header (first non-comment line that does not start with a number).
template <class Fn> void for_each_row(const fs::path &path, Fn fn) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("path", "cannot read " + path.string());
  std::string line;
  long lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line == "\r")
      continue;
    if (first) {
      first = false;
      const char c = line[0];
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.'))
        continue;
    }
    fn(parse_row(line, path, lineno), lineno);
  }
}

} // namespace

void write_events_csv(const fs::path &path, const std::vector<MessageEvent> &events,
                      const std::optional<CsvStamp> &stamp) {
  File out(path);
  put_stamp(out.f, stamp);
  std::fputs("t,i,j\n", out.f);
  for (const auto &e : events)
    std::fprintf(out.f, "%.9f,%d,%d\n", e.t, e.i + 1, e.j + 1);
}

std::vector<MessageEvent> read_events_csv(const fs::path &path) {
  std::vector<MessageEvent> events;
  for_each_row(path, [&](const std::vector<double> &v, long lineno) {
    if (v.size() != 3)
      throw ValidationError("events", "line " + std::to_string(lineno) +
                                          ": expected t,i,j");
    const int a = static_cast<int>(v[1]);
    const int b = static_cast<int>(v[2]);
    if (a != v[1] || b != v[2] || a < 1 || b < 1 || a == b)
      throw ValidationError("events", "line " + std::to_string(lineno) +
                                          ": ids must be distinct positive integers");
    events.push_back({v[0], std::min(a, b) - 1, std::max(a, b) - 1});
  });
  return events;
}

void write_actor_table(const fs::path &path, const ActorTable &table,
                       const std::string &prefix, const std::optional<CsvStamp> &stamp) {
  require(table.times.size() == table.values.size(), "table", "times/values mismatch");
  File out(path);
  put_stamp(out.f, stamp);
  const Eigen::Index m = table.values.empty() ? 0 : table.values.front().cols();
  std::fputs("t,actor", out.f);
  for (Eigen::Index k = 0; k < m; ++k)
    std::fprintf(out.f, ",%s_%ld", prefix.c_str(), static_cast<long>(k + 1));
  std::fputc('\n', out.f);
  for (std::size_t s = 0; s < table.times.size(); ++s) {
    const Matrix &V = table.values[s];
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      std::fprintf(out.f, "%.9f,%ld", table.times[s], static_cast<long>(i + 1));
      for (Eigen::Index k = 0; k < V.cols(); ++k)
        std::fprintf(out.f, ",%.17g", V(i, k));
      std::fputc('\n', out.f);
    }
  }
}

ActorTable read_actor_table(const fs::path &path) {
  std::vector<std::vector<double>> rows;
  for_each_row(path, [&](std::vector<double> v, long lineno) {
    if (v.size() < 3)
      throw ValidationError("csv", "line " + std::to_string(lineno) +
                                       ": expected t,actor,values...");
    if (!rows.empty() && v.size() != rows.front().size())
      throw ValidationError("csv", "line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(v));
  });
  ActorTable table;
  std::size_t k = 0;
  while (k < rows.size()) {
    const double t = rows[k][0];
    std::size_t end = k;
    while (end < rows.size() && rows[end][0] == t)
      ++end;
    Matrix V(static_cast<Eigen::Index>(end - k), static_cast<Eigen::Index>(rows[k].size() - 2));
    for (std::size_t r = k; r < end; ++r) {
      const auto actor = static_cast<Eigen::Index>(rows[r][1]) - 1;
      if (actor < 0 || actor >= V.rows())
        throw ValidationError("csv", "actor ids must run 1..n within each time");
      for (Eigen::Index c = 0; c < V.cols(); ++c)
        V(actor, c) = rows[r][static_cast<std::size_t>(c) + 2];
    }
    if (!table.values.empty() && V.rows() != table.values.front().rows())
      throw ValidationError("csv", "every time needs the same set of actors");
    if (!table.times.empty() && t <= table.times.back())
      throw ValidationError("csv", "times must increase");
    table.times.push_back(t);
    table.values.push_back(std::move(V));
    k = end;
  }
  return table;
}

void write_matrix_csv(const fs::path &path, const Matrix &M,
                      const std::vector<std::string> &header,
                      const std::optional<CsvStamp> &stamp) {
  require(static_cast<Eigen::Index>(header.size()) == M.cols(), "header",
          "one name per column");
  File out(path);
  put_stamp(out.f, stamp);
  for (std::size_t c = 0; c < header.size(); ++c)
    std::fprintf(out.f, c ? ",%s" : "%s", header[c].c_str());
  std::fputc('\n', out.f);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c)
      std::fprintf(out.f, c ? ",%.17g" : "%.17g", M(r, c));
    std::fputc('\n', out.f);
  }
}

void write_columns_csv(const fs::path &path, const std::vector<std::string> &header,
                       const std::vector<std::vector<double>> &columns,
                       const std::optional<CsvStamp> &stamp) {
  require(header.size() == columns.size() && !columns.empty(), "columns",
          "one header per column");
  Matrix M(static_cast<Eigen::Index>(columns.front().size()),
           static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    require(columns[c].size() == columns.front().size(), "columns", "ragged columns");
    for (std::size_t r = 0; r < columns[c].size(); ++r)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = columns[c][r];
  }
  write_matrix_csv(path, M, header, stamp);
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("path", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
}

} // namespace latpos

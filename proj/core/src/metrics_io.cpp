#include "pinn/metrics_io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pinn/errors.hpp"

namespace pinn {
namespace {

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double parse_double(std::string_view tok, long line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
  return v;
}

std::int64_t parse_int(std::string_view tok, long line) {
  std::int64_t v = 0;
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

void check_ascending(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw ArgumentError(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1]))
      throw ArgumentError(std::string(name) + " grid is not strictly ascending");
}

}  // namespace

void SolutionGrid::validate() const {
  check_ascending(t, "t");
  check_ascending(x, "x");
  if (components.empty() || components.size() != values.size())
    throw ArgumentError("component labels must match value arrays");
  if (!reference.empty() && reference.size() != values.size())
    throw ArgumentError("reference arrays must match value arrays");
  const std::size_t cells = t.size() * x.size();
  for (const auto& v : values)
    if (v.size() != cells) throw ArgumentError("value array shape mismatch");
  for (const auto& r : reference)
    if (r.size() != cells) throw ArgumentError("reference array shape mismatch");
}

double rel_l2(std::span<const double> pred, std::span<const double> exact) {
  if (pred.size() != exact.size())
    throw ArgumentError("rel_l2: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - exact[i];
    num += d * d;
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw ArgumentError("rel_l2: exact field has zero norm");
  return std::sqrt(num / den);
}

void write_grid(const SolutionGrid& grid, const std::string& path) {
  grid.validate();
  std::string out = "t,x";
  for (const auto& c : grid.components) out += "," + c;
  for (std::size_t k = 0; k < grid.reference.size(); ++k)
    out += "," + grid.components[k] + "_exact";
  out += '\n';
  const std::size_t nx = grid.x.size();
  for (std::size_t it = 0; it < grid.t.size(); ++it) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      format_double(out, grid.t[it]);
      out += ',';
      format_double(out, grid.x[ix]);
      const std::size_t cell = it * nx + ix;
      for (const auto& v : grid.values) {
        out += ',';
        format_double(out, v[cell]);
      }
      for (const auto& r : grid.reference) {
        out += ',';
        format_double(out, r[cell]);
      }
      out += '\n';
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ArgumentError("cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ArgumentError("short write to '" + path + "'");
}

SolutionGrid read_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(f, line)) throw ParseError("empty grid file", 1);
  auto cols = split(line, ',');
  if (cols.size() < 3 || cols[0] != "t" || cols[1] != "x")
    throw ParseError("grid header must start with 't,x'", 1);

  SolutionGrid g;
  std::size_t n_ref = 0;
  for (std::size_t k = 2; k < cols.size(); ++k) {
    std::string_view c = cols[k];
    if (c.size() > 6 && c.substr(c.size() - 6) == "_exact") {
      const std::string base(c.substr(0, c.size() - 6));
      if (n_ref >= g.components.size() || g.components[n_ref] != base)
        throw ParseError("reference column order must mirror components", 1);
      ++n_ref;
    } else {
      if (n_ref > 0)
        throw ParseError("component column after reference columns", 1);
      g.components.emplace_back(c);
    }
  }
  const std::size_t n_comp = g.components.size();
  if (n_comp == 0) throw ParseError("grid file has no component columns", 1);
  if (n_ref != 0 && n_ref != n_comp)
    throw ParseError("reference columns must cover all components", 1);

  std::vector<std::vector<double>> data(n_comp + n_ref);
  long line_no = 1;
  double prev_t = 0.0, prev_x = 0.0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto toks = split(line, ',');
    if (toks.size() != 2 + n_comp + n_ref)
      throw ParseError("expected " + std::to_string(2 + n_comp + n_ref) +
                           " columns, got " + std::to_string(toks.size()),
                       line_no);
    const double tv = parse_double(toks[0], line_no);
    const double xv = parse_double(toks[1], line_no);
    if (g.t.empty() || tv != prev_t) {
      if (!g.t.empty() && tv <= prev_t)
        throw ParseError("t values must be grouped ascending", line_no);
      g.t.push_back(tv);
      prev_t = tv;
    }
    if (g.t.size() == 1) {
      if (!g.x.empty() && xv <= prev_x)
        throw ParseError("x values must be ascending within a t block", line_no);
      g.x.push_back(xv);
    }
    prev_x = xv;
    for (std::size_t k = 0; k < n_comp + n_ref; ++k)
      data[k].push_back(parse_double(toks[2 + k], line_no));
  }
  g.values.assign(data.begin(), data.begin() + static_cast<long>(n_comp));
  g.reference.assign(data.begin() + static_cast<long>(n_comp), data.end());
  try {
    g.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("inconsistent grid: ") + e.what(), line_no);
  }
  return g;
}

std::string format_summary(const RunSummary& s) {
  std::string out;
  auto kv = [&out](const char* key, const std::string& val) {
    out += key;
    out += " = ";
    out += val;
    out += '\n';
  };
  auto kvd = [&out](const char* key, double val) {
    out += key;
    out += " = ";
    format_double(out, val);
    out += '\n';
  };
  kv("problem", s.problem);
  kv("seed", std::to_string(s.seed));
  kv("architecture", s.architecture);
  kv("n_u", std::to_string(s.n_u));
  kv("n_f", std::to_string(s.n_f));
  kv("n_0", std::to_string(s.n_0));
  kv("n_b", std::to_string(s.n_b));
  kv("n_n", std::to_string(s.n_n));
  kv("q", std::to_string(s.q));
  kvd("dt", s.dt);
  kvd("rel_l2", s.rel_l2);
  kv("iterations", std::to_string(s.iterations));
  kvd("wall_seconds", s.wall_seconds);
  kv("reason", s.reason);
  out += "---\n";
  return out;
}

namespace {

RunSummary parse_record(const std::vector<std::pair<std::string, std::string>>& fields,
                        long line) {
  RunSummary s;
  for (const auto& [key, val] : fields) {
    if (key == "problem") s.problem = val;
    else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_int(val, line));
    else if (key == "architecture") s.architecture = val;
    else if (key == "n_u") s.n_u = parse_int(val, line);
    else if (key == "n_f") s.n_f = parse_int(val, line);
    else if (key == "n_0") s.n_0 = parse_int(val, line);
    else if (key == "n_b") s.n_b = parse_int(val, line);
    else if (key == "n_n") s.n_n = parse_int(val, line);
    else if (key == "q") s.q = parse_int(val, line);
    else if (key == "dt") s.dt = parse_double(val, line);
    else if (key == "rel_l2") s.rel_l2 = parse_double(val, line);
    else if (key == "iterations") s.iterations = parse_int(val, line);
    else if (key == "wall_seconds") s.wall_seconds = parse_double(val, line);
    else if (key == "reason") s.reason = val;
    else throw ParseError("unknown summary field '" + key + "'", line);
  }
  return s;
}

}  // namespace

RunSummary parse_summary(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  std::vector<std::pair<std::string, std::string>> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "---") break;
    const std::size_t eq = line.find(" = ");
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line_no);
    fields.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  if (fields.empty()) throw ParseError("empty summary record", line_no);
  return parse_record(fields, line_no);
}

void append_summary(const RunSummary& s, const std::string& ledger_path) {
  const std::string record = format_summary(s);
  const int fd = ::open(ledger_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0)
    throw ArgumentError("cannot open ledger '" + ledger_path +
                        "': " + std::strerror(errno));
  if (::flock(fd, LOCK_EX) != 0) {
    const int err = errno;
    ::close(fd);
    throw ArgumentError(std::string("cannot lock ledger: ") + std::strerror(err));
  }
  std::size_t done = 0;
  while (done < record.size()) {
    const ssize_t n = ::write(fd, record.data() + done, record.size() - done);
    if (n < 0) {
      const int err = errno;
      ::flock(fd, LOCK_UN);
      ::close(fd);
      throw ArgumentError(std::string("ledger write failed: ") + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
}

std::vector<RunSummary> read_summaries(const std::string& ledger_path) {
  std::ifstream f(ledger_path, std::ios::binary);
  if (!f) throw ArgumentError("cannot open ledger '" + ledger_path + "'");
  std::vector<RunSummary> out;
  std::string line, record;
  while (std::getline(f, line)) {
    record += line;
    record += '\n';
    if (line == "---") {
      out.push_back(parse_summary(record));
      record.clear();
    }
  }
  return out;
}

}  // namespace pinn

#include "shapefit/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace shapefit {

namespace {

constexpr const char* kMagic = "shapefit-v1";

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> tokens;
  for (std::string tok; is >> tok;) tokens.push_back(tok);
  return tokens;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw InvalidInputError("line " + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    const double x = std::stod(tok, &used);
    if (used != tok.size()) fail(line_no, "malformed number '" + tok + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(line_no, "malformed number '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, int line_no) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(tok, &used);
    if (used != tok.size()) fail(line_no, "malformed integer '" + tok + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(line_no, "malformed integer '" + tok + "'");
  }
}

void write_location_lines(std::ostream& os, const LocationSet& T) {
  for (int i = 0; i < T.size(); ++i) {
    os << i;
    for (int a = 0; a < T.dim(); ++a) os << ' ' << format_real(T.point(i)[a]);
    os << '\n';
  }
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_instance(std::ostream& os, const Instance& instance) {
  const ObservationSet& obs = instance.observations;
  os << kMagic << ' ' << obs.size() << ' ' << obs.dim() << ' ' << obs.edge_count() << '\n';
  for (const auto& [key, value] : instance.metadata) os << "# " << key << '=' << value << '\n';
  if (instance.locations) write_location_lines(os, *instance.locations);
  for (int k = 0; k < obs.edge_count(); ++k) {
    const EdgePair& e = obs.edge(k);
    os << e.i << ' ' << e.j;
    for (int a = 0; a < obs.dim(); ++a) os << ' ' << format_real(obs.direction(k)[a]);
    if (obs.has_labels()) os << ' ' << ((*obs.labels())[k] == EdgeLabel::good ? 'g' : 'b');
    os << '\n';
  }
}

std::string to_text(const Instance& instance) {
  std::ostringstream os;
  write_instance(os, instance);
  return os.str();
}

void write_locations(std::ostream& os, const LocationSet& locations) {
  os << kMagic << ' ' << locations.size() << ' ' << locations.dim() << " 0\n";
  write_location_lines(os, locations);
}

Instance read_instance(std::istream& is) {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::string line;
  int line_no = 0;
  std::optional<std::vector<std::string>> header;
  int header_line = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string body = line.substr(first + 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        const auto trim = [](std::string s) {
          const auto b = s.find_first_not_of(" \t");
          const auto e = s.find_last_not_of(" \t");
          return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      }
      continue;
    }
    if (!header) {
      header = split(line);
      header_line = line_no;
      continue;
    }
    rows.emplace_back(line_no, split(line));
  }

  if (!header) throw InvalidInputError("empty instance: missing shapefit-v1 header");
  if (header->size() != 4 || (*header)[0] != kMagic) {
    fail(header_line, "expected header 'shapefit-v1 <n> <d> <edge_count>'");
  }
  const long long n = parse_int((*header)[1], header_line);
  const long long d = parse_int((*header)[2], header_line);
  const long long m = parse_int((*header)[3], header_line);
  if (n < 1 || d < 1 || m < 0) fail(header_line, "header values out of range");

  std::size_t next = 0;
  std::optional<LocationSet> locations;
  const auto loc_width = static_cast<std::size_t>(d + 1);
  if (!rows.empty() && rows.front().second.size() == loc_width) {
    if (rows.size() < static_cast<std::size_t>(n)) {
      fail(rows.back().first, "location section is shorter than n");
    }
    Matrix pts(d, n);
    for (long long i = 0; i < n; ++i, ++next) {
      const auto& [ln, tok] = rows[next];
      if (tok.size() != loc_width) fail(ln, "location line needs 1 + d fields");
      if (parse_int(tok[0], ln) != i) fail(ln, "location lines must be in index order");
      for (long long a = 0; a < d; ++a) pts(a, i) = parse_real(tok[a + 1], ln);
    }
    locations.emplace(std::move(pts));
  }

  if (rows.size() - next != static_cast<std::size_t>(m)) {
    throw InvalidInputError("expected " + std::to_string(m) + " edge lines, found " +
                            std::to_string(rows.size() - next));
  }
  std::vector<EdgePair> edges;
  edges.reserve(m);
  Matrix dirs(d, m);
  std::vector<EdgeLabel> labels;
  bool labelled = false;
  for (long long k = 0; k < m; ++k, ++next) {
    const auto& [ln, tok] = rows[next];
    const bool has_label = tok.size() == static_cast<std::size_t>(d + 3);
    if (!has_label && tok.size() != static_cast<std::size_t>(d + 2)) {
      fail(ln, "edge line needs 2 + d fields plus an optional label");
    }
    if (k == 0) labelled = has_label;
    if (has_label != labelled) fail(ln, "labels must be present on every edge or on none");
    const long long i = parse_int(tok[0], ln);
    const long long j = parse_int(tok[1], ln);
    if (i < 0 || j < 0 || i >= n || j >= n) fail(ln, "edge index out of range");
    edges.push_back({static_cast<int>(i), static_cast<int>(j)});
    for (long long a = 0; a < d; ++a) dirs(a, k) = parse_real(tok[a + 2], ln);
    if (has_label) {
      const std::string& lab = tok.back();
      if (lab == "g") {
        labels.push_back(EdgeLabel::good);
      } else if (lab == "b") {
        labels.push_back(EdgeLabel::bad);
      } else {
        fail(ln, "label must be 'g' or 'b'");
      }
    }
  }

  std::optional<std::vector<EdgeLabel>> opt_labels;
  if (labelled) opt_labels = std::move(labels);
  Instance out{std::move(locations),
               ObservationSet(static_cast<int>(n), std::move(edges), std::move(dirs), std::move(opt_labels)),
               std::move(metadata)};
  if (out.locations && out.locations->dim() != out.observations.dim()) {
    throw InvalidInputError("location dimension does not match header");
  }
  return out;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_instance(in);
}

void save_instance(const std::filesystem::path& path, const Instance& instance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_instance(out, instance);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace shapefit

#include "coda/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace coda {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(const fs::path& path, int line, const std::string& msg) {
  throw std::runtime_error(path.string() + " line " + std::to_string(line) +
                           ": " + msg);
}

}  // namespace

ScalarField read_ascii_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  GridSpec spec;
  bool have_ncols = false, have_nrows = false, have_cell = false;
  bool have_dx = false, have_dy = false;
  double xll = 0.0, yll = 0.0;
  bool center_x = false, center_y = false;
  int lineno = 0;
  std::string line;
  std::streampos data_start;

  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) fail(path, lineno, "missing grid data");
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    const std::string k = lower(key);
    double value;
    if (k == "ncols" || k == "nrows" || k == "xllcorner" || k == "yllcorner" ||
        k == "xllcenter" || k == "yllcenter" || k == "cellsize" ||
        k == "nodata_value" || k == "dx" || k == "dy") {
      if (!(ls >> value)) fail(path, lineno, "unparsable header value for " + key);
      if (k == "ncols") { spec.ncols = static_cast<int>(value); have_ncols = true; }
      else if (k == "nrows") { spec.nrows = static_cast<int>(value); have_nrows = true; }
      else if (k == "xllcorner") { xll = value; }
      else if (k == "yllcorner") { yll = value; }
      else if (k == "xllcenter") { xll = value; center_x = true; }
      else if (k == "yllcenter") { yll = value; center_y = true; }
      else if (k == "cellsize") { spec.cellsize_x = spec.cellsize_y = value; have_cell = true; }
      else if (k == "dx") { spec.cellsize_x = value; have_dx = true; }
      else if (k == "dy") { spec.cellsize_y = value; have_dy = true; }
      else if (k == "nodata_value") { spec.nodata = value; }
    } else {
      // first non-header line: rewind and read values
      in.seekg(data_start);
      --lineno;
      break;
    }
  }
  if (!have_ncols || !have_nrows || !(have_cell || (have_dx && have_dy))) {
    fail(path, lineno, "incomplete header (need NCOLS, NROWS, CELLSIZE or DX/DY)");
  }
  if (spec.ncols < 1 || spec.nrows < 1) fail(path, lineno, "invalid dimensions");
  spec.origin_x = center_x ? xll - 0.5 * spec.cellsize_x : xll;
  spec.origin_y = center_y ? yll - 0.5 * spec.cellsize_y : yll;

  std::vector<double> values;
  values.reserve(spec.size());
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      double v;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        fail(path, lineno, "unparsable number '" + tok + "'");
      }
      values.push_back(v);
      if (values.size() > spec.size()) {
        fail(path, lineno, "more values than ncols*nrows");
      }
    }
  }
  if (values.size() != spec.size()) {
    fail(path, lineno,
         "expected " + std::to_string(spec.size()) + " values, got " +
             std::to_string(values.size()));
  }
  return ScalarField(spec, std::move(values));
}

void write_ascii_grid(const ScalarField& field, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const GridSpec& s = field.spec();
  out.precision(17);
  out << "NCOLS " << s.ncols << "\n"
      << "NROWS " << s.nrows << "\n"
      << "XLLCORNER " << s.origin_x << "\n"
      << "YLLCORNER " << s.origin_y << "\n";
  if (s.square_cells()) {
    out << "CELLSIZE " << s.cellsize_x << "\n";
  } else {
    out << "DX " << s.cellsize_x << "\n"
        << "DY " << s.cellsize_y << "\n";
  }
  out << "NODATA_VALUE " << s.nodata << "\n";
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      if (c) out << ' ';
      out << field.at(r, c);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

CompositionField assemble_composition(std::vector<ScalarField> layers,
                                      std::vector<std::string> names,
                                      bool replace_zeros,
                                      double detection_limit) {
  for (std::size_t i = 1; i < layers.size(); ++i) {
    if (!layers[i].spec().same_shape(layers[0].spec())) {
      throw std::runtime_error("composition: misaligned part layers");
    }
  }
  const GridSpec& s = layers[0].spec();
  CompositionField out(s, layers.size(), std::move(names));
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      bool nodata = false;
      std::vector<double> v(layers.size());
      for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].is_nodata(r, c)) {
          nodata = true;
          break;
        }
        v[i] = layers[i].at(r, c);
      }
      if (nodata) {
        out.set_nodata(r, c);
        continue;
      }
      if (replace_zeros) {
        // zeros become detection_limit relative to the positive mass; the
        // subsequent closure restores the unit sum
        double pos_sum = 0.0;
        for (double x : v) {
          if (x > 0.0) pos_sum += x;
        }
        for (double& x : v) {
          if (x <= 0.0) x = detection_limit * pos_sum;
        }
      }
      double sum = 0.0, mn = v[0];
      for (double x : v) {
        sum += x;
        mn = std::min(mn, x);
      }
      if (mn > 0.0 && std::abs(sum - 1.0) <= 1e-9) {
        // already a valid composition: keep the stored bits exactly
        for (std::size_t i = 0; i < v.size(); ++i) out.part(i).at(r, c) = v[i];
        continue;
      }
      try {
        out.set(r, c, closure(v));
      } catch (const std::exception& e) {
        throw std::runtime_error("composition: pixel (" + std::to_string(r) +
                                 "," + std::to_string(c) + "): " + e.what());
      }
    }
  }
  return out;
}

}  // namespace

CompositionField read_composition(const std::vector<fs::path>& parts,
                                  std::vector<std::string> part_names,
                                  bool replace_zeros, double detection_limit) {
  if (parts.size() < 2) {
    throw std::runtime_error("composition: need at least two part rasters");
  }
  std::vector<ScalarField> layers;
  for (const auto& p : parts) layers.push_back(read_ascii_grid(p));
  if (part_names.empty()) {
    for (const auto& p : parts) part_names.push_back(p.stem().string());
  }
  return assemble_composition(std::move(layers), std::move(part_names),
                              replace_zeros, detection_limit);
}

CompositionField read_composition(const fs::path& sidecar, bool replace_zeros,
                                  double detection_limit) {
  std::ifstream in(sidecar);
  if (!in) throw std::runtime_error("cannot open " + sidecar.string());
  std::vector<fs::path> paths;
  std::vector<std::string> names;
  std::string name, rel;
  while (in >> name >> rel) {
    names.push_back(name);
    fs::path p(rel);
    paths.push_back(p.is_absolute() ? p : sidecar.parent_path() / p);
  }
  if (paths.empty()) throw std::runtime_error("empty sidecar " + sidecar.string());
  return read_composition(paths, names, replace_zeros, detection_limit);
}

void write_composition(const CompositionField& field, const fs::path& sidecar,
                       const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream side(sidecar);
  if (!side) throw std::runtime_error("cannot write " + sidecar.string());
  for (std::size_t i = 0; i < field.part_count(); ++i) {
    const std::string fname = field.part_names()[i] + ".asc";
    write_ascii_grid(field.part(i), dir / fname);
    side << field.part_names()[i] << " "
         << fs::relative(dir / fname, sidecar.parent_path()).string() << "\n";
  }
}

void write_pgm(const ScalarField& field, const fs::path& path) {
  const GridSpec& s = field.spec();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      if (field.is_nodata(r, c)) continue;
      lo = std::min(lo, field.at(r, c));
      hi = std::max(hi, field.at(r, c));
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P2\n" << s.ncols << " " << s.nrows << "\n255\n";
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      int g = 0;
      if (!field.is_nodata(r, c)) {
        g = static_cast<int>(std::lround(255.0 * (field.at(r, c) - lo) / (hi - lo)));
      }
      out << g << (c + 1 == s.ncols ? '\n' : ' ');
    }
  }
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::runtime_error("csv: row width does not match header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(path, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, lineno, "empty key");
    cfg.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stod(it->second);
}

int RunConfig::get(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoi(it->second);
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void RunManifest::write(const fs::path& path) const {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["config"] = config;
  j["inputs"] = inputs;
  j["output_checksums"] = output_checksums;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace coda

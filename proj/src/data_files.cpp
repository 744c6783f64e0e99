#include "isomat/data_files.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace isomat {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DataError("not a number in " + where + ": '" + s + "'");
  }
  if (pos != s.size()) throw DataError("trailing characters in " + where + ": '" + s + "'");
  return v;
}

std::map<std::string, std::uint64_t> read_manifest() {
  const std::string path = data_path("MANIFEST");
  std::ifstream in(path);
  if (!in) throw DataError("data manifest not found at " + path);
  std::map<std::string, std::uint64_t> out;
  std::string hash, rel;
  while (in >> hash >> rel) out[rel] = std::stoull(hash, nullptr, 16);
  return out;
}

}  // namespace

std::string data_dir() {
  if (const char* env = std::getenv("ISOMAT_DATA_DIR"); env && *env) return env;
  return ISOMAT_DEFAULT_DATA_DIR;
}

std::string data_path(const std::string& relative) { return data_dir() + "/" + relative; }

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void verify_bundled(const std::string& relative) {
  const auto manifest = read_manifest();
  const auto it = manifest.find(relative);
  if (it == manifest.end()) throw DataError(relative + " is not listed in the data manifest");
  const std::uint64_t h = fnv1a_file(data_path(relative));
  if (h != it->second) throw DataError(relative + " does not match its manifest checksum (corrupt or edited)");
}

void write_manifest(const std::vector<std::string>& relatives) {
  std::ofstream out(data_path("MANIFEST"));
  if (!out) throw DataError("cannot write the data manifest");
  for (const auto& rel : relatives) {
    out << std::hex << std::setw(16) << std::setfill('0') << fnv1a_file(data_path(rel)) << "  " << rel << '\n';
  }
}

std::vector<Acquisition> read_gradient_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gradient table " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty gradient table " + path);
  const auto header = split_csv(line);
  bool has_b = false;
  if (header == std::vector<std::string>{"b", "ux", "uy", "uz"})
    has_b = true;
  else if (header != std::vector<std::string>{"ux", "uy", "uz"})
    throw DataError("gradient table " + path + " needs header b,ux,uy,uz or ux,uy,uz");
  std::vector<Acquisition> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != (has_b ? 4u : 3u)) throw DataError("wrong column count at " + where);
    Acquisition a{1.0, Vec3::Zero()};
    std::size_t k = 0;
    if (has_b) a.b = parse_number(cells[k++], where);
    for (int i = 0; i < 3; ++i) a.u[i] = parse_number(cells[k++], where);
    if (!(a.b >= 0.0) || !std::isfinite(a.b)) throw DataError("b must be finite and >= 0 at " + where);
    const double n = a.u.norm();
    if (a.b > 0.0) {
      if (!(std::abs(n - 1.0) < 1e-2)) throw DataError("gradient direction is not a unit vector at " + where);
      a.u /= n;
    }
    rows.push_back(a);
  }
  return rows;
}

void write_gradient_table(const std::string& path, const std::vector<Acquisition>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "b,ux,uy,uz\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.b << ',' << r.u[0] << ',' << r.u[1] << ',' << r.u[2] << '\n';
}

SphericalDesign load_design(const std::string& path, int order, const std::string& name) {
  SphericalDesign d;
  d.name = name.empty() ? path : name;
  d.order = order;
  for (const auto& a : read_gradient_table(path)) d.points.push_back(a.u);
  d.antipodal = is_antipodal(d.points, 1e-8);
  return d;
}

}  // namespace isomat

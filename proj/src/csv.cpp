#include "klflow/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace klflow {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void coords(std::ostringstream& os, const Point& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) os << ',' << format_double(y(i));
}

void coord_header(std::ostringstream& os, Eigen::Index n) {
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
}

std::string safe_name(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << 't';
  coord_header(os, traj.x0.size());
  os << ",f,slope,speed,segment\n";
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    coords(os, s.y);
    os << ',' << format_double(s.f) << ',' << format_double(s.slope) << ',' << format_double(s.speed) << ','
       << s.segment << '\n';
  }
  return os.str();
}

std::string sequence_csv(const ProxSequence& seq) {
  std::ostringstream os;
  os << 'k';
  coord_header(os, seq.x0.size());
  os << ",f,dist_step,slope,de_giorgi_residual\n";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    os << k;
    coords(os, seq.iterate(k));
    os << ',' << format_double(seq.value(k));
    if (k == 0) {
      os << ",0,,\n";
      continue;
    }
    const auto& s = seq.steps[k - 1];
    os << ',' << format_double(s.dist) << ',' << format_double(s.slope_to) << ',';
    if (!std::isnan(s.de_giorgi_residual)) os << format_double(s.de_giorgi_residual);
    os << '\n';
  }
  return os.str();
}

std::string recursion_csv(const std::vector<RecursionRow>& rows) {
  std::ostringstream os;
  os << "k,observed,bound,margin\n";
  for (const auto& r : rows) {
    os << r.k << ',' << format_double(r.observed) << ',' << format_double(r.bound) << ',' << format_double(r.margin)
       << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<RateCertificate>& certs,
                                                  const std::filesystem::path& dir) {
  if (certs.empty()) throw std::invalid_argument("plot data needs at least one certificate");
  std::vector<std::filesystem::path> written;
  for (const auto& c : certs) {
    if (c.skipped) continue;
    std::ostringstream obs;
    std::ostringstream bnd;
    obs << "t_or_k,observed\n";
    bnd << "t_or_k,bound\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      obs << format_double(c.grid[i]) << ',' << format_double(c.observed[i]) << '\n';
      bnd << format_double(c.grid[i]) << ',' << format_double(c.predicted[i]) << '\n';
    }
    const std::string base = safe_name(c.label);
    const auto po = dir / (base + "_observed.csv");
    const auto pb = dir / (base + "_bound.csv");
    write_text(po, obs.str());
    write_text(pb, bnd.str());
    written.push_back(po);
    written.push_back(pb);
  }
  return written;
}

}  // namespace klflow

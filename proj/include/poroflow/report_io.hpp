#pragma once

// Convergence tables as CSV and discrete fields as legacy ASCII VTK.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "adaptive.hpp"

namespace poroflow {

inline constexpr const char* kCsvHeader =
    "level,dofs,h,e_sigma,rate_sigma,e_u,rate_u,e_rho,rate_rho,e_phi,rate_phi,e_p,rate_p,e_total,rate_total,"
    "equ_h,mass_h,newton_iters,xi,eff";

/// One CSV line. Undefined rates and efficiencies are NaN.
struct TableRow {
  int level = 0;
  Index dofs = 0;
  double h = 0.0;
  double e_sigma = 0.0, rate_sigma = 0.0;
  double e_u = 0.0, rate_u = 0.0;
  double e_rho = 0.0, rate_rho = 0.0;
  double e_phi = 0.0, rate_phi = 0.0;
  double e_p = 0.0, rate_p = 0.0;
  double e_total = 0.0, rate_total = 0.0;
  double equ_h = 0.0, mass_h = 0.0;
  int newton_iters = 0;
  double xi = 0.0, eff = 0.0;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

inline std::vector<TableRow> make_table(const std::vector<LevelRecord>& levels, RateMode mode) {
  const std::vector<RateRow> rates = convergence_rates(error_history(levels), mode);
  std::vector<TableRow> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const LevelRecord& l = levels[i];
    const ErrorReport& e = l.errors;
    const RateRow& r = rates[i];
    TableRow t;
    t.level = static_cast<int>(i);
    t.dofs = e.dofs;
    t.h = e.h;
    t.e_sigma = e.e_sigma, t.rate_sigma = r.sigma;
    t.e_u = e.e_u, t.rate_u = r.u;
    t.e_rho = e.e_rho, t.rate_rho = r.rho;
    t.e_phi = e.e_phi, t.rate_phi = r.phi;
    t.e_p = e.e_p, t.rate_p = r.p;
    t.e_total = e.total(), t.rate_total = r.total;
    t.equ_h = l.conservation.equ_h;
    t.mass_h = l.conservation.mass_h;
    t.newton_iters = l.solution.report.iterations;
    t.xi = l.estimate.xi;
    t.eff = l.efficiency();
    out.push_back(t);
  }
  return out;
}

namespace detail {

/// 17 significant digits, "nan" for NaN.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("csv line " + std::to_string(line) + ": malformed number '" + s + "'");
  return v;
}

template <typename Row, typename F>
void for_each_column(Row& r, F&& f) {
  f(r.h), f(r.e_sigma), f(r.rate_sigma), f(r.e_u), f(r.rate_u), f(r.e_rho), f(r.rate_rho), f(r.e_phi),
      f(r.rate_phi), f(r.e_p), f(r.rate_p), f(r.e_total), f(r.rate_total), f(r.equ_h), f(r.mass_h);
}

/// Imbues the C locale for the lifetime of the guard.
class ClassicLocale {
 public:
  explicit ClassicLocale(std::ostream& out) : out_(out), saved_(out.imbue(std::locale::classic())) {}
  ~ClassicLocale() { out_.imbue(saved_); }
  ClassicLocale(const ClassicLocale&) = delete;
  ClassicLocale& operator=(const ClassicLocale&) = delete;

 private:
  std::ostream& out_;
  std::locale saved_;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

}  // namespace detail

inline void write_csv(const std::vector<TableRow>& rows, std::ostream& out) {
  const detail::ClassicLocale guard(out);
  out << kCsvHeader << '\n';
  for (const TableRow& r : rows) {
    out << r.level << ',' << r.dofs;
    detail::for_each_column(r, [&](double v) { out << ',' << detail::format_real(v); });
    out << ',' << r.newton_iters << ',' << detail::format_real(r.xi) << ',' << detail::format_real(r.eff) << '\n';
  }
}

inline void write_csv(const std::vector<TableRow>& rows, const std::string& path) {
  std::ostringstream buf;
  write_csv(rows, buf);
  std::ofstream out = detail::open_output(path);
  out << buf.str();
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

inline std::vector<TableRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("csv: missing or unexpected header");
  std::vector<TableRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 20) throw IoError("csv line " + std::to_string(number) + ": expected 20 columns");
    TableRow r;
    std::size_t i = 0;
    auto integer = [&](const std::string& s) {
      long v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("csv line " + std::to_string(number) + ": malformed integer '" + s + "'");
      return v;
    };
    r.level = static_cast<int>(integer(cells[i++]));
    r.dofs = static_cast<Index>(integer(cells[i++]));
    detail::for_each_column(r, [&](double& v) { v = detail::parse_real(cells[i++], number); });
    r.newton_iters = static_cast<int>(integer(cells[i++]));
    r.xi = detail::parse_real(cells[i++], number);
    r.eff = detail::parse_real(cells[i++], number);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<TableRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in);
}

// -------------------------------------------------------------------- VTK

/// Cellwise fields: p_h, |u_h|, |sigma_h| and |phi_h| at the centroid, the
/// vertex mean of rho_h and, when given, the local indicator Xi_K.
inline void write_vtk(const Solution& sol, const std::vector<double>& xi2, std::ostream& out) {
  const TriMesh& mesh = *sol.mesh;
  const Index nc = mesh.num_cells();
  if (!xi2.empty() && static_cast<Index>(xi2.size()) != nc)
    throw std::invalid_argument("write_vtk: indicator count does not match the mesh");
  std::vector<double> p(nc), u(nc), s(nc), f(nc), r(nc);
  for (Index k = 0; k < nc; ++k) {
    const CellFields cf(mesh, *sol.layout, sol.x, k);
    const DiscretePoint d = cf.at(mesh.centroid(k));
    p[k] = d.p;
    u[k] = d.u.norm();
    s[k] = d.sigma.norm();
    f[k] = d.phi.norm();
    r[k] = 0.0;
    for (int j = 0; j < 3; ++j) r[k] += sol.rho()[mesh.cell(k).v[j]] / 3.0;
  }
  using detail::format_real;
  const detail::ClassicLocale guard(out);
  out << "# vtk DataFile Version 3.0\nporoflow solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& x : mesh.vertices()) out << format_real(x.x()) << ' ' << format_real(x.y()) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const Cell& c : mesh.cells()) out << "3 " << c.v[0] << ' ' << c.v[1] << ' ' << c.v[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (Index k = 0; k < nc; ++k) out << "5\n";
  out << "CELL_DATA " << nc << '\n';
  auto scalars = [&](const char* name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double a : v) out << format_real(a) << '\n';
  };
  scalars("p_h", p);
  scalars("u_h_norm", u);
  scalars("sigma_h_norm", s);
  scalars("phi_h_norm", f);
  scalars("rho_h", r);
  if (!xi2.empty()) {
    std::vector<double> xi(nc);
    for (Index k = 0; k < nc; ++k) xi[k] = std::sqrt(xi2[k]);
    scalars("xi", xi);
  }
}

inline void write_vtk(const Solution& sol, const std::vector<double>& xi2, const std::string& path) {
  std::ostringstream buf;
  write_vtk(sol, xi2, buf);
  std::ofstream out = detail::open_output(path);
  out << buf.str();
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

}  // namespace poroflow

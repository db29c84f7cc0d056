#include "robinlab/report.hpp"

#include "robinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace robinlab {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw IoError("'" + path_.string() + "': row has " + std::to_string(cells.size()) +
                  " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out_ << ',';
    out_ << cells[k];
  }
  out_ << '\n';
  if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

void CsvWriter::row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double x : cells) s.push_back(format_number(x));
  row(s);
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_solution_csv(const fs::path& path, const Mesh& mesh, const Eigen::VectorXd& u) {
  CsvWriter csv(path, {"vertex", "x", "y", "u"});
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    csv.row({std::to_string(i), format_number(mesh.vertices[i].x()),
             format_number(mesh.vertices[i].y()), format_number(u[static_cast<Eigen::Index>(i)])});
  }
}

void write_cauchy_csv(const fs::path& path, const CauchyData& data) {
  CsvWriter csv(path, {"theta", "trace", "conormal", "tangential_derivative"});
  const auto& loop = data.loop();
  for (std::size_t k = 0; k < loop.size(); ++k) {
    csv.row(std::vector<double>{loop.angles[k], data.trace[k], data.conormal[k], data.tangential[k]});
  }
}

void write_field_csv(const fs::path& path, const BoundaryField& field) {
  CsvWriter csv(path, {"theta", "value"});
  for (std::size_t k = 0; k < field.size(); ++k) {
    csv.row(std::vector<double>{field.loop().angles[k], field[k]});
  }
}

void write_fourier_csv(const fs::path& path, const FourierSeries& series) {
  CsvWriter csv(path, {"n", "kind", "coef"});
  csv.row({"0", "c", format_number(series.a0)});
  for (int n = 1; n <= series.order(); ++n) {
    csv.row({std::to_string(n), "c", format_number(series.cos_coeff(n))});
    csv.row({std::to_string(n), "s", format_number(series.sin_coeff(n))});
  }
}

void write_eigenvalues_csv(const fs::path& path, const EigenBasis& basis) {
  CsvWriter csv(path, {"m", "lambda"});
  for (Eigen::Index m = 0; m < basis.eigenvalues.size(); ++m) {
    csv.row({std::to_string(m), format_number(basis.eigenvalues[m])});
  }
}

void write_eigenfunctions_csv(const fs::path& path, const EigenBasis& basis) {
  std::vector<std::string> header = {"node", "theta"};
  for (Eigen::Index m = 0; m < basis.functions.cols(); ++m) header.push_back("phi_" + std::to_string(m));
  CsvWriter csv(path, header);
  for (std::size_t k = 0; k < basis.loop->size(); ++k) {
    std::vector<std::string> row = {std::to_string(k), format_number(basis.loop->angles[k])};
    for (Eigen::Index m = 0; m < basis.functions.cols(); ++m) {
      row.push_back(format_number(basis.functions(static_cast<Eigen::Index>(k), m)));
    }
    csv.row(row);
  }
}

void write_iterations_csv(const fs::path& path, const std::vector<RobinIterate>& history) {
  CsvWriter csv(path, {"iter", "mismatch", "update_norm", "min_u_on_S"});
  for (const auto& it : history) {
    csv.row({std::to_string(it.iteration), format_number(it.mismatch),
             format_number(it.update_norm), format_number(it.min_u_on_S)});
  }
}

NamedValue named(std::string name, double value, std::string note) {
  return {std::move(name), format_number(value), std::move(note)};
}

NamedValue named(std::string name, std::string value, std::string note) {
  return {std::move(name), std::move(value), std::move(note)};
}

void write_summary_csv(const fs::path& path, const std::vector<NamedValue>& rows) {
  CsvWriter csv(path, {"quantity", "value", "note"});
  for (const auto& r : rows) csv.row({r.name, r.value, r.note});
}

void write_sweep_csv(const fs::path& path, const std::vector<SigmaRow>& table) {
  CsvWriter csv(path, {"N", "lambda", "dimension", "sigma_min_l2", "sigma_min_h_half",
                       "sigma_min_h1", "cond_l2", "cond_h1"});
  for (const auto& r : table) {
    csv.row({std::to_string(r.order), format_number(r.cutoff), std::to_string(r.dimension),
             format_number(r.sigma_l2), format_number(r.sigma_h_half), format_number(r.sigma_h1),
             format_number(r.cond_l2), format_number(r.cond_h1)});
  }
}

void write_audits_csv(const fs::path& path, const std::vector<AuditRow>& rows) {
  CsvWriter csv(path, {"audit", "value", "reference", "pass"});
  for (const auto& r : rows) {
    csv.row({r.audit, format_number(r.value), format_number(r.reference), r.pass ? "true" : "false"});
  }
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Panel {
  double x0, y0, w, h;  // pixel frame
  double xmin, xmax, ymin, ymax;  // data frame

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

void frame(std::ostream& os, const Panel& p, const std::string& title, const std::string& xlabel,
           const std::string& ylabel) {
  os << "<rect x=\"" << num(p.x0) << "\" y=\"" << num(p.y0) << "\" width=\"" << num(p.w)
     << "\" height=\"" << num(p.h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << num(p.x0 + p.w / 2) << "\" y=\"" << num(p.y0 - 10)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<text x=\"" << num(p.x0 + p.w / 2) << "\" y=\"" << num(p.y0 + p.h + 36)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  os << "<text x=\"" << num(p.x0 - 44) << "\" y=\"" << num(p.y0 + p.h / 2)
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(p.x0 - 44)
     << ' ' << num(p.y0 + p.h / 2) << ")\">" << ylabel << "</text>\n";
}

void ticks(std::ostream& os, const Panel& p, bool log_y, bool log_x) {
  for (int k = static_cast<int>(std::ceil(p.xmin)); k <= static_cast<int>(std::floor(p.xmax)); ++k) {
    const double x = p.px(k);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(p.y0 + p.h) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(p.y0 + p.h + 4) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(p.y0 + p.h + 16)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << (log_x ? "1e" : "") << k << "</text>\n";
  }
  for (int k = static_cast<int>(std::ceil(p.ymin)); k <= static_cast<int>(std::floor(p.ymax)); ++k) {
    const double y = p.py(k);
    os << "<line x1=\"" << num(p.x0 - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(p.x0)
       << "\" y2=\"" << num(y) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << num(p.x0 - 6) << "\" y=\"" << num(y + 3)
       << "\" text-anchor=\"end\" font-size=\"10\">" << (log_y ? "1e" : "") << k << "</text>\n";
  }
}

void polyline(std::ostream& os, const Panel& p, const std::vector<double>& x,
              const std::vector<double>& y, const std::string& color) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? " " : "") << num(p.px(x[k])) << ',' << num(p.py(y[k]));
  os << "\"/>\n";
}

void dots(std::ostream& os, const Panel& p, const std::vector<double>& x,
          const std::vector<double>& y, const std::string& color) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    os << "<circle cx=\"" << num(p.px(x[k])) << "\" cy=\"" << num(p.py(y[k]))
       << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }
}

void legend(std::ostream& os, const Panel& p, int slot, const std::string& color,
            const std::string& label) {
  const double y = p.y0 + 14 + 16 * slot;
  os << "<rect x=\"" << num(p.x0 + p.w - 150) << "\" y=\"" << num(y - 8)
     << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
  os << "<text x=\"" << num(p.x0 + p.w - 135) << "\" y=\"" << num(y + 1) << "\" font-size=\"11\">"
     << label << "</text>\n";
}

std::pair<double, double> padded_range(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

void write_sweep_svg(const fs::path& path, const std::vector<SigmaRow>& table,
                     const LogModulusFit* fit, const std::vector<ModulusSample>& samples) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"420\" "
        "viewBox=\"0 0 960 420\" font-family=\"sans-serif\">\n"
     << "<rect width=\"960\" height=\"420\" fill=\"white\"/>\n";

  if (!table.empty()) {
    std::vector<double> n, l2, h1;
    for (const auto& r : table) {
      n.push_back(r.order);
      l2.push_back(std::log10(r.sigma_l2));
      h1.push_back(std::log10(r.sigma_h1));
    }
    std::vector<double> all = l2;
    all.insert(all.end(), h1.begin(), h1.end());
    const auto [xlo, xhi] = padded_range(n);
    const auto [ylo, yhi] = padded_range(all);
    const Panel p{70, 40, 360, 320, xlo, xhi, ylo, yhi};
    frame(os, p, "smallest singular value on W", "mode order N", "sigma_min (log10)");
    ticks(os, p, true, false);
    polyline(os, p, n, l2, "#1f77b4");
    dots(os, p, n, l2, "#1f77b4");
    polyline(os, p, n, h1, "#d62728");
    dots(os, p, n, h1, "#d62728");
    legend(os, p, 0, "#1f77b4", "L2(S) domain norm");
    legend(os, p, 1, "#d62728", "H1(S) domain norm");
  }

  if (fit != nullptr && !samples.empty() && fit->c > 0.0) {
    std::vector<double> xr, yp;
    for (const auto& s : samples) {
      if (!(s.C > 0.0) || !(s.l2 > 0.0)) continue;
      xr.push_back(std::log10(s.h_half / s.C));
      yp.push_back(std::log10(fit->bold_c * s.l2 / s.h_half));
    }
    if (!xr.empty()) {
      const double rmax = std::max(*std::max_element(xr.begin(), xr.end()) + 0.5, fit->c / std::log(10.0) + 0.5);
      std::vector<double> cx, cy;
      const int points = 240;
      for (int i = 0; i <= points; ++i) {
        const double lr = -0.5 + (rmax + 0.5) * i / points;
        cx.push_back(lr);
        cy.push_back(std::log10(phi({fit->eta, fit->c}, std::pow(10.0, lr))));
      }
      std::vector<double> all = cy;
      all.insert(all.end(), yp.begin(), yp.end());
      const auto [ylo, yhi] = padded_range(all);
      const Panel p{540, 40, 360, 320, -0.5, rmax, ylo, yhi};
      frame(os, p, "log modulus Phi(eta, c)", "r = |a|_H1/2 / C(u)", "Phi(r) (log10)");
      ticks(os, p, true, true);
      polyline(os, p, cx, cy, "#2ca02c");
      dots(os, p, xr, yp, "#9467bd");
      legend(os, p, 0, "#2ca02c", "Phi(r)");
      legend(os, p, 1, "#9467bd", "bold_c |a|_L2 / |a|_H1/2");
    }
  }
  os << "</svg>\n";
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// Cauchy data input

CauchyTable read_cauchy_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("data file '" + path.string() + "' is empty");
  if (line.rfind("theta,trace,conormal", 0) != 0) {
    throw IoError("data file '" + path.string() +
                  "': header must start with theta,trace,conormal");
  }
  CauchyTable t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw IoError("data file '" + path.string() + "' line " + std::to_string(lineno) +
                      ": not a number: '" + cell + "'");
      }
    }
    if (v.size() < 3) {
      throw IoError("data file '" + path.string() + "' line " + std::to_string(lineno) +
                    ": expected at least 3 columns");
    }
    t.theta.push_back(v[0]);
    t.trace.push_back(v[1]);
    t.conormal.push_back(v[2]);
  }
  if (t.theta.size() < 3) throw IoError("data file '" + path.string() + "' has fewer than 3 rows");
  for (std::size_t k = 1; k < t.theta.size(); ++k) {
    if (!(t.theta[k] > t.theta[k - 1])) {
      throw IoError("data file '" + path.string() + "': theta must be strictly increasing");
    }
  }
  if (!(t.theta.back() - t.theta.front() < 2.0 * std::numbers::pi)) {
    throw IoError("data file '" + path.string() + "': theta must span less than one turn");
  }
  return t;
}

CauchyData cauchy_from_table(const CauchyTable& table, const LoopPtr& gamma) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t n = table.theta.size();
  auto interp = [&](const std::vector<double>& v, double th) {
    const double base = table.theta.front();
    double x = std::fmod(th - base, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    x += base;
    auto it = std::upper_bound(table.theta.begin(), table.theta.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - table.theta.begin());
    const std::size_t lo = hi - 1;
    const double a = table.theta[lo];
    const double b = hi == n ? table.theta.front() + kTwoPi : table.theta[hi];
    const double w = (x - a) / (b - a);
    return (1.0 - w) * v[lo] + w * v[hi == n ? 0 : hi];
  };
  Eigen::VectorXd tr(static_cast<Eigen::Index>(gamma->size()));
  Eigen::VectorXd cn(tr.size());
  for (std::size_t k = 0; k < gamma->size(); ++k) {
    tr[static_cast<Eigen::Index>(k)] = interp(table.trace, gamma->angles[k]);
    cn[static_cast<Eigen::Index>(k)] = interp(table.conormal, gamma->angles[k]);
  }
  return make_cauchy(BoundaryField(gamma, tr), BoundaryField(gamma, cn));
}

}  // namespace robinlab

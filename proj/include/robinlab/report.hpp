#pragma once

// CSV and SVG output. Numbers are written with 17 significant digits so that
// identical runs give byte-identical files.

#include "robinlab/boundary.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/inverse.hpp"
#include "robinlab/spectral.hpp"
#include "robinlab/stability.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace robinlab {

std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& cells);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// Creates the directory if needed and probes that it is writable.
void ensure_output_dir(const std::filesystem::path& dir);

void write_solution_csv(const std::filesystem::path& path, const Mesh& mesh,
                        const Eigen::VectorXd& u);
void write_cauchy_csv(const std::filesystem::path& path, const CauchyData& data);
void write_field_csv(const std::filesystem::path& path, const BoundaryField& field);
void write_fourier_csv(const std::filesystem::path& path, const FourierSeries& series);
void write_eigenvalues_csv(const std::filesystem::path& path, const EigenBasis& basis);
/// Per-node eigenfunction matrix: node,theta,phi_0,phi_1,...
void write_eigenfunctions_csv(const std::filesystem::path& path, const EigenBasis& basis);
void write_iterations_csv(const std::filesystem::path& path, const std::vector<RobinIterate>& history);

struct NamedValue {
  std::string name;
  std::string value;
  std::string note;
};
NamedValue named(std::string name, double value, std::string note = "");
NamedValue named(std::string name, std::string value, std::string note = "");

/// quantity,value,note
void write_summary_csv(const std::filesystem::path& path, const std::vector<NamedValue>& rows);

/// N,lambda,dimension,sigma_min_l2,sigma_min_h_half,sigma_min_h1,cond_l2,cond_h1
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SigmaRow>& table);

struct AuditRow {
  std::string audit;
  double value = 0.0;
  double reference = 0.0;
  bool pass = false;
};
/// audit,value,reference,pass
void write_audits_csv(const std::filesystem::path& path, const std::vector<AuditRow>& rows);

/// Two panels: log-scale sigma_min against N, and Phi_{eta,c} with the family
/// points (H / C, bold_c |a|_{L2} / |a|_{H^1/2}).
void write_sweep_svg(const std::filesystem::path& path, const std::vector<SigmaRow>& table,
                     const LogModulusFit* fit, const std::vector<ModulusSample>& samples);

/// theta,trace,conormal[,tangential_derivative] with theta ascending.
struct CauchyTable {
  std::vector<double> theta;
  std::vector<double> trace;
  std::vector<double> conormal;
};
CauchyTable read_cauchy_csv(const std::filesystem::path& path);
/// Periodic linear interpolation of a table onto the nodes of a Gamma loop.
CauchyData cauchy_from_table(const CauchyTable& table, const LoopPtr& gamma);

}  // namespace robinlab

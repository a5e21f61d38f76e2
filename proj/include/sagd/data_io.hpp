#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sagd/problem.hpp"
#include "sagd/solver.hpp"

namespace sagd {

/// Reads "label idx:val idx:val …" lines with 1-based, strictly increasing
/// indices. Blank lines and text after '#' are ignored. d is the largest index
/// seen unless `dim` is given, in which case larger indices are an error.
Dataset parse_libsvm(const std::filesystem::path& path, std::optional<Index> dim = std::nullopt);
Dataset parse_libsvm(std::istream& in, std::optional<Index> dim = std::nullopt);

/// Writes stored entries with 17 significant digits, so parsing the output
/// reproduces every value exactly.
void write_libsvm(const Dataset& data, const std::filesystem::path& path);
void write_libsvm(const Dataset& data, std::ostream& out);

/// A and y with i.i.d. N(0, 1) entries, drawn row by row and then y.
Dataset synth_gaussian(Index n, Index d, std::uint64_t seed);
/// A and y with i.i.d. Uniform[0, 1) entries, drawn row by row and then y.
Dataset synth_uniform(Index n, Index d, std::uint64_t seed);

enum class SynthDist { gaussian, uniform };
SynthDist parse_synth_dist(const std::string& name);
const char* to_string(SynthDist dist);
Dataset synthesize(SynthDist dist, Index n, Index d, std::uint64_t seed);

/// "saga" for (q, τ) = (0, 1), "minibatch-saga" for q = 1, else "sagd".
std::string method_label(double q, Index tau);

struct RunManifest {
  std::string dataset;
  std::string loss;
  double lambda = 0.0;
  double q = 0.0;
  Index tau = 1;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string build;
  std::string started;
  std::string finished;
};

/// Sidecar describing every run whose rows appear in one results file.
struct ResultsManifest {
  std::string results_file;
  std::string build;
  std::vector<RunManifest> runs;
};

std::string current_timestamp();
std::string build_identifier();

void write_manifest(const ResultsManifest& manifest, const std::filesystem::path& path);
ResultsManifest read_manifest(const std::filesystem::path& path);

/// `<csv>.manifest.json`.
std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path);

inline constexpr const char* kResultsHeader =
    "method,q,tau,seed,iter,grad_evals,effective_passes,wall_seconds,error,lyapunov";

struct ResultRow {
  std::string method;
  double q = 0.0;
  Index tau = 1;
  std::uint64_t seed = 0;
  std::int64_t iter = 0;
  std::int64_t grad_evals = 0;
  double effective_passes = 0.0;
  double wall_seconds = 0.0;
  double error = 0.0;
  std::optional<double> lyapunov;
};

std::vector<ResultRow> rows_from_trajectory(double q, Index tau, std::uint64_t seed, Index n,
                                            const std::vector<TrajectoryPoint>& trajectory);

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);

/// Columns are matched by header name; a missing column throws FormatError.
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(std::istream& in);

enum class PlotAxis { effective_passes, wall_seconds };
PlotAxis parse_plot_axis(const std::string& name);

/// Log-scale error against passes or time, one polyline per (method, q, τ)
/// drawn from the smallest seed of that series.
void emit_svg_plot(const std::filesystem::path& csv_path, PlotAxis axis,
                   const std::filesystem::path& out_path);
std::string render_svg_plot(const std::vector<ResultRow>& rows, PlotAxis axis);

}  // namespace sagd

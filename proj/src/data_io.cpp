#include "sagd/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <tuple>

#include <json.hpp>

#include "sagd/error.hpp"
#include "sagd/rng.hpp"

#ifndef SAGD_BUILD_ID
#define SAGD_BUILD_ID "unknown"
#endif

namespace sagd {

namespace {

using Triplet = Eigen::Triplet<double, Index>;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Dataset dense_dataset(Index n, Index d, const std::vector<double>& a, Eigen::VectorXd y) {
  std::vector<Triplet> triplets;
  triplets.reserve(a.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      triplets.emplace_back(i, j, a[static_cast<std::size_t>(i * d + j)]);
  Dataset data;
  data.rows.resize(n, d);
  data.rows.setFromTriplets(triplets.begin(), triplets.end());
  data.labels = std::move(y);
  return data;
}

void check_synth_shape(Index n, Index d) {
  if (n < 1 || d < 1) throw InvalidInput("synthetic data needs n >= 1 and d >= 1");
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<Index> dim) {
  if (dim && *dim < 1) throw InvalidInput("explicit dimension must be positive");
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_double(tokens[0], label) || !std::isfinite(label))
      throw ParseError("bad label '" + std::string(tokens[0]) + "'", line_no);
    const auto row = static_cast<Index>(labels.size());
    labels.push_back(label);

    Index previous = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("expected idx:val, got '" + std::string(tok) + "'", line_no);
      Index index = 0;
      double value = 0.0;
      if (!parse_int(tok.substr(0, colon), index) || index < 1)
        throw ParseError("bad feature index in '" + std::string(tok) + "'", line_no);
      if (!parse_double(tok.substr(colon + 1), value) || !std::isfinite(value))
        throw ParseError("bad feature value in '" + std::string(tok) + "'", line_no);
      if (index <= previous)
        throw ParseError("feature indices must be strictly increasing (" +
                             std::to_string(index) + " after " + std::to_string(previous) + ")",
                         line_no);
      if (dim && index > *dim)
        throw ParseError("feature index " + std::to_string(index) + " exceeds dimension " +
                             std::to_string(*dim),
                         line_no);
      previous = index;
      max_index = std::max(max_index, index);
      triplets.emplace_back(row, index - 1, value);
    }
  }
  if (labels.empty()) throw ParseError("no samples found", line_no);

  const Index d = dim ? *dim : std::max<Index>(max_index, 1);
  Dataset data;
  data.rows.resize(static_cast<Index>(labels.size()), d);
  data.rows.setFromTriplets(triplets.begin(), triplets.end());
  data.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), static_cast<Index>(labels.size()));
  return data;
}

Dataset parse_libsvm(const std::filesystem::path& path, std::optional<Index> dim) {
  std::ifstream in = open_in(path);
  return parse_libsvm(in, dim);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  for (Index i = 0; i < data.n(); ++i) {
    out << format_double(data.labels(i));
    for (SparseRows::InnerIterator it(data.rows, i); it; ++it)
      out << ' ' << (it.index() + 1) << ':' << format_double(it.value());
    out << '\n';
  }
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_libsvm(data, out);
  finish_write(out, path);
}

Dataset synth_gaussian(Index n, Index d, std::uint64_t seed) {
  check_synth_shape(n, d);
  SeededRng rng(seed);
  std::vector<double> a(static_cast<std::size_t>(n * d));
  for (double& v : a) v = rng.normal();
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.normal();
  return dense_dataset(n, d, a, std::move(y));
}

Dataset synth_uniform(Index n, Index d, std::uint64_t seed) {
  check_synth_shape(n, d);
  SeededRng rng(seed);
  std::vector<double> a(static_cast<std::size_t>(n * d));
  for (double& v : a) v = rng.uniform();
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.uniform();
  return dense_dataset(n, d, a, std::move(y));
}

SynthDist parse_synth_dist(const std::string& name) {
  if (name == "gaussian") return SynthDist::gaussian;
  if (name == "uniform") return SynthDist::uniform;
  throw InvalidInput("unknown distribution '" + name + "' (expected gaussian or uniform)");
}

const char* to_string(SynthDist dist) {
  return dist == SynthDist::gaussian ? "gaussian" : "uniform";
}

Dataset synthesize(SynthDist dist, Index n, Index d, std::uint64_t seed) {
  return dist == SynthDist::gaussian ? synth_gaussian(n, d, seed) : synth_uniform(n, d, seed);
}

std::string method_label(double q, Index tau) {
  if (q == 0.0 || tau == 1) return "saga";
  if (q == 1.0) return "minibatch-saga";
  return "sagd";
}

std::string current_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string build_identifier() { return SAGD_BUILD_ID; }

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = {{"dataset", m.dataset}, {"loss", m.loss},   {"lambda", m.lambda},
       {"q", m.q},             {"tau", m.tau},     {"alpha", m.alpha},
       {"seed", m.seed},       {"build", m.build}, {"started", m.started},
       {"finished", m.finished}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("dataset").get_to(m.dataset);
  j.at("loss").get_to(m.loss);
  j.at("lambda").get_to(m.lambda);
  j.at("q").get_to(m.q);
  j.at("tau").get_to(m.tau);
  j.at("alpha").get_to(m.alpha);
  j.at("seed").get_to(m.seed);
  j.at("build").get_to(m.build);
  j.at("started").get_to(m.started);
  j.at("finished").get_to(m.finished);
}

void write_manifest(const ResultsManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json j = {{"results_file", manifest.results_file},
                      {"build", manifest.build},
                      {"runs", manifest.runs}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish_write(out, path);
}

ResultsManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    ResultsManifest m;
    j.at("results_file").get_to(m.results_file);
    j.at("build").get_to(m.build);
    j.at("runs").get_to(m.runs);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest '" + path.string() + "': " + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".manifest.json");
}

std::vector<ResultRow> rows_from_trajectory(double q, Index tau, std::uint64_t seed, Index n,
                                            const std::vector<TrajectoryPoint>& trajectory) {
  std::vector<ResultRow> rows;
  rows.reserve(trajectory.size());
  const std::string method = method_label(q, tau);
  for (const auto& p : trajectory) {
    ResultRow r;
    r.method = method;
    r.q = q;
    r.tau = tau;
    r.seed = seed;
    r.iter = p.iter;
    r.grad_evals = p.grad_evals;
    r.effective_passes = static_cast<double>(p.grad_evals) / static_cast<double>(n);
    r.wall_seconds = p.wall_seconds;
    r.error = p.error;
    r.lyapunov = p.lyapunov;
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.q) << ',' << r.tau << ',' << r.seed << ','
        << r.iter << ',' << r.grad_evals << ',' << format_double(r.effective_passes) << ','
        << format_double(r.wall_seconds) << ',' << format_double(r.error) << ','
        << (r.lyapunov ? format_double(*r.lyapunov) : std::string()) << '\n';
  }
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_results_csv(rows, out);
  finish_write(out, path);
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::map<std::string, std::size_t, std::less<>> column;
  const auto names = split_commas(line);
  for (std::size_t i = 0; i < names.size(); ++i) column.emplace(std::string(names[i]), i);
  const std::vector<std::string> required = {"method", "q", "tau", "seed", "iter",
                                             "grad_evals", "effective_passes", "wall_seconds",
                                             "error"};
  for (const auto& name : required)
    if (!column.count(name)) throw FormatError("results file lacks column '" + name + "'");
  const auto lyap = column.find("lyapunov");

  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != names.size())
      throw ParseError("expected " + std::to_string(names.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    auto field = [&](const char* name) { return fields[column.find(name)->second]; };
    auto number = [&](const char* name) {
      double v = 0.0;
      if (!parse_double(field(name), v))
        throw ParseError(std::string("bad ") + name + " '" + std::string(field(name)) + "'",
                         line_no);
      return v;
    };
    auto integer = [&](const char* name, auto& out) {
      if (!parse_int(field(name), out))
        throw ParseError(std::string("bad ") + name + " '" + std::string(field(name)) + "'",
                         line_no);
    };
    ResultRow r;
    r.method = std::string(field("method"));
    r.q = number("q");
    integer("tau", r.tau);
    integer("seed", r.seed);
    integer("iter", r.iter);
    integer("grad_evals", r.grad_evals);
    r.effective_passes = number("effective_passes");
    r.wall_seconds = number("wall_seconds");
    r.error = number("error");
    if (lyap != column.end() && !fields[lyap->second].empty()) r.lyapunov = number("lyapunov");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_results_csv(in);
}

PlotAxis parse_plot_axis(const std::string& name) {
  if (name == "effective_passes" || name == "passes") return PlotAxis::effective_passes;
  if (name == "wall_seconds" || name == "time") return PlotAxis::wall_seconds;
  throw InvalidInput("unknown plot axis '" + name + "' (expected effective_passes or wall_seconds)");
}

std::string render_svg_plot(const std::vector<ResultRow>& rows, PlotAxis axis) {
  using Key = std::tuple<std::string, double, Index>;
  std::map<Key, std::uint64_t> first_seed;
  for (const auto& r : rows) {
    const Key key{r.method, r.q, r.tau};
    auto it = first_seed.find(key);
    if (it == first_seed.end()) first_seed.emplace(key, r.seed);
    else it->second = std::min(it->second, r.seed);
  }

  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, log10 error)
  };
  std::vector<Series> series;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  bool any = false;
  for (const auto& [key, seed] : first_seed) {
    Series s;
    const auto& [method, q, tau] = key;
    s.label = method + " q=" + format_double(q) + " tau=" + std::to_string(tau);
    for (const auto& r : rows) {
      if (r.method != method || r.q != q || r.tau != tau || r.seed != seed) continue;
      if (!(r.error > 0.0) || !std::isfinite(r.error)) continue;
      const double x = axis == PlotAxis::effective_passes ? r.effective_passes : r.wall_seconds;
      const double y = std::log10(r.error);
      s.points.emplace_back(x, y);
      x_max = std::max(x_max, x);
      y_min = any ? std::min(y_min, y) : y;
      y_max = any ? std::max(y_max, y) : y;
      any = true;
    }
    series.push_back(std::move(s));
  }

  const double width = 800.0, height = 500.0;
  const double left = 70.0, right = 220.0, top = 20.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double tick_lo = std::floor(y_min);
  double tick_hi = std::ceil(y_max);
  if (tick_hi <= tick_lo) tick_hi = tick_lo + 1.0;
  if (!(x_max > 0.0)) x_max = 1.0;
  auto px = [&](double x) { return left + plot_w * x / x_max; };
  auto py = [&](double y) { return top + plot_h * (tick_hi - y) / (tick_hi - tick_lo); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t = tick_lo; t <= tick_hi; t += 1.0) {
    svg << "<line class=\"ytick\" x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left
        << "\" y2=\"" << py(t) << "\" stroke=\"black\"/>"
        << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4
        << "\" text-anchor=\"end\">1e" << static_cast<int>(t) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = x_max * i / 4.0;
    svg << "<text x=\"" << px(x) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << format_double(std::round(x * 100.0) / 100.0)
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">"
      << (axis == PlotAxis::effective_passes ? "effective passes" : "wall seconds") << "</text>\n"
      << "<text x=\"15\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << top + plot_h / 2 << ")\">error</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = palette[s % (sizeof palette / sizeof *palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].points.size(); ++k) {
      if (k) svg << ' ';
      svg << px(series[s].points[k].first) << ',' << py(series[s].points[k].second);
    }
    svg << "\"/>\n";
    const double ly = top + 15.0 + 18.0 * static_cast<double>(s);
    svg << "<g class=\"legend\"><line x1=\"" << width - right + 10 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << width - right + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/><text x=\"" << width - right + 35 << "\" y=\"" << ly << "\">"
        << series[s].label << "</text></g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg_plot(const std::filesystem::path& csv_path, PlotAxis axis,
                   const std::filesystem::path& out_path) {
  const std::vector<ResultRow> rows = read_results_csv(csv_path);
  std::ofstream out = open_out(out_path);
  out << render_svg_plot(rows, axis);
  finish_write(out, out_path);
}

}  // namespace sagd

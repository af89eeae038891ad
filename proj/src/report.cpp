#include "attackdet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace attackdet {

namespace {

std::string idx(int i) { return std::to_string(i + 1); }

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fixed(double v, int decimals) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick step covering `span` with about `count` ticks.
double tick_step(double span, int count) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::vector<std::string> trajectory_columns(const Trajectory& traj) {
  const auto& lay = traj.layout;
  const int N = lay.node_count();
  const Eigen::Index n = lay.n();
  std::vector<std::string> cols{"t"};
  for (Eigen::Index k = 0; k < n; ++k) cols.push_back("x[" + std::to_string(k + 1) + "]");
  const Sample* s0 = traj.samples.empty() ? nullptr : &traj.samples.front();
  for (int i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < n; ++k) cols.push_back("xhat" + idx(i) + "[" + std::to_string(k + 1) + "]");
  for (int i = 0; i < N; ++i) {
    const Eigen::Index d = s0 ? s0->residual[static_cast<std::size_t>(i)].size() : 0;
    for (Eigen::Index k = 0; k < d; ++k) cols.push_back("r" + idx(i) + "[" + std::to_string(k + 1) + "]");
  }
  for (int i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < n; ++k) cols.push_back("xcorr" + idx(i) + "[" + std::to_string(k + 1) + "]");
  for (int i = 0; i < N; ++i) {
    const Eigen::Index d = s0 ? s0->inputs.f[static_cast<std::size_t>(i)].size() : 0;
    for (Eigen::Index k = 0; k < d; ++k) cols.push_back("f" + idx(i) + "[" + std::to_string(k + 1) + "]");
  }
  for (int i = 0; i < N; ++i) cols.push_back("err" + idx(i));
  for (int i = 0; i < N; ++i) cols.push_back("errcorr" + idx(i));
  for (int i = 0; i < N; ++i) cols.push_back("rnorm" + idx(i));
  return cols;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto cols = trajectory_columns(traj);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  const int N = traj.layout.node_count();
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& s = traj.samples[k];
    std::vector<double> row{s.t};
    auto append = [&](const Eigen::VectorXd& v) { row.insert(row.end(), v.data(), v.data() + v.size()); };
    append(traj.x(k));
    for (int i = 0; i < N; ++i) append(traj.xhat(k, i));
    for (int i = 0; i < N; ++i) append(s.residual[static_cast<std::size_t>(i)]);
    for (int i = 0; i < N; ++i) append(s.corrected[static_cast<std::size_t>(i)]);
    for (int i = 0; i < N; ++i) append(s.inputs.f[static_cast<std::size_t>(i)]);
    for (int i = 0; i < N; ++i) row.push_back(traj.estimation_error(k, i).norm());
    for (int i = 0; i < N; ++i) row.push_back(traj.corrected_error(k, i).norm());
    for (int i = 0; i < N; ++i) row.push_back(s.residual[static_cast<std::size_t>(i)].norm());
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c], 12);
    out << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_trajectory_csv(out, traj);
}

int CsvTable::find(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::column(int index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(static_cast<std::size_t>(index)));
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      t.header.push_back(cell);
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size())
        throw std::runtime_error("csv: line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw std::runtime_error("csv: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return read_csv(in);
}

std::string render_svg(const CsvTable& table, const std::vector<std::string>& columns, const std::string& title) {
  if (columns.empty()) throw std::invalid_argument("plot: no columns selected");
  if (table.header.empty()) throw std::invalid_argument("plot: table has no columns");
  std::vector<int> sel;
  for (const auto& c : columns) {
    const int k = table.find(c);
    if (k < 0) {
      std::string avail;
      for (const auto& h : table.header) avail += (avail.empty() ? "" : ", ") + h;
      throw std::invalid_argument("plot: unknown column '" + c + "'; available: " + avail);
    }
    sel.push_back(k);
  }

  const double W = 800, Hgt = 480, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = Hgt - top - bottom;

  double t0 = std::numeric_limits<double>::infinity(), t1 = -t0, y0 = t0, y1 = -t0;
  for (const auto& r : table.rows) {
    t0 = std::min(t0, r[0]);
    t1 = std::max(t1, r[0]);
    for (int k : sel) {
      const double v = r[static_cast<std::size_t>(k)];
      if (!std::isfinite(v)) continue;
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(t0)) t0 = 0.0, t1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (t1 <= t0) t0 -= 0.5, t1 += 0.5;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;
  const double ty = tick_step(y1 - y0, 6);
  y0 = std::floor(y0 / ty) * ty;
  y1 = std::ceil(y1 / ty) * ty;
  const double tx = tick_step(t1 - t0, 8);

  auto px = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hgt << "\" viewBox=\"0 0 " << W
    << " " << Hgt << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << Hgt << "\" fill=\"white\"/>\n";
  if (!title.empty())
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";

  o << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t = std::ceil(t0 / tx) * tx; t <= t1 + 1e-9 * tx; t += tx)
    o << "<line x1=\"" << fixed(px(t), 2) << "\" y1=\"" << top << "\" x2=\"" << fixed(px(t), 2) << "\" y2=\""
      << top + ph << "\"/>\n";
  for (double y = y0; y <= y1 + 1e-9 * ty; y += ty)
    o << "<line x1=\"" << left << "\" y1=\"" << fixed(py(y), 2) << "\" x2=\"" << left + pw << "\" y2=\""
      << fixed(py(y), 2) << "\"/>\n";
  o << "</g>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t = std::ceil(t0 / tx) * tx; t <= t1 + 1e-9 * tx; t += tx)
    o << "<text x=\"" << fixed(px(t), 2) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << fmt(std::abs(t) < 1e-12 * tx ? 0.0 : t, 6) << "</text>\n";
  for (double y = y0; y <= y1 + 1e-9 * ty; y += ty)
    o << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(y) + 4, 2) << "\" text-anchor=\"end\">"
      << fmt(std::abs(y) < 1e-12 * ty ? 0.0 : y, 6) << "</text>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << Hgt - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(table.header[0]) << "</text>\n";

  for (std::size_t c = 0; c < sel.size(); ++c) {
    const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& r : table.rows) {
      const double v = r[static_cast<std::size_t>(sel[c])];
      if (!std::isfinite(v)) continue;
      o << (first ? "" : " ") << fixed(px(r[0]), 2) << "," << fixed(py(v), 2);
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(c);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(columns[c]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<Interval> flag_intervals(const std::vector<double>& t, const std::vector<double>& value, double threshold,
                                     double debounce) {
  if (t.size() != value.size()) throw std::invalid_argument("flag_intervals: length mismatch");
  std::vector<Interval> raw;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(value[k] >= threshold)) continue;
    if (!raw.empty() && k > 0 && raw.back().end == t[k - 1] && value[k - 1] >= threshold)
      raw.back().end = t[k];
    else
      raw.push_back({t[k], t[k]});
  }
  std::vector<Interval> out;
  for (const auto& iv : raw) {
    if (!out.empty() && iv.start - out.back().end < debounce)
      out.back().end = iv.end;
    else
      out.push_back(iv);
  }
  return out;
}

std::vector<std::vector<Interval>> flag_residuals(const CsvTable& table, double threshold, double debounce) {
  std::vector<std::vector<Interval>> out;
  if (table.header.empty()) return out;
  const auto t = table.column(0);
  for (int i = 1;; ++i) {
    const int k = table.find("rnorm" + std::to_string(i));
    if (k < 0) break;
    out.push_back(flag_intervals(t, table.column(k), threshold, debounce));
  }
  if (out.empty()) throw std::invalid_argument("flag: no rnorm<i> columns in the table");
  return out;
}

std::vector<NodeSummary> summarize(const Trajectory& traj, const std::vector<AttackSignal>& attacks) {
  const int N = traj.layout.node_count();
  const auto tracking = tracking_report(traj, attacks);
  std::vector<NodeSummary> out;
  const std::size_t last = traj.samples.size() - 1;
  for (int i = 0; i < N; ++i) {
    NodeSummary s{0, traj.estimation_error(last, i).norm(), 0, traj.corrected_error(last, i).norm(), 0,
                  tracking[static_cast<std::size_t>(i)].tail_error};
    for (std::size_t k = 0; k <= last; ++k) {
      s.peak_error = std::max(s.peak_error, traj.estimation_error(k, i).norm());
      s.peak_corrected_error = std::max(s.peak_corrected_error, traj.corrected_error(k, i).norm());
      s.peak_residual = std::max(s.peak_residual, traj.samples[k].residual[static_cast<std::size_t>(i)].norm());
    }
    out.push_back(s);
  }
  return out;
}

void print_summary(std::ostream& out, const std::vector<NodeSummary>& summary) {
  out << std::left << std::setw(6) << "node" << std::right << std::setw(13) << "peak|e|" << std::setw(13) << "final|e|"
      << std::setw(13) << "peak|z|" << std::setw(13) << "final|z|" << std::setw(13) << "peak|r|" << std::setw(13)
      << "tail|r-f|" << "\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& s = summary[i];
    out << std::left << std::setw(6) << i + 1 << std::right;
    for (double v : {s.peak_error, s.final_error, s.peak_corrected_error, s.final_corrected_error, s.peak_residual,
                     s.tail_error})
      out << std::setw(13) << fmt(v, 5);
    out << "\n";
  }
}

}  // namespace attackdet

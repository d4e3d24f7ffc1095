#include "dsmc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dsmc {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_escape(fields[i]);
  os << "\r\n";
}

std::string fmt(double v, int digits) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const std::vector<std::string>& run_csv_header() {
  static const std::vector<std::string> h = {
      "config_hash",        "topology",          "n",
      "k",                  "r",                 "pattern",
      "injection_rate",     "seed",              "measured_cycles",
      "read_throughput",    "write_throughput",  "mean_bank_util",
      "read_latency_mean",  "write_latency_mean", "latency_p99",
      "read_latency_count", "read_latency_se",   "write_latency_count",
      "write_latency_se",   "label"};
  return h;
}

std::vector<std::string> run_csv_row(const RunConfig& cfg, const SimStats& s) {
  const Histogram hr = latency_histogram(s, AccessKind::Read);
  const Histogram hw = latency_histogram(s, AccessKind::Write);
  const Histogram all = latency_histogram(s);
  auto mean = [](const Histogram& h) { return h.empty() ? NAN : h.mean(); };
  auto se = [](const Histogram& h) { return h.empty() ? NAN : h.standard_error(); };
  const NetworkConfig& n = cfg.network;
  return {hash_hex(config_hash(cfg)),
          to_string(n.kind),
          std::to_string(n.n),
          n.kind == TopologyKind::FlatCrossbar ? std::to_string(n.k) : "NA",
          std::to_string(n.r),
          to_string(cfg.traffic.kind),
          fmt(cfg.traffic.injection_rate, 4),
          std::to_string(cfg.policy.rng_seed),
          std::to_string(s.measured_cycles),
          fmt(throughput(s, AccessKind::Read)),
          fmt(throughput(s, AccessKind::Write)),
          fmt(bank_utilization(s).mean),
          fmt(mean(hr), 4),
          fmt(mean(hw), 4),
          all.empty() ? "NA" : std::to_string(all.percentile(0.99)),
          std::to_string(hr.count()),
          fmt(se(hr), 4),
          std::to_string(hw.count()),
          fmt(se(hw), 4),
          cfg.label};
}

void write_comparison(std::ostream& os, const std::string& pattern, const Comparison& c, bool with_header) {
  if (with_header) {
    os << c.header << "\r\n";
    write_csv_row(os, {"pattern", "metric", "value_a", "value_b", "relative_delta"});
  }
  for (const auto& r : c.rows) write_csv_row(os, {pattern, r.metric, fmt(r.value_a), fmt(r.value_b), fmt(r.relative_delta)});
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

// Round step of roughly span/5.
double nice_step(double span) {
  if (span <= 0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  const double W = 640, H = 420, L = 70, R = 170, T = 40, B = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  y0 = std::min(y0, 0.0);
  if (y1 <= y0) y1 = y0 + 1;
  const double ys = nice_step(y1 - y0);
  y1 = std::ceil(y1 / ys) * ys;
  const double xs = nice_step(x1 - x0);

  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(plot.title) << "</text>\n";
  // axes
  o << "<g stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n"
    << "</g>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double x = std::ceil(x0 / xs) * xs; x <= x1 + 1e-9 * xs; x += xs) {
    o << "<line x1=\"" << num(px(x)) << "\" y1=\"" << H - B << "\" x2=\"" << num(px(x)) << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/>"
      << "<text x=\"" << num(px(x)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << tick_label(x)
      << "</text>\n";
  }
  for (double y = y0; y <= y1 + 1e-9 * ys; y += ys) {
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << num(py(y)) << "\" x2=\"" << W - R << "\" y2=\"" << num(py(y))
      << "\" stroke=\"#dddddd\"/>"
      << "<text x=\"" << L - 8 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << tick_label(y)
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << xml_escape(plot.x_label) << "</text>\n"
    << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">"
    << xml_escape(plot.y_label) << "</text>\n</g>\n";
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* col = colors[i % (sizeof colors / sizeof *colors)];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      o << (first ? "" : " ") << num(px(x)) << "," << num(py(y));
      first = false;
    }
    o << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      o << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    const double ly = T + 10 + 20.0 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>"
      << "<text x=\"" << W - R + 46 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace dsmc

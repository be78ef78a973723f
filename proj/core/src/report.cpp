#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcut/error.hpp"
#include "qcut/harness.hpp"
#include "qcut/rng.hpp"

namespace qcut {

namespace {

using nlohmann::json;

// Fixed-precision decimal for text destinations that are diffed byte for
// byte (CSV cells, SVG coordinates). JSON numbers go through nlohmann's
// shortest-round-trip printer instead.
std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

json distribution_json(const Distribution& dist) {
  json out = json::object();
  if (dist.categorical()) {
    out["labels"] = dist.labels;
  } else {
    out["edges"] = dist.edges;
  }
  out["probs"] = dist.probs;
  return out;
}

json summary_json(const Summary& s) {
  return json{{"mean", s.mean},     {"std", s.std_dev}, {"min", s.min},
              {"q1", s.q1},         {"median", s.median}, {"q3", s.q3},
              {"max", s.max},       {"count", s.count}};
}

std::string digest(const std::string& content) {
  std::uint64_t h = detail::fnv1a64(0xcbf29ce484222325ULL, content);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) {
    fail(ErrorKind::Io, "short write to " + path.string());
  }
}

}  // namespace

std::string svg_file_name(const SweepRecord& record) {
  return "hist_" + std::to_string(record.point) + ".svg";
}

std::string render_histogram_svg(const SweepRecord& record) {
  const Distribution& dist = record.distribution;
  const std::size_t n = dist.probs.empty() ? 1 : dist.probs.size();

  constexpr double kWidth = 720.0;
  constexpr double kHeight = 360.0;
  constexpr double kLeft = 56.0;
  constexpr double kRight = 16.0;
  constexpr double kTop = 44.0;
  constexpr double kBottom = 48.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double peak = 0.0;
  for (double p : dist.probs) peak = std::max(peak, p);
  if (peak <= 0.0) peak = 1.0;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"360\" viewBox=\"0 0 720 360\">\n";
  svg += "<rect width=\"720\" height=\"360\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt("%.1f", kLeft) +
         "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
         "fill=\"#222222\">" +
         record.label + "  (hellinger " + fmt("%.6g", record.hellinger) +
         ")</text>\n";

  // Bars.
  const double bar_w = plot_w / static_cast<double>(n);
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    const double h = plot_h * (dist.probs[i] / peak);
    const double x = kLeft + bar_w * static_cast<double>(i);
    const double y = kTop + (plot_h - h);
    svg += "<rect x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y) +
           "\" width=\"" + fmt("%.2f", std::max(bar_w - 1.0, 0.5)) +
           "\" height=\"" + fmt("%.2f", h) + "\" fill=\"#4a7fb5\"/>\n";
  }

  // Axes.
  svg += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" +
         fmt("%.1f", kTop + plot_h) + "\" x2=\"" + fmt("%.1f", kLeft + plot_w) +
         "\" y2=\"" + fmt("%.1f", kTop + plot_h) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt("%.1f", kLeft) + "\" y1=\"" + fmt("%.1f", kTop) +
         "\" x2=\"" + fmt("%.1f", kLeft) + "\" y2=\"" +
         fmt("%.1f", kTop + plot_h) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // Y-axis peak tick.
  svg += "<text x=\"" + fmt("%.1f", kLeft - 6.0) + "\" y=\"" +
         fmt("%.1f", kTop + 5.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\" "
         "text-anchor=\"end\">" +
         fmt("%.3g", peak) + "</text>\n";

  // X-axis end labels: bin edges for binned data, first/last category
  // otherwise.
  std::string lo_label;
  std::string hi_label;
  if (dist.categorical()) {
    if (!dist.labels.empty()) {
      lo_label = dist.labels.front();
      hi_label = dist.labels.back();
    }
  } else if (dist.edges.size() >= 2) {
    lo_label = fmt("%.4g", dist.edges.front());
    hi_label = fmt("%.4g", dist.edges.back());
  }
  if (!lo_label.empty()) {
    svg += "<text x=\"" + fmt("%.1f", kLeft) + "\" y=\"" +
           fmt("%.1f", kTop + plot_h + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#333333\">" +
           lo_label + "</text>\n";
  }
  if (!hi_label.empty()) {
    svg += "<text x=\"" + fmt("%.1f", kLeft + plot_w) + "\" y=\"" +
           fmt("%.1f", kTop + plot_h + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\" "
           "text-anchor=\"end\">" +
           hi_label + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

std::string render_report_json(const SweepReport& report) {
  json out;
  out["kind"] = report.kind;
  out["threshold"] = report.config.threshold;
  out["config"] = json::parse(config_to_json(report.config));
  out["comparisons"] = report.comparisons;
  out["reference"] = distribution_json(report.reference);

  json records = json::array();
  for (const SweepRecord& rec : report.records) {
    // Wall-clock runtime deliberately stays out of this file (it lives in
    // the CSV) so the same sweep always serializes to the same bytes.
    records.push_back(json{{"point", rec.point},
                           {"label", rec.label},
                           {"hellinger", rec.hellinger},
                           {"summary", summary_json(rec.summary)},
                           {"distribution", distribution_json(rec.distribution)}});
  }
  out["records"] = std::move(records);

  if (report.tolerated.has_value()) {
    out["tolerated_attackers"] = *report.tolerated;
  } else {
    out["tolerated_attackers"] = nullptr;
  }

  // The charts are digested whether or not they are written to disk, so the
  // report is identical across output format choices. The CSV is not
  // digested: its runtime column varies run to run.
  json digests = json::object();
  for (const SweepRecord& rec : report.records) {
    digests[svg_file_name(rec)] = digest(render_histogram_svg(rec));
  }
  out["digests"] = std::move(digests);

  return out.dump(2) + "\n";
}

std::string render_sweep_csv(const SweepReport& report) {
  std::string csv = "point,label,hellinger,mean,std,runtime_ms\n";
  for (const SweepRecord& rec : report.records) {
    csv += std::to_string(rec.point);
    csv += ',';
    csv += rec.label;
    csv += ',';
    csv += fmt("%.17g", rec.hellinger);
    csv += ',';
    csv += fmt("%.17g", rec.summary.mean);
    csv += ',';
    csv += fmt("%.17g", rec.summary.std_dev);
    csv += ',';
    csv += fmt("%.3f", rec.runtime_ms);
    csv += '\n';
  }
  return csv;
}

void emit_report(const SweepReport& report, const std::string& out_dir,
                 const ReportFormats& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    fail(ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());
  }
  const std::filesystem::path dir(out_dir);
  if (formats.json) {
    write_file(dir / "report.json", render_report_json(report));
  }
  if (formats.csv) {
    write_file(dir / "sweep.csv", render_sweep_csv(report));
  }
  if (formats.svg) {
    for (const SweepRecord& rec : report.records) {
      write_file(dir / svg_file_name(rec), render_histogram_svg(rec));
    }
  }
}

}  // namespace qcut

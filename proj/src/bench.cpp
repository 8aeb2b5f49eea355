#include "sts/bench.hpp"

#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace sts {

Procedure Procedure::parse(std::string_view name) {
  if (name == "bbs") return {ProcKind::bbs, {}};
  if (name == "bfs") return {ProcKind::bfs, {}};
  if (name == "bfe") return {ProcKind::bfe, {}};
  if (name == "bfb") return {ProcKind::bfb, {}};
  if (name == "ibs") return {ProcKind::ibs, {}};
  if (name == "l-bfs") return {ProcKind::l_bfs, {}};
  if (name == "l-ibs") return {ProcKind::l_ibs, {}};
  if (name == "restricted") return {ProcKind::restricted_bfs, {}};
  if (name.starts_with("gdsa:")) {
    const auto model = name.substr(5);
    // Bare "sim" takes the full-range slope of the table it is bound to.
    if (model == "sim") return {ProcKind::gdsa, ProbeModel{ProbeKind::sim, 0.0}};
    return {ProcKind::gdsa, ProbeModel::parse(model)};
  }
  throw std::invalid_argument("unknown procedure '" + std::string(name) + "'");
}

std::string Procedure::name() const {
  switch (kind) {
    case ProcKind::bbs: return "bbs";
    case ProcKind::bfs: return "bfs";
    case ProcKind::bfe: return "bfe";
    case ProcKind::bfb: return "bfb";
    case ProcKind::ibs: return "ibs";
    case ProcKind::l_bfs: return "l-bfs";
    case ProcKind::l_ibs: return "l-ibs";
    case ProcKind::gdsa: return "gdsa:" + probe_model.name();
    case ProcKind::restricted_bfs: return "restricted";
  }
  return "?";
}

void summarize_times(BenchReport& r) {
  if (r.rep_seconds.empty()) return;
  std::vector<double> t = r.rep_seconds;
  std::sort(t.begin(), t.end());
  r.min_seconds = t.front();
  r.mean_seconds = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
  const std::size_t h = t.size() / 2;
  r.median_seconds = t.size() % 2 ? t[h] : 0.5 * (t[h - 1] + t[h]);
}

ReportFormat parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "text") return ReportFormat::text;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown output format '" + std::string(name) + "'");
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(4) << v;
  return s.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json j = {{"procedure", r.procedure},   {"dataset", r.dataset},
                      {"m", r.m},                   {"reps", r.reps},
                      {"rep_seconds", r.rep_seconds}, {"mean_seconds", r.mean_seconds},
                      {"median_seconds", r.median_seconds}, {"min_seconds", r.min_seconds},
                      {"mean_iterations", r.mean_iterations}, {"checksum", hex(r.checksum)}};
  j["reduction_factor"] = r.reduction_factor ? nlohmann::json(*r.reduction_factor) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string format_reports(const std::vector<BenchReport>& reports, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      out << arr.dump(2) << '\n';
      break;
    }
    case ReportFormat::csv:
      out << "procedure,dataset,m,reps,mean_s,median_s,min_s,mean_iterations,reduction_factor,checksum\n";
      for (const auto& r : reports)
        out << r.procedure << ',' << r.dataset << ',' << r.m << ',' << r.reps << ',' << sci(r.mean_seconds) << ','
            << sci(r.median_seconds) << ',' << sci(r.min_seconds) << ',' << fixed(r.mean_iterations, 3) << ','
            << (r.reduction_factor ? fixed(*r.reduction_factor, 6) : "") << ',' << hex(r.checksum) << '\n';
      break;
    case ReportFormat::text:
      out << std::left << std::setw(14) << "procedure" << std::setw(20) << "dataset" << std::right << std::setw(10)
          << "m" << std::setw(6) << "reps" << std::setw(13) << "median s" << std::setw(13) << "mean s"
          << std::setw(13) << "min s" << std::setw(10) << "iters" << std::setw(10) << "rf %" << '\n';
      for (const auto& r : reports)
        out << std::left << std::setw(14) << r.procedure << std::setw(20) << r.dataset << std::right
            << std::setw(10) << r.m << std::setw(6) << r.reps << std::setw(13) << sci(r.median_seconds)
            << std::setw(13) << sci(r.mean_seconds) << std::setw(13) << sci(r.min_seconds) << std::setw(10)
            << fixed(r.mean_iterations, 2) << std::setw(10)
            << (r.reduction_factor ? fixed(100.0 * *r.reduction_factor, 2) : "-") << '\n';
      break;
  }
  return out.str();
}

std::string format_breakeven(const BenchReport& r, ReportFormat format) {
  std::ostringstream out;
  const std::string verdict =
      r.breakeven ? fixed(*r.breakeven, 4) : "not found below " + fixed(kMaxReductionFactor, 4);
  switch (format) {
    case ReportFormat::json: {
      nlohmann::json sweep = nlohmann::json::array();
      for (const auto& s : r.sweep)
        sweep.push_back({{"p", s.p},
                         {"restricted_median_seconds", s.restricted_median},
                         {"competitor_median_seconds", s.competitor_median},
                         {"restricted_wins", s.restricted_wins}});
      nlohmann::json j = {{"dataset", r.dataset},   {"competitor", r.competitor}, {"m", r.m},
                          {"reps", r.reps},         {"sweep", sweep},             {"violations", r.violations},
                          {"checksum", hex(r.checksum)}};
      j["breakeven"] = r.breakeven ? nlohmann::json(*r.breakeven) : nlohmann::json(nullptr);
      out << j.dump(2) << '\n';
      break;
    }
    case ReportFormat::csv:
      out << "dataset,competitor,p,restricted_median_s,competitor_median_s,restricted_wins\n";
      for (const auto& s : r.sweep)
        out << r.dataset << ',' << r.competitor << ',' << s.p << ',' << sci(s.restricted_median) << ','
            << sci(s.competitor_median) << ',' << (s.restricted_wins ? 1 : 0) << '\n';
      break;
    case ReportFormat::text:
      out << std::right << std::setw(10) << "p" << std::setw(16) << "restricted s" << std::setw(16)
          << (r.competitor + " s") << std::setw(8) << "wins" << '\n';
      for (const auto& s : r.sweep)
        out << std::setw(10) << fixed(s.p, 4) << std::setw(16) << sci(s.restricted_median) << std::setw(16)
            << sci(s.competitor_median) << std::setw(8) << (s.restricted_wins ? "yes" : "no") << '\n';
      out << "breakeven: " << verdict << '\n';
      for (const auto& v : r.violations) out << "warning: " << v << '\n';
      break;
  }
  return out.str();
}

}  // namespace sts

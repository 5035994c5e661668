#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swkrr/harness.hpp"

namespace swkrr {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

}  // namespace

std::vector<MethodSummary> summarize(const std::vector<TrialResult>& results) {
  std::vector<MethodSummary> out;
  for (const auto& r : results) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MethodSummary& s) { return s.method == r.method; });
    if (it == out.end()) {
      out.push_back({r.method, 0.0, 0.0, 0});
      it = out.end() - 1;
    }
    it->mean += r.test_score;
    ++it->count;
  }
  for (auto& s : out) {
    s.mean /= s.count;
    double ss = 0.0;
    for (const auto& r : results) {
      if (r.method == s.method) ss += (r.test_score - s.mean) * (r.test_score - s.mean);
    }
    s.sd = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
  }
  return out;
}

std::string results_csv(const std::vector<TrialResult>& results) {
  std::ostringstream out;
  out << "method,repeat,chosen_lambda,chosen_gammas,val_score,test_score,seconds\n";
  for (const auto& r : results) {
    out << r.method << ',' << r.repeat << ',' << fmt17(r.chosen_lambda) << ',' << r.chosen_gammas() << ','
        << fmt17(r.val_score) << ',' << fmt17(r.test_score) << ',' << fmt17(r.seconds) << '\n';
  }
  return out.str();
}

std::string summary_markdown(const std::vector<TrialResult>& results, const std::string& metric_name) {
  std::ostringstream out;
  out << "| Method | Test " << metric_name << " mean (sd) | mean | sd | repeats |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& s : summarize(results)) {
    out << "| " << s.method << " | " << fmt_short(s.mean) << " (" << fmt_short(s.sd) << ") | " << fmt17(s.mean) << " | "
        << fmt17(s.sd) << " | " << s.count << " |\n";
  }
  return out.str();
}

void emit_report(const std::vector<TrialResult>& results, const std::string& dir, const std::string& metric_name) {
  if (results.empty()) throw InvalidInput("emit_report: no results to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidInput("emit_report: cannot create " + dir + ": " + ec.message());
  write_file(std::filesystem::path(dir) / "results.csv", results_csv(results));
  write_file(std::filesystem::path(dir) / "summary.md", summary_markdown(results, metric_name));
}

}  // namespace swkrr

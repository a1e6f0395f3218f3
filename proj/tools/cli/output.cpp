#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "handles.hpp"

namespace cli {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.median = quantile(values, 0.5);
  s.q25 = quantile(values, 0.25);
  s.q75 = quantile(values, 0.75);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void LongTable::add(const std::string& series, std::size_t iteration, double value) {
  body_ += series;
  body_ += ',';
  body_ += std::to_string(iteration);
  body_ += ',';
  body_ += fmt(value);
  body_ += '\n';
}

void LongTable::add_summary(const std::string& prefix, std::size_t iteration,
                            const std::vector<double>& values) {
  const Summary s = summarize(values);
  add(prefix + "_median", iteration, s.median);
  add(prefix + "_q25", iteration, s.q25);
  add(prefix + "_q75", iteration, s.q75);
  add(prefix + "_mean", iteration, s.mean);
  add(prefix + "_std", iteration, s.stddev);
}

void LongTable::write(const std::string& path) const {
  write_text(path, std::string("# schema: ") + kAggregateSchema + "\nseries,iteration,value\n" +
                       body_);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  os.close();
  if (!os) throw ApiError(RCLQR_ERR_IO, "cannot write '" + path + "'");
}

}  // namespace cli

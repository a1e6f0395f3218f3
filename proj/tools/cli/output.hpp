#pragma once

#include <string>
#include <vector>

namespace cli {

inline constexpr const char* kAggregateSchema = "rclqr.aggregate.v1";
inline constexpr const char* kCheckSchema = "rclqr.check_report.v1";
inline constexpr const char* kTrajectorySchema = "rclqr.trajectory.v1";

// Shortest round-trip decimal form.
std::string fmt(double v);

struct Summary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (0 for one value)
};

Summary summarize(std::vector<double> values);

// Long-format "series,iteration,value" rows.
class LongTable {
 public:
  void add(const std::string& series, std::size_t iteration, double value);
  // Adds <prefix>_median/_q25/_q75/_mean/_std for one iteration.
  void add_summary(const std::string& prefix, std::size_t iteration,
                   const std::vector<double>& values);
  void write(const std::string& path) const;

 private:
  std::string body_;
};

void write_text(const std::string& path, const std::string& text);

}  // namespace cli

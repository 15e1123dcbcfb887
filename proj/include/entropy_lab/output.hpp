#pragma once

// Experiment artifacts: RFC-4180 CSV tables with 17-significant-digit floats,
// 800x600 SVG line plots drawn as native paths, and the run manifest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace entropy_lab {

using Cell = std::variant<double, std::int64_t, std::string>;

/// printf %.17g; non-finite values print as nan, inf and -inf.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(std::vector<Cell> row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  std::vector<Series> series;
};

std::string render_svg(const Plot& plot);

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Collects the outputs of one experiment run under a directory.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void csv(const std::string& name, const CsvTable& table);
  void svg(const std::string& name, const Plot& plot);
  void constant(const std::string& key, double value);
  void note(const std::string& key, const std::string& value);
  bool check(const std::string& name, bool passed, const std::string& detail = {});
  /// Lists a file written by someone else, relative to dir().
  void record(const std::string& name) { files_.push_back(name); }

  const std::vector<Assertion>& assertions() const { return assertions_; }
  bool passed() const;
  std::vector<std::string> files() const { return files_; }

  /// Writes manifest.txt: config echo, version, measured constants, the
  /// assertion table and the PASSED / FAILED marker.
  void write_manifest(const std::string& experiment,
                      const std::vector<std::pair<std::string, std::string>>& config) const;

 private:
  void write(const std::string& name, const std::string& text);

  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, std::string>> constants_;
  std::vector<Assertion> assertions_;
};

/// Worker count: hardware concurrency capped by ENTROPY_LAB_THREADS.
int worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Results must
/// be stored by index; the first exception is rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn);

const char* version() noexcept;

}  // namespace entropy_lab

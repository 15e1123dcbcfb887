#include "entropy_lab/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "entropy_lab/error.hpp"

namespace entropy_lab {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
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

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Ticks at 1, 2 or 5 times a power of ten, about five across [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {2.0, 5.0, 10.0})
    if (raw > step) step = m * mag;
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<Cell> row) {
  require(row.size() == header_.size(), ErrorCode::InvalidArgument, "row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += csv_field(header_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const double* d = std::get_if<double>(&row[i]))
        out += format_double(*d);
      else if (const auto* n = std::get_if<std::int64_t>(&row[i]))
        out += std::to_string(*n);
      else
        out += csv_field(std::get<std::string>(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string render_svg(const Plot& plot) {
  constexpr double W = 800, H = 600, L = 90, R = 170, T = 50, B = 70;
  auto tx = [&](double x) { return plot.logx ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.logx && s.x[i] <= 0)) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 1e-300 * std::max(1.0, std::abs(y0))) {
    const double pad = std::max(std::abs(y0) * 0.05, 1e-12);
    y0 -= pad, y1 += pad;
  } else {
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;
  }
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto pxt = [&](double t) { return L + (t - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(W / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">"
    << xml_escape(plot.title) << "</text>\n";
  o << "<path d=\"M" << fixed(L) << ' ' << fixed(T) << " L" << fixed(L) << ' ' << fixed(H - B)
    << " L" << fixed(W - R) << ' ' << fixed(H - B) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1)) {
    const double x = pxt(t);
    o << "<path d=\"M" << fixed(x) << ' ' << fixed(H - B) << " L" << fixed(x) << ' '
      << fixed(H - B + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(H - B + 20)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << tick_label(plot.logx ? std::pow(10.0, t) : t) << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    const double y = py(t);
    o << "<path d=\"M" << fixed(L - 5) << ' ' << fixed(y) << " L" << fixed(L) << ' ' << fixed(y)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(L - 8) << "\" y=\"" << fixed(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
      << "</text>\n";
  }
  o << "<text x=\"" << fixed((L + W - R) / 2) << "\" y=\"" << fixed(H - 20)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
    << xml_escape(plot.xlabel) << "</text>\n";
  o << "<text x=\"20\" y=\"" << fixed((T + H - B) / 2) << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
    << fixed((T + H - B) / 2) << ")\">" << xml_escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.logx && s.x[i] <= 0)) {
        pen = false;
        continue;
      }
      d += (pen ? " L" : (d.empty() ? "M" : " M")) + fixed(px(s.x[i])) + ' ' + fixed(py(s.y[i]));
      pen = true;
    }
    if (!d.empty())
      o << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    const double ly = T + 10 + 20 * static_cast<double>(k);
    o << "<path d=\"M" << fixed(W - R + 10) << ' ' << fixed(ly) << " L" << fixed(W - R + 35) << ' '
      << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fixed(W - R + 40) << "\" y=\"" << fixed(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

Artifacts::Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void Artifacts::write(const std::string& name, const std::string& text) {
  std::ofstream f(dir_ / name, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot write " + (dir_ / name).string());
  f << text;
  files_.push_back(name);
}

void Artifacts::csv(const std::string& name, const CsvTable& table) { write(name, table.str()); }

void Artifacts::svg(const std::string& name, const Plot& plot) { write(name, render_svg(plot)); }

void Artifacts::constant(const std::string& key, double value) {
  constants_.emplace_back(key, format_double(value));
}

void Artifacts::note(const std::string& key, const std::string& value) {
  constants_.emplace_back(key, value);
}

bool Artifacts::check(const std::string& name, bool passed, const std::string& detail) {
  assertions_.push_back({name, passed, detail});
  return passed;
}

bool Artifacts::passed() const {
  return std::all_of(assertions_.begin(), assertions_.end(),
                     [](const Assertion& a) { return a.passed; });
}

void Artifacts::write_manifest(const std::string& experiment,
                               const std::vector<std::pair<std::string, std::string>>& config) const {
  std::ostringstream o;
  o << "experiment = " << experiment << '\n';
  o << "version = " << version() << '\n';
  o << "status = " << (passed() ? "PASSED" : "FAILED") << '\n';
  o << "\n[config]\n";
  for (const auto& [k, v] : config) o << k << " = " << v << '\n';
  o << "\n[constants]\n";
  for (const auto& [k, v] : constants_) o << k << " = " << v << '\n';
  o << "\n[assertions]\n";
  for (const auto& a : assertions_)
    o << (a.passed ? "PASS " : "FAIL ") << a.name << (a.detail.empty() ? "" : " : ") << a.detail
      << '\n';
  o << "\n[files]\n";
  for (const auto& f : files_) o << f << '\n';
  std::ofstream f(dir_ / "manifest.txt", std::ios::binary);
  f << o.str();
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ENTROPY_LAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex m;
  std::exception_ptr first;
  int next = 0;
  auto work = [&] {
    for (;;) {
      int i;
      {
        std::lock_guard lock(m);
        if (next >= n || first) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

const char* version() noexcept { return ENTROPY_LAB_VERSION; }

}  // namespace entropy_lab

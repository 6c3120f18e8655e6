#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace loctime {

// A marked increment values[index] - values[index-1] that is a jump of the path
// at times[index]. pre_value is the left limit x_{t-}.
struct JumpMark {
  std::size_t index = 0;
  double pre_value = 0.0;

  friend bool operator==(const JumpMark&, const JumpMark&) = default;
};

struct Jump {
  double time = 0.0;
  double size = 0.0;
};

// Sample skeleton of a cadlag path. Read as a step function that changes at the
// sample instants; marked increments are jumps, all other increments are
// continuous motion seen at grid resolution.
class SampledCadlagPath {
 public:
  SampledCadlagPath() = default;

  SampledCadlagPath(std::vector<double> times, std::vector<double> values, std::vector<JumpMark> jumps = {})
      : times_(std::move(times)), values_(std::move(values)), jumps_(std::move(jumps)) {
    validate();
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<JumpMark>& jumps() const { return jumps_; }
  std::size_t size() const { return times_.size(); }
  double horizon() const { return times_.back(); }
  double time(std::size_t i) const { return times_[i]; }
  double value(std::size_t i) const { return values_[i]; }
  bool is_jump(std::size_t i) const { return !jump_flag_.empty() && jump_flag_[i] != 0; }

  // Index of the last sample with time <= t (t >= 0).
  std::size_t index_at(double t) const {
    if (t < 0.0) throw std::domain_error("SampledCadlagPath: negative time");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
  }
  double value_at(double t) const { return values_[index_at(t)]; }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  friend bool operator==(const SampledCadlagPath& a, const SampledCadlagPath& b) {
    return a.times_ == b.times_ && a.values_ == b.values_ && a.jumps_ == b.jumps_;
  }

 private:
  void validate() {
    if (times_.size() != values_.size()) throw std::invalid_argument("path: times and values differ in length");
    if (times_.size() < 2) throw std::invalid_argument("path: need at least two samples");
    if (times_.front() != 0.0) throw std::invalid_argument("path: first sample time must be 0");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
        throw std::invalid_argument("path: non-finite sample at row " + std::to_string(i));
      if (i > 0 && !(times_[i] > times_[i - 1]))
        throw std::invalid_argument("path: times not strictly increasing at row " + std::to_string(i));
    }
    std::sort(jumps_.begin(), jumps_.end(), [](const JumpMark& a, const JumpMark& b) { return a.index < b.index; });
    jump_flag_.assign(times_.size(), 0);
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      const auto& m = jumps_[j];
      if (m.index == 0 || m.index >= times_.size())
        throw std::invalid_argument("path: jump mark index out of range");
      if (j > 0 && jumps_[j - 1].index == m.index) throw std::invalid_argument("path: duplicate jump mark");
      if (m.pre_value != values_[m.index - 1])
        throw std::invalid_argument("path: jump at row " + std::to_string(m.index) +
                                    " has pre-jump value different from the previous sample");
      jump_flag_[m.index] = 1;
    }
  }

  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<JumpMark> jumps_;
  std::vector<char> jump_flag_;
};

// Path on [0, t]. The last sample sits at t and repeats the value of the last
// grid point <= t. Jumps at times <= t are kept (integrals are over (0, t]).
inline SampledCadlagPath restrict(const SampledCadlagPath& path, double t) {
  if (!(t > 0.0) || t > path.horizon()) throw std::domain_error("restrict: t outside (0, T]");
  std::size_t last = path.index_at(t);
  std::vector<double> times(path.times().begin(), path.times().begin() + static_cast<std::ptrdiff_t>(last) + 1);
  std::vector<double> values(path.values().begin(), path.values().begin() + static_cast<std::ptrdiff_t>(last) + 1);
  if (times.back() < t) {
    times.push_back(t);
    values.push_back(values.back());
  }
  std::vector<JumpMark> jumps;
  for (const auto& m : path.jumps())
    if (m.index <= last) jumps.push_back(m);
  return SampledCadlagPath(std::move(times), std::move(values), std::move(jumps));
}

inline std::vector<Jump> jump_sizes(const SampledCadlagPath& path) {
  std::vector<Jump> out;
  out.reserve(path.jumps().size());
  for (const auto& m : path.jumps()) out.push_back({path.time(m.index), path.value(m.index) - m.pre_value});
  return out;
}

// [x]^d_T: sum of squared marked jumps.
inline double jump_quadratic_variation(const SampledCadlagPath& path) {
  double s = 0.0;
  for (const auto& j : jump_sizes(path)) s += j.size * j.size;
  return s;
}

// [x]^c_T on the skeleton: sum of squared unmarked increments.
inline double continuous_quadratic_variation(const SampledCadlagPath& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path.is_jump(i)) continue;
    double d = path.value(i) - path.value(i - 1);
    s += d * d;
  }
  return s;
}

inline double total_variation(const SampledCadlagPath& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) s += std::abs(path.value(i) - path.value(i - 1));
  return s;
}

inline double max_abs_increment(const SampledCadlagPath& path, bool include_jumps = true) {
  double m = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (!include_jumps && path.is_jump(i)) continue;
    m = std::max(m, std::abs(path.value(i) - path.value(i - 1)));
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV: header t,x,jump,pre_x; pre_x is empty on rows with jump = 0.

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t row, const char* column) {
  if (s.empty()) throw std::invalid_argument("csv row " + std::to_string(row) + ": empty " + column);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw std::invalid_argument("csv row " + std::to_string(row) + ": bad number in " + column + ": '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_csv(const SampledCadlagPath& path, std::ostream& out) {
  out << "t,x,jump,pre_x\n";
  std::size_t next = 0;
  const auto& marks = path.jumps();
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << detail::format_double(path.time(i)) << ',' << detail::format_double(path.value(i)) << ',';
    if (next < marks.size() && marks[next].index == i) {
      out << "1," << detail::format_double(marks[next].pre_value) << '\n';
      ++next;
    } else {
      out << "0,\n";
    }
  }
}

inline SampledCadlagPath read_csv(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  std::vector<double> times, values;
  std::vector<JumpMark> jumps;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split(line);
    if (!header_seen) {
      header_seen = true;
      if (cols.size() < 2 || cols[0] != "t" || cols[1] != "x")
        throw std::invalid_argument("csv: expected header t,x,jump,pre_x");
      continue;
    }
    if (cols.size() < 2) throw std::invalid_argument("csv row " + std::to_string(row) + ": too few columns");
    times.push_back(detail::parse_double(cols[0], row, "t"));
    values.push_back(detail::parse_double(cols[1], row, "x"));
    bool jump = cols.size() > 2 && !cols[2].empty() && cols[2] != "0";
    if (jump) {
      if (cols[2] != "1") throw std::invalid_argument("csv row " + std::to_string(row) + ": jump must be 0 or 1");
      if (cols.size() < 4 || cols[3].empty())
        throw std::invalid_argument("csv row " + std::to_string(row) + ": jump row without pre_x");
      double pre = detail::parse_double(cols[3], row, "pre_x");
      if (values.size() < 2) throw std::invalid_argument("csv: first sample cannot be a jump");
      if (pre != values[values.size() - 2])
        throw std::invalid_argument("csv row " + std::to_string(row) + ": pre_x differs from previous x");
      jumps.push_back({values.size() - 1, pre});
    }
  }
  if (!header_seen) throw std::invalid_argument("csv: empty input");
  if (times.empty()) throw std::invalid_argument("csv: no samples");
  return SampledCadlagPath(std::move(times), std::move(values), std::move(jumps));
}

// ---------------------------------------------------------------------------
// Partitions are strictly increasing index lists into the sample grid that
// contain the first and the last sample.

using Partition = std::vector<std::size_t>;

inline double mesh(const SampledCadlagPath& path, const Partition& p) {
  double m = 0.0;
  for (std::size_t j = 1; j < p.size(); ++j) m = std::max(m, path.time(p[j]) - path.time(p[j - 1]));
  return m;
}

// Partition restricted to [0, t] with the last interval clipped at t, i.e.
// the points t_j ∧ t that carry distinct sample indices.
inline Partition clip_partition(const SampledCadlagPath& path, const Partition& p, double t) {
  std::size_t last = path.index_at(t);
  Partition out;
  for (std::size_t idx : p) {
    if (idx > last) break;
    out.push_back(idx);
  }
  if (out.empty() || out.back() != last) out.push_back(last);
  return out;
}

class PartitionScheme {
 public:
  PartitionScheme() = default;

  // Partition n = { floor(k S / 2^n) : k = 0..2^n } with S = number of steps.
  static PartitionScheme dyadic(const SampledCadlagPath& path, const std::vector<int>& levels, bool include_jumps = false) {
    PartitionScheme s;
    std::size_t steps = path.size() - 1;
    for (int n : levels) {
      if (n < 0 || n > 62) throw std::invalid_argument("dyadic partition level out of range");
      std::size_t count = std::size_t{1} << n;
      Partition p;
      for (std::size_t k = 0; k <= count; ++k) {
        auto idx = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * steps) / count);
        if (p.empty() || p.back() != idx) p.push_back(idx);
      }
      s.levels_.push_back(std::move(p));
    }
    s.labels_.assign(levels.begin(), levels.end());
    s.finish(path, include_jumps);
    return s;
  }

  // Partition with `count` intervals of (nearly) equal index length.
  static PartitionScheme uniform(const SampledCadlagPath& path, const std::vector<int>& counts, bool include_jumps = false) {
    PartitionScheme s;
    std::size_t steps = path.size() - 1;
    for (int c : counts) {
      if (c < 1) throw std::invalid_argument("uniform partition needs a positive interval count");
      Partition p;
      for (std::size_t k = 0; k <= static_cast<std::size_t>(c); ++k) {
        std::size_t idx = k * steps / static_cast<std::size_t>(c);
        if (p.empty() || p.back() != idx) p.push_back(idx);
      }
      s.levels_.push_back(std::move(p));
    }
    s.labels_.assign(counts.begin(), counts.end());
    s.finish(path, include_jumps);
    return s;
  }

  // Explicit time lists; every time must be a sample time of the path.
  static PartitionScheme explicit_times(const SampledCadlagPath& path, const std::vector<std::vector<double>>& lists,
                                        bool include_jumps = false) {
    PartitionScheme s;
    for (std::size_t n = 0; n < lists.size(); ++n) {
      Partition p;
      for (double t : lists[n]) {
        auto it = std::lower_bound(path.times().begin(), path.times().end(), t);
        if (it == path.times().end() || *it != t)
          throw std::invalid_argument("explicit partition: time " + detail::format_double(t) + " is not a sample time");
        auto idx = static_cast<std::size_t>(it - path.times().begin());
        if (!p.empty() && idx <= p.back()) throw std::invalid_argument("explicit partition: times not increasing");
        p.push_back(idx);
      }
      if (p.empty() || p.front() != 0 || p.back() != path.size() - 1)
        throw std::invalid_argument("explicit partition must contain 0 and T");
      s.levels_.push_back(std::move(p));
      s.labels_.push_back(static_cast<int>(n));
    }
    s.finish(path, include_jumps);
    return s;
  }

  // The whole sample grid as a single level.
  static PartitionScheme full_grid(const SampledCadlagPath& path) {
    PartitionScheme s;
    Partition p(path.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
    s.levels_.push_back(std::move(p));
    s.labels_.push_back(0);
    s.finish(path, false);
    return s;
  }

  std::size_t size() const { return levels_.size(); }
  const Partition& level(std::size_t n) const { return levels_.at(n); }
  int label(std::size_t n) const { return labels_.at(n); }
  bool refining() const { return refining_; }
  bool exhausts_jumps() const { return exhausts_jumps_; }

  // Meshes must be non-increasing and the finest below `bound`.
  bool mesh_ok(const SampledCadlagPath& path, double bound) const {
    if (levels_.empty()) return false;
    for (std::size_t n = 1; n < levels_.size(); ++n)
      if (mesh(path, levels_[n]) > mesh(path, levels_[n - 1])) return false;
    return mesh(path, levels_.back()) <= bound;
  }

 private:
  void finish(const SampledCadlagPath& path, bool include_jumps) {
    if (include_jumps) {
      for (auto& p : levels_) {
        for (const auto& m : path.jumps()) p.push_back(m.index);
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
      }
    }
    refining_ = true;
    for (std::size_t n = 1; n < levels_.size(); ++n)
      if (!std::includes(levels_[n].begin(), levels_[n].end(), levels_[n - 1].begin(), levels_[n - 1].end()))
        refining_ = false;
    // All levels contain every marked jump once the finest one does and the scheme refines;
    // we require it of the last level only, which is what "sufficiently fine" can mean here.
    exhausts_jumps_ = refining_ && !levels_.empty();
    if (exhausts_jumps_)
      for (const auto& m : path.jumps())
        if (!std::binary_search(levels_.back().begin(), levels_.back().end(), m.index)) exhausts_jumps_ = false;
  }

  std::vector<Partition> levels_;
  std::vector<int> labels_;
  bool refining_ = true;
  bool exhausts_jumps_ = false;
};

}  // namespace loctime

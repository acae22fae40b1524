#include "switchlab/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "switchlab/errors.hpp"

namespace switchlab {

namespace {
constexpr std::size_t kMaxSupport = 24;
}

Schedule::Schedule(std::initializer_list<int> entries) {
  entries_.reserve(entries.size());
  for (int v : entries) {
    if (v != 0 && v != 1)
      throw DomainError("schedule entries must be 0 or 1");
    entries_.push_back(static_cast<std::uint8_t>(v));
  }
}

Schedule::Schedule(std::vector<std::uint8_t> entries) : entries_(std::move(entries)) {
  for (auto v : entries_)
    if (v > 1)
      throw DomainError("schedule entries must be 0 or 1");
}

Schedule Schedule::unit(std::size_t n, std::size_t i) {
  Schedule s(n);
  s.entries_.at(i) = 1;
  return s;
}

Schedule Schedule::from_ints(std::span<const int> entries) {
  std::vector<std::uint8_t> v;
  v.reserve(entries.size());
  for (int e : entries) {
    if (e != 0 && e != 1)
      throw DomainError("schedule entries must be 0 or 1");
    v.push_back(static_cast<std::uint8_t>(e));
  }
  return Schedule(std::move(v));
}

int Schedule::weight() const {
  return std::accumulate(entries_.begin(), entries_.end(), 0);
}

bool Schedule::dominated_by(const Schedule& other) const {
  if (other.size() != size())
    throw DimensionError("schedule length mismatch");
  for (std::size_t i = 0; i < size(); ++i)
    if (entries_[i] > other.entries_[i])
      return false;
  return true;
}

bool Schedule::fits_under(std::span<const double> bound, double tol) const {
  if (bound.size() != size())
    throw DimensionError("bound length mismatch");
  for (std::size_t i = 0; i < size(); ++i)
    if (entries_[i] && 1.0 > bound[i] + tol)
      return false;
  return true;
}

std::string Schedule::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < size(); ++i)
    os << (i ? "," : "") << int(entries_[i]);
  os << ')';
  return os.str();
}

ScheduleSet::ScheduleSet(std::vector<Schedule> sorted_unique, std::size_t n)
    : n_(n), schedules_(std::move(sorted_unique)) {
  for (const auto& s : schedules_)
    k_max_ = std::max(k_max_, s.weight());
}

ScheduleSet ScheduleSet::from_closed(std::vector<Schedule> schedules, std::size_t n) {
  for (const auto& s : schedules)
    if (s.size() != n)
      throw DimensionError("schedule of length " + std::to_string(s.size()) + " in a set over " +
                           std::to_string(n) + " queues");
  std::sort(schedules.begin(), schedules.end());
  schedules.erase(std::unique(schedules.begin(), schedules.end()), schedules.end());
  ScheduleSet set(std::move(schedules), n);
  if (!set.contains(Schedule(n)))
    throw DomainError("schedule set is missing the zero schedule");
  for (std::size_t i = 0; i < n; ++i)
    if (!set.contains(Schedule::unit(n, i)))
      throw DomainError("schedule set is missing unit vector e_" + std::to_string(i));
  if (!set.is_monotone())
    throw DomainError("schedule set is not closed under sub-schedules");
  return set;
}

std::optional<std::size_t> ScheduleSet::index_of(const Schedule& s) const {
  auto it = std::lower_bound(schedules_.begin(), schedules_.end(), s);
  if (it == schedules_.end() || *it != s)
    return std::nullopt;
  return static_cast<std::size_t>(it - schedules_.begin());
}

bool ScheduleSet::is_monotone() const {
  // Closure under removing one queue at a time implies closure under all sub-schedules.
  for (const auto& s : schedules_) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!s[i])
        continue;
      Schedule sub = s;
      sub.set(i, false);
      if (!contains(sub))
        return false;
    }
  }
  return true;
}

ScheduleSet monotone_close(std::span<const Schedule> schedules, std::size_t n) {
  std::vector<Schedule> out;
  out.emplace_back(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(Schedule::unit(n, i));

  for (const auto& s : schedules) {
    if (s.size() != n)
      throw DimensionError("schedule of length " + std::to_string(s.size()) + " passed to closure over " +
                           std::to_string(n) + " queues");
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i)
      if (s[i])
        support.push_back(i);
    if (support.size() > kMaxSupport)
      throw CapacityError("schedule support too large to enumerate sub-schedules");
    const std::uint64_t subsets = std::uint64_t{1} << support.size();
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      Schedule sub(n);
      for (std::size_t b = 0; b < support.size(); ++b)
        if (mask >> b & 1U)
          sub.set(support[b], true);
      out.push_back(std::move(sub));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return ScheduleSet(std::move(out), n);
}

}  // namespace switchlab

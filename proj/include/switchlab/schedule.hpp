#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace switchlab {

/// A 0/1 service vector: entry i is 1 when queue i receives one unit of service in the slot.
class Schedule {
public:
  Schedule() = default;
  explicit Schedule(std::size_t n) : entries_(n, 0) {}
  Schedule(std::initializer_list<int> entries);
  explicit Schedule(std::vector<std::uint8_t> entries);

  static Schedule unit(std::size_t n, std::size_t i);
  static Schedule from_ints(std::span<const int> entries);

  std::size_t size() const { return entries_.size(); }
  std::uint8_t operator[](std::size_t i) const { return entries_[i]; }
  void set(std::size_t i, bool on) { entries_[i] = on ? 1 : 0; }

  /// Number of queues served.
  int weight() const;
  bool is_zero() const { return weight() == 0; }

  /// Componentwise comparison against another schedule of the same length.
  bool dominated_by(const Schedule& other) const;
  /// Componentwise sigma_i <= bound_i + tol.
  bool fits_under(std::span<const double> bound, double tol = 1e-9) const;

  const std::vector<std::uint8_t>& entries() const { return entries_; }
  std::string to_string() const;

  friend auto operator<=>(const Schedule&, const Schedule&) = default;
  friend bool operator==(const Schedule&, const Schedule&) = default;

private:
  std::vector<std::uint8_t> entries_;
};

/// Finite monotone set of schedules over N queues, stored in lexicographic order.
///
/// Members always include the zero schedule and every unit vector, and every binary
/// vector dominated by a member is itself a member.
class ScheduleSet {
public:
  ScheduleSet() = default;

  /// Validates that `schedules` is already monotone; throws DomainError otherwise.
  static ScheduleSet from_closed(std::vector<Schedule> schedules, std::size_t n);

  std::size_t n_queues() const { return n_; }
  int k_max() const { return k_max_; }
  std::size_t size() const { return schedules_.size(); }
  const std::vector<Schedule>& schedules() const { return schedules_; }
  const Schedule& operator[](std::size_t k) const { return schedules_[k]; }

  std::optional<std::size_t> index_of(const Schedule& s) const;
  bool contains(const Schedule& s) const { return index_of(s).has_value(); }

  /// Exhaustive check of the sub-schedule property.
  bool is_monotone() const;

private:
  friend ScheduleSet monotone_close(std::span<const Schedule> schedules, std::size_t n);
  ScheduleSet(std::vector<Schedule> sorted_unique, std::size_t n);

  std::size_t n_ = 0;
  int k_max_ = 0;
  std::vector<Schedule> schedules_;
};

/// Smallest monotone superset of `schedules` that also holds 0 and every unit vector e_i.
/// Throws DimensionError when a schedule's length differs from n.
ScheduleSet monotone_close(std::span<const Schedule> schedules, std::size_t n);

}  // namespace switchlab

#pragma once

#include <chrono>
#include <cstdint>

namespace ska {

enum class ClockKind { Real, Virtual };

/// Cost model used by the virtual clock.  Times are in seconds.
///   - a transfer of n bytes costs alpha + beta * n, charged where the
///     transfer is waited for (blocking gets immediately, puts at quiet),
///   - posting a nonblocking operation costs gamma,
///   - an empty quiet costs quiet_cost.
struct ClockConfig {
  ClockKind kind = ClockKind::Real;
  double alpha = 1e-6;
  double beta = 1e-9;
  double gamma = 2e-7;
  double quiet_cost = 5e-7;

  double transfer_cost(std::uint64_t nbytes) const {
    return alpha + beta * static_cast<double>(nbytes);
  }
};

/// Per-PE clock.  The real flavour reads the process-wide monotonic clock;
/// the virtual flavour is a plain double advanced by explicit charges, plus
/// an optional skew that only affects what now() reports (used to exercise
/// the offset estimation).
class PeClock {
public:
  using steady = std::chrono::steady_clock;

  PeClock() = default;
  PeClock(ClockKind kind, steady::time_point epoch) : kind_(kind), epoch_(epoch) {}

  ClockKind kind() const { return kind_; }

  double now() const {
    if (kind_ == ClockKind::Real)
      return std::chrono::duration<double>(steady::now() - epoch_).count();
    return vtime_ + skew_;
  }

  /// Advance the virtual clock by dt seconds.  No-op on the real clock.
  void advance(double dt) {
    if (kind_ == ClockKind::Virtual) vtime_ += dt;
  }

  /// Move the virtual clock forward so now() reads at least t.  Never moves
  /// backwards.  The real clock cannot jump; callers busy-wait instead.
  void jump_to(double t) {
    if (kind_ == ClockKind::Virtual && t - skew_ > vtime_) vtime_ = t - skew_;
  }

  /// Move the raw virtual timeline (not the skewed reading) forward to t.
  /// Message timestamps travel on this shared timeline, so a skewed clock
  /// still simulates physically consistent arrival instants.
  void jump_global(double t) {
    if (kind_ == ClockKind::Virtual && t > vtime_) vtime_ = t;
  }

  /// Test hook: make now() report the given offset on top of virtual time.
  void set_skew(double s) { skew_ = s; }
  double skew() const { return skew_; }

  /// Raw virtual timeline (without skew); meaningless for the real clock.
  double vtime() const { return vtime_; }

private:
  ClockKind kind_ = ClockKind::Real;
  steady::time_point epoch_{};
  double vtime_ = 0.0;
  double skew_ = 0.0;
};

}  // namespace ska

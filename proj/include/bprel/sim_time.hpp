#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace bprel {

/// Length of simulated time with 1 µs granularity.
struct Duration {
    std::int64_t micros = 0;

    static constexpr Duration from_micros(std::int64_t us) noexcept { return {us}; }
    static Duration from_seconds(double seconds) { return {std::llround(seconds * 1e6)}; }
    constexpr double seconds() const noexcept { return static_cast<double>(micros) / 1e6; }

    friend constexpr auto operator<=>(Duration, Duration) = default;
    friend constexpr Duration operator+(Duration a, Duration b) noexcept { return {a.micros + b.micros}; }
    friend constexpr Duration operator*(Duration a, std::int64_t k) noexcept { return {a.micros * k}; }
};

/// Instant on the simulation clock, microseconds since scenario start.
struct SimTime {
    std::int64_t micros = 0;

    static constexpr SimTime from_micros(std::int64_t us) noexcept { return {us}; }
    static SimTime from_seconds(double seconds) { return {std::llround(seconds * 1e6)}; }
    constexpr double seconds() const noexcept { return static_cast<double>(micros) / 1e6; }
    constexpr std::uint64_t millis() const noexcept { return static_cast<std::uint64_t>(micros / 1000); }

    /// Fixed six-decimal seconds, e.g. `11.020000`.
    std::string str() const;

    friend constexpr auto operator<=>(SimTime, SimTime) = default;
    friend constexpr SimTime operator+(SimTime t, Duration d) noexcept { return {t.micros + d.micros}; }
    friend constexpr Duration operator-(SimTime a, SimTime b) noexcept { return {a.micros - b.micros}; }
};

inline std::string SimTime::str() const {
    const std::int64_t whole = micros / 1'000'000;
    const std::int64_t frac = micros % 1'000'000;
    std::string digits = std::to_string(frac < 0 ? -frac : frac);
    digits.insert(0, 6 - digits.size(), '0');
    return (micros < 0 && whole == 0 ? "-" : "") + std::to_string(whole) + "." + digits;
}

} // namespace bprel

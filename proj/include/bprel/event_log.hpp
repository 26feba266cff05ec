#pragma once

#include "bprel/sim_time.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bprel {

/// One log record: `time<TAB>node<TAB>event<TAB>tag<TAB>detail`, where
/// detail is a space-separated list of key=value pairs.
struct Event {
    SimTime time;
    std::string node;
    std::string kind;
    std::string tag = "-";
    std::string detail;

    std::string line() const;
    std::optional<std::string> field(std::string_view key) const;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Builds key=value detail strings. Values must not contain whitespace.
class Detail {
public:
    Detail& add(std::string_view key, std::string_view value);
    Detail& add(std::string_view key, std::uint64_t value);
    Detail& add(std::string_view key, std::int64_t value);
    Detail& add(std::string_view key, int value) { return add(key, static_cast<std::int64_t>(value)); }
    Detail& add(std::string_view key, SimTime value) { return add(key, value.str()); }
    std::string str() const { return text_; }
    operator std::string() const { return text_; }

private:
    std::string text_;
};

class EventLog {
public:
    void add(Event event) { events_.push_back(std::move(event)); }
    const std::vector<Event>& events() const noexcept { return events_; }
    bool empty() const noexcept { return events_.empty(); }
    std::size_t size() const noexcept { return events_.size(); }

    /// All records, one per line.
    std::string str() const;
    /// Parses the format written by str(); throws Error on malformed lines.
    static EventLog parse(std::string_view text);

private:
    std::vector<Event> events_;
};

} // namespace bprel

#include "bprel/event_log.hpp"

#include "bprel/errors.hpp"

#include <charconv>

namespace bprel {

std::string Event::line() const {
    return time.str() + "\t" + node + "\t" + kind + "\t" + tag + "\t" + detail;
}

std::optional<std::string> Event::field(std::string_view key) const {
    std::string_view rest = detail;
    while (!rest.empty()) {
        const std::size_t space = rest.find(' ');
        const std::string_view item = rest.substr(0, space);
        const std::size_t eq = item.find('=');
        if (eq != std::string_view::npos && item.substr(0, eq) == key) {
            return std::string(item.substr(eq + 1));
        }
        if (space == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(space + 1);
    }
    return std::nullopt;
}

Detail& Detail::add(std::string_view key, std::string_view value) {
    if (!text_.empty()) {
        text_ += ' ';
    }
    text_.append(key);
    text_ += '=';
    text_.append(value);
    return *this;
}

Detail& Detail::add(std::string_view key, std::uint64_t value) { return add(key, std::to_string(value)); }

Detail& Detail::add(std::string_view key, std::int64_t value) { return add(key, std::to_string(value)); }

std::string EventLog::str() const {
    std::string out;
    for (const Event& event : events_) {
        out += event.line();
        out += '\n';
    }
    return out;
}

namespace {

SimTime parse_time(std::string_view text) {
    const std::size_t dot = text.find('.');
    if (dot == std::string_view::npos || text.size() - dot - 1 != 6) {
        throw Error("bad event time '" + std::string(text) + "'");
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    const auto a = std::from_chars(text.data(), text.data() + dot, whole);
    const auto b = std::from_chars(text.data() + dot + 1, text.data() + text.size(), frac);
    if (a.ec != std::errc{} || b.ec != std::errc{} || a.ptr != text.data() + dot ||
        b.ptr != text.data() + text.size()) {
        throw Error("bad event time '" + std::string(text) + "'");
    }
    return SimTime::from_micros(whole * 1'000'000 + frac);
}

} // namespace

EventLog EventLog::parse(std::string_view text) {
    EventLog log;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        std::string_view fields[5];
        for (int i = 0; i < 4; ++i) {
            const std::size_t tab = line.find('\t');
            if (tab == std::string_view::npos) {
                throw Error("event log line " + std::to_string(line_no) + " has too few fields");
            }
            fields[i] = line.substr(0, tab);
            line.remove_prefix(tab + 1);
        }
        fields[4] = line;
        log.add({parse_time(fields[0]), std::string(fields[1]), std::string(fields[2]), std::string(fields[3]),
                 std::string(fields[4])});
    }
    return log;
}

} // namespace bprel

#include "commands.hpp"

#include "bprel/admin_record.hpp"
#include "bprel/custody.hpp"
#include "bprel/errors.hpp"
#include "bprel/metrics.hpp"
#include "bprel/reporting.hpp"
#include "bprel/scenarios.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace bprel::cli {

namespace {

namespace fs = std::filesystem;

/// Two aligned columns.
class Table {
public:
    void row(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
    void print(std::ostream& out) const {
        std::size_t width = 0;
        for (const auto& [key, value] : rows_) {
            width = std::max(width, key.size());
        }
        for (const auto& [key, value] : rows_) {
            out << std::left << std::setw(static_cast<int>(width + 2)) << key << value << '\n';
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) {
        throw Error("cannot write " + path.string());
    }
}

Bytes input_bytes(const std::string& input) {
    if (input.empty() || input[0] != '@') {
        return from_hex(input);
    }
    const std::string content = read_file(input.substr(1));
    std::string trimmed;
    for (const char c : content) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            trimmed += c;
        }
    }
    try {
        return from_hex(trimmed);
    } catch (const Error&) {
        return Bytes(content.begin(), content.end());
    }
}

const char* crc_name(CrcType type) {
    switch (type) {
    case CrcType::none: return "none";
    case CrcType::crc16: return "crc16";
    case CrcType::crc32c: return "crc32c";
    }
    return "?";
}

CrcType parse_crc(std::string_view text) {
    if (text == "none") return CrcType::none;
    if (text == "crc16") return CrcType::crc16;
    if (text == "crc32c") return CrcType::crc32c;
    throw Error("unknown CRC type '" + std::string(text) + "'");
}

std::string hex_number(std::uint64_t value) {
    std::ostringstream out;
    out << "0x" << std::hex << value;
    return out.str();
}

std::string eid_text(const std::optional<EndpointId>& eid, const char* absent) {
    return eid ? eid->str() : absent;
}

void describe_creb(const CrebData& creb, Table& table, const std::string& indent) {
    table.row(indent + "sequence-number", std::to_string(creb.sequence_number));
    table.row(indent + "sequence-id", creb.sequence_id ? std::to_string(*creb.sequence_id) : "(absent, per-destination)");
    table.row(indent + "report-types", creb.report_types ? creb.report_types->str() : "(absent)");
    table.row(indent + "block-source", eid_text(creb.block_source, "(absent, bundle source)"));
    table.row(indent + "report-endpoint", eid_text(creb.report_endpoint, "(absent)"));
}

void describe_cteb(const CtebData& cteb, Table& table, const std::string& indent) {
    table.row(indent + "sequence-number", std::to_string(cteb.sequence_number));
    table.row(indent + "sequence-id",
              cteb.sequence_id == 0 ? "0 (per-destination)" : std::to_string(cteb.sequence_id));
    table.row(indent + "block-source", cteb.block_source.str());
}

std::string tag_ranges(const std::set<BundleTag>& tags) {
    std::string out;
    BundleSequenceCollection runs = coalesce(tags);
    for (const BundleSequence& run : runs) {
        out += out.empty() ? "" : " ";
        out += run.block_source->str() + "/" + run.scope.str() + "#" + std::to_string(run.first);
        if (run.length > 1) {
            out += "-" + std::to_string(run.last());
        }
    }
    return out;
}

template <typename Key>
void describe_collections(const std::map<Key, BundleSequenceCollection>& entries,
                          const std::function<std::string(Key)>& key_name,
                          const std::optional<EndpointId>& receiver, Table& table) {
    for (const auto& [key, collection] : entries) {
        table.row(key_name(key), std::to_string(collection.size()) + " sequence(s)");
        for (const BundleSequence& sequence : collection) {
            std::string text = "first=" + std::to_string(sequence.first) + " length=" + std::to_string(sequence.length) +
                               " scope=" + sequence.scope.str() +
                               " source=" + eid_text(sequence.block_source, "(receiver)");
            table.row("  sequence", text);
        }
        if (receiver) {
            table.row("  tags", tag_ranges(expand(collection, *receiver)));
        }
    }
}

void decode_bundle_table(ByteView bytes, Table& table) {
    const Bundle bundle = decode_bundle(bytes);
    const PrimaryBlock& p = bundle.primary;
    table.row("version", std::to_string(PrimaryBlock::kVersion));
    table.row("flags", hex_number(p.flags) + (p.is_admin_record() ? " (admin record)" : ""));
    table.row("crc", crc_name(p.crc_type));
    table.row("destination", p.destination.str());
    table.row("source", p.source.str());
    table.row("report-to", p.report_to.str());
    table.row("creation", std::to_string(p.creation_time_ms) + " ms seq " + std::to_string(p.creation_sequence));
    table.row("lifetime", std::to_string(p.lifetime_ms) + " ms");
    table.row("bundle-id", bundle.id().str());
    for (const CanonicalBlock& block : bundle.blocks) {
        std::string name = "unknown";
        if (block.type_code == block_type::payload) name = "payload";
        if (block.type_code == block_type::creb) name = "CREB";
        if (block.type_code == block_type::cteb) name = "CTEB";
        table.row("block " + std::to_string(block.number),
                  name + " type=" + std::to_string(block.type_code) + " flags=" + hex_number(block.flags) +
                      " crc=" + crc_name(block.crc_type) + " length=" + std::to_string(block.data.size()));
        if (block.type_code == block_type::creb) {
            describe_creb(decode_creb(block.data), table, "  ");
        } else if (block.type_code == block_type::cteb) {
            describe_cteb(decode_cteb(block.data), table, "  ");
        } else if (block.type_code == block_type::payload && p.is_admin_record()) {
            table.row("  admin-record", cbor::diagnostic(block.data));
        } else {
            table.row("  data", to_hex(block.data));
        }
    }
}

std::map<std::string, std::string> parse_fields(const std::string& text) {
    std::map<std::string, std::string> fields;
    std::istringstream in(text);
    std::string item;
    while (in >> item) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error("expected key=value, got '" + item + "'");
        }
        if (!fields.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
            throw Error("field '" + item.substr(0, eq) + "' given twice");
        }
    }
    return fields;
}

std::uint64_t to_uint(std::string_view text, std::string_view what) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw Error("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t to_int(std::string_view text, std::string_view what) {
    std::int64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw Error("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

/// Consumes `key` from `fields`.
std::optional<std::string> take(std::map<std::string, std::string>& fields, const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
        return std::nullopt;
    }
    std::string value = it->second;
    fields.erase(it);
    return value;
}

std::string need(std::map<std::string, std::string>& fields, const std::string& key) {
    auto value = take(fields, key);
    if (!value) {
        throw Error("missing field '" + key + "'");
    }
    return *value;
}

void no_leftovers(const std::map<std::string, std::string>& fields) {
    if (!fields.empty()) {
        throw Error("unknown field '" + fields.begin()->first + "'");
    }
}

/// Comma-separated tags; `#a-b` expands to a run.
std::set<BundleTag> parse_tag_list(std::string_view text) {
    std::set<BundleTag> tags;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        const std::string_view item = text.substr(start, comma - start);
        const std::size_t hash = item.rfind('#');
        const std::size_t dash = item.find('-', hash == std::string_view::npos ? 0 : hash);
        if (hash == std::string_view::npos || dash == std::string_view::npos) {
            tags.insert(parse_tag(item));
        } else {
            const BundleTag first = parse_tag(item.substr(0, dash));
            const std::uint64_t last = to_uint(item.substr(dash + 1), "range end");
            if (last < first.number) {
                throw Error("descending range in '" + std::string(item) + "'");
            }
            for (std::uint64_t n = first.number; n <= last; ++n) {
                tags.insert({first.scope, n, first.block_source});
            }
        }
        start = comma + 1;
    }
    return tags;
}

CrebData creb_from_fields(std::map<std::string, std::string>& fields) {
    CrebData creb;
    creb.sequence_number = to_uint(need(fields, "seq"), "seq");
    if (auto id = take(fields, "id")) creb.sequence_id = to_uint(*id, "id");
    if (auto types = take(fields, "types")) creb.report_types = parse_report_types(*types);
    if (auto source = take(fields, "source")) creb.block_source = parse_eid(*source);
    if (auto report = take(fields, "report_to")) creb.report_endpoint = parse_eid(*report);
    return creb;
}

/// `seq[:id[:types]]`
CrebData creb_from_compact(std::string_view text) {
    std::map<std::string, std::string> fields;
    const char* keys[] = {"seq", "id", "types"};
    std::size_t start = 0;
    for (std::size_t k = 0; start <= text.size(); ++k) {
        if (k == 3) {
            throw Error("creb takes seq[:id[:types]]");
        }
        const std::size_t colon = std::min(text.find(':', start), text.size());
        fields[keys[k]] = std::string(text.substr(start, colon - start));
        start = colon + 1;
    }
    return creb_from_fields(fields);
}

/// `seq:id:source-eid`
CtebData cteb_from_compact(std::string_view text) {
    const std::size_t first = text.find(':');
    const std::size_t second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos) {
        throw Error("cteb takes seq:id:source");
    }
    return {to_uint(text.substr(0, first), "seq"), to_uint(text.substr(first + 1, second - first - 1), "id"),
            parse_eid(text.substr(second + 1))};
}

} // namespace

LogLevel log_level_from_env() {
    const char* value = std::getenv("BP7_LOG_LEVEL");
    if (value == nullptr || *value == '\0') {
        return LogLevel::info;
    }
    const std::string_view text(value);
    if (text == "error") return LogLevel::error;
    if (text == "info") return LogLevel::info;
    if (text == "debug") return LogLevel::debug;
    if (text == "trace") return LogLevel::trace;
    throw ConfigError("BP7_LOG_LEVEL must be one of error, info, debug, trace");
}

void run_command(const RunArgs& args, LogLevel level, std::ostream& out, std::ostream& err) {
    if (args.format != "text" && args.format != "kv") {
        throw ConfigError("unknown format '" + args.format + "'");
    }
    Scenario scenario;
    if (!args.builtin.empty()) {
        if (!args.scenario_file.empty()) {
            throw ConfigError("give either a scenario file or --builtin, not both");
        }
        auto builtin = builtin_scenario(args.builtin);
        if (!builtin) {
            throw ConfigError("unknown builtin scenario '" + args.builtin + "'");
        }
        scenario = std::move(*builtin);
    } else if (!args.scenario_file.empty()) {
        scenario = load_scenario(args.scenario_file);
    } else {
        throw ConfigError("run needs a scenario file or --builtin");
    }

    RunOptions options;
    options.check_invariants = args.check_invariants;
    options.dump_state = args.dump_state;
    const RunResult result = run(scenario, args.seed, options);
    const Metrics metrics = summarize(result.log);

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create " + dir.string() + ": " + ec.message());
    }
    const std::string table = args.format == "kv" ? format_kv(metrics) : format_text(metrics);
    write_file(dir / "events.log", result.log.str());
    write_file(dir / "metrics.txt", table);
    if (args.dump_state) {
        std::string state;
        for (const auto& [name, dump] : result.node_state) {
            state += dump;
        }
        write_file(dir / "state.txt", state);
    }

    if (level == LogLevel::trace) {
        err << result.log.str();
    }
    if (level >= LogLevel::debug) {
        err << "scenario " << scenario.name << " seed " << args.seed << ": " << result.log.size() << " events\n";
        err << "wrote " << (dir / "events.log").string() << " and " << (dir / "metrics.txt").string() << '\n';
    }
    for (const std::string& violation : result.invariant_violations) {
        err << "invariant violation: " << violation << '\n';
    }
    if (level >= LogLevel::info) {
        out << table;
    }
    if (!result.invariant_violations.empty()) {
        throw Error(std::to_string(result.invariant_violations.size()) + " invariant violation(s)");
    }
}

void decode_command(const std::string& kind, const std::string& input, const std::optional<std::string>& receiver,
                    std::ostream& out) {
    const Bytes bytes = input_bytes(input);
    const std::optional<EndpointId> receiver_eid =
        receiver ? std::optional<EndpointId>(parse_eid(*receiver)) : std::nullopt;
    Table table;
    if (kind == "bundle") {
        decode_bundle_table(bytes, table);
    } else if (kind == "creb") {
        describe_creb(decode_creb(bytes), table, "");
    } else if (kind == "cteb") {
        describe_cteb(decode_cteb(bytes), table, "");
    } else if (kind == "crs") {
        table.row("record", "compressed reporting signal (64)");
        describe_collections<std::uint64_t>(
            decode_crs(bytes),
            [](std::uint64_t reason) {
                return reason <= 3 ? std::string(to_string(static_cast<ReportReason>(reason))) + " (" +
                                         std::to_string(reason) + ")"
                                   : "reason " + std::to_string(reason);
            },
            receiver_eid, table);
    } else if (kind == "ccs") {
        table.row("record", "compressed custody signal (65)");
        describe_collections<std::int64_t>(
            decode_ccs(bytes),
            [](std::int64_t code) { return "code " + std::to_string(code) + " (" + disposition_name(code) + ")"; },
            receiver_eid, table);
    } else {
        throw Error("unknown kind '" + kind + "'");
    }
    table.print(out);
}

void encode_command(const std::string& kind, const std::string& text, std::ostream& out) {
    auto fields = parse_fields(text);
    Bytes encoded;
    if (kind == "creb") {
        const CrebData creb = creb_from_fields(fields);
        no_leftovers(fields);
        encoded = encode_creb(creb);
    } else if (kind == "cteb") {
        CtebData cteb;
        cteb.sequence_number = to_uint(need(fields, "seq"), "seq");
        cteb.sequence_id = to_uint(take(fields, "id").value_or("0"), "id");
        cteb.block_source = parse_eid(need(fields, "source"));
        no_leftovers(fields);
        encoded = encode_cteb(cteb);
    } else if (kind == "crs") {
        CrsSignal signal;
        signal.destination = parse_eid(need(fields, "dest"));
        for (const auto& [key, value] : fields) {
            const std::uint64_t reason = std::isdigit(static_cast<unsigned char>(key[0]))
                                             ? to_uint(key, "reason")
                                             : static_cast<std::uint64_t>(parse_report_reason(key));
            signal.entries[reason] = parse_tag_list(value);
        }
        encoded = build_crs(signal);
    } else if (kind == "ccs") {
        CcsSignal signal;
        signal.destination = parse_eid(need(fields, "dest"));
        for (const auto& [key, value] : fields) {
            const std::int64_t code = to_int(key, "disposition code");
            if (code == 0) {
                throw Error("disposition code 0 is not allowed");
            }
            signal.entries[code] = parse_tag_list(value);
        }
        encoded = build_ccs(signal);
    } else if (kind == "bundle") {
        PrimaryBlock primary;
        primary.destination = parse_eid(need(fields, "dst"));
        primary.source = parse_eid(need(fields, "src"));
        if (auto v = take(fields, "report_to")) primary.report_to = parse_eid(*v);
        if (auto v = take(fields, "time")) primary.creation_time_ms = to_uint(*v, "time");
        if (auto v = take(fields, "seq")) primary.creation_sequence = to_uint(*v, "seq");
        if (auto v = take(fields, "lifetime")) primary.lifetime_ms = to_uint(*v, "lifetime");
        if (auto v = take(fields, "flags")) primary.flags = to_uint(*v, "flags");
        if (auto v = take(fields, "crc")) primary.crc_type = parse_crc(*v);
        Bytes payload;
        if (auto v = take(fields, "payload")) payload = from_hex(*v);
        if (auto v = take(fields, "text")) payload.assign(v->begin(), v->end());
        Bundle bundle = make_bundle(primary, payload);
        if (auto v = take(fields, "creb")) bundle.add_extension(make_creb_block(creb_from_compact(*v)));
        if (auto v = take(fields, "cteb")) bundle.add_extension(make_cteb_block(cteb_from_compact(*v)));
        no_leftovers(fields);
        validate_bundle(bundle);
        encoded = encode_bundle(bundle);
    } else {
        throw Error("unknown kind '" + kind + "'");
    }
    out << to_hex(encoded) << '\n';
}

bool report_command(const std::string& log_path, const std::string& format, std::ostream& out) {
    if (format != "text" && format != "kv") {
        throw ConfigError("unknown format '" + format + "'");
    }
    const EventLog log = EventLog::parse(read_file(log_path));
    const Metrics metrics = summarize(log);
    out << (format == "kv" ? format_kv(metrics) : format_text(metrics));
    const auto violations = check_custody_chain(log);
    for (const std::string& violation : violations) {
        out << "custody-chain violation: " << violation << '\n';
    }
    if (format == "kv") {
        out << "custody_chain_violations=" << violations.size() << '\n';
    }
    return violations.empty();
}

} // namespace bprel::cli

#include "bprel/errors.hpp"
#include "bprel/scenarios.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace bprel {

namespace {

std::string where(const YAML::Node& node) {
    const YAML::Mark mark = node.Mark();
    return mark.line >= 0 ? " (line " + std::to_string(mark.line + 1) + ")" : "";
}

void require_map(const YAML::Node& node, std::string_view what, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) {
        throw ConfigError(std::string(what) + " must be a mapping" + where(node));
    }
    for (const auto& item : node) {
        const std::string key = item.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(what) + where(item.first));
        }
    }
}

template <typename T>
T scalar(const YAML::Node& node, std::string_view what) {
    if (!node || !node.IsScalar()) {
        throw ConfigError(std::string(what) + " must be a scalar" + (node ? where(node) : ""));
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("bad value '" + node.Scalar() + "' for " + std::string(what) + where(node));
    }
}

const YAML::Node required(const YAML::Node& parent, const char* key, std::string_view what) {
    const YAML::Node node = parent[key];
    if (!node) {
        throw ConfigError(std::string(what) + " needs '" + key + "'" + where(parent));
    }
    return node;
}

template <typename Parse>
auto parsed(const YAML::Node& node, std::string_view what, Parse parse) {
    const auto text = scalar<std::string>(node, what);
    try {
        return parse(text);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string(what) + ": " + e.what() + where(node));
    }
}

Duration seconds(const YAML::Node& node, std::string_view what) {
    const double value = scalar<double>(node, what);
    if (value < 0.0) {
        throw ConfigError(std::string(what) + " must not be negative" + where(node));
    }
    return Duration::from_seconds(value);
}

FlushPolicy flush_policy(const YAML::Node& node, std::string_view what) {
    require_map(node, what, {"max_bundles", "max_pending"});
    FlushPolicy policy;
    if (node["max_bundles"]) policy.max_bundles = scalar<std::size_t>(node["max_bundles"], "max_bundles");
    if (node["max_pending"]) policy.max_pending = seconds(node["max_pending"], "max_pending");
    if (policy.max_bundles == 0) {
        throw ConfigError(std::string(what) + ".max_bundles must be positive" + where(node));
    }
    return policy;
}

CustodyPolicySpec custody_policy(const YAML::Node& node) {
    require_map(node, "custody_policy", {"kind", "script", "fallback", "p_accept", "p_drop", "p_forward"});
    CustodyPolicySpec spec;
    const std::string kind = scalar<std::string>(required(node, "kind", "custody_policy"), "custody_policy.kind");
    if (kind == "always_accept") {
        spec.kind = CustodyPolicySpec::Kind::always_accept;
    } else if (kind == "scripted") {
        spec.kind = CustodyPolicySpec::Kind::scripted;
    } else if (kind == "probabilistic") {
        spec.kind = CustodyPolicySpec::Kind::probabilistic;
    } else {
        throw ConfigError("unknown custody policy kind '" + kind + "'" + where(node));
    }
    if (const YAML::Node script = node["script"]) {
        if (!script.IsMap()) {
            throw ConfigError("custody_policy.script must map sequence numbers to decision lists" + where(script));
        }
        for (const auto& item : script) {
            const auto number = scalar<std::uint64_t>(item.first, "script key");
            if (!item.second.IsSequence()) {
                throw ConfigError("script entry must be a list of decisions" + where(item.second));
            }
            auto& decisions = spec.script[number];
            for (const auto& decision : item.second) {
                decisions.push_back(parsed(decision, "custody decision", parse_custody_decision));
            }
        }
    }
    if (node["fallback"]) spec.fallback = parsed(node["fallback"], "fallback", parse_custody_decision);
    if (node["p_accept"]) spec.p_accept = scalar<double>(node["p_accept"], "p_accept");
    if (node["p_drop"]) spec.p_drop = scalar<double>(node["p_drop"], "p_drop");
    if (node["p_forward"]) spec.p_forward = scalar<double>(node["p_forward"], "p_forward");
    return spec;
}

Mib mib(const YAML::Node& node) {
    require_map(node, "mib",
                {"crs", "ccs", "retransmission_timer", "sequence_max", "creb_sequence_id", "cteb_sequence_id",
                 "custody_policy", "duplicate_backoff", "gap_retransmit", "retransmit_on_contact", "duplicate_memory",
                 "store_capacity", "admin_lifetime"});
    Mib m;
    if (node["crs"]) m.crs = flush_policy(node["crs"], "mib.crs");
    if (node["ccs"]) m.ccs = flush_policy(node["ccs"], "mib.ccs");
    if (node["retransmission_timer"]) m.retransmission_timer = seconds(node["retransmission_timer"], "retransmission_timer");
    if (node["sequence_max"]) m.sequence_max = scalar<std::uint64_t>(node["sequence_max"], "sequence_max");
    if (node["creb_sequence_id"]) m.creb_sequence_id = scalar<std::uint64_t>(node["creb_sequence_id"], "creb_sequence_id");
    if (node["cteb_sequence_id"]) m.cteb_sequence_id = scalar<std::uint64_t>(node["cteb_sequence_id"], "cteb_sequence_id");
    if (node["custody_policy"]) m.custody_policy = custody_policy(node["custody_policy"]);
    if (node["duplicate_backoff"]) m.duplicate_backoff = scalar<bool>(node["duplicate_backoff"], "duplicate_backoff");
    if (node["gap_retransmit"]) m.gap_retransmit = scalar<bool>(node["gap_retransmit"], "gap_retransmit");
    if (node["retransmit_on_contact"]) m.retransmit_on_contact = scalar<bool>(node["retransmit_on_contact"], "retransmit_on_contact");
    if (node["duplicate_memory"]) m.duplicate_memory = scalar<std::size_t>(node["duplicate_memory"], "duplicate_memory");
    if (node["store_capacity"]) m.store_capacity = scalar<std::size_t>(node["store_capacity"], "store_capacity");
    if (node["admin_lifetime"]) m.admin_lifetime = seconds(node["admin_lifetime"], "admin_lifetime");
    for (const auto& id : {m.creb_sequence_id, m.cteb_sequence_id}) {
        if (id && *id == 0) {
            throw ConfigError("explicit sequence IDs must be non-zero; omit the key for per-destination" + where(node));
        }
    }
    return m;
}

NodeConfig node_config(const YAML::Node& node) {
    require_map(node, "node", {"name", "node", "routes", "default_route", "mib"});
    NodeConfig config;
    config.name = scalar<std::string>(required(node, "name", "node"), "node.name");
    config.node = scalar<std::uint64_t>(required(node, "node", "node"), "node.node");
    if (const YAML::Node routes = node["routes"]) {
        if (!routes.IsMap()) {
            throw ConfigError("routes must map destination node to next-hop node" + where(routes));
        }
        for (const auto& item : routes) {
            config.routes[scalar<std::uint64_t>(item.first, "route destination")] =
                scalar<std::uint64_t>(item.second, "route next hop");
        }
    }
    if (node["default_route"]) config.default_route = scalar<std::uint64_t>(node["default_route"], "default_route");
    if (node["mib"]) config.mib = mib(node["mib"]);
    return config;
}

LossModel loss_model(const YAML::Node& node) {
    require_map(node, "loss", {"kind", "rate", "seed", "drops"});
    LossModel loss;
    const std::string kind = scalar<std::string>(required(node, "kind", "loss"), "loss.kind");
    if (kind == "none") {
        loss.kind = LossModel::Kind::none;
    } else if (kind == "probabilistic") {
        loss.kind = LossModel::Kind::probabilistic;
    } else if (kind == "scripted") {
        loss.kind = LossModel::Kind::scripted;
    } else {
        throw ConfigError("unknown loss kind '" + kind + "'" + where(node));
    }
    if (node["rate"]) loss.rate = scalar<double>(node["rate"], "loss.rate");
    if (node["seed"]) loss.seed = scalar<std::uint64_t>(node["seed"], "loss.seed");
    if (const YAML::Node drops = node["drops"]) {
        if (!drops.IsSequence()) {
            throw ConfigError("loss.drops must be a list" + where(drops));
        }
        for (const auto& item : drops) {
            require_map(item, "drop", {"from", "to", "index", "tag"});
            ScriptedDrop drop;
            drop.from = scalar<std::string>(required(item, "from", "drop"), "drop.from");
            drop.to = scalar<std::string>(required(item, "to", "drop"), "drop.to");
            if (item["index"]) drop.index = scalar<std::uint64_t>(item["index"], "drop.index");
            if (item["tag"]) drop.tag = parsed(item["tag"], "drop.tag", parse_tag);
            loss.drops.push_back(std::move(drop));
        }
    }
    return loss;
}

LinkConfig link_config(const YAML::Node& node) {
    require_map(node, "link", {"a", "b", "delay", "loss", "windows"});
    LinkConfig link;
    link.a = scalar<std::string>(required(node, "a", "link"), "link.a");
    link.b = scalar<std::string>(required(node, "b", "link"), "link.b");
    if (node["delay"]) link.delay = seconds(node["delay"], "link.delay");
    if (node["loss"]) link.loss = loss_model(node["loss"]);
    if (const YAML::Node windows = node["windows"]) {
        if (!windows.IsSequence()) {
            throw ConfigError("link.windows must be a list of [start, end] pairs" + where(windows));
        }
        for (const auto& window : windows) {
            if (!window.IsSequence() || window.size() != 2) {
                throw ConfigError("contact window must be [start, end]" + where(window));
            }
            link.windows.push_back({SimTime{} + seconds(window[0], "window start"),
                                    SimTime{} + seconds(window[1], "window end")});
        }
    }
    return link;
}

TrafficSpec traffic_spec(const YAML::Node& node) {
    require_map(node, "traffic",
                {"start", "interval", "source", "destination", "count", "creb", "custody", "lifetime", "payload_size"});
    TrafficSpec traffic;
    traffic.start = SimTime{} + seconds(required(node, "start", "traffic"), "traffic.start");
    if (node["interval"]) traffic.interval = seconds(node["interval"], "traffic.interval");
    traffic.source = parsed(required(node, "source", "traffic"), "traffic.source", parse_eid);
    traffic.destination = parsed(required(node, "destination", "traffic"), "traffic.destination", parse_eid);
    if (node["count"]) traffic.count = scalar<std::uint64_t>(node["count"], "traffic.count");
    if (const YAML::Node creb = node["creb"]) {
        require_map(creb, "creb", {"types", "report_to"});
        CrebRequest request;
        request.types = parsed(required(creb, "types", "creb"), "creb.types", parse_report_types);
        if (creb["report_to"]) request.report_to = parsed(creb["report_to"], "creb.report_to", parse_eid);
        traffic.options.creb = request;
    }
    if (node["custody"]) traffic.options.custody = scalar<bool>(node["custody"], "traffic.custody");
    if (node["lifetime"]) traffic.options.lifetime = seconds(node["lifetime"], "traffic.lifetime");
    if (node["payload_size"]) traffic.payload_size = scalar<std::size_t>(node["payload_size"], "payload_size");
    return traffic;
}

RetransmitCommand command(const YAML::Node& node) {
    require_map(node, "command", {"at", "node", "retransmit"});
    RetransmitCommand cmd;
    cmd.at = SimTime{} + seconds(required(node, "at", "command"), "command.at");
    cmd.node = scalar<std::string>(required(node, "node", "command"), "command.node");
    const YAML::Node tags = required(node, "retransmit", "command");
    if (!tags.IsSequence()) {
        throw ConfigError("command.retransmit must be a list of tags" + where(tags));
    }
    for (const auto& tag : tags) {
        cmd.tags.push_back(parsed(tag, "command tag", parse_tag));
    }
    return cmd;
}

template <typename T, typename Parse>
void each(const YAML::Node& root, const char* key, std::vector<T>& out, Parse parse) {
    const YAML::Node list = root[key];
    if (!list) {
        return;
    }
    if (!list.IsSequence()) {
        throw ConfigError(std::string(key) + " must be a list" + where(list));
    }
    for (const auto& item : list) {
        out.push_back(parse(item));
    }
}

} // namespace

Scenario parse_scenario(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
    }
    require_map(root, "scenario", {"name", "duration", "nodes", "links", "traffic", "commands"});
    Scenario scenario;
    if (root["name"]) scenario.name = scalar<std::string>(root["name"], "name");
    scenario.duration = seconds(required(root, "duration", "scenario"), "duration");
    each(root, "nodes", scenario.nodes, node_config);
    each(root, "links", scenario.links, link_config);
    each(root, "traffic", scenario.traffic, traffic_spec);
    each(root, "commands", scenario.commands, command);
    validate(scenario);
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read scenario file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

} // namespace bprel

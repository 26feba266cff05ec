#pragma once

// Deterministic discrete-event simulation of nodes joined by delayed,
// lossy, contact-windowed links.

#include "bprel/event_log.hpp"
#include "bprel/node.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bprel {

/// Drops one transmission in one direction, selected either by its
/// 0-based index among that direction's transmissions or by a tag it
/// carries. Each drop fires at most once.
struct ScriptedDrop {
    std::string from;
    std::string to;
    std::optional<std::uint64_t> index;
    std::optional<BundleTag> tag;
};

struct LossModel {
    enum class Kind { none, probabilistic, scripted };

    Kind kind = Kind::none;
    /// Per-transmission loss probability, both directions.
    double rate = 0.0;
    /// Mixed with the run seed.
    std::uint64_t seed = 0;
    std::vector<ScriptedDrop> drops;
};

struct ContactWindow {
    SimTime start;
    SimTime end;
};

struct LinkConfig {
    std::string a;
    std::string b;
    Duration delay = Duration::from_seconds(0.01);
    LossModel loss;
    /// Empty means permanently up.
    std::vector<ContactWindow> windows;
};

/// `count` ADUs from `source` to `destination`, the first at `start`,
/// then every `interval`.
struct TrafficSpec {
    SimTime start;
    Duration interval;
    EndpointId source;
    EndpointId destination;
    std::uint64_t count = 1;
    AduOptions options;
    std::size_t payload_size = 64;
};

/// Operator command injected at a given time.
struct RetransmitCommand {
    SimTime at;
    std::string node;
    std::vector<BundleTag> tags;
};

struct Scenario {
    std::string name;
    std::vector<NodeConfig> nodes;
    std::vector<LinkConfig> links;
    std::vector<TrafficSpec> traffic;
    std::vector<RetransmitCommand> commands;
    Duration duration = Duration::from_seconds(60.0);
};

/// Throws ConfigError naming the first problem.
void validate(const Scenario& scenario);

struct RunOptions {
    /// Calls Node::check_invariants after every handled event.
    bool check_invariants = false;
    /// Captures Node::dump_state for every node at the end.
    bool dump_state = false;
};

struct RunResult {
    EventLog log;
    std::vector<std::string> invariant_violations;
    std::map<std::string, std::string> node_state;
};

RunResult run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

} // namespace bprel

#include "bprel/simulator.hpp"

#include "bprel/errors.hpp"

#include <algorithm>
#include <memory>
#include <queue>
#include <random>
#include <set>
#include <variant>

namespace bprel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Arrival {
    std::size_t to;
    std::uint64_t from_node;
    Bytes bytes;
};
struct Wakeup {
    std::size_t node;
};
struct Send {
    std::size_t traffic;
    std::uint64_t index;
};
struct Contact {
    std::size_t link;
    bool up;
};
struct Command {
    std::size_t command;
};
using Action = std::variant<Arrival, Wakeup, Send, Contact, Command>;

struct Pending {
    SimTime time;
    std::uint64_t order = 0;
    Action action;
};

struct Later {
    bool operator()(const Pending& x, const Pending& y) const {
        return x.time != y.time ? x.time > y.time : x.order > y.order;
    }
};

struct LinkState {
    const LinkConfig* config = nullptr;
    std::size_t a = 0;
    std::size_t b = 0;
    std::mt19937_64 rng;
    std::uint64_t sent[2] = {0, 0};
    std::vector<bool> fired;
};

class Simulation {
public:
    Simulation(const Scenario& scenario, std::uint64_t seed, const RunOptions& options)
        : scenario_(scenario), options_(options), end_(SimTime{} + scenario.duration) {
        for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
            const NodeConfig& config = scenario.nodes[i];
            nodes_.push_back(std::make_unique<Node>(config, splitmix64(seed ^ splitmix64(i + 1)), result_.log));
            by_name_[config.name] = i;
            by_number_[config.node] = i;
        }
        wakeups_.resize(nodes_.size());

        for (std::size_t l = 0; l < scenario.links.size(); ++l) {
            const LinkConfig& config = scenario.links[l];
            LinkState state;
            state.config = &config;
            state.a = by_name_.at(config.a);
            state.b = by_name_.at(config.b);
            state.rng.seed(splitmix64(seed ^ splitmix64(config.loss.seed ^ (0xA5A5ULL + l))));
            state.fired.assign(config.loss.drops.size(), false);
            links_.push_back(std::move(state));
            link_of_[{std::min(links_[l].a, links_[l].b), std::max(links_[l].a, links_[l].b)}] = l;

            const bool always = config.windows.empty();
            nodes_[links_[l].a]->add_neighbour(scenario.nodes[links_[l].b].node, always);
            nodes_[links_[l].b]->add_neighbour(scenario.nodes[links_[l].a].node, always);
            if (always) {
                push(SimTime{}, Contact{l, true});
            }
            for (const ContactWindow& window : config.windows) {
                push(window.start, Contact{l, true});
                push(window.end, Contact{l, false});
            }
        }
        for (std::size_t t = 0; t < scenario.traffic.size(); ++t) {
            const TrafficSpec& spec = scenario.traffic[t];
            for (std::uint64_t i = 0; i < spec.count; ++i) {
                push(spec.start + spec.interval * static_cast<std::int64_t>(i), Send{t, i});
            }
        }
        for (std::size_t c = 0; c < scenario.commands.size(); ++c) {
            push(scenario.commands[c].at, Command{c});
        }
    }

    RunResult execute() {
        while (!queue_.empty() && queue_.top().time <= end_) {
            Pending next = queue_.top();
            queue_.pop();
            handle(next.time, next.action);
        }
        if (options_.dump_state) {
            for (const auto& node : nodes_) {
                result_.node_state[node->name()] = node->dump_state();
            }
        }
        return std::move(result_);
    }

private:
    void push(SimTime time, Action action) { queue_.push({time, order_++, std::move(action)}); }

    void handle(SimTime now, Action& action) {
        if (auto* arrival = std::get_if<Arrival>(&action)) {
            after(arrival->to, nodes_[arrival->to]->on_receive(arrival->bytes, arrival->from_node, now), now);
        } else if (auto* wakeup = std::get_if<Wakeup>(&action)) {
            wakeups_[wakeup->node].erase(now.micros);
            after(wakeup->node, nodes_[wakeup->node]->on_timer(now), now);
        } else if (auto* send = std::get_if<Send>(&action)) {
            const TrafficSpec& spec = scenario_.traffic[send->traffic];
            const std::size_t node = by_number_.at(spec.source.node);
            Bytes payload(spec.payload_size);
            for (std::size_t k = 0; k < payload.size(); ++k) {
                payload[k] = static_cast<std::uint8_t>((send->traffic * 131 + send->index * 31 + k) & 0xFF);
            }
            after(node, nodes_[node]->send_adu(spec.source, spec.destination, payload, spec.options, now), now);
        } else if (auto* contact = std::get_if<Contact>(&action)) {
            const LinkState& link = links_[contact->link];
            result_.log.add({now, link.config->a, contact->up ? "contact-start" : "contact-end", "-",
                             Detail().add("link", link.config->a + "-" + link.config->b)});
            const std::uint64_t a_number = scenario_.nodes[link.a].node;
            const std::uint64_t b_number = scenario_.nodes[link.b].node;
            after(link.a, nodes_[link.a]->on_contact(b_number, contact->up, now), now);
            after(link.b, nodes_[link.b]->on_contact(a_number, contact->up, now), now);
        } else if (auto* command = std::get_if<Command>(&action)) {
            const RetransmitCommand& spec = scenario_.commands[command->command];
            const std::size_t node = by_name_.at(spec.node);
            after(node, nodes_[node]->retransmit_command(spec.tags, now), now);
        }
    }

    void after(std::size_t node, std::vector<Transmission> transmissions, SimTime now) {
        for (Transmission& tx : transmissions) {
            transmit(node, std::move(tx), now);
        }
        if (const auto wake = nodes_[node]->next_wakeup()) {
            const SimTime at = *wake > now ? *wake : now + Duration::from_micros(1);
            if (wakeups_[node].insert(at.micros).second) {
                push(at, Wakeup{node});
            }
        }
        if (options_.check_invariants) {
            if (const auto problem = nodes_[node]->check_invariants()) {
                result_.invariant_violations.push_back(now.str() + " " + *problem);
            }
        }
    }

    void transmit(std::size_t from, Transmission tx, SimTime now) {
        const auto to_it = by_number_.find(tx.next_hop);
        if (to_it == by_number_.end()) {
            throw ConfigError("node " + nodes_[from]->name() + " transmitted to unknown node " +
                              std::to_string(tx.next_hop));
        }
        const std::size_t to = to_it->second;
        const auto link_it = link_of_.find({std::min(from, to), std::max(from, to)});
        if (link_it == link_of_.end()) {
            throw ConfigError("no link between " + nodes_[from]->name() + " and " + nodes_[to]->name());
        }
        LinkState& link = links_[link_it->second];
        const int direction = link.a == from ? 0 : 1;
        const std::uint64_t index = link.sent[direction]++;

        if (lost(link, from, to, index, tx)) {
            result_.log.add({now, nodes_[from]->name(), "link-loss", tx.tags.empty() ? "-" : tx.tags.front().str(),
                             Detail()
                                 .add("bundle", tx.id.str())
                                 .add("to", nodes_[to]->name())
                                 .add("index", index)
                                 .add("admin", tx.admin ? 1 : 0)});
            return;
        }
        push(now + link.config->delay, Arrival{to, scenario_.nodes[from].node, std::move(tx.bytes)});
    }

    bool lost(LinkState& link, std::size_t from, std::size_t to, std::uint64_t index, const Transmission& tx) {
        const LossModel& loss = link.config->loss;
        switch (loss.kind) {
        case LossModel::Kind::none: return false;
        case LossModel::Kind::probabilistic: return uniform(link.rng) < loss.rate;
        case LossModel::Kind::scripted:
            for (std::size_t d = 0; d < loss.drops.size(); ++d) {
                const ScriptedDrop& drop = loss.drops[d];
                if (link.fired[d] || drop.from != nodes_[from]->name() || drop.to != nodes_[to]->name()) {
                    continue;
                }
                const bool by_index = drop.index && *drop.index == index;
                const bool by_tag = drop.tag && std::find(tx.tags.begin(), tx.tags.end(), *drop.tag) != tx.tags.end();
                if (by_index || by_tag) {
                    link.fired[d] = true;
                    return true;
                }
            }
            return false;
        }
        return false;
    }

    const Scenario& scenario_;
    RunOptions options_;
    SimTime end_;
    RunResult result_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::map<std::string, std::size_t> by_name_;
    std::map<std::uint64_t, std::size_t> by_number_;
    std::vector<LinkState> links_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_of_;
    std::vector<std::set<std::int64_t>> wakeups_;
    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    std::uint64_t order_ = 0;
};

} // namespace

void validate(const Scenario& scenario) {
    if (scenario.nodes.empty()) {
        throw ConfigError("scenario has no nodes");
    }
    if (scenario.duration.micros <= 0) {
        throw ConfigError("scenario duration must be positive");
    }
    std::map<std::string, std::uint64_t> names;
    std::set<std::uint64_t> numbers;
    for (const NodeConfig& node : scenario.nodes) {
        if (node.name.empty() || node.name.find_first_of(" \t\n") != std::string::npos) {
            throw ConfigError("bad node name '" + node.name + "'");
        }
        if (node.node == 0) {
            throw ConfigError("node " + node.name + " needs a non-zero node number");
        }
        if (!names.emplace(node.name, node.node).second) {
            throw ConfigError("duplicate node name " + node.name);
        }
        if (!numbers.insert(node.node).second) {
            throw ConfigError("duplicate node number " + std::to_string(node.node));
        }
    }

    std::map<std::uint64_t, std::set<std::uint64_t>> adjacent;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const LinkConfig& link : scenario.links) {
        if (!names.contains(link.a) || !names.contains(link.b)) {
            throw ConfigError("link " + link.a + "-" + link.b + " names an unknown node");
        }
        if (link.a == link.b) {
            throw ConfigError("link " + link.a + "-" + link.b + " is a loop");
        }
        if (!pairs.insert(std::minmax(link.a, link.b)).second) {
            throw ConfigError("duplicate link " + link.a + "-" + link.b);
        }
        if (link.delay.micros < 0) {
            throw ConfigError("link " + link.a + "-" + link.b + " has a negative delay");
        }
        if (link.loss.rate < 0.0 || link.loss.rate > 1.0) {
            throw ConfigError("link " + link.a + "-" + link.b + " loss rate outside [0, 1]");
        }
        for (const ScriptedDrop& drop : link.loss.drops) {
            const bool forward = drop.from == link.a && drop.to == link.b;
            const bool backward = drop.from == link.b && drop.to == link.a;
            if (!forward && !backward) {
                throw ConfigError("scripted drop " + drop.from + "->" + drop.to + " is not on link " + link.a + "-" +
                                  link.b);
            }
            if (!drop.index && !drop.tag) {
                throw ConfigError("scripted drop needs an index or a tag");
            }
        }
        for (const ContactWindow& window : link.windows) {
            if (!(window.start < window.end)) {
                throw ConfigError("empty contact window on link " + link.a + "-" + link.b);
            }
        }
        adjacent[names[link.a]].insert(names[link.b]);
        adjacent[names[link.b]].insert(names[link.a]);
    }

    for (const NodeConfig& node : scenario.nodes) {
        for (const auto& [destination, hop] : node.routes) {
            if (!adjacent[node.node].contains(hop)) {
                throw ConfigError("node " + node.name + " routes " + std::to_string(destination) + " via " +
                                  std::to_string(hop) + ", which is not a neighbour");
            }
        }
        if (node.default_route && !adjacent[node.node].contains(*node.default_route)) {
            throw ConfigError("node " + node.name + " has a default route to a non-neighbour");
        }
        const CustodyPolicySpec& policy = node.mib.custody_policy;
        if (policy.kind == CustodyPolicySpec::Kind::probabilistic) {
            policy.instantiate(0);
        }
    }

    for (const TrafficSpec& traffic : scenario.traffic) {
        if (!numbers.contains(traffic.source.node)) {
            throw ConfigError("traffic source " + traffic.source.str() + " is on no node");
        }
        if (traffic.destination.is_null()) {
            throw ConfigError("traffic destination must not be the null endpoint");
        }
        if (traffic.count > 1 && traffic.interval.micros < 0) {
            throw ConfigError("traffic interval must not be negative");
        }
    }
    for (const RetransmitCommand& command : scenario.commands) {
        if (!names.contains(command.node)) {
            throw ConfigError("command names unknown node " + command.node);
        }
    }
}

RunResult run(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
    validate(scenario);
    return Simulation(scenario, seed, options).execute();
}

} // namespace bprel

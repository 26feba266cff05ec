#pragma once

// Pending compressed signals. A draft accumulates tags per key (report
// reason or disposition code) toward one destination until it holds
// max_bundles distinct tags or has been pending for max_pending.

#include "bprel/eid.hpp"
#include "bprel/sequence.hpp"
#include "bprel/sim_time.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace bprel {

struct FlushPolicy {
    std::size_t max_bundles = 100;
    Duration max_pending = Duration::from_seconds(10.0);
};

enum class FlushTrigger { bundle_count, pending_time, forced };

const char* to_string(FlushTrigger trigger) noexcept;

template <typename Key>
struct SignalDraft {
    EndpointId destination;
    std::map<Key, std::set<BundleTag>> entries;
    SimTime created_at;
    std::set<BundleTag> distinct;
};

template <typename Key>
struct FlushedSignal {
    EndpointId destination;
    std::map<Key, std::set<BundleTag>> entries;
    SimTime created_at;
    SimTime flushed_at;
    FlushTrigger trigger = FlushTrigger::forced;

    std::size_t distinct_tags() const {
        std::set<BundleTag> all;
        for (const auto& [key, tags] : entries) {
            all.insert(tags.begin(), tags.end());
        }
        return all.size();
    }
};

template <typename Key>
class DraftTable {
public:
    explicit DraftTable(FlushPolicy policy = {}) : policy_(policy) {}

    /// Adds `tag` under `key` to the draft toward `destination`, creating
    /// the draft if needed. Re-adding a tag is a no-op. Returns the flushed
    /// signal when the bundle threshold is reached.
    std::optional<FlushedSignal<Key>> add(const EndpointId& destination, const Key& key, const BundleTag& tag,
                                          SimTime now) {
        auto [it, created] = drafts_.try_emplace(destination);
        SignalDraft<Key>& draft = it->second;
        if (created) {
            draft.destination = destination;
            draft.created_at = now;
        }
        draft.entries[key].insert(tag);
        draft.distinct.insert(tag);
        if (draft.distinct.size() >= policy_.max_bundles) {
            return take(it, now, FlushTrigger::bundle_count);
        }
        return std::nullopt;
    }

    /// Flushes every draft that has been pending for at least max_pending.
    std::vector<FlushedSignal<Key>> poll(SimTime now) {
        std::vector<FlushedSignal<Key>> out;
        for (auto it = drafts_.begin(); it != drafts_.end();) {
            if (now - it->second.created_at >= policy_.max_pending) {
                out.push_back(take(it++, now, FlushTrigger::pending_time));
            } else {
                ++it;
            }
        }
        return out;
    }

    std::vector<FlushedSignal<Key>> flush_all(SimTime now) {
        std::vector<FlushedSignal<Key>> out;
        while (!drafts_.empty()) {
            out.push_back(take(drafts_.begin(), now, FlushTrigger::forced));
        }
        return out;
    }

    std::optional<SimTime> next_deadline() const {
        std::optional<SimTime> earliest;
        for (const auto& [destination, draft] : drafts_) {
            const SimTime due = draft.created_at + policy_.max_pending;
            if (!earliest || due < *earliest) {
                earliest = due;
            }
        }
        return earliest;
    }

    const std::map<EndpointId, SignalDraft<Key>>& drafts() const noexcept { return drafts_; }
    const FlushPolicy& policy() const noexcept { return policy_; }

private:
    using Iterator = typename std::map<EndpointId, SignalDraft<Key>>::iterator;

    FlushedSignal<Key> take(Iterator it, SimTime now, FlushTrigger trigger) {
        FlushedSignal<Key> signal;
        signal.destination = it->second.destination;
        signal.entries = std::move(it->second.entries);
        signal.created_at = it->second.created_at;
        signal.flushed_at = now;
        signal.trigger = trigger;
        drafts_.erase(it);
        return signal;
    }

    FlushPolicy policy_;
    std::map<EndpointId, SignalDraft<Key>> drafts_;
};

} // namespace bprel

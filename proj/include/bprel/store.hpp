#pragma once

#include "bprel/bundle.hpp"
#include "bprel/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace bprel {

enum class RetentionConstraint : std::uint8_t {
    /// Held while the node decides whether to accept custody.
    custody_pending,
    /// Held while this node is the bundle's custodian.
    custody_accepted,
    /// Held while the bundle waits for its next-hop contact.
    forward_pending,
};

const char* to_string(RetentionConstraint constraint) noexcept;

using StoreKey = std::uint64_t;

struct StoredBundle {
    Bundle bundle;
    std::set<RetentionConstraint> constraints;
    SimTime expires_at;
};

/// Node-local persistent bundle storage. A bundle holding any retention
/// constraint cannot be discarded; only lifetime expiry removes it.
class BundleStore {
public:
    /// No capacity means unbounded.
    explicit BundleStore(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {}

    /// Throws StoreFull when at capacity.
    StoreKey insert(Bundle bundle, SimTime expires_at);

    StoredBundle* find(StoreKey key);
    const StoredBundle* find(StoreKey key) const;
    StoredBundle& at(StoreKey key);

    void add_constraint(StoreKey key, RetentionConstraint constraint);
    void remove_constraint(StoreKey key, RetentionConstraint constraint);
    bool has_constraint(StoreKey key, RetentionConstraint constraint) const;

    /// Removes the bundle if it holds no retention constraint. Returns
    /// whether it was removed.
    bool discard(StoreKey key);
    /// Removes the bundle regardless of constraints (lifetime expiry).
    void expire(StoreKey key);

    std::vector<StoreKey> expired(SimTime now) const;
    std::optional<SimTime> next_expiry() const;

    bool full() const noexcept { return capacity_ && entries_.size() >= *capacity_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t count_with(RetentionConstraint constraint) const;
    const std::map<StoreKey, StoredBundle>& entries() const noexcept { return entries_; }

private:
    std::optional<std::size_t> capacity_;
    std::map<StoreKey, StoredBundle> entries_;
    StoreKey next_key_ = 1;
};

} // namespace bprel

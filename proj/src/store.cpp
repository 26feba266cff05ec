#include "bprel/store.hpp"

#include "bprel/errors.hpp"

namespace bprel {

const char* to_string(RetentionConstraint constraint) noexcept {
    switch (constraint) {
    case RetentionConstraint::custody_pending: return "COMPRESSED_CUSTODY_PENDING";
    case RetentionConstraint::custody_accepted: return "COMPRESSED_CUSTODY_ACCEPTED";
    case RetentionConstraint::forward_pending: return "FORWARD_PENDING";
    }
    return "?";
}

StoreKey BundleStore::insert(Bundle bundle, SimTime expires_at) {
    if (full()) {
        throw StoreFull("bundle store is full");
    }
    const StoreKey key = next_key_++;
    entries_.emplace(key, StoredBundle{std::move(bundle), {}, expires_at});
    return key;
}

StoredBundle* BundleStore::find(StoreKey key) {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

const StoredBundle* BundleStore::find(StoreKey key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

StoredBundle& BundleStore::at(StoreKey key) {
    StoredBundle* entry = find(key);
    if (entry == nullptr) {
        throw Error("no stored bundle with key " + std::to_string(key));
    }
    return *entry;
}

void BundleStore::add_constraint(StoreKey key, RetentionConstraint constraint) {
    at(key).constraints.insert(constraint);
}

void BundleStore::remove_constraint(StoreKey key, RetentionConstraint constraint) {
    if (StoredBundle* entry = find(key)) {
        entry->constraints.erase(constraint);
    }
}

bool BundleStore::has_constraint(StoreKey key, RetentionConstraint constraint) const {
    const StoredBundle* entry = find(key);
    return entry != nullptr && entry->constraints.contains(constraint);
}

bool BundleStore::discard(StoreKey key) {
    const auto it = entries_.find(key);
    if (it == entries_.end() || !it->second.constraints.empty()) {
        return false;
    }
    entries_.erase(it);
    return true;
}

void BundleStore::expire(StoreKey key) { entries_.erase(key); }

std::vector<StoreKey> BundleStore::expired(SimTime now) const {
    std::vector<StoreKey> out;
    for (const auto& [key, entry] : entries_) {
        if (entry.expires_at <= now) {
            out.push_back(key);
        }
    }
    return out;
}

std::optional<SimTime> BundleStore::next_expiry() const {
    std::optional<SimTime> earliest;
    for (const auto& [key, entry] : entries_) {
        if (!earliest || entry.expires_at < *earliest) {
            earliest = entry.expires_at;
        }
    }
    return earliest;
}

std::size_t BundleStore::count_with(RetentionConstraint constraint) const {
    std::size_t count = 0;
    for (const auto& [key, entry] : entries_) {
        count += entry.constraints.contains(constraint) ? 1 : 0;
    }
    return count;
}

} // namespace bprel

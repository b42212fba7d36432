#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topogen/array.hpp"
#include "topogen/embedding.hpp"

namespace topogen {

// A task for the generator to condition on. If a precomputed raw embedding
// is supplied it bypasses the provider (length must match the raw dim).
struct TaskQuery {
    std::string text;
    std::optional<nd::Array> precomputed_embedding;

    explicit TaskQuery(std::string t) : text(std::move(t)) {}
    TaskQuery(std::string t, nd::Array emb)
        : text(std::move(t)), precomputed_embedding(std::move(emb)) {}
};

struct RoleEntry {
    std::string name;
    std::string description;
    nd::Array base_embedding;       // frozen; provider output for "name: description"
    bool explicit_embedding = false;  // came from the pool file rather than the provider
};

// Ordered, append-only pool of agent roles plus the END-token embedding's
// initial value. Extension returns a new registry; existing rows are never
// touched, which is what makes role-pool growth safe without retraining.
class RoleRegistry {
public:
    static RoleRegistry create(const std::vector<std::pair<std::string, std::string>>& roles,
                               const EmbeddingProvider& provider, uint64_t seed);

    RoleRegistry extended(const std::vector<std::pair<std::string, std::string>>& new_roles,
                          const EmbeddingProvider& provider) const;

    size_t role_count() const { return roles_.size(); }
    const RoleEntry& role(size_t i) const { return roles_.at(i); }
    // Index of a role name, or -1.
    int find(const std::string& name) const;

    const nd::Array& end_embedding() const { return end_embedding_; }
    int raw_dim() const { return raw_dim_; }

    // Order-sensitive hash over the first `prefix_count` role names; used to
    // match checkpoints to pools (extensions keep the prefix stable).
    uint64_t fingerprint(size_t prefix_count) const;

    // Role-pool file: JSON array of {"name", "description", "embedding"?}.
    // Unknown fields are ignored.
    static RoleRegistry load_pool(const std::string& path, const EmbeddingProvider& provider,
                                  uint64_t seed);
    void save_pool(const std::string& path) const;

private:
    RoleRegistry() = default;

    std::vector<RoleEntry> roles_;
    nd::Array end_embedding_;
    int raw_dim_ = 0;
};

}  // namespace topogen

#include "topogen/registry.hpp"

#include <set>

#include <json.hpp>

#include "topogen/io_util.hpp"
#include "topogen/rng.hpp"

namespace topogen {

namespace {

void check_unique(const std::vector<std::pair<std::string, std::string>>& roles) {
    std::set<std::string> seen;
    for (const auto& [name, desc] : roles) {
        (void)desc;
        if (!seen.insert(name).second)
            throw ConflictError("RoleRegistry: duplicate role name '" + name + "'");
    }
}

nd::Array role_embedding(const EmbeddingProvider& provider, const std::string& name,
                         const std::string& description) {
    return provider.embed(name + ": " + description);
}

}  // namespace

RoleRegistry RoleRegistry::create(const std::vector<std::pair<std::string, std::string>>& roles,
                                  const EmbeddingProvider& provider, uint64_t seed) {
    check_unique(roles);
    RoleRegistry reg;
    reg.raw_dim_ = provider.raw_dim();
    for (const auto& [name, desc] : roles)
        reg.roles_.push_back({name, desc, role_embedding(provider, name, desc), false});
    Rng rng(seed_for(seed, "end-embedding"));
    reg.end_embedding_ = nd::Array::uniform_init({reg.raw_dim_}, reg.raw_dim_, rng);
    return reg;
}

RoleRegistry RoleRegistry::extended(
    const std::vector<std::pair<std::string, std::string>>& new_roles,
    const EmbeddingProvider& provider) const {
    check_unique(new_roles);
    for (const auto& [name, desc] : new_roles) {
        (void)desc;
        if (find(name) >= 0)
            throw ConflictError("RoleRegistry: role '" + name + "' already registered");
    }
    RoleRegistry out = *this;  // existing rows copied bitwise; END unchanged
    for (const auto& [name, desc] : new_roles)
        out.roles_.push_back({name, desc, role_embedding(provider, name, desc), false});
    return out;
}

int RoleRegistry::find(const std::string& name) const {
    for (size_t i = 0; i < roles_.size(); ++i)
        if (roles_[i].name == name) return static_cast<int>(i);
    return -1;
}

uint64_t RoleRegistry::fingerprint(size_t prefix_count) const {
    uint64_t h = 0xCBF29CE484222325ULL;
    size_t n = std::min(prefix_count, roles_.size());
    for (size_t i = 0; i < n; ++i) {
        h = fnv1a64(roles_[i].name, h);
        h = fnv1a64("\x1f", h);  // separator so "ab"+"c" != "a"+"bc"
    }
    return h;
}

RoleRegistry RoleRegistry::load_pool(const std::string& path, const EmbeddingProvider& provider,
                                     uint64_t seed) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw ValidationError("role pool: expected a JSON array in " + path);

    RoleRegistry reg;
    reg.raw_dim_ = provider.raw_dim();
    std::set<std::string> seen;
    for (const auto& item : j) {
        if (!item.contains("name") || !item.contains("description"))
            throw ValidationError("role pool: entries need name and description in " + path);
        std::string name = item["name"].get<std::string>();
        std::string desc = item["description"].get<std::string>();
        if (!seen.insert(name).second)
            throw ConflictError("role pool: duplicate role name '" + name + "'");
        RoleEntry entry{name, desc, nd::Array(), false};
        if (item.contains("embedding") && !item["embedding"].is_null()) {
            std::vector<float> data = item["embedding"].get<std::vector<float>>();
            if (static_cast<int>(data.size()) != reg.raw_dim_)
                throw DimensionError("role pool: embedding length mismatch for '" + name + "'");
            entry.base_embedding = nd::Array({reg.raw_dim_}, std::move(data));
            l2_normalize(entry.base_embedding);
            entry.explicit_embedding = true;
        } else {
            entry.base_embedding = role_embedding(provider, name, desc);
        }
        reg.roles_.push_back(std::move(entry));
    }
    Rng rng(seed_for(seed, "end-embedding"));
    reg.end_embedding_ = nd::Array::uniform_init({reg.raw_dim_}, reg.raw_dim_, rng);
    return reg;
}

void RoleRegistry::save_pool(const std::string& path) const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : roles_) {
        nlohmann::json item{{"name", r.name}, {"description", r.description}};
        if (r.explicit_embedding) {
            item["embedding"] = std::vector<float>(r.base_embedding.raw());
        }
        j.push_back(std::move(item));
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace topogen

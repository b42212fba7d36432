#include "topogen/param_store.hpp"

#include <cmath>

namespace topogen::nd {

Array& ParamStore::create(const std::string& name, Array value) {
    if (has(name)) throw ConflictError("ParamStore: duplicate parameter '" + name + "'");
    index_[name] = slots_.size();
    order_.push_back(name);
    Slot slot;
    slot.m = Array::zeros(value.shape());
    slot.v = Array::zeros(value.shape());
    slot.value = std::move(value);
    slots_.push_back(std::move(slot));
    return slots_.back().value;
}

Array& ParamStore::create_uniform(const std::string& name, std::vector<int> shape, int fan_in,
                                  Rng& rng) {
    return create(name, Array::uniform_init(std::move(shape), fan_in, rng));
}

Array& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("ParamStore: unknown parameter '" + name + "'");
    return slots_[it->second].value;
}

const Array& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("ParamStore: unknown parameter '" + name + "'");
    return slots_[it->second].value;
}

size_t ParamStore::total_scalars() const {
    size_t n = 0;
    for (const auto& s : slots_) n += s.value.size();
    return n;
}

GradMap ParamStore::zero_grads() const {
    GradMap g;
    for (size_t i = 0; i < order_.size(); ++i) g[order_[i]] = Array::zeros(slots_[i].value.shape());
    return g;
}

void ParamStore::adam_step(const GradMap& grads, float lr) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    // Validate before mutating anything.
    for (size_t i = 0; i < order_.size(); ++i) {
        auto it = grads.find(order_[i]);
        if (it == grads.end())
            throw LookupError("adam_step: missing gradient for parameter '" + order_[i] + "'");
        if (!it->second.same_shape(slots_[i].value))
            throw DimensionError("adam_step: gradient shape mismatch for '" + order_[i] + "'");
    }

    step_ += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));

    for (size_t i = 0; i < order_.size(); ++i) {
        const Array& g = grads.at(order_[i]);
        Slot& s = slots_[i];
        for (size_t k = 0; k < g.size(); ++k) {
            double gk = g[k];
            double m = beta1 * s.m[k] + (1.0 - beta1) * gk;
            double v = beta2 * s.v[k] + (1.0 - beta2) * gk * gk;
            s.m[k] = static_cast<float>(m);
            s.v[k] = static_cast<float>(v);
            double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
            s.value[k] = static_cast<float>(s.value[k] - update);
        }
    }
}

void ParamStore::reset_optimizer() {
    step_ = 0;
    for (auto& s : slots_) {
        s.m = Array::zeros(s.value.shape());
        s.v = Array::zeros(s.value.shape());
    }
}

}  // namespace topogen::nd

#pragma once

#include <map>
#include <string>
#include <vector>

#include "topogen/array.hpp"

namespace topogen::nd {

using GradMap = std::map<std::string, Array>;

// Named trainable arrays plus Adam moment state. Insertion order is
// preserved; checkpoint manifests and gradient accumulation rely on it.
class ParamStore {
public:
    Array& create(const std::string& name, Array value);

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    Array& create_uniform(const std::string& name, std::vector<int> shape, int fan_in, Rng& rng);

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    Array& at(const std::string& name);
    const Array& at(const std::string& name) const;

    const std::vector<std::string>& names() const { return order_; }
    size_t count() const { return order_.size(); }
    size_t total_scalars() const;

    // Returns a map with one zero array per parameter, shape-matched.
    GradMap zero_grads() const;

    // Adam update, beta1=0.9, beta2=0.999, eps=1e-8. Every parameter must
    // have a shape-matched entry in grads.
    void adam_step(const GradMap& grads, float lr);

    long step_count() const { return step_; }

    // Fresh optimizer state (used after loading a checkpoint).
    void reset_optimizer();

private:
    struct Slot {
        Array value;
        Array m;  // first moment
        Array v;  // second moment
    };

    std::vector<std::string> order_;
    std::map<std::string, size_t> index_;
    std::vector<Slot> slots_;
    long step_ = 0;
};

}  // namespace topogen::nd

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "topogen/errors.hpp"
#include "topogen/rng.hpp"

namespace topogen::nd {

// Dense row-major float32 array. Rank 1 and 2 are all this project needs.
class Array {
public:
    Array() = default;

    explicit Array(std::vector<int> shape, float fill = 0.0f)
        : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

    Array(std::vector<int> shape, std::vector<float> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_size(shape_))
            throw DimensionError("Array: data length does not match shape");
    }

    static Array vec(std::initializer_list<float> v) {
        return Array({static_cast<int>(v.size())}, std::vector<float>(v));
    }

    static Array zeros(std::vector<int> shape) { return Array(std::move(shape)); }

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    static Array uniform_init(std::vector<int> shape, int fan_in, Rng& rng) {
        Array a(std::move(shape));
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in < 1 ? 1 : fan_in));
        for (float& x : a.data_) x = static_cast<float>(rng.uniform(-bound, bound));
        return a;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    size_t size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& raw() { return data_; }
    const std::vector<float>& raw() const { return data_; }

    float& operator[](size_t i) { return data_[i]; }
    float operator[](size_t i) const { return data_[i]; }

    // 2D access; no bounds checks beyond debug builds.
    float& at(int r, int c) { return data_[static_cast<size_t>(r) * dim(1) + c]; }
    float at(int r, int c) const { return data_[static_cast<size_t>(r) * dim(1) + c]; }

    bool same_shape(const Array& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (float x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    static size_t checked_size(const std::vector<int>& shape) {
        size_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw DimensionError("Array: non-positive dimension");
            n *= static_cast<size_t>(d);
        }
        return n;
    }

    std::vector<int> shape_;
    std::vector<float> data_;
};

}  // namespace topogen::nd

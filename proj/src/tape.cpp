#include "topogen/tape.hpp"

#include <atomic>
#include <cmath>

namespace topogen::nd {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    // log(1 + e^x) without overflow
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

uint32_t Tape::next_id() {
    static std::atomic<uint32_t> counter{1};
    return counter.fetch_add(1);
}

Tape::Tape() : id_(next_id()) {}

int32_t Tape::check(Var v) const {
    if (v.tape != id_ || v.idx < 0 || static_cast<size_t>(v.idx) >= nodes_.size())
        throw GraphError("Tape: Var does not belong to this tape");
    return v.idx;
}

const Tape::Node& Tape::node(Var v) const { return nodes_[static_cast<size_t>(check(v))]; }

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{id_, static_cast<int32_t>(nodes_.size() - 1)};
}

const Array& Tape::value(Var v) const { return node(v).value; }

float Tape::scalar(Var v) const {
    const Array& a = value(v);
    if (a.size() != 1) throw DimensionError("Tape::scalar: value is not a scalar");
    return a[0];
}

Var Tape::input(Array value, std::string name) {
    Node n;
    n.op = Op::Input;
    n.value = std::move(value);
    n.name = std::move(name);
    return push(std::move(n));
}

Var Tape::param(const ParamStore& store, const std::string& name) {
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].op == Op::Param && nodes_[i].name == name)
            return Var{id_, static_cast<int32_t>(i)};
    }
    Node n;
    n.op = Op::Param;
    n.value = store.at(name);
    n.name = name;
    return push(std::move(n));
}

Var Tape::linear(Var w, Var x, Var b) {
    const Array& wv = value(w);
    const Array& xv = value(x);
    const Array& bv = value(b);
    if (wv.rank() != 2 || xv.rank() != 1 || bv.rank() != 1 || wv.dim(1) != xv.dim(0) ||
        wv.dim(0) != bv.dim(0))
        throw DimensionError("linear: shapes do not conform");
    const int rows = wv.dim(0), cols = wv.dim(1);
    Node n;
    n.op = Op::Linear;
    n.in[0] = check(w);
    n.in[1] = check(x);
    n.in[2] = check(b);
    n.value = Array({rows});
    for (int r = 0; r < rows; ++r) {
        double acc = bv[static_cast<size_t>(r)];
        const float* wr = wv.data() + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += static_cast<double>(wr[c]) * xv[static_cast<size_t>(c)];
        n.value[static_cast<size_t>(r)] = static_cast<float>(acc);
    }
    return push(std::move(n));
}

Var Tape::matvec(Var m, Var x) {
    const Array& mv = value(m);
    const Array& xv = value(x);
    if (mv.rank() != 2 || xv.rank() != 1 || mv.dim(1) != xv.dim(0))
        throw DimensionError("matvec: shapes do not conform");
    const int rows = mv.dim(0), cols = mv.dim(1);
    Node n;
    n.op = Op::MatVec;
    n.in[0] = check(m);
    n.in[1] = check(x);
    n.value = Array({rows});
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const float* mr = mv.data() + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += static_cast<double>(mr[c]) * xv[static_cast<size_t>(c)];
        n.value[static_cast<size_t>(r)] = static_cast<float>(acc);
    }
    return push(std::move(n));
}

Var Tape::affine_rows(Var w, Var x, Var b) {
    const Array& wv = value(w);
    const Array& xv = value(x);
    const Array& bv = value(b);
    if (wv.rank() != 2 || xv.rank() != 2 || bv.rank() != 1 || wv.dim(1) != xv.dim(1) ||
        wv.dim(0) != bv.dim(0))
        throw DimensionError("affine_rows: shapes do not conform");
    const int nrows = xv.dim(0), din = xv.dim(1), dout = wv.dim(0);
    Node n;
    n.op = Op::AffineRows;
    n.in[0] = check(w);
    n.in[1] = check(x);
    n.in[2] = check(b);
    n.value = Array({nrows, dout});
    for (int r = 0; r < nrows; ++r) {
        const float* xr = xv.data() + static_cast<size_t>(r) * din;
        for (int o = 0; o < dout; ++o) {
            double acc = bv[static_cast<size_t>(o)];
            const float* wo = wv.data() + static_cast<size_t>(o) * din;
            for (int i = 0; i < din; ++i) acc += static_cast<double>(wo[i]) * xr[i];
            n.value.at(r, o) = static_cast<float>(acc);
        }
    }
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (!av.same_shape(bv)) throw DimensionError("add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.in[0] = check(a);
    n.in[1] = check(b);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (!av.same_shape(bv)) throw DimensionError("sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.in[0] = check(a);
    n.in[1] = check(b);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (!av.same_shape(bv)) throw DimensionError("mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.in[0] = check(a);
    n.in[1] = check(b);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
    return push(std::move(n));
}

Var Tape::scale(Var a, float c) {
    const Array& av = value(a);
    Node n;
    n.op = Op::Scale;
    n.in[0] = check(a);
    n.c0 = c;
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * c;
    return push(std::move(n));
}

Var Tape::scale_by(Var v, Var s) {
    const Array& vv = value(v);
    const Array& sv = value(s);
    if (sv.size() != 1) throw DimensionError("scale_by: scale is not a scalar");
    Node n;
    n.op = Op::ScaleBy;
    n.in[0] = check(v);
    n.in[1] = check(s);
    n.value = Array(vv.shape());
    for (size_t i = 0; i < vv.size(); ++i) n.value[i] = vv[i] * sv[0];
    return push(std::move(n));
}

Var Tape::dot(Var a, Var b) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (!av.same_shape(bv)) throw DimensionError("dot: shape mismatch");
    Node n;
    n.op = Op::Dot;
    n.in[0] = check(a);
    n.in[1] = check(b);
    double acc = 0.0;
    for (size_t i = 0; i < av.size(); ++i) acc += static_cast<double>(av[i]) * bv[i];
    n.value = Array({1});
    n.value[0] = static_cast<float>(acc);
    return push(std::move(n));
}

Var Tape::sum(Var a) {
    const Array& av = value(a);
    Node n;
    n.op = Op::Sum;
    n.in[0] = check(a);
    double acc = 0.0;
    for (size_t i = 0; i < av.size(); ++i) acc += av[i];
    n.value = Array({1});
    n.value[0] = static_cast<float>(acc);
    return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (av.rank() != 1 || bv.rank() != 1) throw DimensionError("concat: vectors only");
    Node n;
    n.op = Op::Concat;
    n.in[0] = check(a);
    n.in[1] = check(b);
    n.value = Array({av.dim(0) + bv.dim(0)});
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = av[i];
    for (size_t i = 0; i < bv.size(); ++i) n.value[av.size() + i] = bv[i];
    return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
    const Array& av = value(a);
    Node n;
    n.op = Op::Sigmoid;
    n.in[0] = check(a);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i)
        n.value[i] = static_cast<float>(stable_sigmoid(av[i]));
    return push(std::move(n));
}

Var Tape::tanh_act(Var a) {
    const Array& av = value(a);
    Node n;
    n.op = Op::Tanh;
    n.in[0] = check(a);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i)
        n.value[i] = static_cast<float>(std::tanh(static_cast<double>(av[i])));
    return push(std::move(n));
}

Var Tape::layer_norm(Var x, Var gain, Var bias) {
    const Array& xv = value(x);
    const Array& gv = value(gain);
    const Array& bv = value(bias);
    if (xv.rank() != 1 || !xv.same_shape(gv) || !xv.same_shape(bv))
        throw DimensionError("layer_norm: shape mismatch");
    const size_t d = xv.size();
    if (d < 2) throw DimensionError("layer_norm: needs at least 2 elements");
    constexpr double eps = 1e-5;
    double mean = 0.0;
    for (size_t i = 0; i < d; ++i) mean += xv[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (size_t i = 0; i < d; ++i) {
        double dif = xv[i] - mean;
        var += dif * dif;
    }
    var /= static_cast<double>(d);
    double inv_std = 1.0 / std::sqrt(var + eps);

    Node n;
    n.op = Op::LayerNorm;
    n.in[0] = check(x);
    n.in[1] = check(gain);
    n.in[2] = check(bias);
    n.c0 = static_cast<float>(mean);
    n.c1 = static_cast<float>(inv_std);
    n.value = Array(xv.shape());
    for (size_t i = 0; i < d; ++i) {
        double xhat = (xv[i] - mean) * inv_std;
        n.value[i] = static_cast<float>(xhat * gv[i] + bv[i]);
    }
    return push(std::move(n));
}

Var Tape::softmax(Var a) {
    const Array& av = value(a);
    if (av.rank() != 1) throw DimensionError("softmax: vector expected");
    double mx = av[0];
    for (size_t i = 1; i < av.size(); ++i) mx = std::max(mx, static_cast<double>(av[i]));
    double z = 0.0;
    std::vector<double> e(av.size());
    for (size_t i = 0; i < av.size(); ++i) {
        e[i] = std::exp(static_cast<double>(av[i]) - mx);
        z += e[i];
    }
    Node n;
    n.op = Op::Softmax;
    n.in[0] = check(a);
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = static_cast<float>(e[i] / z);
    return push(std::move(n));
}

Var Tape::cross_entropy(Var logits, int target) {
    const Array& lv = value(logits);
    if (lv.rank() != 1) throw DimensionError("cross_entropy: vector expected");
    if (target < 0 || static_cast<size_t>(target) >= lv.size())
        throw DimensionError("cross_entropy: target index out of range");
    double mx = lv[0];
    for (size_t i = 1; i < lv.size(); ++i) mx = std::max(mx, static_cast<double>(lv[i]));
    double z = 0.0;
    for (size_t i = 0; i < lv.size(); ++i) z += std::exp(static_cast<double>(lv[i]) - mx);
    double lse = mx + std::log(z);
    Node n;
    n.op = Op::CrossEntropy;
    n.in[0] = check(logits);
    n.aux = target;
    n.value = Array({1});
    n.value[0] = static_cast<float>(lse - lv[static_cast<size_t>(target)]);
    return push(std::move(n));
}

Var Tape::bce_logit(Var logit, int label) {
    const Array& lv = value(logit);
    if (lv.size() != 1) throw DimensionError("bce_logit: scalar logit expected");
    if (label != 0 && label != 1) throw InputError("bce_logit: label must be 0 or 1");
    double s = lv[0];
    Node n;
    n.op = Op::BceLogit;
    n.in[0] = check(logit);
    n.aux = label;
    n.value = Array({1});
    // -log sigmoid(s) = softplus(-s); -log(1-sigmoid(s)) = softplus(s)
    n.value[0] = static_cast<float>(label == 1 ? softplus(-s) : softplus(s));
    return push(std::move(n));
}

Var Tape::add_scaled(Var a, float ca, Var b, float cb) {
    const Array& av = value(a);
    const Array& bv = value(b);
    if (!av.same_shape(bv)) throw DimensionError("add_scaled: shape mismatch");
    Node n;
    n.op = Op::AddScaled;
    n.in[0] = check(a);
    n.in[1] = check(b);
    n.c0 = ca;
    n.c1 = cb;
    n.value = Array(av.shape());
    for (size_t i = 0; i < av.size(); ++i) n.value[i] = ca * av[i] + cb * bv[i];
    return push(std::move(n));
}

GradMap Tape::backward(Var loss) {
    const int32_t root = check(loss);
    if (nodes_[static_cast<size_t>(root)].value.size() != 1)
        throw GraphError("backward: loss must be a scalar");

    std::vector<Array> grad(nodes_.size());
    auto g = [&](int32_t i) -> Array& {
        if (grad[static_cast<size_t>(i)].size() == 0)
            grad[static_cast<size_t>(i)] = Array::zeros(nodes_[static_cast<size_t>(i)].value.shape());
        return grad[static_cast<size_t>(i)];
    };
    g(root)[0] = 1.0f;

    for (int32_t i = root; i >= 0; --i) {
        const Node& n = nodes_[static_cast<size_t>(i)];
        if (grad[static_cast<size_t>(i)].size() == 0) continue;  // not on the loss path
        const Array& gy = grad[static_cast<size_t>(i)];
        switch (n.op) {
            case Op::Input:
            case Op::Param:
                break;
            case Op::Linear: {
                const Array& wv = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& xv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& gw = g(n.in[0]);
                Array& gx = g(n.in[1]);
                Array& gb = g(n.in[2]);
                const int rows = wv.dim(0), cols = wv.dim(1);
                for (int r = 0; r < rows; ++r) {
                    const float gyr = gy[static_cast<size_t>(r)];
                    gb[static_cast<size_t>(r)] += gyr;
                    float* gwr = gw.data() + static_cast<size_t>(r) * cols;
                    for (int c = 0; c < cols; ++c) gwr[c] += gyr * xv[static_cast<size_t>(c)];
                }
                for (int c = 0; c < cols; ++c) {
                    double acc = 0.0;
                    for (int r = 0; r < rows; ++r)
                        acc += static_cast<double>(wv.at(r, c)) * gy[static_cast<size_t>(r)];
                    gx[static_cast<size_t>(c)] += static_cast<float>(acc);
                }
                break;
            }
            case Op::MatVec: {
                const Array& mv = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& xv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& gm = g(n.in[0]);
                Array& gx = g(n.in[1]);
                const int rows = mv.dim(0), cols = mv.dim(1);
                for (int r = 0; r < rows; ++r) {
                    const float gyr = gy[static_cast<size_t>(r)];
                    float* gmr = gm.data() + static_cast<size_t>(r) * cols;
                    for (int c = 0; c < cols; ++c) gmr[c] += gyr * xv[static_cast<size_t>(c)];
                }
                for (int c = 0; c < cols; ++c) {
                    double acc = 0.0;
                    for (int r = 0; r < rows; ++r)
                        acc += static_cast<double>(mv.at(r, c)) * gy[static_cast<size_t>(r)];
                    gx[static_cast<size_t>(c)] += static_cast<float>(acc);
                }
                break;
            }
            case Op::AffineRows: {
                const Array& wv = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& xv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& gw = g(n.in[0]);
                Array& gx = g(n.in[1]);
                Array& gb = g(n.in[2]);
                const int nrows = xv.dim(0), din = xv.dim(1), dout = wv.dim(0);
                for (int r = 0; r < nrows; ++r) {
                    const float* xr = xv.data() + static_cast<size_t>(r) * din;
                    const float* gyr = gy.data() + static_cast<size_t>(r) * dout;
                    float* gxr = gx.data() + static_cast<size_t>(r) * din;
                    for (int o = 0; o < dout; ++o) {
                        gb[static_cast<size_t>(o)] += gyr[o];
                        const float* wo = wv.data() + static_cast<size_t>(o) * din;
                        float* gwo = gw.data() + static_cast<size_t>(o) * din;
                        for (int c = 0; c < din; ++c) {
                            gwo[c] += gyr[o] * xr[c];
                            gxr[c] += wo[c] * gyr[o];
                        }
                    }
                }
                break;
            }
            case Op::Add: {
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    ga[k] += gy[k];
                    gb[k] += gy[k];
                }
                break;
            }
            case Op::Sub: {
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    ga[k] += gy[k];
                    gb[k] -= gy[k];
                }
                break;
            }
            case Op::Mul: {
                const Array& av = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& bv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    ga[k] += gy[k] * bv[k];
                    gb[k] += gy[k] * av[k];
                }
                break;
            }
            case Op::Scale: {
                Array& ga = g(n.in[0]);
                for (size_t k = 0; k < gy.size(); ++k) ga[k] += gy[k] * n.c0;
                break;
            }
            case Op::ScaleBy: {
                const Array& vv = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& sv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& gv = g(n.in[0]);
                Array& gs = g(n.in[1]);
                double acc = 0.0;
                for (size_t k = 0; k < gy.size(); ++k) {
                    gv[k] += gy[k] * sv[0];
                    acc += static_cast<double>(gy[k]) * vv[k];
                }
                gs[0] += static_cast<float>(acc);
                break;
            }
            case Op::Dot: {
                const Array& av = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& bv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < av.size(); ++k) {
                    ga[k] += gy[0] * bv[k];
                    gb[k] += gy[0] * av[k];
                }
                break;
            }
            case Op::Sum: {
                Array& ga = g(n.in[0]);
                for (size_t k = 0; k < ga.size(); ++k) ga[k] += gy[0];
                break;
            }
            case Op::Concat: {
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < ga.size(); ++k) ga[k] += gy[k];
                for (size_t k = 0; k < gb.size(); ++k) gb[k] += gy[ga.size() + k];
                break;
            }
            case Op::Sigmoid: {
                Array& ga = g(n.in[0]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    float y = n.value[k];
                    ga[k] += gy[k] * y * (1.0f - y);
                }
                break;
            }
            case Op::Tanh: {
                Array& ga = g(n.in[0]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    float y = n.value[k];
                    ga[k] += gy[k] * (1.0f - y * y);
                }
                break;
            }
            case Op::LayerNorm: {
                const Array& xv = nodes_[static_cast<size_t>(n.in[0])].value;
                const Array& gv = nodes_[static_cast<size_t>(n.in[1])].value;
                Array& gx = g(n.in[0]);
                Array& gg = g(n.in[1]);
                Array& gb = g(n.in[2]);
                const size_t d = xv.size();
                const double mean = n.c0, inv_std = n.c1;
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                std::vector<double> xhat(d), dxhat(d);
                for (size_t k = 0; k < d; ++k) {
                    xhat[k] = (xv[k] - mean) * inv_std;
                    dxhat[k] = static_cast<double>(gy[k]) * gv[k];
                    gg[k] += static_cast<float>(static_cast<double>(gy[k]) * xhat[k]);
                    gb[k] += gy[k];
                    sum_dxhat += dxhat[k];
                    sum_dxhat_xhat += dxhat[k] * xhat[k];
                }
                const double inv_d = 1.0 / static_cast<double>(d);
                for (size_t k = 0; k < d; ++k) {
                    double dx = inv_std *
                                (dxhat[k] - inv_d * sum_dxhat - xhat[k] * inv_d * sum_dxhat_xhat);
                    gx[k] += static_cast<float>(dx);
                }
                break;
            }
            case Op::Softmax: {
                Array& ga = g(n.in[0]);
                double dot_py = 0.0;
                for (size_t k = 0; k < gy.size(); ++k)
                    dot_py += static_cast<double>(gy[k]) * n.value[k];
                for (size_t k = 0; k < gy.size(); ++k)
                    ga[k] += static_cast<float>(n.value[k] * (static_cast<double>(gy[k]) - dot_py));
                break;
            }
            case Op::CrossEntropy: {
                const Array& lv = nodes_[static_cast<size_t>(n.in[0])].value;
                Array& gl = g(n.in[0]);
                double mx = lv[0];
                for (size_t k = 1; k < lv.size(); ++k) mx = std::max(mx, static_cast<double>(lv[k]));
                double z = 0.0;
                for (size_t k = 0; k < lv.size(); ++k)
                    z += std::exp(static_cast<double>(lv[k]) - mx);
                for (size_t k = 0; k < lv.size(); ++k) {
                    double p = std::exp(static_cast<double>(lv[k]) - mx) / z;
                    double d = p - (static_cast<int>(k) == n.aux ? 1.0 : 0.0);
                    gl[k] += static_cast<float>(gy[0] * d);
                }
                break;
            }
            case Op::BceLogit: {
                const Array& lv = nodes_[static_cast<size_t>(n.in[0])].value;
                Array& gl = g(n.in[0]);
                double p = stable_sigmoid(lv[0]);
                gl[0] += static_cast<float>(gy[0] * (p - static_cast<double>(n.aux)));
                break;
            }
            case Op::AddScaled: {
                Array& ga = g(n.in[0]);
                Array& gb = g(n.in[1]);
                for (size_t k = 0; k < gy.size(); ++k) {
                    ga[k] += gy[k] * n.c0;
                    gb[k] += gy[k] * n.c1;
                }
                break;
            }
        }
    }

    GradMap out;
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if ((n.op == Op::Param || n.op == Op::Input) && !n.name.empty()) {
            if (grad[i].size() == 0) grad[i] = Array::zeros(n.value.shape());
            out[n.name] = std::move(grad[i]);
        }
    }
    return out;
}

Var gru_cell(Tape& t, const GruVars& g, Var x, Var h_prev) {
    Var u = t.sigmoid(t.add(t.linear(g.w_u, x, g.b_u), t.matvec(g.u_u, h_prev)));
    Var r = t.sigmoid(t.add(t.linear(g.w_r, x, g.b_r), t.matvec(g.u_r, h_prev)));
    Var c = t.tanh_act(t.add(t.linear(g.w_c, x, g.b_c), t.matvec(g.u_c, t.mul(r, h_prev))));
    // h' = h + u ⊙ (c - h)
    return t.add(h_prev, t.mul(u, t.sub(c, h_prev)));
}

}  // namespace topogen::nd

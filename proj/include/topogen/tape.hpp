#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topogen/array.hpp"
#include "topogen/param_store.hpp"

namespace topogen::nd {

// Handle to a value recorded on a Tape. Carries the owning tape's id so
// cross-tape use is caught instead of silently reading garbage.
struct Var {
    uint32_t tape = 0;
    int32_t idx = -1;
};

// Reverse-mode tape. Forward ops append nodes; backward() replays them in
// exact reverse order and returns gradients for every named leaf.
//
// Reductions (matvec rows, dots, layer-norm statistics, softmax/CE) are
// accumulated in double and rounded to float32 once per output element, so
// forward values are deterministic and finite-difference checks stay tight.
class Tape {
public:
    Tape();

    // Leaves. A named input participates in the gradient map like a parameter.
    Var input(Array value, std::string name = "");
    // Pulls a parameter by value; repeated pulls of the same name return the
    // same Var so gradients accumulate onto one leaf.
    Var param(const ParamStore& store, const std::string& name);

    const Array& value(Var v) const;
    float scalar(Var v) const;

    // y = W·x + b          W:[o×i]  x:[i]  b:[o]
    Var linear(Var w, Var x, Var b);
    // y = M·x              M:[r×c]  x:[c]
    Var matvec(Var m, Var x);
    // Y[r,:] = W·X[r,:]+b  row-independent; appending rows to X leaves
    // earlier output rows bitwise unchanged.
    Var affine_rows(Var w, Var x, Var b);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, float c);
    Var scale_by(Var v, Var s);  // vector times scalar var
    Var dot(Var a, Var b);       // -> scalar
    Var sum(Var a);              // -> scalar
    Var concat(Var a, Var b);

    Var sigmoid(Var a);
    Var tanh_act(Var a);
    Var layer_norm(Var x, Var gain, Var bias);  // eps = 1e-5
    Var softmax(Var a);

    // -log softmax(logits)[target]
    Var cross_entropy(Var logits, int target);
    // -log p where p = sigmoid(logit) if label==1 else 1-sigmoid(logit)
    Var bce_logit(Var logit, int label);
    // ca·a + cb·b, same shapes
    Var add_scaled(Var a, float ca, Var b, float cb);

    // Gradients of a scalar loss w.r.t. every named leaf.
    GradMap backward(Var loss);

    size_t node_count() const { return nodes_.size(); }

private:
    enum class Op : uint8_t {
        Input,
        Param,
        Linear,
        MatVec,
        AffineRows,
        Add,
        Sub,
        Mul,
        Scale,
        ScaleBy,
        Dot,
        Sum,
        Concat,
        Sigmoid,
        Tanh,
        LayerNorm,
        Softmax,
        CrossEntropy,
        BceLogit,
        AddScaled,
    };

    struct Node {
        Op op;
        int32_t in[3] = {-1, -1, -1};
        Array value;
        float c0 = 0.0f, c1 = 0.0f;  // op constants (scale factors)
        int32_t aux = 0;             // target index / label
        std::string name;            // leaves only
    };

    Var push(Node n);
    const Node& node(Var v) const;
    int32_t check(Var v) const;

    static uint32_t next_id();

    uint32_t id_;
    std::vector<Node> nodes_;
};

// Nine weight arrays of one GRU cell as tape Vars.
struct GruVars {
    Var w_u, u_u, b_u;  // update gate
    Var w_r, u_r, b_r;  // reset gate
    Var w_c, u_c, b_c;  // candidate
};

// Standard GRU cell:
//   u = sigmoid(Wu·x + Uu·h + bu)
//   r = sigmoid(Wr·x + Ur·h + br)
//   c = tanh(Wc·x + Uc·(r⊙h) + bc)
//   h' = (1-u)⊙h + u⊙c
Var gru_cell(Tape& t, const GruVars& g, Var x, Var h_prev);

}  // namespace topogen::nd

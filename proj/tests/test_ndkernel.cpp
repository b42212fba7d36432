#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_util.hpp"
#include "topogen/generator.hpp"
#include "topogen/rng.hpp"
#include "topogen/tape.hpp"

using namespace topogen;
using nd::Array;
using nd::ParamStore;
using nd::Tape;
using nd::Var;

namespace {

Array random_array(std::vector<int> shape, Rng& rng, float scale = 0.5f) {
    Array a(std::move(shape));
    for (size_t i = 0; i < a.size(); ++i)
        a[i] = static_cast<float>((rng.next_double() * 2.0 - 1.0) * scale);
    return a;
}

}  // namespace

TEST_CASE("rng: seeded streams are deterministic and label-split") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(seed_for(42, "model-init") != seed_for(42, "train"));
    CHECK(seed_for(42, "x") == seed_for(42, "x"));
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double u = c.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(c.next_below(1) == 0);
}

TEST_CASE("linear: identity and hand-computed cases") {
    Tape t;
    Var w = t.input(Array({2, 2}, {1, 0, 0, 1}));
    Var x = t.input(Array({2}, {1, 2}));
    Var b = t.input(Array({2}, {0, 0}));
    Array y = t.value(t.linear(w, x, b));
    CHECK(y[0] == 1.0f);
    CHECK(y[1] == 2.0f);

    Var w2 = t.input(Array({1, 2}, {2, 3}));
    Var x2 = t.input(Array({2}, {1, 1}));
    Var b2 = t.input(Array({1}, {1}));
    CHECK(t.value(t.linear(w2, x2, b2))[0] == 6.0f);
}

TEST_CASE("linear: random case against the scalar matmul oracle") {
    Rng rng(11);
    Array w = random_array({4, 3}, rng), x = random_array({3}, rng), b = random_array({4}, rng);
    Tape t;
    Array y = t.value(t.linear(t.input(w), t.input(x), t.input(b)));
    oracle::Vec ref = oracle::affine(oracle::to_mat(w), oracle::to_vec(x), oracle::to_vec(b));
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(y[i] - ref[i]) < 1e-6);
}

TEST_CASE("affine_rows: each row transforms like an independent linear") {
    Rng rng(12);
    Array w = random_array({3, 4}, rng), m = random_array({5, 4}, rng), b = random_array({3}, rng);
    Tape t;
    Array rows = t.value(t.affine_rows(t.input(w), t.input(m), t.input(b)));
    for (int r = 0; r < 5; ++r) {
        Array one_row({4});
        for (int c = 0; c < 4; ++c)
            one_row[static_cast<size_t>(c)] = m[static_cast<size_t>(r * 4 + c)];
        Tape t2;
        Array single = t2.value(t2.linear(t2.input(w), t2.input(one_row), t2.input(b)));
        for (int c = 0; c < 3; ++c)
            CHECK(rows[static_cast<size_t>(r * 3 + c)] == single[static_cast<size_t>(c)]);
    }
}

TEST_CASE("gru_cell: zero weights and zero state give zero output") {
    const int d = 4;
    Tape t;
    nd::GruVars g;
    g.w_u = t.input(Array({d, d}));
    g.u_u = t.input(Array({d, d}));
    g.b_u = t.input(Array({d}));
    g.w_r = t.input(Array({d, d}));
    g.u_r = t.input(Array({d, d}));
    g.b_r = t.input(Array({d}));
    g.w_c = t.input(Array({d, d}));
    g.u_c = t.input(Array({d, d}));
    g.b_c = t.input(Array({d}));
    Array h = t.value(nd::gru_cell(t, g, t.input(Array({d}, 1.0f)), t.input(Array({d}))));
    for (size_t i = 0; i < h.size(); ++i) CHECK(h[i] == 0.0f);
}

namespace {

struct GruFixture {
    oracle::GruWeights ow;
    Array wu, uu, bu, wr, ur, br, wc, uc, bc, x, h;

    GruFixture(int in, int d, uint64_t seed) {
        Rng rng(seed);
        wu = random_array({d, in}, rng);
        uu = random_array({d, d}, rng);
        bu = random_array({d}, rng);
        wr = random_array({d, in}, rng);
        ur = random_array({d, d}, rng);
        br = random_array({d}, rng);
        wc = random_array({d, in}, rng);
        uc = random_array({d, d}, rng);
        bc = random_array({d}, rng);
        x = random_array({in}, rng);
        h = random_array({d}, rng);
        ow = {oracle::to_mat(wu), oracle::to_mat(uu), oracle::to_vec(bu),
              oracle::to_mat(wr), oracle::to_mat(ur), oracle::to_vec(br),
              oracle::to_mat(wc), oracle::to_mat(uc), oracle::to_vec(bc)};
    }

    Array run() const {
        Tape t;
        nd::GruVars g{t.input(wu), t.input(uu), t.input(bu), t.input(wr), t.input(ur),
                      t.input(br), t.input(wc), t.input(uc), t.input(bc)};
        return t.value(nd::gru_cell(t, g, t.input(x), t.input(h)));
    }
};

}  // namespace

TEST_CASE("gru_cell: saturated update gate passes the candidate through") {
    GruFixture f(3, 5, 21);
    for (size_t i = 0; i < f.bu.size(); ++i) f.bu[i] = 20.0f;  // sigmoid(~20) ~ 1
    f.ow.bu.assign(5, 20.0);
    Array h_new = f.run();

    // candidate computed independently from the reset/candidate equations
    oracle::Vec u, r, rh(5), c;
    r = oracle::affine(f.ow.wr, oracle::to_vec(f.x), f.ow.br);
    oracle::Vec rH = oracle::matvec(f.ow.ur, oracle::to_vec(f.h));
    for (int i = 0; i < 5; ++i) {
        size_t s = static_cast<size_t>(i);
        rh[s] = oracle::sigmoid(r[s] + rH[s]) * f.h[s];
    }
    c = oracle::affine(f.ow.wc, oracle::to_vec(f.x), f.ow.bc);
    oracle::Vec cH = oracle::matvec(f.ow.uc, rh);
    for (int i = 0; i < 5; ++i) {
        size_t s = static_cast<size_t>(i);
        CHECK(std::abs(h_new[s] - std::tanh(c[s] + cH[s])) < 1e-6);
    }
}

TEST_CASE("gru_cell: random case against the scalar transcription") {
    GruFixture f(4, 6, 22);
    Array h_new = f.run();
    oracle::Vec ref = oracle::gru_step(f.ow, oracle::to_vec(f.x), oracle::to_vec(f.h));
    for (size_t i = 0; i < h_new.size(); ++i) CHECK(std::abs(h_new[i] - ref[i]) < 1e-6);
}

TEST_CASE("gru_cell: output stays in (-1,1) when the state does") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        GruFixture f(3, 4, rng.next_u64());
        for (size_t i = 0; i < f.h.size(); ++i)
            f.h[i] = static_cast<float>(rng.next_double() * 1.98 - 0.99);
        Array h_new = f.run();
        for (size_t i = 0; i < h_new.size(); ++i) {
            CHECK(h_new[i] > -1.0f);
            CHECK(h_new[i] < 1.0f);
        }
    }
}

TEST_CASE("layer_norm: pinned cases") {
    Tape t;
    // constant input hits the epsilon branch and returns the bias
    Array y1 = t.value(t.layer_norm(t.input(Array({4}, 1.0f)), t.input(Array({4}, 1.0f)),
                                    t.input(Array({4}))));
    for (size_t i = 0; i < 4; ++i) CHECK(std::abs(y1[i]) < 1e-6);

    Array y2 = t.value(t.layer_norm(t.input(Array({2}, {-1, 1})), t.input(Array({2}, 1.0f)),
                                    t.input(Array({2}))));
    CHECK(std::abs(y2[0] - -1.0f) < 1e-4);
    CHECK(std::abs(y2[1] - 1.0f) < 1e-4);

    Array y3 = t.value(t.layer_norm(t.input(Array({2}, {0, 2})), t.input(Array({2}, 3.0f)),
                                    t.input(Array({2}, 1.0f))));
    CHECK(std::abs(y3[0] - -2.0f) < 1e-3);
    CHECK(std::abs(y3[1] - 4.0f) < 1e-3);
}

TEST_CASE("layer_norm: random case against the closed form") {
    Rng rng(31);
    Array x = random_array({8}, rng, 2.0f), g = random_array({8}, rng), b = random_array({8}, rng);
    Tape t;
    Array y = t.value(t.layer_norm(t.input(x), t.input(g), t.input(b)));
    oracle::Vec ref = oracle::layer_norm(oracle::to_vec(x), oracle::to_vec(g), oracle::to_vec(b));
    for (size_t i = 0; i < 8; ++i) CHECK(std::abs(y[i] - ref[i]) < 1e-5);
}

TEST_CASE("softmax: pinned cases, normalization, permutation equivariance") {
    Tape t;
    Array u = t.value(t.softmax(t.input(Array({3}))));
    for (size_t i = 0; i < 3; ++i) CHECK(std::abs(u[i] - 1.0f / 3.0f) < 1e-6);

    Array s = t.value(t.softmax(t.input(Array({2}, {1000, 0}))));
    CHECK(s[0] > 0.999f);
    CHECK(s[1] < 1e-6f);

    Array w = t.value(t.softmax(t.input(Array({2}, {std::log(2.0f), 0.0f}))));
    CHECK(std::abs(w[0] - 2.0f / 3.0f) < 1e-6);
    CHECK(std::abs(w[1] - 1.0f / 3.0f) < 1e-6);

    Rng rng(41);
    Array v = random_array({5}, rng, 3.0f);
    Array p = t.value(t.softmax(t.input(v)));
    double total = 0.0;
    for (size_t i = 0; i < 5; ++i) total += p[i];
    CHECK(std::abs(total - 1.0) < 1e-6);
    // rotate the input; the output must rotate identically
    Array vr({5});
    for (size_t i = 0; i < 5; ++i) vr[i] = v[(i + 1) % 5];
    Array pr = t.value(t.softmax(t.input(vr)));
    for (size_t i = 0; i < 5; ++i) CHECK(pr[i] == p[(i + 1) % 5]);
}

TEST_CASE("log_sigmoid helpers: pinned values in double precision") {
    CHECK(std::exp(log_sigmoid(0.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(std::exp(log_sigmoid(std::log(3.0))) - 0.75) < 1e-9);
    double tiny = std::exp(log_sigmoid(-50.0));
    CHECK(tiny < 1e-20);
    CHECK(tiny > 0.0);
    CHECK(std::isfinite(log_one_minus_sigmoid(50.0)));
    // complementary probabilities
    for (double z : {-3.0, -0.5, 0.0, 1.7, 9.0})
        CHECK(std::exp(log_sigmoid(z)) + std::exp(log_one_minus_sigmoid(z)) ==
              doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_softmax helper: normalized and stable") {
    std::vector<double> lp = log_softmax({0.0f, 0.0f, 0.0f});
    for (double v : lp) CHECK(std::abs(std::exp(v) - 1.0 / 3.0) < 1e-9);
    std::vector<double> big = log_softmax({1000.0f, 0.0f});
    CHECK(std::exp(big[0]) > 0.999);
    CHECK(std::isfinite(big[1]));
}

TEST_CASE("backward: sum gives unit gradients") {
    Tape t;
    ParamStore ps;
    Rng rng(51);
    ps.create("x", random_array({3}, rng));
    nd::GradMap g = t.backward(t.sum(t.param(ps, "x")));
    for (size_t i = 0; i < 3; ++i) CHECK(g.at("x")[i] == 1.0f);
}

TEST_CASE("backward: sigmoid(w.x) at w=0 gives 0.25*x") {
    Tape t;
    ParamStore ps;
    ps.create("w", Array({3}));
    Array x({3}, {0.5f, -1.0f, 2.0f});
    nd::GradMap g = t.backward(t.sigmoid(t.dot(t.param(ps, "w"), t.input(x))));
    for (size_t i = 0; i < 3; ++i) CHECK(std::abs(g.at("w")[i] - 0.25f * x[i]) < 1e-6);
}

namespace {

// Finite-difference sweep for a loss built from a ParamStore by `build`.
void check_gradients(ParamStore& ps, const std::function<Var(Tape&, ParamStore&)>& build) {
    Tape t;
    nd::GradMap analytic = t.backward(build(t, ps));
    oracle::FdReport rep = oracle::fd_check(
        ps, analytic,
        [&] {
            Tape ft;
            return static_cast<double>(ft.scalar(build(ft, ps)));
        },
        1e-2, 5e-2);
    INFO("worst: " << rep.worst_param << "[" << rep.worst_index << "] analytic "
                   << rep.worst_analytic << " fd " << rep.worst_fd);
    CHECK(rep.max_rel <= 1e-3);
}

}  // namespace

TEST_CASE("backward: per-op finite differences on random small cases") {
    Rng rng(61);

    SUBCASE("linear + tanh + dot") {
        ParamStore ps;
        ps.create("w", random_array({4, 3}, rng));
        ps.create("b", random_array({4}, rng));
        ps.create("v", random_array({4}, rng));
        Array x = random_array({3}, rng);
        check_gradients(ps, [x](Tape& t, ParamStore& s) {
            return t.dot(t.param(s, "v"),
                         t.tanh_act(t.linear(t.param(s, "w"), t.input(x), t.param(s, "b"))));
        });
    }

    SUBCASE("layer_norm") {
        ParamStore ps;
        ps.create("x", random_array({6}, rng, 2.0f));
        ps.create("g", random_array({6}, rng));
        ps.create("b", random_array({6}, rng));
        check_gradients(ps, [](Tape& t, ParamStore& s) {
            return t.sum(t.layer_norm(t.param(s, "x"), t.param(s, "g"), t.param(s, "b")));
        });
    }

    SUBCASE("cross_entropy over affine_rows scores") {
        ParamStore ps;
        ps.create("w", random_array({3, 4}, rng));
        ps.create("b", random_array({3}, rng));
        ps.create("q", random_array({3}, rng));
        Array m = random_array({5, 4}, rng);
        check_gradients(ps, [m](Tape& t, ParamStore& s) {
            Var rows = t.affine_rows(t.param(s, "w"), t.input(m), t.param(s, "b"));
            return t.cross_entropy(t.matvec(rows, t.param(s, "q")), 2);
        });
    }

    SUBCASE("bce_logit both labels") {
        ParamStore ps;
        ps.create("w", random_array({4}, rng));
        Array x = random_array({4}, rng);
        check_gradients(ps, [x](Tape& t, ParamStore& s) {
            Var z = t.dot(t.param(s, "w"), t.input(x));
            return t.add(t.bce_logit(z, 1), t.bce_logit(t.scale(z, 0.7f), 0));
        });
    }

    SUBCASE("gru_cell chain of two steps") {
        ParamStore ps;
        const int in = 3, d = 4;
        ps.create("wu", random_array({d, in}, rng));
        ps.create("uu", random_array({d, d}, rng));
        ps.create("bu", random_array({d}, rng));
        ps.create("wr", random_array({d, in}, rng));
        ps.create("ur", random_array({d, d}, rng));
        ps.create("br", random_array({d}, rng));
        ps.create("wc", random_array({d, in}, rng));
        ps.create("uc", random_array({d, d}, rng));
        ps.create("bc", random_array({d}, rng));
        Array x0 = random_array({in}, rng), x1 = random_array({in}, rng);
        check_gradients(ps, [x0, x1, d](Tape& t, ParamStore& s) {
            nd::GruVars g{t.param(s, "wu"), t.param(s, "uu"), t.param(s, "bu"),
                          t.param(s, "wr"), t.param(s, "ur"), t.param(s, "br"),
                          t.param(s, "wc"), t.param(s, "uc"), t.param(s, "bc")};
            Var h = nd::gru_cell(t, g, t.input(x0), t.input(Array({d})));
            return t.sum(nd::gru_cell(t, g, t.input(x1), h));
        });
    }

    SUBCASE("concat, mul, scale_by, add_scaled") {
        ParamStore ps;
        ps.create("a", random_array({3}, rng));
        ps.create("b", random_array({2}, rng));
        ps.create("s", random_array({1}, rng));
        check_gradients(ps, [](Tape& t, ParamStore& s) {
            Var cat = t.concat(t.param(s, "a"), t.param(s, "b"));
            Var scaled = t.scale_by(cat, t.sigmoid(t.param(s, "s")));
            Var m = t.mul(scaled, cat);
            return t.add_scaled(t.sum(m), 0.3f, t.dot(cat, cat), 0.7f);
        });
    }
}

TEST_CASE("adam: zero gradients leave parameters bitwise unchanged") {
    ParamStore ps;
    Rng rng(71);
    ps.create("w", random_array({5}, rng));
    std::vector<float> before = ps.at("w").raw();
    for (int i = 0; i < 10; ++i) ps.adam_step(ps.zero_grads(), 0.1f);
    CHECK(ps.at("w").raw() == before);
}

TEST_CASE("adam: constant gradient drives the parameter against its sign") {
    ParamStore ps;
    ps.create("w", Array({2}, {1.0f, -1.0f}));
    nd::GradMap g = ps.zero_grads();
    g.at("w")[0] = 0.5f;   // positive grad: parameter must fall
    g.at("w")[1] = -0.5f;  // negative grad: parameter must rise
    float prev0 = 1.0f, prev1 = -1.0f;
    for (int i = 0; i < 50; ++i) {
        ps.adam_step(g, 1e-2f);
        CHECK(ps.at("w")[0] < prev0);
        CHECK(ps.at("w")[1] > prev1);
        prev0 = ps.at("w")[0];
        prev1 = ps.at("w")[1];
    }
}

TEST_CASE("adam: bias-corrected first step has magnitude ~ lr") {
    // m_hat = g, v_hat = g^2, so step one moves by lr * g / (|g| + eps) ~ lr.
    ParamStore ps;
    ps.create("w", Array({1}, {0.25f}));
    nd::GradMap g = ps.zero_grads();
    g.at("w")[0] = 0.5f;
    ps.adam_step(g, 1e-3f);
    CHECK(std::abs((0.25f - ps.at("w")[0]) - 1e-3f) < 1e-6f);
}

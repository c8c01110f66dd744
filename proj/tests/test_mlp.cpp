#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "micon/errors.hpp"
#include "micon/gradcheck.hpp"
#include "micon/mlp.hpp"
#include "micon/rng.hpp"

using namespace micon::math;

TEST_CASE("identity affine layer passes input through") {
    Mlp net("id", {{LayerKind::affine, 2, 2}});
    auto& l = net.layers()[0];
    l.w = {1, 0, 0, 1};
    l.b = {0, 0};
    Matrix x(1, 2);
    x.data = {1, 2};
    Matrix y = net.forward(x, Mode::infer);
    CHECK(y(0, 0) == 1);
    CHECK(y(0, 1) == 2);
}

TEST_CASE("relu and leaky_relu definitions") {
    Mlp relu_net("r", {{LayerKind::affine, 3, 3}, {LayerKind::relu}});
    auto& rl = relu_net.layers()[0];
    rl.w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Matrix x(1, 3);
    x.data = {-1, 0, 3};
    Matrix y = relu_net.forward(x, Mode::infer);
    CHECK(y(0, 0) == 0);
    CHECK(y(0, 1) == 0);
    CHECK(y(0, 2) == 3);

    Mlp leaky_net("l", {{LayerKind::affine, 2, 2}, {LayerKind::leaky_relu}});
    auto& ll = leaky_net.layers()[0];
    ll.w = {1, 0, 0, 1};
    Matrix x2(1, 2);
    x2.data = {-2, 4};
    Matrix y2 = leaky_net.forward(x2, Mode::infer);
    CHECK(y2(0, 0) == doctest::Approx(-0.02));
    CHECK(y2(0, 1) == 4);
}

TEST_CASE("dimension mismatch names the layer") {
    Mlp net("net", {{LayerKind::affine, 4, 3}});
    Matrix x(1, 5);
    try {
        net.forward(x, Mode::infer);
        FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }
}

TEST_CASE("batch norm: train normalizes the batch, infer uses running stats") {
    Mlp net("bn", {{LayerKind::affine, 2, 2}, {LayerKind::batch_norm}});
    auto& aff = net.layers()[0];
    aff.w = {1, 0, 0, 1};
    Matrix x(4, 2);
    x.data = {1, 10, 2, 20, 3, 30, 4, 40};
    Matrix y = net.forward(x, Mode::train);
    for (size_t j = 0; j < 2; ++j) {
        double mean = 0, var = 0;
        for (size_t i = 0; i < 4; ++i) mean += y(i, j);
        mean /= 4;
        for (size_t i = 0; i < 4; ++i) var += (y(i, j) - mean) * (y(i, j) - mean);
        var /= 4;
        CHECK(std::abs(mean) < 1e-12);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps in denominator shrinks it slightly
    }
    auto& bn = net.layers()[1];
    // EMA with momentum 0.1 from (0, 1): mean 0.9*0 + 0.1*batch_mean, var uses the n-1 estimate
    CHECK(bn.running_mean[0] == doctest::Approx(0.1 * 2.5));
    CHECK(bn.running_var[0] == doctest::Approx(0.9 * 1.0 + 0.1 * (5.0 / 3.0)));

    // infer mode must use running stats, not batch stats
    Matrix one(1, 2);
    one.data = {2.5, 25.0};
    Matrix yi = net.forward(one, Mode::infer);
    const double expect0 = (2.5 - 0.25) / std::sqrt(0.9 + 0.1 * (5.0 / 3.0) + 1e-5);
    CHECK(yi(0, 0) == doctest::Approx(expect0));
}

TEST_CASE("batch norm in train mode rejects batches smaller than 2") {
    Mlp net("bn1", {{LayerKind::affine, 2, 2}, {LayerKind::batch_norm}});
    Matrix x(1, 2);
    x.data = {1, 2};
    CHECK_THROWS_AS(net.forward(x, Mode::train), micon::TrainError);
}

TEST_CASE("backward gradients match central differences for every layer kind") {
    SplitRng rng(99);
    Mlp net("gc", {{LayerKind::affine, 5, 7},
                   {LayerKind::batch_norm},
                   {LayerKind::leaky_relu},
                   {LayerKind::affine, 7, 4},
                   {LayerKind::relu},
                   {LayerKind::affine, 4, 3}});
    net.init(rng);
    Matrix x(6, 5);
    for (auto& v : x.data) v = rng.gaussian();

    // scalar loss: 0.5 * sum(y^2), so dL/dy = y
    // BN running stats are saved/restored so repeated forwards see identical state.
    auto run = [&](bool with_grad) {
        auto saved = net.layers();
        if (with_grad) net.zero_grad();
        Matrix y = net.forward(x, Mode::train);
        double loss = 0.0;
        for (double v : y.data) loss += 0.5 * v * v;
        if (with_grad) net.backward(y);
        for (size_t li = 0; li < net.layers().size(); ++li) {
            net.layers()[li].running_mean = saved[li].running_mean;
            net.layers()[li].running_var = saved[li].running_var;
        }
        return loss;
    };
    const double rel = grad_check(run, net.params(), 1e-5);
    CHECK(rel < 1e-6);
}

TEST_CASE("backward returns the input gradient") {
    SplitRng rng(100);
    Mlp net("din", {{LayerKind::affine, 3, 4}, {LayerKind::relu}, {LayerKind::affine, 4, 2}});
    net.init(rng);
    Matrix x(2, 3);
    for (auto& v : x.data) v = rng.gaussian();

    net.zero_grad();
    Matrix y = net.forward(x, Mode::train);
    Matrix dx = net.backward(y);
    REQUIRE(dx.rows == 2);
    REQUIRE(dx.cols == 3);

    const double h = 1e-5;
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x.data[i];
        x.data[i] = orig + h;
        Matrix yp = net.forward(x, Mode::train);
        double fp = 0;
        for (double v : yp.data) fp += 0.5 * v * v;
        x.data[i] = orig - h;
        Matrix ym = net.forward(x, Mode::train);
        double fm = 0;
        for (double v : ym.data) fm += 0.5 * v * v;
        x.data[i] = orig;
        const double numeric = (fp - fm) / (2 * h);
        CHECK(dx.data[i] == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("mlp_spec builds the conventional stack") {
    auto spec = mlp_spec(8, {16, 16}, 4, LayerKind::relu, true);
    REQUIRE(spec.size() == 7);
    CHECK(spec[0].kind == LayerKind::affine);
    CHECK(spec[1].kind == LayerKind::batch_norm);
    CHECK(spec[2].kind == LayerKind::relu);
    CHECK(spec[6].kind == LayerKind::affine);
    CHECK(spec[6].out == 4);
    Mlp net("m", spec);
    CHECK(net.in_dim() == 8);
    CHECK(net.out_dim() == 4);
}

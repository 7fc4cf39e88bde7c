#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "peco/errors.hpp"
#include "peco/gradcheck.hpp"
#include "peco/nn.hpp"
#include "peco/rng.hpp"

using namespace peco;
using nn::Activation;
using nn::LayerSpec;
using nn::Network;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

// standalone single-cell LSTM evaluation used as the test-side oracle
struct CellOut {
    double h, c;
};
CellOut lstm_cell(double x, double h_prev, double c_prev, double wx[4], double wh[4],
                  double b[4]) {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double i = sig(wx[0] * x + wh[0] * h_prev + b[0]);
    const double f = sig(wx[1] * x + wh[1] * h_prev + b[1]);
    const double g = std::tanh(wx[2] * x + wh[2] * h_prev + b[2]);
    const double o = sig(wx[3] * x + wh[3] * h_prev + b[3]);
    const double c = f * c_prev + i * g;
    return {o * std::tanh(c), c};
}

} // namespace

TEST_CASE("dense identity weights pass input through") {
    Network net({LayerSpec::Dense(3, 3)});
    auto p = net.params_mutable();
    // W = I, b = 0
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t o = 0; o < 3; ++o) p[i * 3 + o] = (i == o) ? 1.0 : 0.0;
    const Tensor x({2, 3}, {0.5, -1.0, 2.0, 0.0, 3.0, -0.25});
    const Tensor y = net.forward(x);
    CHECK(y.data == x.data);
}

TEST_CASE("conv1d identity kernel shifts out window centers") {
    Network net({LayerSpec::Conv1d(1, 1, 3)});
    auto p = net.params_mutable();
    p[0] = 0.0;
    p[1] = 1.0;
    p[2] = 0.0;
    p[3] = 0.0; // bias
    const Tensor x({1, 1, 5}, {1.0, 2.0, 3.0, 4.0, 5.0});
    const Tensor y = net.forward(x);
    CHECK(y.shape == std::vector<std::size_t>{1, 1, 3});
    CHECK(y.data == std::vector<double>{2.0, 3.0, 4.0});
}

TEST_CASE("lstm forward matches the hand-evaluated cell equations") {
    Network net({LayerSpec::Lstm(1, 1)});
    auto p = net.params_mutable();
    // layout: Wx (4x1), Wh (4x1), b (4), gate order [i f g o]
    double wx[4] = {0.3, -0.2, 0.5, 0.1};
    double wh[4] = {0.4, 0.6, -0.3, 0.2};
    double b[4] = {0.05, 1.0, -0.1, 0.0};
    for (int i = 0; i < 4; ++i) {
        p[i] = wx[i];
        p[4 + i] = wh[i];
        p[8 + i] = b[i];
    }
    const Tensor x({1, 1, 3}, {0.7, -0.4, 0.2});
    const Tensor y = net.forward(x);

    CellOut s1 = lstm_cell(0.7, 0.0, 0.0, wx, wh, b);
    CellOut s2 = lstm_cell(-0.4, s1.h, s1.c, wx, wh, b);
    CellOut s3 = lstm_cell(0.2, s2.h, s2.c, wx, wh, b);
    CHECK(y.at(0, 0) == doctest::Approx(s3.h).epsilon(1e-12));
}

TEST_CASE("lstm with zero weights and saturating forget bias keeps the cell state") {
    Network net({LayerSpec::Lstm(1, 2)});
    auto p = net.params_mutable();
    std::fill(p.begin(), p.end(), 0.0);
    // bias block starts after Wx (4H x 1) and Wh (4H x 2): 8 + 16 = 24
    const std::size_t bias0 = 4 * 2 * 1 + 4 * 2 * 2;
    p[bias0 + 2] = 50.0; // forget gate rows saturate at 1
    p[bias0 + 3] = 50.0;
    nn::ForwardCache cache;
    const Tensor x = Tensor::zeros({1, 1, 4});
    const Tensor y = net.forward(x, &cache);
    // cell state stays zero through all steps, hidden output is zero
    for (double c : cache.layers[0].cells) CHECK(c == 0.0);
    for (double h : y.data) CHECK(h == 0.0);
}

TEST_CASE("backward of zero output grad is zero; gradient is linear in output grad") {
    Network net({LayerSpec::Dense(4, 5), LayerSpec::Act(Activation::tanh), LayerSpec::Dense(5, 2)});
    net.init_params(77);
    const Tensor x = random_tensor({3, 4}, 5);
    nn::ForwardCache cache;
    const Tensor y = net.forward(x, &cache);

    const auto zero = net.backward(cache, Tensor::zeros(y.shape));
    for (double g : zero) CHECK(g == 0.0);

    Tensor dy = random_tensor(y.shape, 6);
    const auto g1 = net.backward(cache, dy);
    for (double& v : dy.data) v *= 3.5;
    const auto g2 = net.backward(cache, dy);
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g2[i] == doctest::Approx(3.5 * g1[i]).epsilon(1e-12));
}

TEST_CASE("gradient check passes for every layer kind") {
    SUBCASE("dense") {
        Network net({LayerSpec::Dense(5, 4), LayerSpec::Act(Activation::sigmoid),
                     LayerSpec::Dense(4, 2)});
        net.init_params(11);
        CHECK(nn::gradient_check(net, random_tensor({3, 5}, 21), 1e-4).pass);
    }
    SUBCASE("conv1d") {
        Network net({LayerSpec::Conv1d(2, 4, 3), LayerSpec::Act(Activation::tanh),
                     LayerSpec::Conv1d(4, 2, 2)});
        net.init_params(12);
        CHECK(nn::gradient_check(net, random_tensor({2, 2, 8}, 22), 1e-4).pass);
    }
    SUBCASE("lstm") {
        Network net({LayerSpec::Lstm(2, 4)});
        net.init_params(13);
        CHECK(nn::gradient_check(net, random_tensor({3, 2, 6}, 23), 1e-4).pass);
    }
    SUBCASE("conv1d+lstm+dense stack") {
        Network net({LayerSpec::Conv1d(3, 4, 3), LayerSpec::Act(Activation::relu),
                     LayerSpec::Lstm(4, 5), LayerSpec::Dense(5, 6)});
        net.init_params(14);
        CHECK(nn::gradient_check(net, random_tensor({2, 3, 9}, 24), 1e-4).pass);
    }
}

TEST_CASE("a corrupted analytic gradient is detected") {
    Network net({LayerSpec::Dense(3, 3), LayerSpec::Act(Activation::tanh), LayerSpec::Dense(3, 1)});
    net.init_params(31);
    const Tensor x = random_tensor({2, 3}, 32);

    nn::ForwardCache cache;
    const Tensor y = net.forward(x, &cache);
    auto grad = net.backward(cache, y);
    // negate the largest component and compare against finite differences
    std::size_t worst = 0;
    for (std::size_t i = 1; i < grad.size(); ++i)
        if (std::abs(grad[i]) > std::abs(grad[worst])) worst = i;
    grad[worst] = -grad[worst];

    Network probe = net;
    auto params = probe.params_mutable();
    const double h = 1e-5;
    const double saved = params[worst];
    auto loss = [&](double v) {
        params[worst] = v;
        const Tensor out = probe.forward(x);
        double s = 0.0;
        for (double o : out.data) s += o * o;
        return 0.5 * s;
    };
    const double numeric = (loss(saved + h) - loss(saved - h)) / (2 * h);
    params[worst] = saved;
    const double rel =
        std::abs(grad[worst] - numeric) / std::max(std::abs(grad[worst]) + std::abs(numeric), 1e-6);
    CHECK(rel > 1e-4);
}

TEST_CASE("adam with zero gradient leaves fresh parameters unchanged") {
    Network net({LayerSpec::Dense(2, 2)});
    net.init_params(41);
    const std::vector<double> before(net.params().begin(), net.params().end());
    net.adam_step(std::vector<double>(net.param_count(), 0.0));
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(net.params()[i] == before[i]);
}

TEST_CASE("adam single step matches the scalar recurrence") {
    Network net({LayerSpec::Dense(1, 1, /*bias=*/false)});
    auto p = net.params_mutable();
    p[0] = 0.8;
    const double g = 0.3, lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    net.adam_step(std::vector<double>{g}, {lr, b1, b2, eps});
    // t=1: m=(1-b1)g, v=(1-b2)g^2, mhat=g, vhat=g^2
    const double expected = 0.8 - lr * g / (std::sqrt(g * g) + eps);
    CHECK(net.params()[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adam is deterministic across identical runs") {
    auto run = [] {
        Network net({LayerSpec::Dense(3, 2), LayerSpec::Act(Activation::relu),
                     LayerSpec::Dense(2, 1)});
        net.init_params(55);
        const Tensor x = random_tensor({4, 3}, 56);
        for (int i = 0; i < 25; ++i) {
            nn::ForwardCache cache;
            const Tensor y = net.forward(x, &cache);
            net.adam_step(net.backward(cache, y));
        }
        return std::vector<double>(net.params().begin(), net.params().end());
    };
    CHECK(run() == run());
}

TEST_CASE("forward rejects mismatched shapes") {
    Network net({LayerSpec::Dense(3, 2)});
    net.init_params(1);
    CHECK_THROWS_AS(net.forward(Tensor::zeros({2, 4})), ShapeError);
    CHECK_THROWS_AS(net.forward(Tensor::zeros({2, 3, 1})), ShapeError);
}

TEST_CASE("backward rejects a stale cache") {
    Network net({LayerSpec::Dense(2, 2)});
    net.init_params(3);
    nn::ForwardCache cache;
    const Tensor y = net.forward(Tensor::zeros({1, 2}), &cache);
    net.adam_step(std::vector<double>(net.param_count(), 0.1));
    CHECK_THROWS_AS(net.backward(cache, y), StateError);
}

TEST_CASE("layer chaining is validated at construction") {
    CHECK_THROWS_AS(Network({LayerSpec::Dense(3, 4), LayerSpec::Dense(5, 2)}), ShapeError);
    CHECK_THROWS_AS(Network({LayerSpec::Dense(3, 4), LayerSpec::Lstm(4, 2)}), ShapeError);
    CHECK_THROWS_AS(Network({LayerSpec::Lstm(3, 4), LayerSpec::Conv1d(4, 2, 2)}), ShapeError);
    CHECK_NOTHROW(Network({LayerSpec::Conv1d(3, 4, 2), LayerSpec::Lstm(4, 8),
                           LayerSpec::Dense(8, 2)}));
}

TEST_CASE("checkpoint round-trips parameters exactly and rejects mismatches") {
    const auto path = std::filesystem::temp_directory_path() / "peco_nn_ckpt.json";
    Network net({LayerSpec::Conv1d(2, 3, 3), LayerSpec::Act(Activation::relu),
                 LayerSpec::Lstm(3, 4), LayerSpec::Dense(4, 5)});
    net.init_params(71);
    nn::save_network(net, path);
    const Network loaded = nn::load_network(path);
    CHECK(loaded.same_architecture(net));
    CHECK(std::vector<double>(loaded.params().begin(), loaded.params().end()) ==
          std::vector<double>(net.params().begin(), net.params().end()));

    // tamper with the parameter count
    std::string text = nn::network_to_json(net);
    const auto pos = text.find("\"params\":[");
    REQUIRE(pos != std::string::npos);
    text.insert(pos + 10, "0.25,");
    CHECK_THROWS_AS(nn::network_from_json(text), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("soft blend is the convex combination") {
    Network a({LayerSpec::Dense(1, 1, false)});
    Network b({LayerSpec::Dense(1, 1, false)});
    a.params_mutable()[0] = 4.0;
    b.params_mutable()[0] = 2.0;
    b.blend_from(a, 0.25);
    CHECK(b.params()[0] == doctest::Approx(2.5).epsilon(1e-15));
    b.params_mutable()[0] = 2.0;
    b.blend_from(a, 1.0);
    CHECK(b.params()[0] == 4.0);
    b.params_mutable()[0] = 2.0;
    b.blend_from(a, 0.0);
    CHECK(b.params()[0] == 2.0);
}

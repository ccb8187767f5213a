#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "groupinv/errors.hpp"
#include "groupinv/model.hpp"
#include "groupinv/rng.hpp"
#include "groupinv/tape.hpp"
#include "util.hpp"

using namespace groupinv;
using testutil::rand_matrix;

namespace {

ModelSpec small_spec() {
    ModelSpec spec;
    spec.input_dim = 4;
    spec.hidden = {6, 5};
    spec.latent_dim = 3;
    return spec;
}

}  // namespace

TEST_CASE("model spec validation") {
    ModelSpec spec = small_spec();
    CHECK_NOTHROW(spec.validate());
    spec.input_dim = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.latent_dim = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.hidden = {8, 0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    const ModelSpec defaults{.input_dim = 4};
    CHECK(defaults.hidden == std::vector<int>{64, 64});
    CHECK(defaults.latent_dim == 8);
}

TEST_CASE("initialisation is Glorot-bounded with zero biases") {
    Rng rng(77);
    const Model model = init_model(small_spec(), rng);
    REQUIRE(model.phi.weights.size() == 3);  // 4->6->5->3
    const int dims[] = {4, 6, 5, 3};
    for (size_t l = 0; l < 3; ++l) {
        const Matrix& w = model.phi.weights[l];
        CHECK(w.rows == dims[l]);
        CHECK(w.cols == dims[l + 1]);
        const double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
        double max_abs = 0.0;
        for (double v : w.data) {
            CHECK(std::abs(v) <= bound);
            max_abs = std::max(max_abs, std::abs(v));
        }
        // The draw is uniform over (-bound, bound); seeing only the inner
        // half across a whole layer would be astronomically unlikely.
        CHECK(max_abs > 0.5 * bound);
        for (double b : model.phi.biases[l].data) CHECK(b == 0.0);
    }
    CHECK(model.psi.weight.rows == 3);
    CHECK(model.psi.weight.cols == 1);
    for (double b : model.psi.bias.data) CHECK(b == 0.0);
}

TEST_CASE("initialisation is deterministic per seed") {
    Rng a(5), b(5), c(6);
    const Model ma = init_model(small_spec(), a);
    const Model mb = init_model(small_spec(), b);
    const Model mc = init_model(small_spec(), c);
    CHECK(ma.phi.weights[0] == mb.phi.weights[0]);
    CHECK(ma.psi.weight == mb.psi.weight);
    CHECK(ma.phi.weights[0] != mc.phi.weights[0]);
}

TEST_CASE("extractor forward has the right shape and range") {
    Rng rng(78);
    const Model model = init_model(small_spec(), rng);
    Rng data_rng(79);
    const Matrix x = rand_matrix(data_rng, 10, 4, -3.0, 3.0);
    const Matrix z = model.phi.forward(x);
    REQUIRE(z.rows == 10);
    REQUIRE(z.cols == 3);
    for (double v : z.data) {
        CHECK(v > 0.0);  // sigmoid squashing keeps latents strictly inside (0,1)
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(model.phi.forward(Matrix(10, 5)), ShapeError);
}

TEST_CASE("tape forward and plain forward agree bit for bit") {
    Rng rng(80);
    const Model model = init_model(small_spec(), rng);
    Rng data_rng(81);
    const Matrix x = rand_matrix(data_rng, 7, 4, -2.0, 2.0);

    Tape tape;
    const TapeValue z_t = model.phi.forward(tape, tape.constant(x));
    const Matrix z_tape = tape.value(z_t);
    const Matrix z_plain = model.phi.forward(x);
    CHECK(z_tape == z_plain);

    const TapeValue logit_t = model.psi.logit(tape, z_t);
    CHECK(tape.value(logit_t) == model.psi.logit(z_plain));
}

TEST_CASE("classifier head is an exact affine map") {
    Model model;
    model.psi.weight = Matrix(3, 1, {0.5, -1.0, 2.0});
    model.psi.bias = Matrix(1, 1, {0.25});
    const Matrix z(2, 3, {1.0, 2.0, 3.0, 0.0, 1.0, -1.0});
    const Matrix logits = model.psi.logit(z);
    REQUIRE(logits.rows == 2);
    REQUIRE(logits.cols == 1);
    CHECK(logits.at(0, 0) == doctest::Approx(0.5 - 2.0 + 6.0 + 0.25).epsilon(1e-15));
    CHECK(logits.at(1, 0) == doctest::Approx(-1.0 - 2.0 + 0.25).epsilon(1e-15));
}

TEST_CASE("parameter enumeration order is extractor layers then head") {
    Rng rng(82);
    Model model = init_model(small_spec(), rng);
    const std::vector<Matrix*> params = model.params();
    REQUIRE(params.size() == 8);  // 3 weights + 3 biases + head weight + head bias
    CHECK(params[0] == &model.phi.weights[0]);
    CHECK(params[1] == &model.phi.biases[0]);
    CHECK(params[4] == &model.phi.weights[2]);
    CHECK(params[6] == &model.psi.weight);
    CHECK(params[7] == &model.psi.bias);

    // Mutation through params() must feed the forward pass.
    Rng data_rng(83);
    const Matrix x = rand_matrix(data_rng, 3, 4);
    const Matrix before = model.phi.forward(x);
    params[0]->at(0, 0) += 0.5;
    CHECK(model.phi.forward(x) != before);
}

TEST_CASE("checkpoints round-trip every parameter bit for bit") {
    Rng rng(84);
    const Model model = init_model(small_spec(), rng);
    const testutil::TempDir tmp("groupinv-ckpt");
    const std::string jpath = tmp.sub("checkpoint.json");
    const std::string bpath = tmp.sub("checkpoint.bin");
    save_checkpoint(model, jpath, bpath);

    const Model back = load_checkpoint(jpath, bpath);
    const auto orig_params = model.params();
    const auto back_params = back.params();
    REQUIRE(orig_params.size() == back_params.size());
    for (size_t i = 0; i < orig_params.size(); ++i) {
        CHECK(*orig_params[i] == *back_params[i]);
    }
    Rng data_rng(85);
    const Matrix x = rand_matrix(data_rng, 5, 4);
    CHECK(model.phi.forward(x) == back.phi.forward(x));

    // Saving twice produces identical files (nothing depends on wall time).
    const std::string j2 = tmp.sub("again.json");
    const std::string b2 = tmp.sub("again.bin");
    save_checkpoint(model, j2, b2);
    CHECK(testutil::read_file(jpath) == testutil::read_file(j2));
    CHECK(testutil::read_file(bpath) == testutil::read_file(b2));
}

TEST_CASE("checkpoint loader rejects missing and corrupt artifacts") {
    Rng rng(86);
    const Model model = init_model(small_spec(), rng);
    const testutil::TempDir tmp("groupinv-ckpt-bad");
    const std::string jpath = tmp.sub("checkpoint.json");
    const std::string bpath = tmp.sub("checkpoint.bin");
    save_checkpoint(model, jpath, bpath);

    CHECK_THROWS_AS(load_checkpoint(tmp.sub("missing.json"), bpath), MissingArtifactError);
    CHECK_THROWS_AS(load_checkpoint(jpath, tmp.sub("missing.bin")), MissingArtifactError);

    const std::string broken = tmp.sub("broken.json");
    testutil::write_file(broken, "{not json");
    CHECK_THROWS_AS(load_checkpoint(broken, bpath), ParseError);

    const std::string stub = tmp.sub("stub.bin");
    testutil::write_file(stub, "abc");  // far too short for the tensor table
    CHECK_THROWS_AS(load_checkpoint(jpath, stub), ParseError);
}

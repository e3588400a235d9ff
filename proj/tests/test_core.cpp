#include <doctest.h>

#include "helpers.hpp"
#include "ssvm/model.hpp"

using namespace ssvm;

namespace {

KernelSpec linear() {
    KernelSpec s;
    s.kind = KernelKind::polynomial;
    s.gamma = GammaSetting::of(1.0);
    s.degree = 1;
    s.coef0 = 0.0;
    return s;
}

}  // namespace

TEST_CASE("decision_value reference cases") {
    Model empty;
    empty.kernel = linear();
    empty.bias = 0.5;
    CHECK(decision_value(empty, std::vector<double>{1.0}) == 0.5);

    Model one;
    one.kernel = linear();
    one.support_samples.emplace_back(std::vector<double>{0.5}, +1);
    one.coefficients = {1.0};
    one.bias = 0.0;
    // probe [1.0]: K = 0.5
    CHECK(decision_value(one, std::vector<double>{1.0}) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(decision_value(one, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("negating labels and bias flips the decision value") {
    Rng rng(3);
    Model m;
    m.kernel = KernelSpec{};  // rbf auto
    for (int i = 0; i < 6; ++i) {
        std::vector<double> f(3);
        for (auto& v : f) v = rng.gauss();
        m.support_samples.emplace_back(std::move(f), (i % 2) ? +1 : -1);
        m.coefficients.push_back(rng.uniform() * 2.0);
    }
    m.bias = 0.7;

    Model flipped = m;
    flipped.bias = -m.bias;
    for (auto& s : flipped.support_samples) s.label = -s.label;

    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.gauss();
        CHECK(decision_value(flipped, x) ==
              doctest::Approx(-decision_value(m, x)).epsilon(1e-12));
    }
}

TEST_CASE("predict sign rule") {
    Model m;
    m.kernel = linear();
    m.bias = 0.7;
    CHECK(predict(m, std::vector<double>{0.0}) == +1);
    m.bias = -0.7;
    CHECK(predict(m, std::vector<double>{0.0}) == -1);
    m.bias = 0.0;
    CHECK(predict(m, std::vector<double>{0.0}) == +1);  // exact zero goes positive
}

TEST_CASE("decision_value is linear in coefficients and bias") {
    Rng rng(9);
    Model m;
    m.kernel = KernelSpec{};
    for (int i = 0; i < 5; ++i) {
        std::vector<double> f(2);
        for (auto& v : f) v = rng.gauss();
        m.support_samples.emplace_back(std::move(f), (i % 2) ? +1 : -1);
        m.coefficients.push_back(rng.uniform());
    }
    m.bias = 0.3;
    Model doubled = m;
    for (auto& c : doubled.coefficients) c *= 2.0;
    doubled.bias *= 2.0;

    for (int rep = 0; rep < 8; ++rep) {
        std::vector<double> x(2);
        for (auto& v : x) v = rng.gauss();
        const double d = decision_value(m, x);
        CHECK(decision_value(doubled, x) == doctest::Approx(2.0 * d).epsilon(1e-12));
        CHECK(predict(doubled, x) == predict(m, x));  // prediction is scale-free
    }
}

TEST_CASE("convention conversion preserves the decision function") {
    Rng rng(21);
    Model m;
    m.kernel = KernelSpec{};
    for (int i = 0; i < 7; ++i) {
        std::vector<double> f(3);
        for (auto& v : f) v = rng.gauss();
        m.support_samples.emplace_back(std::move(f), (i % 3 == 0) ? -1 : +1);
        m.coefficients.push_back(rng.uniform() * 3.0);
    }
    m.bias = -0.2;
    m.convention = CoefConvention::unsigned_alpha;

    const Model s = m.to_convention(CoefConvention::signed_alpha);
    const Model back = s.to_convention(CoefConvention::unsigned_alpha);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.gauss();
        CHECK(decision_value(s, x) == doctest::Approx(decision_value(m, x)).epsilon(1e-12));
        CHECK(decision_value(back, x) == decision_value(m, x));
    }
}

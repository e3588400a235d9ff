#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ssvm/kernel.hpp"
#include "ssvm/rng.hpp"
#include "ssvm/types.hpp"

using namespace ssvm;

namespace {

KernelSpec rbf_auto() { return KernelSpec{}; }

KernelSpec rbf(double gamma) {
    KernelSpec s;
    s.gamma = GammaSetting::of(gamma);
    return s;
}

KernelSpec poly(double gamma, int degree, double coef0) {
    KernelSpec s;
    s.kind = KernelKind::polynomial;
    s.gamma = GammaSetting::of(gamma);
    s.degree = degree;
    s.coef0 = coef0;
    return s;
}

}  // namespace

TEST_CASE("resolve_gamma") {
    CHECK(resolve_gamma(GammaSetting::of(0.001), 360) == 0.001);
    CHECK(resolve_gamma(GammaSetting::automatic(), 4) == 0.25);
    CHECK(resolve_gamma(GammaSetting::automatic(), 1) == 1.0);
    CHECK_THROWS_AS(resolve_gamma(GammaSetting::of(0.0), 10), ConfigError);
    CHECK_THROWS_AS(resolve_gamma(GammaSetting::of(-1.0), 10), ConfigError);
}

TEST_CASE("eval_kernel on the reference pairs") {
    const std::vector<double> a{3, 7}, b{3, 7};
    CHECK(eval_kernel(rbf(1.0), a, b) == 1.0);

    const std::vector<double> o{0, 0}, e1{1, 0};
    CHECK(eval_kernel(rbf(1.0), o, e1) == doctest::Approx(0.36787944117144233).epsilon(1e-12));

    const std::vector<double> ones{1, 1};
    CHECK(eval_kernel(poly(1.0, 2, 1.0), ones, ones) == doctest::Approx(9.0).epsilon(1e-14));

    KernelSpec sig;
    sig.kind = KernelKind::sigmoid;
    sig.gamma = GammaSetting::of(1.0);
    sig.coef0 = 0.0;
    const std::vector<double> x{1, 0}, y{0, 1};
    CHECK(eval_kernel(sig, x, y) == 0.0);
}

TEST_CASE("eval_kernel error paths") {
    const std::vector<double> x{1, 2}, y{1, 2, 3};
    CHECK_THROWS_AS(eval_kernel(rbf(1.0), x, y), ShapeError);

    KernelSpec chi;
    chi.kind = KernelKind::chi_square;
    chi.gamma = GammaSetting::of(0.1);
    const std::vector<double> neg{-1, 2}, pos{1, 2};
    CHECK_THROWS_AS(eval_kernel(chi, neg, pos), DomainError);

    // 0/0 terms count as zero
    const std::vector<double> z1{0, 2}, z2{0, 2};
    CHECK(eval_kernel(chi, z1, z2) == 1.0);
}

TEST_CASE("symmetry and range properties") {
    Rng rng(42);
    KernelSpec chi;
    chi.kind = KernelKind::chi_square;
    chi.gamma = GammaSetting::of(0.5);
    KernelSpec sig;
    sig.kind = KernelKind::sigmoid;
    sig.gamma = GammaSetting::of(0.3);
    sig.coef0 = 0.1;
    const std::vector<KernelSpec> kinds{rbf(0.7), poly(0.5, 3, 1.0), sig, chi};

    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(5), y(5);
        for (auto& v : x) v = std::abs(rng.gauss());  // chi-square needs nonnegative
        for (auto& v : y) v = std::abs(rng.gauss());
        for (const KernelSpec& k : kinds)
            CHECK(eval_kernel(k, x, y) == eval_kernel(k, y, x));

        const double r = eval_kernel(rbf(0.7), x, y);
        CHECK(r > 0.0);
        CHECK(r <= 1.0);
        const double c = eval_kernel(chi, x, y);
        CHECK(c > 0.0);
        CHECK(c <= 1.0);
        if (x != y) CHECK(eval_kernel(rbf(0.7), x, y) < 1.0);
        CHECK(eval_kernel(rbf(0.7), x, x) == 1.0);
    }
}

TEST_CASE("gram matrix of random rbf points is positive semidefinite") {
    Rng rng(7);
    const int n = 8;
    std::vector<std::vector<double>> pts(n, std::vector<double>(3));
    for (auto& p : pts)
        for (auto& v : p) v = rng.gauss();
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = eval_kernel(rbf(0.9), pts[i], pts[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("kernel_row basics") {
    std::vector<Sample> set;
    CHECK(kernel_row(rbf(1.0), std::vector<double>{1.0}, set).empty());

    set.emplace_back(std::vector<double>{1.0, 2.0}, +1);
    const auto row = kernel_row(rbf(1.0), set[0].features, set);
    REQUIRE(row.size() == 1);
    CHECK(row[0] == 1.0);
}

TEST_CASE("cache transparency: cached rows match fresh evaluation bit for bit") {
    Rng rng(11);
    std::vector<Sample> set;
    for (int i = 0; i < 24; ++i) {
        std::vector<double> f(4);
        for (auto& v : f) v = rng.gauss();
        set.emplace_back(std::move(f), (i % 2) ? +1 : -1);
    }
    KernelCache cache(1 << 16);
    const KernelSpec spec = rbf_auto();

    Rng seq(5);
    for (int call = 0; call < 200; ++call) {
        const int i = static_cast<int>(seq.below(set.size()));
        const auto cached = kernel_row(spec, set[static_cast<std::size_t>(i)].features, set,
                                       &cache, i);
        const auto fresh = kernel_row(spec, set[static_cast<std::size_t>(i)].features, set);
        REQUIRE(cached.size() == fresh.size());
        for (std::size_t j = 0; j < fresh.size(); ++j) CHECK(cached[j] == fresh[j]);
        CHECK(cache.bytes() <= cache.capacity());
    }
    CHECK(cache.hits() > 0);
}

TEST_CASE("cache records hits on repeated rows and evicts under budget") {
    Rng rng(13);
    std::vector<Sample> set;
    for (int i = 0; i < 16; ++i) {
        std::vector<double> f(8);
        for (auto& v : f) v = rng.gauss();
        set.emplace_back(std::move(f), +1);
    }
    // room for only two full rows
    KernelCache cache(2 * 16 * sizeof(double));
    const KernelSpec spec = rbf(0.5);
    (void)cache.row(spec, set, 0, set.size());
    const auto before = cache.hits();
    (void)cache.row(spec, set, 0, set.size());
    CHECK(cache.hits() == before + 1);
    for (int i = 0; i < 16; ++i) (void)cache.row(spec, set, i, set.size());
    CHECK(cache.bytes() <= cache.capacity());
}

TEST_CASE("kernel spec text round trip") {
    for (const char* text : {"rbf?gamma=auto", "poly?gamma=1&degree=3&coef0=1",
                             "sigmoid?gamma=0.01&coef0=0", "chi2?gamma=0.1"}) {
        const KernelSpec spec = KernelSpec::parse(text);
        CHECK(KernelSpec::parse(spec.to_text()) == spec);
    }
    CHECK(KernelSpec::parse("rbf").gamma.is_auto);
    CHECK_THROWS_AS(KernelSpec::parse("linear?gamma=1"), ParseError);
    CHECK_THROWS_AS(KernelSpec::parse("rbf?gamma=-2"), ConfigError);
    CHECK_THROWS_AS(KernelSpec::parse("rbf?degree"), ParseError);
}

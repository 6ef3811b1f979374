#include "bomuse/errors.hpp"
#include "bomuse/kernels.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace bomuse;

namespace {

Vector v2(double a, double b) {
    Vector x(2);
    x << a, b;
    return x;
}

std::vector<KernelSpec> families() {
    return {KernelSpec::squared_exponential(0.7, 1.3), KernelSpec::linear(0.8), KernelSpec::polynomial(3, 0.5)};
}

}  // namespace

TEST_SUITE("kernels") {
    TEST_CASE("closed-form values") {
        const auto se = KernelSpec::squared_exponential(1.0, 1.0);
        CHECK(kernel_eval(se, v2(0.3, -0.7), v2(0.3, -0.7)) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(kernel_eval(se, v2(0, 0), v2(1, 0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
        const auto poly = KernelSpec::polynomial(2, 1.0);
        CHECK(kernel_eval(poly, v2(1, 0), v2(0, 1)) == doctest::Approx(1.0));
        CHECK(kernel_eval(poly, v2(1, 2), v2(3, 1)) == doctest::Approx(36.0));  // (1 + 5)^2
        const auto lin = KernelSpec::linear(2.0);
        CHECK(kernel_eval(lin, v2(1, 2), v2(3, 1)) == doctest::Approx(10.0));
    }

    TEST_CASE("SE uses the squared lengthscale") {
        const auto se = KernelSpec::squared_exponential(2.0, 1.0);
        CHECK(kernel_eval(se, v2(0, 0), v2(2, 0)) == doctest::Approx(std::exp(-0.5)));
    }

    TEST_CASE("dimension mismatch is an input error") {
        Vector x3 = Vector::Zero(3);
        CHECK_THROWS_AS(kernel_eval(KernelSpec::squared_exponential(1.0), v2(0, 0), x3), InputError);
        const auto mapped = KernelSpec::squared_exponential(1.0, 1.0, builtin_feature_map("matyas-2d"));
        CHECK_THROWS_AS(kernel_eval(mapped, x3, x3), InputError);
    }

    TEST_CASE("invalid hyperparameters are rejected") {
        CHECK_THROWS_AS(KernelSpec::squared_exponential(0.0).validate(), InputError);
        CHECK_THROWS_AS(KernelSpec::squared_exponential(1.0, -1.0).validate(), InputError);
        CHECK_THROWS_AS(KernelSpec::polynomial(0).validate(), InputError);
    }

    TEST_CASE("gram shapes and entries") {
        const auto se = KernelSpec::squared_exponential(1.0, 1.0);
        CHECK(gram(se, {}).rows() == 0);
        const Matrix one = gram(se, {v2(0.1, 0.2)});
        CHECK(one.rows() == 1);
        CHECK(one(0, 0) == doctest::Approx(1.0));
        const Matrix dup = gram(se, {v2(1, 1), v2(1, 1)});
        CHECK(dup(0, 1) == doctest::Approx(1.0));
        CHECK(dup.determinant() == doctest::Approx(0.0));

        std::vector<Vector> pts;
        for (double t : {0.0, 1.0, 2.0}) {
            Vector x(1);
            x << t;
            pts.push_back(x);
        }
        const Matrix K = gram(se, pts);
        CHECK(K(0, 1) == doctest::Approx(std::exp(-0.5)));
        CHECK(K(0, 2) == doctest::Approx(std::exp(-2.0)));
        CHECK(K(1, 2) == doctest::Approx(std::exp(-0.5)));
    }

    TEST_CASE("symmetry over random pairs for every family") {
        Rng rng(11);
        const Bounds box = Bounds::uniform(3, -2.0, 2.0);
        for (const auto& k : families()) {
            for (int i = 0; i < 1000; ++i) {
                const Vector a = rng.uniform_in(box);
                const Vector b = rng.uniform_in(box);
                CHECK(std::abs(kernel_eval(k, a, b) - kernel_eval(k, b, a)) <= 1e-12);
            }
        }
    }

    TEST_CASE("gram is PSD on 50 random points for every family") {
        Rng rng(12);
        const Bounds box = Bounds::uniform(3, -2.0, 2.0);
        for (const auto& k : families()) {
            std::vector<Vector> X;
            for (int i = 0; i < 50; ++i) X.push_back(rng.uniform_in(box));
            const Matrix K = gram(k, X);
            CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
            Eigen::SelfAdjointEigenSolver<Matrix> eig(K);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * K.trace());
            for (int i = 0; i < 50; ++i) {
                CHECK(K(i, i) == doctest::Approx(kernel_eval(k, X[i], X[i])));
            }
        }
    }

    TEST_CASE("feature-map consistency") {
        const auto map = builtin_feature_map("matyas-2d");
        Rng rng(13);
        const Bounds box = Bounds::uniform(2, -10.0, 10.0);
        const auto lin = KernelSpec::linear(1.0, map);
        const auto se_mapped = KernelSpec::squared_exponential(3.0, 1.0, map);
        const auto se_plain = KernelSpec::squared_exponential(3.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const Vector a = rng.uniform_in(box);
            const Vector b = rng.uniform_in(box);
            CHECK(kernel_eval(lin, a, b) == map->apply(a).dot(map->apply(b)));
            CHECK(kernel_eval(se_mapped, a, b) == kernel_eval(se_plain, map->apply(a), map->apply(b)));
        }
    }

    TEST_CASE("builtin feature maps have the listed sizes and components") {
        CHECK(builtin_feature_map("matyas-2d")->dim_out() == 3);
        CHECK(builtin_feature_map("ackley-4d")->dim_out() == 5);
        CHECK(builtin_feature_map("rastrigin-5d")->dim_out() == 10);
        CHECK(builtin_feature_map("levy-6d")->dim_out() == 7);
        CHECK_THROWS_AS(builtin_feature_map("nope"), InputError);

        const Vector m = builtin_feature_map("matyas-2d")->apply(v2(2.0, -3.0));
        CHECK(m[0] == 4.0);
        CHECK(m[1] == 9.0);
        CHECK(m[2] == -6.0);

        Vector x(4);
        x << 0.0, 1.0, 2.0, 2.0;
        const Vector a = builtin_feature_map("ackley-4d")->apply(x);
        CHECK(a[1] == doctest::Approx(std::cos(1.0)));
        CHECK(a[4] == doctest::Approx(3.0));

        Vector y = Vector::Constant(6, 0.5);
        const Vector l = builtin_feature_map("levy-6d")->apply(y);
        CHECK(l[0] == doctest::Approx(std::pow(std::sin(0.5), 2)));
        CHECK(l[6] == doctest::Approx(0.25 * std::pow(std::sin(0.5), 2)));
    }

    TEST_CASE("json round trip") {
        const auto k = KernelSpec::squared_exponential(0.3, 2.0, builtin_feature_map("ackley-4d"));
        const nlohmann::json j = k;
        CHECK(j.at("family") == "squared_exponential");
        CHECK(j.at("feature_map") == "ackley-4d");
        const KernelSpec back = j.get<KernelSpec>();
        CHECK(back == k);
        const auto p = nlohmann::json{{"family", "polynomial"}, {"degree", 3}}.get<KernelSpec>();
        CHECK(p.family == KernelFamily::Polynomial);
        CHECK(p.degree == 3);
        CHECK_THROWS(nlohmann::json{{"family", "matern"}}.get<KernelSpec>());
    }
}

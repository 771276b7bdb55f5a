#include <catch2/catch.hpp>

#include <cmath>

#include "sarcd/mat.hpp"
#include "sarcd/rng.hpp"

using namespace sarcd;

namespace {

Mat random_symmetric(int n, Rng& rng) {
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = 2.0 * rng.next_real() - 1.0;
            a.at(i, j) = v;
            a.at(j, i) = v;
        }
    return a;
}

} // namespace

TEST_CASE("jacobi recovers a known diagonal spectrum", "[mat]") {
    Mat a(3, 3);
    a.at(0, 0) = 5.0;
    a.at(1, 1) = -1.0;
    a.at(2, 2) = 2.0;
    const SymEigen e = jacobi_eigen_sym(a);
    CHECK(e.values[0] == Approx(5.0));
    CHECK(e.values[1] == Approx(2.0));
    CHECK(e.values[2] == Approx(-1.0));
}

TEST_CASE("jacobi eigenpairs satisfy A v = lambda v and orthonormality", "[mat]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(10));
        const Mat a = random_symmetric(n, rng);
        const SymEigen e = jacobi_eigen_sym(a);

        for (int j = 1; j < n; ++j)
            REQUIRE(e.values[j - 1] >= e.values[j]);

        for (int j = 0; j < n; ++j) {
            double residual = 0.0;
            for (int i = 0; i < n; ++i) {
                double av = 0.0;
                for (int m = 0; m < n; ++m)
                    av += a.at(i, m) * e.vectors.at(m, j);
                residual += std::pow(av - e.values[j] * e.vectors.at(i, j), 2);
            }
            REQUIRE(std::sqrt(residual) < 1e-10);
        }

        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i)
                    dot += e.vectors.at(i, p) * e.vectors.at(i, q);
                REQUIRE(std::fabs(dot - (p == q ? 1.0 : 0.0)) < 1e-12);
            }
    }
}

TEST_CASE("jacobi requires a square matrix", "[mat]") {
    CHECK_THROWS_AS(jacobi_eigen_sym(Mat(2, 3)), param_error);
}

TEST_CASE("mul and transpose behave on a small example", "[mat]") {
    Mat a(2, 3);
    int v = 1;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            a.at(i, j) = v++;
    const Mat at = transpose(a);
    const Mat g = mul(a, at); // 2x2 Gram matrix
    CHECK(g.at(0, 0) == Approx(1 + 4 + 9));
    CHECK(g.at(0, 1) == Approx(4 + 10 + 18));
    CHECK(g.at(1, 0) == g.at(0, 1));
    CHECK(g.at(1, 1) == Approx(16 + 25 + 36));
    CHECK_THROWS_AS(mul(a, a), param_error);
}

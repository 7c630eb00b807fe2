#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "classp/error.hpp"
#include "classp/grad_check.hpp"
#include "classp/matrix.hpp"
#include "classp/rng.hpp"

using namespace classp;

namespace {

Matrix make(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Matrix m(r, c);
    std::copy(vals.begin(), vals.end(), m.data.begin());
    return m;
}

} // namespace

TEST_CASE("matrix construction and shape rules") {
    Matrix m(2, 3, 1.5);
    CHECK(m.rows == 2);
    CHECK(m.cols == 3);
    CHECK(m.data.size() == 6);
    CHECK(m(1, 2) == 1.5);
    CHECK_THROWS_AS(Matrix(0, 3), DimensionError);
    CHECK_THROWS_AS(Matrix(3, 0), DimensionError);
}

TEST_CASE("matmul identity case") {
    const Matrix i2 = make(2, 2, {1, 0, 0, 1});
    const Matrix a = make(2, 2, {1, 2, 3, 4});
    const Matrix out = matmul(i2, a);
    CHECK(out.data == a.data);
}

TEST_CASE("matmul inner product example") {
    const Matrix a = make(1, 2, {1, 2});
    const Matrix b = make(2, 1, {3, 4});
    const Matrix out = matmul(a, b);
    CHECK(out.rows == 1);
    CHECK(out.cols == 1);
    CHECK(out(0, 0) == 11.0);
}

TEST_CASE("matmul zero matrix times anything is exactly zero") {
    Pcg32 rng(3);
    const Matrix z(4, 5);
    const Matrix b = rand_normal(rng, 5, 3);
    const Matrix out = matmul(z, b);
    for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("matmul shape mismatch") {
    const Matrix a(2, 3);
    const Matrix b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("matmul associativity on random triples") {
    Pcg32 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = rand_normal(rng, 7, 5);
        const Matrix b = rand_normal(rng, 5, 4);
        const Matrix c = rand_normal(rng, 4, 6);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.data.size(); ++i) {
            const double scale = std::max({1.0, std::abs(left.data[i]), std::abs(right.data[i])});
            CHECK(std::abs(left.data[i] - right.data[i]) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("elementwise operations and identities") {
    const Matrix a = make(1, 2, {1, 1});
    const Matrix b = make(1, 2, {2, 3});
    CHECK(elementwise(a, b, ElementwiseOp::add).data == std::vector<double>{3, 4});

    Pcg32 rng(5);
    const Matrix x = rand_normal(rng, 3, 3);
    const Matrix diff = elementwise(x, x, ElementwiseOp::sub);
    for (double v : diff.data) CHECK(v == 0.0);

    const Matrix ones(3, 3, 1.0);
    CHECK(elementwise(x, ones, ElementwiseOp::mul).data == x.data);

    CHECK_THROWS_AS(elementwise(Matrix(2, 2), Matrix(2, 3), ElementwiseOp::add), DimensionError);
}

TEST_CASE("transpose is an involution") {
    Pcg32 rng(6);
    const Matrix a = rand_normal(rng, 4, 7);
    const Matrix back = transpose(transpose(a));
    CHECK(back.rows == a.rows);
    CHECK(back.cols == a.cols);
    CHECK(back.data == a.data);
    CHECK(transpose(a)(2, 3) == a(3, 2));
}

// Reference outputs of the canonical 32-bit generator for seed 42 with the
// default stream, frozen from the published demo program.
TEST_CASE("pcg32 reference sequence, seed 42") {
    Pcg32 rng(42);
    const std::uint32_t expected[] = {0xa15c02b7u, 0x7b47f409u, 0xba1d3330u,
                                      0x83d2f293u, 0xbfa4784bu, 0xcbed606eu};
    for (std::uint32_t want : expected) CHECK(rng.next_u32() == want);
}

TEST_CASE("pcg32 determinism and stream separation") {
    Pcg32 a(123), b(123);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u32() == b.next_u32());

    Pcg32 c(123), d(124);
    bool all_equal = true;
    for (int i = 0; i < 64; ++i) {
        if (c.next_u32() != d.next_u32()) all_equal = false;
    }
    CHECK_FALSE(all_equal);

    Pcg32 e(123, 1), f(123, 2);
    bool streams_equal = true;
    for (int i = 0; i < 64; ++i) {
        if (e.next_u32() != f.next_u32()) streams_equal = false;
    }
    CHECK_FALSE(streams_equal);
}

TEST_CASE("next_below stays in range and rejects zero bound") {
    Pcg32 rng(9);
    for (int i = 0; i < 2000; ++i) CHECK(rng.next_below(17) < 17u);
    for (int i = 0; i < 100; ++i) CHECK(rng.next_below(1) == 0u);
    CHECK_THROWS_AS(rng.next_below(0), ArgumentError);
}

TEST_CASE("next_unit lies in [0,1)") {
    Pcg32 rng(10);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("next_normal consumes exactly two generator draws") {
    Pcg32 a(77), b(77);
    (void)a.next_normal();
    (void)b.next_u32();
    (void)b.next_u32();
    CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("permutation is a bijection") {
    Pcg32 rng(11);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{10}, std::size_t{100}}) {
        const std::vector<std::size_t> perm = rng.permutation(n);
        REQUIRE(perm.size() == n);
        std::set<std::size_t> seen(perm.begin(), perm.end());
        CHECK(seen.size() == n);
        CHECK(*seen.rbegin() == n - 1);
    }
    CHECK(rng.permutation(0).empty());

    Pcg32 r1(12), r2(12);
    CHECK(r1.permutation(50) == r2.permutation(50));
}

TEST_CASE("rand_normal std=0 gives the mean everywhere") {
    Pcg32 rng(13);
    const Matrix m = rand_normal(rng, 3, 4, 2.5, 0.0);
    for (double v : m.data) CHECK(v == 2.5);
}

TEST_CASE("rand_normal determinism for equal seeds") {
    Pcg32 a(14), b(14);
    const Matrix ma = rand_normal(a, 5, 5);
    const Matrix mb = rand_normal(b, 5, 5);
    CHECK(ma.data == mb.data);
}

TEST_CASE("rand_normal rejects negative std") {
    Pcg32 rng(15);
    CHECK_THROWS_AS(rand_normal(rng, 2, 2, 0.0, -1.0), ArgumentError);
}

TEST_CASE("rand_normal sample statistics over 1e6 draws") {
    Pcg32 rng(16);
    const Matrix m = rand_normal(rng, 1000, 1000);
    double sum = 0.0;
    for (double v : m.data) sum += v;
    const double mean = sum / static_cast<double>(m.data.size());
    CHECK(std::abs(mean) < 0.01);

    double sq = 0.0;
    for (double v : m.data) sq += (v - mean) * (v - mean);
    const double stddev = std::sqrt(sq / static_cast<double>(m.data.size()));
    CHECK(std::abs(stddev - 1.0) < 0.01);
}

TEST_CASE("finite differences are exact on quadratics") {
    const double w[] = {3.0};
    const auto square = [](std::span<const double> v) { return v[0] * v[0]; };
    const std::vector<double> grad = finite_diff_grad(square, w, 1e-5);
    CHECK(std::abs(grad[0] - 6.0) <= 1e-9 * 6.0);
}

TEST_CASE("finite differences on a random degree-2 polynomial") {
    Pcg32 rng(18);
    std::vector<double> a(5), b(5), w(5);
    for (auto* v : {&a, &b, &w}) {
        for (double& x : *v) x = rng.next_normal();
    }
    const auto poly = [&](std::span<const double> v) {
        double out = 0.7;
        for (std::size_t i = 0; i < v.size(); ++i) out += a[i] * v[i] * v[i] + b[i] * v[i];
        return out;
    };
    const std::vector<double> grad = finite_diff_grad(poly, w, 1e-4);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double exact = 2.0 * a[i] * w[i] + b[i];
        CHECK(std::abs(grad[i] - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("finite differences of a constant are zero") {
    const double w[] = {1.0, -2.0, 0.5};
    const auto constant = [](std::span<const double>) { return 4.2; };
    for (double g : finite_diff_grad(constant, w, 1e-5)) CHECK(g == 0.0);
}

TEST_CASE("finite differences sin derivative at zero") {
    const double w[] = {0.0};
    const auto f = [](std::span<const double> v) { return std::sin(v[0]); };
    const std::vector<double> grad = finite_diff_grad(f, w, 1e-5);
    CHECK(std::abs(grad[0] - 1.0) <= 1e-9);
}

TEST_CASE("finite differences argument and numeric errors") {
    const double w[] = {1.0};
    const auto f = [](std::span<const double> v) { return v[0]; };
    CHECK_THROWS_AS(finite_diff_grad(f, w, 0.0), ArgumentError);
    CHECK_THROWS_AS(finite_diff_grad(f, w, -1e-5), ArgumentError);

    const auto bad = [](std::span<const double>) { return std::nan(""); };
    CHECK_THROWS_AS(finite_diff_grad(bad, w, 1e-5), NumericError);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "perihom/rng.hpp"

using namespace perihom;

TEST_CASE("philox blocks are deterministic and stream-separated") {
    Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    const auto ba = a.next_block();
    CHECK(ba == b.next_block());
    CHECK(ba != c.next_block());
    CHECK(ba != d.next_block());

    // consecutive blocks differ and the sequence is reproducible
    Philox4x32 e(42, 7);
    std::vector<std::uint32_t> first;
    for (int i = 0; i < 8; ++i)
        for (auto w : e.next_block()) first.push_back(w);
    Philox4x32 f(42, 7);
    std::vector<std::uint32_t> second;
    for (int i = 0; i < 8; ++i)
        for (auto w : f.next_block()) second.push_back(w);
    CHECK(first == second);
}

TEST_CASE("philox uniforms are equidistributed") {
    Philox4x32 gen(2024, 0);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    int buckets[10] = {0};
    for (int i = 0; i < n / 2; ++i) {
        double u0, u1;
        gen.next_uniforms(u0, u1);
        for (double u : {u0, u1}) {
            CHECK(u > 0.0);
            CHECK(u <= 1.0);
            sum += u;
            sumsq += u * u;
            ++buckets[static_cast<int>(u * 10.0) % 10];
        }
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    for (int b = 0; b < 10; ++b)
        CHECK(buckets[b] == doctest::Approx(n / 10.0).epsilon(0.03));
}

TEST_CASE("normal stream moments") {
    NormalStream ns(7, 3);
    const int n = 400000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    int tail3 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = ns.next();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
        if (std::abs(z) > 3.0) ++tail3;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s3 / n) <= 0.02);            // skewness
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));  // kurtosis
    // P(|Z| > 3) = 0.0027
    CHECK(tail3 == doctest::Approx(0.0026998 * n).epsilon(0.15));
}

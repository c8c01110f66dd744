#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "micon/rng.hpp"

using micon::math::SplitRng;

TEST_CASE("same seed reproduces the sequence") {
    SplitRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and different streams decorrelate") {
    SplitRng a(1), b(2);
    CHECK(a.next_u64() != b.next_u64());
    SplitRng base(7);
    SplitRng s1 = base.split("alpha");
    SplitRng s2 = base.split("beta");
    CHECK(s1.next_u64() != s2.next_u64());
    // splitting twice with the same label gives the same stream
    SplitRng s1b = base.split("alpha");
    SplitRng s1c = base.split("alpha");
    CHECK(s1b.next_u64() == s1c.next_u64());
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
    SplitRng rng(3);
    double mn = 1.0, mx = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        sum += u;
    }
    CHECK(mn < 0.01);
    CHECK(mx > 0.99);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("gaussian has roughly standard moments") {
    SplitRng rng(4);
    const int n = 50000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("below(n) is in range and hits every residue") {
    SplitRng rng(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int c : counts) CHECK(c > 700);
}

TEST_CASE("shuffle permutes") {
    SplitRng rng(6);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto orig = v;
    rng.shuffle(v);
    CHECK(v != orig);
    std::set<int> s(v.begin(), v.end());
    CHECK(s.size() == 50);
}

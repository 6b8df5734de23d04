#include <doctest.h>

#include "bsvbs/rng.hpp"

using bsvbs::SplitMix64;

TEST_CASE("identical seeds reproduce identical sequences") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("doubles land in [0, 1)") {
    SplitMix64 rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform_int covers the inclusive range") {
    SplitMix64 rng(3);
    bool seen[3] = {false, false, false};
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.uniform_int(13, 15);
        CHECK(v >= 13);
        CHECK(v <= 15);
        seen[v - 13] = true;
    }
    CHECK(seen[0]);
    CHECK(seen[1]);
    CHECK(seen[2]);
}

TEST_CASE("substreams with different tags diverge") {
    SplitMix64 env = bsvbs::substream(1, 0);
    SplitMix64 learner = bsvbs::substream(1, 16);
    CHECK(env.next_u64() != learner.next_u64());
}

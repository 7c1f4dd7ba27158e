#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "persistx/rng.hpp"

using namespace persistx;

TEST_CASE("philox4x32-10 known-answer vectors") {
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});

    const auto ones = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});

    const auto pi = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("substreams are reproducible and distinct") {
    RandomStream a(42, "replicate", 7), b(42, "replicate", 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    std::set<std::uint64_t> firsts;
    for (std::uint64_t idx = 0; idx < 1000; ++idx) firsts.insert(RandomStream(42, "replicate", idx).next_u64());
    firsts.insert(RandomStream(42, "resample", 0).next_u64());
    firsts.insert(RandomStream(43, "replicate", 0).next_u64());
    CHECK(firsts.size() == 1002);
}

TEST_CASE("uniform draws stay in the open unit interval with the right mean") {
    RandomStream s(1, "test", 0);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("domain tags hash with FNV-1a") {
    static_assert(stream_domain("") == 0xcbf29ce484222325ULL);
    CHECK(stream_domain("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(stream_domain("init") != stream_domain("advance"));
}

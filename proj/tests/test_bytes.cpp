#include "doctest.h"

#include "homechain/core/bytes.hpp"
#include "homechain/core/rng.hpp"

using namespace homechain;

TEST_CASE("hex round trip") {
    const Bytes raw{0x00, 0x01, 0xab, 0xff, 0x7f};
    const std::string hex = hex_encode(ByteView(raw.data(), raw.size()));
    CHECK(hex == "0001abff7f");
    const auto back = hex_decode(hex);
    REQUIRE(back.has_value());
    CHECK(*back == raw);
}

TEST_CASE("hex decode rejects junk") {
    CHECK(!hex_decode("abc").has_value());   // odd length
    CHECK(!hex_decode("zz").has_value());    // non-hex
    CHECK(hex_decode("").has_value());       // empty is fine
}

TEST_CASE("little endian integer encoding") {
    Bytes out;
    put_u32(out, 0x01020304u);
    CHECK(out == Bytes{0x04, 0x03, 0x02, 0x01});
    out.clear();
    put_u64(out, 0x0102030405060708ull);
    CHECK(out == Bytes{0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01});
}

TEST_CASE("reader walks what writers emit") {
    Bytes out;
    put_u8(out, 7);
    put_u32(out, 1234567);
    put_u64(out, 0xdeadbeefcafef00dull);
    put_str(out, "hello");
    put_blob(out, Bytes{9, 8, 7});

    ByteReader r{ByteView(out.data(), out.size())};
    CHECK(r.u8() == 7);
    CHECK(r.u32() == 1234567u);
    CHECK(r.u64() == 0xdeadbeefcafef00dull);
    CHECK(r.str() == "hello");
    CHECK(r.blob() == Bytes{9, 8, 7});
    CHECK(r.done());
    CHECK(!r.u8().has_value());  // past the end
}

TEST_CASE("reader rejects truncation at every length") {
    Bytes out;
    put_str(out, "some payload");
    put_u64(out, 42);
    for (std::size_t cut = 0; cut < out.size(); ++cut) {
        ByteReader r{ByteView(out.data(), cut)};
        const auto s = r.str();
        if (s) {
            CHECK(!r.u64().has_value());
        }
    }
}

TEST_CASE("deterministic rng streams repeat") {
    DetRng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
    DetRng c(43);
    CHECK(DetRng(42).next() != c.next());
}

TEST_CASE("bounded sampling stays in range and hits every value") {
    DetRng rng(7);
    bool seen[10] = {};
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.bounded(10);
        REQUIRE(v < 10);
        seen[v] = true;
    }
    for (const bool s : seen) CHECK(s);
}

TEST_CASE("fork gives distinct but stable streams") {
    DetRng root(99);
    DetRng a1 = root.fork("alpha");
    DetRng a2 = DetRng(99).fork("alpha");
    DetRng b = root.fork("beta");
    CHECK(a1.next() == a2.next());
    CHECK(DetRng(99).fork("alpha").next() != b.next());
}

TEST_CASE("sample_indices yields distinct indices") {
    DetRng rng(5);
    for (int round = 0; round < 100; ++round) {
        const auto picks = rng.sample_indices(20, 7);
        REQUIRE(picks.size() == 7);
        for (std::size_t i = 0; i < picks.size(); ++i) {
            CHECK(picks[i] < 20);
            for (std::size_t j = i + 1; j < picks.size(); ++j) CHECK(picks[i] != picks[j]);
        }
    }
}

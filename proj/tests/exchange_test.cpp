#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "csh/bytes.hpp"
#include "csh/errors.hpp"
#include "csh/exchange.hpp"

using namespace csh;
using namespace csh::exchange;

namespace {

// Independent reference: XOR the matched packets byte by byte, straight from
// the definition, with its own padding and splitting arithmetic.
Bytes oracle_packet(int me, const std::vector<Bytes>& chunks, const Matching& matching,
                    std::size_t common_len) {
    const int k = static_cast<int>(chunks.size());
    const std::size_t parts = k - 1;
    const std::size_t plen = (common_len + parts - 1) / parts;
    Bytes out(plen, 0);
    for (int j = 1; j <= k; ++j) {
        if (j == me) continue;
        Bytes padded = chunks[j - 1];
        padded.resize(plen * parts, 0);
        const int p = matching[j - 1][me - 1];
        for (std::size_t b = 0; b < plen; ++b) out[b] ^= padded[(p - 1) * plen + b];
    }
    return out;
}

Bytes pattern(std::size_t len, std::uint8_t byte) { return Bytes(len, byte); }

}  // namespace

TEST_CASE("canonical matching assigns packets in ascending member order") {
    CHECK(canonical_matching(3, 2) == std::map<int, int>{{1, 1}, {3, 2}});
    CHECK(canonical_matching(3, 1) == std::map<int, int>{{2, 1}, {3, 2}});
    CHECK(canonical_matching(4, 3) == std::map<int, int>{{1, 1}, {2, 2}, {4, 3}});
    CHECK_THROWS_AS(canonical_matching(3, 0), ConstraintError);
    CHECK_THROWS_AS(canonical_matching(3, 4), ConstraintError);
}

TEST_CASE("matchings are bijections for every chunk") {
    for (int k = 2; k <= 6; ++k) {
        for (auto matching : {canonical_matchings(k), randomized_matchings(k, 99)}) {
            for (int j = 1; j <= k; ++j) {
                std::vector<bool> used(k, false);
                for (int m = 1; m <= k; ++m) {
                    if (m == j) {
                        CHECK(matching[j - 1][m - 1] == 0);
                        continue;
                    }
                    int p = matching[j - 1][m - 1];
                    CHECK(p >= 1);
                    CHECK(p <= k - 1);
                    CHECK_FALSE(used[p]);
                    used[p] = true;
                }
            }
        }
        // pure functions of the inputs: recomputation agrees
        CHECK(canonical_matchings(k) == canonical_matchings(k));
        CHECK(randomized_matchings(k, 7) == randomized_matchings(k, 7));
    }
}

TEST_CASE("packet split pads to equal lengths and restores the chunk") {
    Bytes chunk = {1, 2, 3, 4, 5};
    PacketSplit split = split_chunk(chunk, 3, 5);
    CHECK(split.packets.size() == 2);
    CHECK(split.packets[0] == Bytes{1, 2, 3});
    CHECK(split.packets[1] == Bytes{4, 5, 0});
    CHECK(split.pad_len == 1);

    Bytes glued;
    for (const auto& p : split.packets) glued.insert(glued.end(), p.begin(), p.end());
    glued.resize(glued.size() - split.pad_len);
    CHECK(glued == chunk);
}

TEST_CASE("coded packets for fixed byte patterns match the reference XOR") {
    // chunks of 0xAA, 0xBB, 0xCC; with the canonical matching the packets are
    // the pairwise XORs 0x77, 0x66, 0x11
    std::vector<Bytes> chunks = {pattern(6, 0xAA), pattern(6, 0xBB), pattern(6, 0xCC)};
    auto matching = canonical_matchings(3);
    auto packets = encode_round(chunks, matching);
    REQUIRE(packets.size() == 3);
    CHECK(packets[0].payload == pattern(3, 0x77));
    CHECK(packets[1].payload == pattern(3, 0x66));
    CHECK(packets[2].payload == pattern(3, 0x11));
    for (int m = 1; m <= 3; ++m) {
        CHECK(packets[m - 1].sender == m);
        CHECK(packets[m - 1].payload == oracle_packet(m, chunks, matching, 6));
    }
}

TEST_CASE("k=2 rounds degenerate to forwarding the peer's chunk") {
    std::vector<Bytes> chunks = {{9, 9, 9}, {4, 4}};
    auto matching = canonical_matchings(2);
    auto packets = encode_round(chunks, matching);
    // common length 3, single packet per chunk
    CHECK(packets[0].payload == Bytes{4, 4, 0});
    CHECK(packets[1].payload == Bytes{9, 9, 9});

    std::vector<const Bytes*> locals1 = {nullptr, &chunks[1]};
    Bytes got = decode_round(std::vector<CodedPacket>{packets[1]}, locals1, 1, 3, 3, matching);
    CHECK(got == chunks[0]);
}

TEST_CASE("encode refuses a chunk the member does not hold") {
    std::vector<Bytes> chunks = {pattern(4, 1), pattern(4, 2), pattern(4, 3)};
    std::vector<const Bytes*> view = {nullptr, nullptr, &chunks[2]};  // missing chunk 2
    CHECK_THROWS_AS(encode_member(1, view, canonical_matchings(3), 4), ProtocolError);
}

TEST_CASE("decode error paths: missing packet and length mismatch") {
    std::vector<Bytes> chunks = {pattern(4, 1), pattern(4, 2), pattern(4, 3)};
    auto matching = canonical_matchings(3);
    auto packets = encode_round(chunks, matching);

    std::vector<const Bytes*> locals = {nullptr, &chunks[1], &chunks[2]};
    std::vector<CodedPacket> one = {packets[1]};
    CHECK_THROWS_AS(decode_round(one, locals, 1, 4, 4, matching), ProtocolError);

    std::vector<CodedPacket> corrupt = {packets[1], packets[2]};
    corrupt[0].payload.push_back(0);
    CHECK_THROWS_AS(decode_round(corrupt, locals, 1, 4, 4, matching), ProtocolError);

    std::vector<CodedPacket> dup = {packets[1], packets[1]};
    CHECK_THROWS_AS(decode_round(dup, locals, 1, 4, 4, matching), ProtocolError);
}

TEST_CASE("round-trip recovers every chunk for k in 2..6, canonical and randomized") {
    SplitMix64 rng(0xC0DE);
    for (int k = 2; k <= 6; ++k) {
        for (int iter = 0; iter < 40; ++iter) {
            const std::size_t len = 1 + rng.below(300);
            std::vector<Bytes> chunks(k);
            for (auto& c : chunks) rng.fill(c, len);
            const Matching matching =
                iter % 2 ? randomized_matchings(k, rng.next()) : canonical_matchings(k);
            auto packets = encode_round(chunks, matching);

            // traffic identity: k packets of ceil(B/(k-1)) bytes
            std::uint64_t total = 0;
            for (const auto& p : packets) total += p.payload.size();
            CHECK(total == static_cast<std::uint64_t>(k) * packet_length(len, k));
            CHECK(packet_length(len, k) * (k - 1) - len < static_cast<std::size_t>(k - 1));

            for (int me = 1; me <= k; ++me) {
                std::vector<CodedPacket> received;
                for (const auto& p : packets)
                    if (p.sender != me) received.push_back(p);
                std::vector<const Bytes*> locals(k, nullptr);
                for (int j = 1; j <= k; ++j)
                    if (j != me) locals[j - 1] = &chunks[j - 1];
                CHECK(decode_round(received, locals, me, len, len, matching) == chunks[me - 1]);
            }
        }
    }
}

TEST_CASE("zero-length chunks travel as zero-byte packets") {
    std::vector<Bytes> chunks = {{}, {}, {}};
    auto matching = canonical_matchings(3);
    auto packets = encode_round(chunks, matching);
    for (const auto& p : packets) CHECK(p.payload.empty());
    std::vector<const Bytes*> locals = {nullptr, &chunks[1], &chunks[2]};
    std::vector<CodedPacket> received = {packets[1], packets[2]};
    CHECK(decode_round(received, locals, 1, 0, 0, matching).empty());
}

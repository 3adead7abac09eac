#include "csh/exchange.hpp"

#include <algorithm>
#include <string>

#include "csh/errors.hpp"

namespace csh::exchange {

namespace {

void check_member(int k, int m, const char* what) {
    if (m < 1 || m > k) throw ConstraintError(std::string(what) + " out of range [1, k]");
}

}  // namespace

std::map<int, int> canonical_matching(int group_size, int missing_index) {
    check_member(group_size, missing_index, "missing chunk index");
    std::map<int, int> out;
    int packet = 1;
    for (int m = 1; m <= group_size; ++m)
        if (m != missing_index) out[m] = packet++;
    return out;
}

Matching canonical_matchings(int group_size) {
    Matching all(group_size, std::vector<int>(group_size, 0));
    for (int j = 1; j <= group_size; ++j)
        for (auto [m, p] : canonical_matching(group_size, j)) all[j - 1][m - 1] = p;
    return all;
}

Matching randomized_matchings(int group_size, std::uint64_t seed) {
    Matching all = canonical_matchings(group_size);
    SplitMix64 rng(seed);
    for (int j = 1; j <= group_size; ++j) {
        std::vector<int> perm(group_size - 1);
        for (int p = 0; p < group_size - 1; ++p) perm[p] = p + 1;
        for (int i = group_size - 2; i > 0; --i)
            std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
        int slot = 0;
        for (int m = 1; m <= group_size; ++m)
            if (m != j) all[j - 1][m - 1] = perm[slot++];
    }
    return all;
}

std::size_t packet_length(std::size_t chunk_len, int group_size) {
    if (group_size < 2) throw ConstraintError("group size must be >= 2");
    std::size_t parts = static_cast<std::size_t>(group_size) - 1;
    return (chunk_len + parts - 1) / parts;
}

PacketSplit split_chunk(const Bytes& chunk, int group_size, std::size_t common_len) {
    if (chunk.size() > common_len) throw ProtocolError("chunk longer than the round's common length");
    const std::size_t parts = static_cast<std::size_t>(group_size) - 1;
    const std::size_t plen = packet_length(common_len, group_size);

    PacketSplit split;
    split.pad_len = plen * parts - chunk.size();
    split.packets.assign(parts, Bytes(plen, 0));
    for (std::size_t i = 0; i < chunk.size(); ++i) split.packets[i / plen][i % plen] = chunk[i];
    return split;
}

CodedPacket encode_member(int me, std::span<const Bytes* const> chunks, const Matching& matching,
                          std::size_t common_len) {
    const int k = static_cast<int>(chunks.size());
    check_member(k, me, "member index");
    const std::size_t plen = packet_length(common_len, k);

    CodedPacket out;
    out.sender = me;
    out.payload.assign(plen, 0);
    for (int j = 1; j <= k; ++j) {
        if (j == me) continue;
        if (chunks[j - 1] == nullptr)
            throw ProtocolError("member " + std::to_string(me) + " asked to encode chunk " +
                                std::to_string(j) + " it does not hold");
        PacketSplit split = split_chunk(*chunks[j - 1], k, common_len);
        const Bytes& piece = split.packets[matching[j - 1][me - 1] - 1];
        for (std::size_t b = 0; b < plen; ++b) out.payload[b] ^= piece[b];
    }
    return out;
}

std::vector<CodedPacket> encode_round(std::span<const Bytes> chunks, const Matching& matching) {
    const int k = static_cast<int>(chunks.size());
    std::size_t common_len = 0;
    for (const Bytes& c : chunks) common_len = std::max(common_len, c.size());

    std::vector<const Bytes*> ptrs(k);
    for (int j = 0; j < k; ++j) ptrs[j] = &chunks[j];

    std::vector<CodedPacket> out;
    out.reserve(k);
    for (int m = 1; m <= k; ++m) {
        std::vector<const Bytes*> view = ptrs;
        view[m - 1] = nullptr;  // Lemma hypothesis: a member never holds its own chunk
        out.push_back(encode_member(m, view, matching, common_len));
    }
    return out;
}

Bytes decode_round(std::span<const CodedPacket> received, std::span<const Bytes* const> local_chunks,
                   int me, std::size_t chunk_len, std::size_t common_len, const Matching& matching) {
    const int k = static_cast<int>(local_chunks.size());
    check_member(k, me, "member index");
    const std::size_t plen = packet_length(common_len, k);

    std::vector<bool> seen(k + 1, false);
    std::vector<Bytes> recovered(k, Bytes());  // by packet index
    for (const CodedPacket& pkt : received) {
        if (pkt.sender < 1 || pkt.sender > k || pkt.sender == me || seen[pkt.sender])
            throw ProtocolError("incomplete round: unexpected sender " + std::to_string(pkt.sender));
        seen[pkt.sender] = true;
        if (pkt.payload.size() != plen)
            throw ProtocolError("corrupt round: packet length mismatch");

        Bytes piece = pkt.payload;
        for (int j = 1; j <= k; ++j) {
            if (j == me || j == pkt.sender) continue;
            if (local_chunks[j - 1] == nullptr)
                throw ProtocolError("decode requires local chunk " + std::to_string(j));
            PacketSplit split = split_chunk(*local_chunks[j - 1], k, common_len);
            const Bytes& cancel = split.packets[matching[j - 1][pkt.sender - 1] - 1];
            for (std::size_t b = 0; b < plen; ++b) piece[b] ^= cancel[b];
        }
        recovered[matching[me - 1][pkt.sender - 1] - 1] = std::move(piece);
    }

    int have = 0;
    for (int s = 1; s <= k; ++s) have += (s != me && seen[s]) ? 1 : 0;
    if (have != k - 1) throw ProtocolError("incomplete round: missing packets");

    Bytes chunk;
    chunk.reserve(chunk_len);
    for (int p = 0; p < k - 1; ++p)
        chunk.insert(chunk.end(), recovered[p].begin(), recovered[p].end());
    chunk.resize(chunk_len);  // strip zero padding
    return chunk;
}

}  // namespace csh::exchange

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "csh/bytes.hpp"

namespace csh::exchange {

/// matching[j-1][m-1] is the 1-based packet index of chunk j assigned to
/// member m, or 0 for m == j (a member never carries its own missing chunk).
/// Each row is a bijection between the other k-1 members and packets 1..k-1.
using Matching = std::vector<std::vector<int>>;

/// Matching for one chunk: the r-th smallest member index != missing_index
/// maps to packet r. Pure function of (k, j), so every server derives the
/// same assignment independently.
std::map<int, int> canonical_matching(int group_size, int missing_index);

/// Canonical matchings for all k chunks of a round.
Matching canonical_matchings(int group_size);

/// Seeded random bijections; decodability must not depend on the choice.
Matching randomized_matchings(int group_size, std::uint64_t seed);

/// Per-packet length of a round with common chunk length `chunk_len`.
std::size_t packet_length(std::size_t chunk_len, int group_size);

/// A chunk padded to `common_len` with zero bytes and cut into k-1 equal
/// packets. Concatenating the packets and dropping pad_len bytes restores
/// the original chunk.
struct PacketSplit {
    std::vector<Bytes> packets;
    std::size_t pad_len = 0;
};

PacketSplit split_chunk(const Bytes& chunk, int group_size, std::size_t common_len);

struct CodedPacket {
    int sender = 0;  ///< 1-based member index within the group
    Bytes payload;
};

/// XOR-combined broadcast of member `me`: over every chunk j != me, the
/// packet the matching assigns to `me`. chunks[j-1] may be null only for
/// j == me; a null entry elsewhere is an availability violation.
CodedPacket encode_member(int me, std::span<const Bytes* const> chunks, const Matching& matching,
                          std::size_t common_len);

/// Whole-round encode used by tests and oracles: every member broadcasts.
/// chunks[j-1] is the chunk member j misses; all must be present.
std::vector<CodedPacket> encode_round(std::span<const Bytes> chunks, const Matching& matching);

/// Recover the chunk member `me` misses from the k-1 received broadcasts,
/// cancelling packets of locally held chunks. `chunk_len` is the original
/// (unpadded) length of the missing chunk.
Bytes decode_round(std::span<const CodedPacket> received, std::span<const Bytes* const> local_chunks,
                   int me, std::size_t chunk_len, std::size_t common_len, const Matching& matching);

}  // namespace csh::exchange

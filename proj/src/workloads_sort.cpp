#include <algorithm>
#include <cstring>

#include "csh/errors.hpp"
#include "csh/workloads.hpp"

namespace csh::workloads {

namespace {

bool record_less(const std::uint8_t* a, const std::uint8_t* b) {
    return std::memcmp(a, b, kRecordBytes) < 0;
}

}  // namespace

SortWorkload::SortWorkload(int num_buckets)
    : SortWorkload(num_buckets, equal_width_splitters(num_buckets)) {}

SortWorkload::SortWorkload(int num_buckets, std::vector<Bytes> splitters)
    : buckets_(num_buckets), splitters_(std::move(splitters)) {
    if (buckets_ < 1) throw ConstraintError("sort needs at least one bucket");
    if (splitters_.size() != static_cast<std::size_t>(buckets_ - 1))
        throw ConstraintError("need exactly buckets-1 splitters");
}

std::vector<Bytes> SortWorkload::equal_width_splitters(int buckets) {
    // Long division of i * 2^80 by `buckets`, big-endian byte at a time. The
    // numerator is i followed by ten zero bytes; the quotient's last ten
    // bytes are the splitter (i < buckets keeps it below 2^80).
    std::vector<Bytes> out;
    for (int i = 1; i < buckets; ++i) {
        Bytes numerator;
        for (int shift = 56; shift >= 0; shift -= 8)
            numerator.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(i) >> shift) & 0xff));
        numerator.insert(numerator.end(), kKeyBytes, 0);

        Bytes quotient(numerator.size(), 0);
        std::uint64_t rem = 0;
        for (std::size_t b = 0; b < numerator.size(); ++b) {
            std::uint64_t cur = rem * 256 + numerator[b];
            quotient[b] = static_cast<std::uint8_t>(cur / buckets);
            rem = cur % buckets;
        }
        out.emplace_back(quotient.end() - kKeyBytes, quotient.end());
    }
    return out;
}

std::vector<Bytes> SortWorkload::sampled_splitters(const Bytes& records, int buckets) {
    if (records.empty()) return equal_width_splitters(buckets);
    if (records.size() % kRecordBytes != 0) throw ConstraintError("malformed record length");
    const std::size_t n = records.size() / kRecordBytes;
    std::vector<const std::uint8_t*> keys;
    keys.reserve(n);
    for (std::size_t off = 0; off < records.size(); off += kRecordBytes)
        keys.push_back(records.data() + off);
    std::sort(keys.begin(), keys.end(),
              [](const std::uint8_t* a, const std::uint8_t* b) { return std::memcmp(a, b, kKeyBytes) < 0; });

    std::vector<Bytes> out;
    for (int i = 1; i < buckets; ++i) {
        const std::uint8_t* key = keys[n * i / buckets];
        out.emplace_back(key, key + kKeyBytes);
    }
    return out;
}

std::vector<Bytes> SortWorkload::split(const Bytes& data, int n_files) const {
    if (data.size() % kRecordBytes != 0) throw ConstraintError("sort input is not record aligned");
    const std::size_t records = data.size() / kRecordBytes;
    std::vector<Bytes> files(n_files);
    for (int i = 0; i < n_files; ++i) {
        std::size_t lo = records * i / n_files, hi = records * (i + 1) / n_files;
        files[i].assign(data.begin() + lo * kRecordBytes, data.begin() + hi * kRecordBytes);
    }
    return files;
}

MapResult SortWorkload::map_file(const Bytes& file) const {
    if (file.size() % kRecordBytes != 0) throw ConstraintError("malformed record length");
    MapResult out;
    out.values.assign(buckets_, Bytes());
    for (std::size_t off = 0; off + kRecordBytes <= file.size(); off += kRecordBytes) {
        const std::uint8_t* rec = file.data() + off;
        // bucket = 1 + number of splitters <= key
        int lo = 0, hi = static_cast<int>(splitters_.size());
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (std::memcmp(splitters_[mid].data(), rec, kKeyBytes) <= 0)
                lo = mid + 1;
            else
                hi = mid;
        }
        out.values[lo].insert(out.values[lo].end(), rec, rec + kRecordBytes);
        ++out.ops;
    }
    return out;
}

Bytes SortWorkload::reduce(int /*function*/, std::span<const Bytes> values) const {
    Bytes all;
    for (const Bytes& v : values) all.insert(all.end(), v.begin(), v.end());
    return oracle_sort(all);
}

Bytes SortWorkload::oracle_sort(const Bytes& records) {
    if (records.size() % kRecordBytes != 0) throw ConstraintError("malformed record length");
    std::vector<const std::uint8_t*> ptrs;
    ptrs.reserve(records.size() / kRecordBytes);
    for (std::size_t off = 0; off < records.size(); off += kRecordBytes)
        ptrs.push_back(records.data() + off);
    std::sort(ptrs.begin(), ptrs.end(), record_less);

    Bytes out;
    out.reserve(records.size());
    for (const std::uint8_t* rec : ptrs) out.insert(out.end(), rec, rec + kRecordBytes);
    return out;
}

Bytes generate_sort_records(std::size_t n_records, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Bytes out;
    out.reserve(n_records * kRecordBytes);
    Bytes scratch;
    for (std::size_t r = 0; r < n_records; ++r) {
        rng.fill(scratch, kRecordBytes);
        out.insert(out.end(), scratch.begin(), scratch.end());
    }
    return out;
}

}  // namespace csh::workloads

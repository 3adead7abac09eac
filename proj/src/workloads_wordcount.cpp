#include <cctype>
#include <string>

#include "csh/errors.hpp"
#include "csh/workloads.hpp"

namespace csh::workloads {

namespace {

std::vector<std::string> tokenize(const Bytes& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (std::uint8_t c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Bytes join_tokens(std::span<const std::string> tokens) {
    Bytes out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out.insert(out.end(), tokens[i].begin(), tokens[i].end());
    }
    return out;
}

Bytes count_value(std::uint64_t count) {
    Bytes v;
    put_u64_le(v, count);
    return v;
}

Bytes sum_counts(std::span<const Bytes> values) {
    std::uint64_t total = 0;
    for (const Bytes& v : values) {
        if (v.size() != 8) throw ConstraintError("word count value must be 8 bytes");
        total += get_u64_le(v);
    }
    return count_value(total);
}

}  // namespace

std::string vocab_word(int index) {
    std::string digits = std::to_string(index);
    while (digits.size() < 3) digits.insert(digits.begin(), '0');
    return "w" + digits;
}

Bytes generate_word_text(std::size_t n_tokens, int vocab_size, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<std::string> tokens;
    tokens.reserve(n_tokens);
    for (std::size_t i = 0; i < n_tokens; ++i)
        tokens.push_back(vocab_word(static_cast<int>(rng.below(vocab_size)) + 1));
    return join_tokens(tokens);
}

std::vector<Bytes> WordCountWorkload::split(const Bytes& data, int n_files) const {
    std::vector<std::string> tokens = tokenize(data);
    std::vector<Bytes> files(n_files);
    for (int i = 0; i < n_files; ++i) {
        std::size_t lo = tokens.size() * i / n_files, hi = tokens.size() * (i + 1) / n_files;
        files[i] = join_tokens(std::span(tokens).subspan(lo, hi - lo));
    }
    return files;
}

MapResult WordCountWorkload::map_file(const Bytes& file) const {
    std::vector<std::uint64_t> counts(words_, 0);
    for (const std::string& tok : tokenize(file)) {
        // vocab_word(f) is "w" + zero-padded f
        if (tok.size() == 4 && tok[0] == 'w') {
            int f = (tok[1] - '0') * 100 + (tok[2] - '0') * 10 + (tok[3] - '0');
            if (f >= 1 && f <= words_) ++counts[f - 1];
        }
    }
    MapResult out;
    out.values.reserve(words_);
    for (int f = 0; f < words_; ++f) out.values.push_back(count_value(counts[f]));
    out.ops = 0;
    return out;
}

Bytes WordCountWorkload::reduce(int, std::span<const Bytes> values) const { return sum_counts(values); }

MultiJobWordCount::MultiJobWordCount(int jobs, int files_per_job, int functions, std::uint64_t seed,
                                     std::size_t tokens_per_file)
    : jobs_(jobs),
      files_(files_per_job),
      functions_(functions),
      vocab_(functions + 3),
      seed_(seed),
      tokens_per_file_(tokens_per_file) {
    if (jobs_ < 1 || files_ < 1 || functions_ < 1) throw ConstraintError("bad wordcount dimensions");
}

int MultiJobWordCount::target_slot(int job, int function) const {
    return (function - 1 + job - 1) % vocab_ + 1;
}

Bytes MultiJobWordCount::file_payload(int job, int file) const {
    std::uint64_t mix = seed_ ^ (static_cast<std::uint64_t>(job) << 32) ^ static_cast<std::uint64_t>(file);
    return generate_word_text(tokens_per_file_, vocab_, mix);
}

MapResult MultiJobWordCount::map_file(int job, const Bytes& file) const {
    std::vector<std::uint64_t> counts(vocab_ + 1, 0);
    for (const std::string& tok : tokenize(file)) {
        if (tok.size() == 4 && tok[0] == 'w') {
            int slot = (tok[1] - '0') * 100 + (tok[2] - '0') * 10 + (tok[3] - '0');
            if (slot >= 1 && slot <= vocab_) ++counts[slot];
        }
    }
    MapResult out;
    out.values.reserve(functions_);
    for (int f = 1; f <= functions_; ++f) out.values.push_back(count_value(counts[target_slot(job, f)]));
    return out;
}

Bytes MultiJobWordCount::aggregate(std::span<const Bytes> values) const { return sum_counts(values); }

}  // namespace csh::workloads

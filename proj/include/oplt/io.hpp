#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "oplt/sparse.hpp"

namespace oplt {

/// Thrown on malformed input lines; the message names the 1-based line number.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct DatasetHeader {
    std::uint64_t num_examples = 0; // N
    std::uint64_t num_features = 0; // d
    std::uint64_t num_labels = 0;   // m
};

namespace detail {

inline FormatError format_error(std::size_t line_no, const std::string& what) {
    return FormatError("line " + std::to_string(line_no) + ": " + what);
}

inline bool parse_uint(std::string_view tok, std::uint64_t& out) {
    if (tok.empty()) return false;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && p == tok.data() + tok.size();
}

inline bool parse_real(std::string_view tok, float& out) {
    if (tok.empty()) return false;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && p == tok.data() + tok.size();
}

} // namespace detail

/// Header line "N d m"; all three must be strictly positive integers.
inline DatasetHeader parse_header(std::string_view line, std::size_t line_no = 1) {
    DatasetHeader h;
    std::uint64_t* fields[3] = {&h.num_examples, &h.num_features, &h.num_labels};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ') ++end;
        if (!detail::parse_uint(line.substr(pos, end - pos), *fields[i]))
            throw detail::format_error(line_no, "expected three integers \"N d m\"");
        pos = end;
    }
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos != line.size())
        throw detail::format_error(line_no, "trailing tokens after \"N d m\"");
    if (h.num_examples == 0 || h.num_features == 0 || h.num_labels == 0)
        throw detail::format_error(line_no, "header fields must be strictly positive");
    return h;
}

/// Example line "l1,l2,... f1:v1 f2:v2 ...". An empty label list is a line
/// starting with a space. Duplicate feature ids and negative ids are rejected.
inline Example parse_example(std::string_view line, std::size_t line_no = 0) {
    Example ex;
    const std::size_t sp = line.find(' ');
    const std::string_view label_part = line.substr(0, sp == std::string_view::npos ? line.size() : sp);

    std::size_t pos = 0;
    while (pos < label_part.size()) {
        std::size_t end = label_part.find(',', pos);
        if (end == std::string_view::npos) end = label_part.size();
        std::uint64_t lab = 0;
        if (!detail::parse_uint(label_part.substr(pos, end - pos), lab) || lab >= kBiasFeature)
            throw detail::format_error(line_no, "bad label token");
        ex.labels.push_back(static_cast<LabelId>(lab));
        pos = end + 1;
    }
    canonicalize_labels(ex.labels);

    std::vector<SparseVector::Entry> entries;
    pos = sp == std::string_view::npos ? line.size() : sp + 1;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        if (pos >= line.size()) break;
        std::size_t end = line.find(' ', pos);
        if (end == std::string_view::npos) end = line.size();
        const std::string_view tok = line.substr(pos, end - pos);
        const std::size_t colon = tok.find(':');
        std::uint64_t id = 0;
        float value = 0.0f;
        if (colon == std::string_view::npos || !detail::parse_uint(tok.substr(0, colon), id) ||
            id >= kBiasFeature || !detail::parse_real(tok.substr(colon + 1), value))
            throw detail::format_error(line_no, "bad feature token \"" + std::string(tok) + "\"");
        entries.push_back({static_cast<FeatureId>(id), value});
        pos = end;
    }
    try {
        ex.features = SparseVector::from_entries(std::move(entries));
    } catch (const std::invalid_argument& e) {
        throw detail::format_error(line_no, e.what());
    }
    return ex;
}

/// Inverse of parse_example; entries come out in canonical order, so the
/// result reparses to an equal Example (not necessarily byte-equal input).
inline std::string serialize_example(const Example& ex) {
    std::string out;
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ex.labels[i]);
    }
    char buf[48];
    for (const auto& e : ex.features.entries()) {
        out += ' ';
        std::snprintf(buf, sizeof(buf), "%u:%.9g", e.id, static_cast<double>(e.value));
        out += buf;
    }
    return out;
}

/// Single-owner streaming reader for the XMLC repository text format.
/// Holds one line buffer and constant state; never buffers parsed examples.
class DatasetReader {
  public:
    explicit DatasetReader(std::istream& in) : in_(&in) {
        std::string line;
        if (!std::getline(*in_, line)) throw FormatError("empty dataset: missing header line");
        header_ = parse_header(line, ++line_no_);
    }

    const DatasetHeader& header() const { return header_; }

    std::optional<Example> next() {
        if (!std::getline(*in_, line_buf_)) {
            if (in_->bad()) throw std::runtime_error("I/O error while reading dataset");
            return std::nullopt;
        }
        if (!line_buf_.empty() && line_buf_.back() == '\r') line_buf_.pop_back();
        ++line_no_;
        ++examples_read_;
        return parse_example(line_buf_, line_no_);
    }

    std::size_t examples_read() const { return examples_read_; }
    std::size_t line_number() const { return line_no_; }
    /// true once the stream is exhausted and the example count disagrees with the header
    bool count_mismatch() const { return in_->eof() && examples_read_ != header_.num_examples; }
    std::size_t bytes_buffered() const { return line_buf_.capacity(); }

  private:
    std::istream* in_;
    DatasetHeader header_;
    std::string line_buf_;
    std::size_t line_no_ = 0;
    std::size_t examples_read_ = 0;
};

/// Seeded Fisher-Yates; deterministic for a given seed and element count.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        // unbiased bounded draw by rejection
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
        std::uint64_t r;
        do { r = rng(); } while (r >= limit);
        std::swap(v[i - 1], v[r % bound]);
    }
}

struct Dataset {
    DatasetHeader header;
    std::vector<Example> examples;
    bool count_mismatch = false;
};

/// Buffered load; applies a seeded uniform permutation when a seed is given.
inline Dataset load_dataset(std::istream& in, std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
    DatasetReader reader(in);
    Dataset ds;
    ds.header = reader.header();
    while (auto ex = reader.next()) ds.examples.push_back(std::move(*ex));
    ds.count_mismatch = reader.count_mismatch();
    if (shuffle_seed) seeded_shuffle(ds.examples, *shuffle_seed);
    return ds;
}

inline Dataset load_dataset_file(const std::string& path, std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return load_dataset(in, shuffle_seed);
}

} // namespace oplt

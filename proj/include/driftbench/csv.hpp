/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftbench/common.hpp"
#include "driftbench/partition.hpp"

namespace driftbench {

class MissingColumn : public DataError {
  public:
    explicit MissingColumn(const std::string& name)
        : DataError("missing column: " + name), column(name) {}
    std::string column;
};

class UnparsableValue : public DataError {
  public:
    UnparsableValue(std::size_t row_, const std::string& column_, const std::string& value_)
        : DataError("row " + std::to_string(row_) + ", column '" + column_ +
                    "': cannot parse value '" + value_ + "'"),
          row(row_),
          column(column_),
          value(value_) {}
    std::size_t row;  // 1-based data row (header excluded)
    std::string column;
    std::string value;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ' || f.back() == '\t')) f.pop_back();
        std::size_t i = 0;
        while (i < f.size() && (f[i] == ' ' || f[i] == '\t')) ++i;
        f.erase(0, i);
    }
    return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int64(std::string_view s) {
    std::int64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
}

/// Accepts YYYY-MM-DD with an optional "T" or " " HH:MM:SS part and an
/// optional trailing "Z".
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [](std::string_view t) -> std::optional<int> {
        int v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) return std::nullopt;
        return v;
    };
    auto y = num(s.substr(0, 4));
    auto mo = num(s.substr(5, 2));
    auto d = num(s.substr(8, 2));
    if (!y || !mo || !d || *mo < 1 || *mo > 12 || *d < 1 || *d > 31) return std::nullopt;
    int h = 0, mi = 0, sec = 0;
    if (s.size() > 10) {
        if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
            return std::nullopt;
        }
        auto hh = num(s.substr(11, 2));
        auto mm = num(s.substr(14, 2));
        auto ss = num(s.substr(17, 2));
        if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
        h = *hh;
        mi = *mm;
        sec = *ss;
    }
    return timeutil::civil_to_epoch(*y, static_cast<unsigned>(*mo), static_cast<unsigned>(*d), h,
                                    mi, sec);
}

}  // namespace detail

/// Loads labeled samples from a headered, comma-separated UTF-8 file.
/// Rows keep file order. The label is 1 when the label cell equals the
/// schema's positive value, 0 otherwise.
inline std::vector<Sample> load_csv(const std::string& path, const DatasetSchema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyDataset();
    const auto header = detail::split_csv_line(line);

    auto column_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw MissingColumn(name);
    };

    std::vector<std::size_t> feature_idx;
    feature_idx.reserve(schema.feature_columns.size());
    for (const auto& c : schema.feature_columns) feature_idx.push_back(column_index(c));
    const std::size_t label_idx = column_index(schema.label_column);
    const std::size_t ts_idx = column_index(schema.timestamp_column);

    std::vector<Sample> samples;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        Sample s;
        s.features.reserve(feature_idx.size());
        for (std::size_t k = 0; k < feature_idx.size(); ++k) {
            const auto& cell = fields[feature_idx[k]];
            auto v = detail::parse_double(cell);
            if (!v) throw UnparsableValue(row, schema.feature_columns[k], cell);
            s.features.push_back(*v);
        }
        s.label = (fields[label_idx] == schema.label_positive_value) ? 1 : 0;
        const auto& ts_cell = fields[ts_idx];
        if (schema.timestamp_format == TimestampFormat::EpochSeconds) {
            auto t = detail::parse_int64(ts_cell);
            if (!t) throw UnparsableValue(row, schema.timestamp_column, ts_cell);
            s.timestamp = *t;
        } else {
            auto t = detail::parse_iso8601(ts_cell);
            if (!t) throw UnparsableValue(row, schema.timestamp_column, ts_cell);
            s.timestamp = *t;
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw EmptyDataset();
    return samples;
}

// ---------------------------------------------------------------------------
// CSV emission. Numbers are written with enough digits to round-trip.

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw DataError("cannot open file for writing: " + path);
    }

    CsvWriter& cell(const std::string& v) {
        if (!first_) out_ << ',';
        out_ << v;
        first_ = false;
        return *this;
    }
    CsvWriter& cell(double v) { return cell(format_double(v)); }
    CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

  private:
    std::ofstream out_;
    bool first_ = true;
};

}  // namespace driftbench

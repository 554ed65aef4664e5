#include "georeg/csv_io.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "georeg/errors.hpp"

namespace georeg {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::MalformedInput, fmt::format("line {}: {}", line, what));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line, std::size_t column) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        malformed(line, fmt::format("column {} is not a number: '{}'", column, field));
    }
    return value;
}

template <std::size_t N, typename Row>
std::vector<Row> read_rows(std::istream& in, std::string_view header, Row (*make)(const std::array<double, N>&)) {
    std::string text;
    std::size_t line = 0;
    bool seen_header = false;
    std::vector<Row> rows;
    while (std::getline(in, text)) {
        ++line;
        const std::string_view row = trim(text);
        if (row.empty()) continue;
        if (!seen_header) {
            if (row != header) malformed(line, fmt::format("expected header '{}'", header));
            seen_header = true;
            continue;
        }
        std::array<double, N> values{};
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = row.find(',', start);
            const std::string_view field = row.substr(start, comma == std::string_view::npos ? row.npos : comma - start);
            if (col >= N) malformed(line, fmt::format("expected {} columns", N));
            values[col] = parse_number(field, line, col + 1);
            ++col;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (col != N) malformed(line, fmt::format("expected {} columns, got {}", N, col));
        rows.push_back(make(values));
    }
    if (!seen_header) malformed(line == 0 ? 1 : line, "missing header");
    return rows;
}

}  // namespace

std::vector<DescriptorMatch> read_matches_csv(std::istream& in) {
    return read_rows<4, DescriptorMatch>(in, kMatchesCsvHeader, [](const std::array<double, 4>& v) {
        return DescriptorMatch{v[0], v[1], v[2], v[3]};
    });
}

std::vector<TimingSample> read_timings_csv(std::istream& in) {
    return read_rows<4, TimingSample>(in, kTimingsCsvHeader, [](const std::array<double, 4>& v) {
        return TimingSample{v[0], v[1], v[2], v[3]};
    });
}

void write_matches_csv(std::ostream& out, const std::vector<DescriptorMatch>& matches) {
    out << kMatchesCsvHeader << '\n';
    for (const auto& m : matches) out << fmt::format("{},{},{},{}\n", m.x1, m.y1, m.x2, m.y2);
}

void write_timings_csv(std::ostream& out, const std::vector<TimingSample>& samples) {
    out << kTimingsCsvHeader << '\n';
    for (const auto& s : samples) {
        out << fmt::format("{},{},{},{}\n", s.n_descriptors, s.t_load, s.t_match, s.t_threshold);
    }
}

}  // namespace georeg

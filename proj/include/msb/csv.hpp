#pragma once

// CSV ingestion and emission for the command-line tool.  Counts files carry
// a "category,count" header; categories are 1-based indices or labels
// matching the generator's labels.  Output tables are deterministic given
// their inputs.

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/posterior.hpp"
#include "msb/sampler.hpp"

namespace msb {

inline std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    return fields;
}

// 1-based index or label -> 0-based category.
inline int resolve_category(const std::string& token, const Generator& gen) {
    for (std::size_t i = 0; i < gen.labels.size(); ++i)
        if (gen.labels[i] == token) return static_cast<int>(i);
    try {
        std::size_t used = 0;
        const int index = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        if (index < 1 || index > gen.dim())
            throw parse_error("category index " + token + " outside 1.." + std::to_string(gen.dim()));
        return index - 1;
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception&) {
        throw parse_error("unknown category '" + token + "'");
    }
}

}  // namespace detail

inline CountVector parse_counts_csv(std::istream& in, const Generator& gen) {
    std::string line;
    bool header_seen = false;
    CountVector counts{std::vector<long long>(gen.dim(), 0)};
    std::vector<char> seen(gen.dim(), 0);
    while (std::getline(in, line)) {
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (!header_seen) {
            const auto header = detail::split_csv_line(trimmed);
            if (header.size() != 2 || header[0] != "category" || header[1] != "count")
                throw parse_error("counts file must start with the header 'category,count'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_line(trimmed);
        if (fields.size() != 2) throw parse_error("counts row needs exactly two fields: " + trimmed);
        const int category = detail::resolve_category(fields[0], gen);
        if (seen[category]) throw parse_error("duplicate category '" + fields[0] + "' in counts file");
        seen[category] = 1;
        try {
            std::size_t used = 0;
            const long long value = std::stoll(fields[1], &used);
            if (used != fields[1].size() || value < 0) throw std::invalid_argument(fields[1]);
            counts.counts[category] = value;
        } catch (const std::exception&) {
            throw parse_error("count for category '" + fields[0] + "' must be a nonnegative integer");
        }
    }
    if (!header_seen) throw parse_error("counts file must start with the header 'category,count'");
    return counts;
}

inline CountVector parse_counts_csv(const std::string& text, const Generator& gen) {
    std::istringstream in(text);
    return parse_counts_csv(in, gen);
}

inline std::string category_name(const Generator& gen, int x) {
    return gen.labels.empty() ? std::to_string(x + 1) : gen.labels[x];
}

inline std::string emit_smooth_csv(const Generator& gen, const CountVector& counts,
                                   const Vector& posterior) {
    const long long n = counts.total();
    std::string out = "category,prior_mean,empirical,posterior_mean\n";
    for (int x = 0; x < gen.dim(); ++x) {
        const double empirical =
            n == 0 ? 0.0 : static_cast<double>(counts.counts[x]) / static_cast<double>(n);
        out += category_name(gen, x) + "," + format_double(gen.mu[x]) + "," + format_double(empirical) +
               "," + format_double(posterior[x]) + "\n";
    }
    return out;
}

inline std::string emit_atoms_csv(const std::vector<TruncatedMeasure>& measures, const Generator& gen) {
    std::string out = "measure,atom,category,weight\n";
    for (std::size_t m = 0; m < measures.size(); ++m)
        for (std::size_t a = 0; a < measures[m].atoms.size(); ++a)
            out += std::to_string(m + 1) + "," + std::to_string(a + 1) + "," +
                   category_name(gen, measures[m].atoms[a].first) + "," +
                   format_double(measures[m].atoms[a].second) + "\n";
    return out;
}

inline std::string emit_data_csv(const std::vector<std::vector<int>>& draws, const Generator& gen) {
    std::string out = "measure,draw,category\n";
    for (std::size_t m = 0; m < draws.size(); ++m)
        for (std::size_t i = 0; i < draws[m].size(); ++i)
            out += std::to_string(m + 1) + "," + std::to_string(i + 1) + "," +
                   category_name(gen, draws[m][i]) + "\n";
    return out;
}

}  // namespace msb

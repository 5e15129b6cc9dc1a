#pragma once

// Parser for the command-line moment query grammar:
//
//   query    := item ("," item)*
//   item     := set ":" exponent
//   set      := category | "a-b" (inclusive range) | "a+b+c" (listed)
//   category := 1-based index or generator label
//
// e.g. "3:2,10-12:1" asks for E[ nu({3})^2 * nu({10,11,12}) ].

#include <string>
#include <vector>

#include "msb/csv.hpp"
#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/moments.hpp"

namespace msb {

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        const std::size_t end = s.find(sep, begin);
        parts.push_back(s.substr(begin, end - begin));
        if (end == std::string::npos) break;
        begin = end + 1;
    }
    return parts;
}

}  // namespace detail

inline MomentQuery parse_moment_query(const std::string& text, const Generator& gen) {
    MomentQuery query;
    for (const std::string& item : detail::split_on(text, ',')) {
        const std::size_t colon = item.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
            throw parse_error("query item '" + item + "' must look like SET:EXPONENT");
        const std::string set_token = detail::trim(item.substr(0, colon));
        const std::string exp_token = detail::trim(item.substr(colon + 1));

        long long exponent = 0;
        try {
            std::size_t used = 0;
            exponent = std::stoll(exp_token, &used);
            if (used != exp_token.size() || exponent < 0) throw std::invalid_argument(exp_token);
        } catch (const std::exception&) {
            throw parse_error("query exponent '" + exp_token + "' must be a nonnegative integer");
        }

        std::vector<int> set;
        const std::size_t dash = set_token.find('-');
        bool is_label = false;
        for (const std::string& label : gen.labels) is_label = is_label || label == set_token;
        if (is_label) {
            set.push_back(detail::resolve_category(set_token, gen));
        } else if (set_token.find('+') != std::string::npos) {
            for (const std::string& token : detail::split_on(set_token, '+'))
                set.push_back(detail::resolve_category(detail::trim(token), gen));
        } else if (dash != std::string::npos && dash > 0) {
            const int lo = detail::resolve_category(detail::trim(set_token.substr(0, dash)), gen);
            const int hi = detail::resolve_category(detail::trim(set_token.substr(dash + 1)), gen);
            if (hi < lo) throw parse_error("query range '" + set_token + "' is reversed");
            for (int x = lo; x <= hi; ++x) set.push_back(x);
        } else {
            set.push_back(detail::resolve_category(set_token, gen));
        }
        query.sets.push_back(std::move(set));
        query.exponents.push_back(exponent);
    }
    validate_query(query, gen.dim());  // rejects overlapping sets
    return query;
}

}  // namespace msb

#pragma once

// JSON serialization of generator specs.  The document layout is
//
//   {"type": "tridiagonal", "d": 30, "w": 3.0}
//   {"type": "wrapped", "d": 30, "w": 3.0}
//   {"type": "dirichlet", "alpha": [..]}
//   {"type": "average", "divisor": 3.5, "parts": [{"coef": 1.0, "spec": {..}}, ..]}
//   {"type": "explicit", "matrix": [[..], ..]}
//   {"type": "contingency", "factors": [{..}, ..]}
//
// plus an optional "labels" array of category names on the top-level
// object.  Unknown keys are rejected.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msb/errors.hpp"
#include "msb/generator.hpp"

namespace msb {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) known = known || item.key() == key;
        if (!known) throw parse_error("unknown key '" + item.key() + "' in generator spec");
    }
}

inline double number_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw parse_error(std::string("generator spec is missing '") + key + "'");
    if (!j.at(key).is_number()) throw parse_error(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline int integer_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw parse_error(std::string("generator spec is missing '") + key + "'");
    if (!j.at(key).is_number_integer()) throw parse_error(std::string("'") + key + "' must be an integer");
    return j.at(key).get<int>();
}

}  // namespace detail

inline GeneratorSpec parse_generator_spec(const nlohmann::json& j, bool top_level = true) {
    if (!j.is_object()) throw parse_error("generator spec must be a JSON object");
    if (!j.contains("type") || !j.at("type").is_string())
        throw parse_error("generator spec needs a string 'type'");
    const std::string type = j.at("type").get<std::string>();

    GeneratorSpec spec;
    if (j.contains("labels")) {
        if (!top_level) throw parse_error("'labels' is only allowed on the top-level spec");
        if (!j.at("labels").is_array()) throw parse_error("'labels' must be an array of strings");
        for (const auto& label : j.at("labels")) {
            if (!label.is_string()) throw parse_error("'labels' must be an array of strings");
            spec.labels.push_back(label.get<std::string>());
        }
    }

    if (type == "tridiagonal" || type == "wrapped") {
        detail::reject_unknown_keys(j, {"type", "d", "w", "labels"});
        spec.kind = type == "tridiagonal" ? GeneratorSpec::Kind::Tridiagonal : GeneratorSpec::Kind::Wrapped;
        spec.d = detail::integer_field(j, "d");
        spec.w = detail::number_field(j, "w");
    } else if (type == "dirichlet") {
        detail::reject_unknown_keys(j, {"type", "alpha", "labels"});
        if (!j.contains("alpha") || !j.at("alpha").is_array())
            throw parse_error("dirichlet spec needs an 'alpha' array");
        spec.kind = GeneratorSpec::Kind::Dirichlet;
        for (const auto& a : j.at("alpha")) {
            if (!a.is_number()) throw parse_error("'alpha' entries must be numbers");
            spec.alpha.push_back(a.get<double>());
        }
    } else if (type == "explicit") {
        detail::reject_unknown_keys(j, {"type", "matrix", "labels"});
        if (!j.contains("matrix") || !j.at("matrix").is_array())
            throw parse_error("explicit spec needs a 'matrix' array of rows");
        const auto& rows = j.at("matrix");
        const int d = static_cast<int>(rows.size());
        spec.kind = GeneratorSpec::Kind::Explicit;
        spec.matrix = Matrix(d);
        for (int i = 0; i < d; ++i) {
            const auto& row = rows.at(i);
            if (!row.is_array() || static_cast<int>(row.size()) != d)
                throw parse_error("'matrix' must be square");
            for (int c = 0; c < d; ++c) {
                if (!row.at(c).is_number()) throw parse_error("'matrix' entries must be numbers");
                spec.matrix(i, c) = row.at(c).get<double>();
            }
        }
    } else if (type == "average") {
        detail::reject_unknown_keys(j, {"type", "divisor", "parts", "labels"});
        if (!j.contains("parts") || !j.at("parts").is_array() || j.at("parts").empty())
            throw parse_error("average spec needs a nonempty 'parts' array");
        spec.kind = GeneratorSpec::Kind::Average;
        spec.divisor = detail::number_field(j, "divisor");
        for (const auto& part : j.at("parts")) {
            if (!part.is_object()) throw parse_error("average parts must be objects");
            detail::reject_unknown_keys(part, {"coef", "spec"});
            if (!part.contains("spec")) throw parse_error("average part is missing 'spec'");
            spec.parts.emplace_back(detail::number_field(part, "coef"),
                                    parse_generator_spec(part.at("spec"), false));
        }
    } else if (type == "contingency") {
        detail::reject_unknown_keys(j, {"type", "factors", "labels"});
        if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").size() < 2)
            throw parse_error("contingency spec needs at least two 'factors'");
        spec.kind = GeneratorSpec::Kind::Contingency;
        for (const auto& factor : j.at("factors"))
            spec.factors.push_back(parse_generator_spec(factor, false));
    } else {
        throw parse_error("unknown generator type '" + type + "'");
    }
    return spec;
}

inline GeneratorSpec parse_generator_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("invalid JSON: ") + e.what());
    }
    return parse_generator_spec(j);
}

inline GeneratorSpec parse_generator_spec(const char* text) {
    return parse_generator_spec(std::string(text));
}

inline nlohmann::json to_json(const GeneratorSpec& spec) {
    nlohmann::json j;
    switch (spec.kind) {
        case GeneratorSpec::Kind::Tridiagonal:
        case GeneratorSpec::Kind::Wrapped:
            j["type"] = spec.kind == GeneratorSpec::Kind::Tridiagonal ? "tridiagonal" : "wrapped";
            j["d"] = spec.d;
            j["w"] = spec.w;
            break;
        case GeneratorSpec::Kind::Dirichlet:
            j["type"] = "dirichlet";
            j["alpha"] = spec.alpha;
            break;
        case GeneratorSpec::Kind::Explicit: {
            j["type"] = "explicit";
            nlohmann::json rows = nlohmann::json::array();
            for (int i = 0; i < spec.matrix.dim(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int c = 0; c < spec.matrix.dim(); ++c) row.push_back(spec.matrix(i, c));
                rows.push_back(std::move(row));
            }
            j["matrix"] = std::move(rows);
            break;
        }
        case GeneratorSpec::Kind::Average: {
            j["type"] = "average";
            j["divisor"] = spec.divisor;
            nlohmann::json parts = nlohmann::json::array();
            for (const auto& [coef, sub] : spec.parts)
                parts.push_back({{"coef", coef}, {"spec", to_json(sub)}});
            j["parts"] = std::move(parts);
            break;
        }
        case GeneratorSpec::Kind::Contingency: {
            j["type"] = "contingency";
            nlohmann::json factors = nlohmann::json::array();
            for (const GeneratorSpec& sub : spec.factors) factors.push_back(to_json(sub));
            j["factors"] = std::move(factors);
            break;
        }
    }
    if (!spec.labels.empty()) j["labels"] = spec.labels;
    return j;
}

// A built generator serialized as an explicit matrix; doubles survive the
// round trip bit for bit.
inline GeneratorSpec explicit_spec_of(const Generator& gen) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::Explicit;
    spec.matrix = gen.matrix;
    spec.labels = gen.labels;
    return spec;
}

inline Generator load_generator_file(const std::string& path, int dimension_cap = kDefaultDimensionCap) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open generator file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return build(parse_generator_spec(buffer.str()), dimension_cap);
}

}  // namespace msb

#pragma once

// Built-in figure presets: thirty bins, a handful of observations, and four
// priors per preset (a Dirichlet graph, two geometric graphs, and their
// average) so the smoothing behavior of the different networks can be
// compared on identical data.

#include <string>
#include <utility>
#include <vector>

#include "msb/errors.hpp"
#include "msb/generator.hpp"
#include "msb/posterior.hpp"

namespace msb {

struct FigurePreset {
    std::string name;
    int dim = 30;
    std::vector<std::pair<int, long long>> count_placements;  // (1-based bin, count)
    std::vector<std::pair<std::string, GeneratorSpec>> generators;

    CountVector counts() const {
        CountVector out{std::vector<long long>(dim, 0)};
        for (const auto& [bin, count] : count_placements) out.counts[bin - 1] = count;
        return out;
    }
};

inline std::vector<std::string> figure_preset_names() { return {"normal", "gamma", "wrapped"}; }

inline FigurePreset figure_preset(const std::string& name) {
    GeneratorSpec dirichlet;
    dirichlet.kind = GeneratorSpec::Kind::Dirichlet;
    dirichlet.alpha = Vector(30, 2.0 / 29.0);

    const auto tridiagonal_spec = [](double w) {
        GeneratorSpec spec;
        spec.kind = GeneratorSpec::Kind::Tridiagonal;
        spec.d = 30;
        spec.w = w;
        return spec;
    };
    const auto wrapped_spec = [](double w) {
        GeneratorSpec spec;
        spec.kind = GeneratorSpec::Kind::Wrapped;
        spec.d = 30;
        spec.w = w;
        return spec;
    };
    const auto average_spec = [&](const GeneratorSpec& g2) {
        GeneratorSpec spec;
        spec.kind = GeneratorSpec::Kind::Average;
        spec.divisor = 3.5;
        spec.parts = {{1.0, dirichlet}, {2.5, g2}};
        return spec;
    };

    FigurePreset preset;
    preset.name = name;
    if (name == "normal") {
        // six points binned from a normal sample: bins 10 and 12 once, bins
        // 15 and 17 twice
        preset.count_placements = {{10, 1}, {12, 1}, {15, 2}, {17, 2}};
        const GeneratorSpec g2 = tridiagonal_spec(3.0);
        preset.generators = {{"G1", dirichlet},
                             {"G2", g2},
                             {"G3", tridiagonal_spec(8.0)},
                             {"G4", average_spec(g2)}};
    } else if (name == "gamma") {
        preset.count_placements = {{1, 1}, {2, 1}, {3, 1}, {7, 1}, {16, 1}};
        const GeneratorSpec g2 = tridiagonal_spec(8.0);
        preset.generators = {{"G1", dirichlet},
                             {"G2", g2},
                             {"G3", tridiagonal_spec(16.0)},
                             {"G4", average_spec(g2)}};
    } else if (name == "wrapped") {
        // one point in bin 3 over bins indexed by angles; compares the
        // wrapped and unwrapped geometries
        preset.count_placements = {{3, 1}};
        const GeneratorSpec g2 = wrapped_spec(3.0);
        preset.generators = {{"G1", dirichlet},
                             {"G2", g2},
                             {"G3", tridiagonal_spec(3.0)},
                             {"G4", average_spec(g2)}};
    } else {
        throw validation_error("unknown figure preset '" + name + "'");
    }
    return preset;
}

}  // namespace msb

#pragma once

#include "kr/angular.hpp"

#include <string>
#include <vector>

namespace kr {

// alpha -> P(alpha) modulation of the kick strengths.
struct Protocol {
    enum class Kind { constant, fig1_circle, fig3_family };

    Kind kind = Kind::constant;
    PulseVector fixed{};   // used by Kind::constant
    double beta = 0.15;    // used by Kind::fig3_family
    int n_gamma = 40;      // periods per cycle
    int cycles = 1;

    PulseVector pulses(double alpha) const;
    // alpha_n = 2 pi n / N_gamma
    double alpha_at(int n) const;
    int total_periods() const { return n_gamma * cycles; }

    std::string name() const;
    static Protocol from_name(const std::string& name);
    static Protocol constant(const PulseVector& P);
    static Protocol fig1_circle(int n_gamma = 40);
    static Protocol fig3_family(double beta);
};

std::vector<std::string> protocol_presets();

} // namespace kr

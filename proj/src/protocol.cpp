#include "kr/protocol.hpp"
#include "kr/errors.hpp"

#include <cmath>
#include <numbers>

namespace kr {

PulseVector Protocol::pulses(double alpha) const
{
    alpha = std::remainder(alpha, 2 * std::numbers::pi);
    switch (kind) {
    case Kind::constant:
        return fixed;
    case Kind::fig1_circle:
        return {1.6 + std::sin(alpha) / 2, 0.0, 0.0, 6.0 - std::cos(alpha) / 2};
    case Kind::fig3_family: {
        const double x = std::cos(alpha), y = std::sin(alpha);
        return {1 + 5 * beta * (x + 1), 0.4 + 2 * beta * (x + 1), 0.7 + (3 * beta / 4) * (y + 1),
                0.7 + (3 * beta / 2) * (y + 1)};
    }
    }
    return fixed;
}

double Protocol::alpha_at(int n) const
{
    return 2 * std::numbers::pi * n / n_gamma;
}

std::string Protocol::name() const
{
    switch (kind) {
    case Kind::constant: return fixed == PulseVector{} ? "free" : "constant";
    case Kind::fig1_circle: return "fig1_circle";
    case Kind::fig3_family: return "fig3_family";
    }
    return "constant";
}

Protocol Protocol::from_name(const std::string& name)
{
    if (name == "free" || name == "zero" || name == "constant")
        return Protocol{};
    if (name == "fig1_circle")
        return fig1_circle();
    if (name == "fig3_family")
        return fig3_family(0.15);
    throw Error(ErrorKind::config, "unknown protocol preset '" + name + "'");
}

Protocol Protocol::constant(const PulseVector& P)
{
    Protocol p;
    p.fixed = P;
    return p;
}

Protocol Protocol::fig1_circle(int n_gamma)
{
    Protocol p;
    p.kind = Kind::fig1_circle;
    p.n_gamma = n_gamma;
    return p;
}

Protocol Protocol::fig3_family(double beta)
{
    Protocol p;
    p.kind = Kind::fig3_family;
    p.beta = beta;
    return p;
}

std::vector<std::string> protocol_presets()
{
    return {"free", "zero", "constant", "fig1_circle", "fig3_family"};
}

} // namespace kr

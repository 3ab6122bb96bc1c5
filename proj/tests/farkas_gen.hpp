#pragma once

#include <random>

#include "logpot/entail.hpp"

// Random fact systems A·x <= b with a known feasible point x0 >= 0.
namespace farkas_gen {

struct Instance {
    logpot::FactSystem facts;
    std::vector<logpot::Rational> x0;
};

inline Instance system(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_int_distribution<int> coeff(-5, 5), point(0, 3), slack(0, 4);
    Instance in;
    in.facts.arity = 1;
    for (std::size_t j = 0; j < cols; ++j) in.facts.atoms.push_back({{unsigned(j + 1)}, 0});
    for (std::size_t j = 0; j < cols; ++j) in.x0.push_back(point(rng));
    for (std::size_t i = 0; i < rows; ++i) {
        logpot::FactRow r{"R", {}, 0};
        logpot::Rational ax;
        for (std::size_t j = 0; j < cols; ++j) {
            int c = coeff(rng);
            if (c == 0) continue;
            r.coeffs[j] = c;
            ax += c * in.x0[j];
        }
        r.bound = ax + slack(rng);
        in.facts.rows.push_back(std::move(r));
    }
    return in;
}

// U = F·A and v = F·b for a random F >= 0.
inline void implied_goal(std::mt19937_64& rng, const logpot::FactSystem& fs, std::vector<logpot::Rational>& u,
                         logpot::Rational& v) {
    std::uniform_int_distribution<int> mult(0, 3);
    u.assign(fs.atoms.size(), 0);
    v = 0;
    for (const auto& r : fs.rows) {
        logpot::Rational f(mult(rng), 2);
        for (const auto& [j, c] : r.coeffs) u[j] += f * c;
        v += f * r.bound;
    }
}

// A goal violated at x0, hence not implied.
inline void violated_goal(std::mt19937_64& rng, const Instance& in, std::vector<logpot::Rational>& u,
                          logpot::Rational& v) {
    std::uniform_int_distribution<int> coeff(-4, 4);
    u.assign(in.facts.atoms.size(), 0);
    v = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        u[j] = coeff(rng);
        v += u[j] * in.x0[j];
    }
    v -= 1;
}

} // namespace farkas_gen

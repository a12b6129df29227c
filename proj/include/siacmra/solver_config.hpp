#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "siacmra/burgers.hpp"
#include "siacmra/poisson.hpp"

namespace siacmra {

// plain key=value solver settings: gamma, cpen, cfl, tol, max_steps
struct SolverConfig {
    double gamma = 0.02;
    double cpen = 10.0;
    double cfl = 0.1;
    double tol = 1e-12;
    long max_steps = 10000000;
};

inline SolverConfig parse_solver_config(std::istream& in) {
    SolverConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw format_error("solver config: expected key=value at line " + std::to_string(lineno));
            continue;
        }
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        try {
            if (key == "gamma")
                cfg.gamma = std::stod(value);
            else if (key == "cpen")
                cfg.cpen = std::stod(value);
            else if (key == "cfl")
                cfg.cfl = std::stod(value);
            else if (key == "tol")
                cfg.tol = std::stod(value);
            else if (key == "max_steps")
                cfg.max_steps = std::stol(value);
            else
                throw format_error("solver config: unknown key '" + key + "' at line " + std::to_string(lineno));
        } catch (const std::invalid_argument&) {
            throw format_error("solver config: bad value for '" + key + "' at line " + std::to_string(lineno));
        }
    }
    return cfg;
}

inline SolverConfig parse_solver_config(const std::string& text) {
    std::istringstream ss(text);
    return parse_solver_config(ss);
}

inline void apply_config(const SolverConfig& cfg, BurgersProblem& prob) {
    prob.gamma = cfg.gamma;
    prob.cfl = cfg.cfl;
    prob.steady_tol = cfg.tol;
    prob.max_steps = cfg.max_steps;
}

inline void apply_config(const SolverConfig& cfg, PoissonProblem& prob) {
    prob.penalty_const = cfg.cpen;
}

}  // namespace siacmra

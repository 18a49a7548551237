#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "tvwb/dynsim.hpp"
#include "tvwb/markov.hpp"
#include "tvwb/prob_vector.hpp"

namespace testutil {

using namespace tvwb;

inline ProbVector p_half() {
    return ProbVector::from_fractions({Rational(1, 2), Rational(1, 2)});
}

inline ProbVector p_thirds() {
    return ProbVector::from_fractions({Rational(1, 3), Rational(2, 3)});
}

inline ProbVector p_334() {
    return ProbVector::from_fractions({Rational(3, 10), Rational(3, 10), Rational(4, 10)});
}

// the 2-state matrix [[2/3,1/3],[1/3,2/3]] whose state names stay 1 apart
inline StochasticMatrix counterexample_matrix() {
    return StochasticMatrix::from_fractions({{Rational(2, 3), Rational(1, 3)},
                                             {Rational(1, 3), Rational(2, 3)}});
}

// circulant rows (1/2,1/4,1/4) / (1/4,1/2,1/4) / (1/4,1/4,1/2)
inline StochasticMatrix circulant_matrix() {
    Rational h(1, 2), q(1, 4);
    return StochasticMatrix::from_fractions({{h, q, q}, {q, h, q}, {q, q, h}});
}

// equal rows: the Bernoulli shift written as a Markov matrix
inline StochasticMatrix bernoulli_matrix(const ProbVector& p) {
    std::vector<std::vector<Rational>> rows;
    for (int i = 0; i < p.size(); ++i) rows.push_back(p.exact());
    return StochasticMatrix::from_fractions(rows);
}

struct CliRun {
    int exit_code = -1;
    std::string output;
};

inline CliRun run_cli(const std::string& args) {
    std::string cmd = std::string(TVWB_CLI_PATH) + " " + args + " 2>&1";
    CliRun run;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return run;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) run.output.append(buf, got);
    int status = pclose(pipe);
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

inline std::string write_temp(const std::string& name, const std::string& contents) {
    std::string path = std::string("/tmp/tvwb_test_") + name;
    std::ofstream f(path, std::ios::binary);
    f << contents;
    return path;
}

} // namespace testutil

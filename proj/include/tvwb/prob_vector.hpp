#pragma once

#include <optional>
#include <vector>

#include "tvwb/rational.hpp"

namespace tvwb {

inline constexpr double kSumTolerance = 1e-12;
inline constexpr double kClassTolerance = 1e-12;

// Probability vector together with its weight-class structure: two symbols
// share a class iff their components are equal. Classes are detected exactly
// when the vector was built from fractions, else with a 1e-12 tolerance.
class ProbVector {
public:
    static ProbVector from_fractions(const std::vector<Rational>& comps);
    static ProbVector from_reals(const std::vector<double>& comps);

    int size() const { return static_cast<int>(comp_.size()); }
    double component(int symbol) const { return comp_[symbol - 1]; } // symbols are 1-based
    const std::vector<double>& components() const { return comp_; }
    bool has_exact() const { return !exact_.empty(); }
    const std::vector<Rational>& exact() const { return exact_; }

    int class_of(int symbol) const { return class_of_[symbol - 1]; }
    int class_count() const { return static_cast<int>(classes_.size()); }
    const std::vector<int>& class_symbols(int cls) const { return classes_[cls]; }
    double class_weight(int cls) const { return comp_[classes_[cls][0] - 1]; }

    bool same_as(const ProbVector& other, double tol = kClassTolerance) const;

private:
    ProbVector() = default;
    void build_classes_exact();
    void build_classes_real();
    void validate() const;

    std::vector<double> comp_;
    std::vector<Rational> exact_; // empty when built from reals
    std::vector<int> class_of_;   // class id per symbol (0-based ids)
    std::vector<std::vector<int>> classes_; // symbols per class, ascending
};

// h(p) = -sum p_j log2 p_j, in bits.
double entropy(const ProbVector& p);

} // namespace tvwb

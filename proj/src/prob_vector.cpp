#include "tvwb/prob_vector.hpp"

#include <cmath>
#include <cstdlib>

namespace tvwb {

ProbVector ProbVector::from_fractions(const std::vector<Rational>& comps) {
    ProbVector p;
    p.exact_ = comps;
    p.comp_.reserve(comps.size());
    for (const auto& r : comps) p.comp_.push_back(r.value());
    p.validate();
    p.build_classes_exact();
    return p;
}

ProbVector ProbVector::from_reals(const std::vector<double>& comps) {
    ProbVector p;
    p.comp_ = comps;
    p.validate();
    p.build_classes_real();
    return p;
}

void ProbVector::validate() const {
    if (comp_.size() < 2)
        fail(ErrorKind::invalid_input, "probability vector needs at least 2 components");
    double sum = 0.0;
    for (double c : comp_) {
        if (!(c > 0.0))
            fail(ErrorKind::invalid_input,
                 "probability vector components must be strictly positive (zero components must be trimmed by the caller)");
        sum += c;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
        fail(ErrorKind::invalid_input, "probability vector components must sum to 1");
}

void ProbVector::build_classes_exact() {
    int s = size();
    class_of_.assign(s, -1);
    for (int i = 0; i < s; ++i) {
        if (class_of_[i] != -1) continue;
        int cls = static_cast<int>(classes_.size());
        classes_.push_back({i + 1});
        class_of_[i] = cls;
        for (int j = i + 1; j < s; ++j) {
            if (class_of_[j] == -1 && exact_[j] == exact_[i]) {
                class_of_[j] = cls;
                classes_[cls].push_back(j + 1);
            }
        }
    }
}

void ProbVector::build_classes_real() {
    int s = size();
    class_of_.assign(s, -1);
    for (int i = 0; i < s; ++i) {
        if (class_of_[i] != -1) continue;
        int cls = static_cast<int>(classes_.size());
        classes_.push_back({i + 1});
        class_of_[i] = cls;
        for (int j = i + 1; j < s; ++j) {
            if (class_of_[j] == -1 && std::abs(comp_[j] - comp_[i]) <= kClassTolerance) {
                class_of_[j] = cls;
                classes_[cls].push_back(j + 1);
            }
        }
    }
}

bool ProbVector::same_as(const ProbVector& other, double tol) const {
    if (size() != other.size()) return false;
    for (int i = 0; i < size(); ++i)
        if (std::abs(comp_[i] - other.comp_[i]) > tol) return false;
    return class_of_ == other.class_of_;
}

double entropy(const ProbVector& p) {
    double h = 0.0;
    for (double c : p.components()) h -= c * std::log2(c);
    return h;
}

} // namespace tvwb

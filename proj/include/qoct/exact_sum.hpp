#pragma once

#include <span>
#include <vector>

namespace qoct {

// Correctly-rounded sum of doubles (Shewchuk partials, same scheme as
// Python's math.fsum). The result is the exact sum rounded once, so it does
// not depend on the order of the inputs. Column statistics computed with it
// are bit-identical under cyclic rolls and row permutations, which several
// pipeline invariants rely on.
class ExactSum {
  public:
    void add(double x);
    double result() const;
    void reset() { partials_.clear(); }

  private:
    std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);
double exact_mean(std::span<const double> values);

} // namespace qoct

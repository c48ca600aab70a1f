#include "qoct/exact_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace qoct {

void ExactSum::add(double x) {
    if (std::isnan(x) || std::isinf(x))
        throw std::invalid_argument("ExactSum: non-finite input");
    std::size_t i = 0;
    for (std::size_t j = 0; j < partials_.size(); ++j) {
        double y = partials_[j];
        if (std::fabs(x) < std::fabs(y))
            std::swap(x, y);
        double hi = x + y;
        double lo = y - (hi - x);
        if (lo != 0.0)
            partials_[i++] = lo;
        x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
}

double ExactSum::result() const {
    // Round the nonoverlapping partials to a single double, with the
    // half-ulp correction so the result is the correctly rounded exact sum.
    if (partials_.empty())
        return 0.0;
    std::size_t n = partials_.size();
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
        double x = hi;
        double y = partials_[--n];
        hi = x + y;
        double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0)
            break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
        double y = lo * 2.0;
        double x = hi + y;
        double yr = x - hi;
        if (y == yr)
            hi = x;
    }
    return hi;
}

double exact_sum(std::span<const double> values) {
    ExactSum acc;
    for (double v : values)
        acc.add(v);
    return acc.result();
}

double exact_mean(std::span<const double> values) {
    if (values.empty())
        throw std::invalid_argument("exact_mean: empty range");
    return exact_sum(values) / static_cast<double>(values.size());
}

} // namespace qoct

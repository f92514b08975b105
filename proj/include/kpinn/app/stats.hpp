#pragma once

#include <span>

namespace kpinn {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_std(std::span<const double> xs);
/// Sample Pearson coefficient. Throws DomainError for fewer than two points,
/// mismatched lengths or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace kpinn

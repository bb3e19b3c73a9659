#pragma once

#include <string>

#include "itecp/dgp.hpp"

namespace itecp {

// Where the known propensity comes from when ingesting a CSV.
struct PropensitySpec {
    enum class Kind { Column, Beta24, Constant };
    Kind kind = Kind::Column;
    double constant = 0.5;

    static PropensitySpec column() { return {Kind::Column, 0.0}; }
    static PropensitySpec beta24() { return {Kind::Beta24, 0.0}; }
    static PropensitySpec constant_value(double p) { return {Kind::Constant, p}; }
};

// Reads the fixed dataset schema: header `x1,...,xd,w,y[,y0,y1,tau,pi]`,
// UTF-8, comma-separated, decimal point. w must be 0 or 1. Optional columns
// populate potential outcomes / true effects; the pi column is read only for
// a Column propensity choice (and is then mandatory). Errors carry row/column
// locations. Consistency y = w*y1 + (1-w)*y0 is checked exactly.
CausalDataset load_csv(const std::string& path, const PropensitySpec& propensity);

// Writes a dataset in the same schema, including whichever optional columns
// are populated, with round-trip-exact number formatting.
void save_csv(const CausalDataset& dataset, const std::string& path);

}  // namespace itecp

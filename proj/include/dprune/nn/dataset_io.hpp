#pragma once

#include <dprune/nn/network.hpp>

#include <iosfwd>
#include <string>

namespace dprune {

// CSV layout: header row, one example per row. Input columns are named
// x0..x{p-1}; regression targets y0..y{m-1}; classification uses a single
// `label` column.
void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv(const std::string& path);

}  // namespace dprune

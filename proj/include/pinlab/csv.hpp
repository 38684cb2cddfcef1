#pragma once

#include <filesystem>
#include <vector>

#include "pinlab/estimators.hpp"

namespace pinlab {

// Fixed header "name,h,n,replicas,point,std_error,method,seed"; floats are
// printed with 17 significant digits so a parse-back is exact.
void emit_csv(const std::vector<EstimateRecord>& records, const std::filesystem::path& path);
std::vector<EstimateRecord> parse_csv(const std::filesystem::path& path);

}  // namespace pinlab

#include "pinlab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pinlab/errors.hpp"

namespace pinlab {

namespace {

constexpr const char* kHeader = "name,h,n,replicas,point,std_error,method,seed";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void emit_csv(const std::vector<EstimateRecord>& records, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("emit_csv: cannot open " + path.string());
    f << kHeader << "\n";
    for (const auto& r : records) {
        f << r.name << ',' << fmt_double(r.h) << ',' << r.n << ',' << r.replicas << ','
          << fmt_double(r.point) << ',' << fmt_double(r.std_error) << ',' << r.method << ','
          << r.seed << "\n";
    }
    if (!f) throw IoError("emit_csv: short write to " + path.string());
}

std::vector<EstimateRecord> parse_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("parse_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != kHeader)
        throw IoError("parse_csv: bad header in " + path.string());
    std::vector<EstimateRecord> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        EstimateRecord r;
        std::getline(ss, r.name, ',');
        std::getline(ss, field, ',');
        r.h = std::stod(field);
        std::getline(ss, field, ',');
        r.n = std::stoll(field);
        std::getline(ss, field, ',');
        r.replicas = std::stoll(field);
        std::getline(ss, field, ',');
        r.point = std::stod(field);
        std::getline(ss, field, ',');
        r.std_error = std::stod(field);
        std::getline(ss, r.method, ',');
        std::getline(ss, field);
        r.seed = std::stoull(field);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pinlab

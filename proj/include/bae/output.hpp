#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bae/simdyn.hpp"

namespace bae {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Plain CSV with a header row; numbers at 17 significant digits.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);

private:
    std::ostream& os_;
    size_t ncol_;
};

std::string format_double(double v);

// Columnar float64 file:
//   8 bytes  "BAESER01"
//   8 bytes  header length H, little-endian uint64
//   H bytes  JSON header (columns with name, length, offset in bytes from data start)
//   data     little-endian float64 columns back to back
void write_series(const std::string& path, const TimeSeries& s, const nlohmann::json& meta = {});
TimeSeries read_series(const std::string& path, nlohmann::json* header = nullptr);

struct RunManifest {
    nlohmann::json config;
    std::string command;
    std::string version;
    std::string timestamp;
    std::string input_hash;
    std::vector<std::string> outputs;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

std::string utc_timestamp();

}  // namespace bae

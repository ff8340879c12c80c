#include "bae/output.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <iomanip>
#include <sstream>

#include "bae/errors.hpp"

namespace bae {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& columns)
    : os_(os), ncol_(columns.size()) {
    for (size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncol_) throw Error("csv row width does not match header");
    for (size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_double(values[i]);
    os_ << "\n";
}

namespace {

const char magic[9] = "BAESER01";

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

void put_column(std::ostream& os, const std::vector<double>& col) {
    for (double v : col) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::vector<double> get_column(std::istream& is, size_t n) {
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = std::bit_cast<double>(get_u64(is));
    return out;
}

}  // namespace

void write_series(const std::string& path, const TimeSeries& s, const json& meta) {
    const size_t ne = s.times.size(), nc = s.current.size();
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    cols.emplace_back("t", s.times);
    std::vector<double> dre(ne), dim(ne), bre(ne), bim(ne);
    for (size_t i = 0; i < ne; ++i) {
        dre[i] = s.d[i].real();
        dim[i] = s.d[i].imag();
        bre[i] = s.b[i].real();
        bim[i] = s.b[i].imag();
    }
    cols.emplace_back("d_re", dre);
    cols.emplace_back("d_im", dim);
    cols.emplace_back("b_re", bre);
    cols.emplace_back("b_im", bim);
    cols.emplace_back("current", s.current);

    json h;
    h["format"] = "bae-series";
    h["version"] = 1;
    h["byte_order"] = "little";
    h["dtype"] = "float64";
    h["dt"] = s.dt;
    h["current_dt"] = s.current_dt;
    h["meta"] = meta.is_null() ? json::object() : meta;
    std::uint64_t off = 0;
    for (auto& [name, col] : cols) {
        h["columns"].push_back({{"name", name}, {"length", col.size()}, {"offset", off}});
        off += 8 * col.size();
    }
    (void)nc;
    const std::string header = h.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write '" + path + "'");
    os.write(magic, 8);
    put_u64(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (auto& [name, col] : cols) put_column(os, col);
    if (!os) throw Error("write failed for '" + path + "'");
}

TimeSeries read_series(const std::string& path, json* header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    char m[8];
    is.read(m, 8);
    if (!is || std::memcmp(m, magic, 8) != 0) throw Error("'" + path + "' is not a bae series file");
    const std::uint64_t hl = get_u64(is);
    if (hl > (1u << 26)) throw Error("series header too large");
    std::string text(hl, '\0');
    is.read(text.data(), static_cast<std::streamsize>(hl));
    json h = json::parse(text);
    if (header) *header = h;
    const std::streamoff data_start = is.tellg();

    TimeSeries s;
    s.dt = h.at("dt").get<double>();
    s.current_dt = h.at("current_dt").get<double>();
    std::map<std::string, std::vector<double>> cols;
    for (const json& c : h.at("columns")) {
        is.seekg(data_start + static_cast<std::streamoff>(c.at("offset").get<std::uint64_t>()));
        cols[c.at("name").get<std::string>()] = get_column(is, c.at("length").get<size_t>());
    }
    if (!is) throw Error("truncated series file '" + path + "'");
    s.times = cols["t"];
    s.current = cols["current"];
    const size_t n = s.times.size();
    if (cols["d_re"].size() != n || cols["b_im"].size() != n) throw Error("inconsistent columns");
    for (size_t i = 0; i < n; ++i) {
        s.d.emplace_back(cols["d_re"][i], cols["d_im"][i]);
        s.b.emplace_back(cols["b_re"][i], cols["b_im"][i]);
    }
    return s;
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["version"] = version;
    j["timestamp"] = timestamp;
    j["input_hash"] = input_hash;
    j["config"] = config;
    j["outputs"] = outputs;
    j["results"] = extra;
    return j;
}

std::string utc_timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace bae

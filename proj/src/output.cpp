#include "dicke/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dicke {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string manifest_hash(const RunConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(cfg.serialize_physics() + "\nversion=" + kCodeVersion)));
    return buf;
}

TableWriter::TableWriter(std::string path, std::vector<std::string> columns,
                         const std::string& hash)
    : path_(std::move(path)), columns_(std::move(columns)), hash_(hash) {}

void TableWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw std::invalid_argument("TableWriter: row width mismatch");
    rows_.push_back(values);
}

void TableWriter::write() const {
    std::ofstream out(path_);
    if (!out) throw std::runtime_error("cannot open " + path_);
    out << "# manifest " << hash_ << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out << " ";
        out << columns_[i];
    }
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << " ";
            out << format_g17(row[i]);
        }
        out << "\n";
    }
}

void ensure_dir(const std::string& path) {
    std::filesystem::create_directories(path);
}

void write_manifest(const RunConfig& cfg, const std::string& out_dir) {
    nlohmann::json j;
    j["version"] = kCodeVersion;
    j["manifest_hash"] = manifest_hash(cfg);
    j["seed"] = cfg.seed;
    j["config"] = cfg.serialize();
    std::ofstream out(out_dir + "/manifest.json");
    if (!out) throw std::runtime_error("cannot open manifest.json in " + out_dir);
    out << j.dump(2) << "\n";
}

void write_timing(const std::string& out_dir, double wall_seconds) {
    std::ofstream out(out_dir + "/timing.log");
    out << "wall_seconds = " << format_g17(wall_seconds) << "\n";
}

void write_error_record(const std::string& out_dir, int exit_code, const std::string& kind,
                        const std::string& message) {
    nlohmann::json j;
    j["exit_code"] = exit_code;
    j["kind"] = kind;
    j["message"] = message;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream out(out_dir + "/error.json");
    if (out) out << j.dump(2) << "\n";
}

}  // namespace dicke

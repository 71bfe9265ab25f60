#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dicke/config.hpp"

namespace dicke {

inline constexpr const char* kCodeVersion = "0.1.0";

std::string format_g17(double v);

std::uint64_t fnv1a64(const std::string& data);

// Hash of the canonical config text plus the code version; stamped into every
// output file so a run can be reproduced exactly.
std::string manifest_hash(const RunConfig& cfg);

// Columnar text table: one `# manifest <hash>` line, one header line naming
// the columns, then rows at 17 significant digits.
class TableWriter {
public:
    TableWriter(std::string path, std::vector<std::string> columns,
                const std::string& hash);
    void add_row(const std::vector<double>& values);
    void write() const;

private:
    std::string path_;
    std::vector<std::string> columns_;
    std::string hash_;
    std::vector<std::vector<double>> rows_;
};

// manifest.json: resolved config, seed, code version, hash. Wall time goes to
// timing.log so that data artifacts stay byte-identical across reruns.
void write_manifest(const RunConfig& cfg, const std::string& out_dir);
void write_timing(const std::string& out_dir, double wall_seconds);
void write_error_record(const std::string& out_dir, int exit_code, const std::string& kind,
                        const std::string& message);

void ensure_dir(const std::string& path);

}  // namespace dicke

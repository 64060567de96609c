#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "diraclab/error.hpp"

namespace diraclab {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over raw bytes; good enough to fingerprint spec inputs in manifests.
inline uint64_t fnv1a(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// All numeric CSV output goes through this: 9 significant digits, locale-free.
inline std::string format9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

// Manifest carried as a '#'-prefixed header block in every CSV. Wall time is
// deliberately not part of it: reruns with identical inputs must produce
// byte-identical files. The CLI reports timing on stdout instead.
struct RunManifest {
    std::string subcommand;
    std::string spec_path;
    std::string input_digest;                       // fnv1a of the spec bytes
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::string> outputs;

    void add(const std::string& key, const std::string& value) {
        parameters.emplace_back(key, value);
    }
    void add(const std::string& key, double value) { parameters.emplace_back(key, format9(value)); }
    void add(const std::string& key, int value) { parameters.emplace_back(key, std::to_string(value)); }

    std::string header_block() const {
        std::string out;
        out += "# tool=diraclab version=" + std::string(kToolVersion) + "\n";
        out += "# subcommand=" + subcommand + "\n";
        if (!spec_path.empty())
            out += "# spec=" + spec_path + " digest=" + input_digest + "\n";
        for (const auto& [k, v] : parameters) out += "# " + k + "=" + v + "\n";
        return out;
    }
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const RunManifest& manifest,
              const std::vector<std::string>& columns)
        : stream_(path) {
        require(stream_.good(), "E_OUTPUT_PATH", "cannot open output file " + path);
        stream_ << manifest.header_block();
        for (std::size_t i = 0; i < columns.size(); ++i)
            stream_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            stream_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }

private:
    std::ofstream stream_;
};

} // namespace diraclab

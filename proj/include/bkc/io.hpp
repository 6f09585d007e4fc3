// io.hpp — CSV/JSON formatting helpers, fingerprints, output transaction guard.

#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bkc/model.hpp"

namespace bkc::io {

// Scientific notation with 17 significant digits; losslessly round-trips
// doubles and never depends on the global locale.
std::string format_g17(double x);

uint64_t fnv1a64(const void* data, std::size_t bytes);
uint64_t fingerprint(const Eigen::MatrixXd& m);
std::string hex64(uint64_t v);

nlohmann::json to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);  // missing d/hbar default to 1
nlohmann::json to_json(const HNParams& c);
HNParams chain_from_json(const nlohmann::json& j);

// Sidecar skeleton: config echo, tool version, wall time, UTC timestamp.
nlohmann::json make_sidecar(const std::string& command, const nlohmann::json& config_echo,
                            double wall_ms);

// Removes all registered paths unless commit() was called.
class OutputGuard {
public:
    ~OutputGuard();
    void track(const std::filesystem::path& p) { paths_.push_back(p); }
    void commit() { committed_ = true; }

private:
    std::vector<std::filesystem::path> paths_;
    bool committed_ = false;
};

inline constexpr const char* kToolName = "bkchain";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bkc::io

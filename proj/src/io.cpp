// io.cpp — formatting, fingerprints, JSON (de)serialization, output guard.

#include "bkc/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace bkc::io {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

uint64_t fnv1a64(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t fingerprint(const Eigen::MatrixXd& m) {
    const Eigen::Index rows = m.rows();
    uint64_t h = fnv1a64(&rows, sizeof(Eigen::Index));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            h ^= fnv1a64(&v, sizeof(double));
            h *= 1099511628211ull;
        }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json to_json(const ModelParams& p) {
    return nlohmann::json{{"J", p.J},     {"theta", p.theta}, {"Delta", p.Delta},
                          {"phi", p.phi}, {"mu", p.mu},       {"L", p.L},
                          {"d", p.d},     {"hbar", p.hbar}};
}

ModelParams model_from_json(const nlohmann::json& j) {
    ModelParams p;
    try {
        p.J = j.at("J").get<double>();
        p.theta = j.at("theta").get<double>();
        p.Delta = j.at("Delta").get<double>();
        p.phi = j.at("phi").get<double>();
        p.mu = j.at("mu").get<double>();
        p.L = j.at("L").get<int>();
        p.d = j.value("d", 1.0);
        p.hbar = j.value("hbar", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("ModelParams JSON: ") + e.what());
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const HNParams& c) {
    return nlohmann::json{{"t_L", c.t_L}, {"t_R", c.t_R}, {"L", c.L}, {"d", c.d}};
}

HNParams chain_from_json(const nlohmann::json& j) {
    HNParams c;
    try {
        c.t_L = j.at("t_L").get<double>();
        c.t_R = j.at("t_R").get<double>();
        c.L = j.at("L").get<int>();
        c.d = j.value("d", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("HNParams JSON: ") + e.what());
    }
    if (c.L < 2) throw config_error("HNParams JSON: L must be >= 2");
    if (!(c.d > 0)) throw config_error("HNParams JSON: d must be > 0");
    return c;
}

nlohmann::json make_sidecar(const std::string& command, const nlohmann::json& config_echo,
                            double wall_ms) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char ts[32];
    std::tm tmv{};
    gmtime_r(&tt, &tmv);
    std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", &tmv);
    return nlohmann::json{{"tool", kToolName},
                          {"version", kToolVersion},
                          {"command", command},
                          {"config", config_echo},
                          {"wall_ms", wall_ms},
                          {"timestamp_utc", ts}};
}

OutputGuard::~OutputGuard() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : paths_) std::filesystem::remove(p, ec);
}

}  // namespace bkc::io

#include "spcvm/cache.hpp"

#include "spcvm/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace spcvm {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string canonical_config_string(const CalibrationConfig& c) {
    std::ostringstream os;
    os << "spcvm-calibration-v" << kFormatVersion << "|grid_size=" << c.grid_size
       << "|h=" << fmt17(c.h) << "|s0x=" << fmt17(c.s0x) << "|s0y=" << fmt17(c.s0y)
       << "|kernel=" << kernel_name(c.kernel) << "|p=" << c.p << "|m_per_dim=" << c.m_per_dim
       << "|rho=" << fmt17(c.rho) << "|phi=" << fmt17(c.phi) << "|K=" << c.K
       << "|mvn_tol=" << fmt17(c.mvn_tol) << "|seed=" << c.seed
       << "|dedup_quantum=" << fmt17(c.dedup_quantum);
    return os.str();
}

nlohmann::json config_to_json(const CalibrationConfig& c) {
    return nlohmann::json{{"grid_size", c.grid_size},
                          {"h", c.h},
                          {"s0x", c.s0x},
                          {"s0y", c.s0y},
                          {"kernel", kernel_name(c.kernel)},
                          {"p", c.p},
                          {"m_per_dim", c.m_per_dim},
                          {"rho", c.rho},
                          {"phi", c.phi},
                          {"K", c.K},
                          {"mvn_tol", c.mvn_tol},
                          {"seed", c.seed},
                          {"dedup_quantum", c.dedup_quantum}};
}

CalibrationConfig config_from_json(const nlohmann::json& j) {
    CalibrationConfig c;
    c.grid_size = j.at("grid_size").get<int>();
    c.h = j.at("h").get<double>();
    c.s0x = j.at("s0x").get<double>();
    c.s0y = j.at("s0y").get<double>();
    c.kernel = kernel_from_name(j.at("kernel").get<std::string>());
    c.p = j.at("p").get<int>();
    c.m_per_dim = j.at("m_per_dim").get<int>();
    c.rho = j.at("rho").get<double>();
    c.phi = j.at("phi").get<double>();
    c.K = j.at("K").get<int>();
    c.mvn_tol = j.at("mvn_tol").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.dedup_quantum = j.at("dedup_quantum").get<double>();
    return c;
}

} // namespace

std::string calibration_cache_key(const CalibrationConfig& config) {
    const std::string s = canonical_config_string(config);
    std::uint64_t hash = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char ch : s) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
    return buf;
}

std::string calibration_cache_path(const std::string& dir, const CalibrationConfig& config) {
    return (std::filesystem::path(dir) / ("calib_" + calibration_cache_key(config) + ".json"))
        .string();
}

bool load_calibration(const std::string& path, const CalibrationConfig& expect,
                      CalibrationResult& out) {
    std::ifstream in(path);
    if (!in) return false;
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("format_version").get<int>() != kFormatVersion) return false;
        CalibrationConfig stored = config_from_json(j.at("metadata"));
        if (!(stored == expect)) return false;

        const auto& gamma_rows = j.at("gamma");
        const std::size_t m = gamma_rows.size();
        Mat gamma(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& row = gamma_rows.at(i);
            if (row.size() != m) return false;
            for (std::size_t k = 0; k < m; ++k) gamma(i, k) = row.at(k).get<double>();
        }

        out.config = stored;
        out.gamma = std::move(gamma);
        out.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        out.a = j.at("a").get<double>();
        out.nu = j.at("nu").get<double>();
        return true;
    } catch (const nlohmann::json::exception&) {
        return false;
    }
}

void store_calibration(const std::string& path, const CalibrationResult& result) {
    try {
        std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());

        nlohmann::json gamma = nlohmann::json::array();
        const std::size_t m = result.gamma.rows();
        for (std::size_t i = 0; i < m; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t k = 0; k < m; ++k) row.push_back(result.gamma(i, k));
            gamma.push_back(std::move(row));
        }

        nlohmann::json j{{"format_version", kFormatVersion},
                         {"metadata", config_to_json(result.config)},
                         {"gamma", std::move(gamma)},
                         {"eigenvalues", result.eigenvalues},
                         {"a", result.a},
                         {"nu", result.nu}};

        std::ofstream outf(path);
        if (!outf) throw std::runtime_error("cannot open for writing");
        outf << j.dump(2) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "warning: failed to write calibration cache '" << path << "': " << e.what()
                  << '\n';
    }
}

} // namespace spcvm

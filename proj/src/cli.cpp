#include "spcvm/cli.hpp"

#include "spcvm/baselines.hpp"
#include "spcvm/cache.hpp"
#include "spcvm/errors.hpp"
#include "spcvm/io.hpp"
#include "spcvm/kernels.hpp"
#include "spcvm/mvn.hpp"
#include "spcvm/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace spcvm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config, "config key '" + key + "': cannot parse number '" + s + "'");
    }
}

long long to_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::config,
                    "config key '" + key + "': cannot parse integer '" + s + "'");
    }
}

std::vector<double> to_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) out.push_back(to_double(item, key));
    return out;
}

} // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        if (std::size_t hash = stripped.find('#'); hash != std::string::npos)
            stripped = stripped.substr(0, hash);
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config, path + ":" + std::to_string(lineno) +
                                               ": expected 'key = value', got '" + stripped + "'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorKind::config,
                        path + ":" + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw Error(ErrorKind::config,
                        path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

void apply_simulation_config(SimulationConfig& config,
                             const std::map<std::string, std::string>& kv) {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv) {
        if (key == "K") config.K = static_cast<int>(to_int(value, key));
        else if (key == "grid_size") config.grid_size = static_cast<int>(to_int(value, key));
        else if (key == "p") config.p = static_cast<int>(to_int(value, key));
        else if (key == "n_replicates") config.n_replicates = static_cast<int>(to_int(value, key));
        else if (key == "alpha") config.alpha = to_double(value, key);
        else if (key == "phi") config.phis = to_double_list(value, key);
        else if (key == "delta") config.deltas = to_double_list(value, key);
        else if (key == "rho") config.rho = to_double(value, key);
        else if (key == "h") config.h = to_double(value, key);
        else if (key == "s0") {
            std::vector<double> s0 = to_double_list(value, key);
            if (s0.size() != 2)
                throw Error(ErrorKind::config, "config key 's0': expected two values 'x, y'");
            config.s0x = s0[0];
            config.s0y = s0[1];
        }
        else if (key == "m_per_dim") config.m_per_dim = static_cast<int>(to_int(value, key));
        else if (key == "seed") config.seed = static_cast<std::uint64_t>(to_int(value, key));
        else if (key == "methods") config.methods = split_list(value);
        else if (key == "kernel") config.kernel = kernel_from_name(value);
        else if (key == "mvn_tol") config.mvn_tol = to_double(value, key);
        else if (key == "dedup_quantum") config.dedup_quantum = to_double(value, key);
        else unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::ostringstream os;
        os << "unknown config keys:";
        for (const auto& k : unknown) os << " '" << k << "'";
        throw Error(ErrorKind::config, os.str());
    }
}

namespace {

nlohmann::json simulation_config_json(const SimulationConfig& c) {
    return nlohmann::json{{"K", c.K},
                          {"grid_size", c.grid_size},
                          {"p", c.p},
                          {"n_replicates", c.n_replicates},
                          {"alpha", c.alpha},
                          {"phi", c.phis},
                          {"delta", c.deltas},
                          {"rho", c.rho},
                          {"h", c.h},
                          {"s0", {c.s0x, c.s0y}},
                          {"m_per_dim", c.m_per_dim},
                          {"seed", c.seed},
                          {"methods", c.resolved_methods()},
                          {"kernel", kernel_name(c.kernel)},
                          {"mvn_tol", c.mvn_tol},
                          {"dedup_quantum", c.dedup_quantum}};
}

nlohmann::json calibration_config_json(const CalibrationConfig& c) {
    return nlohmann::json{{"grid_size", c.grid_size},
                          {"h", c.h},
                          {"s0", {c.s0x, c.s0y}},
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

struct ManifestWriter {
    std::string subcommand;
    std::string path;
    nlohmann::json config;
    nlohmann::json extra = nlohmann::json::object();
    std::uint64_t seed = 0;
    CacheStats cache;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write() const {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        nlohmann::json j{{"subcommand", subcommand},
                         {"version", kVersion},
                         {"seed", seed},
                         {"resolved_config", config},
                         {"cache", {{"hits", cache.hits}, {"misses", cache.misses}}},
                         {"duration_seconds", seconds},
                         {"threads", max_threads()},
                         {"simd_variant", kernels::variant_name(kernels::active())}};
        for (auto& [key, value] : extra.items()) j[key] = value;
        write_text_file(path, j.dump(2) + "\n");
    }
};

std::string default_cache_dir() {
    if (const char* env = std::getenv("SPCVM_CACHE_DIR")) return env;
    return "spcvm_cache";
}

void add_calibration_flags(CLI::App* cmd, CalibrationConfig& c, std::string& kernel_name_opt) {
    cmd->add_option("--grid-size", c.grid_size, "lattice points per axis");
    cmd->add_option("--h", c.h, "kernel bandwidth");
    cmd->add_option("--s0", [&c](const std::vector<std::string>& vals) {
        c.s0x = std::stod(vals.at(0));
        c.s0y = std::stod(vals.at(1));
        return true;
    }, "reference point x y")->expected(2);
    cmd->add_option("--kernel", kernel_name_opt, "gaussian|epanechnikov");
    cmd->add_option("--p", c.p, "number of variables (1 or 2)");
    cmd->add_option("--m-per-dim", c.m_per_dim, "thresholds per dimension");
    cmd->add_option("--rho", c.rho, "within-site correlation");
    cmd->add_option("--phi", c.phi, "exponential spatial range");
    cmd->add_option("--K", c.K, "number of fields");
    cmd->add_option("--mvn-tol", c.mvn_tol, "MVN integration tolerance");
    cmd->add_option("--seed", c.seed, "integration seed");
    cmd->add_option("--dedup-quantum", c.dedup_quantum,
                    "distance rounding quantum (0 = exact-bit dedup)");
}

int dispatch_calibrate(const CalibrationConfig& config, const std::string& cache_dir,
                       const std::string& manifest_path) {
    ManifestWriter manifest{"calibrate", manifest_path, calibration_config_json(config)};
    manifest.seed = config.seed;

    CalibrationResult result = calibrate(config, cache_dir, &manifest.cache);

    double eig_sum = 0.0;
    for (double v : result.eigenvalues) eig_sum += v;
    std::cout << "a = " << fmt_double(result.a) << "\n"
              << "nu = " << fmt_double(result.nu) << "\n"
              << "eigenvalue_sum = " << fmt_double(eig_sum) << "\n"
              << "retained_eigenvalues = " << result.eigenvalues.size() << "\n"
              << "cache = " << (manifest.cache.hits > 0 ? "hit" : "miss") << "\n";

    manifest.extra["cache_file"] = calibration_cache_path(cache_dir, config);
    manifest.extra["a"] = fmt_double(result.a);
    manifest.extra["nu"] = fmt_double(result.nu);
    manifest.write();
    return 0;
}

int dispatch_test(const std::string& data_path, const std::string& calibration_file,
                  CalibrationConfig config, bool has_flags_config, const std::string& cache_dir,
                  const std::string& out_path, const std::string& manifest_path) {
    ManifestWriter manifest{"test", manifest_path, nlohmann::json::object()};

    const CsvData csv = read_csv(data_path);
    const FieldDataset data = dataset_from_csv(csv);

    CalibrationResult calib;
    if (!calibration_file.empty()) {
        if (has_flags_config)
            throw Error(ErrorKind::config,
                        "--calibration cannot be combined with calibration flags");
        std::ifstream probe(calibration_file);
        if (!probe)
            throw Error(ErrorKind::config,
                        "cannot open calibration file '" + calibration_file + "'");
        nlohmann::json j;
        try {
            probe >> j;
            CalibrationConfig stored;
            stored.grid_size = j.at("metadata").at("grid_size").get<int>();
            stored.h = j.at("metadata").at("h").get<double>();
            stored.s0x = j.at("metadata").at("s0x").get<double>();
            stored.s0y = j.at("metadata").at("s0y").get<double>();
            stored.kernel = kernel_from_name(j.at("metadata").at("kernel").get<std::string>());
            stored.p = j.at("metadata").at("p").get<int>();
            stored.m_per_dim = j.at("metadata").at("m_per_dim").get<int>();
            stored.rho = j.at("metadata").at("rho").get<double>();
            stored.phi = j.at("metadata").at("phi").get<double>();
            stored.K = j.at("metadata").at("K").get<int>();
            stored.mvn_tol = j.at("metadata").at("mvn_tol").get<double>();
            stored.seed = j.at("metadata").at("seed").get<std::uint64_t>();
            stored.dedup_quantum = j.at("metadata").at("dedup_quantum").get<double>();
            if (!load_calibration(calibration_file, stored, calib))
                throw Error(ErrorKind::numeric,
                            "calibration file '" + calibration_file + "' failed verification");
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::numeric, "cannot parse calibration file '" + calibration_file +
                                                "': " + e.what());
        }
    } else {
        // derive structural fields from the data, take the rest from flags
        config.grid_size = data.lattice.grid_size;
        config.K = data.K();
        config.p = data.p();
        calib = calibrate(config, cache_dir, &manifest.cache);
    }

    manifest.config = calibration_config_json(calib.config);
    manifest.seed = calib.config.seed;
    manifest.extra["data"] = data_path;

    const TestResult result = run_test(data, calib);
    const std::string record = test_result_record(result, calib.config);
    if (!out_path.empty()) {
        write_text_file(out_path, record);
    } else {
        std::cout << record;
    }
    std::cout << "Tn = " << fmt_double(result.tn) << "\n"
              << "p_value = " << fmt_double(result.p_value) << "\n";

    manifest.write();
    return 0;
}

int dispatch_baseline(const std::string& data_path, std::vector<std::string> methods,
                      const std::string& manifest_path) {
    ManifestWriter manifest{"baseline", manifest_path, nlohmann::json::object()};

    const CsvData csv = read_csv(data_path);
    std::vector<std::string> labels;
    const std::vector<Mat> groups = groups_from_csv(csv, &labels);

    if (methods.empty()) {
        methods = csv.p == 1 ? std::vector<std::string>{"KW", "ANOVA"}
                             : std::vector<std::string>{"KW", "MANOVA"};
    }

    manifest.config = nlohmann::json{{"data", data_path}, {"methods", methods}, {"p", csv.p}};

    for (const std::string& method : methods) {
        double p_value;
        if (method == "KW") {
            p_value = kw_multivariate(groups);
        } else if (method == "ANOVA") {
            if (csv.p != 1)
                throw Error(ErrorKind::config, "ANOVA baseline requires univariate data");
            std::vector<std::vector<double>> cols;
            for (const Mat& g : groups) {
                std::vector<double> col(g.rows());
                for (std::size_t r = 0; r < g.rows(); ++r) col[r] = g(r, 0);
                cols.push_back(std::move(col));
            }
            p_value = anova_oneway(cols).p_value;
        } else if (method == "MANOVA") {
            p_value = manova_pillai(groups).p_value;
        } else {
            throw Error(ErrorKind::config, "unknown baseline method '" + method + "'");
        }
        std::cout << method << "," << fmt_double(p_value) << "\n";
    }

    manifest.write();
    return 0;
}

int dispatch_simulate(const SimulationConfig& config, const nlohmann::json& file_values,
                      const nlohmann::json& flag_overrides, const std::string& cache_dir,
                      const std::string& out_path, const std::string& manifest_path) {
    ManifestWriter manifest{"simulate", manifest_path, simulation_config_json(config)};
    manifest.seed = config.seed;
    manifest.extra["config_file_values"] = file_values;
    manifest.extra["flag_overrides"] = flag_overrides;
    manifest.extra["output"] = out_path;

    const ResultsTable table = monte_carlo(config, cache_dir, &manifest.cache);
    write_results_csv(table, out_path);

    std::cout << "wrote " << table.rows.size() << " result rows to " << out_path << "\n";
    manifest.write();
    return 0;
}

int dispatch_mvn(int dim, const std::vector<double>& upper, const std::vector<double>& corr,
                 double tol, std::uint64_t seed, const std::string& manifest_path) {
    if (dim < 1 || dim > 4) throw Error(ErrorKind::config, "--dim must be in 1..4");
    if (static_cast<int>(upper.size()) != dim)
        throw Error(ErrorKind::config, "--upper must supply exactly dim values");

    OrthantQuery q;
    q.dim = dim;
    q.tol = tol;
    q.seed = seed;
    q.corr = CorrelationMatrix::identity(dim);
    for (int i = 0; i < dim; ++i) q.upper[static_cast<std::size_t>(i)] = upper[static_cast<std::size_t>(i)];

    const std::size_t full = static_cast<std::size_t>(dim) * dim;
    const std::size_t lower_tri = static_cast<std::size_t>(dim) * (dim - 1) / 2;
    if (corr.size() == full) {
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                q.corr.set(i, j, corr[static_cast<std::size_t>(i) * dim + j]);
    } else if (corr.size() == lower_tri) {
        std::size_t idx = 0;
        for (int i = 1; i < dim; ++i)
            for (int j = 0; j < i; ++j) {
                q.corr.set(i, j, corr[idx]);
                q.corr.set(j, i, corr[idx]);
                ++idx;
            }
    } else if (!(corr.empty() && dim == 1)) {
        throw Error(ErrorKind::config,
                    "--corr must supply dim*dim row-major values or the strict lower triangle");
    }

    ManifestWriter manifest{"mvn", manifest_path,
                            nlohmann::json{{"dim", dim},
                                           {"upper", upper},
                                           {"corr", corr},
                                           {"tol", tol},
                                           {"seed", seed}}};
    manifest.seed = seed;

    const double prob = mvn_cdf(q);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", prob);
    std::cout << buf << "\n";

    manifest.extra["probability"] = buf;
    manifest.write();
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"kernel-smoothed spatial Cramer-von Mises tests on lattice data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    // --h is the bandwidth everywhere, so help is long-form only
    app.set_help_flag("--help", "print help");

    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: hardware parallelism)");
    std::string cache_dir = default_cache_dir();
    app.add_option("--cache-dir", cache_dir, "calibration cache directory");
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "run manifest path (default <subcommand>.manifest.json)");

    // calibrate
    CalibrationConfig calib_config;
    std::string calib_kernel = "gaussian";
    CLI::App* cmd_calibrate = app.add_subcommand("calibrate", "compute and cache (a, nu) for one configuration");
    cmd_calibrate->set_help_flag("--help", "print help");
    add_calibration_flags(cmd_calibrate, calib_config, calib_kernel);

    // test
    CLI::App* cmd_test = app.add_subcommand("test", "run the spatial CvM test on a CSV dataset");
    cmd_test->set_help_flag("--help", "print help");
    std::string test_data, test_calibration, test_out;
    cmd_test->add_option("--data", test_data, "input CSV (field,x,y,v1[,v2])")->required();
    cmd_test->add_option("--calibration", test_calibration, "calibration cache file");
    cmd_test->add_option("--out", test_out, "write the result record to this file");
    CalibrationConfig test_config;
    std::string test_kernel = "gaussian";
    add_calibration_flags(cmd_test, test_config, test_kernel);

    // baseline
    CLI::App* cmd_baseline = app.add_subcommand("baseline", "run the classical baselines on a CSV dataset");
    cmd_baseline->set_help_flag("--help", "print help");
    std::string baseline_data, baseline_methods;
    cmd_baseline->add_option("--data", baseline_data, "input CSV")->required();
    cmd_baseline->add_option("--methods", baseline_methods, "comma list: KW,ANOVA,MANOVA");

    // simulate
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo size/power study");
    cmd_simulate->set_help_flag("--help", "print help");
    std::string sim_config_path, sim_out = "spatial_rank_results.csv";
    cmd_simulate->add_option("--config", sim_config_path, "key = value config file");
    cmd_simulate->add_option("--out", sim_out, "output CSV path");
    SimulationConfig sim_flags; // only flags with count() > 0 are applied
    std::string sim_kernel, sim_methods, sim_phis, sim_deltas, sim_s0;
    CLI::Option* opt_K = cmd_simulate->add_option("--K", sim_flags.K, "number of fields");
    CLI::Option* opt_grid = cmd_simulate->add_option("--grid-size", sim_flags.grid_size, "lattice points per axis");
    CLI::Option* opt_p = cmd_simulate->add_option("--p", sim_flags.p, "variables per site (1 or 2)");
    CLI::Option* opt_reps = cmd_simulate->add_option("--n-replicates", sim_flags.n_replicates, "Monte Carlo replicates");
    CLI::Option* opt_alpha = cmd_simulate->add_option("--alpha", sim_flags.alpha, "nominal level");
    CLI::Option* opt_phi = cmd_simulate->add_option("--phi", sim_phis, "comma list of spatial ranges");
    CLI::Option* opt_delta = cmd_simulate->add_option("--delta", sim_deltas, "comma list of shifts");
    CLI::Option* opt_rho = cmd_simulate->add_option("--rho", sim_flags.rho, "within-site correlation");
    CLI::Option* opt_h = cmd_simulate->add_option("--h", sim_flags.h, "kernel bandwidth");
    CLI::Option* opt_s0 = cmd_simulate->add_option("--s0", sim_s0, "reference point 'x, y'");
    CLI::Option* opt_m = cmd_simulate->add_option("--m-per-dim", sim_flags.m_per_dim, "thresholds per dimension");
    CLI::Option* opt_seed = cmd_simulate->add_option("--seed", sim_flags.seed, "base seed");
    CLI::Option* opt_methods = cmd_simulate->add_option("--methods", sim_methods, "comma list of methods");
    CLI::Option* opt_kernel = cmd_simulate->add_option("--kernel", sim_kernel, "gaussian|epanechnikov");
    CLI::Option* opt_tol = cmd_simulate->add_option("--mvn-tol", sim_flags.mvn_tol, "MVN tolerance");

    // mvn
    CLI::App* cmd_mvn = app.add_subcommand("mvn", "evaluate one multivariate normal orthant probability");
    cmd_mvn->set_help_flag("--help", "print help");
    int mvn_dim = 0;
    std::vector<double> mvn_upper, mvn_corr;
    double mvn_tol = 1e-6;
    std::uint64_t mvn_seed = 20260301ULL;
    cmd_mvn->add_option("--dim", mvn_dim, "dimension (1..4)")->required();
    cmd_mvn->add_option("--upper", mvn_upper, "upper bounds")->required()->expected(-1);
    cmd_mvn->add_option("--corr", mvn_corr, "correlation entries (row-major or lower triangle)")->expected(-1);
    cmd_mvn->add_option("--tol", mvn_tol, "absolute tolerance");
    cmd_mvn->add_option("--seed", mvn_seed, "integration seed");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
            std::cerr << nlohmann::json{{"error", {{"kind", "config"}, {"message", e.what()}}}}.dump()
                      << "\n";
            return 2;
        }

        if (threads > 0) set_max_threads(threads);

        if (cmd_calibrate->parsed()) {
            calib_config.kernel = kernel_from_name(calib_kernel);
            if (manifest_path.empty()) manifest_path = "calibrate.manifest.json";
            return dispatch_calibrate(calib_config, cache_dir, manifest_path);
        }
        if (cmd_test->parsed()) {
            test_config.kernel = kernel_from_name(test_kernel);
            bool has_flags = false;
            for (const CLI::Option* opt : cmd_test->get_options()) {
                const std::string name = opt->get_name();
                if (name != "--data" && name != "--calibration" && name != "--out" &&
                    opt->count() > 0)
                    has_flags = true;
            }
            if (manifest_path.empty()) manifest_path = "test.manifest.json";
            return dispatch_test(test_data, test_calibration, test_config, has_flags, cache_dir,
                                 test_out, manifest_path);
        }
        if (cmd_baseline->parsed()) {
            std::vector<std::string> methods;
            if (!baseline_methods.empty()) methods = split_list(baseline_methods);
            if (manifest_path.empty()) manifest_path = "baseline.manifest.json";
            return dispatch_baseline(baseline_data, methods, manifest_path);
        }
        if (cmd_simulate->parsed()) {
            SimulationConfig config; // defaults
            nlohmann::json file_values = nlohmann::json::object();
            if (!sim_config_path.empty()) {
                const auto kv = parse_config_file(sim_config_path);
                apply_simulation_config(config, kv);
                for (const auto& [k, v] : kv) file_values[k] = v;
            }
            nlohmann::json overrides = nlohmann::json::object();
            auto applied = [&overrides](const CLI::Option* opt, auto&& value, const char* key) {
                if (opt->count() > 0) {
                    overrides[key] = value;
                    return true;
                }
                return false;
            };
            if (applied(opt_K, sim_flags.K, "K")) config.K = sim_flags.K;
            if (applied(opt_grid, sim_flags.grid_size, "grid_size")) config.grid_size = sim_flags.grid_size;
            if (applied(opt_p, sim_flags.p, "p")) config.p = sim_flags.p;
            if (applied(opt_reps, sim_flags.n_replicates, "n_replicates")) config.n_replicates = sim_flags.n_replicates;
            if (applied(opt_alpha, sim_flags.alpha, "alpha")) config.alpha = sim_flags.alpha;
            if (applied(opt_phi, sim_phis, "phi")) config.phis = to_double_list(sim_phis, "phi");
            if (applied(opt_delta, sim_deltas, "delta")) config.deltas = to_double_list(sim_deltas, "delta");
            if (applied(opt_rho, sim_flags.rho, "rho")) config.rho = sim_flags.rho;
            if (applied(opt_h, sim_flags.h, "h")) config.h = sim_flags.h;
            if (applied(opt_s0, sim_s0, "s0")) {
                std::vector<double> s0 = to_double_list(sim_s0, "s0");
                if (s0.size() != 2) throw Error(ErrorKind::config, "--s0 expects 'x, y'");
                config.s0x = s0[0];
                config.s0y = s0[1];
            }
            if (applied(opt_m, sim_flags.m_per_dim, "m_per_dim")) config.m_per_dim = sim_flags.m_per_dim;
            if (applied(opt_seed, sim_flags.seed, "seed")) config.seed = sim_flags.seed;
            if (applied(opt_methods, sim_methods, "methods")) config.methods = split_list(sim_methods);
            if (applied(opt_kernel, sim_kernel, "kernel")) config.kernel = kernel_from_name(sim_kernel);
            if (applied(opt_tol, sim_flags.mvn_tol, "mvn_tol")) config.mvn_tol = sim_flags.mvn_tol;

            if (manifest_path.empty()) manifest_path = sim_out + ".manifest.json";
            return dispatch_simulate(config, file_values, overrides, cache_dir, sim_out,
                                     manifest_path);
        }
        if (cmd_mvn->parsed()) {
            if (manifest_path.empty()) manifest_path = "mvn.manifest.json";
            return dispatch_mvn(mvn_dim, mvn_upper, mvn_corr, mvn_tol, mvn_seed, manifest_path);
        }
        return 2;
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::config ? "config"
                           : e.kind() == ErrorKind::data ? "data"
                                                         : "numeric";
        std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", e.what()}}}}.dump()
                  << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 1;
    }
}

} // namespace spcvm

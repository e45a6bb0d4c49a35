#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rankwatch::cli {

inline constexpr const char* tool_version = "0.1.0";

/// Bad flags or flag combinations; exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data; exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DetectParams {
    std::string input;
    std::string format = "flow";  // flow | dense
    std::string metric = "syn";
    std::string method = "toprank";  // toprank | hashrank | full
    double delta = 1.0;
    int window = 60;
    int top = 10;
    int keep = 1;
    double alpha = 1e-3;
    int budget = 0;  // 0: use the M' rule
    int rows = 8;
    int buckets = 17;
    std::uint64_t seed = 1;
    std::string on_error = "abort";  // abort | skip
    int threads = 1;
};

struct SimulateParams {
    int dim = 1000;
    int bins = 60;
    int change_at = 35;
    double factor = 7.0;
    int target_rank = 500;
    double pareto_shape = 2.5;
    double pareto_scale = 0.72;
    std::uint64_t seed = 1;
};

struct RocParams {
    SimulateParams data;
    std::string method = "all";  // all | toprank | hashrank | full
    int runs = 100;
    int budget = 136;
    int top = 50;
    int rows = 8;
    int buckets = 17;
    std::vector<double> thresholds;  // empty: default grid
    int threads = 1;
};

struct FisherParams {
    double theta = 0.5;
    std::vector<int> dims{50, 200, 800};
    std::string density = "beta33";
    int mc = 200000;
    std::uint64_t seed = 1;
    int grid = 0;         // 0: sized from D and theta
    double dtheta = 0.0;  // 0: 1e-4 * theta
    int threads = 1;
};

void to_json(nlohmann::json& j, const DetectParams& p);
void from_json(const nlohmann::json& j, DetectParams& p);
void to_json(nlohmann::json& j, const SimulateParams& p);
void from_json(const nlohmann::json& j, SimulateParams& p);
void to_json(nlohmann::json& j, const RocParams& p);
void from_json(const nlohmann::json& j, RocParams& p);
void to_json(nlohmann::json& j, const FisherParams& p);
void from_json(const nlohmann::json& j, FisherParams& p);

/// Throw UsageError on invalid values, before any data is read.
void validate(const DetectParams& p);
void validate(const SimulateParams& p);
void validate(RocParams& p);
void validate(const FisherParams& p);

void run_detect(const DetectParams& p, std::ostream& out);
void run_simulate(const SimulateParams& p, std::ostream& out);
void run_roc(const RocParams& p, std::ostream& out);
void run_fisher(const FisherParams& p, std::ostream& out);

/// Everything needed to rerun a command and get the same bytes.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& params,
                             const std::string& output);

/// Re-executes the command recorded in a manifest.
void replay(const nlohmann::json& manifest, std::ostream& out);

/// printf-style %.<digits>g
std::string format_g(double v, int digits = 6);

}  // namespace rankwatch::cli

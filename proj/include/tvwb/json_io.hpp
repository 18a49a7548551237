#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tvwb/birkhoff.hpp"
#include "tvwb/dynsim.hpp"
#include "tvwb/markov.hpp"
#include "tvwb/tree.hpp"

namespace tvwb {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json load_json_file(const std::string& path);
std::string read_file_bytes(const std::string& path);

// Every input document carries {"schema": 1}.
void require_schema(const nlohmann::json& doc);

// Numeric grid entries may be JSON numbers or fraction/decimal strings;
// fractions are kept exact so weight classes never depend on rounding.
struct ParsedGrid {
    int rows = 0, cols = 0;
    std::vector<double> values;
    std::vector<Rational> exact; // empty unless every entry parsed exactly
};
ParsedGrid parse_grid(const nlohmann::json& grid);

ProbVector parse_prob_vector(const nlohmann::json& arr);
StochasticMatrix parse_stochastic_doc(const nlohmann::json& doc,
                                      std::vector<std::string>* labels = nullptr);
SystemDescriptor parse_system_doc(const nlohmann::json& doc);
TreeName parse_tree_name_doc(const nlohmann::json& doc);
BlockCoupling parse_block_coupling_doc(const nlohmann::json& doc);

nlohmann::json matrix_to_json(const std::vector<double>& m, int rows, int cols);

// Envelope shared by all CLI commands; the results payload is byte-identical
// across reruns with the same inputs, seed and tool version.
struct RunReport {
    std::string command;
    std::string inputs_digest;
    nlohmann::json results;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

nlohmann::json report_to_json(const RunReport& report);

} // namespace tvwb

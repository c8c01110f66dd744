#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "micon/config.hpp"

namespace micon::cli {

inline constexpr const char* kCodeVersion = "0.1.0";

// one accuracy measurement: method x evaluation setting x training seed
struct EvalRow {
    std::string method;
    std::string setting;  // constraint name, with "-raw"/"-post" when both variants run
    uint64_t seed = 0;
    double accuracy = 0.0;
    double chance = 0.0;
    uint64_t n_queries = 0;
    uint64_t n_correct = 0;
};

// inputs for the label-permutation null of one trained seed
struct SeedRetrieval {
    std::vector<std::string> retrieval_labels;
    std::vector<size_t> matched;  // per query: index into retrieval_labels
    std::vector<std::string> query_labels;
};

// Pooled one-sided permutation test: retrieval labels are shuffled
// independently per seed, correct counts summed across seeds, and
// p = (1 + #{null >= observed}) / (rounds + 1).
double permutation_pvalue(const std::vector<SeedRetrieval>& seeds, uint32_t rounds,
                          uint64_t rng_seed);

struct ComparisonCell {
    std::vector<double> per_seed;  // ordered by seed value
    double mean = 0.0, sd = 0.0;
    double chance = 0.0;
    double t_vs_ref = 0.0, p_vs_ref = 1.0;  // one-tailed: reference > this method
    bool has_test = false;
    bool significant = false;  // p_vs_ref < 0.05
    double permutation_p = -1.0;  // < 0 when not computed
};

struct ComparisonReport {
    std::vector<std::string> methods;   // column order
    std::vector<std::string> settings;  // row order
    std::vector<uint64_t> seeds;
    std::string reference;  // method the one-tailed t-tests compare against
    std::map<std::string, std::map<std::string, ComparisonCell>> cells;  // method -> setting
    bool has_anova = false;
    double anova_f = 0.0, anova_p = 0.0;  // pooled micon vs paclr_only contrast

    std::string format_table() const;
    std::string to_json() const;
};

// Aggregates per-seed rows; throws ArtifactError when methods carry
// mismatched seed sets.  permutation_p is keyed by "method|setting".
ComparisonReport build_comparison(const std::vector<EvalRow>& rows,
                                  const std::map<std::string, double>& permutation_p);

// Commands.  All throw the micon error types; run_command maps them to the
// exit-code contract (0 ok, 2 config, 3 training, 4 missing artifact,
// 5 unsatisfiable evaluation).
void cmd_gen_data(const Config& cfg, const std::string& out_dir);
void cmd_train(const Config& cfg, const std::string& out_dir);
void cmd_evaluate(const Config& cfg, const std::string& out_dir);
void cmd_nominate(const Config& cfg, const std::string& out_dir);
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

struct CliOptions {
    std::string command;
    std::string config_path;
    std::vector<std::string> run_dirs;  // `report` positionals
    std::string out_override;
    bool deterministic = false;  // accepted for interface stability; all
                                 // commands are already fully deterministic
    bool has_seed = false;
    uint64_t seed = 0;
};

int run_command(const CliOptions& opt);

}  // namespace micon::cli

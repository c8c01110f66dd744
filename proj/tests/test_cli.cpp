#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "micon/commands.hpp"
#include "micon/config.hpp"
#include "micon/errors.hpp"

using namespace micon;
using cli::CliOptions;
using cli::Config;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("micon_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

using Overrides = std::map<std::string, std::map<std::string, std::string>>;

// desk-sized dataset + two-epoch training: the whole pipeline runs in about a
// second, exercising every artifact the real config produces
std::string mini_cfg(const Overrides& over = {}) {
    Overrides v = {
        {"data",
         {{"n_sources", "2"},
          {"batches_per_source", "4"},
          {"plates_per_batch", "1"},
          {"wells_per_plate", "12"},
          {"fovs_per_well", "2"},
          {"n_compounds", "4"},
          {"control_fraction", "0.34"},
          {"latent_dim", "4"},
          {"feature_dim", "16"},
          {"effect_strength", "1.0"},
          {"treatment_strength", "0.1"},
          {"phenotype_strength", "0.4"},
          {"imaging_strength", "0.2"},
          {"noise_sd", "0.1"},
          {"structure_signal", "0.8"},
          {"seed", "5"}}},
        {"split",
         {{"protocol", "id_by_batch"},
          {"query_frac", "0.3"},
          {"val_batches_per_source", "1"},
          {"seed", "11"}}},
        {"train",
         {{"methods", "paclr_only"},
          {"seeds", "1"},
          {"tau", "0.1"},
          {"batch_size", "32"},
          {"control_fraction", "0.5"},
          {"epochs", "2"},
          {"fp_bits", "2048"},
          {"image_embed", "32"},
          {"image_hidden", "32"},
          {"compound_hidden", "32"},
          {"fusion_hidden", "32"},
          {"proj_hidden", "32"},
          {"proj_dim", "16"},
          {"lr", "0.001"},
          {"weight_decay", "0.01"},
          {"warmup_steps", "2"},
          {"clip_norm", "1.0"},
          {"checkpoint_every", "3"},
          {"cf_weight", "1.0"}}},
        {"eval",
         {{"constraints", "none,nsb"},
          {"postprocess", "off"},
          {"include_controls", "false"},
          {"query_mode", "real"},
          {"permutation_rounds", "19"},
          {"permutation_seed", "3"}}},
    };
    for (const auto& [sec, kv] : over)
        for (const auto& [k, val] : kv) v[sec][k] = val;
    std::string text;
    for (const auto& [sec, kv] : v) {
        text += "[" + sec + "]\n";
        for (const auto& [k, val] : kv) text += k + " = " + val + "\n";
    }
    return text;
}

int run(const std::string& command, const fs::path& cfg_path, const fs::path& out,
        std::vector<std::string> run_dirs = {}) {
    CliOptions opt;
    opt.command = command;
    opt.config_path = cfg_path.string();
    opt.out_override = out.string();
    opt.run_dirs = std::move(run_dirs);
    return cli::run_command(opt);
}

}  // namespace

TEST_CASE("config: sections, comments, quotes, case folding") {
    const char* text =
        "# leading comment\n"
        "[Data]\n"
        "Seed = 42   # trailing comment\n"
        "name = \"a # quoted, spaced value\"\n"
        "\n"
        "[eval]\n"
        "shrink=0.25\n"
        "empty =\n";
    Config c = Config::parse_string(text, "<test>");
    CHECK(c.uint("data", "seed") == 42);
    CHECK(c.str("data", "name") == "a # quoted, spaced value");
    CHECK(c.num("eval", "shrink") == doctest::Approx(0.25));
    CHECK(c.str("eval", "empty") == "");
    CHECK(c.has("data", "seed"));
    CHECK_FALSE(c.has("data", "absent"));
    CHECK(c.str("data", "absent", "dflt") == "dflt");
}

TEST_CASE("config: typed getter diagnostics name the field") {
    Config c = Config::parse_string("[data]\nx = abc\nneg = -3\nflag = maybe\n", "<test>");
    CHECK_THROWS_WITH_AS(c.num("data", "x"), "field data.x: 'abc' is not a number", ConfigError);
    CHECK_THROWS_WITH_AS(c.uint("data", "neg"),
                         "field data.neg: '-3' is not a non-negative integer", ConfigError);
    CHECK_THROWS_WITH_AS(c.boolean("data", "flag", true),
                         "field data.flag: 'maybe' is not a boolean", ConfigError);
    CHECK_THROWS_WITH_AS(c.uint("data", "seed"), "missing field data.seed", ConfigError);
    CHECK(c.uint("data", "seed", 9) == 9);
    Config b = Config::parse_string("[f]\nt = on\nf = no\n", "<test>");
    CHECK(b.boolean("f", "t", false));
    CHECK_FALSE(b.boolean("f", "f", true));
}

TEST_CASE("config: comma lists trim whitespace") {
    Config c = Config::parse_string("[t]\nms = a, b ,c\nseeds = 3,1,2\nempty =\n", "<test>");
    CHECK(c.list("t", "ms", "") == std::vector<std::string>{"a", "b", "c"});
    CHECK(c.uint_list("t", "seeds", "") == std::vector<uint64_t>{3, 1, 2});
    CHECK(c.list("t", "empty", "x").empty());
    CHECK(c.list("t", "absent", "p,q") == std::vector<std::string>{"p", "q"});
    CHECK_THROWS_AS(c.uint_list("t", "ms", ""), ConfigError);
}

TEST_CASE("config: malformed input diagnostics") {
    CHECK_THROWS_AS(Config::parse_string("[bad_section]\n", "<t>"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("key = 1\n", "<t>"), ConfigError);       // no section
    CHECK_THROWS_AS(Config::parse_string("[a\nk = 1\n", "<t>"), ConfigError);     // missing ]
    CHECK_THROWS_AS(Config::parse_string("[a]\njust a line\n", "<t>"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("[a]\nk = \"v\" junk\n", "<t>"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("[]\nk = 1\n", "<t>"), ConfigError);
}

TEST_CASE("config: environment overrides split at the first underscore") {
    ::setenv("MICON_DATA_SEED", "99", 1);
    ::setenv("MICON_TRAIN_FP_BITS", "1024", 1);  // key itself may contain '_'
    ::setenv("MICON_EXTRA_NEWKEY", "7", 1);      // may introduce a fresh section
    Config c = Config::parse_string("[data]\nseed = 1\n", "<test>");
    ::unsetenv("MICON_DATA_SEED");
    ::unsetenv("MICON_TRAIN_FP_BITS");
    ::unsetenv("MICON_EXTRA_NEWKEY");
    CHECK(c.uint("data", "seed") == 99);
    CHECK(c.uint("train", "fp_bits") == 1024);
    CHECK(c.uint("extra", "newkey") == 7);
}

TEST_CASE("config: check_known rejects stray keys, content_hash tracks content") {
    Config c = Config::parse_string("[data]\nseed = 1\ntypo_key = 2\n", "<test>");
    CHECK_NOTHROW(c.check_known("data", {"seed", "typo_key"}));
    CHECK_THROWS_AS(c.check_known("data", {"seed"}), ConfigError);
    Config a = Config::parse_string("[data]\nseed = 1\n", "<a>");
    Config b = Config::parse_string("# comment\n[data]\n  seed   =  1\n", "<b>");
    Config d = Config::parse_string("[data]\nseed = 2\n", "<d>");
    CHECK(a.content_hash() == b.content_hash());  // normalization-invariant
    CHECK(a.content_hash() != d.content_hash());
}

TEST_CASE("permutation p-value: reproducible, bounded, direction-sensitive") {
    cli::SeedRetrieval s;
    s.retrieval_labels = {"A", "A", "B", "B", "C", "C", "D", "D"};
    s.query_labels = {"A", "B", "C", "D"};
    s.matched = {1, 3, 5, 7};  // all correct; chance of that under the null is 4!/(8!/2^4)
    const double p_good = cli::permutation_pvalue({s}, 999, 7);
    CHECK(p_good == cli::permutation_pvalue({s}, 999, 7));
    CHECK(p_good >= 1.0 / 1000);
    CHECK(p_good <= 1.0);
    cli::SeedRetrieval w = s;
    w.matched = {3, 5, 7, 1};  // all wrong
    const double p_bad = cli::permutation_pvalue({w}, 999, 7);
    CHECK(p_good < 0.05);
    CHECK(p_bad > 0.5);
}

TEST_CASE("comparison report: ordering, reference tests, seed-set checks") {
    std::vector<cli::EvalRow> rows;
    auto add = [&](const std::string& m, const std::string& s, uint64_t seed, double acc) {
        rows.push_back({m, s, seed, acc, 0.125, 100, static_cast<uint64_t>(acc * 100)});
    };
    // insertion order defines the table order; rows arrive seed-shuffled
    for (uint64_t seed : {3, 1, 2}) add("micon", "NSB", seed, 0.80 + 0.01 * seed);
    for (uint64_t seed : {1, 2, 3}) add("simclr", "NSB", seed, 0.40 + 0.01 * seed);
    // equal means with spread: the reference-vs-method test must not fire
    const double mic_none[] = {0.84, 0.85, 0.86}, sim_none[] = {0.86, 0.85, 0.84};
    for (uint64_t seed : {1, 2, 3}) add("micon", "none", seed, mic_none[seed - 1]);
    for (uint64_t seed : {1, 2, 3}) add("simclr", "none", seed, sim_none[seed - 1]);

    auto rep = cli::build_comparison(rows, {{"micon|NSB", 0.002}});
    CHECK(rep.reference == "micon");
    CHECK(rep.methods == std::vector<std::string>{"micon", "simclr"});
    CHECK(rep.settings == std::vector<std::string>{"NSB", "none"});
    CHECK(rep.seeds == std::vector<uint64_t>{1, 2, 3});
    const auto& mic = rep.cells.at("micon").at("NSB");
    std::vector<double> expect;
    for (uint64_t seed : {1, 2, 3}) expect.push_back(0.80 + 0.01 * seed);
    CHECK(mic.per_seed == expect);  // sorted by seed even though rows arrived shuffled
    CHECK(mic.mean == doctest::Approx(0.82));
    CHECK(mic.permutation_p == doctest::Approx(0.002));
    CHECK_FALSE(mic.has_test);  // reference column carries no self-test
    const auto& sim = rep.cells.at("simclr").at("NSB");
    CHECK(sim.has_test);
    CHECK(sim.p_vs_ref < 0.05);
    CHECK(sim.significant);
    const auto& tied = rep.cells.at("simclr").at("none");
    CHECK(tied.p_vs_ref == doctest::Approx(0.5));  // equal means: t = 0
    CHECK_FALSE(rep.has_anova);   // needs micon AND paclr_only

    const std::string table = rep.format_table();
    CHECK(table.find("micon") != std::string::npos);
    CHECK(table.find("NSB") != std::string::npos);
    const std::string json = rep.to_json();
    CHECK(json.find("\"reference\": \"micon\"") != std::string::npos);
    CHECK(json.find("\"permutation_p\": null") != std::string::npos);  // uncomputed cells

    auto dup = rows;
    dup.push_back(rows[0]);
    CHECK_THROWS_AS(cli::build_comparison(dup, {}), ArtifactError);
    auto skew = rows;
    skew.erase(skew.begin());  // micon loses seed 3 everywhere? no: only one row
    CHECK_THROWS_AS(cli::build_comparison(skew, {}), ArtifactError);
}

TEST_CASE("comparison report: reference falls back to the first method") {
    std::vector<cli::EvalRow> rows;
    rows.push_back({"simclr", "NSB", 1, 0.5, 0.125, 10, 5});
    rows.push_back({"clip", "NSB", 1, 0.6, 0.125, 10, 6});
    auto rep = cli::build_comparison(rows, {});
    CHECK(rep.reference == "simclr");
    CHECK_FALSE(rep.cells.at("clip").at("NSB").has_test);  // single seed: no t-test
}

TEST_CASE("gen-data: artifacts, manifest, byte-level determinism, --seed") {
    const auto dir = fresh_dir("gen");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg());
    REQUIRE(run("gen-data", cfg, dir / "a") == 0);
    REQUIRE(run("gen-data", cfg, dir / "b") == 0);
    CHECK(slurp(dir / "a/data/wells.csv") == slurp(dir / "b/data/wells.csv"));
    CHECK(slurp(dir / "a/data/compounds.csv") == slurp(dir / "b/data/compounds.csv"));
    CHECK(slurp(dir / "a/data/ground_truth.tsv") == slurp(dir / "b/data/ground_truth.tsv"));

    const std::string manifest = slurp(dir / "a/manifest-gen-data.txt");
    CHECK(manifest.find("command=gen-data") != std::string::npos);
    CHECK(manifest.find("config_hash=0x") != std::string::npos);
    CHECK(manifest.find("code_version=") != std::string::npos);

    // --seed overrides data.seed: different data, reproducible across runs
    CliOptions opt;
    opt.command = "gen-data";
    opt.config_path = cfg.string();
    opt.out_override = (dir / "c").string();
    opt.has_seed = true;
    opt.seed = 99;
    REQUIRE(cli::run_command(opt) == 0);
    CHECK(slurp(dir / "c/data/wells.csv") != slurp(dir / "a/data/wells.csv"));
    const auto cfg99 = dir / "run99.toml";
    write_file(cfg99, mini_cfg({{"data", {{"seed", "99"}}}}));
    REQUIRE(run("gen-data", cfg99, dir / "d") == 0);
    CHECK(slurp(dir / "c/data/wells.csv") == slurp(dir / "d/data/wells.csv"));
}

TEST_CASE("pipeline: train, evaluate, nominate, report artifacts") {
    const auto dir = fresh_dir("pipe");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg({{"train", {{"seeds", "1,2"}}},
                              {"nominate", {{"top_frac", "0.5"}, {"min_sources", "2"}}}}));
    const auto out = dir / "run";
    REQUIRE(run("gen-data", cfg, out) == 0);
    REQUIRE(run("train", cfg, out) == 0);

    CHECK(fs::exists(out / "split.tsv"));
    for (int seed : {1, 2}) {
        const auto ck = out / ("checkpoints/paclr_only-seed" + std::to_string(seed) + ".ckpt");
        CHECK(fs::exists(ck));
        const std::string log =
            slurp(out / ("logs/paclr_only-seed" + std::to_string(seed) + ".log"));
        CHECK(log.rfind("step\tlr\ttrain_loss\tval_loss\n", 0) == 0);
        CHECK(line_count(log) >= 3);  // header + step-0 val + final val
    }

    REQUIRE(run("evaluate", cfg, out) == 0);
    const std::string acc = slurp(out / "reports/accuracies.tsv");
    CHECK(acc.rfind("method\tsetting\tseed\taccuracy\tchance\tn_queries\tn_correct\n", 0) == 0);
    CHECK(line_count(acc) == 1 + 2 * 2);  // header + 1 method x 2 settings x 2 seeds
    CHECK(fs::exists(out / "reports/permutation.tsv"));
    CHECK(fs::exists(out / "reports/paclr_only-seed1-NSB.json"));
    CHECK(fs::exists(out / "comparison.txt"));
    const std::string cmp_json = slurp(out / "comparison.json");
    CHECK(cmp_json.find("\"reference\": \"paclr_only\"") != std::string::npos);

    REQUIRE(run("nominate", cfg, out) == 0);
    const std::string nom = slurp(out / "nominated.tsv");
    CHECK(nom.rfind("compound_id\tqualifying_sources\tmean_distance\tdist_S0\tdist_S1\n", 0) ==
          0);
    CHECK(line_count(nom) >= 2);  // top_frac 0.5 of 4 compounds -> 2 picks

    CliOptions rep;
    rep.command = "report";
    rep.run_dirs = {out.string()};
    rep.out_override = (dir / "summary").string();
    REQUIRE(cli::run_command(rep) == 0);
    CHECK(fs::exists(dir / "summary/comparison.txt"));
    CHECK(fs::exists(dir / "summary/plot_data.json"));
}

TEST_CASE("pipeline: training is deterministic at the artifact level") {
    const auto dir = fresh_dir("det");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg());
    for (const char* sub : {"a", "b"}) {
        REQUIRE(run("gen-data", cfg, dir / sub) == 0);
        REQUIRE(run("train", cfg, dir / sub) == 0);
    }
    CHECK(slurp(dir / "a/checkpoints/paclr_only-seed1.ckpt") ==
          slurp(dir / "b/checkpoints/paclr_only-seed1.ckpt"));
    CHECK(slurp(dir / "a/logs/paclr_only-seed1.log") == slurp(dir / "b/logs/paclr_only-seed1.log"));
}

TEST_CASE("exit codes: configuration problems map to 2") {
    const auto dir = fresh_dir("exit2");
    const auto no_seed = dir / "no_seed.toml";
    write_file(no_seed, "[data]\nn_sources = 2\n[output]\ndir = \"x\"\n");
    CHECK(run("gen-data", no_seed, dir / "o1") == 2);  // missing data.seed

    const auto typo = dir / "typo.toml";
    write_file(typo, mini_cfg({{"data", {{"wels_per_plate", "12"}}}}));
    CHECK(run("gen-data", typo, dir / "o2") == 2);  // unknown key rejected

    const auto bad_tau = dir / "bad_tau.toml";
    write_file(bad_tau, mini_cfg({{"train", {{"tau", "-1"}}}}));
    REQUIRE(run("gen-data", bad_tau, dir / "o3") == 0);
    CHECK(run("train", bad_tau, dir / "o3") == 2);  // hyperparameter validation

    CliOptions opt;
    opt.command = "frobnicate";
    opt.config_path = bad_tau.string();
    opt.out_override = (dir / "o4").string();
    CHECK(cli::run_command(opt) == 2);  // unknown command

    CHECK(run("gen-data", dir / "missing.toml", dir / "o5") == 2);  // unreadable config
}

TEST_CASE("exit codes: missing or corrupt artifacts map to 4") {
    const auto dir = fresh_dir("exit4");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg());
    CHECK(run("train", cfg, dir / "empty") == 4);     // no generated data
    CHECK(run("evaluate", cfg, dir / "empty2") == 4); // no split file

    const auto out = dir / "run";
    REQUIRE(run("gen-data", cfg, out) == 0);
    REQUIRE(run("train", cfg, out) == 0);
    write_file(out / "checkpoints/paclr_only-seed1.ckpt", "MICN");  // truncated
    CHECK(run("evaluate", cfg, out) == 4);

    CliOptions rep;
    rep.command = "report";
    rep.run_dirs = {(dir / "empty3").string()};
    rep.out_override = (dir / "sum").string();
    CHECK(cli::run_command(rep) == 4);  // run dir without evaluation results
}

TEST_CASE("exit codes: unsatisfiable evaluation maps to 5") {
    const auto dir = fresh_dir("exit5");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg({{"data", {{"n_sources", "1"}}},
                              {"eval", {{"constraints", "nss"}}}}));
    const auto out = dir / "run";
    REQUIRE(run("gen-data", cfg, out) == 0);
    REQUIRE(run("train", cfg, out) == 0);
    CHECK(run("evaluate", cfg, out) == 5);  // NSS impossible with one source
}

TEST_CASE("nominate: empty selection still writes the header") {
    const auto dir = fresh_dir("nom");
    const auto cfg = dir / "run.toml";
    write_file(cfg, mini_cfg({{"nominate", {{"min_sources", "5"}}}}));  // > n_sources
    const auto out = dir / "run";
    REQUIRE(run("gen-data", cfg, out) == 0);
    REQUIRE(run("nominate", cfg, out) == 0);
    const std::string nom = slurp(out / "nominated.tsv");
    CHECK(nom.rfind("compound_id\t", 0) == 0);
    CHECK(line_count(nom) == 1);
}

#include <cstdio>
#include <cstring>
#include <string>

#include "micon/commands.hpp"

namespace {

constexpr const char* kUsage = R"(usage: micon <command> [options]

commands:
  gen-data    generate a synthetic dataset (tables + ground-truth manifest)
  train       build the split and train the configured methods x seeds
  evaluate    embed, post-process, run 1-NN retrieval, write reports
  nominate    rank compounds by replicate distance to plate-matched controls
  report      merge evaluations from run dirs into one comparison table

options:
  --config <path>    run configuration (required except for `report`)
  --out <dir>        output directory (overrides [output] dir)
  --seed <u64>       override data.seed and train.seeds with a single seed
  --deterministic    accepted for interface stability; every command is
                     already deterministic given identical inputs
  --help             this text

`report` takes run directories as positional arguments:
  micon report runs/micon runs/simclr --out runs/summary

exit codes: 0 ok, 2 config error, 3 training failure, 4 missing artifact,
5 unsatisfiable evaluation.
)";

bool parse_u64(const char* s, uint64_t& out) {
    char* end = nullptr;
    if (!s || *s == '\0' || *s == '-') return false;
    out = std::strtoull(s, &end, 10);
    return end && *end == '\0';
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fputs(kUsage, stderr);
        return 2;
    }
    micon::cli::CliOptions opt;
    opt.command = argv[1];
    if (opt.command == "--help" || opt.command == "-h" || opt.command == "help") {
        std::fputs(kUsage, stdout);
        return 0;
    }

    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&](const char* flag) -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "missing value for %s\n", flag);
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--config") {
            opt.config_path = next("--config");
        } else if (arg == "--out") {
            opt.out_override = next("--out");
        } else if (arg == "--seed") {
            if (!parse_u64(next("--seed"), opt.seed)) {
                std::fprintf(stderr, "--seed expects an unsigned integer\n");
                return 2;
            }
            opt.has_seed = true;
        } else if (arg == "--deterministic") {
            opt.deterministic = true;
        } else if (arg == "--help" || arg == "-h") {
            std::fputs(kUsage, stdout);
            return 0;
        } else if (!arg.empty() && arg[0] != '-' && opt.command == "report") {
            opt.run_dirs.push_back(arg);
        } else {
            std::fprintf(stderr, "unknown argument '%s'\n\n%s", arg.c_str(), kUsage);
            return 2;
        }
    }

    const bool known = opt.command == "gen-data" || opt.command == "train" ||
                       opt.command == "evaluate" || opt.command == "nominate" ||
                       opt.command == "report";
    if (!known) {
        std::fprintf(stderr, "unknown command '%s'\n\n%s", opt.command.c_str(), kUsage);
        return 2;
    }
    if (opt.command == "report") {
        if (opt.run_dirs.empty()) {
            std::fprintf(stderr, "report needs at least one run directory\n");
            return 2;
        }
    } else if (opt.config_path.empty()) {
        std::fprintf(stderr, "%s needs --config <path>\n", opt.command.c_str());
        return 2;
    }
    return micon::cli::run_command(opt);
}

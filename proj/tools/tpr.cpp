// Command-line driver: run story files through the full tensor engine, the
// simplified matrix engine, the path-finding model, or the brute-force
// oracle, and print decoded answers.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpr/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tensor product reasoning over logical-form stories"};
    app.require_subcommand(1);

    tpr::RunConfig cfg;
    std::vector<std::string> files;
    std::string mode = "full", repr = "factored", format = "text";

    CLI::App* run = app.add_subcommand("run", "run story files");
    run->add_option("files", files, "story files (.lf)")->required()->expected(-1);
    run->add_option("--mode", mode, "full | simplified | pathfind | oracle")
        ->check(CLI::IsMember({"full", "simplified", "pathfind", "oracle"}));
    run->add_option("--dim", cfg.dim, "embedding dimension (default 32)");
    run->add_option("--seed", cfg.seed, "RNG seed (default 0)");
    run->add_option("--repr", repr, "factored | dense")
        ->check(CLI::IsMember({"factored", "dense"}));
    run->add_option("--threshold", cfg.threshold, "decode threshold (default 0.5)");
    run->add_option("--max-path-len", cfg.max_path_len, "path search cap (default 2)");
    run->add_option("--format", format, "text | jsonl")
        ->check(CLI::IsMember({"text", "jsonl"}));
    run->add_flag("--check-oracle", cfg.check_oracle,
                  "also run the brute-force oracle and report MATCH/MISMATCH");
    run->add_option("--jobs", cfg.jobs, "process story files concurrently");

    CLI11_PARSE(app, argc, argv);

    static const std::map<std::string, tpr::RunConfig::Mode> modes{
        {"full", tpr::RunConfig::Mode::full},
        {"simplified", tpr::RunConfig::Mode::simplified},
        {"pathfind", tpr::RunConfig::Mode::pathfind},
        {"oracle", tpr::RunConfig::Mode::oracle}};
    cfg.mode = modes.at(mode);
    cfg.repr = repr == "dense" ? tpr::Tensor::Repr::dense : tpr::Tensor::Repr::factored;
    cfg.format = format == "jsonl" ? tpr::RunConfig::Format::jsonl : tpr::RunConfig::Format::text;

    if (const char* env_seed = std::getenv("TPR_SEED"))
        cfg.seed = std::strtoull(env_seed, nullptr, 10);

    return tpr::run_files(cfg, files, std::cout, std::cerr);
}

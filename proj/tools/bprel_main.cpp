// bprel: run relay scenarios and inspect compressed reporting / custody
// artifacts.

#include "commands.hpp"

#include "bprel/errors.hpp"
#include "bprel/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace bprel::cli;

    CLI::App app{"Compressed reporting and custody signalling for BPv7"};
    app.require_subcommand(1);
    app.allow_extras(false);

    RunArgs run_args;
    std::string builtins;
    for (const auto& name : bprel::builtin_names()) {
        builtins += (builtins.empty() ? "" : ", ") + name;
    }
    auto* run = app.add_subcommand("run", "Run a scenario; writes events.log and metrics.txt");
    run->add_option("scenario", run_args.scenario_file, "YAML scenario file");
    run->add_option("--builtin", run_args.builtin, "Builtin scenario: " + builtins);
    run->add_option("--seed", run_args.seed, "Random seed")->capture_default_str();
    run->add_option("--out", run_args.out_dir, "Output directory")->capture_default_str();
    run->add_option("--format", run_args.format, "Metrics format")
        ->check(CLI::IsMember({"text", "kv"}))
        ->capture_default_str();
    run->add_flag("--dump-state", run_args.dump_state, "Also write state.txt with every node's final state");
    run->add_flag("--check-invariants", run_args.check_invariants, "Check node store invariants after every event");

    std::string decode_kind;
    std::string decode_input;
    std::optional<std::string> receiver;
    auto* decode = app.add_subcommand("decode", "Decode a bundle, block or signal");
    decode->add_option("kind", decode_kind, "bundle, creb, cteb, crs or ccs")
        ->required()
        ->check(CLI::IsMember({"bundle", "creb", "cteb", "crs", "ccs"}));
    decode->add_option("input", decode_input, "Hex text or @file")->required();
    decode->add_option("--receiver", receiver, "Receiver admin EID; expands signals into tags");

    std::string encode_kind;
    std::string encode_fields;
    auto* encode = app.add_subcommand("encode", "Encode from key=value fields and print hex");
    encode->add_option("kind", encode_kind, "bundle, creb, cteb, crs or ccs")
        ->required()
        ->check(CLI::IsMember({"bundle", "creb", "cteb", "crs", "ccs"}));
    encode->add_option("fields", encode_fields, "Space-separated key=value fields")->required();

    std::string log_path;
    std::string report_format = "text";
    auto* report = app.add_subcommand("report", "Summarise an event log");
    report->add_option("log", log_path, "events.log path")->required();
    report->add_option("--format", report_format, "Output format")
        ->check(CLI::IsMember({"text", "kv"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const LogLevel level = log_level_from_env();
        if (run->parsed()) {
            run_command(run_args, level, std::cout, std::cerr);
        } else if (decode->parsed()) {
            decode_command(decode_kind, decode_input, receiver, std::cout);
        } else if (encode->parsed()) {
            encode_command(encode_kind, encode_fields, std::cout);
        } else if (report->parsed()) {
            return report_command(log_path, report_format, std::cout) ? 0 : 1;
        }
    } catch (const bprel::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

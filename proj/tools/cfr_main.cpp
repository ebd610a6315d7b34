// cfr — certainty-factor rule engine CLI.
//
// Subcommands:
//   run <file.cfr>          parse a rulebase, forward chain, print beliefs
//   experiment generate     write the item set as .cfr files plus design JSON
//   experiment simulate     write synthetic subject CSVs
//   experiment fit          fit models to subject CSVs and print a report

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfr/dsl.hpp"
#include "cfr/experiment.hpp"
#include "cfr/stats.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParseError = 1;
constexpr int kExitInferenceError = 2;

std::optional<cfr::Summarizer> summarizer_from(const std::string& name) {
    static const std::map<std::string, cfr::Summarizer> names{
        {"maximin", cfr::Summarizer::Maximin},
        {"min", cfr::Summarizer::Min},
        {"max", cfr::Summarizer::Max},
        {"product", cfr::Summarizer::Product},
        {"sum-minus-overlap", cfr::Summarizer::SumMinusOverlap},
        {"mean", cfr::Summarizer::Mean},
        {"median", cfr::Summarizer::Median},
        {"prob-hybrid", cfr::Summarizer::ProbHybrid}};
    const auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

std::optional<cfr::Scaler> scaler_from(const std::string& name) {
    static const std::map<std::string, cfr::Scaler> names{
        {"multiply", cfr::Scaler::Multiply}, {"mean-scale", cfr::Scaler::MeanScale}};
    const auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

std::optional<cfr::Combiner> combiner_from(const std::string& name) {
    static const std::map<std::string, cfr::Combiner> names{
        {"heckerman", cfr::Combiner::Heckerman},
        {"classic", cfr::Combiner::ClassicCF},
        {"dempster-shafer", cfr::Combiner::DempsterShafer},
        {"mean", cfr::Combiner::Mean},
        {"max", cfr::Combiner::Max},
        {"min", cfr::Combiner::Min}};
    const auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

// A model is a preset name ("mmh", "mean") or an explicit
// summarizer:scaler:combiner triple.
std::optional<cfr::StrategyConfig> model_from(const std::string& name) {
    if (name == "mmh") return cfr::mmh_model();
    if (name == "mean") return cfr::mean_model();
    std::istringstream in(name);
    std::string s, c, k;
    if (!std::getline(in, s, ':') || !std::getline(in, c, ':') || !std::getline(in, k)) {
        return std::nullopt;
    }
    const auto summarizer = summarizer_from(s);
    const auto scaler = scaler_from(c);
    const auto combiner = combiner_from(k);
    if (!summarizer || !scaler || !combiner) return std::nullopt;
    return cfr::StrategyConfig{*summarizer, *scaler, *combiner, 0.2};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct RunOptions {
    std::string path;
    std::string summarizer = "maximin";
    std::string scaler = "multiply";
    std::string combiner = "heckerman";
    double threshold = 0.2;
    bool trace = false;
    std::string format = "text";
};

int cmd_run(const RunOptions& opt) {
    const auto summarizer = summarizer_from(opt.summarizer);
    const auto scaler = scaler_from(opt.scaler);
    const auto combiner = combiner_from(opt.combiner);
    if (!summarizer || !scaler || !combiner) {
        std::cerr << "error: unknown strategy name\n";
        return kExitParseError;
    }
    if (opt.threshold < 0.0 || opt.threshold >= 1.0) {
        std::cerr << "error: threshold must lie in [0, 1)\n";
        return kExitParseError;
    }

    std::string source;
    try {
        source = read_file(opt.path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    }

    const auto parsed = cfr::parse_rulebase(source);
    if (const auto* error = std::get_if<cfr::ParseError>(&parsed)) {
        std::cerr << opt.path << ":" << error->span.line << ":" << error->span.column
                  << ": error: " << error->message << " (" << to_string(error->kind)
                  << ")\n";
        return kExitParseError;
    }
    const auto& rulebase = std::get<cfr::Rulebase>(parsed);

    const cfr::StrategyConfig cfg{*summarizer, *scaler, *combiner, opt.threshold};
    cfr::InferenceResult result;
    try {
        cfr::WorkingMemory wm;
        for (const auto& fact : rulebase.facts) {
            wm.assert_fact(fact.proposition, fact.cf, cfg.combiner);
        }
        result = cfr::infer(std::move(wm), rulebase.rules, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInferenceError;
    }

    if (opt.format == "json") {
        nlohmann::json doc;
        doc["beliefs"] = nlohmann::json::object();
        for (const auto& [prop, belief] : result.memory.beliefs()) {
            doc["beliefs"][prop] = belief.cf.value();
        }
        if (opt.trace) {
            doc["trace"] = nlohmann::json::parse(result.trace.to_json_string());
        }
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout.setf(std::ios::fixed);
        std::cout.precision(4);
        for (const auto& [prop, belief] : result.memory.beliefs()) {
            std::cout << prop << " = " << belief.cf.value() << "\n";
        }
        if (opt.trace) std::cout << result.trace.to_text();
    }
    return kExitOk;
}

// Reference calibration used when instantiating item files on disk.
const cfr::CalibrationMap kReferenceCalibration{0.875, 0.5, 0.1875};

int cmd_generate(const std::string& design_path, const std::string& items_dir) {
    const cfr::DesignSpec design = cfr::DesignSpec::default_design();
    write_file(design_path, design.to_json_string(2) + "\n");

    std::filesystem::create_directories(items_dir);
    for (const auto& item : design.items) {
        const cfr::Rulebase rb = cfr::item_rulebase(item, kReferenceCalibration);
        std::ostringstream out;
        out << "# item " << item.id << ": rule1 " << to_string(item.rule1.connective)
            << "/" << to_string(item.rule1.conclusion_certainty) << "/"
            << to_string(item.rule1.conclusion_direction) << ", rule2 "
            << to_string(item.rule2.connective) << "/"
            << to_string(item.rule2.conclusion_certainty) << "/"
            << to_string(item.rule2.conclusion_direction) << "\n"
            << "# antecedent facts use the reference calibration\n"
            << cfr::format_rulebase(rb);
        char name[32];
        std::snprintf(name, sizeof name, "item%02d.cfr", item.id);
        write_file((std::filesystem::path(items_dir) / name).string(), out.str());
    }
    std::cout << "wrote " << design.items.size() << " items to " << items_dir << " and "
              << design_path << "\n";
    return kExitOk;
}

struct SimulateOptions {
    int n = 44;
    double noise = 0.15;
    std::uint64_t seed = 1;
    std::string truth = "mmh";
    std::string design_path;
    std::string ratings_path = "ratings.csv";
    std::string calibration_path = "calibration.csv";
};

int cmd_simulate(SimulateOptions opt) {
    if (const char* env_seed = std::getenv("CF_ENGINE_SEED")) {
        opt.seed = std::strtoull(env_seed, nullptr, 10);
    }
    const auto truth = model_from(opt.truth);
    if (!truth) {
        std::cerr << "error: unknown model '" << opt.truth << "'\n";
        return kExitParseError;
    }
    const cfr::DesignSpec design =
        opt.design_path.empty()
            ? cfr::DesignSpec::default_design()
            : cfr::DesignSpec::from_json_string(read_file(opt.design_path));
    const auto subjects =
        cfr::simulate_subjects(opt.n, design, *truth, opt.noise, opt.seed);
    write_file(opt.ratings_path, cfr::ratings_to_csv(subjects));
    write_file(opt.calibration_path, cfr::calibration_to_csv(subjects));
    std::cout << "wrote " << subjects.size() << " subjects to " << opt.ratings_path
              << " and " << opt.calibration_path << "\n";
    return kExitOk;
}

struct FitOptions {
    std::string ratings_path;
    std::string calibration_path;
    std::string design_path;
    std::string models = "mmh,mean";
    std::string format = "text";
    std::string json_out;
    std::string csv_out;
};

int cmd_fit(const FitOptions& opt) {
    std::vector<cfr::stats::ModelSpec> models;
    std::istringstream in(opt.models);
    std::string name;
    while (std::getline(in, name, ',')) {
        const auto config = model_from(name);
        if (!config) {
            std::cerr << "error: unknown model '" << name << "'\n";
            return kExitParseError;
        }
        models.push_back(cfr::stats::ModelSpec{name, *config});
    }

    const cfr::DesignSpec design =
        opt.design_path.empty()
            ? cfr::DesignSpec::default_design()
            : cfr::DesignSpec::from_json_string(read_file(opt.design_path));
    const auto subjects =
        cfr::subjects_from_csv(read_file(opt.ratings_path), read_file(opt.calibration_path));
    const auto report = cfr::stats::fit_models(subjects, design, models);

    if (!opt.json_out.empty()) write_file(opt.json_out, report.to_json_string(2) + "\n");
    if (!opt.csv_out.empty()) write_file(opt.csv_out, report.to_csv());
    if (opt.format == "json") {
        std::cout << report.to_json_string(2) << "\n";
    } else {
        std::cout << report.to_text();
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"certainty-factor rule engine"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "run inference over a .cfr rulebase");
    run->add_option("file", run_opt.path, "rulebase file")->required();
    run->add_option("--summarizer", run_opt.summarizer,
                    "maximin|min|max|product|sum-minus-overlap|mean|median|prob-hybrid");
    run->add_option("--scaler", run_opt.scaler, "multiply|mean-scale");
    run->add_option("--combiner", run_opt.combiner,
                    "heckerman|classic|dempster-shafer|mean|max|min");
    run->add_option("--threshold", run_opt.threshold, "firing threshold in [0, 1)");
    run->add_flag("--trace", run_opt.trace, "print the firing trace");
    run->add_option("--format", run_opt.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    auto* experiment = app.add_subcommand("experiment", "questionnaire harness");
    experiment->require_subcommand(1);

    std::string design_path = "design.json";
    std::string items_dir = "items";
    auto* generate = experiment->add_subcommand("generate", "write item files and design");
    generate->add_option("--design", design_path, "design JSON output path");
    generate->add_option("--items-dir", items_dir, "directory for item .cfr files");

    SimulateOptions sim_opt;
    auto* simulate = experiment->add_subcommand("simulate", "write synthetic subject CSVs");
    simulate->add_option("--n", sim_opt.n, "number of subjects");
    simulate->add_option("--noise", sim_opt.noise, "rating noise standard deviation");
    simulate->add_option("--seed", sim_opt.seed,
                         "RNG seed (CF_ENGINE_SEED overrides)");
    simulate->add_option("--truth", sim_opt.truth, "generating model");
    simulate->add_option("--design", sim_opt.design_path, "design JSON input path");
    simulate->add_option("--ratings", sim_opt.ratings_path, "ratings CSV output");
    simulate->add_option("--calibration", sim_opt.calibration_path,
                         "calibration CSV output");

    FitOptions fit_opt;
    auto* fit = experiment->add_subcommand("fit", "fit models to subject CSVs");
    fit->add_option("--ratings", fit_opt.ratings_path, "ratings CSV")->required();
    fit->add_option("--calibration", fit_opt.calibration_path, "calibration CSV")
        ->required();
    fit->add_option("--design", fit_opt.design_path, "design JSON input path");
    fit->add_option("--models", fit_opt.models, "comma-separated model names");
    fit->add_option("--format", fit_opt.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));
    fit->add_option("--json-out", fit_opt.json_out, "write the report JSON here");
    fit->add_option("--csv-out", fit_opt.csv_out, "write the per-subject CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opt);
        if (generate->parsed()) return cmd_generate(design_path, items_dir);
        if (simulate->parsed()) return cmd_simulate(sim_opt);
        if (fit->parsed()) return cmd_fit(fit_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParseError;
    }
    return kExitOk;
}

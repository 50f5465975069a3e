// gscan: build datasets, train, evaluate, and scan Solidity contracts for
// reentrancy at line granularity.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gscan/checkpoint.hpp"
#include "gscan/dataset.hpp"
#include "gscan/error.hpp"
#include "gscan/evaluator.hpp"
#include "gscan/features.hpp"
#include "gscan/scan.hpp"
#include "gscan/synthetic.hpp"
#include "gscan/trainer.hpp"

namespace fs = std::filesystem;
using namespace gscan;

namespace {

constexpr int kExitError = 1;

struct BuildOptions
{
    fs::path out;
    std::string synthetic;
    fs::path ast_dir;
    std::uint64_t seed = 1;
    std::vector<double> ratios = {0.84, 0.08, 0.08};
};

struct TrainOptions
{
    fs::path corpus;
    fs::path out = "model.ckpt";
    std::string profile = "quick";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr;
    std::vector<double> class_weights;
    fs::path log;
    bool keep_final = false;
};

struct EvalOptions
{
    fs::path corpus;
    fs::path checkpoint;
    std::string split = "test";
    std::string format = "text";
};

struct ScanOptions
{
    fs::path ast;
    fs::path sol;
    fs::path source;
    fs::path checkpoint;
    std::string format = "text";
};

std::pair<std::size_t, std::size_t> parse_counts(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--synthetic", "expected N,M (clean,vulnerable)");
    try {
        return {std::stoul(text.substr(0, comma)), std::stoul(text.substr(comma + 1))};
    }
    catch (const std::exception&) {
        throw CLI::ValidationError("--synthetic", "expected N,M (clean,vulnerable)");
    }
}

int cmd_build_dataset(const BuildOptions& o)
{
    if (o.ratios.size() != 3)
        throw Error(ErrorCode::BadRatios, "cli", "--ratios takes three values");
    dataset::BuiltRecords built;
    if (!o.synthetic.empty()) {
        const auto [clean, vulnerable] = parse_counts(o.synthetic);
        if (clean == 0 || vulnerable == 0)
            throw Error(ErrorCode::EmptyDataset, "cli", "synthetic counts must be positive");
        built = dataset::records_from_synthetic(synthetic::generate_synthetic_corpus(clean, vulnerable, o.seed));
    }
    else {
        built = dataset::records_from_ast_dir(o.ast_dir);
    }
    auto entries = std::move(built.entries);
    const dataset::Corpus corpus =
        dataset::build_corpus(std::move(built), {o.ratios[0], o.ratios[1], o.ratios[2]}, o.seed);
    dataset::write_corpus(o.out, corpus, entries);
    std::printf("%zu contracts in, %zu duplicates removed, %zu records written to %s\n", corpus.stats.input_count,
                corpus.stats.duplicates_removed, corpus.records.size(), o.out.string().c_str());
    std::printf("split: %zu train / %zu validation / %zu test\n", corpus.manifest.train.size(),
                corpus.manifest.validation.size(), corpus.manifest.test.size());
    return 0;
}

int cmd_train(const TrainOptions& o)
{
    trainer::Hyperparameters hyper =
        o.profile == "paper" ? trainer::Hyperparameters::paper() : trainer::Hyperparameters::quick();
    if (o.seed)
        hyper.seed = *o.seed;
    if (o.epochs)
        hyper.epochs = *o.epochs;
    if (o.batch_size)
        hyper.batch_size = *o.batch_size;
    if (o.lr)
        hyper.learning_rate = *o.lr;
    if (!o.class_weights.empty()) {
        if (o.class_weights.size() != 2)
            throw CLI::ValidationError("--class-weights", "expected two values");
        hyper.class_weights = gcn::ClassWeights{o.class_weights[0], o.class_weights[1]};
    }

    const dataset::Corpus corpus = dataset::load_corpus(o.corpus);
    const auto train_set = corpus.records_in(dataset::Split::Train);
    const auto validation_set = corpus.records_in(dataset::Split::Validation);

    std::ofstream log_file;
    if (!o.log.empty()) {
        log_file.open(o.log, std::ios::app);
        if (!log_file)
            throw Error(ErrorCode::Io, "cli", "cannot open " + o.log.string());
    }
    const auto on_epoch = [&](const trainer::EpochRecord& r) {
        const std::string line = r.to_json().dump();
        if (log_file)
            log_file << line << '\n' << std::flush;
        else
            std::cerr << line << '\n';
    };

    auto initial = gcn::ModelParams<float>::initialize(gcn::Architecture::standard(), hyper.seed);
    const trainer::TrainResult result = trainer::train(train_set, validation_set, hyper, std::move(initial), on_epoch);

    checkpoint::Checkpoint cp;
    cp.params = o.keep_final ? result.final_params : result.best_params;
    cp.schema_manifest = features::FeatureSchema::standard().manifest();
    cp.metadata = {{"hyperparameters", hyper.to_json()},
                   {"selected", o.keep_final ? "final" : "best-validation"},
                   {"epoch", o.keep_final ? hyper.epochs : result.best_epoch},
                   {"validation_f1", result.best_validation_f1},
                   {"train_records", train_set.size()},
                   {"validation_records", validation_set.size()}};
    checkpoint::save(o.out, cp);
    std::printf("checkpoint %s (epoch %zu, validation node F1 %.4f)\nsha256 %s\n", o.out.string().c_str(),
                o.keep_final ? hyper.epochs : result.best_epoch, result.best_validation_f1,
                checkpoint::digest(cp).c_str());
    return 0;
}

int cmd_eval(const EvalOptions& o)
{
    const auto split = dataset::parse_split(o.split);
    if (!split)
        throw CLI::ValidationError("--split", "expected train, validation or test");
    const dataset::Corpus corpus = dataset::load_corpus(o.corpus);
    const checkpoint::Checkpoint cp = checkpoint::load(o.checkpoint);
    const auto records = corpus.records_in(*split);
    if (records.empty())
        throw Error(ErrorCode::EmptyEvaluation, "evaluator", "split '" + o.split + "' has no records");
    const auto predictions = trainer::predict(cp.params, records);
    std::map<std::string, const labels::NodeLabels*> by_id;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_id[records[i]->id] = &predictions[i];
    const auto report = evaluator::evaluate(
        records, [&](const dataset::DatasetRecord& r) { return *by_id.at(r.id); }, std::string(to_string(*split)));
    if (o.format == "json")
        std::cout << report.to_json().dump(2) << '\n';
    else
        std::cout << report.to_text();
    return 0;
}

int cmd_scan(const ScanOptions& o)
{
    scan::ScanInput input;
    if (!o.sol.empty()) {
        input.kind = scan::InputKind::Solidity;
        input.path = o.sol;
    }
    else {
        input.kind = scan::InputKind::Ast;
        input.path = o.ast;
        if (!o.source.empty())
            input.source_path = o.source;
    }
    const checkpoint::Checkpoint cp = checkpoint::load(o.checkpoint);
    const scan::ScanReport report = scan::scan(input, cp.params);
    if (o.format == "json")
        std::cout << report.to_json().dump(2) << '\n';
    else
        std::cout << report.to_text();
    return scan::exit_code(report);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Line-level reentrancy detection for Solidity with graph convolutional networks"};
    app.require_subcommand(1);

    BuildOptions build;
    auto* build_cmd = app.add_subcommand("build-dataset", "Build a deduplicated, split corpus directory");
    build_cmd->add_option("--out", build.out, "Corpus directory to write")->required();
    auto* synth = build_cmd->add_option("--synthetic", build.synthetic, "Generate N clean and M vulnerable contracts (N,M)");
    auto* ast_dir = build_cmd->add_option("--ast-dir", build.ast_dir, "Directory of AST JSON files with optional <stem>.lines");
    synth->excludes(ast_dir);
    build_cmd->add_option("--seed", build.seed, "Seed for generation and the split")->capture_default_str();
    build_cmd->add_option("--ratios", build.ratios, "train,validation,test ratios")->delimiter(',')->expected(3);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
    train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->required();
    train_cmd->add_option("--out", train.out, "Checkpoint to write")->capture_default_str();
    train_cmd->add_option("--profile", train.profile, "quick (200 epochs) or paper (1600 epochs)")
        ->check(CLI::IsMember({"quick", "paper"}))
        ->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Initialization and shuffling seed (default 0)");
    train_cmd->add_option("--epochs", train.epochs, "Override the profile's epoch count");
    train_cmd->add_option("--batch-size", train.batch_size, "Graphs per batch (default 100)");
    train_cmd->add_option("--lr", train.lr, "Learning rate (default 1e-4)");
    train_cmd->add_option("--class-weights", train.class_weights, "Loss weights for clean,vulnerable nodes")
        ->delimiter(',')
        ->expected(2);
    train_cmd->add_option("--log", train.log, "Append per-epoch metrics here (default stderr)");
    train_cmd->add_flag("--keep-final", train.keep_final, "Save the last epoch instead of the best validation epoch");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Node- and graph-level metrics per subtype on a split");
    eval_cmd->add_option("--corpus", eval.corpus, "Corpus directory")->required();
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required();
    eval_cmd->add_option("--split", eval.split, "train, validation or test")->capture_default_str();
    eval_cmd->add_option("--format", eval.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    ScanOptions scan_opts;
    auto* scan_cmd = app.add_subcommand("scan", "Scan one contract; exit 0 clean, 2 vulnerable, 1 error");
    auto* scan_ast = scan_cmd->add_option("--ast", scan_opts.ast, "Compiler AST JSON (envelope, standard-json or bare)");
    auto* scan_sol = scan_cmd->add_option("--sol", scan_opts.sol, "Solidity source (needs solc or $GSCAN_SOLC)");
    scan_ast->excludes(scan_sol);
    scan_cmd->add_option("--source", scan_opts.source, "Source text for a bare --ast")->needs(scan_ast);
    scan_cmd->add_option("--checkpoint", scan_opts.checkpoint, "Model checkpoint")->required();
    scan_cmd->add_option("--format", scan_opts.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (build_cmd->parsed()) {
            if (build.synthetic.empty() == build.ast_dir.empty())
                throw CLI::ValidationError("build-dataset", "give exactly one of --synthetic or --ast-dir");
            return cmd_build_dataset(build);
        }
        if (train_cmd->parsed())
            return cmd_train(train);
        if (eval_cmd->parsed())
            return cmd_eval(eval);
        if (scan_cmd->parsed()) {
            if (scan_opts.ast.empty() == scan_opts.sol.empty())
                throw CLI::ValidationError("scan", "give exactly one of --ast or --sol");
            return cmd_scan(scan_opts);
        }
    }
    catch (const Error& e) {
        std::cerr << "gscan: " << e.what() << '\n';
        return kExitError;
    }
    catch (const CLI::Error& e) {
        std::cerr << "gscan: " << e.what() << '\n';
        return kExitError;
    }
    catch (const std::exception& e) {
        std::cerr << "gscan: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

// mlqc — driver for the modeling-language toolchain: parse, validate, compile
// to execution plans, simulate (from source or from a compiled plan), generate
// synthetic datasets, and score trained model documents against test data.
//
// Exit codes, uniform across subcommands:
//   0  success (validate: no errors; run: finished without error events)
//   1  domain failure: diagnostics, runtime error events, corrupt plan or
//      model documents, unknown presets/backends
//   2  environment failure: unreadable inputs, unwritable outputs, bad usage

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mlq/diag.hpp"
#include "mlq/ml/data.hpp"
#include "mlq/ml/io.hpp"
#include "mlq/ml/model.hpp"
#include "mlq/ml/synth.hpp"
#include "mlq/numfmt.hpp"
#include "mlq/parser.hpp"
#include "mlq/plan.hpp"
#include "mlq/printer.hpp"
#include "mlq/resolve.hpp"
#include "mlq/runtime.hpp"
#include "mlq/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kDomain = 1, kEnv = 2;

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return in.good() || in.eof();
}

bool write_file(const std::string& path, const std::string& content) {
    std::error_code ec;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    out.flush();
    return out.good();
}

// --- diagnostic reporting -------------------------------------------------------

void print_text(const std::vector<mlq::Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << mlq::render_diagnostic(d) << '\n';
}

void print_json(const std::vector<mlq::Diagnostic>& diags) {
    json arr = json::array();
    for (const auto& d : diags) {
        arr.push_back({{"code", d.code},
                       {"severity", mlq::severity_name(d.severity)},
                       {"path", d.path},
                       {"line", d.span.line},
                       {"column", d.span.column},
                       {"message", d.message}});
    }
    std::cout << arr.dump(2) << '\n';
}

void report(const std::vector<mlq::Diagnostic>& diags, const std::string& format) {
    if (format == "json")
        print_json(diags);
    else
        print_text(diags);
}

// --- shared front-end pipeline ----------------------------------------------------

struct Loaded {
    mlq::ast::ModelUnit unit;
    mlq::ResolvedModel model;
    std::vector<mlq::Diagnostic> diags;       // parse/resolve/validity/completeness
    std::vector<mlq::Diagnostic> automl_notes; // N001 defaults, reported on request
    bool ok = false;
};

// Parses, resolves, fills automl defaults, and runs both validation passes.
// Stops at the first stage that reports errors; `diags` holds everything
// produced so far, in source order.
Loaded load_model(const std::string& path, const std::string& source,
                  bool require_configuration) {
    Loaded r;
    auto parsed = mlq::parse_model(source, path);
    r.unit = std::move(parsed.model);
    r.diags = std::move(parsed.diagnostics);
    if (mlq::has_errors(r.diags)) return r;

    auto resolved = mlq::resolve(r.unit);
    r.model = std::move(resolved.model);
    r.diags.insert(r.diags.end(), resolved.diagnostics.begin(), resolved.diagnostics.end());
    if (mlq::has_errors(r.diags)) return r;

    r.automl_notes = mlq::apply_automl_defaults(r.model);

    auto valid = mlq::check_valid(r.model);
    r.diags.insert(r.diags.end(), valid.begin(), valid.end());
    mlq::ValidateOptions opts;
    opts.require_configuration = require_configuration;
    auto complete = mlq::check_complete(r.model, opts);
    r.diags.insert(r.diags.end(), complete.begin(), complete.end());
    mlq::sort_diagnostics(r.diags);

    r.ok = !mlq::has_errors(r.diags);
    return r;
}

// A pure library file: fragments only, nothing to instantiate. Such a file
// is complete without a configuration.
bool is_fragment_library(const mlq::ast::ModelUnit& unit) {
    if (!unit.configurations.empty() || unit.things.empty()) return false;
    for (const auto& t : unit.things)
        if (!t.is_fragment) return false;
    return true;
}

// --- parse ------------------------------------------------------------------------

struct ParseArgs {
    std::string file;
    bool emit_canonical = false;
};

int cmd_parse(const ParseArgs& a) {
    std::string source;
    if (!read_file(a.file, source)) {
        std::cerr << "error: cannot read '" << a.file << "'\n";
        return kEnv;
    }
    auto parsed = mlq::parse_model(source, a.file);
    print_text(parsed.diagnostics);
    if (!parsed.ok()) return kDomain;
    if (a.emit_canonical) std::cout << mlq::print_model(parsed.model);
    return kOk;
}

// --- validate ----------------------------------------------------------------------

struct ValidateArgs {
    std::string file;
    std::string diag_format = "text";
    bool automl_notes = false;
    bool strict = false;
};

int cmd_validate(const ValidateArgs& a) {
    std::string source;
    if (!read_file(a.file, source)) {
        std::cerr << "error: cannot read '" << a.file << "'\n";
        return kEnv;
    }
    auto parsed = mlq::parse_model(source, a.file);
    bool library = parsed.ok() && is_fragment_library(parsed.model);

    Loaded l = load_model(a.file, source, /*require_configuration=*/!library);
    std::vector<mlq::Diagnostic> shown = l.diags;
    if (a.automl_notes)
        shown.insert(shown.end(), l.automl_notes.begin(), l.automl_notes.end());
    mlq::sort_diagnostics(shown);
    report(shown, a.diag_format);

    if (!l.ok) return kDomain;
    if (a.strict) {
        for (const auto& d : l.diags)
            if (d.severity == mlq::Severity::Warning) return kDomain;
    }
    return kOk;
}

// --- compile -----------------------------------------------------------------------

struct CompileArgs {
    std::string file;
    std::string backend = "plan";
    std::string out = ".";
};

int cmd_compile(const CompileArgs& a) {
    std::string source;
    if (!read_file(a.file, source)) {
        std::cerr << "error: cannot read '" << a.file << "'\n";
        return kEnv;
    }
    Loaded l = load_model(a.file, source, /*require_configuration=*/true);
    if (!l.ok) {
        print_text(l.diags);
        return kDomain;
    }
    auto result = mlq::plan::compile(l.model, a.backend);
    print_text(result.diagnostics);
    if (!result.ok()) return kDomain;

    for (const auto& art : result.artifacts) {
        fs::path dest = fs::path(a.out) / art.path;
        if (!write_file(dest.string(), art.content)) {
            std::cerr << "error: cannot write '" << dest.string() << "'\n";
            return kEnv;
        }
        std::cout << dest.string() << '\n';
    }
    return kOk;
}

// --- run ---------------------------------------------------------------------------

struct RunArgs {
    std::string file;
    std::string config;
    std::uint64_t seed = 10;
    std::optional<std::uint64_t> max_steps;
    std::string trace_out;
    std::string dataset_root;
};

int finish_run(mlq::rt::Network& net, const RunArgs& a) {
    try {
        net.run();
    } catch (const mlq::rt::RunError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
    std::string trace = net.trace_text();
    if (a.trace_out.empty()) {
        std::cout << trace;
    } else if (!write_file(a.trace_out, trace)) {
        std::cerr << "error: cannot write '" << a.trace_out << "'\n";
        return kEnv;
    }
    if (net.had_error()) {
        std::cerr << "error: run finished with error events\n";
        return kDomain;
    }
    return kOk;
}

int cmd_run(const RunArgs& a) {
    std::string source;
    if (!read_file(a.file, source)) {
        std::cerr << "error: cannot read '" << a.file << "'\n";
        return kEnv;
    }
    mlq::rt::RunOptions opts;
    opts.seed = a.seed;
    opts.max_steps = a.max_steps;
    opts.dataset_root = a.dataset_root;
    opts.print_to = &std::cout;

    if (source.rfind("MLQPLAN/", 0) == 0) {
        // Compiled plan: replay it directly, no model sources involved.
        try {
            auto plan = mlq::plan::load_plan(source);
            if (!a.config.empty() && a.config != plan.config) {
                std::cerr << "error: this plan was compiled from configuration '"
                          << plan.config << "', not '" << a.config << "'\n";
                return kDomain;
            }
            auto net = mlq::plan::plan_network(plan, opts);
            return finish_run(net, a);
        } catch (const mlq::plan::PlanError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kDomain;
        } catch (const mlq::rt::RunError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kDomain;
        }
    }

    Loaded l = load_model(a.file, source, /*require_configuration=*/true);
    if (!l.ok) {
        print_text(l.diags);
        return kDomain;
    }
    try {
        auto net = mlq::rt::interpret_network(l.model, a.config, opts);
        return finish_run(net, a);
    } catch (const mlq::rt::RunError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
}

// --- gen-data ----------------------------------------------------------------------

struct GenDataArgs {
    std::string preset;
    long long seed = 10;
    std::size_t rows = 100;
    bool timestamps = false;
    std::string out;
};

int cmd_gen_data(const GenDataArgs& a) {
    const auto& known = mlq::ml::synthetic_presets();
    if (std::find(known.begin(), known.end(), a.preset) == known.end()) {
        std::cerr << "error: unknown preset '" << a.preset << "'; known presets:";
        for (const auto& p : known) std::cerr << ' ' << p;
        std::cerr << '\n';
        return kDomain;
    }
    std::string csv = mlq::ml::gen_synthetic(a.preset, a.seed, a.rows, a.timestamps);
    if (a.out.empty()) {
        std::cout << csv;
    } else if (!write_file(a.out, csv)) {
        std::cerr << "error: cannot write '" << a.out << "'\n";
        return kEnv;
    }
    return kOk;
}

// --- eval --------------------------------------------------------------------------

struct EvalArgs {
    std::string model_file;
    std::string data_file;
};

// Scores a trained model document against a CSV whose columns are the model's
// inputs followed by one truth column (the label; for clustering models any
// ground-truth class column). String cells are re-encoded with the model's
// own dictionaries so categorical codes match training.
int cmd_eval(const EvalArgs& a) {
    std::string model_text;
    if (!read_file(a.model_file, model_text)) {
        std::cerr << "error: cannot read '" << a.model_file << "'\n";
        return kEnv;
    }
    if (!fs::exists(a.data_file)) {
        std::cerr << "error: cannot read '" << a.data_file << "'\n";
        return kEnv;
    }
    try {
        mlq::ml::TrainedModel model = mlq::ml::deserialize_model(model_text);

        std::vector<mlq::DaFeature> columns;
        for (const auto& c : model.inputs) {
            auto t = mlq::type_from_name(c.type);
            columns.push_back({c.name, t.value_or(mlq::ValueType::Double)});
        }
        if (model.task == mlq::MlTask::Clustering) {
            columns.push_back({"label", mlq::ValueType::String});
        } else {
            auto t = mlq::type_from_name(model.label_type);
            columns.push_back({model.label_name.empty() ? "label" : model.label_name,
                               t.value_or(mlq::ValueType::Double)});
        }

        auto ds = mlq::ml::load_dataset(a.data_file, columns, /*timestamps=*/false);

        std::vector<double> truth, predicted;
        for (const auto& row : ds.rows) {
            std::vector<double> x(row.begin(), row.end() - 1);
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (ds.dictionaries[i].empty()) continue;
                const auto& cell = ds.dictionaries[i][static_cast<std::size_t>(x[i])];
                x[i] = mlq::ml::encode_with_dictionary(model.input_dictionaries[i], cell);
            }
            double y = row.back();
            const auto& label_dict = ds.dictionaries.back();
            if (!label_dict.empty() && !model.label_dictionary.empty()) {
                const auto& cell = label_dict[static_cast<std::size_t>(y)];
                y = mlq::ml::encode_with_dictionary(model.label_dictionary, cell);
            }
            truth.push_back(y);
            predicted.push_back(mlq::ml::predict_encoded(model, std::move(x)));
        }

        mlq::ml::Metrics m;
        switch (model.task) {
        case mlq::MlTask::Classification:
            m = mlq::ml::evaluate_classification(truth, predicted);
            break;
        case mlq::MlTask::Regression:
            m = mlq::ml::evaluate_regression(truth, predicted);
            break;
        case mlq::MlTask::Clustering:
            m = mlq::ml::evaluate_clustering(truth, predicted);
            break;
        }

        std::cout << "family = " << mlq::family_name(model.family) << '\n';
        std::cout << "task = " << mlq::task_name(model.task) << '\n';
        std::cout << "rows = " << ds.rows.size() << '\n';
        if (ds.dropped_rows > 0) std::cout << "dropped = " << ds.dropped_rows << '\n';
        std::cout << mlq::ml::metrics_summary(m) << '\n';
        return kOk;
    } catch (const mlq::ml::MlError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model compiler and simulator for statechart things with embedded analytics"};
    app.require_subcommand(1);

    ParseArgs pa;
    auto* parse = app.add_subcommand("parse", "parse a model file and report diagnostics");
    parse->add_option("file", pa.file, "model file")->required();
    parse->add_flag("--emit-canonical", pa.emit_canonical,
                    "print the canonical form to stdout");

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "check validity and completeness");
    validate->add_option("file", va.file, "model file")->required();
    validate->add_option("--diag-format", va.diag_format, "diagnostic format")
        ->check(CLI::IsMember({"text", "json"}));
    validate->add_flag("--automl-notes", va.automl_notes,
                       "also report defaults filled in by automl mode");
    validate->add_flag("--strict", va.strict, "treat warnings as errors");

    CompileArgs ca;
    auto* compile = app.add_subcommand("compile", "lower a model to execution plans");
    compile->add_option("file", ca.file, "model file")->required();
    compile->add_option("--backend", ca.backend, "code generation backend");
    compile->add_option("--out", ca.out, "output directory");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "simulate a model or replay a compiled plan");
    run->add_option("file", ra.file, "model file or .mlqplan")->required();
    run->add_option("--config", ra.config, "configuration name (default: the only one)");
    run->add_option("--seed", ra.seed, "training seed for analytics components");
    std::uint64_t max_steps_raw = 0;
    auto* ms = run->add_option("--max-steps", max_steps_raw, "step budget");
    run->add_option("--trace-out", ra.trace_out, "write the trace here instead of stdout");
    run->add_option("--dataset-root", ra.dataset_root, "base directory for dataset paths")
        ->envname("MLQ_DATASET_ROOT");

    GenDataArgs ga;
    auto* gen = app.add_subcommand("gen-data", "emit a deterministic synthetic dataset");
    gen->add_option("preset", ga.preset, "dataset preset name")->required();
    gen->add_option("--seed", ga.seed, "generator seed");
    gen->add_option("--rows", ga.rows, "row count");
    gen->add_flag("--timestamps", ga.timestamps, "prepend a timestamp column");
    gen->add_option("--out", ga.out, "write the CSV here instead of stdout");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "score a trained model document on test data");
    eval->add_option("model", ea.model_file, "model document (.mlqm)")->required();
    eval->add_option("data", ea.data_file, "test CSV: input columns then the truth column")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kEnv;
    }

    if (ms->count() > 0) ra.max_steps = max_steps_raw;

    if (parse->parsed()) return cmd_parse(pa);
    if (validate->parsed()) return cmd_validate(va);
    if (compile->parsed()) return cmd_compile(ca);
    if (run->parsed()) return cmd_run(ra);
    if (gen->parsed()) return cmd_gen_data(ga);
    if (eval->parsed()) return cmd_eval(ea);
    return kEnv;
}

#include "distgen/cli.hpp"

#include "distgen/errors.hpp"
#include "distgen/experiment.hpp"
#include "distgen/metrics.hpp"
#include "distgen/mlp.hpp"
#include "distgen/scene.hpp"
#include "distgen/svm.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace distgen::cli {

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const SingleClassError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const NonFiniteError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_pgm(const ImageGrid& img, const std::string& path) {
    const auto bytes = encode_pgm(img);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

} // namespace

int cmd_gen_data(const std::string& name, const std::string& out_path, std::size_t size, std::ostream& err) {
    return guarded(err, [&] {
        ImageGrid img(1, 1);
        if (name == "theta_l" || name == "theta_c" || name == "mask") {
            const BuiltinData data = builtin_dataset(name, size);
            img = std::holds_alternative<Mask>(data) ? mask_to_image(std::get<Mask>(data)) : std::get<ImageGrid>(data);
        } else if (name.ends_with(".json")) {
            img = render_scene(scene_from_json(read_file(name)), size, size);
        } else {
            throw NameError("unknown dataset '" + name + "' (expected theta_l, theta_c, mask or a scene .json)");
        }
        write_pgm(img, out_path);
        return kOk;
    });
}

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& err) {
    return guarded(err, [&] {
        std::string bytes;
        try {
            bytes = read_file(config_path);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
        ExperimentConfig config =
            parse_experiment_config(bytes, std::filesystem::path(config_path).parent_path());
        if (overrides.seed) {
            config.seed = *overrides.seed;
        }
        if (overrides.output_dir) {
            config.output_dir = *overrides.output_dir;
        }
        const RunSummary summary = run_experiment(config, bytes, overrides.quiet ? nullptr : &err);
        if (!overrides.quiet) {
            err << "wrote " << summary.files.size() << " files to " << config.output_dir << '\n';
        }
        return kOk;
    });
}

int cmd_render(const std::string& input_path, const std::string& kind, const std::string& out_path,
               const RenderArgs& args, std::ostream& err) {
    return guarded(err, [&] {
        if (kind != "surface" && kind != "hyperplanes" && kind != "binary" && kind != "distance-map") {
            throw NameError("unknown render kind '" + kind + "'");
        }
        if (kind == "distance-map") {
            const Mask mask = input_path == "mask" ? builtin_mask(args.width) : mask_from_image(load_pgm(input_path));
            write_pgm(distance_to_training_map(mask).normalized, out_path);
            return kOk;
        }
        const std::string text = read_file(input_path);
        if (text.starts_with("FNN")) {
            const NetworkParams net = network_from_text(text);
            if (kind == "surface") {
                const ImageGrid img = eval_grid([&](double x1, double x2) { return predict(net, x1, x2); }, args.width,
                                                args.height, args.viewport.value_or(Viewport::data()));
                write_pgm(img, out_path);
            } else if (kind == "hyperplanes") {
                const ZeroLines zeros = first_layer_zero_lines(net);
                write_pgm(render_zero_lines(zeros.lines, args.width, args.height, args.viewport.value_or(Viewport{}),
                                            args.opacity),
                          out_path);
            } else {
                throw ConfigError("render kind '" + kind + "' is not available for a network model");
            }
        } else if (text.starts_with("NUSVC")) {
            const SvmModel model = svm_model_from_text(text);
            const Viewport vp = args.viewport.value_or(Viewport::data());
            if (kind == "surface") {
                write_pgm(decision_grid(model, args.width, args.height, vp), out_path);
            } else if (kind == "binary") {
                write_pgm(binary_decision_grid(model, args.width, args.height, vp), out_path);
            } else {
                throw ConfigError("render kind '" + kind + "' is not available for an SVM model");
            }
        } else {
            throw FormatError("unrecognized model file " + input_path);
        }
        return kOk;
    });
}

int cmd_metrics(const std::vector<std::string>& predictions, const std::string& truth_path,
                const std::string& mask_path, const std::string& csv_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (predictions.empty()) {
            throw ConfigError("metrics needs at least one prediction image");
        }
        const ImageGrid truth = load_pgm(truth_path);
        const Mask mask =
            mask_path == "mask" ? builtin_mask(truth.width()) : mask_from_image(load_pgm(mask_path));
        std::vector<NamedReport> reports;
        for (const auto& p : predictions) {
            reports.emplace_back(std::filesystem::path(p).stem().string(), masked_mse(load_pgm(p), truth, mask));
        }
        out << compare_report(reports);
        if (!csv_path.empty()) {
            write_file_atomic(csv_path, compare_csv(reports));
        }
        return kOk;
    });
}

int main(int argc, char** argv) {
    CLI::App app{"Distant-generalization workbench: datasets, FNN and nu-SVC training, figures and metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool quiet = false;
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--out", out_dir, "Override the output directory");
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* gen = app.add_subcommand("gen-data", "Write a builtin dataset, the builtin mask or a scene JSON as PGM");
    std::string gen_name;
    std::string gen_out;
    std::size_t gen_size = 64;
    gen->add_option("name", gen_name, "theta_l | theta_c | mask | scene.json")->required();
    gen->add_option("out", gen_out, "Output PGM path")->required();
    gen->add_option("--size", gen_size, "Edge length in pixels")->check(CLI::Range(2, 1 << 14));

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path;
    run->add_option("config", config_path, "Experiment config JSON")->required();

    auto* render = app.add_subcommand("render", "Render a saved model (or a mask's distance map) to PGM");
    std::string render_in;
    std::string render_kind;
    std::string render_out;
    RenderArgs render_args;
    std::vector<double> viewport;
    render->add_option("model", render_in, "Model file, or mask PGM / 'mask' for distance-map")->required();
    render->add_option("kind", render_kind, "surface | hyperplanes | binary | distance-map")->required();
    render->add_option("out", render_out, "Output PGM path")->required();
    render->add_option("--width", render_args.width)->check(CLI::Range(2, 1 << 14));
    render->add_option("--height", render_args.height)->check(CLI::Range(2, 1 << 14));
    render->add_option("--viewport", viewport, "x1_min x1_max x2_min x2_max")->expected(4);
    render->add_option("--opacity", render_args.opacity)->check(CLI::Range(0.0, 1.0));

    auto* metrics = app.add_subcommand("metrics", "Masked MSE of prediction PGMs against a truth PGM");
    std::vector<std::string> preds;
    std::string truth;
    std::string mask = "mask";
    std::string csv;
    metrics->add_option("predictions", preds, "Prediction PGMs")->required();
    metrics->add_option("--truth", truth, "Ground-truth PGM")->required();
    metrics->add_option("--mask", mask, "Mask PGM or 'mask' for the builtin mask");
    metrics->add_option("--csv", csv, "Also write CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*gen) {
        return cmd_gen_data(gen_name, gen_out, gen_size, std::cerr);
    }
    if (*run) {
        return cmd_run(config_path, {seed, out_dir, quiet}, std::cerr);
    }
    if (*render) {
        if (!viewport.empty()) {
            render_args.viewport = Viewport{viewport[0], viewport[1], viewport[2], viewport[3]};
        }
        return cmd_render(render_in, render_kind, render_out, render_args, std::cerr);
    }
    return cmd_metrics(preds, truth, mask, csv, std::cout, std::cerr);
}

} // namespace distgen::cli

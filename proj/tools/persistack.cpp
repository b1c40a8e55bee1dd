// persistack: extracts the persistent neuronal structure from a microscopy
// z-stack and validates tracings against a reference mask.

#include <CLI11.hpp>
#include <json.hpp>

#include <glob.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "persistack/image_io.hpp"
#include "persistack/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitWarning = 2;

using persistack::ArtifactSelection;
using persistack::Connectivity;
using persistack::NeighborhoodShape;
using persistack::PipelineConfig;
using persistack::SliceOrder;
using persistack::ThresholdMode;
using persistack::ThresholdSpec;

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::string> files;
    for (const std::string& pattern : patterns) {
        if (pattern.find_first_of("*?[") == std::string::npos) {
            files.push_back(pattern);
            continue;
        }
        glob_t g{};
        const int rc = glob(pattern.c_str(), 0, nullptr, &g);
        if (rc == GLOB_NOMATCH) {
            globfree(&g);
            throw std::runtime_error("no files match pattern '" + pattern + "'");
        }
        if (rc != 0) {
            globfree(&g);
            throw std::runtime_error("cannot expand pattern '" + pattern + "'");
        }
        for (std::size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
        globfree(&g);
    }
    return files;
}

ThresholdSpec parse_threshold(const std::string& text) {
    if (text == "huang") return {};
    if (text.rfind("fixed:", 0) == 0) {
        ThresholdSpec spec;
        spec.mode = ThresholdMode::fixed;
        try {
            spec.fixed_level = std::stoi(text.substr(6));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--threshold", "bad fixed level in '" + text + "'");
        }
        return spec;
    }
    throw CLI::ValidationError("--threshold", "expected 'huang' or 'fixed:<level>', got '" + text + "'");
}

ArtifactSelection parse_emit(const std::string& csv) {
    ArtifactSelection sel;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token == "mask") sel.mask = true;
        else if (token == "barcode") sel.barcode = true;
        else if (token == "colors") sel.colors = true;
        else if (token == "report") sel.report = true;
        else if (token == "projection") sel.projection = true;
        else if (token == "filtered") sel.filtered = true;
        else if (token == "thresholded") sel.thresholded = true;
        else if (token == "levels") sel.levels = true;
        else if (!token.empty()) {
            throw CLI::ValidationError("--emit", "unknown artifact '" + token + "'");
        }
    }
    return sel;
}

// Flag values not given on the command line fall back to the config file,
// then to the built-in defaults.
void merge_config_file(const std::string& path, CLI::App* run,
                       std::vector<std::string>& inputs, int& radius, std::string& shape,
                       int& connectivity, std::string& slice_order, std::string& threshold,
                       std::string& emit, std::string& out_dir, unsigned& threads) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": bad JSON: " + e.what());
    }

    auto given = [&](const std::string& flag) { return run->count(flag) > 0; };
    if (j.contains("input") && !given("--input")) {
        if (j["input"].is_array()) inputs = j["input"].get<std::vector<std::string>>();
        else inputs = {j["input"].get<std::string>()};
    }
    if (j.contains("radius") && !given("--radius")) radius = j["radius"].get<int>();
    if (j.contains("shape") && !given("--shape")) shape = j["shape"].get<std::string>();
    if (j.contains("connectivity") && !given("--connectivity"))
        connectivity = j["connectivity"].get<int>();
    if (j.contains("slice_order") && !given("--slice-order"))
        slice_order = j["slice_order"].get<std::string>();
    if (j.contains("threshold") && !given("--threshold"))
        threshold = j["threshold"].get<std::string>();
    if (j.contains("emit") && !given("--emit")) emit = j["emit"].get<std::string>();
    if (j.contains("out") && !given("--out")) out_dir = j["out"].get<std::string>();
    if (j.contains("threads") && !given("--threads")) threads = j["threads"].get<unsigned>();
}

int run_command(const std::vector<std::string>& raw_inputs, int radius, const std::string& shape,
                int connectivity, const std::string& slice_order, const std::string& threshold,
                const std::string& emit, const std::string& out_dir, unsigned threads) {
    PipelineConfig config;
    config.radius = radius;
    config.shape = shape == "disc" ? NeighborhoodShape::disc : NeighborhoodShape::square;
    config.connectivity = connectivity == 4 ? Connectivity::four : Connectivity::eight;
    config.slice_order =
        slice_order == "reversed" ? SliceOrder::reversed : SliceOrder::acquisition;
    config.threshold = parse_threshold(threshold);
    config.outputs = parse_emit(emit);
    config.out_dir = out_dir;
    config.threads = threads;
    config.inputs = raw_inputs;   // validated before any filesystem access
    persistack::validate_config(config);

    config.inputs = expand_inputs(raw_inputs);
    const persistack::RunReport report = persistack::run_pipeline(config);

    std::cout << "stack: " << report.slice_count << " slice(s), " << report.width << "x"
              << report.height << ", " << report.bit_depth << "-bit\n";
    std::cout << "projection threshold: " << report.projection_threshold.level << "\n";
    std::cout << "components: " << report.component_count
              << ", persistent area: " << report.structure_area << "\n";
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "artifacts in " << config.out_dir << ":";
    for (const auto& [name, file] : report.artifacts) std::cout << " " << file;
    std::cout << "\n";

    return report.structure_empty ? kExitWarning : kExitOk;
}

int compare_command(const std::string& auto_path, const std::string& manual_path,
                    const std::string& dataset, const std::string& out_dir) {
    persistack::ComparisonReport report;
    if (!dataset.empty()) {
        report = persistack::compare_dataset(dataset);
    } else {
        report = persistack::compare_masks(auto_path, manual_path);
    }

    const std::string table = persistack::comparison_to_table(report);
    std::cout << table;

    std::filesystem::create_directories(out_dir);
    const auto out_path = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    std::ofstream json_out(out_path("comparison.json"), std::ios::binary | std::ios::trunc);
    json_out << persistack::comparison_to_json(report);
    std::ofstream table_out(out_path("comparison.txt"), std::ios::binary | std::ios::trunc);
    table_out << table;
    if (!json_out || !table_out) {
        throw std::runtime_error(out_dir + ": cannot write comparison report");
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistent-structure extraction from microscopy z-stacks"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the extraction pipeline on a stack");
    std::vector<std::string> inputs;
    std::string config_path;
    int radius = 10;
    std::string shape = "square";
    int connectivity = 8;
    std::string slice_order = "acquisition";
    std::string threshold = "huang";
    std::string emit = "mask,barcode,colors,report";
    std::string out_dir;
    unsigned threads = 0;

    run->add_option("--input", inputs, "Input stack: multi-page TIFF, image files, or a glob");
    run->add_option("--config", config_path, "JSON config file (flags take precedence)");
    run->add_option("--radius", radius, "Median filter radius in pixels");
    run->add_option("--shape", shape, "Filter neighborhood shape")
        ->check(CLI::IsMember({"square", "disc"}));
    run->add_option("--connectivity", connectivity, "Foreground connectivity")
        ->check(CLI::IsMember({4, 8}));
    run->add_option("--slice-order", slice_order, "Slice consumption order")
        ->check(CLI::IsMember({"acquisition", "reversed"}));
    run->add_option("--threshold", threshold, "'huang' or 'fixed:<level>'");
    run->add_option("--emit", emit,
                    "Comma list of artifacts: mask,barcode,colors,report,"
                    "projection,filtered,thresholded,levels");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads (0 = hardware)");

    // compare
    auto* compare = app.add_subcommand("compare", "Compare a tracing against a reference mask");
    std::string auto_path, manual_path, dataset;
    std::string compare_out = ".";
    compare->add_option("--auto", auto_path, "Automatic tracing mask");
    compare->add_option("--manual", manual_path, "Manual (reference) tracing mask");
    compare->add_option("--dataset", dataset, "Directory of *_auto/*_manual mask pairs");
    compare->add_option("--out", compare_out, "Directory for comparison.json / comparison.txt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!config_path.empty()) {
                merge_config_file(config_path, run, inputs, radius, shape, connectivity,
                                  slice_order, threshold, emit, out_dir, threads);
            }
            return run_command(inputs, radius, shape, connectivity, slice_order, threshold, emit,
                               out_dir, threads);
        }
        if (compare->parsed()) {
            if (dataset.empty() && (auto_path.empty() || manual_path.empty())) {
                std::cerr << "error: compare needs --auto and --manual, or --dataset\n";
                return kExitError;
            }
            return compare_command(auto_path, manual_path, dataset, compare_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

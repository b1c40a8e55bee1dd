#include "persistack/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "persistack/image_io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace persistack {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string shape_name(NeighborhoodShape s) {
    return s == NeighborhoodShape::square ? "square" : "disc";
}

std::string order_name(SliceOrder o) {
    return o == SliceOrder::acquisition ? "acquisition" : "reversed";
}

std::string threshold_name(const ThresholdSpec& t) {
    return t.mode == ThresholdMode::huang ? "huang" : "fixed:" + std::to_string(t.fixed_level);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open file for writing");
    out << text;
    if (!out) throw std::runtime_error(path + ": write error");
}

} // namespace

void validate_config(const PipelineConfig& config) {
    if (config.inputs.empty()) {
        throw std::invalid_argument("config: no input files given");
    }
    if (config.radius < 0) {
        throw std::invalid_argument("config: filter radius must be non-negative, got " +
                                    std::to_string(config.radius));
    }
    if (!config.outputs.any()) {
        throw std::invalid_argument("config: no output artifact selected");
    }
    if (config.out_dir.empty()) {
        throw std::invalid_argument("config: output directory not set");
    }
    if (config.threshold.mode == ThresholdMode::fixed && config.threshold.fixed_level < 0) {
        throw std::invalid_argument("config: fixed threshold must be non-negative, got " +
                                    std::to_string(config.threshold.fixed_level));
    }
}

RunReport run_pipeline(const PipelineConfig& config) {
    validate_config(config);
    const auto t_total = std::chrono::steady_clock::now();

    RunReport report;
    report.threshold_mode = config.threshold.mode;

    auto t = std::chrono::steady_clock::now();
    const ZStack stack = load_stack(config.inputs);
    report.timings.load_ms = ms_since(t);
    report.slice_count = stack.slice_count();
    report.width = stack.width();
    report.height = stack.height();
    report.bit_depth = stack.bit_depth();

    t = std::chrono::steady_clock::now();
    const FilterParams filter{config.radius, config.shape};
    PreprocessResult pre = preprocess_stack(stack, filter, config.threshold, config.threads);
    report.timings.preprocess_ms = ms_since(t);
    report.projection_threshold = pre.projection_threshold;
    report.slice_thresholds = pre.slice_thresholds;

    t = std::chrono::steady_clock::now();
    std::vector<BinaryImage> ordered = pre.slice_masks;
    if (config.slice_order == SliceOrder::reversed) {
        std::reverse(ordered.begin(), ordered.end());
    }
    const Filtration filtration =
        build_filtration(pre.projection_mask, ordered, config.connectivity, config.threads);
    report.timings.filtration_ms = ms_since(t);
    report.component_count = filtration.top().component_count();

    t = std::chrono::steady_clock::now();
    const Barcode barcode = compute_barcode(filtration);
    report.timings.barcode_ms = ms_since(t);
    for (const BarcodeInterval& iv : barcode.intervals) {
        ++report.births_histogram[iv.birth];
    }

    const StructureExtraction structure = extract_persistent_structure(filtration);
    report.structure_area = foreground_count(structure.mask);
    report.structure_empty = structure.empty;
    if (structure.empty) {
        report.warnings.push_back("no component survives all slices; the persistent structure is empty");
    }

    t = std::chrono::steady_clock::now();
    fs::create_directories(config.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(config.out_dir) / name).string();
    };

    if (config.outputs.mask) {
        save_mask(structure.mask, out_path("mask.png"));
        report.artifacts["mask"] = "mask.png";
    }
    if (config.outputs.barcode) {
        write_barcode_json(barcode, out_path("barcode.json"));
        render_barcode_png(barcode, out_path("barcode.png"));
        report.artifacts["barcode"] = "barcode.json";
        report.artifacts["barcode_image"] = "barcode.png";
    }
    if (config.outputs.colors) {
        const ColorMap map = persistence_color_map(filtration);
        save_indexed_png(map.width, map.height, map.index, map.palette, out_path("colors.png"));
        write_palette_json(map, out_path("palette.json"));
        report.artifacts["colors"] = "colors.png";
        report.artifacts["palette"] = "palette.json";
    }
    if (config.outputs.projection) {
        save_gray(pre.projection, out_path("projection.png"));
        report.artifacts["projection"] = "projection.png";
    }
    if (config.outputs.filtered) {
        save_gray(pre.projection_filtered, out_path("filtered.png"));
        report.artifacts["filtered"] = "filtered.png";
    }
    if (config.outputs.thresholded) {
        save_mask(pre.projection_mask, out_path("thresholded.png"));
        report.artifacts["thresholded"] = "thresholded.png";
    }
    if (config.outputs.levels) {
        for (int i = 0; i <= filtration.level_count(); ++i) {
            std::ostringstream name;
            name << "level_" << std::setw(2) << std::setfill('0') << i << ".png";
            save_mask(materialize(filtration, i), out_path(name.str()));
        }
        report.artifacts["levels"] = "level_*.png";
    }
    report.timings.artifacts_ms = ms_since(t);
    report.timings.total_ms = ms_since(t_total);

    if (config.outputs.report) {
        write_text_file(out_path("report.json"), report_to_json(report));
        report.artifacts["report"] = "report.json";
    }
    return report;
}

std::string report_to_json(const RunReport& report) {
    ordered_json j;
    j["input"] = {{"slices", report.slice_count},
                  {"width", report.width},
                  {"height", report.height},
                  {"bit_depth", report.bit_depth}};

    j["threshold"]["mode"] = report.threshold_mode == ThresholdMode::huang ? "huang" : "fixed";
    j["threshold"]["projection"] = report.projection_threshold.level;
    ordered_json levels = ordered_json::array();
    for (const ThresholdResult& tr : report.slice_thresholds) levels.push_back(tr.level);
    j["threshold"]["slices"] = std::move(levels);
    if (report.threshold_mode == ThresholdMode::huang) {
        j["threshold"]["projection_fuzziness"] = report.projection_threshold.fuzziness;
    }

    j["components"]["count"] = report.component_count;
    ordered_json births = ordered_json::object();
    for (const auto& [birth, n] : report.births_histogram) {
        births[std::to_string(birth)] = n;
    }
    j["components"]["births_histogram"] = std::move(births);

    j["structure"] = {{"area", report.structure_area}, {"empty", report.structure_empty}};
    j["warnings"] = report.warnings;
    j["artifacts"] = report.artifacts;
    j["timings_ms"] = {{"load", report.timings.load_ms},
                       {"preprocess", report.timings.preprocess_ms},
                       {"filtration", report.timings.filtration_ms},
                       {"barcode", report.timings.barcode_ms},
                       {"artifacts", report.timings.artifacts_ms},
                       {"total", report.timings.total_ms}};
    return j.dump(2) + "\n";
}

std::string barcode_to_json(const Barcode& barcode) {
    ordered_json j;
    j["levels"] = barcode.level_count;
    j["connectivity"] = static_cast<int>(barcode.connectivity);
    ordered_json intervals = ordered_json::array();
    for (const BarcodeInterval& iv : barcode.intervals) {
        intervals.push_back({{"id", iv.id},
                             {"birth", iv.birth},
                             {"death", iv.death},
                             {"persistence", iv.persistence()},
                             {"area", iv.area}});
    }
    j["intervals"] = std::move(intervals);
    return j.dump(2) + "\n";
}

Barcode barcode_from_json(const std::string& json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    Barcode barcode;
    barcode.level_count = j.at("levels").get<int>();
    const int conn = j.at("connectivity").get<int>();
    if (conn != 4 && conn != 8) {
        throw std::invalid_argument("barcode JSON: connectivity must be 4 or 8, got " +
                                    std::to_string(conn));
    }
    barcode.connectivity = static_cast<Connectivity>(conn);
    for (const auto& e : j.at("intervals")) {
        BarcodeInterval iv;
        iv.id = e.at("id").get<std::int32_t>();
        iv.birth = e.at("birth").get<int>();
        iv.death = e.at("death").get<int>();
        iv.area = e.at("area").get<std::int64_t>();
        if (e.contains("persistence") && e.at("persistence").get<int>() != iv.persistence()) {
            throw std::invalid_argument("barcode JSON: inconsistent persistence for id " +
                                        std::to_string(iv.id));
        }
        barcode.intervals.push_back(iv);
    }
    return barcode;
}

void write_barcode_json(const Barcode& barcode, const std::string& path) {
    write_text_file(path, barcode_to_json(barcode));
}

Barcode read_barcode_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return barcode_from_json(ss.str());
}

void render_barcode_png(const Barcode& barcode, const std::string& path) {
    const int m = barcode.level_count;
    const int margin = 12;
    const int level_w = 24;
    const int bar_h = 10;
    const int gap = 6;
    const int n = static_cast<int>(barcode.intervals.size());

    const int width = 2 * margin + std::max(1, m) * level_w;
    const int height = 2 * margin + (n > 0 ? n * (bar_h + gap) - gap : bar_h);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3, 255);

    std::vector<BarcodeInterval> rows = barcode.intervals;
    std::sort(rows.begin(), rows.end(), [](const BarcodeInterval& a, const BarcodeInterval& b) {
        return a.birth != b.birth ? a.birth < b.birth : a.id < b.id;
    });

    auto put = [&](int x, int y, Rgb c) {
        const std::size_t p = (static_cast<std::size_t>(y) * width + x) * 3;
        rgb[p] = c[0];
        rgb[p + 1] = c[1];
        rgb[p + 2] = c[2];
    };

    for (int i = 0; i < n; ++i) {
        const BarcodeInterval& iv = rows[static_cast<std::size_t>(i)];
        const Rgb color = survival_color(m - iv.birth, m);
        const int x0 = margin + iv.birth * level_w;
        const int x1 = margin + iv.death * level_w;
        const int y0 = margin + i * (bar_h + gap);
        for (int y = y0; y < y0 + bar_h; ++y) {
            for (int x = x0; x < std::max(x1, x0 + 2); ++x) {
                if (x < width && y < height) put(x, y, color);
            }
        }
    }
    save_rgb_png(width, height, rgb, path);
}

void write_palette_json(const ColorMap& map, const std::string& path) {
    ordered_json j;
    j["levels"] = map.level_count;
    j["background"] = {map.palette[0][0], map.palette[0][1], map.palette[0][2]};
    ordered_json depths = ordered_json::object();
    for (int d = 0; d <= map.level_count; ++d) {
        const Rgb& c = map.palette[static_cast<std::size_t>(d) + 1];
        depths[std::to_string(d)] = {c[0], c[1], c[2]};
    }
    j["depths"] = std::move(depths);
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

ComparisonRow make_row(std::string name, const std::string& auto_path,
                       const std::string& manual_path) {
    const BinaryImage auto_mask = load_mask(auto_path);
    const BinaryImage manual_mask = load_mask(manual_path);
    try {
        return {std::move(name), compare_tracings(auto_mask, manual_mask)};
    } catch (const std::exception& e) {
        throw std::runtime_error(auto_path + " vs " + manual_path + ": " + e.what());
    }
}

} // namespace

ComparisonReport compare_masks(const std::string& auto_path, const std::string& manual_path) {
    ComparisonReport report;
    const std::string name = fs::path(auto_path).filename().string() + " vs " +
                             fs::path(manual_path).filename().string();
    report.rows.push_back(make_row(name, auto_path, manual_path));
    return report;
}

ComparisonReport compare_dataset(const std::string& dir) {
    static const char* kSuffixAuto = "_auto";
    static const char* kSuffixManual = "_manual";

    std::map<std::string, std::string> autos;     // base stem -> path
    std::map<std::string, std::string> manuals;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string stem = entry.path().stem().string();
        auto ends_with = [&](const std::string& suffix) {
            return stem.size() > suffix.size() &&
                   stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0;
        };
        if (ends_with(kSuffixAuto)) {
            autos[stem.substr(0, stem.size() - 5)] = entry.path().string();
        } else if (ends_with(kSuffixManual)) {
            manuals[stem.substr(0, stem.size() - 7)] = entry.path().string();
        }
    }

    ComparisonReport report;
    for (const auto& [base, auto_path] : autos) {
        const auto it = manuals.find(base);
        if (it == manuals.end()) {
            throw std::runtime_error(auto_path + ": no matching " + base + kSuffixManual + " mask");
        }
        report.rows.push_back(make_row(base, auto_path, it->second));
    }
    if (report.rows.empty()) {
        throw std::runtime_error(dir + ": no " + kSuffixAuto + "/" + kSuffixManual + " mask pairs found");
    }

    double branch = 0, recall = 0, spill = 0;
    for (const ComparisonRow& row : report.rows) {
        branch += row.comparison.branch_pct();
        recall += row.comparison.area_recall_pct();
        spill += row.comparison.area_spill_pct();
    }
    const double n = static_cast<double>(report.rows.size());
    report.has_mean = true;
    report.mean_branch_pct = branch / n;
    report.mean_recall_pct = recall / n;
    report.mean_spill_pct = spill / n;
    return report;
}

std::string comparison_to_json(const ComparisonReport& report) {
    ordered_json j;
    ordered_json pairs = ordered_json::array();
    for (const ComparisonRow& row : report.rows) {
        const TracingComparison& c = row.comparison;
        pairs.push_back(
            {{"name", row.name},
             {"branch_pct", format_percent(c.auto_branches, c.manual_branches)},
             {"area_recall_pct", format_percent(c.area_intersection, c.area_manual)},
             {"area_spill_pct", format_percent(c.area_spill, c.area_manual_complement)},
             {"counts",
              {{"auto_branches", c.auto_branches},
               {"manual_branches", c.manual_branches},
               {"area_intersection", c.area_intersection},
               {"area_manual", c.area_manual},
               {"area_spill", c.area_spill},
               {"area_manual_complement", c.area_manual_complement}}}});
    }
    j["pairs"] = std::move(pairs);
    if (report.has_mean) {
        j["mean"] = {{"branch_pct", format_percent(report.mean_branch_pct)},
                     {"area_recall_pct", format_percent(report.mean_recall_pct)},
                     {"area_spill_pct", format_percent(report.mean_spill_pct)}};
    }
    return j.dump(2) + "\n";
}

std::string comparison_to_table(const ComparisonReport& report) {
    std::size_t name_w = std::string("tracing").size();
    for (const ComparisonRow& row : report.rows) name_w = std::max(name_w, row.name.size());
    if (report.has_mean) name_w = std::max(name_w, std::string("mean").size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << "tracing" << std::right
        << std::setw(16) << "(1) branches %" << std::setw(20) << "(2) area recall %"
        << std::setw(19) << "(3) area spill %" << "\n";

    for (const ComparisonRow& row : report.rows) {
        const TracingComparison& c = row.comparison;
        out << std::left << std::setw(static_cast<int>(name_w) + 2) << row.name << std::right
            << std::setw(16) << format_percent(c.auto_branches, c.manual_branches)
            << std::setw(20) << format_percent(c.area_intersection, c.area_manual)
            << std::setw(19) << format_percent(c.area_spill, c.area_manual_complement) << "\n";
    }
    if (report.has_mean) {
        out << std::left << std::setw(static_cast<int>(name_w) + 2) << "mean" << std::right
            << std::setw(16) << format_percent(report.mean_branch_pct)
            << std::setw(20) << format_percent(report.mean_recall_pct)
            << std::setw(19) << format_percent(report.mean_spill_pct) << "\n";
    }
    return out.str();
}

} // namespace persistack

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "persistack/metrics.hpp"
#include "persistack/persistence.hpp"
#include "persistack/preprocess.hpp"

namespace persistack {

enum class SliceOrder { acquisition, reversed };

/// Artifacts a run may write. `mask`, `barcode`, `colors` and `report` are
/// the primary set; the rest expose intermediate stages.
struct ArtifactSelection {
    bool mask = false;
    bool barcode = false;
    bool colors = false;
    bool report = false;
    bool projection = false;
    bool filtered = false;
    bool thresholded = false;
    bool levels = false;

    bool any() const {
        return mask || barcode || colors || report || projection || filtered || thresholded || levels;
    }
};

struct PipelineConfig {
    std::vector<std::string> inputs;   // ordered slice sources (files), or one multi-page file
    int radius = 10;
    NeighborhoodShape shape = NeighborhoodShape::square;
    Connectivity connectivity = Connectivity::eight;
    SliceOrder slice_order = SliceOrder::acquisition;
    ThresholdSpec threshold;
    ArtifactSelection outputs;
    std::string out_dir;
    unsigned threads = 0;   // 0 = hardware default
};

/// Rejects invalid parameter combinations before any file is touched.
void validate_config(const PipelineConfig& config);

struct StageTimings {
    double load_ms = 0;
    double preprocess_ms = 0;
    double filtration_ms = 0;
    double barcode_ms = 0;
    double artifacts_ms = 0;
    double total_ms = 0;
};

struct RunReport {
    int slice_count = 0;
    int width = 0;
    int height = 0;
    int bit_depth = 0;

    ThresholdResult projection_threshold;
    std::vector<ThresholdResult> slice_thresholds;   // stack order
    ThresholdMode threshold_mode = ThresholdMode::huang;

    std::int32_t component_count = 0;
    std::map<int, std::int64_t> births_histogram;    // birth level -> interval count
    std::int64_t structure_area = 0;
    bool structure_empty = false;

    std::vector<std::string> warnings;
    StageTimings timings;
    std::map<std::string, std::string> artifacts;    // artifact name -> file name
};

/// Full run: load, project, preprocess, filter, extract, write artifacts.
/// Throws on error; the empty-structure outcome is a warning in the report.
RunReport run_pipeline(const PipelineConfig& config);

std::string report_to_json(const RunReport& report);

std::string barcode_to_json(const Barcode& barcode);
Barcode barcode_from_json(const std::string& json_text);
void write_barcode_json(const Barcode& barcode, const std::string& path);
Barcode read_barcode_json(const std::string& path);

/// Rendered barcode: one horizontal bar per interval, length proportional
/// to persistence, colored by survival depth.
void render_barcode_png(const Barcode& barcode, const std::string& path);

void write_palette_json(const ColorMap& map, const std::string& path);

/// One compared pair in a report; `name` identifies the pair.
struct ComparisonRow {
    std::string name;
    TracingComparison comparison;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool has_mean = false;     // set when aggregating a dataset
    double mean_branch_pct = 0;
    double mean_recall_pct = 0;
    double mean_spill_pct = 0;
};

ComparisonReport compare_masks(const std::string& auto_path, const std::string& manual_path);

/// Dataset mode: pairs files named <stem>_auto.<ext> / <stem>_manual.<ext>,
/// compares each pair in stem order and appends the arithmetic mean.
ComparisonReport compare_dataset(const std::string& dir);

std::string comparison_to_json(const ComparisonReport& report);

/// Aligned text table with the three accuracy columns (1), (2), (3).
std::string comparison_to_table(const ComparisonReport& report);

} // namespace persistack

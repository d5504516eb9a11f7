#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "metrics.hpp"
#include "render.hpp"
#include "sampling.hpp"
#include "superpixel.hpp"

namespace hsi {

struct DatasetSpec {
  std::string name;
  std::filesystem::path cube;
  std::filesystem::path labels;
  std::vector<std::filesystem::path> classmaps;       // imported predictions (.hsp)
  std::optional<std::filesystem::path> affinity;      // required for the affinity method
  std::optional<std::filesystem::path> superpixels;   // precomputed .hss, skips generation
};

enum class SuperpixelMethod { Slic, Affinity };

struct SuperpixelSettings {
  SuperpixelMethod method = SuperpixelMethod::Slic;
  SlicConfig slic;
  std::optional<RgbBands> rgb_bands;  // default_rgb_bands() when absent
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  bool train_baseline = true;  // false: only imported maps are scored
  TrainConfig train;
  SuperpixelSettings superpixels;
  bool stratified = true;
  std::size_t min_per_class = 1;
  bool pin_train = false;
  std::filesystem::path output_dir = "results";
  bool write_maps = false;
};

/// Accepts a JSON object or `key = value` lines (dotted keys, comma lists).
/// Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunRecord {
  std::string dataset;
  std::string method;  // raw | refined | imported[:stem] | imported+refined[:stem]
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
  double oa = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class_accuracy;
  Confusion confusion;
  std::string map_file;  // stored .hsp, relative to the output directory, when maps are written
};

struct ReportRow {
  std::string dataset;
  std::string method;
  double train_fraction = 0.0;
  std::size_t runs = 0;
  double oa_mean = 0.0;
  double oa_std = 0.0;  // sample (n-1) standard deviation, 0 for a single run
  double oa_min = 0.0;
  double oa_max = 0.0;
  double kappa_mean = 0.0;
  double kappa_std = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<ReportRow> table;
};

/// Groups runs by (dataset, method, fraction) in first-appearance order.
std::vector<ReportRow> aggregate(const std::vector<RunRecord>& runs);

/// split -> train -> predict -> refine -> score for every (dataset, fraction,
/// seed). Superpixels are computed once per dataset. Runs execute in
/// parallel; the result does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string format_number(double v);
std::string runs_csv(const std::vector<RunRecord>& runs);
std::string aggregate_csv(const std::vector<ReportRow>& rows);
/// Percent mean +- std per method and fraction, plus the refined-minus-raw
/// delta row with its sign.
std::string format_table(const std::vector<ReportRow>& rows);

/// Writes runs.csv, aggregate.csv, table.txt (and maps/ when requested).
void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace hsi

#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "io.hpp"
#include "parallel.hpp"
#include "refine.hpp"

namespace hsi {

namespace {

using Json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::InvalidConfig, msg); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Json scalar_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    auto v = Json::parse(text);
    if (v.is_number() || v.is_string()) return v;
  } catch (const nlohmann::json::exception&) {
  }
  return text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// key = value lines onto the JSON layout. `dataset.*` keys describe a single
/// dataset; list-valued keys take comma-separated items.
Json key_value_to_json(const std::string& text) {
  static const std::vector<std::string> list_keys = {"fractions", "seeds", "dataset.classmaps",
                                                     "superpixels.rgb_bands"};
  Json root = Json::object();
  Json dataset = Json::object();
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    Json v;
    if (std::find(list_keys.begin(), list_keys.end(), key) != list_keys.end()) {
      v = Json::array();
      for (const auto& item : split_list(value)) v.push_back(scalar_value(item));
    } else {
      v = scalar_value(value);
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      root[key] = v;
    } else {
      const std::string section = key.substr(0, dot), field = key.substr(dot + 1);
      if (section == "dataset") {
        dataset[field] = v;
      } else {
        root[section][field] = v;
      }
    }
  }
  if (!dataset.empty()) root["datasets"] = Json::array({dataset});
  return root;
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config key '") + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

const std::vector<std::string> kTopKeys = {"datasets", "fractions", "seeds", "num_seeds", "seed_base",
                                           "classifier", "superpixels", "split", "pin_train",
                                           "output_dir", "write_maps"};

void reject_unknown(const Json& obj, const std::vector<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error("unknown config key '" + where + key + "'");
    }
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
  Json root;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      root = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      config_error(std::string("config is not valid JSON: ") + e.what());
    }
  } else {
    root = key_value_to_json(text);
  }
  if (!root.is_object()) config_error("config must be an object");
  reject_unknown(root, kTopKeys, "");

  ExperimentConfig cfg;
  if (!root.contains("datasets") || !root["datasets"].is_array() || root["datasets"].empty()) {
    config_error("config lists no datasets");
  }
  for (const auto& d : root["datasets"]) {
    reject_unknown(d, {"name", "cube", "labels", "classmaps", "affinity", "superpixels"}, "dataset.");
    DatasetSpec spec;
    spec.name = get_or<std::string>(d, "name", "");
    if (!d.contains("cube") || !d.contains("labels")) config_error("dataset needs 'cube' and 'labels'");
    spec.cube = resolve(base_dir, get_or<std::string>(d, "cube", ""));
    spec.labels = resolve(base_dir, get_or<std::string>(d, "labels", ""));
    if (spec.name.empty()) spec.name = spec.cube.stem().string();
    for (const auto& m : get_or<std::vector<std::string>>(d, "classmaps", {})) spec.classmaps.push_back(resolve(base_dir, m));
    if (d.contains("affinity")) spec.affinity = resolve(base_dir, get_or<std::string>(d, "affinity", ""));
    if (d.contains("superpixels")) spec.superpixels = resolve(base_dir, get_or<std::string>(d, "superpixels", ""));
    if (spec.name.find_first_of(",\n\"") != std::string::npos) config_error("dataset name must not contain commas or quotes");
    cfg.datasets.push_back(std::move(spec));
  }

  cfg.fractions = get_or<std::vector<double>>(root, "fractions", {});
  if (cfg.fractions.empty()) config_error("config lists no training fractions");
  for (double f : cfg.fractions) {
    if (!(f > 0.0 && f < 1.0)) config_error("training fraction " + format_number(f) + " outside (0,1)");
  }
  if (root.contains("seeds")) {
    cfg.seeds = get_or<std::vector<std::uint64_t>>(root, "seeds", {});
  } else {
    const auto count = get_or<std::size_t>(root, "num_seeds", 10);
    const auto base = get_or<std::uint64_t>(root, "seed_base", 0);
    for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
  }
  if (cfg.seeds.empty()) config_error("config lists no seeds");

  if (root.contains("classifier")) {
    const Json& c = root["classifier"];
    reject_unknown(c, {"model", "patch_radius", "standardize", "epochs", "batch_size", "learning_rate", "l2"},
                   "classifier.");
    const auto model = get_or<std::string>(c, "model", "softmax");
    if (model == "softmax") {
      cfg.train.kind = ModelKind::Softmax;
    } else if (model == "centroid") {
      cfg.train.kind = ModelKind::Centroid;
    } else if (model == "none") {
      cfg.train_baseline = false;
    } else {
      config_error("classifier.model must be softmax, centroid or none");
    }
    cfg.train.features.patch_radius = get_or<std::size_t>(c, "patch_radius", cfg.train.features.patch_radius);
    cfg.train.features.standardize = get_or<bool>(c, "standardize", cfg.train.features.standardize);
    cfg.train.softmax.epochs = get_or<std::size_t>(c, "epochs", cfg.train.softmax.epochs);
    cfg.train.softmax.batch_size = get_or<std::size_t>(c, "batch_size", cfg.train.softmax.batch_size);
    cfg.train.softmax.learning_rate = get_or<double>(c, "learning_rate", cfg.train.softmax.learning_rate);
    cfg.train.softmax.l2 = get_or<double>(c, "l2", cfg.train.softmax.l2);
  }
  if (root.contains("superpixels")) {
    const Json& s = root["superpixels"];
    reject_unknown(s, {"method", "n", "compactness", "iterations", "seed", "rgb_bands"}, "superpixels.");
    const auto method = get_or<std::string>(s, "method", "slic");
    if (method == "slic") {
      cfg.superpixels.method = SuperpixelMethod::Slic;
    } else if (method == "affinity") {
      cfg.superpixels.method = SuperpixelMethod::Affinity;
    } else {
      config_error("superpixels.method must be slic or affinity");
    }
    cfg.superpixels.slic.n = get_or<std::size_t>(s, "n", cfg.superpixels.slic.n);
    cfg.superpixels.slic.compactness = get_or<double>(s, "compactness", cfg.superpixels.slic.compactness);
    cfg.superpixels.slic.iterations = get_or<std::size_t>(s, "iterations", cfg.superpixels.slic.iterations);
    cfg.superpixels.slic.seed = get_or<std::uint64_t>(s, "seed", cfg.superpixels.slic.seed);
    if (s.contains("rgb_bands")) {
      const auto b = get_or<std::vector<std::size_t>>(s, "rgb_bands", {});
      if (b.size() != 3) config_error("superpixels.rgb_bands needs three band indices");
      cfg.superpixels.rgb_bands = RgbBands{b[0], b[1], b[2]};
    }
  }
  if (root.contains("split")) {
    const Json& s = root["split"];
    reject_unknown(s, {"stratified", "min_per_class"}, "split.");
    cfg.stratified = get_or<bool>(s, "stratified", true);
    cfg.min_per_class = get_or<std::size_t>(s, "min_per_class", 1);
  }
  cfg.pin_train = get_or<bool>(root, "pin_train", false);
  cfg.output_dir = resolve(base_dir, get_or<std::string>(root, "output_dir", "results"));
  cfg.write_maps = get_or<bool>(root, "write_maps", false);
  if (cfg.superpixels.method == SuperpixelMethod::Affinity) {
    for (const auto& d : cfg.datasets) {
      if (!d.affinity && !d.superpixels) config_error("dataset '" + d.name + "' needs an affinity raster");
    }
  }
  if (!cfg.train_baseline) {
    for (const auto& d : cfg.datasets) {
      if (d.classmaps.empty()) config_error("classifier.model = none but dataset '" + d.name + "' has no classmaps");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path, 16u << 20);
  return parse_experiment_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

// ---- aggregation and formatting ----------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    sd = 0.0;
    return;
  }
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  sd = std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::vector<ReportRow> aggregate(const std::vector<RunRecord>& runs) {
  struct Group {
    ReportRow row;
    std::vector<double> oa, kappa;
  };
  std::vector<Group> groups;
  for (const auto& r : runs) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.row.dataset == r.dataset && g.row.method == r.method && g.row.train_fraction == r.train_fraction;
    });
    if (it == groups.end()) {
      groups.push_back({ReportRow{r.dataset, r.method, r.train_fraction}, {}, {}});
      it = groups.end() - 1;
    }
    it->oa.push_back(r.oa);
    it->kappa.push_back(r.kappa);
  }
  std::vector<ReportRow> out;
  out.reserve(groups.size());
  for (auto& g : groups) {
    ReportRow row = g.row;
    row.runs = g.oa.size();
    mean_std(g.oa, row.oa_mean, row.oa_std);
    mean_std(g.kappa, row.kappa_mean, row.kappa_std);
    row.oa_min = *std::min_element(g.oa.begin(), g.oa.end());
    row.oa_max = *std::max_element(g.oa.begin(), g.oa.end());
    out.push_back(row);
  }
  return out;
}

std::string runs_csv(const std::vector<RunRecord>& runs) {
  std::string out = "dataset,method,train_fraction,seed,oa,kappa\n";
  for (const auto& r : runs) {
    out += r.dataset + "," + r.method + "," + format_number(r.train_fraction) + "," + std::to_string(r.seed) + "," +
           format_number(r.oa) + "," + format_number(r.kappa) + "\n";
  }
  return out;
}

std::string aggregate_csv(const std::vector<ReportRow>& rows) {
  std::string out = "dataset,method,train_fraction,runs,oa_mean,oa_std,oa_min,oa_max,kappa_mean,kappa_std\n";
  for (const auto& r : rows) {
    out += r.dataset + "," + r.method + "," + format_number(r.train_fraction) + "," + std::to_string(r.runs) + "," +
           format_number(r.oa_mean) + "," + format_number(r.oa_std) + "," + format_number(r.oa_min) + "," +
           format_number(r.oa_max) + "," + format_number(r.kappa_mean) + "," + format_number(r.kappa_std) + "\n";
  }
  return out;
}

std::string format_table(const std::vector<ReportRow>& rows) {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return std::string(buf);
  };
  auto signed_pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", v * 100.0);
    return std::string(buf);
  };
  auto fraction_label = [](double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g%%", f * 100.0);
    return std::string(buf);
  };

  std::vector<std::string> datasets;
  for (const auto& r : rows) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  }
  std::ostringstream out;
  for (const auto& ds : datasets) {
    std::vector<double> fractions;
    std::vector<std::string> methods;
    for (const auto& r : rows) {
      if (r.dataset != ds) continue;
      if (std::find(fractions.begin(), fractions.end(), r.train_fraction) == fractions.end()) fractions.push_back(r.train_fraction);
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    auto find = [&](const std::string& m, double f) -> const ReportRow* {
      for (const auto& r : rows) {
        if (r.dataset == ds && r.method == m && r.train_fraction == f) return &r;
      }
      return nullptr;
    };
    out << "Overall accuracy (%) on " << ds << ", mean +- std over runs\n";
    out << std::string(24, ' ');
    for (double f : fractions) out << " | " << fraction_label(f);
    out << "\n";
    for (const auto& m : methods) {
      std::string label = m;
      label.resize(std::max<std::size_t>(label.size(), 24), ' ');
      out << label;
      for (double f : fractions) {
        const auto* r = find(m, f);
        out << " | " << (r ? pct(r->oa_mean) + " +- " + pct(r->oa_std) : std::string("-"));
      }
      out << "\n";
    }
    auto delta_row = [&](const std::string& base, const std::string& refined, const std::string& label) {
      if (std::find(methods.begin(), methods.end(), base) == methods.end()) return;
      std::string l = label;
      l.resize(std::max<std::size_t>(l.size(), 24), ' ');
      out << l;
      for (double f : fractions) {
        const auto* a = find(base, f);
        const auto* b = find(refined, f);
        if (!a || !b) {
          out << " | -";
          continue;
        }
        const double d = b->oa_mean - a->oa_mean;
        out << " | " << signed_pct(d) << (d > 0 ? " (up)" : d < 0 ? " (down)" : " (flat)");
      }
      out << "\n";
    };
    delta_row("raw", "refined", "delta refined-raw");
    for (const auto& m : methods) {
      if (m.rfind("imported", 0) == 0 && m.find("+refined") == std::string::npos) {
        std::string refined = m;
        refined.insert(std::string("imported").size(), "+refined");
        delta_row(m, refined, "delta " + m);
      }
    }
    out << "\n";
  }
  return out.str();
}

// ---- the runner --------------------------------------------------------

namespace {

struct PreparedDataset {
  const DatasetSpec* spec = nullptr;
  HyperCube cube;
  LabelMap labels;
  SuperpixelMap superpixels;
  std::vector<std::pair<std::string, ClassMap>> imported;
};

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')) c = '_';
  }
  return s;
}

SuperpixelMap make_superpixels(const ExperimentConfig& cfg, const DatasetSpec& spec, const HyperCube& cube) {
  SuperpixelMap sp;
  if (spec.superpixels) {
    sp = io::read_superpixels(*spec.superpixels);
  } else if (cfg.superpixels.method == SuperpixelMethod::Affinity) {
    if (!spec.affinity) fail(ErrorCode::InvalidConfig, "affinity superpixels need an affinity raster");
    const auto aff = io::read_affinity(*spec.affinity);
    require_same_dims(aff.dims(), cube.dims(), "affinity raster vs cube");
    sp = affinity_superpixels(aff, cfg.superpixels.slic.n, cfg.superpixels.slic.seed);
  } else {
    const auto bands = cfg.superpixels.rgb_bands.value_or(default_rgb_bands(cube.bands));
    sp = slic(cube_to_rgb(cube, bands), cfg.superpixels.slic);
  }
  require_same_dims(sp.dims(), cube.dims(), "superpixel map vs cube");
  return sp;
}

RunRecord score(const std::string& dataset, const std::string& method, double fraction, std::uint64_t seed,
                const ClassMap& map, const LabelMap& truth, const PixelMask& test) {
  const auto agreement = confusion_and_kappa(map, truth, test);
  RunRecord r;
  r.dataset = dataset;
  r.method = method;
  r.train_fraction = fraction;
  r.seed = seed;
  r.oa = agreement.oa;
  r.kappa = agreement.kappa;
  r.per_class_accuracy = agreement.per_class_accuracy;
  r.confusion = agreement.confusion;
  return r;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.datasets.empty() || config.fractions.empty() || config.seeds.empty()) {
    fail(ErrorCode::InvalidConfig, "experiment needs datasets, fractions and seeds");
  }
  std::filesystem::path maps_dir = config.output_dir / "maps";
  if (config.write_maps) {
    std::error_code ec;
    std::filesystem::create_directories(maps_dir, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot create '" + maps_dir.string() + "': " + ec.message());
  }

  ExperimentResult result;
  for (const auto& spec : config.datasets) {
    PreparedDataset data;
    data.spec = &spec;
    try {
      data.cube = io::read_cube(spec.cube);
      data.labels = io::read_labels(spec.labels);
      validate(data.cube, data.labels);
      data.superpixels = make_superpixels(config, spec, data.cube);
      for (const auto& path : spec.classmaps) {
        const std::string tag = spec.classmaps.size() == 1 ? "" : ":" + path.stem().string();
        data.imported.emplace_back(tag, import_classmap(path, data.labels));
      }
    } catch (const Error& e) {
      throw Error(e.code(), "dataset '" + spec.name + "': " + e.what());
    }

    const std::size_t jobs = config.fractions.size() * config.seeds.size();
    std::vector<std::vector<RunRecord>> per_job(jobs);
    parallel_for(jobs, [&](std::size_t j0, std::size_t j1) {
      for (std::size_t j = j0; j < j1; ++j) {
        const double fraction = config.fractions[j / config.seeds.size()];
        const std::uint64_t seed = config.seeds[j % config.seeds.size()];
        try {
          const auto masks = split(data.labels, SplitSpec{fraction, seed, config.stratified, config.min_per_class});
          auto& out = per_job[j];
          auto emit = [&](const std::string& method, const ClassMap& map) {
            out.push_back(score(spec.name, method, fraction, seed, map, data.labels, masks.test));
            if (config.write_maps) {
              const std::string stem = sanitize(spec.name) + "_" + sanitize(method) + "_f" +
                                       format_number(fraction) + "_s" + std::to_string(seed);
              io::write_classmap(map, maps_dir / (stem + ".hsp"));
              io::write_file(maps_dir / (stem + ".png"), render_class_map(map, default_palette()));
              out.back().map_file = "maps/" + stem + ".hsp";
            }
          };
          auto refine_from = [&](const ClassMap& z) {
            return config.pin_train ? refine(pin_training_labels(z, data.labels, masks.train), data.superpixels)
                                    : refine(z, data.superpixels);
          };
          if (config.train_baseline) {
            TrainConfig tc = config.train;
            tc.softmax.seed = seed;
            const auto model = train(data.cube, data.labels, masks.train, tc);
            const auto z = predict(model, data.cube);
            emit("raw", z);
            emit("refined", refine_from(z));
          }
          for (const auto& [tag, map] : data.imported) {
            emit("imported" + tag, map);
            emit("imported+refined" + tag, refine_from(map));
          }
        } catch (const Error& e) {
          throw Error(e.code(), "dataset '" + spec.name + "', fraction " + format_number(fraction) + ", seed " +
                                    std::to_string(seed) + ": " + e.what());
        }
      }
    });
    for (auto& recs : per_job) {
      for (auto& r : recs) result.runs.push_back(std::move(r));
    }
  }
  result.table = aggregate(result.runs);
  return result;
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create '" + config.output_dir.string() + "': " + ec.message());
  io::write_file(config.output_dir / "runs.csv", runs_csv(result.runs));
  io::write_file(config.output_dir / "aggregate.csv", aggregate_csv(result.table));
  io::write_file(config.output_dir / "table.txt", format_table(result.table));
}

}  // namespace hsi

// lidscope: local intrinsic dimension of embedding point clouds.
//
// Exit codes: 0 success, 1 pipeline error, 2 usage error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <typeinfo>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lidscope/lidscope.hpp"
#include "lidscope/selftest.hpp"
#include "lidscope/svg.hpp"
#include "lidscope/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lidscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// Shared options

struct CommonOptions {
    std::string input;
    std::size_t tokens = 60000;
    std::size_t neighbors = 128;
    std::size_t sequences = 0;  // 0 = every sequence in the dump
    std::uint64_t seed = 42;
    std::string estimator = "linfit";
    double discard_fraction = 0.1;
    bool local_discard = true;
    std::string out = "lidscope-out";
    std::size_t threads = 0;

    SamplingConfig sampling() const {
        SamplingConfig c;
        c.m_sequences = sequences == 0 ? SamplingConfig::kAllSequences : sequences;
        c.n_tokens = tokens;
        c.n_neighbors = neighbors;
        c.seed = seed;
        return c;
    }

    EstimatorOptions estimator_options() const {
        EstimatorOptions e;
        e.estimator = parse_estimator(estimator);
        e.discard_fraction = discard_fraction;
        e.discard_in_neighborhoods = local_discard;
        return e;
    }
};

void add_sampling_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--tokens,-N", o.tokens, "Token subsample size N")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--neighbors,-L", o.neighbors, "Local neighborhood size L (including the point itself)")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{3}, std::numeric_limits<std::size_t>::max()));
    cmd->add_option("--sequences,-M", o.sequences, "Sequence subsample size M, 0 keeps every sequence")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
}

void add_estimator_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--estimator", o.estimator, "TwoNN fit: linfit or mle")
        ->capture_default_str()
        ->check(CLI::IsMember({"linfit", "mle"}));
    cmd->add_option("--discard-fraction", o.discard_fraction, "Largest ratios dropped by the linear fit")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--local-discard", o.local_discard,
                    "Apply the discard fraction inside each neighborhood (true/false)")
        ->capture_default_str();
}

void add_run_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--out,-o", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads, 0 = $LIDSCOPE_THREADS or all cores")
        ->capture_default_str();
}

// ---------------------------------------------------------------------------
// Output handling

/// Collects the files of one run; everything written is removed again if the
/// run fails.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        if (!out) throw IoError("write failed for " + path.string());
        written_.push_back(path);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
        written_.clear();
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_dir_ = false;
};

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const FormatError*>(&e)) return "format_error";
    if (dynamic_cast<const DataError*>(&e)) return "data_error";
    if (dynamic_cast<const MetadataError*>(&e)) return "metadata_error";
    if (dynamic_cast<const ArgumentError*>(&e)) return "argument_error";
    if (dynamic_cast<const DegenerateError*>(&e)) return "degenerate_error";
    if (dynamic_cast<const AlignmentError*>(&e)) return "alignment_error";
    if (dynamic_cast<const InputError*>(&e)) return "input_error";
    if (dynamic_cast<const IoError*>(&e)) return "io_error";
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io_error";
    return "error";
}

json summary_json(const EstimateSummary& s) {
    return json{{"count", s.count}, {"mean", s.mean},   {"std", s.std},
                {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}};
}

json estimator_json(const EstimatorOptions& e) {
    return json{{"estimator", std::string(to_string(e.estimator))},
                {"discard_fraction", e.discard_fraction},
                {"local_discard", e.discard_in_neighborhoods}};
}

json sampling_json(const SamplingConfig& c) {
    json j;
    j["sequences"] = c.m_sequences == SamplingConfig::kAllSequences ? json("all") : json(c.m_sequences);
    j["tokens"] = c.n_tokens;
    j["neighbors"] = c.n_neighbors;
    j["seed"] = c.seed;
    return j;
}

std::string summary_csv_header() { return "count,mean,std,median,q1,q3"; }

std::string summary_csv(const EstimateSummary& s) {
    return std::to_string(s.count) + ',' + format_double(s.mean) + ',' + format_double(s.std) + ',' +
           format_double(s.median) + ',' + format_double(s.q1) + ',' + format_double(s.q3);
}

std::string estimates_csv(std::span<const double> values) {
    std::ostringstream s;
    write_estimates_csv(s, values);
    return s.str();
}

/// Resolved configuration of the active subcommand, in the format accepted by --config.
std::string resolved_config(const CLI::App& app, const CLI::App& cmd) {
    const std::string prefix = cmd.get_name() + ".";
    std::istringstream all(app.config_to_str(true, false));
    std::ostringstream out;
    out << "# lidscope " << cmd.get_name() << " resolved configuration\n";
    std::string line;
    while (std::getline(all, line)) {
        // Unset list options come out as empty strings that would not parse back.
        const bool empty_value = line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0;
        if (line.rfind(prefix, 0) == 0 && !empty_value) out << line << '\n';
    }
    return out.str();
}

template <typename Key>
std::map<Key, fs::path> parse_assignments(const std::vector<std::string>& items, const char* what) {
    std::map<Key, fs::path> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw ArgumentError(std::string("expected ") + what + "=PATH, got '" + item + "'");
        Key key;
        if constexpr (std::is_same_v<Key, std::string>) {
            key = item.substr(0, eq);
        } else {
            key = static_cast<Key>(parse_int(item.substr(0, eq), what));
        }
        if (!out.emplace(key, item.substr(eq + 1)).second)
            throw ArgumentError(std::string("duplicate ") + what + " '" + item.substr(0, eq) + "'");
    }
    return out;
}

PointCloud load_input(const std::string& path) {
    if (path.empty()) throw ArgumentError("no input file given (--input)");
    if (!fs::exists(path)) throw IoError("input file does not exist: " + path);
    return load_point_cloud(path);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_estimate(const CommonOptions& o, bool dump_neighbors, OutputSet& out, const std::string& config) {
    const auto cloud = load_input(o.input);
    const auto sampling = o.sampling();
    const auto est = o.estimator_options();
    const auto r = run_pipeline(cloud, sampling, est, o.threads);

    json j;
    j["input"] = o.input;
    j["summary"] = summary_json(r.summary);
    j["sampling"] = sampling_json(sampling);
    j["estimator"] = estimator_json(est);
    j["points"] = json{{"input", r.sample.info.n_input},
                       {"after_sequence_sampling", r.sample.info.n_after_sequences},
                       {"after_dedup", r.sample.info.n_after_dedup},
                       {"sampled", r.sample.info.n_sampled}};
    j["saturated"] = r.sample.info.saturated;
    j["degenerate_neighborhoods"] = r.estimates.n_degenerate;
    j["zero_distance_ratios"] = r.estimates.n_zero_distance;

    out.write("estimates.csv", estimates_csv(r.estimates.values));
    out.write_json("summary.json", j);
    if (dump_neighbors) {
        std::ostringstream s;
        write_neighbor_csv(s, knn_exact(r.sample.cloud, sampling.n_neighbors - 1, false, o.threads));
        out.write("neighbors.csv", s.str());
    }
    out.write("config.toml", config);
    std::cout << "mean " << r.summary.mean << " (n=" << r.summary.count << ", std " << r.summary.std
              << ")" << (r.sample.info.saturated ? ", token sample saturated" : "") << "\n";
    return kExitOk;
}

struct CompareOptions {
    std::string a, b;
    std::string label_a = "a", label_b = "b";
    bool paired = false;
};

int cmd_compare(const CommonOptions& o, const CompareOptions& c, OutputSet& out, const std::string& config) {
    const auto sampling = o.sampling();
    const auto est = o.estimator_options();
    struct Cohort {
        std::vector<double> values;
        std::optional<std::vector<TokenMeta>> meta;
        std::string source;
    };
    auto load = [&](const std::string& path) {
        if (!fs::exists(path)) throw IoError("input file does not exist: " + path);
        Cohort h;
        if (looks_like_lide(path)) {
            auto r = run_pipeline(load_point_cloud(path), sampling, est, o.threads);
            h.values = std::move(r.estimates.values);
            h.meta = r.sample.cloud.meta();
            h.source = "dump";
        } else {
            h.values = read_estimates_csv(path);
            h.source = "estimates";
        }
        return h;
    };
    const Cohort a = load(c.a);
    const Cohort b = load(c.b);
    const auto report = compare_cohorts(a.values, b.values);

    json j;
    j["a"] = json{{"label", c.label_a}, {"path", c.a}, {"source", a.source}, {"summary", summary_json(report.summary_a)}};
    j["b"] = json{{"label", c.label_b}, {"path", c.b}, {"source", b.source}, {"summary", summary_json(report.summary_b)}};
    j["delta_mean"] = report.delta_mean;
    j["smd"] = report.smd;
    if (a.source == "dump" || b.source == "dump") {
        j["sampling"] = sampling_json(sampling);
        j["estimator"] = estimator_json(est);
    }

    std::ostringstream cohorts;
    cohorts << "model,estimate\n";
    for (double v : a.values) cohorts << c.label_a << ',' << format_double(v) << '\n';
    for (double v : b.values) cohorts << c.label_b << ',' << format_double(v) << '\n';

    if (c.paired) {
        const auto d = paired_token_compare(a.values, b.values, a.meta);
        std::ostringstream s;
        s << "row,delta" << (d.meta ? ",seq_id,pos,token_text" : "") << '\n';
        for (std::size_t i = 0; i < d.delta.size(); ++i) {
            s << i << ',' << format_double(d.delta[i]);
            if (d.meta) {
                const auto& m = (*d.meta)[i];
                s << ',' << m.seq_id << ',' << m.pos << ',' << json(m.token_text).dump();
            }
            s << '\n';
        }
        out.write("deltas.csv", s.str());
        j["paired"] = true;
    }
    out.write_json("comparison.json", j);
    out.write("cohorts.csv", cohorts.str());
    out.write("config.toml", config);
    std::cout << "smd " << report.smd << " (mean " << report.summary_a.mean << " vs " << report.summary_b.mean << ")\n";
    return kExitOk;
}

struct SweepOptions {
    std::vector<std::string> dumps;
    std::vector<std::size_t> m_list{0};
    std::vector<std::size_t> n_list{60000};
    std::vector<std::size_t> l_list{128};
    std::vector<std::uint64_t> seeds{42};
};

int cmd_sweep(const CommonOptions& o, const SweepOptions& s, OutputSet& out, const std::string& config) {
    auto dumps = parse_assignments<std::string>(s.dumps, "split");
    if (!o.input.empty()) dumps.emplace("default", o.input);
    if (dumps.empty()) throw ArgumentError("sweep needs --input or at least one --dump SPLIT=PATH");
    SweepGrid grid;
    for (auto m : s.m_list) grid.m_values.push_back(m == 0 ? SamplingConfig::kAllSequences : m);
    grid.n_values = s.n_list;
    grid.l_values = s.l_list;
    grid.seeds = s.seeds;
    const auto est = o.estimator_options();
    const auto result = sensitivity_sweep(dumps, grid, est, o.threads);

    auto m_text = [](std::size_t m) { return m == SamplingConfig::kAllSequences ? std::string("all") : std::to_string(m); };
    std::ostringstream csv;
    csv << "split,M,N,L,seed," << summary_csv_header() << ",n_sampled,error\n";
    json rows = json::array(), failures = json::array();
    for (const auto& r : result.rows) {
        csv << r.split << ',' << m_text(r.m) << ',' << r.n << ',' << r.l << ',' << r.seed << ','
            << (r.summary ? summary_csv(*r.summary) : std::string(",,,,,")) << ',' << r.n_sampled << ','
            << json(r.error).dump() << '\n';
        json row{{"split", r.split}, {"M", m_text(r.m)}, {"N", r.n}, {"L", r.l}, {"seed", r.seed}};
        if (r.summary) {
            row["summary"] = summary_json(*r.summary);
            row["n_sampled"] = r.n_sampled;
        } else {
            row["error"] = r.error;
            failures.push_back(row);
        }
        rows.push_back(row);
    }

    // One box per (split, M, N, L) over the per-seed mean estimates.
    std::vector<svg::Box> boxes;
    std::map<std::string, std::vector<double>> groups;
    std::vector<std::string> order;
    for (const auto& r : result.rows) {
        if (!r.summary) continue;
        const std::string key = r.split + " M=" + m_text(r.m) + " N=" + std::to_string(r.n) + " L=" + std::to_string(r.l);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(r.summary->mean);
    }
    for (const auto& key : order) {
        auto v = groups[key];
        std::sort(v.begin(), v.end());
        boxes.push_back({key, v.front(), quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75), v.back()});
    }

    out.write("sweep.csv", csv.str());
    out.write_json("sweep.json", json{{"estimator", estimator_json(est)}, {"rows", rows}});
    out.write_json("failures.json", failures);
    out.write("sweep.svg", svg::box_chart("Mean local estimate across seeds", "mean local estimate", boxes));
    out.write("config.toml", config);
    std::cout << result.rows.size() << " cells, " << failures.size() << " failed\n";
    return failures.size() == result.rows.size() ? kExitPipeline : kExitOk;
}

struct NoiseOptions {
    std::vector<double> sigmas{0.0, 0.001, 0.002, 0.003, 0.004, 0.01};
    std::vector<std::uint64_t> noise_seeds{1, 2, 3};
    std::size_t hausdorff_subsample = 0;
};

int cmd_noise(const CommonOptions& o, const NoiseOptions& n, OutputSet& out, const std::string& config) {
    const auto cloud = load_input(o.input);
    NoiseSweepOptions opts;
    opts.sigmas = n.sigmas;
    opts.seeds = n.noise_seeds;
    opts.config = o.sampling();
    opts.estimator = o.estimator_options();
    if (n.hausdorff_subsample > 0) opts.hausdorff.approx_subsample = n.hausdorff_subsample;
    const auto rows = noise_sweep(cloud, opts, o.threads);

    std::ostringstream csv;
    csv << "sigma,seed,hausdorff,hausdorff_approximate,global_clean,global_noisy,mean_local_clean,"
           "mean_local_noisy,std_local_clean,std_local_noisy\n";
    json jrows = json::array();
    for (const auto& r : rows) {
        csv << format_double(r.sigma) << ',' << r.seed << ',' << format_double(r.hausdorff) << ','
            << (r.hausdorff_approximate ? "true" : "false") << ',' << format_double(r.global_clean) << ','
            << format_double(r.global_noisy) << ',' << format_double(r.mean_local_clean) << ','
            << format_double(r.mean_local_noisy) << ',' << format_double(r.std_local_clean) << ','
            << format_double(r.std_local_noisy) << '\n';
        jrows.push_back(json{{"sigma", r.sigma},
                             {"seed", r.seed},
                             {"hausdorff", r.hausdorff},
                             {"hausdorff_approximate", r.hausdorff_approximate},
                             {"global_clean", r.global_clean},
                             {"global_noisy", r.global_noisy},
                             {"mean_local_clean", r.mean_local_clean},
                             {"mean_local_noisy", r.mean_local_noisy},
                             {"std_local_clean", r.std_local_clean},
                             {"std_local_noisy", r.std_local_noisy}});
    }
    // Plot against the Hausdorff distance, averaged over seeds per sigma.
    svg::Series global{"global", {}, {}}, mean{"mean local", {}, {}}, spread{"std local", {}, {}};
    for (double sigma : n.sigmas) {
        double h = 0, g = 0, m = 0, s = 0;
        std::size_t k = 0;
        for (const auto& r : rows) {
            if (r.sigma != sigma) continue;
            h += r.hausdorff, g += r.global_noisy, m += r.mean_local_noisy, s += r.std_local_noisy, ++k;
        }
        const double kk = static_cast<double>(k);
        for (auto* series : {&global, &mean, &spread}) series->x.push_back(h / kk);
        global.y.push_back(g / kk);
        mean.y.push_back(m / kk);
        spread.y.push_back(s / kk);
    }
    out.write("noise.csv", csv.str());
    out.write_json("noise.json", json{{"sampling", sampling_json(opts.config)},
                                      {"estimator", estimator_json(opts.estimator)},
                                      {"rows", jrows}});
    out.write("noise.svg", svg::line_chart("Estimates under Gaussian noise", "Hausdorff distance to clean cloud",
                                           "estimate", {global, mean, spread}));
    out.write("config.toml", config);
    std::cout << rows.size() << " noise rows\n";
    return kExitOk;
}

int cmd_layers(const CommonOptions& o, const std::vector<std::string>& layer_dumps, OutputSet& out,
               const std::string& config) {
    const auto dumps = parse_assignments<int>(layer_dumps, "layer");
    if (dumps.empty()) throw ArgumentError("layers needs at least one --layer-dump LAYER=PATH");
    const auto sampling = o.sampling();
    const auto est = o.estimator_options();
    const auto profile = layer_profile(dumps, sampling, est, o.threads);

    std::ostringstream csv;
    csv << "layer," << summary_csv_header() << ",n_sampled\n";
    json rows = json::array(), failures = json::array();
    svg::Series mean{"mean local estimate", {}, {}};
    for (const auto& r : profile.rows) {
        csv << r.layer << ',' << summary_csv(r.summary) << ',' << r.n_sampled << '\n';
        rows.push_back(json{{"layer", r.layer}, {"summary", summary_json(r.summary)}, {"n_sampled", r.n_sampled}});
        mean.x.push_back(r.layer);
        mean.y.push_back(r.summary.mean);
    }
    for (const auto& [layer, msg] : profile.missing) failures.push_back(json{{"layer", layer}, {"error", msg}});

    out.write("layers.csv", csv.str());
    out.write_json("layers.json",
                   json{{"sampling", sampling_json(sampling)}, {"estimator", estimator_json(est)}, {"rows", rows}});
    out.write_json("failures.json", failures);
    out.write("layers.svg", svg::line_chart("Mean local estimate per layer", "layer", "mean local estimate", {mean}));
    out.write("config.toml", config);
    std::cout << profile.rows.size() << " layers, " << profile.missing.size() << " skipped\n";
    return profile.rows.empty() ? kExitPipeline : kExitOk;
}

struct TrackCliOptions {
    std::vector<std::string> checkpoints;
    std::string metrics;
    std::size_t window = 5;
    double tolerance = 0.02;
    std::string split_label = "train";
};

int cmd_track(const TrackCliOptions& t, OutputSet& out, const std::string& config) {
    std::vector<std::pair<std::int64_t, fs::path>> files;
    for (const auto& item : t.checkpoints) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw ArgumentError("expected STEP=PATH, got '" + item + "'");
        files.emplace_back(parse_int(item.substr(0, eq), "step"), item.substr(eq + 1));
    }
    if (files.empty()) throw ArgumentError("track needs at least one --checkpoint STEP=PATH");
    std::optional<fs::path> metrics;
    if (!t.metrics.empty()) metrics = t.metrics;
    const auto series = track_checkpoints(files, metrics, TrackOptions{t.window, t.tolerance}, t.split_label);

    std::vector<std::string> metric_names;
    for (const auto& p : series.points)
        for (const auto& [name, v] : p.metrics)
            if (std::find(metric_names.begin(), metric_names.end(), name) == metric_names.end())
                metric_names.push_back(name);
    std::sort(metric_names.begin(), metric_names.end());

    std::ostringstream csv;
    csv << "step," << summary_csv_header();
    for (const auto& n : metric_names) csv << ',' << n;
    csv << '\n';
    json points = json::array();
    svg::Series mean{"mean local estimate (" + t.split_label + ")", {}, {}};
    for (const auto& p : series.points) {
        csv << p.step << ',' << summary_csv(p.summary);
        json metrics_json = json::object();
        for (const auto& n : metric_names) {
            csv << ',';
            if (auto it = p.metrics.find(n); it != p.metrics.end()) {
                csv << format_double(it->second);
                metrics_json[n] = it->second;
            }
        }
        csv << '\n';
        points.push_back(json{{"step", p.step}, {"summary", summary_json(p.summary)}, {"metrics", metrics_json}});
        mean.x.push_back(static_cast<double>(p.step));
        mean.y.push_back(p.summary.mean);
    }
    json j{{"split", series.split_label},
           {"window", t.window},
           {"tolerance", t.tolerance},
           {"min_step", series.min_step},
           {"stabilized_step", series.stabilized_step ? json(*series.stabilized_step) : json(nullptr)},
           {"points", points}};
    out.write("track.csv", csv.str());
    out.write_json("track.json", j);
    out.write("track.svg", svg::line_chart("Mean local estimate over training", "step", "mean local estimate", {mean}));
    out.write("config.toml", config);
    std::cout << "minimum at step " << series.min_step << ", stabilization "
              << (series.stabilized_step ? "at step " + std::to_string(*series.stabilized_step) : std::string("not reached"))
              << "\n";
    return kExitOk;
}

int cmd_selftest(const CommonOptions& o, const std::vector<std::string>& only) {
    selftest::Options opts;
    opts.estimator = o.estimator_options();
    opts.threads = o.threads;
    bool all_ok = true;
    for (const auto& check : selftest::all_checks()) {
        if (!only.empty() && std::find(only.begin(), only.end(), check.key) == only.end()) continue;
        const auto r = check.run(opts);
        all_ok = all_ok && r.passed;
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " (" << std::fixed << std::setprecision(1)
                  << r.seconds << " s): " << std::defaultfloat << r.detail << std::endl;
    }
    return all_ok ? kExitOk : kExitPipeline;
}

struct SynthOptions {
    std::string kind = "cube";
    std::size_t points = 10000;
    std::size_t intrinsic = 2;
    std::size_t ambient = 64;
    std::uint64_t seed = 1;
    std::size_t tokens_per_sequence = 0;
    bool float64 = false;
    std::string output;
};

int cmd_synth(const SynthOptions& s) {
    synthetic::Matrix m;
    if (s.kind == "cube") {
        m = synthetic::embed(synthetic::uniform_cube(s.points, s.intrinsic, derive_seed(s.seed, 1)), s.ambient,
                             derive_seed(s.seed, 2));
    } else if (s.kind == "ball") {
        m = synthetic::embed(synthetic::uniform_ball(s.points, s.intrinsic, derive_seed(s.seed, 1)), s.ambient,
                             derive_seed(s.seed, 2));
    } else if (s.kind == "mixture") {
        m = synthetic::from_cloud(synthetic::disk_and_ball(s.points / 2, s.ambient, s.seed).cloud);
    } else {
        throw ArgumentError("unknown synthetic kind '" + s.kind + "'");
    }
    std::optional<std::vector<TokenMeta>> meta;
    if (s.tokens_per_sequence > 0) {
        meta.emplace();
        for (std::size_t i = 0; i < static_cast<std::size_t>(m.rows()); ++i) {
            meta->push_back(TokenMeta{static_cast<std::int64_t>(i / s.tokens_per_sequence),
                                      static_cast<std::int64_t>(i % s.tokens_per_sequence),
                                      "tok" + std::to_string(i), -1, EmbeddingMode::regular});
        }
    }
    const auto cloud = synthetic::to_cloud(m, s.float64 ? Precision::float64 : Precision::float32);
    save_point_cloud(PointCloud(cloud.n_points(), cloud.dim(),
                                std::vector<double>(cloud.data().begin(), cloud.data().end()), std::move(meta),
                                cloud.precision()),
                     s.output);
    std::cout << "wrote " << cloud.n_points() << " x " << cloud.dim() << " to " << s.output << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lidscope: local intrinsic dimension estimates of embedding point clouds"};
    app.set_config("--config", "", "Read options from a TOML file (as written to <out>/config.toml)");
    app.require_subcommand(0, 1);

    CommonOptions common;
    bool dump_neighbors = false;
    CompareOptions compare;
    SweepOptions sweep;
    NoiseOptions noise;
    std::vector<std::string> layer_dumps;
    TrackCliOptions track;
    std::vector<std::string> only;
    SynthOptions synth;

    auto* estimate = app.add_subcommand("estimate", "Local TwoNN estimates of one dump");
    estimate->add_option("--input,-i", common.input, "LIDE point cloud file")->required();
    add_sampling_options(estimate, common);
    add_estimator_options(estimate, common);
    add_run_options(estimate, common);
    estimate->add_flag("--dump-neighbors", dump_neighbors, "Also write neighbors.csv");

    auto* cmp = app.add_subcommand("compare", "Compare two cohorts of local estimates");
    cmp->add_option("--a", compare.a, "First cohort: estimates.csv or LIDE dump")->required();
    cmp->add_option("--b", compare.b, "Second cohort: estimates.csv or LIDE dump")->required();
    cmp->add_option("--label-a", compare.label_a, "Label of the first cohort")->capture_default_str();
    cmp->add_option("--label-b", compare.label_b, "Label of the second cohort")->capture_default_str();
    cmp->add_flag("--paired", compare.paired, "Write per-token differences a - b (identical subsamples)");
    add_sampling_options(cmp, common);
    add_estimator_options(cmp, common);
    add_run_options(cmp, common);

    auto* sw = app.add_subcommand("sweep", "Sensitivity to M, N, L and the sampling seed");
    sw->add_option("--input,-i", common.input, "LIDE dump (split 'default')");
    sw->add_option("--dump", sweep.dumps, "SPLIT=PATH, repeatable");
    sw->add_option("--m-list", sweep.m_list, "Sequence sample sizes, 0 = all")->delimiter(',')->capture_default_str();
    sw->add_option("--n-list", sweep.n_list, "Token sample sizes")->delimiter(',')->capture_default_str();
    sw->add_option("--l-list", sweep.l_list, "Neighborhood sizes")->delimiter(',')->capture_default_str();
    sw->add_option("--seeds", sweep.seeds, "Sampling seeds")->delimiter(',')->capture_default_str();
    add_estimator_options(sw, common);
    add_run_options(sw, common);

    auto* nz = app.add_subcommand("noise", "Robustness to additive Gaussian noise");
    nz->add_option("--input,-i", common.input, "LIDE point cloud file")->required();
    nz->add_option("--sigmas", noise.sigmas, "Noise standard deviations")->delimiter(',')->capture_default_str();
    nz->add_option("--noise-seeds", noise.noise_seeds, "Noise seeds")->delimiter(',')->capture_default_str();
    nz->add_option("--hausdorff-subsample", noise.hausdorff_subsample,
                   "Approximate Hausdorff from this many query points per side, 0 = exact")
        ->capture_default_str();
    add_sampling_options(nz, common);
    add_estimator_options(nz, common);
    add_run_options(nz, common);

    auto* ly = app.add_subcommand("layers", "Mean local estimate per layer");
    ly->add_option("--layer-dump", layer_dumps, "LAYER=PATH, repeatable (negative layers count from the end)");
    add_sampling_options(ly, common);
    add_estimator_options(ly, common);
    add_run_options(ly, common);

    auto* tr = app.add_subcommand("track", "Mean local estimate across training checkpoints");
    tr->add_option("--checkpoint", track.checkpoints, "STEP=estimates.csv, repeatable, increasing steps");
    tr->add_option("--metrics", track.metrics, "CSV with header step,<metric>...");
    tr->add_option("--window", track.window, "Stabilization window length")->capture_default_str()->check(CLI::PositiveNumber);
    tr->add_option("--tolerance", track.tolerance, "Stabilization relative range threshold")->capture_default_str();
    tr->add_option("--split-label", track.split_label, "Label of the split the estimates come from")->capture_default_str();
    add_run_options(tr, common);

    auto* st = app.add_subcommand("selftest", "Run the synthetic-manifold acceptance checks");
    st->add_option("--only", only, "Run only these checks");
    add_estimator_options(st, common);
    st->add_option("--threads", common.threads, "Worker threads, 0 = $LIDSCOPE_THREADS or all cores")
        ->capture_default_str();

    auto* sy = app.add_subcommand("synth", "Write a synthetic manifold sample as a LIDE file");
    sy->add_option("--kind", synth.kind, "cube, ball or mixture (2-D disk + 5-D ball)")
        ->capture_default_str()
        ->check(CLI::IsMember({"cube", "ball", "mixture"}));
    sy->add_option("--points,-n", synth.points, "Number of points")->capture_default_str();
    sy->add_option("--intrinsic,-d", synth.intrinsic, "Intrinsic dimension")->capture_default_str();
    sy->add_option("--ambient,-D", synth.ambient, "Ambient dimension")->capture_default_str();
    sy->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    sy->add_option("--tokens-per-sequence", synth.tokens_per_sequence,
                   "Attach metadata grouping consecutive points into sequences of this length")
        ->capture_default_str();
    sy->add_flag("--float64", synth.float64, "Store float64 instead of float32");
    sy->add_option("--output", synth.output, "Output LIDE path")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kExitUsage;
    }
    CLI::App* cmd = app.get_subcommands().front();

    if (cmd == st) {
        try {
            return cmd_selftest(common, only);
        } catch (const std::exception& e) {
            std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
            return kExitPipeline;
        }
    }

    OutputSet out(common.out);
    try {
        const std::string config = resolved_config(app, *cmd);
        if (cmd == estimate) return cmd_estimate(common, dump_neighbors, out, config);
        if (cmd == cmp) return cmd_compare(common, compare, out, config);
        if (cmd == sw) return cmd_sweep(common, sweep, out, config);
        if (cmd == nz) return cmd_noise(common, noise, out, config);
        if (cmd == ly) return cmd_layers(common, layer_dumps, out, config);
        if (cmd == tr) return cmd_track(track, out, config);
        if (cmd == sy) return cmd_synth(synth);
    } catch (const std::exception& e) {
        out.rollback();
        std::cerr << json{{"command", cmd->get_name()}, {"error", error_kind(e)}, {"message", e.what()}}.dump()
                  << "\n";
        return kExitPipeline;
    }
    return kExitUsage;
}

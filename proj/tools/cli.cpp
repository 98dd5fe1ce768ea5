#include "cli.hpp"

#include "splatc/codec.hpp"
#include "splatc/image_io.hpp"
#include "splatc/metrics.hpp"
#include "splatc/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace splatc::cli {

using nlohmann::json;

namespace {

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string fixed(double v, int precision) {
    if (std::isnan(v)) {
        return "";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Options shared by encode and sweep.
struct FitFlags {
    std::size_t gaussians = 0;
    std::size_t iters = 0;
    std::optional<double> lr;
    std::optional<double> lr_mu;
    std::optional<double> lr_chol;
    std::optional<double> lr_shear;
    std::optional<double> lr_color;
    double l1 = 0.0;
    std::string init = "structured";
    std::optional<double> prune_ratio;
    std::optional<double> prune_threshold;
    double prune_at = 0.7;
    double sigma_scale = 0.5;
    std::uint64_t seed = 0;
    int tile = kDefaultTileSize;
    int workers = 0;
    std::string config;

    void attach(CLI::App* app, bool with_counts) {
        const FitConfig defaults;
        gaussians = defaults.num_gaussians;
        iters = defaults.iterations;
        if (with_counts) {
            app->add_option("-n,--gaussians", gaussians, "Number of Gaussians")->capture_default_str();
        }
        app->add_option("--iters", iters, "Optimization iterations")->capture_default_str();
        app->add_option("--lr", lr, "Scale all learning rates together (1e-2 gives the defaults)");
        app->add_option("--lr-mu", lr_mu, "Position rate in units of the grid cell sigma (default 0.04)");
        app->add_option("--lr-chol", lr_chol, "Rate for the Cholesky diagonal (default 1e-2)");
        app->add_option("--lr-shear", lr_shear, "Cholesky off-diagonal rate in units of the cell sigma (default 0.1)");
        app->add_option("--lr-color", lr_color, "Rate for colors (default 1e-2)");
        app->add_option("--l1", l1, "L1 weight on colors")->capture_default_str();
        if (with_counts) {
            app->add_option("--init", init, "Initialization: structured|random")
                ->check(CLI::IsMember({"structured", "random"}))
                ->capture_default_str();
            auto* ratio = app->add_option("--prune-ratio", prune_ratio, "Fraction of splats to prune");
            auto* thresh = app->add_option("--prune-threshold", prune_threshold, "Luminance pruning threshold");
            ratio->excludes(thresh);
        }
        app->add_option("--prune-at", prune_at, "Pruning point as a fraction of the iterations")
            ->capture_default_str();
        app->add_option("--init-sigma", sigma_scale, "Structured-init sigma as a fraction of the cell side")
            ->capture_default_str();
        app->add_option("--seed", seed, "Random seed")->capture_default_str();
        app->add_option("--tile", tile, "Tile size in pixels")->capture_default_str();
        app->add_option("--workers", workers, "Worker threads (0: SPLATC_WORKERS or all cores)")
            ->capture_default_str();
        app->add_option("--config", config, "key=value file; flags on the command line take precedence");
    }

    FitConfig to_config() const {
        FitConfig c;
        c.num_gaussians = gaussians;
        c.iterations = iters;
        if (lr) {
            c.set_learning_rate(*lr);
        }
        if (lr_mu) {
            c.lr_mu = *lr_mu;
        }
        if (lr_chol) {
            c.lr_chol = *lr_chol;
        }
        if (lr_shear) {
            c.lr_shear = *lr_shear;
        }
        if (lr_color) {
            c.lr_color = *lr_color;
        }
        c.l1_weight = l1;
        c.init_strategy = parse_init_strategy(init);
        c.init_sigma_scale = sigma_scale;
        if (prune_ratio || prune_threshold) {
            PruneConfig p;
            p.schedule_fraction = prune_at;
            if (prune_ratio) {
                p.target_ratio = *prune_ratio;
                p.max_prune_fraction = std::max(p.max_prune_fraction, *prune_ratio);
            } else {
                p.luminance_threshold = *prune_threshold;
            }
            c.prune = p;
        }
        c.seed = seed;
        c.tile_size = tile;
        c.workers = workers > 0 ? workers : default_workers();
        return c;
    }
};

json config_json(const FitConfig& c) {
    json j;
    j["num_gaussians"] = c.num_gaussians;
    j["iterations"] = c.iterations;
    j["lr_mu"] = c.lr_mu;
    j["lr_chol"] = c.lr_chol;
    j["lr_shear"] = c.lr_shear;
    j["lr_color"] = c.lr_color;
    j["l1_weight"] = c.l1_weight;
    j["init"] = std::string(to_string(c.init_strategy));
    j["init_sigma_scale"] = c.init_sigma_scale;
    if (c.prune) {
        j["prune"] = {{"target_ratio", c.prune->target_ratio ? json(*c.prune->target_ratio) : json(nullptr)},
                      {"luminance_threshold", c.prune->luminance_threshold},
                      {"max_prune_fraction", c.prune->max_prune_fraction},
                      {"schedule_fraction", c.prune->schedule_fraction}};
    } else {
        j["prune"] = nullptr;
    }
    j["seed"] = c.seed;
    j["tile_size"] = c.tile_size;
    j["workers"] = c.workers;
    return j;
}

json quality_json(const QualityReport& q) {
    return {{"mse", number(q.mse)},
            {"psnr_db", number(q.psnr_db)},
            {"compression_ratio", number(q.compression_ratio)},
            {"compression_ratio_with_header", number(q.compression_ratio_with_header)},
            {"n_gaussians", q.n_gaussians},
            {"bytes_payload", q.bytes_payload},
            {"bytes_total", q.bytes_total}};
}

// Fills options that were not given on the command line from a key=value
// file. Keys are long option names without the leading dashes.
void apply_config_file(CLI::App* app, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open config file " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto eq = line.find('=');
        const std::string key = CLI::detail::trim_copy(line.substr(0, eq));
        if (key.empty() && eq == std::string::npos) {
            continue;
        }
        if (eq == std::string::npos || key.empty()) {
            throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        const std::string value = CLI::detail::trim_copy(line.substr(eq + 1));
        CLI::Option* opt = app->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
            throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

int exit_code_for(const Error& e) {
    return e.code() == ErrorCode::NonFiniteLoss ? kExitDiverged : kExitBadInput;
}

std::string basename(const std::string& path) {
    return std::filesystem::path(path).filename().string();
}

// ---- encode ---------------------------------------------------------------

struct EncodeArgs {
    std::string input;
    std::string output;
    bool json_out = false;
    FitFlags fit;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
    ImageBuffer target;
    FitConfig config;
    try {
        config = a.fit.to_config();
        config.check();
        target = read_image(a.input);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
    if (target.width() < 8 || target.height() < 8) {
        err << "error: " << a.input << ": image must be at least 8x8\n";
        return kExitBadInput;
    }
    if (target.width() > 65535 || target.height() > 65535) {
        err << "error: " << a.input << ": image dimensions exceed 65535\n";
        return kExitBadInput;
    }

    FitResult result;
    std::vector<std::uint8_t> bytes;
    try {
        result = fit(target, config);
        bytes = encode_gsf(result.set);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }

    const ImageBuffer decoded = decode_to_image(bytes, config.tile_size, config.workers);
    const QualityReport q = quality_report(target, decoded, result.set.size());

    try {
        write_file_atomic(a.output, bytes);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitWriteFailed;
    }

    std::ostringstream summary;
    summary << "encoded " << a.input << " -> " << a.output << ": " << target.width() << "x" << target.height() << ", "
            << result.set.size() << " gaussians, " << bytes.size() << " bytes, ratio " << fixed(q.compression_ratio, 2)
            << ", psnr " << fixed(q.psnr_db, 2) << " dB, " << fixed(result.report.wall_time, 1) << " s";
    if (a.json_out) {
        const FitReport& r = result.report;
        json j;
        j["command"] = "encode";
        j["input"] = a.input;
        j["output"] = a.output;
        j["width"] = target.width();
        j["height"] = target.height();
        j["config"] = config_json(config);
        j["report"] = quality_json(q);
        json fitj;
        fitj["initial_psnr_db"] = number(r.initial_psnr);
        fitj["final_psnr_db"] = number(r.final_psnr);
        fitj["wall_time_s"] = r.wall_time;
        if (r.prune_stats) {
            fitj["prune"] = {{"pruned_count", r.prune_stats->pruned_count},
                             {"alive_before", r.prune_stats->alive_before},
                             {"pruning_ratio", r.prune_stats->pruning_ratio},
                             {"threshold_used", number(r.prune_stats->threshold_used)}};
        } else {
            fitj["prune"] = nullptr;
        }
        json traj = json::array();
        for (std::size_t i = 0; i < r.logged_iterations.size(); ++i) {
            traj.push_back({{"iteration", r.logged_iterations[i]},
                            {"loss", number(r.loss_trajectory[i])},
                            {"psnr_db", number(r.psnr_trajectory[i])},
                            {"alive", r.alive_counts[i]}});
        }
        fitj["trajectory"] = std::move(traj);
        j["fit"] = std::move(fitj);
        err << summary.str() << '\n';
        out << j.dump(2) << '\n';
    } else {
        out << summary.str() << '\n';
    }
    return kExitOk;
}

// ---- decode ---------------------------------------------------------------

struct DecodeArgs {
    std::string input;
    std::string output;
    int tile = kDefaultTileSize;
    int workers = 0;
    bool json_out = false;
};

int cmd_decode(const DecodeArgs& a, std::ostream& out, std::ostream& err) {
    ImageBuffer image;
    GsfHeader header;
    try {
        const auto bytes = read_file(a.input);
        header = read_gsf_header(bytes);
        image = decode_to_image(bytes, a.tile, a.workers > 0 ? a.workers : default_workers());
    } catch (const Error& e) {
        err << "error: " << a.input << ": " << e.what() << '\n';
        return kExitBadInput;
    }
    try {
        write_image(a.output, image);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitWriteFailed;
    }
    if (a.json_out) {
        out << json{{"command", "decode"},
                    {"input", a.input},
                    {"output", a.output},
                    {"width", header.width},
                    {"height", header.height},
                    {"count", header.count}}
                   .dump(2)
            << '\n';
    } else {
        out << "decoded " << a.input << " -> " << a.output << ": " << header.width << "x" << header.height << ", "
            << header.count << " gaussians\n";
    }
    return kExitOk;
}

// ---- info -----------------------------------------------------------------

int cmd_info(const std::string& path, bool json_out, std::ostream& out, std::ostream& err) {
    GsfHeader h;
    std::size_t total = 0;
    try {
        const auto bytes = read_file(path);
        h = read_gsf_header(bytes);
        (void)decode_gsf(bytes);
        total = bytes.size();
    } catch (const Error& e) {
        err << "error: " << path << ": " << e.what() << '\n';
        return kExitBadInput;
    }
    const std::size_t payload = static_cast<std::size_t>(h.count) * kBytesPerSplat;
    const double ratio = h.count == 0 ? std::numeric_limits<double>::infinity()
                                      : compression_ratio(h.width, h.height, h.count);
    if (json_out) {
        out << json{{"command", "info"},
                    {"file", path},
                    {"version", h.version},
                    {"flags", h.flags},
                    {"width", h.width},
                    {"height", h.height},
                    {"count", h.count},
                    {"payload_bytes", payload},
                    {"total_bytes", total},
                    {"compression_ratio", number(ratio)}}
                   .dump(2)
            << '\n';
    } else {
        out << "width " << h.width << '\n'
            << "height " << h.height << '\n'
            << "count " << h.count << '\n'
            << "payload_bytes " << payload << '\n'
            << "total_bytes " << total << '\n'
            << "ratio " << fixed(ratio, 2) << '\n';
    }
    return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
    std::vector<std::string> images;
    std::string manifest;
    std::string cache_dir = ".splatc-cache";
    bool synthetic = false;
    int synthetic_size = 224;
    int downsample = 0;
    std::vector<std::size_t> counts{400, 784, 1600, 3136, 4900};
    std::vector<std::string> inits{"structured", "random"};
    std::vector<double> ratios{0.0, 0.2, 0.5, 0.8};
    std::string output;
    bool json_out = false;
    bool quiet = false;
    FitFlags fit;
};

json sweep_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const SweepRow& r : rows) {
        arr.push_back({{"image", r.image},
                       {"n_gaussians", r.n_gaussians},
                       {"init", std::string(to_string(r.init))},
                       {"requested_prune_ratio", r.requested_prune_ratio},
                       {"prune_ratio", r.prune_ratio},
                       {"l1_weight", r.l1_weight},
                       {"final_psnr_db", number(r.final_psnr_db)},
                       {"compression_ratio", number(r.compression_ratio)},
                       {"wall_time_s", r.wall_time_s},
                       {"alive_after_prune", r.alive_after_prune},
                       {"psnr_drop_db", number(r.psnr_drop_db)}});
    }
    return arr;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    std::vector<CorpusImage> corpus;
    try {
        spec.base = a.fit.to_config();
        spec.splat_counts = a.counts;
        spec.prune_ratios = a.ratios;
        spec.init_strategies.clear();
        for (const std::string& s : a.inits) {
            spec.init_strategies.push_back(parse_init_strategy(s));
        }
        spec.check();
        if (!a.manifest.empty()) {
            corpus = resolve(load_manifest(a.manifest), a.cache_dir);
        }
        if (a.synthetic) {
            auto synth = resolve(synthetic_manifest(a.synthetic_size, a.synthetic_size, a.fit.seed), a.cache_dir);
            corpus.insert(corpus.end(), synth.begin(), synth.end());
        }
        for (const std::string& path : a.images) {
            corpus.push_back({basename(path), read_image(path)});
        }
        if (corpus.empty()) {
            throw Error(ErrorCode::InvalidConfig, "sweep needs at least one image (positional, --manifest or --synthetic)");
        }
        for (CorpusImage& c : corpus) {
            for (int k = 0; k < a.downsample; ++k) {
                c.image = downsample2x(c.image);
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    std::vector<SweepRow> rows;
    try {
        rows = run_sweep(spec, corpus, a.quiet ? nullptr : &err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }

    const std::string csv = sweep_csv(rows);
    if (!a.output.empty()) {
        try {
            write_file_atomic(a.output, std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kExitWriteFailed;
        }
    }
    if (a.json_out) {
        out << json{{"command", "sweep"}, {"config", config_json(spec.base)}, {"rows", sweep_json(rows)}}.dump(2)
            << '\n';
    } else if (a.output.empty()) {
        out << csv;
    }
    return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::vector<std::size_t> batch_sizes{1, 2, 4, 8};
    std::size_t gaussians = 400;
    std::size_t iters = 50;
    int size = 64;
    int workers = 0;
    std::uint64_t seed = 0;
    bool csv = false;
    bool json_out = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    if (a.batch_sizes.empty() || a.gaussians == 0 || a.iters == 0 || a.size < 8) {
        err << "error: bench needs non-empty batch sizes, -n >= 1, --iters >= 1 and --size >= 8\n";
        return kExitBadInput;
    }
    for (std::size_t b : a.batch_sizes) {
        if (b == 0) {
            err << "error: batch sizes must be positive\n";
            return kExitBadInput;
        }
    }
    const std::size_t max_batch = *std::max_element(a.batch_sizes.begin(), a.batch_sizes.end());
    std::vector<ImageBuffer> targets;
    for (std::size_t k = 0; k < max_batch; ++k) {
        targets.push_back(generate_synthetic("bandlimited-noise", a.seed + k, a.size, a.size).image);
    }
    FitConfig config;
    config.num_gaussians = a.gaussians;
    config.iterations = a.iters;
    config.seed = a.seed;
    config.log_every = a.iters;
    config.workers = a.workers > 0 ? a.workers : default_workers();

    using clock = std::chrono::steady_clock;
    // Baseline: the same images fitted one at a time.
    const auto t0 = clock::now();
    for (const ImageBuffer& t : targets) {
        (void)fit_batch(std::span(&t, 1), config);
    }
    const double base_ips = static_cast<double>(max_batch) / std::chrono::duration<double>(clock::now() - t0).count();

    struct Row {
        std::size_t batch;
        double ips;
        double speedup;
    };
    std::vector<Row> rows;
    for (std::size_t b : a.batch_sizes) {
        double ips = base_ips;
        if (b > 1) {
            const auto t = clock::now();
            (void)fit_batch(std::span(targets.data(), b), config);
            ips = static_cast<double>(b) / std::chrono::duration<double>(clock::now() - t).count();
        }
        rows.push_back({b, ips, ips / base_ips});
    }

    if (a.json_out) {
        json arr = json::array();
        for (const Row& r : rows) {
            arr.push_back({{"batch_size", r.batch}, {"images_per_sec", r.ips}, {"speedup", r.speedup}});
        }
        out << json{{"command", "bench"},
                    {"config", config_json(config)},
                    {"image_size", a.size},
                    {"rows", arr}}
                   .dump(2)
            << '\n';
    } else if (a.csv) {
        out << "batch_size,images_per_sec,speedup\n";
        for (const Row& r : rows) {
            out << r.batch << ',' << fixed(r.ips, 4) << ',' << fixed(r.speedup, 4) << '\n';
        }
    } else {
        out << "workers " << config.workers << ", " << a.size << "x" << a.size << ", n=" << a.gaussians << ", "
            << a.iters << " iterations\n";
        out << "batch_size  images/sec  speedup\n";
        for (const Row& r : rows) {
            char line[96];
            std::snprintf(line, sizeof(line), "%10zu  %10.3f  %7.3f\n", r.batch, r.ips, r.speedup);
            out << line;
        }
    }
    return kExitOk;
}

} // namespace

void SweepSpec::check() const {
    if (splat_counts.empty() || init_strategies.empty() || prune_ratios.empty()) {
        throw Error(ErrorCode::InvalidConfig, "sweep lists must be non-empty");
    }
    for (std::size_t n : splat_counts) {
        if (n == 0) {
            throw Error(ErrorCode::InvalidConfig, "splat counts must be positive");
        }
    }
    for (double r : prune_ratios) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "prune ratios must lie in [0, 1)");
        }
    }
    base.check();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<CorpusImage>& corpus,
                                std::ostream* progress) {
    spec.check();
    std::vector<SweepRow> rows;
    for (const CorpusImage& img : corpus) {
        for (std::size_t n : spec.splat_counts) {
            for (InitStrategy init : spec.init_strategies) {
                const std::size_t first = rows.size();
                std::optional<double> unpruned;
                for (double ratio : spec.prune_ratios) {
                    FitConfig c = spec.base;
                    c.num_gaussians = n;
                    c.init_strategy = init;
                    c.prune.reset();
                    if (ratio > 0.0) {
                        PruneConfig p = spec.base.prune.value_or(PruneConfig{});
                        p.target_ratio = ratio;
                        p.max_prune_fraction = std::max(p.max_prune_fraction, ratio);
                        c.prune = p;
                    }
                    const FitResult fr = fit(img.image, c);
                    SweepRow row;
                    row.image = img.name;
                    row.n_gaussians = n;
                    row.init = init;
                    row.requested_prune_ratio = ratio;
                    row.prune_ratio = fr.report.prune_stats ? fr.report.prune_stats->pruning_ratio : 0.0;
                    row.l1_weight = c.l1_weight;
                    row.final_psnr_db = fr.report.final_psnr;
                    row.compression_ratio = fr.set.size() == 0 ? std::numeric_limits<double>::infinity()
                                                               : compression_ratio(img.image.width(),
                                                                                   img.image.height(), fr.set.size());
                    row.wall_time_s = fr.report.wall_time;
                    row.alive_after_prune = fr.set.size();
                    if (ratio == 0.0) {
                        unpruned = row.final_psnr_db;
                    }
                    rows.push_back(row);
                    if (progress != nullptr) {
                        *progress << "sweep " << row.image << " n=" << n << " init=" << to_string(init)
                                  << " prune=" << fixed(row.prune_ratio, 3) << " psnr=" << fixed(row.final_psnr_db, 2)
                                  << " dB (" << fixed(row.wall_time_s, 1) << " s)" << std::endl;
                    }
                }
                for (std::size_t i = first; i < rows.size(); ++i) {
                    rows[i].psnr_drop_db =
                        unpruned ? *unpruned - rows[i].final_psnr_db : std::numeric_limits<double>::quiet_NaN();
                }
            }
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream s;
    s << "image,n_gaussians,init,prune_ratio,l1_weight,final_psnr_db,compression_ratio,wall_time_s,"
         "alive_after_prune,psnr_drop_db\n";
    for (const SweepRow& r : rows) {
        char l1[32];
        std::snprintf(l1, sizeof(l1), "%g", r.l1_weight);
        s << r.image << ',' << r.n_gaussians << ',' << to_string(r.init) << ',' << fixed(r.prune_ratio, 4) << ','
          << l1 << ',' << fixed(r.final_psnr_db, 4) << ',' << fixed(r.compression_ratio, 4) << ','
          << fixed(r.wall_time_s, 3) << ',' << r.alive_after_prune << ',' << fixed(r.psnr_drop_db, 4) << '\n';
    }
    return s.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"splatc: image compression with 2D Gaussian splats"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "splatc 1.0");

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Fit an image and write a .gsf file");
    encode->add_option("input", enc.input, "Input image (PNG or binary PPM)")->required();
    encode->add_option("-o,--output", enc.output, "Output .gsf path")->required();
    encode->add_flag("--json", enc.json_out, "Print a JSON report on stdout");
    enc.fit.attach(encode, true);

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Render a .gsf file to PNG/PPM");
    decode->add_option("input", dec.input, "Input .gsf")->required();
    decode->add_option("-o,--output", dec.output, "Output image (.png writes PNG, anything else PPM)")->required();
    decode->add_option("--tile", dec.tile, "Tile size in pixels")->capture_default_str();
    decode->add_option("--workers", dec.workers, "Worker threads");
    decode->add_flag("--json", dec.json_out, "Print a JSON summary");

    std::string info_path;
    bool info_json = false;
    auto* info = app.add_subcommand("info", "Show a .gsf header");
    info->add_option("input", info_path, "Input .gsf")->required();
    info->add_flag("--json", info_json, "Print JSON");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Fit a corpus over splat counts, inits and pruning ratios");
    sweep->add_option("images", sw.images, "Corpus images");
    sweep->add_option("--manifest", sw.manifest, "Corpus manifest file");
    sweep->add_option("--cache", sw.cache_dir, "Cache directory for fetched corpus entries")->capture_default_str();
    sweep->add_flag("--synthetic", sw.synthetic, "Add the four synthetic corpus images");
    sweep->add_option("--synthetic-size", sw.synthetic_size, "Size of the synthetic images")->capture_default_str();
    sweep->add_option("--downsample", sw.downsample, "Halve every corpus image this many times")
        ->capture_default_str();
    sweep->add_option("--counts", sw.counts, "Splat counts")->delimiter(',')->capture_default_str();
    sweep->add_option("--inits", sw.inits, "Init strategies")->delimiter(',')->capture_default_str();
    sweep->add_option("--prune-ratios", sw.ratios, "Pruning ratios (0 = no pruning)")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("-o,--output", sw.output, "CSV output path (stdout if omitted)");
    sweep->add_flag("--json", sw.json_out, "Print rows as JSON");
    sweep->add_flag("-q,--quiet", sw.quiet, "No progress lines");
    sw.fit.attach(sweep, false);

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Batched vs sequential fitting throughput");
    bench->add_option("--batch-sizes", bn.batch_sizes, "Batch sizes")->delimiter(',')->capture_default_str();
    bench->add_option("-n,--gaussians", bn.gaussians, "Gaussians per image")->capture_default_str();
    bench->add_option("--iters", bn.iters, "Iterations per fit")->capture_default_str();
    bench->add_option("--size", bn.size, "Synthetic image side length")->capture_default_str();
    bench->add_option("--workers", bn.workers, "Worker threads");
    bench->add_option("--seed", bn.seed, "Seed for the synthetic targets")->capture_default_str();
    bench->add_flag("--csv", bn.csv, "Print CSV");
    bench->add_flag("--json", bn.json_out, "Print JSON");

    try {
        app.parse(argc, argv);
        if (!enc.fit.config.empty() && encode->parsed()) {
            apply_config_file(encode, enc.fit.config);
        }
        if (!sw.fit.config.empty() && sweep->parsed()) {
            apply_config_file(sweep, sw.fit.config);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    try {
        if (encode->parsed()) {
            return cmd_encode(enc, out, err);
        }
        if (decode->parsed()) {
            return cmd_decode(dec, out, err);
        }
        if (info->parsed()) {
            return cmd_info(info_path, info_json, out, err);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sw, out, err);
        }
        return cmd_bench(bn, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

} // namespace splatc::cli

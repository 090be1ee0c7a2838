#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "osmosis/apps.hpp"
#include "osmosis/discretize.hpp"
#include "osmosis/errors.hpp"
#include "osmosis/image.hpp"
#include "osmosis/io.hpp"
#include "osmosis/solver.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

struct SolverFlags {
    std::string scheme = "aos";
    double tau = 1e3;
    double time_horizon = 1e5;
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
    cmd->add_option("--scheme", f.scheme, "Time scheme: explicit, implicit, or aos")
        ->check(CLI::IsMember({"explicit", "implicit", "aos"}))
        ->capture_default_str();
    cmd->add_option("--tau", f.tau, "Time step")->capture_default_str();
    cmd->add_option("--T", f.time_horizon, "Evolution time horizon")->capture_default_str();
    cmd->add_option("--tol", f.tolerance, "Relative residual tolerance (implicit scheme)")
        ->capture_default_str();
    cmd->add_option("--max-iter", f.max_iterations, "Iteration cap per implicit solve")
        ->capture_default_str();
}

osmosis::SolverConfig to_config(const SolverFlags& f) {
    osmosis::SolverConfig config;
    if (f.scheme == "explicit")
        config.scheme = osmosis::Scheme::explicit_euler;
    else if (f.scheme == "implicit")
        config.scheme = osmosis::Scheme::implicit_euler;
    else
        config.scheme = osmosis::Scheme::aos;
    config.tau = f.tau;
    config.time_horizon = f.time_horizon;
    config.tolerance = f.tolerance;
    config.max_iterations = f.max_iterations;
    config.validate();
    return config;
}

struct CommonFlags {
    double epsilon = 0.0;  // 0 = choose by bit depth
    int threads = 1;
    std::string metrics_path;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--epsilon", f.epsilon,
                    "Positivity floor (0 = 1 for 8/16-bit input, 1/255 for float)")
        ->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads (timing only, never results)")
        ->envname("OSMOSIS_THREADS")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--metrics", f.metrics_path, "Write per-step metrics CSV here");
}

// Collects observer callbacks from concurrent per-channel evolutions.
class MetricsCollector {
public:
    osmosis::Observer observer() {
        return [this](const osmosis::StepInfo& info) {
            const auto now = Clock::now();
            std::lock_guard<std::mutex> lock(mutex_);
            auto [it, fresh] = last_.emplace(info.channel, start_);
            osmosis::MetricsRow row;
            row.step = info.step;
            row.channel = info.channel;
            row.mean = info.mean;
            row.sup_change = info.sup_change;
            row.wall_ms = ms_between(it->second, now);
            it->second = now;
            rows_.push_back(row);
            return true;
        };
    }

    void write(const std::string& path) {
        std::sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
            return a.channel != b.channel ? a.channel < b.channel : a.step < b.step;
        });
        osmosis::write_metrics(path, rows_);
    }

private:
    std::mutex mutex_;
    std::map<int, Clock::time_point> last_;
    Clock::time_point start_ = Clock::now();
    std::vector<osmosis::MetricsRow> rows_;
};

osmosis::RunOptions make_options(const CommonFlags& flags, MetricsCollector* collector) {
    osmosis::RunOptions options;
    options.positivity_floor = flags.epsilon;
    options.threads = flags.threads;
    if (collector && !flags.metrics_path.empty()) options.observer = collector->observer();
    return options;
}

void report_elapsed(Clock::time_point begin) {
    std::printf("elapsed %.3f s\n", ms_between(begin, Clock::now()) / 1000.0);
}

double resolve_cli_floor(const osmosis::Image& img, double epsilon) {
    return epsilon != 0.0 ? epsilon : osmosis::default_positivity_floor(img);
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

osmosis::Image bench_reference(int size) {
    std::vector<double> samples(static_cast<std::size_t>(size) * size);
    for (int j = 0; j < size; ++j)
        for (int i = 0; i < size; ++i)
            samples[static_cast<std::size_t>(j) * size + i] =
                128.0 + 60.0 * std::sin(6.283185307179586 * i / size) *
                            std::cos(6.283185307179586 * j / size) +
                10.0 * ((i / 8 + j / 8) % 2);
    return osmosis::Image::from_samples(size, size, 1, std::move(samples));
}

osmosis::Image bench_initial(int size) {
    std::vector<double> samples(static_cast<std::size_t>(size) * size);
    for (int j = 0; j < size; ++j)
        for (int i = 0; i < size; ++i)
            samples[static_cast<std::size_t>(j) * size + i] =
                100.0 + 50.0 * (static_cast<double>(i) + j) / (2.0 * size - 2.0);
    return osmosis::Image::from_samples(size, size, 1, std::move(samples));
}

void run_bench(const std::string& sizes_csv, int iterations,
               const std::string& schemes_csv, double tau, double tolerance,
               int threads, const std::string& out_path) {
    if (iterations < 1)
        throw osmosis::ValidationError("bench iterations must be at least 1");
    std::vector<int> sizes;
    for (const std::string& s : split_csv(sizes_csv)) {
        int size = 0;
        try {
            size = std::stoi(s);
        } catch (const std::exception&) {
            throw osmosis::ValidationError("bad size '" + s + "' in --sizes");
        }
        if (size < 32)
            throw osmosis::ValidationError("bench sizes must be at least 32, got " +
                                           std::to_string(size));
        sizes.push_back(size);
    }
    if (sizes.empty()) throw osmosis::ValidationError("no sizes given");
    std::vector<std::string> schemes = split_csv(schemes_csv);
    if (schemes.empty()) throw osmosis::ValidationError("no schemes given");
    for (const std::string& s : schemes)
        if (s != "explicit" && s != "implicit" && s != "aos")
            throw osmosis::ValidationError("unknown scheme '" + s + "'");

    std::ostringstream csv;
    csv << "size,scheme,tau,factorize_ms,mean_step_ms,total_ms\n";
    for (int size : sizes) {
        const osmosis::Image reference = bench_reference(size);
        const osmosis::Image initial = bench_initial(size);
        const osmosis::DriftField d = osmosis::canonical_drift(reference, 0);
        for (const std::string& scheme : schemes) {
            double used_tau = tau;
            double factorize_ms = 0.0;
            const auto begin = Clock::now();
            osmosis::Image u = initial;
            if (scheme == "aos") {
                const auto f0 = Clock::now();
                const osmosis::DirectionalFactors factors = osmosis::factorize_aos(d, tau);
                factorize_ms = ms_between(f0, Clock::now());
                for (int k = 0; k < iterations; ++k)
                    u = osmosis::step_aos(u, factors, threads);
            } else if (scheme == "implicit") {
                for (int k = 0; k < iterations; ++k)
                    u = osmosis::step_implicit(u, d, tau, tolerance, 100000);
            } else {
                used_tau = 0.99 * osmosis::check_explicit_bound(d);
                for (int k = 0; k < iterations; ++k)
                    u = osmosis::step_explicit(u, d, used_tau);
            }
            const double total_ms = ms_between(begin, Clock::now());
            char line[192];
            std::snprintf(line, sizeof(line), "%d,%s,%.17g,%.6f,%.6f,%.6f\n", size,
                          scheme.c_str(), used_tau, factorize_ms,
                          (total_ms - factorize_ms) / iterations, total_ms);
            csv << line;
        }
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw osmosis::IoError("cannot open " + out_path);
        out << csv.str();
        if (!out) throw osmosis::IoError("write failed: " + out_path);
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Drift-diffusion (osmosis) image filtering toolkit"};
    app.require_subcommand(1);

    // balance
    auto* balance = app.add_subcommand("balance", "Remove inter-tile lighting seams from a mosaic");
    std::string bal_input, bal_tiles, bal_out;
    SolverFlags bal_solver;
    CommonFlags bal_common;
    balance->add_option("--input", bal_input, "Mosaic image")->required();
    balance->add_option("--tiles", bal_tiles, "Tiling document (canvas + rectangles)")->required();
    balance->add_option("--out", bal_out, "Output image")->required();
    add_solver_flags(balance, bal_solver);
    add_common_flags(balance, bal_common);

    // tqr
    auto* tqr = app.add_subcommand("tqr", "Calibrate raw radiometry to reflectance via an in-scene target");
    std::string tqr_input, tqr_out;
    std::vector<int> tqr_target;
    double tqr_r_ref = 1.0;
    tqr->add_option("--input", tqr_input, "Raw radiometric image")->required();
    tqr->add_option("--target", tqr_target, "Target region: x y width height")
        ->expected(4)
        ->required();
    tqr->add_option("--r-ref", tqr_r_ref, "Known target reflectance in (0, 1]")
        ->capture_default_str();
    tqr->add_option("--out", tqr_out, "Output reflectance image")->required();

    // falsecolor
    auto* falsecolor = app.add_subcommand("falsecolor", "Compose an IR-R-G false color image");
    std::string fc_ir, fc_r, fc_g, fc_out;
    falsecolor->add_option("--ir", fc_ir, "Infrared band")->required();
    falsecolor->add_option("--vis-r", fc_r, "Visible red band")->required();
    falsecolor->add_option("--vis-g", fc_g, "Visible green band")->required();
    falsecolor->add_option("--out", fc_out, "Output image")->required();

    // fuse
    auto* fuse = app.add_subcommand("fuse", "Fuse a secondary modality into a visible image");
    std::string fuse_visible, fuse_secondary, fuse_partition, fuse_out;
    int fuse_window = 31;
    bool fuse_no_otsu = false;
    SolverFlags fuse_solver;
    CommonFlags fuse_common;
    fuse->add_option("--visible", fuse_visible, "Visible image (evolution start)")->required();
    fuse->add_option("--secondary", fuse_secondary, "Secondary modality image")->required();
    fuse->add_option("--partition", fuse_partition,
                     "Region partition (label raster or interior-rectangle document)")
        ->required();
    fuse->add_option("--otsu-window", fuse_window, "Sliding window for text segmentation")
        ->capture_default_str();
    fuse->add_flag("--no-otsu", fuse_no_otsu, "Skip text segmentation preprocessing");
    fuse->add_option("--out", fuse_out, "Output image")->required();
    add_solver_flags(fuse, fuse_solver);
    add_common_flags(fuse, fuse_common);

    // evolve
    auto* evolve = app.add_subcommand("evolve", "Evolve an image under a reference-derived drift");
    std::string ev_input, ev_reference, ev_out;
    SolverFlags ev_solver;
    CommonFlags ev_common;
    evolve->add_option("--input", ev_input, "Initial image")->required();
    evolve->add_option("--reference", ev_reference,
                       "Drift source image (defaults to the input itself)");
    evolve->add_option("--out", ev_out, "Output image")->required();
    add_solver_flags(evolve, ev_solver);
    add_common_flags(evolve, ev_common);

    // bench
    auto* bench = app.add_subcommand("bench", "Time solver schemes on synthetic images");
    std::string bench_sizes = "128,256,512";
    std::string bench_schemes = "aos";
    std::string bench_out;
    int bench_iters = 100;
    double bench_tau = 1e3;
    double bench_tol = 1e-10;
    int bench_threads = 1;
    bench->add_option("--sizes", bench_sizes, "Comma-separated square sizes, each >= 32")
        ->capture_default_str();
    bench->add_option("--iters", bench_iters, "Steps per run")->capture_default_str();
    bench->add_option("--schemes", bench_schemes, "Comma-separated: explicit, implicit, aos")
        ->capture_default_str();
    bench->add_option("--tau", bench_tau, "Time step (explicit uses its stability bound)")
        ->capture_default_str();
    bench->add_option("--tol", bench_tol, "Implicit solve tolerance")->capture_default_str();
    bench->add_option("--threads", bench_threads, "Worker threads")
        ->envname("OSMOSIS_THREADS")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_out, "CSV destination (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    const auto begin = Clock::now();

    if (*balance) {
        const osmosis::Image mosaic = osmosis::load_image(bal_input);
        const osmosis::TilingSpec tiling = osmosis::load_tiling(bal_tiles);
        if (tiling.canvas_width != mosaic.width() || tiling.canvas_height != mosaic.height())
            throw osmosis::ValidationError(
                "tiling canvas " + std::to_string(tiling.canvas_width) + "x" +
                std::to_string(tiling.canvas_height) + " does not match image " +
                std::to_string(mosaic.width()) + "x" + std::to_string(mosaic.height()));
        MetricsCollector collector;
        const osmosis::Image out = osmosis::light_balance(
            mosaic, tiling.tiles, to_config(bal_solver), make_options(bal_common, &collector));
        osmosis::save_image(out, bal_out);
        if (!bal_common.metrics_path.empty()) collector.write(bal_common.metrics_path);
    } else if (*tqr) {
        const osmosis::Image raw = osmosis::load_image(tqr_input);
        osmosis::TqrCalibration cal;
        cal.target = osmosis::Rect{tqr_target[0], tqr_target[1], tqr_target[2], tqr_target[3]};
        cal.r_ref = tqr_r_ref;
        const osmosis::TqrResult result = osmosis::tqr_calibrate(raw, cal);
        if (result.exceeds_unit)
            std::printf("note: reflectance exceeds 1 in places (kept, not clipped)\n");
        osmosis::save_image(result.reflectance, tqr_out);
    } else if (*falsecolor) {
        const osmosis::Image composed = osmosis::false_color(osmosis::load_image(fc_ir),
                                                             osmosis::load_image(fc_r),
                                                             osmosis::load_image(fc_g));
        osmosis::save_image(composed, fc_out);
    } else if (*fuse) {
        const osmosis::Image v1 = osmosis::load_image(fuse_visible);
        const osmosis::Image v2 = osmosis::load_image(fuse_secondary);
        osmosis::FusionSpec spec;
        spec.partition = osmosis::load_partition(fuse_partition);
        spec.preprocessing.window = fuse_window;
        const osmosis::Image v2pre =
            fuse_no_otsu ? v2 : osmosis::local_otsu_preprocess(v2, spec.preprocessing);
        MetricsCollector collector;
        const osmosis::Image out = osmosis::fuse_multimodal(
            v1, v2pre, spec, to_config(fuse_solver), make_options(fuse_common, &collector));
        osmosis::save_image(out, fuse_out);
        if (!fuse_common.metrics_path.empty()) collector.write(fuse_common.metrics_path);
    } else if (*evolve) {
        const osmosis::Image f = osmosis::load_image(ev_input);
        const osmosis::Image v = ev_reference.empty() ? f : osmosis::load_image(ev_reference);
        if (!f.same_shape(v))
            throw osmosis::ValidationError("reference shape does not match input");
        const osmosis::Image fp =
            osmosis::ensure_positive(f, resolve_cli_floor(f, ev_common.epsilon));
        const osmosis::Image vp =
            osmosis::ensure_positive(v, resolve_cli_floor(v, ev_common.epsilon));
        std::vector<osmosis::DriftField> drifts;
        for (int c = 0; c < vp.channels(); ++c)
            drifts.push_back(osmosis::canonical_drift(vp, c));
        MetricsCollector collector;
        const osmosis::RunOptions options = make_options(ev_common, &collector);
        const osmosis::Image out = osmosis::evolve(fp, drifts, to_config(ev_solver),
                                                   options.observer, options.threads);
        osmosis::save_image(out, ev_out);
        if (!ev_common.metrics_path.empty()) collector.write(ev_common.metrics_path);
    } else if (*bench) {
        run_bench(bench_sizes, bench_iters, bench_schemes, bench_tau, bench_tol,
                  bench_threads, bench_out);
    }

    report_elapsed(begin);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const osmosis::IoError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const osmosis::StepSizeError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 5;
    } catch (const osmosis::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 5;
    } catch (const osmosis::ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}

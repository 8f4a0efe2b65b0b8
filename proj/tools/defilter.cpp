// defilter: apply, reverse, and analyze image filters from the command line.
//
// Exit codes: 0 success, 2 usage/parse error, 3 divergence, 4 I/O error,
// 5 external-filter failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "defilter/applications.hpp"
#include "defilter/filter_spec.hpp"
#include "defilter/image_io.hpp"
#include "defilter/reverse.hpp"
#include "defilter/spectral.hpp"

namespace fs = std::filesystem;
using namespace defilter;

namespace {

struct UsageError : ParamError {
    using ParamError::ParamError;
};

void set_boundary(FilterSpec& spec, Boundary boundary) {
    std::visit(
        [boundary](auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianConv> ||
                          std::is_same_v<T, BoxConv> ||
                          std::is_same_v<T, DiskConv> ||
                          std::is_same_v<T, GenericConv>) {
                s.boundary = boundary;
            }
        },
        spec);
}

Boundary parse_boundary(const std::string& text) {
    if (text == "periodic") return Boundary::Periodic;
    if (text == "symmetric") return Boundary::Symmetric;
    throw UsageError("boundary must be periodic|symmetric");
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw UsageError("grid must be HxW");
    try {
        return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    } catch (const std::exception&) {
        throw UsageError("grid must be HxW");
    }
}

// Warn when a Gaussian is truncated below the recommended support; the
// reversal analysis then describes a different filter than the one applied.
void warn_if_truncated(const FilterSpec& spec) {
    if (const auto* g = std::get_if<GaussianConv>(&spec)) {
        if (g->support != 0 &&
            g->support < recommended_gaussian_support(g->sigma)) {
            std::cerr << "warning: gaussian support " << g->support
                      << " truncates the kernel (recommended "
                      << recommended_gaussian_support(g->sigma)
                      << "); spectrum positivity may fail\n";
        }
    }
}

std::string format_db(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

struct FilterArgs {
    std::string input, output, spec_text, boundary;
};

int cmd_filter(const FilterArgs& args) {
    FilterSpec spec = parse_filter_spec(args.spec_text);
    if (!args.boundary.empty()) set_boundary(spec, parse_boundary(args.boundary));
    warn_if_truncated(spec);
    const Image input = load_image(args.input);
    save_image(apply_filter(spec, input), args.output);
    return 0;
}

// ---------------------------------------------------------------------------
// reverse
// ---------------------------------------------------------------------------

struct ReverseArgs {
    std::string filtered, spec_text, external_cmd, external_format = "pfm";
    std::string gt, trace_csv, out_final, out_best, best_by = "dt";
    int iters = 10;
    int early_stop_patience = 0;  // 0: fixed count
    double external_timeout = 60.0;
};

void write_trace_file(const ReverseTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace: " + path);
    write_trace_csv(trace, out);
}

int cmd_reverse(const ReverseArgs& args) {
    FilterSpec spec;
    if (!args.external_cmd.empty()) {
        External ext;
        ext.command_template = args.external_cmd;
        ext.format = args.external_format == "png" ? ImageFormat::Png8
                                                   : ImageFormat::Pfm;
        ext.timeout_seconds = args.external_timeout;
        spec = ext;
    } else if (!args.spec_text.empty()) {
        spec = parse_filter_spec(args.spec_text);
    } else {
        throw UsageError("reverse requires --spec or --external-cmd");
    }

    const Image j_star = load_image(args.filtered);

    ReverseConfig rc;
    rc.max_iters = args.iters;
    rc.exchange_float32 = true;  // keep in-process and black-box runs bit-equal
    if (!args.gt.empty()) rc.ground_truth = load_image(args.gt);
    if (args.early_stop_patience > 0) {
        rc.stop_policy = StopOnDtRise{args.early_stop_patience};
    }
    rc.keep_best_by = args.best_by == "gt" ? BestBy::GtError : BestBy::DtError;

    ReverseResult result;
    try {
        result = reverse_filter(spec, j_star, rc);
    } catch (const DivergenceError& e) {
        if (!args.trace_csv.empty()) write_trace_file(e.trace, args.trace_csv);
        std::cerr << "diverged(iter=" << e.iteration << ")\n";
        return 3;
    }

    if (!args.trace_csv.empty()) write_trace_file(result.trace, args.trace_csv);
    if (!args.out_final.empty()) save_image(result.final_image, args.out_final);
    if (!args.out_best.empty()) save_image(result.best_image, args.out_best);

    const auto& recs = result.trace.records;
    std::cout << "iterations: " << recs.back().iter
              << "  best_index: " << result.trace.best_index << "\n";
    std::cout << "Init DT: " << format_db(recs.front().dt_psnr)
              << " dB  Final DT: " << format_db(recs.back().dt_psnr)
              << " dB  Best DT: "
              << format_db(std::max_element(recs.begin(), recs.end(),
                                            [](const auto& a, const auto& b) {
                                                return a.dt_psnr < b.dt_psnr;
                                            })
                               ->dt_psnr)
              << " dB\n";
    if (!args.gt.empty()) {
        double best_gt = -1.0;
        for (const auto& r : recs) best_gt = std::max(best_gt, *r.gt_psnr);
        std::cout << "Init GT: " << format_db(*recs.front().gt_psnr)
                  << " dB  Final GT: " << format_db(*recs.back().gt_psnr)
                  << " dB  Best GT: " << format_db(best_gt) << " dB\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string kernel_spec, matrix_file, grid = "64x64";
    std::string report_json, energy_image;
    bool dump_spectrum = false;
    std::string boundary = "periodic";
};

Eigen::MatrixXd load_matrix_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    long n = 0;
    if (!(in >> n) || n <= 0) throw IoError("matrix file: bad dimension");
    Eigen::MatrixXd m(n, n);
    for (long r = 0; r < n; ++r) {
        for (long c = 0; c < n; ++c) {
            if (!(in >> m(r, c))) throw IoError("matrix file: truncated data");
        }
    }
    return m;
}

int cmd_analyze(const AnalyzeArgs& args) {
    nlohmann::json report;
    if (!args.matrix_file.empty()) {
        const auto lin = analyze_linear_operator(load_matrix_text(args.matrix_file));
        report = linear_report_json(lin);
        std::cout << "class: " << to_string(lin.cls)
                  << "  c(squared scale): " << lin.contraction_constant << "\n";
    } else if (!args.kernel_spec.empty()) {
        const auto [h, w] = parse_grid(args.grid);
        const FilterSpec spec = parse_filter_spec(args.kernel_spec);
        warn_if_truncated(spec);
        const auto kernel = kernel_for(spec, h, w);
        if (!kernel) {
            throw UsageError("spec '" + args.kernel_spec +
                             "' has no convolution kernel to analyze");
        }
        SpectralReport sr = kernel_spectrum(*kernel, h, w);
        if (!args.energy_image.empty()) {
            sr.omega_energy_fraction =
                omega_energy_fraction(load_image(args.energy_image), sr);
        }
        report = spectral_report_json(sr, args.dump_spectrum);
        std::cout << "class: " << to_string(sr.cls)
                  << "  c: " << sr.contraction_constant
                  << "  omega_fraction: " << sr.omega_fraction << "\n";
    } else {
        throw UsageError("analyze requires --kernel or --matrix");
    }

    if (!args.report_json.empty()) {
        std::ofstream out(args.report_json);
        if (!out) throw IoError("cannot write report: " + args.report_json);
        out << report.dump(2) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string images_dir, filters_file, out_csv, curves_csv;
    int iters = 50;
};

struct BenchFilter {
    std::string label;
    FilterSpec spec;
};

// Config file: one filter per line, `#` comments.
//   <label> <spec-string>
//   <label> external <command template with {IN} {OUT}>
//   <label> external-png <command template>
std::vector<BenchFilter> load_bench_filters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open filter config: " + path);
    std::vector<BenchFilter> filters;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream iss(line);
        std::string label, kind;
        if (!(iss >> label >> kind)) continue;  // blank line
        BenchFilter f;
        f.label = label;
        if (kind == "external" || kind == "external-png") {
            std::string cmd;
            std::getline(iss, cmd);
            const auto start = cmd.find_first_not_of(" \t");
            if (start == std::string::npos) {
                throw UsageError("bench config: missing external command for " +
                                 label);
            }
            External ext;
            ext.command_template = cmd.substr(start);
            ext.format = kind == "external-png" ? ImageFormat::Png8
                                                : ImageFormat::Pfm;
            f.spec = ext;
            validate_spec(f.spec);
        } else {
            f.spec = parse_filter_spec(kind);
        }
        filters.push_back(std::move(f));
    }
    if (filters.empty()) throw UsageError("bench config lists no filters");
    return filters;
}

struct BenchCell {
    double sum = 0.0;
    int count = 0;
    std::string failure;  // nonempty overrides the average

    void add(double v) {
        sum += v;
        ++count;
    }
    std::string str() const {
        if (!failure.empty()) return failure;
        if (count == 0) return "n/a";
        return format_db(sum / count);
    }
};

int cmd_bench(const BenchArgs& args) {
    std::vector<std::string> image_paths;
    for (const auto& entry : fs::directory_iterator(args.images_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".png" || ext == ".pfm") {
            image_paths.push_back(entry.path().string());
        }
    }
    std::sort(image_paths.begin(), image_paths.end());
    if (image_paths.empty()) {
        throw IoError("no .png/.pfm images in " + args.images_dir);
    }

    const auto filters = load_bench_filters(args.filters_file);

    std::ofstream csv(args.out_csv);
    if (!csv) throw IoError("cannot write " + args.out_csv);
    csv << "filter,init_gt,final_gt,best_gt,init_dt,final_dt,best_dt\n";

    std::ofstream curves;
    if (!args.curves_csv.empty()) {
        curves.open(args.curves_csv);
        if (!curves) throw IoError("cannot write " + args.curves_csv);
        curves << "filter,iter,mean_psnr_gt,sd_mse\n";
    }

    std::cout << "bench: " << image_paths.size() << " images, "
              << filters.size() << " filters, " << args.iters
              << " iterations (joint-channel PSNR)\n";

    for (const auto& filter : filters) {
        BenchCell init_gt, final_gt, best_gt, init_dt, final_dt, best_dt;
        // per-iteration GT PSNR / MSE across images, for the curve output
        std::vector<std::vector<double>> gt_psnr_curve(args.iters + 1);
        std::vector<std::vector<double>> gt_mse_curve(args.iters + 1);

        for (const auto& path : image_paths) {
            try {
                const Image gt = load_image(path);
                const Image j_star = apply_filter(filter.spec, gt);

                ReverseConfig rc;
                rc.max_iters = args.iters;
                rc.ground_truth = gt;
                const auto result = reverse_filter(filter.spec, j_star, rc);
                const auto& recs = result.trace.records;

                double bg = -1.0, bd = -1.0;
                for (const auto& r : recs) {
                    bg = std::max(bg, *r.gt_psnr);
                    bd = std::max(bd, r.dt_psnr);
                }
                init_gt.add(*recs.front().gt_psnr);
                final_gt.add(*recs.back().gt_psnr);
                best_gt.add(bg);
                init_dt.add(recs.front().dt_psnr);
                final_dt.add(recs.back().dt_psnr);
                best_dt.add(bd);
                for (const auto& r : recs) {
                    gt_psnr_curve[r.iter].push_back(*r.gt_psnr);
                    gt_mse_curve[r.iter].push_back(
                        std::pow(10.0, -*r.gt_psnr / 10.0));
                }
            } catch (const DivergenceError& e) {
                const std::string tag =
                    "diverged(iter=" + std::to_string(e.iteration) + ")";
                final_gt.failure = tag;
                final_dt.failure = tag;
                for (const auto& r : e.trace.records) {
                    if (r.iter == 0) {
                        init_gt.add(*r.gt_psnr);
                        init_dt.add(r.dt_psnr);
                    }
                    best_gt.add(0.0);  // placeholder; replaced below
                }
                // Partial traces still contribute their best values.
                if (!e.trace.records.empty()) {
                    double bg = -1.0, bd = -1.0;
                    for (const auto& r : e.trace.records) {
                        bg = std::max(bg, *r.gt_psnr);
                        bd = std::max(bd, r.dt_psnr);
                    }
                    best_gt.sum += bg - 0.0;
                    best_dt.add(bd);
                }
            } catch (const Error& e) {
                const std::string tag = std::string("error(") + e.what() + ")";
                final_gt.failure = tag.substr(0, 60);
                final_dt.failure = final_gt.failure;
            }
        }

        csv << filter.label << ',' << init_gt.str() << ',' << final_gt.str()
            << ',' << best_gt.str() << ',' << init_dt.str() << ','
            << final_dt.str() << ',' << best_dt.str() << '\n';
        std::cout << filter.label << ": init_gt=" << init_gt.str()
                  << " final_gt=" << final_gt.str()
                  << " best_gt=" << best_gt.str() << "\n";

        if (curves.is_open()) {
            for (int t = 0; t <= args.iters; ++t) {
                const auto& ps = gt_psnr_curve[t];
                if (ps.empty()) continue;
                const double mean_psnr =
                    std::accumulate(ps.begin(), ps.end(), 0.0) / ps.size();
                const auto& ms = gt_mse_curve[t];
                const double mean_mse =
                    std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
                double var = 0.0;
                for (double m : ms) var += (m - mean_mse) * (m - mean_mse);
                const double sd = std::sqrt(var / ms.size());
                char buf[96];
                std::snprintf(buf, sizeof(buf), "%s,%d,%.6g,%.6g",
                              filter.label.c_str(), t, mean_psnr, sd);
                curves << buf << '\n';
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-order reverse filtering toolkit"};
    app.require_subcommand(1);

    FilterArgs filter_args;
    auto* filter_cmd = app.add_subcommand("filter", "apply one filter");
    filter_cmd->add_option("--input", filter_args.input)->required();
    filter_cmd->add_option("--output", filter_args.output)->required();
    filter_cmd->add_option("--spec", filter_args.spec_text)->required();
    filter_cmd->add_option("--boundary", filter_args.boundary);

    ReverseArgs reverse_args;
    auto* reverse_cmd =
        app.add_subcommand("reverse", "reverse a filter by fixed-point iteration");
    reverse_cmd->add_option("--filtered", reverse_args.filtered)->required();
    reverse_cmd->add_option("--spec", reverse_args.spec_text);
    reverse_cmd->add_option("--external-cmd", reverse_args.external_cmd);
    reverse_cmd->add_option("--external-format", reverse_args.external_format)
        ->check(CLI::IsMember({"pfm", "png"}));
    reverse_cmd->add_option("--external-timeout", reverse_args.external_timeout);
    reverse_cmd->add_option("--iters", reverse_args.iters);
    reverse_cmd->add_option("--gt", reverse_args.gt);
    reverse_cmd->add_option("--trace-csv", reverse_args.trace_csv);
    reverse_cmd->add_option("--out-final", reverse_args.out_final);
    reverse_cmd->add_option("--out-best", reverse_args.out_best);
    reverse_cmd->add_option("--best-by", reverse_args.best_by)
        ->check(CLI::IsMember({"dt", "gt"}));
    reverse_cmd->add_option("--early-stop", reverse_args.early_stop_patience);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd =
        app.add_subcommand("analyze", "contraction / reversibility analysis");
    analyze_cmd->add_option("--kernel", analyze_args.kernel_spec);
    analyze_cmd->add_option("--matrix", analyze_args.matrix_file);
    analyze_cmd->add_option("--grid", analyze_args.grid);
    analyze_cmd->add_option("--report-json", analyze_args.report_json);
    analyze_cmd->add_option("--energy-image", analyze_args.energy_image);
    analyze_cmd->add_flag("--dump-spectrum", analyze_args.dump_spectrum);

    BenchArgs bench_args;
    auto* bench_cmd =
        app.add_subcommand("bench", "reversal benchmark over an image directory");
    bench_cmd->add_option("--images", bench_args.images_dir)->required();
    bench_cmd->add_option("--filters", bench_args.filters_file)->required();
    bench_cmd->add_option("--iters", bench_args.iters);
    bench_cmd->add_option("--out-csv", bench_args.out_csv)->required();
    bench_cmd->add_option("--curves-csv", bench_args.curves_csv);

    try {
        app.parse(argc, argv);
        if (filter_cmd->parsed()) return cmd_filter(filter_args);
        if (reverse_cmd->parsed()) return cmd_reverse(reverse_args);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const FilterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!e.stderr_output().empty()) {
            std::cerr << "--- captured stderr ---\n" << e.stderr_output() << "\n";
        }
        return 5;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#include "defilter/reverse.hpp"

#include <cmath>
#include <cstdio>

namespace defilter {

namespace {

void quantize_float32(Image& img) {
    for (double& v : img.data) v = static_cast<float>(v);
}

Image evaluate_filter(const FilterFn& f, const Image& x, int iteration) {
    try {
        return f(x);
    } catch (const FilterError& e) {
        throw FilterError("filter failed at iteration " +
                              std::to_string(iteration) + ": " + e.what(),
                          e.stderr_output());
    }
}

}  // namespace

ReverseResult reverse_filter(const FilterFn& f, const Image& j_star,
                             const ReverseConfig& config) {
    if (config.max_iters < 1) throw ParamError("max_iters must be >= 1");
    if (!j_star.all_finite()) throw ParamError("filtered input is not finite");
    if (config.ground_truth) require_compatible(*config.ground_truth, j_star);
    if (config.init) require_compatible(*config.init, j_star);

    const bool track_gt = config.ground_truth.has_value();
    const bool best_by_gt = config.keep_best_by == BestBy::GtError && track_gt;

    Image x = config.init ? *config.init : j_star;
    if (config.exchange_float32) quantize_float32(x);

    ReverseTrace trace;
    Image best = x;
    double best_value = -1.0;
    int rising = 0;
    double prev_dt_distance = 0.0;

    for (int t = 0;; ++t) {
        Image fx = evaluate_filter(f, x, t);
        require_compatible(fx, j_star);
        if (config.exchange_float32) quantize_float32(fx);

        if (!fx.all_finite() || !x.all_finite()) {
            throw DivergenceError(t, std::move(trace));
        }

        IterationRecord rec;
        rec.iter = t;
        rec.dt_distance = distance(j_star, fx);
        rec.residual_norm = rec.dt_distance;
        rec.dt_psnr = psnr(j_star, fx);
        if (track_gt) rec.gt_psnr = psnr(*config.ground_truth, x);
        trace.records.push_back(rec);

        const double criterion = best_by_gt ? *rec.gt_psnr : rec.dt_psnr;
        if (criterion > best_value) {
            best_value = criterion;
            best = x;
            trace.best_index = t;
        }

        if (t == config.max_iters) break;

        if (const auto* stop = std::get_if<StopOnDtRise>(&config.stop_policy)) {
            if (t > 0 && rec.dt_distance > prev_dt_distance) {
                if (++rising >= stop->patience) break;
            } else {
                rising = 0;
            }
        }
        prev_dt_distance = rec.dt_distance;

        // X^{t+1} = X^t + (J* - f(X^t))
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] += j_star.data[i] - fx.data[i];
        }
        if (config.exchange_float32) quantize_float32(x);
        if (!x.all_finite()) {
            throw DivergenceError(t + 1, std::move(trace));
        }
    }

    trace.converged =
        trace.records.back().residual_norm <
        1e-9 * std::sqrt(static_cast<double>(j_star.samples()));

    return ReverseResult{std::move(x), std::move(best), std::move(trace)};
}

ReverseResult reverse_filter(const FilterSpec& spec, const Image& j_star,
                             const ReverseConfig& config) {
    validate_spec(spec);
    return reverse_filter(
        [&spec](const Image& img) { return apply_filter(spec, img); }, j_star,
        config);
}

double fixed_point_residual(const FilterFn& f, const Image& x,
                            const Image& j_star) {
    require_compatible(x, j_star);
    return distance(j_star, f(x));
}

double fixed_point_residual(const FilterSpec& spec, const Image& x,
                            const Image& j_star) {
    return fixed_point_residual(
        [&spec](const Image& img) { return apply_filter(spec, img); }, x,
        j_star);
}

void write_trace_csv(const ReverseTrace& trace, std::ostream& out) {
    out << "iter,dt_psnr,dt_distance,gt_psnr,residual_norm\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    for (const auto& rec : trace.records) {
        out << rec.iter << ',' << fmt(rec.dt_psnr) << ','
            << fmt(rec.dt_distance) << ',';
        if (rec.gt_psnr) out << fmt(*rec.gt_psnr);
        out << ',' << fmt(rec.residual_norm) << '\n';
    }
}

}  // namespace defilter

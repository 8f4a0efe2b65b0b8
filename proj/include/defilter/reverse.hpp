#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <variant>

#include "defilter/filters.hpp"
#include "defilter/image.hpp"

namespace defilter {

/// One filter evaluation per iteration; the engine never needs derivatives.
using FilterFn = std::function<Image(const Image&)>;

enum class BestBy {
    DtError,  // maximize PSNR(J*, f(X^t))
    GtError,  // maximize PSNR(ground_truth, X^t); falls back to DT if untracked
};

struct StopFixedCount {};

/// Stop once DT error has risen for `patience` consecutive iterations.
struct StopOnDtRise {
    int patience = 5;
};

struct ReverseConfig {
    int max_iters = 50;
    std::optional<Image> ground_truth;  // reporting only, never steers the run
    std::variant<StopFixedCount, StopOnDtRise> stop_policy = StopFixedCount{};
    BestBy keep_best_by = BestBy::DtError;
    std::optional<Image> init;  // X^0; defaults to J*

    // Round every iterate and filter output to 32-bit float precision. The
    // CLI turns this on so that an in-process run and a black-box run that
    // exchanges 32-bit PFM files produce bit-identical iterates.
    bool exchange_float32 = false;
};

struct IterationRecord {
    int iter = 0;
    double dt_psnr = 0.0;      // PSNR(J*, f(X^t))
    double dt_distance = 0.0;  // ||J* - f(X^t)||
    std::optional<double> gt_psnr;
    double residual_norm = 0.0;  // ||J* - f(X^t)|| = distance(g(X^t), X^t)
};

struct ReverseTrace {
    std::vector<IterationRecord> records;  // iteration 0 = initialization
    int best_index = 0;
    bool converged = false;
};

struct ReverseResult {
    Image final_image;
    Image best_image;
    ReverseTrace trace;
};

/// An iterate picked up NaN/Inf; carries the trace recorded so far.
class DivergenceError : public Error {
public:
    DivergenceError(int iteration, ReverseTrace trace)
        : Error("iterate diverged (NaN/Inf) at iteration " +
                std::to_string(iteration)),
          iteration(iteration), trace(std::move(trace)) {}

    int iteration;
    ReverseTrace trace;
};

/// Zero-order fixed-point reversal: X^0 = J* (or config.init), then
/// X^{t+1} = X^t + (J* - f(X^t)). Records every iterate; returns both the
/// final iterate and the best one under config.keep_best_by.
ReverseResult reverse_filter(const FilterFn& f, const Image& j_star,
                             const ReverseConfig& config);
ReverseResult reverse_filter(const FilterSpec& spec, const Image& j_star,
                             const ReverseConfig& config);

/// ||J* - f(x)||: zero iff x is a fixed point of g(x) = x + J* - f(x).
double fixed_point_residual(const FilterFn& f, const Image& x,
                            const Image& j_star);
double fixed_point_residual(const FilterSpec& spec, const Image& x,
                            const Image& j_star);

/// CSV trace: header `iter,dt_psnr,dt_distance,gt_psnr,residual_norm`, one
/// row per iteration, gt_psnr empty when untracked, 6 significant digits.
void write_trace_csv(const ReverseTrace& trace, std::ostream& out);

}  // namespace defilter

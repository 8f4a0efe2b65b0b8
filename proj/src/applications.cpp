#include "defilter/applications.hpp"

#include <cmath>

namespace defilter {

ReverseResult super_resolve(const Image& lr_upsampled, const SrConfig& config,
                            const Image* ground_truth) {
    if (config.scale < 2) throw ParamError("sr scale must be >= 2");
    if (lr_upsampled.height % config.scale != 0 ||
        lr_upsampled.width % config.scale != 0) {
        throw ParamError(
            "image dimensions not divisible by the scale; crop explicitly");
    }
    if (config.init) require_compatible(*config.init, lr_upsampled);

    ReverseConfig rc;
    rc.max_iters = config.iterations;
    rc.init = config.init;
    if (ground_truth) {
        rc.ground_truth = *ground_truth;
        rc.keep_best_by = BestBy::GtError;
    }
    const FilterSpec f = DownUp{config.scale};
    return reverse_filter(f, lr_upsampled, rc);
}

DeconvResult deconvolve(const Image& blurred, const DeconvConfig& config,
                        const Image* ground_truth) {
    DeconvResult result;
    result.spectrum =
        kernel_spectrum(config.kernel, blurred.height, blurred.width);
    result.kernel_normalized = std::abs(config.kernel.sum() - 1.0) <= 1e-9;

    ReverseConfig rc;
    rc.max_iters = config.iterations;
    if (ground_truth) {
        rc.ground_truth = *ground_truth;
        rc.keep_best_by = BestBy::GtError;
    }
    const FilterSpec f = GenericConv{config.kernel, config.boundary};
    result.reverse = reverse_filter(f, blurred, rc);
    return result;
}

PointwiseResult reverse_pointwise(const Image& filtered,
                                  const PointwiseSpec& spec, int iterations,
                                  const Image* ground_truth) {
    PointwiseResult result;
    FilterSpec f;
    if (const auto* g = std::get_if<Gamma>(&spec)) {
        for (double v : filtered.data) {
            if (v < 0.0) throw ParamError("gamma reversal requires inputs >= 0");
        }
        f = *g;
    } else {
        const auto& u = std::get<UnsharpMask>(spec);
        result.contraction_warning = u.lambda >= 1.0;
        f = u;
    }

    ReverseConfig rc;
    rc.max_iters = iterations;
    if (ground_truth) {
        rc.ground_truth = *ground_truth;
        rc.keep_best_by = BestBy::GtError;
    }
    result.reverse = reverse_filter(f, filtered, rc);
    return result;
}

}  // namespace defilter

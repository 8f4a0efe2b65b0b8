#include "defilter/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

namespace defilter {

namespace {

// Bins within this distance of the unit boundary neither converge nor
// diverge; they are assigned to the complement.
constexpr double kBoundaryTol = 1e-12;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place 2D DFT. sign = FFTW_FORWARD for the unnormalized forward
// transform; the inverse applies the 1/(HW) factor here.
void fft2(std::vector<std::complex<double>>& buf, int h, int w, int sign) {
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(h, w, data, data, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (sign == FFTW_BACKWARD) {
        const double norm = 1.0 / (static_cast<double>(h) * w);
        for (auto& v : buf) v *= norm;
    }
}

std::vector<std::complex<double>> channel_spectrum(const Image& image,
                                                   int channel) {
    std::vector<std::complex<double>> buf(
        static_cast<std::size_t>(image.height) * image.width);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            buf[static_cast<std::size_t>(y) * image.width + x] =
                image.at(y, x, channel);
        }
    }
    fft2(buf, image.height, image.width, FFTW_FORWARD);
    return buf;
}

void classify(double in_count, double total, double& fraction,
              ReversibilityClass& cls) {
    fraction = in_count / total;
    if (in_count == 0) {
        cls = ReversibilityClass::NonContractive;
    } else if (in_count == total) {
        cls = ReversibilityClass::StrictContraction;
    } else {
        cls = ReversibilityClass::PartiallyReversible;
    }
}

}  // namespace

std::string to_string(ReversibilityClass cls) {
    switch (cls) {
        case ReversibilityClass::StrictContraction: return "StrictContraction";
        case ReversibilityClass::PartiallyReversible:
            return "PartiallyReversible";
        default: return "NonContractive";
    }
}

SpectralReport kernel_spectrum(const Kernel& kernel, int grid_h, int grid_w) {
    if (kernel.height > grid_h || kernel.width > grid_w) {
        throw ParamError("kernel larger than analysis grid");
    }

    // Zero-pad the kernel onto the grid with the anchor at the origin
    // (circular placement), matching periodic convolution exactly.
    std::vector<std::complex<double>> buf(
        static_cast<std::size_t>(grid_h) * grid_w, 0.0);
    const int ay = kernel.anchor_y(), ax = kernel.anchor_x();
    for (int ky = 0; ky < kernel.height; ++ky) {
        int y = (ky - ay) % grid_h;
        if (y < 0) y += grid_h;
        for (int kx = 0; kx < kernel.width; ++kx) {
            int x = (kx - ax) % grid_w;
            if (x < 0) x += grid_w;
            buf[static_cast<std::size_t>(y) * grid_w + x] +=
                kernel.at(ky, kx);
        }
    }
    fft2(buf, grid_h, grid_w, FFTW_FORWARD);

    SpectralReport report;
    report.grid_h = grid_h;
    report.grid_w = grid_w;
    report.spectrum = std::move(buf);
    report.omega_mask.assign(report.spectrum.size(), 0);

    int in_count = 0;
    double c = 0.0;
    for (std::size_t p = 0; p < report.spectrum.size(); ++p) {
        const double dev = std::abs(1.0 - report.spectrum[p]);
        if (dev < 1.0 - kBoundaryTol) {
            report.omega_mask[p] = 1;
            ++in_count;
            c = std::max(c, dev);
        }
    }
    report.contraction_constant = c;
    classify(in_count, static_cast<double>(report.spectrum.size()),
             report.omega_fraction, report.cls);
    return report;
}

Image project_omega(const Image& image, const SpectralReport& report,
                    OmegaSide side) {
    if (image.height != report.grid_h || image.width != report.grid_w) {
        throw DimensionError("image dimensions do not match the report grid");
    }
    const bool keep_omega = side == OmegaSide::Omega;
    Image out(image.height, image.width, image.channels);
    for (int c = 0; c < image.channels; ++c) {
        auto buf = channel_spectrum(image, c);
        for (std::size_t p = 0; p < buf.size(); ++p) {
            if ((report.omega_mask[p] != 0) != keep_omega) buf[p] = 0.0;
        }
        fft2(buf, image.height, image.width, FFTW_BACKWARD);
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                out.at(y, x, c) =
                    buf[static_cast<std::size_t>(y) * image.width + x].real();
            }
        }
    }
    return out;
}

double omega_energy_fraction(const Image& image,
                             const SpectralReport& report) {
    if (image.height != report.grid_h || image.width != report.grid_w) {
        throw DimensionError("image dimensions do not match the report grid");
    }
    double inside = 0.0, total = 0.0;
    for (int c = 0; c < image.channels; ++c) {
        const auto buf = channel_spectrum(image, c);
        for (std::size_t p = 0; p < buf.size(); ++p) {
            const double e = std::norm(buf[p]);
            total += e;
            if (report.omega_mask[p]) inside += e;
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

Eigen::MatrixXd matrix_from_conv(const Kernel& kernel, int grid_h, int grid_w,
                                 Boundary boundary) {
    const long n = static_cast<long>(grid_h) * grid_w;
    if (n > 4096) throw ParamError("grid too large for dense analysis (max 4096)");
    if (kernel.height > grid_h || kernel.width > grid_w) {
        throw ParamError("kernel larger than grid");
    }

    auto map_index = [boundary](int i, int size) {
        if (boundary == Boundary::Periodic) {
            i %= size;
            return i < 0 ? i + size : i;
        }
        while (i < 0 || i >= size) {
            if (i < 0) i = -1 - i;
            if (i >= size) i = 2 * size - 1 - i;
        }
        return i;
    };

    const int ay = kernel.anchor_y(), ax = kernel.anchor_x();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int y = 0; y < grid_h; ++y) {
        for (int x = 0; x < grid_w; ++x) {
            const long row = static_cast<long>(x) * grid_h + y;
            for (int ky = 0; ky < kernel.height; ++ky) {
                const int sy = map_index(y - (ky - ay), grid_h);
                for (int kx = 0; kx < kernel.width; ++kx) {
                    const int sx = map_index(x - (kx - ax), grid_w);
                    m(row, static_cast<long>(sx) * grid_h + sy) +=
                        kernel.at(ky, kx);
                }
            }
        }
    }
    return m;
}

LinearOperatorReport analyze_linear_operator(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) {
        throw ParamError("linear operator matrix must be square");
    }
    if (matrix.rows() > 4096) {
        throw ParamError("operator too large for dense SVD (max 4096)");
    }

    const Eigen::MatrixXd residual_op =
        Eigen::MatrixXd::Identity(matrix.rows(), matrix.cols()) - matrix;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(residual_op,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NumericsError("SVD failed to converge");
    }

    LinearOperatorReport report;
    report.dimension = static_cast<int>(matrix.rows());
    report.singular_values = svd.singularValues();
    report.right_singular_vectors = svd.matrixV();

    double c = 0.0;
    for (int p = 0; p < report.singular_values.size(); ++p) {
        const double s2 = report.singular_values[p] * report.singular_values[p];
        if (s2 < 1.0 - kBoundaryTol) {
            report.omega_indices.push_back(p);
            c = std::max(c, s2);
        }
    }
    report.contraction_constant = c;
    double fraction;
    classify(static_cast<double>(report.omega_indices.size()),
             static_cast<double>(report.dimension), fraction, report.cls);
    return report;
}

Eigen::VectorXd project_subspace(const LinearOperatorReport& report,
                                 const Eigen::VectorXd& x, OmegaSide side) {
    if (x.size() != report.dimension) {
        throw DimensionError("vector length does not match operator dimension");
    }
    Eigen::VectorXd coeffs = report.right_singular_vectors.transpose() * x;
    std::vector<bool> in_omega(report.dimension, false);
    for (int p : report.omega_indices) in_omega[p] = true;
    const bool keep_omega = side == OmegaSide::Omega;
    for (int p = 0; p < report.dimension; ++p) {
        if (in_omega[p] != keep_omega) coeffs[p] = 0.0;
    }
    return report.right_singular_vectors * coeffs;
}

ContractionStats empirical_contraction(
    const FilterFn& f, std::span<const std::pair<Image, Image>> pairs) {
    ContractionStats stats;
    double sum = 0.0;
    int below = 0;
    for (const auto& [a, b] : pairs) {
        require_compatible(a, b);
        const double denom = distance(a, b);
        if (denom == 0.0) {
            ++stats.skipped;
            continue;
        }
        const Image fa = f(a), fb = f(b);
        Image res_a(a.height, a.width, a.channels);
        Image res_b(a.height, a.width, a.channels);
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            res_a.data[i] = a.data[i] - fa.data[i];
            res_b.data[i] = b.data[i] - fb.data[i];
        }
        const double ratio = distance(res_a, res_b) / denom;
        stats.ratios.push_back(ratio);
        stats.max = std::max(stats.max, ratio);
        sum += ratio;
        if (ratio < 1.0) ++below;
    }
    if (!stats.ratios.empty()) {
        stats.mean = sum / static_cast<double>(stats.ratios.size());
        stats.fraction_below_1 =
            static_cast<double>(below) / static_cast<double>(stats.ratios.size());
    }
    return stats;
}

ContractionStats empirical_contraction(
    const FilterSpec& spec, std::span<const std::pair<Image, Image>> pairs) {
    return empirical_contraction(
        [&spec](const Image& img) { return apply_filter(spec, img); }, pairs);
}

nlohmann::json spectral_report_json(const SpectralReport& report,
                                    bool include_spectrum) {
    nlohmann::json j;
    j["grid"] = {report.grid_h, report.grid_w};
    j["contraction_constant"] = report.contraction_constant;
    j["omega_fraction"] = report.omega_fraction;
    j["class"] = to_string(report.cls);
    if (report.omega_energy_fraction) {
        j["omega_energy_fraction"] = *report.omega_energy_fraction;
    }
    if (include_spectrum) {
        nlohmann::json spec = nlohmann::json::array();
        for (std::size_t p = 0; p < report.spectrum.size(); ++p) {
            spec.push_back({{"re", report.spectrum[p].real()},
                            {"im", report.spectrum[p].imag()},
                            {"omega", report.omega_mask[p] != 0}});
        }
        j["spectrum"] = std::move(spec);
    }
    return j;
}

nlohmann::json linear_report_json(const LinearOperatorReport& report) {
    nlohmann::json j;
    j["dimension"] = report.dimension;
    j["contraction_constant"] = report.contraction_constant;
    j["omega_size"] = report.omega_indices.size();
    j["class"] = to_string(report.cls);
    j["singular_values"] = std::vector<double>(
        report.singular_values.data(),
        report.singular_values.data() + report.singular_values.size());
    return j;
}

}  // namespace defilter

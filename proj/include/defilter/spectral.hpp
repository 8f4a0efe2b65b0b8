#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "defilter/image.hpp"
#include "defilter/kernel.hpp"
#include "defilter/reverse.hpp"

#include <nlohmann/json_fwd.hpp>

namespace defilter {

enum class ReversibilityClass {
    StrictContraction,    // every frequency / direction contracts
    PartiallyReversible,  // a proper nonempty subset contracts
    NonContractive,       // nothing contracts
};

std::string to_string(ReversibilityClass cls);

enum class OmegaSide { Omega, OmegaComplement };

/// DFT-based contraction analysis of a convolution kernel on a periodic
/// HxW grid. DFT convention: unnormalized forward, 1/(HW) inverse.
///
/// A frequency bin p belongs to Omega when |1 - K_hat_p| < 1; bins within
/// 1e-12 of the unit boundary are assigned to the complement.
struct SpectralReport {
    int grid_h = 0;
    int grid_w = 0;
    std::vector<std::complex<double>> spectrum;  // K_hat, row-major
    std::vector<std::uint8_t> omega_mask;
    double contraction_constant = 0.0;  // max over Omega of |1 - K_hat_p|
    double omega_fraction = 0.0;        // |Omega| / (H*W)
    std::optional<double> omega_energy_fraction;
    ReversibilityClass cls = ReversibilityClass::NonContractive;
};

SpectralReport kernel_spectrum(const Kernel& kernel, int grid_h, int grid_w);

/// DFT -> zero the bins outside the chosen set -> inverse DFT, per channel.
/// The two sides always partition the image: Omega + complement = input.
Image project_omega(const Image& image, const SpectralReport& report,
                    OmegaSide side);

/// Fraction of the image's spectral energy (squared DFT magnitudes, channels
/// jointly) that lies inside Omega.
double omega_energy_fraction(const Image& image, const SpectralReport& report);

/// Explicit matrix acting like convolve(.) on vectorized gray images.
/// Vectorization is column-major: index = x * H + y.
Eigen::MatrixXd matrix_from_conv(const Kernel& kernel, int grid_h, int grid_w,
                                 Boundary boundary);

/// SVD analysis of (I - A) for a general linear filter A. Note the scale:
/// the contraction constant here is the squared singular value maximized
/// over Omega, unlike the modulus scale used for convolution spectra.
struct LinearOperatorReport {
    int dimension = 0;
    Eigen::VectorXd singular_values;  // of (I - A), descending
    std::vector<int> omega_indices;   // p with s_p^2 < 1
    double contraction_constant = 0.0;  // max over Omega of s_p^2
    Eigen::MatrixXd right_singular_vectors;  // V; projector is V D_Omega V^T
    ReversibilityClass cls = ReversibilityClass::NonContractive;
};

/// Dense SVD of (I - A); dimension guard n <= 4096.
LinearOperatorReport analyze_linear_operator(const Eigen::MatrixXd& matrix);

/// V D V^T x for the chosen subspace.
Eigen::VectorXd project_subspace(const LinearOperatorReport& report,
                                 const Eigen::VectorXd& x, OmegaSide side);

/// Empirical contraction-ratio statistics over image pairs:
/// ratio = ||(Ia - f(Ia)) - (Ib - f(Ib))|| / ||Ia - Ib||.
struct ContractionStats {
    std::vector<double> ratios;
    double max = 0.0;
    double mean = 0.0;
    double fraction_below_1 = 0.0;
    int skipped = 0;  // identical pairs (zero denominator)
};

ContractionStats empirical_contraction(
    const FilterFn& f, std::span<const std::pair<Image, Image>> pairs);
ContractionStats empirical_contraction(
    const FilterSpec& spec, std::span<const std::pair<Image, Image>> pairs);

/// JSON export; per-frequency spectrum dump is flag-gated (large).
nlohmann::json spectral_report_json(const SpectralReport& report,
                                    bool include_spectrum = false);
nlohmann::json linear_report_json(const LinearOperatorReport& report);

}  // namespace defilter

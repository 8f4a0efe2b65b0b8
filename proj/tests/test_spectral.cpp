#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include <nlohmann/json.hpp>

#include "defilter/spectral.hpp"
#include "test_support.hpp"

using namespace defilter;
using test_support::desk_image;
using test_support::max_abs_diff;
using test_support::random_image;
using test_support::random_kernel;

TEST_CASE("delta kernel: flat spectrum, perfect contraction") {
    const auto report = kernel_spectrum(delta_kernel(), 8, 8);
    CHECK(report.cls == ReversibilityClass::StrictContraction);
    CHECK(report.contraction_constant == 0.0);
    CHECK(report.omega_fraction == 1.0);
    for (const auto& v : report.spectrum) {
        CHECK(std::abs(v - std::complex<double>(1.0)) < 1e-12);
    }
}

TEST_CASE("1D averaging kernel: hand-computed spectrum on a 1x4 grid") {
    // [0.25 0.5 0.25] on 4 periodic samples: transfer function
    // 0.5 + 0.5 cos(2 pi p / 4) = 1, 0.5, 0, 0.5. The zero bin sits exactly
    // on the unit boundary |1 - 0| = 1 and is assigned to the complement.
    Kernel k(1, 3);
    k.weights = {0.25, 0.5, 0.25};
    const auto report = kernel_spectrum(k, 1, 4);

    const double expected[4] = {1.0, 0.5, 0.0, 0.5};
    for (int p = 0; p < 4; ++p) {
        CHECK(report.spectrum[p].real() == doctest::Approx(expected[p]));
        CHECK(std::abs(report.spectrum[p].imag()) < 1e-12);
    }
    CHECK(report.cls == ReversibilityClass::PartiallyReversible);
    CHECK(report.omega_fraction == doctest::Approx(0.75));
    CHECK(report.contraction_constant == doctest::Approx(0.5));
    CHECK(report.omega_mask[2] == 0);
}

TEST_CASE("box kernel on its own support grid keeps only DC") {
    // box3 on a 3x3 periodic grid averages everything: every non-DC bin has
    // transfer 0, landing on the boundary and outside the contracting set.
    const auto report = kernel_spectrum(box_kernel(1), 3, 3);
    CHECK(report.cls == ReversibilityClass::PartiallyReversible);
    CHECK(report.omega_fraction == doctest::Approx(1.0 / 9.0));
    CHECK(report.omega_mask[0] == 1);
    CHECK(report.contraction_constant == 0.0);
}

TEST_CASE("kernel spectrum matches the naive DFT oracle") {
    const Kernel k = random_kernel(5, 3, 77);
    const auto report = kernel_spectrum(k, 11, 13);
    const auto oracle = test_support::naive_kernel_spectrum(k, 11, 13);
    REQUIRE(report.spectrum.size() == oracle.size());
    for (std::size_t p = 0; p < oracle.size(); ++p) {
        CHECK(std::abs(report.spectrum[p] - oracle[p]) < 1e-9);
    }
}

TEST_CASE("gaussian is a strict contraction, disk only partially reversible") {
    const auto gauss = kernel_spectrum(gaussian_kernel(1.0, 7), 64, 64);
    CHECK(gauss.cls == ReversibilityClass::StrictContraction);
    CHECK(gauss.contraction_constant < 1.0);
    CHECK(gauss.contraction_constant > 0.9);  // strong blur, slow reversal

    // Truncating a wide gaussian makes its transfer function dip slightly
    // below zero, pushing a few bins out of the contracting set.
    const auto truncated = kernel_spectrum(gaussian_kernel(2.0, 21), 64, 64);
    CHECK(truncated.cls == ReversibilityClass::PartiallyReversible);
    CHECK(truncated.omega_fraction > 0.8);

    const auto disk = kernel_spectrum(disk_kernel(3.0, 7), 64, 64);
    CHECK(disk.cls == ReversibilityClass::PartiallyReversible);
    CHECK(disk.omega_fraction > 0.0);
    CHECK(disk.omega_fraction < 1.0);
    // The disk transfer function crosses zero: some bins are negative.
    const bool has_negative =
        std::any_of(disk.spectrum.begin(), disk.spectrum.end(),
                    [](const std::complex<double>& v) { return v.real() < -1e-6; });
    CHECK(has_negative);
}

TEST_CASE("kernel larger than grid is rejected") {
    CHECK_THROWS_AS((void)kernel_spectrum(gaussian_kernel(2.0, 21), 8, 8),
                    ParamError);
}

TEST_CASE("omega projection partitions the image") {
    const Image img = desk_image(32, 31);
    const auto report = kernel_spectrum(disk_kernel(3.0, 7), 32, 32);

    const Image inside = project_omega(img, report, OmegaSide::Omega);
    const Image outside = project_omega(img, report, OmegaSide::OmegaComplement);

    Image sum(32, 32, 1);
    for (std::size_t i = 0; i < sum.data.size(); ++i) {
        sum.data[i] = inside.data[i] + outside.data[i];
    }
    CHECK(max_abs_diff(sum, img) < 1e-10);

    // Projections are idempotent.
    CHECK(max_abs_diff(project_omega(inside, report, OmegaSide::Omega), inside) <
          1e-10);
    CHECK(max_abs_diff(project_omega(inside, report, OmegaSide::OmegaComplement),
                       Image(32, 32, 1)) < 1e-10);

    CHECK_THROWS_AS((void)project_omega(Image(8, 8, 1), report, OmegaSide::Omega),
                    DimensionError);
}

TEST_CASE("omega energy fraction") {
    const auto report = kernel_spectrum(disk_kernel(3.0, 7), 32, 32);
    const Image img = desk_image(32, 33);
    const double frac = omega_energy_fraction(img, report);
    CHECK(frac > 0.0);
    CHECK(frac <= 1.0);

    // Energy of the in-set projection over total energy agrees.
    const Image inside = project_omega(img, report, OmegaSide::Omega);
    double e_in = 0.0, e_tot = 0.0;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        e_in += inside.data[i] * inside.data[i];
        e_tot += img.data[i] * img.data[i];
    }
    CHECK(frac == doctest::Approx(e_in / e_tot).epsilon(1e-9));

    // A constant image is pure DC, inside the set for any averaging kernel.
    CHECK(omega_energy_fraction(Image::constant(32, 32, 1, 0.5), report) ==
          doctest::Approx(1.0));
}

TEST_CASE("matrix_from_conv acts exactly like convolve") {
    const Kernel k = random_kernel(3, 3, 90);
    const Image img = random_image(6, 5, 1, 91);
    Eigen::VectorXd v(30);
    for (int x = 0; x < 5; ++x) {
        for (int y = 0; y < 6; ++y) v[x * 6 + y] = img.at(y, x);
    }
    for (Boundary b : {Boundary::Periodic, Boundary::Symmetric}) {
        const Eigen::MatrixXd a = matrix_from_conv(k, 6, 5, b);
        const Eigen::VectorXd out_vec = a * v;
        const Image out_img = convolve(img, k, b);
        for (int x = 0; x < 5; ++x) {
            for (int y = 0; y < 6; ++y) {
                CHECK(out_vec[x * 6 + y] ==
                      doctest::Approx(out_img.at(y, x)).epsilon(1e-12));
            }
        }
        // Rows of a stochastic kernel's matrix sum to one.
        for (int r = 0; r < 30; ++r) {
            CHECK(a.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS((void)matrix_from_conv(k, 100, 100, Boundary::Periodic),
                    ParamError);
}

TEST_CASE("linear operator analysis: scaled identity") {
    // A = 0.5 I: I - A has every singular value 0.5; the reported constant
    // is on the squared scale, 0.25.
    const auto report =
        analyze_linear_operator(0.5 * Eigen::MatrixXd::Identity(16, 16));
    CHECK(report.cls == ReversibilityClass::StrictContraction);
    CHECK(report.contraction_constant == doctest::Approx(0.25));
    CHECK(report.omega_indices.size() == 16);
    for (int i = 0; i < 16; ++i) {
        CHECK(report.singular_values[i] == doctest::Approx(0.5));
    }

    // A = I: perfectly invertible, zero residual operator.
    const auto ident = analyze_linear_operator(Eigen::MatrixXd::Identity(8, 8));
    CHECK(ident.cls == ReversibilityClass::StrictContraction);
    CHECK(ident.contraction_constant == doctest::Approx(0.0));

    // A = 0: residual operator is the identity, nothing contracts.
    const auto zero = analyze_linear_operator(Eigen::MatrixXd::Zero(8, 8));
    CHECK(zero.cls == ReversibilityClass::NonContractive);

    CHECK_THROWS_AS((void)analyze_linear_operator(Eigen::MatrixXd::Zero(3, 4)),
                    ParamError);
}

TEST_CASE("circulant matrices agree with the DFT analysis") {
    // For periodic convolution the singular values of I - A are exactly the
    // moduli |1 - K_hat_p|, so the two analysis paths must coincide.
    const Kernel k = random_kernel(3, 3, 101);
    const auto spectral = kernel_spectrum(k, 8, 8);
    const auto linear =
        analyze_linear_operator(matrix_from_conv(k, 8, 8, Boundary::Periodic));

    std::vector<double> moduli;
    for (const auto& v : spectral.spectrum) {
        moduli.push_back(std::abs(1.0 - v));
    }
    std::sort(moduli.rbegin(), moduli.rend());
    REQUIRE(linear.singular_values.size() == 64);
    for (int p = 0; p < 64; ++p) {
        CHECK(linear.singular_values[p] == doctest::Approx(moduli[p]).epsilon(1e-9));
    }
    CHECK(linear.omega_indices.size() ==
          static_cast<std::size_t>(spectral.omega_fraction * 64 + 0.5));
    CHECK(linear.contraction_constant ==
          doctest::Approx(spectral.contraction_constant *
                          spectral.contraction_constant)
              .epsilon(1e-9));
}

TEST_CASE("subspace projection partitions vectors") {
    const Kernel k = disk_kernel(2.0, 5);
    const auto report =
        analyze_linear_operator(matrix_from_conv(k, 6, 6, Boundary::Periodic));
    CHECK(report.cls == ReversibilityClass::PartiallyReversible);

    Eigen::VectorXd x = Eigen::VectorXd::Random(36);
    const Eigen::VectorXd in = project_subspace(report, x, OmegaSide::Omega);
    const Eigen::VectorXd out =
        project_subspace(report, x, OmegaSide::OmegaComplement);
    CHECK((in + out - x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((project_subspace(report, in, OmegaSide::Omega) - in)
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    CHECK_THROWS_AS(
        (void)project_subspace(report, Eigen::VectorXd::Zero(5), OmegaSide::Omega),
        DimensionError);
}

TEST_CASE("empirical contraction: exact cases") {
    std::vector<std::pair<Image, Image>> pairs;
    for (unsigned s = 0; s < 6; ++s) {
        pairs.emplace_back(random_image(8, 8, 1, 2 * s), random_image(8, 8, 1, 2 * s + 1));
    }
    pairs.emplace_back(pairs[0].first, pairs[0].first);  // zero denominator

    SUBCASE("identity: residual map is constant, ratios are zero") {
        const auto stats = empirical_contraction(
            FilterFn([](const Image& x) { return x; }), pairs);
        CHECK(stats.ratios.size() == 6);
        CHECK(stats.skipped == 1);
        CHECK(stats.max == 0.0);
        CHECK(stats.fraction_below_1 == 1.0);
    }

    SUBCASE("scalar 0.5: every ratio is exactly the residual factor") {
        const auto stats = empirical_contraction(
            FilterFn([](const Image& x) {
                Image out = x;
                for (auto& v : out.data) v *= 0.5;
                return out;
            }),
            pairs);
        for (double r : stats.ratios) {
            CHECK(r == doctest::Approx(0.5).epsilon(1e-12));
        }
        CHECK(stats.mean == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("empirical ratios of a linear contraction respect its constant") {
    const FilterSpec f = GaussianConv{1.5, 9};
    const auto kernel = kernel_for(f, 16, 16);
    const double c = kernel_spectrum(*kernel, 16, 16).contraction_constant;

    std::vector<std::pair<Image, Image>> pairs;
    for (unsigned s = 0; s < 10; ++s) {
        pairs.emplace_back(random_image(16, 16, 1, 300 + 2 * s),
                           random_image(16, 16, 1, 301 + 2 * s));
    }
    const auto stats = empirical_contraction(f, pairs);
    CHECK(stats.max <= c + 1e-9);
    CHECK(stats.fraction_below_1 == 1.0);
}

TEST_CASE("json reports expose the headline numbers") {
    const auto spectral = kernel_spectrum(gaussian_kernel(1.0, 7), 16, 16);
    const auto j = spectral_report_json(spectral, true);
    CHECK(j["grid"][0] == 16);
    CHECK(j["class"] == "StrictContraction");
    CHECK(j["contraction_constant"].get<double>() ==
          doctest::Approx(spectral.contraction_constant));
    CHECK(j["spectrum"].size() == 256);
    CHECK_FALSE(spectral_report_json(spectral, false).contains("spectrum"));

    const auto linear =
        analyze_linear_operator(0.5 * Eigen::MatrixXd::Identity(4, 4));
    const auto lj = linear_report_json(linear);
    CHECK(lj["dimension"] == 4);
    CHECK(lj["singular_values"].size() == 4);
}

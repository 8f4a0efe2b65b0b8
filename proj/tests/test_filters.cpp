#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "defilter/filter_spec.hpp"
#include "defilter/filters.hpp"
#include "defilter/kernel.hpp"
#include "defilter/reference.hpp"
#include "test_support.hpp"

using namespace defilter;
using test_support::desk_image;
using test_support::max_abs_diff;
using test_support::random_image;
using test_support::random_kernel;

TEST_CASE("kernel constructors and invariants") {
    CHECK_THROWS_AS(Kernel(2, 3), ParamError);  // even dimension
    CHECK_THROWS_AS(Kernel(3, 0), ParamError);

    const Kernel d = delta_kernel();
    CHECK(d.height == 1);
    CHECK(d.sum() == 1.0);

    const Kernel g = gaussian_kernel(2.0, 21);
    CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Symmetric under both reflections.
    for (int y = 0; y < 21; ++y) {
        for (int x = 0; x < 21; ++x) {
            CHECK(g.at(y, x) == g.at(20 - y, 20 - x));
            CHECK(g.at(y, x) == g.at(x, y));
        }
    }

    CHECK(recommended_gaussian_support(2.0) == 13);
    CHECK(recommended_gaussian_support(1.0) == 7);
    CHECK(recommended_gaussian_support(0.1) >= 3);

    const Kernel box = box_kernel(1);
    CHECK(box.height == 3);
    for (double w : box.weights) CHECK(w == doctest::Approx(1.0 / 9.0));

    CHECK_THROWS_AS(gaussian_kernel(-1.0, 5), ParamError);
    CHECK_THROWS_AS(gaussian_kernel(1.0, 4), ParamError);
}

TEST_CASE("disk kernel is a normalized hard indicator") {
    const Kernel disk = disk_kernel(3.0, 7);
    CHECK(disk.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const int a = disk.anchor_y();
    int support_count = 0;
    double first_positive = -1.0;
    for (int y = 0; y < disk.height; ++y) {
        for (int x = 0; x < disk.width; ++x) {
            const int dy = y - a, dx = x - a;
            const bool inside = dy * dy + dx * dx <= 9;
            if (inside) {
                ++support_count;
                if (first_positive < 0.0) first_positive = disk.at(y, x);
                CHECK(disk.at(y, x) == first_positive);  // no edge tapering
            } else {
                CHECK(disk.at(y, x) == 0.0);
            }
        }
    }
    CHECK(support_count == 29);
}

TEST_CASE("kernel text file loading") {
    const std::string path = "/tmp/defilter_kernel_test.txt";
    {
        std::ofstream out(path);
        out << "1 3\n0.25 0.5 0.25\n";
    }
    const Kernel k = load_kernel_text(path);
    CHECK(k.height == 1);
    CHECK(k.width == 3);
    CHECK(k.at(0, 1) == 0.5);
    std::remove(path.c_str());

    CHECK_THROWS_AS((void)load_kernel_text("/nonexistent/k.txt"), IoError);
}

TEST_CASE("identity and gamma are exact elementwise maps") {
    const Image img = random_image(6, 5, 3, 3);
    CHECK(apply_filter(Identity{}, img).data == img.data);

    const Image c = Image::constant(4, 4, 1, 0.25);
    const Image squared = gamma_map(c, 2.0);
    for (double v : squared.data) CHECK(v == doctest::Approx(0.0625));

    // Values at/below the floor are clamped before exponentiation, so the
    // map has bounded slope near zero.
    Image zeros = Image::constant(2, 2, 1, 0.0);
    const Image mapped = gamma_map(zeros, 2.2);
    for (double v : mapped.data) {
        CHECK(v == doctest::Approx(std::pow(kGammaFloor, 2.2)));
    }

    CHECK_THROWS_AS((void)gamma_map(c, 0.0), ParamError);
}

TEST_CASE("convolving a delta image recovers the kernel") {
    const Kernel g = gaussian_kernel(1.0, 7);
    Image delta(15, 15, 1);
    delta.at(7, 7) = 1.0;
    const Image out = convolve(delta, g, Boundary::Periodic);
    for (int ky = 0; ky < 7; ++ky) {
        for (int kx = 0; kx < 7; ++kx) {
            // True convolution: the response is the (unflipped) kernel
            // centered on the impulse.
            CHECK(out.at(7 + ky - 3, 7 + kx - 3) ==
                  doctest::Approx(g.at(ky, kx)).epsilon(1e-14));
        }
    }
}

TEST_CASE("periodic convolution matches the DFT product oracle") {
    const Image img = random_image(12, 10, 1, 17);
    const Kernel k = random_kernel(5, 3, 18);

    const Image fast = convolve(img, k, Boundary::Periodic);

    const auto img_hat = test_support::naive_dft(img);
    const auto k_hat = test_support::naive_kernel_spectrum(k, 12, 10);
    // Inverse DFT of the product, done directly.
    const int h = 12, w = 10;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::complex<double> acc = 0.0;
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) {
                    const double phase =
                        test_support::kTau * (static_cast<double>(u) * y / h +
                                              static_cast<double>(v) * x / w);
                    acc += img_hat[u * w + v] * k_hat[u * w + v] *
                           std::complex<double>(std::cos(phase), std::sin(phase));
                }
            }
            CHECK(fast.at(y, x) ==
                  doctest::Approx(acc.real() / (h * w)).epsilon(1e-9));
        }
    }
}

TEST_CASE("periodic convolution commutes with circular shifts") {
    const Image img = desk_image(16, 2);
    const Kernel k = gaussian_kernel(1.5, 9);
    const int sy = 5, sx = 11;

    Image shifted(16, 16, 1);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            shifted.at((y + sy) % 16, (x + sx) % 16) = img.at(y, x);
        }
    }
    const Image a = convolve(shifted, k, Boundary::Periodic);
    const Image b = convolve(img, k, Boundary::Periodic);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            CHECK(a.at((y + sy) % 16, (x + sx) % 16) ==
                  doctest::Approx(b.at(y, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parallel filters match the serial reference bitwise") {
    for (int channels : {1, 3}) {
        const Image img = random_image(23, 19, channels, 40 + channels);
        const Kernel k = random_kernel(5, 5, 41);

        for (Boundary b : {Boundary::Periodic, Boundary::Symmetric}) {
            CHECK(convolve(img, k, b).data == reference::convolve(img, k, b).data);
        }
        CHECK(bilateral(img, 2.0, 0.1, 4).data ==
              reference::bilateral(img, 2.0, 0.1, 4).data);
        CHECK(guided(img, 2, 0.01).data == reference::guided(img, 2, 0.01).data);
        CHECK(median_filter(img, 2).data ==
              reference::median_filter(img, 2).data);
    }
}

TEST_CASE("filters preserve constant images") {
    const Image c = Image::constant(16, 16, 1, 0.4);
    const double tol = 1e-12;

    CHECK(max_abs_diff(convolve(c, gaussian_kernel(2.0, 13), Boundary::Periodic),
                       c) < tol);
    CHECK(max_abs_diff(convolve(c, box_kernel(2), Boundary::Symmetric), c) < tol);
    CHECK(max_abs_diff(bilateral(c, 3.0, 0.1, 6), c) < tol);
    CHECK(max_abs_diff(guided(c, 2, 0.01), c) < tol);
    CHECK(median_filter(c, 1).data == c.data);
    CHECK(max_abs_diff(unsharp(c, 0.5, 2.0), c) < 1e-11);
    CHECK(max_abs_diff(down_up(c, 2, Resampler::Box, Resampler::Bicubic), c) <
          tol);
}

TEST_CASE("median of a small patch is the exact order statistic") {
    // 3x3 image, radius 1, symmetric padding: the center output is the
    // median of all nine values.
    Image img(3, 3, 1);
    const double vals[9] = {0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6};
    for (int i = 0; i < 9; ++i) img.data[i] = vals[i];
    const Image out = median_filter(img, 1);
    CHECK(out.at(1, 1) == 0.5);
}

TEST_CASE("bilateral reduces to gaussian blur for flat range weights") {
    // With a huge range sigma every neighbor gets full range weight and the
    // filter degenerates to a (truncated, renormalized) spatial Gaussian.
    const Image img = desk_image(16, 3);
    const int radius = 7;
    const Image bi = bilateral(img, 2.0, 1e6, radius);

    Kernel g(2 * radius + 1, 2 * radius + 1);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const double dy = y - radius, dx = x - radius;
            g.at(y, x) = std::exp(-(dy * dy + dx * dx) / (2.0 * 2.0 * 2.0));
        }
    }
    const Image blur = convolve(img, g.normalized(), Boundary::Symmetric);
    CHECK(max_abs_diff(bi, blur) < 1e-9);
}

TEST_CASE("guided filter with zero eps reproduces the input away from noise") {
    // eps -> 0 makes a = 1, b = 0 wherever the local variance is nonzero.
    const Image img = desk_image(24, 4);
    const Image out = guided(img, 2, 1e-12);
    CHECK(max_abs_diff(out, img) < 1e-6);
}

TEST_CASE("unsharp equals its composite convolution kernel") {
    const Image img = desk_image(32, 6);
    const UnsharpMask u{0.7, 2.0};
    const Image direct = unsharp(img, u.lambda, u.sigma);

    const auto k = kernel_for(FilterSpec{u}, 32, 32);
    REQUIRE(k.has_value());
    const Image via_kernel = convolve(img, *k, Boundary::Periodic);
    CHECK(max_abs_diff(direct, via_kernel) < 1e-10);
}

TEST_CASE("box downsample averages blocks; upsamplers invert constants") {
    Image img(4, 4, 1);
    for (int i = 0; i < 16; ++i) img.data[i] = i / 16.0;
    const Image down = box_downsample(img, 2);
    REQUIRE(down.height == 2);
    CHECK(down.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 64.0));
    CHECK(down.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 64.0));

    CHECK_THROWS_AS((void)box_downsample(Image(5, 4, 1), 2), ParamError);

    for (Resampler r : {Resampler::Box, Resampler::Bilinear, Resampler::Bicubic}) {
        const Image c = Image::constant(3, 3, 1, 0.37);
        const Image up = upsample(c, 3, r);
        REQUIRE(up.height == 9);
        CHECK(max_abs_diff(up, Image::constant(9, 9, 1, 0.37)) < 1e-12);
    }
}

TEST_CASE("kernel_for covers exactly the linear convolutional specs") {
    CHECK(kernel_for(FilterSpec{GaussianConv{2.0, 21}}, 64, 64).has_value());
    CHECK(kernel_for(FilterSpec{BoxConv{2}}, 64, 64).has_value());
    CHECK(kernel_for(FilterSpec{DiskConv{3.0}}, 64, 64).has_value());
    CHECK(kernel_for(FilterSpec{Identity{}}, 64, 64).has_value());
    CHECK_FALSE(kernel_for(FilterSpec{Median{2}}, 64, 64).has_value());
    CHECK_FALSE(kernel_for(FilterSpec{Gamma{2.2}}, 64, 64).has_value());
    CHECK_FALSE(kernel_for(FilterSpec{Bilateral{}}, 64, 64).has_value());
    CHECK_FALSE(kernel_for(FilterSpec{DownUp{2}}, 64, 64).has_value());

    // Auto support is capped so the kernel always fits the grid.
    const auto big = kernel_for(FilterSpec{GaussianConv{10.0}}, 32, 32);
    REQUIRE(big.has_value());
    CHECK(big->height <= 31);
}

TEST_CASE("spec string parsing: canonical forms") {
    CHECK(std::holds_alternative<Identity>(parse_filter_spec("identity")));

    const auto g = std::get<GaussianConv>(
        parse_filter_spec("gaussian:sigma=1.5,support=9,boundary=symmetric"));
    CHECK(g.sigma == 1.5);
    CHECK(g.support == 9);
    CHECK(g.boundary == Boundary::Symmetric);

    const auto b = std::get<BoxConv>(parse_filter_spec("box:radius=3"));
    CHECK(b.radius == 3);
    CHECK(b.boundary == Boundary::Periodic);

    const auto bi = std::get<Bilateral>(
        parse_filter_spec("bilateral:sigma_s=2,sigma_r=0.2,radius=5"));
    CHECK(bi.sigma_s == 2.0);
    CHECK(bi.sigma_r == 0.2);
    CHECK(bi.radius == 5);

    const auto du =
        std::get<DownUp>(parse_filter_spec("downup:scale=4,up=bilinear"));
    CHECK(du.scale == 4);
    CHECK(du.up == Resampler::Bilinear);
    CHECK(du.down == Resampler::Box);

    CHECK(std::holds_alternative<Median>(parse_filter_spec("median:radius=2")));
    CHECK(std::holds_alternative<Gamma>(parse_filter_spec("gamma:gamma=2.2")));
    CHECK(std::holds_alternative<UnsharpMask>(
        parse_filter_spec("unsharp:lambda=0.5,sigma=2")));
    CHECK(std::holds_alternative<Guided>(
        parse_filter_spec("guided:radius=2,eps=0.01")));
}

TEST_CASE("spec string parsing: malformed input reports position") {
    CHECK_THROWS_AS((void)parse_filter_spec(""), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("nosuchfilter"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:sigma"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:sigma=abc"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:nosuchkey=1"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:sigma=-1"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("box:radius=0"), ParamError);
    CHECK_THROWS_AS((void)parse_filter_spec("gaussian:boundary=torus"),
                    ParamError);

    try {
        (void)parse_filter_spec("gaussian:sigma=abc");
        FAIL("expected ParamError");
    } catch (const ParamError& e) {
        // The message points at where parsing stopped.
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

TEST_CASE("external filter: well-behaved command round-trips the image") {
    Image img = test_support::random_image(9, 6, 1, 55);
    for (auto& v : img.data) v = static_cast<float>(v);

    External spec;
    spec.command_template = "cp {IN} {OUT}";
    const Image out = external_filter(spec, img);
    CHECK(out.data == img.data);
}

TEST_CASE("external filter failures carry diagnostics") {
    const Image img = Image::constant(4, 4, 1, 0.5);

    SUBCASE("nonzero exit with stderr") {
        External spec;
        spec.command_template = "echo boom >&2; false # {IN} {OUT}";
        try {
            (void)external_filter(spec, img);
            FAIL("expected FilterError");
        } catch (const FilterError& e) {
            CHECK(e.stderr_output().find("boom") != std::string::npos);
        }
    }

    SUBCASE("missing output file") {
        External spec;
        spec.command_template = "true # {IN} {OUT}";
        CHECK_THROWS_AS((void)external_filter(spec, img), FilterError);
    }

    SUBCASE("timeout kills the command") {
        External spec;
        spec.command_template = "sleep 5; cp {IN} {OUT}";
        spec.timeout_seconds = 0.2;
        CHECK_THROWS_AS((void)external_filter(spec, img), FilterError);
    }

    SUBCASE("template must mention both placeholders") {
        External spec;
        spec.command_template = "cat {IN}";
        CHECK_THROWS_AS(validate_spec(FilterSpec{spec}), ParamError);
    }
}

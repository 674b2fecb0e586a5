#include <cmath>

#include "doctest.h"
#include "vidprog/core/error.hpp"
#include "vidprog/core/rng.hpp"
#include "vidprog/evalmetrics/metrics.hpp"

using namespace vidprog;
using namespace vidprog::metrics;

TEST_CASE("velocity error") {
  CHECK(velocity_error({{0.1, 0.12, 0.14}}, {{0.1, 0.12, 0.14}}, 0) == 0.0);
  CHECK(velocity_error({{0.10, 0.12, 0.14}}, {{0.10, 0.13, 0.16}}, 0) == doctest::Approx(0.01));
  // Only t > F counts.
  CHECK(velocity_error({{0.5, 0.10, 0.12, 0.14}}, {{0.0, 0.10, 0.13, 0.16}}, 1) ==
        doctest::Approx(0.01));
  // Averaged over balls.
  CHECK(velocity_error({{0.1, 0.2}, {0.5, 0.5}}, {{0.1, 0.2}, {0.5, 0.54}}, 0) ==
        doctest::Approx(0.02));
  CHECK_THROWS_AS(velocity_error({{0.1, 0.2}}, {{0.1, 0.2, 0.3}}, 0), Error);
  CHECK_THROWS_AS(velocity_error({{0.1, 0.2}}, {{0.1, 0.2}, {0.3, 0.4}}, 0), Error);
  CHECK_THROWS_AS(velocity_error({{0.1, 0.2}}, {{0.1, 0.2}}, 1), Error);

  SplitMix64 rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p(8), q(8);
    for (auto& v : p) v = rng.uniform();
    for (auto& v : q) v = rng.uniform();
    const double c = rng.uniform(-1, 1);
    auto ps = p, qs = q;
    for (auto& v : ps) v += c;
    for (auto& v : qs) v += c;
    CHECK(velocity_error({ps}, {qs}, 2) == doctest::Approx(velocity_error({p}, {q}, 2)));
  }
}

TEST_CASE("mae and psnr on normalized values") {
  const std::vector<double> a(300, 0.5), b(300, 0.6);
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(a, b) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(mae(a, b) == mae(b, a));
  CHECK(psnr(a, b) == psnr(b, a));
  double last = kPsnrCap + 1;
  for (double m : {1e-9, 1e-6, 1e-3, 0.01, 0.1, 1.0}) {
    CHECK(psnr_from_mse(m) < last);
    last = psnr_from_mse(m);
  }
  CHECK_THROWS_AS(mae(a, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("frame metrics") {
  const std::vector<Frame> a{Frame(6, 4, Rgb{0, 0, 0}), Frame(6, 4, Rgb{10, 20, 30})};
  const std::vector<Frame> b{Frame(6, 4, Rgb{51, 51, 51}), Frame(6, 4, Rgb{61, 71, 81})};
  CHECK(mae(a, a) == 0.0);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(mae(a, b) == doctest::Approx(0.2));
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(1.0 / 0.04)));
  CHECK(mae(b, a) == mae(a, b));
  CHECK_THROWS_AS(mae(a, {a[0]}), Error);
  CHECK_THROWS_AS(psnr({Frame(6, 4)}, {Frame(4, 6)}), Error);
}

TEST_CASE("metric rows") {
  const std::vector<MetricRow> rows{{"phyworld-uniform", "iid", "velocity_error", 0.0123, 20},
                                    {"cartpole", "test", "psnr", 31.5, 10}};
  CHECK(rows_from_json(to_json(rows)) == rows);
  CHECK(to_json(rows[0]).find("\"n_videos\":20") != std::string::npos);
  CHECK_THROWS_AS(rows_from_json("[{\"env\": 1}]"), Error);
}

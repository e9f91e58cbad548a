#include "doctest.h"

#include "coda/trend.hpp"

using namespace coda;

namespace {

GridSpec make_spec(int ncols, int nrows, double cell = 10.0) {
  GridSpec s;
  s.ncols = ncols;
  s.nrows = nrows;
  s.cellsize_x = s.cellsize_y = cell;
  return s;
}

}  // namespace

TEST_CASE("ols matches a frozen least-squares solution") {
  const GridSpec s = make_spec(4, 4);
  ScalarField x(s), y(s);
  const double noise[16] = {0.05, -0.02, 0.03, 0.01, -0.04, 0.02, 0.0, -0.01,
                            0.03, -0.03, 0.02, 0.04, -0.05, 0.01, -0.02, 0.0};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      x.at(r, c) = c;
      y.at(r, c) = 2.0 + 0.5 * c + noise[r * 4 + c];
    }
  }
  const TrendFit fit = fit_ols({y}, {x}, {"covar"});
  REQUIRE(fit.model.components.size() == 1);
  const auto& comp = fit.model.components[0];
  CHECK(comp.beta[0] == doctest::Approx(1.9950000000000012).epsilon(1e-10));
  CHECK(comp.beta[1] == doctest::Approx(0.5049999999999994).epsilon(1e-10));
  CHECK(comp.r2 == doctest::Approx(0.9976137852797935).epsilon(1e-9));
  CHECK(comp.pearson == doctest::Approx(0.9988061800368442).epsilon(1e-9));
  CHECK(fit.model.covariate_names.size() == 2);
  CHECK(fit.model.covariate_names[0] == "intercept");
  CHECK(fit.model.covariate_names[1] == "covar");

  // residuals are observed minus fitted
  CHECK(fit.residuals[0].at(0, 0) ==
        doctest::Approx(y.at(0, 0) - comp.beta[0]).epsilon(1e-10));
}

TEST_CASE("ols reproduces an exact linear relationship") {
  const GridSpec s = make_spec(6, 5);
  ScalarField a(s), b(s), y1(s), y2(s);
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      a.at(r, c) = 0.3 * r - 0.1 * c;
      b.at(r, c) = r * c * 0.05 + 1.0;
      y1.at(r, c) = 4.0 - 2.0 * a.at(r, c) + 3.0 * b.at(r, c);
      y2.at(r, c) = -1.0 + 0.5 * a.at(r, c);
    }
  }
  const TrendFit fit = fit_ols({y1, y2}, {a, b}, {"a", "b"});
  CHECK(fit.model.components[0].beta[0] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(fit.model.components[0].beta[1] == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(fit.model.components[0].beta[2] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fit.model.components[1].beta[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.model.components[1].beta[2] == doctest::Approx(0.0).epsilon(1e-9));
  for (int r = 0; r < s.nrows; ++r)
    for (int c = 0; c < s.ncols; ++c)
      CHECK(std::abs(fit.residuals[0].at(r, c)) < 1e-9);

  // predict_trend reproduces the fitted surface on any grid
  const auto pred = predict_trend(fit.model, {a, b}, s);
  CHECK(pred[0].at(2, 3) == doctest::Approx(y1.at(2, 3)).epsilon(1e-9));
}

TEST_CASE("ols skips nodata pixels") {
  const GridSpec s = make_spec(5, 5);
  ScalarField x(s), y(s);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      x.at(r, c) = r + c;
      y.at(r, c) = 1.0 + 2.0 * (r + c);
    }
  }
  y.at(2, 2) = 1e9;   // poison a pixel, then mark it nodata
  y.set_nodata(2, 2);
  x.set_nodata(4, 4);
  const TrendFit fit = fit_ols({y}, {x});
  CHECK(fit.model.components[0].beta[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.model.components[0].beta[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.residuals[0].is_nodata(2, 2));
  CHECK(fit.residuals[0].is_nodata(4, 4));
}

TEST_CASE("ols rejects collinear covariates naming them") {
  const GridSpec s = make_spec(4, 4);
  ScalarField a(s), b(s), y(s);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      a.at(r, c) = r + 2.0 * c;
      b.at(r, c) = 2.0 * a.at(r, c);
      y.at(r, c) = a.at(r, c) + 1.0;
    }
  }
  try {
    fit_ols({y}, {a, b}, {"first", "second"});
    FAIL("expected rank-deficiency error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("second") != std::string::npos);
  }
}

TEST_CASE("intercept-only fit is the mean") {
  const GridSpec s = make_spec(3, 3);
  ScalarField y(s);
  double sum = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      y.at(r, c) = r * 3 + c;
      sum += y.at(r, c);
    }
  const TrendFit fit = fit_ols({y}, {});
  CHECK(fit.model.components[0].beta[0] == doctest::Approx(sum / 9).epsilon(1e-12));
}

TEST_CASE("trend model text roundtrip") {
  const GridSpec s = make_spec(4, 4);
  ScalarField x(s), y(s);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      x.at(r, c) = c * 1.5;
      y.at(r, c) = 0.25 - 1.75 * x.at(r, c) + 0.01 * r;
    }
  const TrendFit fit = fit_ols({y}, {x}, {"dtm"});
  const TrendModel back = TrendModel::from_text(fit.model.to_text());
  CHECK(back.covariate_names == fit.model.covariate_names);
  CHECK(back.intercept == fit.model.intercept);
  REQUIRE(back.components.size() == 1);
  CHECK(back.components[0].beta[0] == fit.model.components[0].beta[0]);
  CHECK(back.components[0].beta[1] == fit.model.components[0].beta[1]);
  CHECK(back.components[0].r2 == doctest::Approx(fit.model.components[0].r2));
}

TEST_CASE("upscale_covariates takes block means") {
  const GridSpec fine = make_spec(4, 4);
  ScalarField x(fine);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) x.at(r, c) = r * 4 + c;
  const CoarseFineMap map = CoarseFineMap::build(fine, 2);
  const auto up = upscale_covariates({x}, map);
  REQUIRE(up.size() == 1);
  CHECK(up[0].at(0, 0) == doctest::Approx(2.5));
  CHECK(up[0].at(1, 1) == doctest::Approx(12.5));
}

// Copyright 2026 The sslsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sslsv/common.hpp"
#include "sslsv/gradcheck.hpp"
#include "sslsv/losses.hpp"
#include "testing_util.hpp"

using namespace sslsv;
using testing::random_tensor;

namespace {

Tensor2 rows(std::initializer_list<std::initializer_list<double>> values) {
  Tensor2 t(values.size(), values.begin()->size());
  size_t i = 0;
  for (const auto& row : values) {
    size_t j = 0;
    for (double v : row) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

}  // namespace

TEST_CASE("info_nce identity pair at tau 0.07") {
  const Tensor2 a = rows({{1.0, 0.0}, {0.0, 1.0}});
  const InfoNceConfig cfg;
  const LossOutput out = info_nce(a, a, cfg);
  // Per row: -1/tau + log(e^{1/tau} + e^0) = log(1 + e^{-1/tau})
  const double expected = std::log1p(std::exp(-1.0 / 0.07));
  CHECK(out.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(out.value == doctest::Approx(6.2e-7).epsilon(0.01));
}

TEST_CASE("info_nce rejects degenerate batches") {
  const InfoNceConfig cfg;
  const Tensor2 one = rows({{1.0, 0.0}});
  CHECK_THROWS_AS(info_nce(one, one, cfg), Error);  // no negatives with N=1
  Tensor2 with_zero = rows({{1.0, 0.0}, {0.0, 0.0}});
  CHECK_THROWS_WITH_AS(info_nce(with_zero, with_zero, cfg),
                       doctest::Contains("all-zero"), Error);
}

TEST_CASE("info_nce gradient matches finite differences tightly") {
  Rng rng(31);
  for (auto denom : {InfoNceConfig::Denominator::kCrossView,
                     InfoNceConfig::Denominator::kLiteralWithinView}) {
    InfoNceConfig cfg;
    cfg.denominator = denom;
    Tensor2 a = random_tensor(8, 16, rng);
    Tensor2 b = random_tensor(8, 16, rng);
    const LossOutput out = info_nce(a, b, cfg);
    auto f = [&]() { return info_nce(a, b, cfg).value; };
    CHECK(finite_diff_max_err(f, a.data.data(), out.grad_a.data.data(),
                              a.data.size()) < 1e-6);
    CHECK(finite_diff_max_err(f, b.data.data(), out.grad_b.data.data(),
                              b.data.size()) < 1e-6);
  }
}

TEST_CASE("info_nce is permutation equivariant") {
  Rng rng(37);
  const Tensor2 a = random_tensor(6, 8, rng);
  const Tensor2 b = random_tensor(6, 8, rng);
  const InfoNceConfig cfg;
  const double base = info_nce(a, b, cfg).value;

  const size_t perm[6] = {3, 0, 5, 1, 4, 2};
  Tensor2 pa(6, 8), pb(6, 8);
  for (size_t i = 0; i < 6; ++i) {
    std::copy(a.row(perm[i]), a.row(perm[i]) + 8, pa.row(i));
    std::copy(b.row(perm[i]), b.row(perm[i]) + 8, pb.row(i));
  }
  CHECK(info_nce(pa, pb, cfg).value == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("barlow twins on the orthogonal design is zero") {
  const Tensor2 a = rows({{1, 1}, {-1, 1}, {1, -1}, {-1, -1}});
  const BarlowConfig cfg;
  const LossOutput out = barlow_twins(a, a, cfg);
  CHECK(std::fabs(out.value) < 1e-12);
  REQUIRE(out.correlation.has_value());
  CHECK(out.correlation->at(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::fabs(out.correlation->at(0, 1)) < 1e-12);
}

TEST_CASE("self-pair barlow reduces to the redundancy term") {
  Rng rng(41);
  const Tensor2 a = random_tensor(8, 6, rng);
  const BarlowConfig cfg;
  const LossOutput out = barlow_twins(a, a, cfg);
  REQUIRE(out.terms.size() == 2);
  CHECK(out.terms[0].name == "invariance");
  CHECK(out.terms[0].value < 1e-10);  // C_ii == 1 up to eps_std
  CHECK(out.value == doctest::Approx(cfg.lambda * out.terms[1].value).epsilon(1e-8));
}

TEST_CASE("barlow twins is invariant to per-dimension affine maps") {
  Rng rng(43);
  const Tensor2 a = random_tensor(10, 5, rng);
  const Tensor2 b = random_tensor(10, 5, rng);
  const BarlowConfig cfg;
  const double base = barlow_twins(a, b, cfg).value;

  Tensor2 scaled = a;
  for (size_t j = 0; j < scaled.cols; ++j) {
    const double s = 0.5 + static_cast<double>(j);
    const double t = static_cast<double>(j) - 2.0;
    for (size_t i = 0; i < scaled.rows; ++i) {
      scaled.at(i, j) = s * a.at(i, j) + t;
    }
  }
  CHECK(barlow_twins(scaled, b, cfg).value == doctest::Approx(base).epsilon(1e-7));
}

TEST_CASE("vicreg variance term") {
  SUBCASE("collapsed batch hits the hinge fully") {
    Tensor2 a(4, 3);
    for (size_t i = 0; i < 4; ++i) {
      a.at(i, 0) = 0.3;
      a.at(i, 1) = -1.2;
      a.at(i, 2) = 5.0;
    }
    CHECK(vicreg_variance(a, 1e-4, nullptr) ==
          doctest::Approx(1.0 - 0.01).epsilon(1e-12));
  }
  SUBCASE("spread batch has zero value and zero gradient") {
    Rng rng(47);
    Tensor2 a = random_tensor(6, 4, rng, 3.0);  // std well above 1
    Tensor2 grad(6, 4);
    const double v = vicreg_variance(a, 1e-4, &grad);
    CHECK(v == 0.0);
    for (double g : grad.data) CHECK(g == 0.0);
  }
}

TEST_CASE("vicreg invariance term") {
  Rng rng(53);
  const Tensor2 a = random_tensor(5, 4, rng);
  SUBCASE("identical views vanish") {
    Tensor2 ga(5, 4), gb(5, 4);
    CHECK(vicreg_invariance(a, a, &ga, &gb) == 0.0);
    for (double g : ga.data) CHECK(g == 0.0);
    for (double g : gb.data) CHECK(g == 0.0);
  }
  SUBCASE("single-row squared distance") {
    const Tensor2 x = rows({{0.0, 0.0}});
    const Tensor2 y = rows({{3.0, 4.0}});
    CHECK(vicreg_invariance(x, y, nullptr, nullptr) == doctest::Approx(25.0));
  }
}

TEST_CASE("vicreg covariance term") {
  SUBCASE("decorrelated symmetric design is zero") {
    const Tensor2 a = rows({{1, 1}, {-1, 1}, {1, -1}, {-1, -1}});
    CHECK(vicreg_covariance(a, nullptr) == doctest::Approx(0.0));
  }
  SUBCASE("hand-computed two-row case") {
    const Tensor2 a = rows({{1, 1}, {-1, -1}});
    Tensor2 cov;
    const double c = vicreg_covariance(a, nullptr, 1.0, &cov);
    CHECK(c == doctest::Approx(4.0));
    CHECK(cov.at(0, 0) == doctest::Approx(2.0));
    CHECK(cov.at(0, 1) == doctest::Approx(2.0));
  }
}

TEST_CASE("vicreg composition") {
  const VicregWeights w;
  SUBCASE("collapsed identical batches cost two variance hinges") {
    Tensor2 a(4, 3);
    for (size_t i = 0; i < 4; ++i) {
      a.at(i, 0) = 0.1;
      a.at(i, 1) = 0.2;
      a.at(i, 2) = 0.3;
    }
    const LossOutput out = vicreg(a, a, w);
    CHECK(out.value == doctest::Approx(2.0 * (1.0 - 0.01)).epsilon(1e-10));
  }
  SUBCASE("nu enters linearly, mirroring the coefficient ablation") {
    Rng rng(59);
    const Tensor2 a = random_tensor(6, 5, rng);
    const Tensor2 b = random_tensor(6, 5, rng);
    VicregWeights no_cov = w;
    no_cov.nu = 0.0;
    const double with_cov = vicreg(a, b, w).value;
    const double without = vicreg(a, b, no_cov).value;
    const double ca = vicreg_covariance(a, nullptr);
    const double cb = vicreg_covariance(b, nullptr);
    CHECK(with_cov - without == doctest::Approx(0.04 * (ca + cb)).epsilon(1e-12));
  }
  SUBCASE("translation invariance") {
    Rng rng(61);
    const Tensor2 a = random_tensor(6, 5, rng);
    const Tensor2 b = random_tensor(6, 5, rng);
    const double base = vicreg(a, b, w).value;
    Tensor2 a2 = a, b2 = b;
    for (size_t i = 0; i < a2.rows; ++i) {
      for (size_t j = 0; j < a2.cols; ++j) {
        a2.at(i, j) += 3.25;  // same shift applied to both views
        b2.at(i, j) += 3.25;
      }
    }
    CHECK(vicreg(a2, b2, w).value == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("composites are exact sums of their stages") {
  Rng rng(67);
  const Tensor2 y = random_tensor(6, 5, rng);
  const Tensor2 yp = random_tensor(6, 5, rng);
  const Tensor2 z = random_tensor(6, 9, rng);
  const Tensor2 zp = random_tensor(6, 9, rng);
  CompositeConfig cfg;

  SUBCASE("comp1 = vicreg(Y) + infonce(Z)") {
    const CompositeOutput out = comp1(y, yp, z, zp, cfg);
    const LossOutput vic = vicreg(y, yp, cfg.vicreg);
    const LossOutput nce = info_nce(z, zp, cfg.infonce);
    CHECK(out.value == vic.value + nce.value);  // exact: same additions
    CHECK(out.grad_y.data == vic.grad_a.data);
    CHECK(out.grad_yp.data == vic.grad_b.data);
    CHECK(out.grad_z.data == nce.grad_a.data);
    CHECK(out.grad_zp.data == nce.grad_b.data);
  }
  SUBCASE("comp2 = infonce(Y) + vicreg(Z)") {
    const CompositeOutput out = comp2(y, yp, z, zp, cfg);
    const LossOutput nce = info_nce(y, yp, cfg.infonce);
    const LossOutput vic = vicreg(z, zp, cfg.vicreg);
    CHECK(out.value == nce.value + vic.value);
    CHECK(out.grad_y.data == nce.grad_a.data);
    CHECK(out.grad_z.data == vic.grad_a.data);
  }
  SUBCASE("reg loss additivity and the alpha = 0 reduction") {
    const LossOutput reg = reg_infonce_vicreg(y, yp, cfg);
    const LossOutput nce = info_nce(y, yp, cfg.infonce);
    const LossOutput vic = vicreg(y, yp, cfg.vicreg);
    CHECK(reg.value == doctest::Approx(nce.value + 0.1 * vic.value).epsilon(1e-14));

    CompositeConfig zero = cfg;
    zero.alpha = 0.0;
    const LossOutput pure = reg_infonce_vicreg(y, yp, zero);
    CHECK(pure.value == nce.value);            // bit-exact
    CHECK(pure.grad_a.data == nce.grad_a.data);
    CHECK(pure.grad_b.data == nce.grad_b.data);
  }
}

TEST_CASE("diagnostic terms reproduce the total") {
  Rng rng(71);
  const Tensor2 a = random_tensor(8, 6, rng);
  const Tensor2 b = random_tensor(8, 6, rng);
  const CompositeConfig cfg;

  const LossOutput v = vicreg(a, b, cfg.vicreg);
  CHECK(std::fabs(v.terms_total() - v.value) < 1e-10);
  const LossOutput bt = barlow_twins(a, b, BarlowConfig{});
  CHECK(std::fabs(bt.terms_total() - bt.value) < 1e-10);
  const LossOutput nce = info_nce(a, b, cfg.infonce);
  CHECK(std::fabs(nce.terms_total() - nce.value) < 1e-10);
  const LossOutput reg = reg_infonce_vicreg(a, b, cfg);
  CHECK(std::fabs(reg.terms_total() - reg.value) < 1e-10);
  const CompositeOutput c2 = comp2(a, b, a, b, cfg);
  CHECK(std::fabs(c2.terms_total() - c2.value) < 1e-10);
}

TEST_CASE("every loss descends under a small gradient step on its inputs") {
  Rng rng(73);
  const CompositeConfig cfg;
  const double step = 1e-3;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor2 a = random_tensor(6, 8, rng);
    Tensor2 b = random_tensor(6, 8, rng);
    // keep clear of the variance hinge kink
    for (double& v : a.data) v *= 2.0;
    for (double& v : b.data) v *= 2.0;

    auto descend = [&](auto&& loss_fn) {
      const LossOutput out = loss_fn(a, b);
      Tensor2 a2 = a, b2 = b;
      add_inplace(a2, out.grad_a, -step);
      add_inplace(b2, out.grad_b, -step);
      const LossOutput after = loss_fn(a2, b2);
      CHECK(after.value < out.value);
    };
    descend([&](const Tensor2& x, const Tensor2& y) { return info_nce(x, y, cfg.infonce); });
    descend([&](const Tensor2& x, const Tensor2& y) { return barlow_twins(x, y, BarlowConfig{}); });
    descend([&](const Tensor2& x, const Tensor2& y) { return vicreg(x, y, cfg.vicreg); });
    descend([&](const Tensor2& x, const Tensor2& y) { return reg_infonce_vicreg(x, y, cfg); });
  }
}

TEST_CASE("batch-statistic losses reject N < 2") {
  const Tensor2 one = rows({{1.0, 2.0}});
  CHECK_THROWS_AS(barlow_twins(one, one, BarlowConfig{}), Error);
  CHECK_THROWS_AS(vicreg_variance(one, 1e-4, nullptr), Error);
  CHECK_THROWS_AS(vicreg_covariance(one, nullptr), Error);
  CHECK_THROWS_AS(vicreg(one, one, VicregWeights{}), Error);
}

TEST_CASE("gradcheck suite covers all losses at both contract sizes") {
  const auto results = run_gradcheck(2026);
  size_t loss_checks = 0;
  for (const auto& r : results) {
    if (r.name.find("[N=") != std::string::npos) {
      ++loss_checks;
      CAPTURE(r.name);
      CHECK(r.pass);
    }
  }
  CHECK(loss_checks >= 20);
}

#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "swcrt/correlation.hpp"
#include "swcrt/errors.hpp"
#include "swcrt/rng.hpp"

using namespace swcrt;

namespace {
const double kPiSq3 = 3.289868133696;
}

TEST_CASE("ar1 matrix entries and eigenvalues") {
  const Eigen::MatrixXd z = ar1_matrix(0.8, 3);
  CHECK(z(0, 0) == doctest::Approx(1.0));
  CHECK(z(0, 1) == doctest::Approx(0.8));
  CHECK(z(0, 2) == doctest::Approx(0.64));
  CHECK(z(2, 1) == doctest::Approx(0.8));

  CHECK((ar1_matrix(0.0, 3) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  // 2x2 eigenvalues are 1 +/- rho
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ar1_matrix(0.8, 2));
  CHECK(eig.eigenvalues()(0) == doctest::Approx(0.2));
  CHECK(eig.eigenvalues()(1) == doctest::Approx(1.8));

  CHECK_THROWS_AS(ar1_matrix(1.0, 3), InvalidParameter);
  CHECK_THROWS_AS(ar1_matrix(-0.1, 3), InvalidParameter);
}

TEST_CASE("random effect covariance blocks") {
  const Design design = build_standard_design(4, 3, 2);

  RandomStructure exch{RandomKind::exch, 0.42, 0, 0, 0, 0};
  const RandomEffectModel m_exch = random_effect_covariance(exch, design, 1);
  CHECK(m_exch.dim() == 1);
  CHECK(m_exch.cov(0, 0) == doctest::Approx(0.1764));
  CHECK(m_exch.loading(2, 1)(0) == 1.0);

  RandomStructure ed;
  ed.kind = RandomKind::ed;
  ed.sigma_gamma = 0.23;
  ed.rho = 0.8;
  const Design design2 = build_standard_design(2, 3, 2);
  const RandomEffectModel m_ed = random_effect_covariance(ed, design2, 1);
  CHECK(m_ed.cov(0, 0) == doctest::Approx(0.0529));
  CHECK(m_ed.cov(0, 1) == doctest::Approx(0.04232));
  CHECK(m_ed.loading(2, 0)(1) == 1.0);

  RandomStructure ne_ri;
  ne_ri.kind = RandomKind::ne_ri;
  ne_ri.sigma_u = 0.37;
  ne_ri.sigma_v = 0.19;
  ne_ri.sigma_t = 0.2;
  const RandomEffectModel m_ri = random_effect_covariance(ne_ri, design2, 1);
  CHECK(m_ri.dim() == 5);  // u, v_1..v_3, t for 3 periods
  CHECK(m_ri.cov(0, 0) == doctest::Approx(0.1369));
  CHECK(m_ri.cov(1, 1) == doctest::Approx(0.0361));
  CHECK(m_ri.cov(2, 2) == doctest::Approx(0.0361));
  CHECK(m_ri.cov(4, 4) == doctest::Approx(0.04));
  CHECK(m_ri.loading(2, 1)(4) == 1.0);
  CHECK(m_ri.loading(2, 0)(4) == 0.0);
}

TEST_CASE("icc summaries match the closed forms") {
  RandomStructure exch{RandomKind::exch, 0.42, 0, 0, 0, 0};
  const IccSummary icc_exch = icc_summary(exch, kPiSq3);
  CHECK(icc_exch.wp_icc == doctest::Approx(0.1764 / (0.1764 + kPiSq3)).epsilon(1e-10));
  CHECK(icc_exch.wp_icc == doctest::Approx(0.0509).epsilon(2e-3));
  CHECK(icc_exch.cac == doctest::Approx(1.0));

  RandomStructure ne{RandomKind::ne, 0.37, 0.19, 0, 0, 0};
  const IccSummary icc_ne = icc_summary(ne, kPiSq3);
  CHECK(icc_ne.wp_icc == doctest::Approx(0.04996).epsilon(1e-3));
  CHECK(icc_ne.bp_icc(1) == doctest::Approx(0.03953).epsilon(1e-3));
  CHECK(icc_ne.cac == doctest::Approx(0.7913).epsilon(1e-3));
  CHECK(icc_ne.bp_icc(3) == doctest::Approx(icc_ne.bp_icc(1)));

  RandomStructure ed;
  ed.kind = RandomKind::ed;
  ed.sigma_gamma = 0.10;
  ed.rho = 0.8;
  const IccSummary icc_ed = icc_summary(ed, 1.0);
  CHECK(icc_ed.wp_icc == doctest::Approx(0.01 / 1.01).epsilon(1e-10));
  CHECK(icc_ed.bp_icc(2) == doctest::Approx(0.01 / 1.01 * 0.64).epsilon(1e-10));

  RandomStructure ri;
  ri.kind = RandomKind::ne_ri;
  ri.sigma_u = 0.37;
  ri.sigma_v = 0.19;
  ri.sigma_t = 0.2;
  CHECK_THROWS_AS(icc_summary(ri, kPiSq3), Unsupported);
}

TEST_CASE("cac stays inside [0,1] and hits 1 exactly when sigma_v is zero") {
  RngStream stream(5, "cac", 0);
  for (int trial = 0; trial < 50; ++trial) {
    RandomStructure ne;
    ne.kind = RandomKind::ne;
    ne.sigma_u = stream.next_uniform();
    ne.sigma_v = trial % 5 == 0 ? 0.0 : stream.next_uniform();
    const IccSummary icc = icc_summary(ne, 0.5 + stream.next_uniform());
    CHECK(icc.cac >= 0.0);
    CHECK(icc.cac <= 1.0);
    if (ne.sigma_v == 0.0)
      CHECK(icc.cac == doctest::Approx(1.0).epsilon(1e-12));
    else
      CHECK(icc.cac < 1.0);
  }
}

TEST_CASE("implied marginal covariance is positive semidefinite") {
  const Design design = build_standard_design(6, 4, 3);
  RngStream stream(11, "psd", 0);
  for (int trial = 0; trial < 40; ++trial) {
    RandomStructure structure;
    const int kind = trial % 5;
    structure.kind = static_cast<RandomKind>(kind);
    structure.sigma_u = stream.next_uniform();
    structure.sigma_v = stream.next_uniform();
    structure.sigma_gamma = stream.next_uniform();
    structure.rho = 0.98 * stream.next_uniform();
    structure.sigma_t = stream.next_uniform();
    const RandomEffectModel model = random_effect_covariance(structure, design, 1);
    // two observations per cluster-period, residual variance appended
    const int j = design.periods;
    Eigen::MatrixXd loads(2 * j, model.dim());
    for (int period = 1; period <= j; ++period) {
      const Eigen::RowVectorXd z = model.loading(period, period >= 3 ? 1 : 0);
      loads.row(2 * (period - 1)) = z;
      loads.row(2 * (period - 1) + 1) = z;
    }
    Eigen::MatrixXd v = loads * model.cov * loads.transpose();
    v.diagonal().array() += 0.3;
    const Eigen::LLT<Eigen::MatrixXd> llt(v);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("exponential decay approaches exchangeable as rho tends to 1") {
  const Design design = build_standard_design(3, 4, 2);
  RandomStructure ed;
  ed.kind = RandomKind::ed;
  ed.sigma_gamma = 0.42;
  ed.rho = 1.0 - 1e-6;
  RandomStructure exch{RandomKind::exch, 0.42, 0, 0, 0, 0};
  const RandomEffectModel m_ed = random_effect_covariance(ed, design, 1);
  const RandomEffectModel m_exch = random_effect_covariance(exch, design, 1);
  const int j = design.periods;
  Eigen::MatrixXd v_ed(j, j), v_exch(j, j);
  for (int a = 1; a <= j; ++a)
    for (int b = 1; b <= j; ++b) {
      v_ed(a - 1, b - 1) = m_ed.loading(a, 0) * m_ed.cov * m_ed.loading(b, 0).transpose();
      v_exch(a - 1, b - 1) = m_exch.loading(a, 0) * m_exch.cov * m_exch.loading(b, 0).transpose();
    }
  CHECK((v_ed - v_exch).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("working structures expose group layouts") {
  const WorkingStructure exch = make_working_structure(RandomKind::exch, 5);
  CHECK(exch.dim == 1);
  CHECK(exch.groups == 1);

  const WorkingStructure ne = make_working_structure(RandomKind::ne, 5);
  CHECK(ne.dim == 6);
  CHECK(ne.groups == 2);
  CHECK(ne.loading(3, 0)(0) == 1.0);
  CHECK(ne.loading(3, 0)(3) == 1.0);

  const WorkingStructure ne_ri = make_working_structure(RandomKind::ne_ri, 5);
  CHECK(ne_ri.dim == 7);
  CHECK(ne_ri.loading(2, 1)(6) == 1.0);
  const Eigen::VectorXd diag = ne_ri.cov_diagonal({0.25, 0.04, 0.01});
  CHECK(diag(0) == doctest::Approx(0.25));
  CHECK(diag(3) == doctest::Approx(0.04));
  CHECK(diag(6) == doctest::Approx(0.01));

  CHECK_THROWS_AS(make_working_structure(RandomKind::ed, 5), InvalidParameter);
}

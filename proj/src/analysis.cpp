// Copyright 2026 The rsoc Authors
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

#include "rsoc/analysis.hpp"

#include <cmath>
#include <string>

#include "rsoc/contact.hpp"
#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

constexpr double kMaxTaskCondition = 1e12;

double Ratio(double kp, double kd) { return kd > 0.0 ? kp / kd : kInfiniteRatio; }

}  // namespace

double FrobeniusNorm(const MatrixXd& M) {
  return std::sqrt((M * M.transpose()).trace());
}

GainDecomposition SplitGains(const MatrixXd& K, const StateSpace& space) {
  const int n = space.tangent_dim();
  if (n % 2 != 0) {
    throw ContractViolation("SplitGains: tangent dimension " +
                            std::to_string(n) + " is odd");
  }
  if (K.cols() != n) {
    throw ContractViolation("SplitGains: gain has " + std::to_string(K.cols()) +
                            " columns, expected " + std::to_string(n));
  }
  GainDecomposition out;
  out.Kp = K.leftCols(n / 2);
  out.Kd = K.rightCols(n / 2);
  out.kp_norm = FrobeniusNorm(out.Kp);
  out.kd_norm = FrobeniusNorm(out.Kd);
  out.ratio = Ratio(out.kp_norm, out.kd_norm);
  return out;
}

GainDecomposition SplitGainsOrWhole(const MatrixXd& K, const StateSpace& space) {
  if (space.tangent_dim() % 2 == 0) return SplitGains(K, space);
  if (K.cols() != space.tangent_dim()) {
    throw ContractViolation("SplitGainsOrWhole: gain has wrong column count");
  }
  GainDecomposition g;
  g.Kp = K;
  g.Kd = MatrixXd(K.rows(), 0);
  g.kp_norm = FrobeniusNorm(K);
  g.ratio = Ratio(g.kp_norm, g.kd_norm);
  return g;
}

GainSchedule GainNorms(const Policy& policy, const StateSpace& space) {
  GainSchedule out;
  for (const PolicyStep& s : policy.steps) {
    const GainDecomposition g = SplitGainsOrWhole(s.K, space);
    out.kp_norm.push_back(g.kp_norm);
    out.kd_norm.push_back(g.kd_norm);
    out.ratio.push_back(g.ratio);
  }
  return out;
}

EndEffectorImpedance EeImpedance(const MatrixXd& M, const MatrixXd& J,
                                 const MatrixXd& S, const MatrixXd& Kq,
                                 const MatrixXd& Kdq) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n || J.cols() != n || S.cols() != n ||
      Kq.rows() != S.rows() || Kq.cols() != n || Kdq.rows() != S.rows() ||
      Kdq.cols() != n) {
    throw ContractViolation("EeImpedance: dimension mismatch");
  }
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("EeImpedance: mass matrix not positive definite");
  }
  const MatrixXd minv_jt = llt.solve(J.transpose());
  const MatrixXd task_inv = Symmetrize(J * minv_jt);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(task_inv, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxTaskCondition) {
    throw SingularConfiguration("EeImpedance: foot Jacobian is rank deficient");
  }
  EndEffectorImpedance out;
  out.Lambda = Symmetrize(task_inv.inverse());
  // Lambda J M^-1 = (M^-1 J')' premultiplied by Lambda.
  const MatrixXd map = out.Lambda * minv_jt.transpose() * S.transpose();
  const MatrixXd pinv = Pseudoinverse(J);
  out.Kp = map * Kq * pinv;
  out.Kd = map * Kdq * pinv;
  return out;
}

EndEffectorImpedance EeImpedance(const PlanarChain& chain, const VectorXd& q,
                                 const VectorXd& v, const MatrixXd& Kq,
                                 const MatrixXd& Kdq) {
  const ChainTerms<double> terms = ChainDynamics(chain, q, v);
  return EeImpedance(terms.M, terms.J, ActuationMatrix(chain), Kq, Kdq);
}

std::vector<std::string> MetricTable::Columns(int num_feet) {
  std::vector<std::string> cols = {"time", "dq_norm", "dv_norm"};
  for (int f = 0; f < num_feet; ++f) {
    cols.push_back("force_normal" + std::to_string(f));
  }
  cols.insert(cols.end(), {"kp_norm", "kd_norm", "kp_kd_ratio"});
  return cols;
}

void MetricTable::WriteCsv(std::ostream& out) const {
  const int nf = force_normal.empty()
                     ? 0
                     : static_cast<int>(force_normal[0].size());
  const std::vector<std::string> cols = Columns(nf);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < time.size(); ++r) {
    out << time[r] << ',' << dq_norm[r] << ',' << dv_norm[r];
    for (int f = 0; f < nf; ++f) out << ',' << force_normal[r][f];
    out << ',' << kp_norm[r] << ',' << kd_norm[r] << ',';
    if (std::isinf(ratio[r])) {
      out << "inf";
    } else {
      out << ratio[r];
    }
    out << '\n';
  }
}

int PeakIndex(const std::vector<double>& series) {
  int best = -1;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (best < 0 || series[i] > series[best]) best = static_cast<int>(i);
  }
  return best;
}

MetricTable Metrics(const Trace& trace, const StateSpace& space,
                    const ClosedLoopPlan& plan) {
  const int n = space.tangent_dim();
  // Odd tangents have no velocity half; the whole error is configuration.
  const int half = n % 2 == 0 ? n / 2 : n;
  MetricTable out;
  for (int r = 0; r < trace.rows(); ++r) {
    const PlanSample ref = SamplePlan(space, plan, trace.time[r]);
    const Tangent err = space.Difference(trace.x[r], ref.x);
    out.time.push_back(trace.time[r]);
    out.dq_norm.push_back(err.head(half).norm());
    out.dv_norm.push_back(err.tail(n - half).norm());
    out.force_normal.push_back(trace.force_normal[r]);
    out.kp_norm.push_back(trace.kp_norm[r]);
    out.kd_norm.push_back(trace.kd_norm[r]);
    out.ratio.push_back(Ratio(trace.kp_norm[r], trace.kd_norm[r]));
    for (int f = 0; f < trace.force_normal[r].size(); ++f) {
      if (trace.force_normal[r][f] > out.peak_force) {
        out.peak_force = trace.force_normal[r][f];
        out.peak_index = r;
        out.peak_foot = f;
      }
    }
  }
  if (!out.time.empty()) {
    out.terminal_position_error = out.dq_norm.back();
    out.terminal_velocity_error = out.dv_norm.back();
  }
  return out;
}

}  // namespace rsoc

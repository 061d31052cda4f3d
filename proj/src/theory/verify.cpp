#include <dprune/theory/flow.hpp>
#include <dprune/theory/verify.hpp>

#include <json.hpp>

#include <fstream>
#include <iomanip>

namespace dprune {

DeviationReport verify_dp(const ParamVector& sgd_end, const ParamVector& grda_end, double lambda,
                          const PruneScore& sc) {
  require_same_dim(sgd_end.size(), grda_end.size(), "verify_dp");
  require_same_dim(sgd_end.size(), sc.s.size(), "verify_dp score");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("verify_dp: lambda must be finite and >= 0");
  DeviationReport r;
  r.lambda = lambda;
  r.predicted = dp_solve(sgd_end, lambda, sc.s);
  r.residual = grda_end - r.predicted;
  r.residual_inf = r.residual.size() ? r.residual.cwiseAbs().maxCoeff() : 0.0;
  r.residual_l2 = r.residual.norm();
  r.sgd_inf_norm = sgd_end.size() ? sgd_end.cwiseAbs().maxCoeff() : 0.0;
  Index match = 0;
  for (Index j = 0; j < sgd_end.size(); ++j) {
    if ((grda_end(j) == 0.0) == (r.predicted(j) == 0.0)) ++match;
  }
  r.support_match_fraction = sgd_end.size() ? static_cast<double>(match) / static_cast<double>(sgd_end.size()) : 1.0;
  return r;
}

DeviationReport verify_dp(const ParamVector& sgd_end, const ParamVector& grda_end, double c, double mu,
                          double gamma, double t, const PruneScore& sc) {
  auto r = verify_dp(sgd_end, grda_end, lambda_at(c, gamma, t, mu), sc);
  r.gamma = gamma;
  r.t = t;
  return r;
}

std::string deviation_report_json(const DeviationReport& r) {
  nlohmann::ordered_json j;
  j["gamma"] = r.gamma;
  j["t"] = r.t;
  j["lambda"] = r.lambda;
  j["residual_inf"] = r.residual_inf;
  j["residual_l2"] = r.residual_l2;
  j["support_match_fraction"] = r.support_match_fraction;
  j["sgd_inf_norm"] = r.sgd_inf_norm;
  j["per_coordinate"] = r.per_coordinate_path;
  return j.dump(2);
}

void write_per_coordinate_csv(DeviationReport& r, const ParamVector& sgd_end, const ParamVector& grda_end,
                              const std::string& csv_path) {
  std::ofstream os(csv_path);
  if (!os) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
  os << "index,w_sgd,w_grda,predicted,residual\n" << std::setprecision(17);
  for (Index j = 0; j < sgd_end.size(); ++j) {
    os << j << ',' << sgd_end(j) << ',' << grda_end(j) << ',' << r.predicted(j) << ',' << r.residual(j) << '\n';
  }
  r.per_coordinate_path = csv_path;
}

}  // namespace dprune

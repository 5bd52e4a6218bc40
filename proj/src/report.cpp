#include "logdyn/report.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

namespace logdyn {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string emit_report(const MechanicsSummary& summary,
                        std::optional<std::span<const StepMechanics>> per_step,
                        ReportFormat format) {
  if (format == ReportFormat::SummaryJson) {
    nlohmann::json j = nlohmann::json::object();
    j["n_steps"] = summary.n_steps;
    j["n_trajectories"] = summary.n_trajectories;
    j["mean_logE"] = summary.mean_logE;
    j["global_cv"] = summary.global_cv;
    j["avg_traj_cv"] = summary.avg_traj_cv;
    j["kv_ratio"] = summary.kv_ratio;
    j["mean_drift"] = summary.mean_drift;
    j["mean_abs_jump"] = summary.mean_abs_jump;
    j["drift_ratio"] = summary.drift_ratio;
    j["mean_entropy"] = summary.mean_entropy ? nlohmann::json(*summary.mean_entropy)
                                             : nlohmann::json(nullptr);
    return j.dump(2) + "\n";
  }

  std::string out = "t,K,V,L,H,E\n";
  if (per_step) {
    for (const auto& m : *per_step) {
      out += std::to_string(m.t);
      for (double v : {m.kinetic, m.potential, m.lagrangian, m.log_energy, m.energy}) {
        out += ',';
        out += format_real(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string emit_step_index_csv(std::span<const StepIndexStat> stats) {
  std::string out = "index,n,mean_H,cv_H\n";
  for (const auto& s : stats)
    out += std::to_string(s.index) + ',' + std::to_string(s.n) + ',' +
           format_real(s.mean_H) + ',' + format_real(s.cv_H) + '\n';
  return out;
}

}  // namespace logdyn

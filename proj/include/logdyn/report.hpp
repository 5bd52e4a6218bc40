#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logdyn/mechanics.hpp"

namespace logdyn {

enum class ReportFormat { SummaryJson, PerStepCsv };

/// Deterministic text. Reals use the shortest representation that
/// round-trips, so emitted values equal the in-memory doubles exactly.
std::string emit_report(const MechanicsSummary& summary,
                        std::optional<std::span<const StepMechanics>> per_step,
                        ReportFormat format);

/// CSV with columns index,n,mean_H,cv_H.
std::string emit_step_index_csv(std::span<const StepIndexStat> stats);

std::string format_real(double x);

}  // namespace logdyn

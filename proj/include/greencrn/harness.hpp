#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "greencrn/config.hpp"
#include "greencrn/policy.hpp"
#include "greencrn/simulator.hpp"

namespace greencrn {

/// Runs task(i) for i in [0, n) on up to `workers` threads. Results land in
/// index order, so the output never depends on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, const std::function<T(std::size_t)>& task);

/// cfg.seed, cfg.seed + 1, ... (cfg.seeds entries).
std::vector<std::uint64_t> seed_list(const ScenarioConfig& cfg);

const std::vector<PolicyKind>& all_policies();

struct SummaryRow {
    std::string policy;
    MetricsRecord mean;
    MetricsRecord stddev;
    std::vector<MetricsRecord> runs; // one per seed, seed order
};

struct CompareResult {
    std::vector<SummaryRow> rows; // requested policy order
    std::vector<std::uint64_t> seeds;
};

/// Evaluates each policy on the same seeds (common random numbers).
CompareResult run_compare(const ScenarioConfig& cfg, const std::vector<PolicyKind>& policies,
                          std::shared_ptr<const PolicyParams> params, std::size_t workers);

void write_summary_csv(std::ostream& os, const CompareResult& res);
void write_summary_table(std::ostream& os, const CompareResult& res);
void write_crn_csv(std::ostream& os, const CompareResult& res);

struct DensityRow {
    std::string policy;
    std::size_t n_su = 0;
    MetricsRecord mean;
};

std::vector<DensityRow> sweep_density(const ScenarioConfig& cfg, const std::vector<std::size_t>& su_counts,
                                      std::shared_ptr<const PolicyParams> params, std::size_t workers);
void write_density_csv(std::ostream& os, const std::vector<DensityRow>& rows);

struct BudgetRow {
    std::string policy;
    double budget_j = 0.0;
    double throughput_bits = 0.0;
};

std::vector<BudgetRow> sweep_energy_budget(const ScenarioConfig& cfg, const std::vector<double>& budgets_j,
                                           std::shared_ptr<const PolicyParams> params, std::size_t workers);
void write_budget_csv(std::ostream& os, const std::vector<BudgetRow>& rows);

struct AblationResult {
    MetricsRecord full;
    MetricsRecord no_ris;
    MetricsRecord no_eh;
    double pdr_target = 0.0;
    double k_full = 1.0;   // smallest power multiplier keeping the target PDR, surface on
    double k_no_ris = 1.0; // same with the surface removed
    MetricsRecord full_at_k;
    MetricsRecord no_ris_at_k;
    double power_delta_pct = 0.0; // extra mean transmit power without the surface
    double grid_delta_pct = 0.0;  // extra grid energy without harvesting
    bool power_ok = false;        // >= 5 %
    bool grid_ok = false;         // >= 10 %
};

/// full / no_ris / no_eh on common random numbers, plus the power-multiplier
/// search for equal delivery ratio.
AblationResult ablate(const ScenarioConfig& cfg, std::shared_ptr<const PolicyParams> params, std::size_t workers);
void write_ablation_csv(std::ostream& os, const AblationResult& res);

struct TimingRow {
    std::string policy;
    double decision_ms_per_slot = 0.0;
    double ga_ms_per_evolve = 0.0;
    double ga_amortized_ms_per_slot = 0.0;
};

std::vector<TimingRow> report_timing(const ScenarioConfig& cfg, std::shared_ptr<const PolicyParams> params);
void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

struct RocRow {
    double threshold = 0.0;
    double p_fa_emp = 0.0;
    double p_d_emp = 0.0;
    double p_fa_ana = 0.0;
    double p_d_ana = 0.0;
};

/// Empirical ROC of each controller's sensing log next to the analytic
/// single-detector curve, one table per policy.
std::vector<std::vector<RocRow>> roc_study(const ScenarioConfig& cfg, const std::vector<PolicyKind>& policies,
                                           std::shared_ptr<const PolicyParams> params, std::size_t workers);
void write_roc_csv(std::ostream& os, const std::vector<RocRow>& rows);

/// Loads `path` if it exists and fits `cfg`; otherwise trains from scratch and,
/// when `save` is set, writes the result to `path`.
std::shared_ptr<const PolicyParams> obtain_policy(const ScenarioConfig& cfg, const std::filesystem::path& path,
                                                  bool save, std::ostream* log);

} // namespace greencrn

#include "greencrn/harness_impl.hpp"

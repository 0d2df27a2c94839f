#pragma once

#include "greencrn/rng.hpp"

namespace greencrn {

/// Per-SU energy flows for one slot, all in joules.
struct EnergyLedger {
    double e_tx = 0.0;
    double e_rx = 0.0;
    double e_sense = 0.0;
    double e_harv = 0.0;

    double consumed() const { return e_tx + e_rx + e_sense; }
};

struct Battery {
    double level = 0.0;
    double capacity = 1.0;
    double grid_draw_total = 0.0;
};

struct HarvestModel {
    double ambient_power_w = 0.0;
    double eff_min = 0.2;
    double eff_max = 0.5;
    double slot_s = 1e-3;

    void validate() const;
};

/// Net slot energy E_tx + E_rx + E_sense - E_harv. Negative when harvesting
/// exceeds consumption.
double slot_energy(const EnergyLedger& ledger);

/// eff * ambient * slot with eff uniform on [eff_min, eff_max]. Consumes one
/// uniform draw.
double harvest_sample(const HarvestModel& model, Rng& rng);

/// Result of one battery step, with the per-slot flows that produced it.
struct BatteryStep {
    Battery battery;
    double grid_draw = 0.0;
    double overflow = 0.0;
};

/// Nets the slot's harvest against its consumption. A deficit below empty is
/// supplied by the grid; charge above capacity is discarded.
BatteryStep battery_step(const Battery& batt, double consumed, double harvested);

inline Battery battery_update(const Battery& batt, double consumed, double harvested)
{
    return battery_step(batt, consumed, harvested).battery;
}

/// Delivered bits per joule. Throws std::invalid_argument for non-positive energy.
double energy_efficiency(double total_bits, double total_energy_j);

struct EfficiencyReport {
    double bits_per_joule = 0.0;
    bool gross_fallback = false;
};

/// Delivered bits per joule of net energy; when the net total is not positive the
/// ratio is taken against gross consumption instead and flagged. Zero gross
/// consumption reports zero.
EfficiencyReport efficiency_with_fallback(double total_bits, double net_energy_j, double gross_energy_j);

/// p_tx * tx_fraction * slot.
double tx_energy(double p_tx, double tx_fraction, double slot_s);

} // namespace greencrn

#include "greencrn/energy.hpp"

#include <algorithm>
#include <stdexcept>

namespace greencrn {

void HarvestModel::validate() const
{
    if (!(eff_min >= 0.0 && eff_min <= eff_max && eff_max <= 1.0)) {
        throw std::invalid_argument("harvest efficiency bounds must satisfy 0 <= min <= max <= 1");
    }
    if (ambient_power_w < 0.0 || !(slot_s > 0.0)) {
        throw std::invalid_argument("harvest model needs non-negative ambient power and positive slot");
    }
}

double slot_energy(const EnergyLedger& ledger)
{
    return ledger.e_tx + ledger.e_rx + ledger.e_sense - ledger.e_harv;
}

double harvest_sample(const HarvestModel& model, Rng& rng)
{
    const double u = rng.uniform();
    const double eff = model.eff_min + (model.eff_max - model.eff_min) * u;
    return eff * model.ambient_power_w * model.slot_s;
}

BatteryStep battery_step(const Battery& batt, double consumed, double harvested)
{
    if (consumed < 0.0 || harvested < 0.0) {
        throw std::invalid_argument("battery flows must be non-negative");
    }
    BatteryStep step;
    step.battery = batt;
    const double available = batt.level + harvested;
    double level = available - consumed;
    if (level < 0.0) {
        step.grid_draw = -level;
        level = 0.0;
    }
    if (level > batt.capacity) {
        step.overflow = level - batt.capacity;
        level = batt.capacity;
    }
    step.battery.level = level;
    step.battery.grid_draw_total += step.grid_draw;
    return step;
}

double energy_efficiency(double total_bits, double total_energy_j)
{
    if (!(total_energy_j > 0.0)) {
        throw std::invalid_argument("energy efficiency needs positive total energy");
    }
    return total_bits / total_energy_j;
}

EfficiencyReport efficiency_with_fallback(double total_bits, double net_energy_j, double gross_energy_j)
{
    if (net_energy_j > 0.0) {
        return {energy_efficiency(total_bits, net_energy_j), false};
    }
    if (gross_energy_j > 0.0) {
        return {energy_efficiency(total_bits, gross_energy_j), true};
    }
    return {0.0, true};
}

double tx_energy(double p_tx, double tx_fraction, double slot_s)
{
    if (tx_fraction < 0.0 || tx_fraction > 1.0) {
        throw std::invalid_argument("transmit fraction must lie in [0, 1]");
    }
    return p_tx * tx_fraction * slot_s;
}

} // namespace greencrn

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace greencrn {

/// Head order shared by the policy network, the genome encoding and the
/// checkpoint header.
enum Head : std::size_t { SensePeriod = 0, Channel, Power, Slice, Codeword, HeadCount };

/// Indices into the five action grids.
using ActionIndex = std::array<std::size_t, HeadCount>;

/// Discretized action space.
struct ActionGrid {
    std::vector<int> sense_periods{1, 2, 4, 8};
    std::size_t channels = 20;
    std::vector<double> ptx_levels;
    std::vector<double> slices{0.25, 0.5, 0.75, 1.0};
    std::size_t codewords = 32;

    /// Evenly spaced power levels over [p_min, p_max].
    static std::vector<double> power_levels(double p_min, double p_max, std::size_t count);

    std::array<std::size_t, HeadCount> cardinalities() const;
    bool contains(const ActionIndex& idx) const;
    ActionIndex clamp(const std::array<long, HeadCount>& raw) const;
    std::size_t nearest_power(double p_tx) const;
    std::size_t nearest_slice(double fraction) const;
};

/// A decoded controller decision. `transmit == false` means the SU defers this
/// slot (it still follows `sense_period`).
struct Action {
    int sense_period = 1;
    std::size_t channel = 0;
    double p_tx = 1.0;
    double slice = 1.0;
    std::size_t codeword = 0;
    bool transmit = false;
};

Action decode(const ActionGrid& grid, const ActionIndex& idx, bool transmit = true);

/// Grid position of an action; power and slice snap to the nearest level.
ActionIndex encode(const ActionGrid& grid, const Action& action);

} // namespace greencrn

#include "greencrn/action.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greencrn {

std::vector<double> ActionGrid::power_levels(double p_min, double p_max, std::size_t count)
{
    if (count < 1 || !(p_min > 0.0) || p_max < p_min) {
        throw std::invalid_argument("power grid needs count >= 1 and 0 < p_min <= p_max");
    }
    if (count == 1) {
        return {p_max};
    }
    std::vector<double> levels(count);
    for (std::size_t i = 0; i < count; ++i) {
        levels[i] = p_min + (p_max - p_min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    levels.back() = p_max;
    return levels;
}

std::array<std::size_t, HeadCount> ActionGrid::cardinalities() const
{
    return {sense_periods.size(), channels, ptx_levels.size(), slices.size(), codewords};
}

bool ActionGrid::contains(const ActionIndex& idx) const
{
    const auto card = cardinalities();
    for (std::size_t h = 0; h < HeadCount; ++h) {
        if (idx[h] >= card[h]) {
            return false;
        }
    }
    return true;
}

ActionIndex ActionGrid::clamp(const std::array<long, HeadCount>& raw) const
{
    const auto card = cardinalities();
    ActionIndex out{};
    for (std::size_t h = 0; h < HeadCount; ++h) {
        out[h] = static_cast<std::size_t>(std::clamp<long>(raw[h], 0, static_cast<long>(card[h]) - 1));
    }
    return out;
}

namespace {

std::size_t nearest(const std::vector<double>& levels, double x)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (std::abs(levels[i] - x) < std::abs(levels[best] - x)) {
            best = i;
        }
    }
    return best;
}

} // namespace

std::size_t ActionGrid::nearest_power(double p_tx) const { return nearest(ptx_levels, p_tx); }

std::size_t ActionGrid::nearest_slice(double fraction) const { return nearest(slices, fraction); }

Action decode(const ActionGrid& grid, const ActionIndex& idx, bool transmit)
{
    if (!grid.contains(idx)) {
        throw std::out_of_range("action index outside its grid");
    }
    Action a;
    a.sense_period = grid.sense_periods[idx[SensePeriod]];
    a.channel = idx[Channel];
    a.p_tx = grid.ptx_levels[idx[Power]];
    a.slice = grid.slices[idx[Slice]];
    a.codeword = idx[Codeword];
    a.transmit = transmit;
    return a;
}

ActionIndex encode(const ActionGrid& grid, const Action& action)
{
    ActionIndex idx{};
    const auto it = std::find(grid.sense_periods.begin(), grid.sense_periods.end(), action.sense_period);
    idx[SensePeriod] = it == grid.sense_periods.end()
                           ? 0
                           : static_cast<std::size_t>(it - grid.sense_periods.begin());
    idx[Channel] = action.channel;
    idx[Power] = grid.nearest_power(action.p_tx);
    idx[Slice] = grid.nearest_slice(action.slice);
    idx[Codeword] = action.codeword;
    return idx;
}

} // namespace greencrn

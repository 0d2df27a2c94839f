#include "greencrn/channel_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace greencrn {

void RisLink::validate() const
{
    if (h_br.size() != h_rs.size()) {
        throw std::invalid_argument("RIS link: h_br and h_rs must have the same length");
    }
}

double pathloss_db(double distance_m, double carrier_ghz)
{
    if (!(distance_m > 0.0) || !(carrier_ghz > 0.0)) {
        throw std::invalid_argument("pathloss needs positive distance and carrier frequency");
    }
    return 28.0 + 22.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_ghz);
}

cplx sample_rayleigh(Rng& rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

RisLink sample_ris_link(std::size_t m_elements, double element_gain, Rng& rng)
{
    RisLink link;
    link.h_d = sample_rayleigh(rng);
    const double hop = std::pow(element_gain, 0.25);
    link.h_br.resize(m_elements);
    link.h_rs.resize(m_elements);
    for (std::size_t m = 0; m < m_elements; ++m) {
        link.h_br[m] = hop * sample_rayleigh(rng);
        link.h_rs[m] = hop * sample_rayleigh(rng);
    }
    return link;
}

cplx effective_channel(const RisLink& link, std::span<const double> phases)
{
    link.validate();
    if (phases.size() != link.elements()) {
        throw std::invalid_argument("phase vector length must match the number of RIS elements");
    }
    cplx h = link.h_d;
    for (std::size_t m = 0; m < phases.size(); ++m) {
        h += link.h_rs[m] * std::polar(1.0, phases[m]) * link.h_br[m];
    }
    return h;
}

double snr_linear(cplx h_eff, const LinkBudget& budget)
{
    if (!(budget.bandwidth_hz > 0.0)) {
        throw std::invalid_argument("SNR needs a positive bandwidth");
    }
    const double gain = db_to_linear(-pathloss_db(budget.distance_m, budget.carrier_ghz));
    return snr_from_gain(h_eff, budget.p_tx, gain, budget.noise_psd, budget.bandwidth_hz);
}

double rate_bits_per_slot(double snr, double bandwidth_hz, double slot_s)
{
    if (snr < 0.0) {
        throw std::invalid_argument("SNR must be non-negative");
    }
    return bandwidth_hz * slot_s * std::log2(1.0 + snr);
}

PhaseCodebook build_codebook(std::size_t m_elements, std::size_t size)
{
    if (size < 1) {
        throw std::invalid_argument("codebook needs at least one codeword");
    }
    constexpr double quarter = std::numbers::pi / 2.0;
    PhaseCodebook book;
    book.codewords.resize(size);
    for (std::size_t k = 0; k < size; ++k) {
        auto& word = book.codewords[k];
        word.resize(m_elements);
        for (std::size_t m = 0; m < m_elements; ++m) {
            // round(4 k m / size) in exact integer arithmetic, then wrap to 2 bits
            const std::size_t q = ((8 * k * m + size) / (2 * size)) % 4;
            word[m] = static_cast<double>(q) * quarter;
        }
    }
    return book;
}

std::vector<cplx> cascade_sums(const RisLink& link, const PhaseCodebook& book)
{
    link.validate();
    const std::size_t m_elements = link.elements();
    std::vector<cplx> sums(book.size(), cplx{});
    if (m_elements == 0) {
        return sums;
    }
    if (book.elements() != m_elements) {
        throw std::invalid_argument("codebook length does not match the RIS element count");
    }
    // 2-bit phases only rotate by multiples of j, so avoid trig in the hot loop.
    std::vector<cplx> cascade(m_elements);
    for (std::size_t m = 0; m < m_elements; ++m) {
        cascade[m] = link.h_rs[m] * link.h_br[m];
    }
    constexpr double quarter = std::numbers::pi / 2.0;
    for (std::size_t k = 0; k < book.size(); ++k) {
        cplx acc{};
        const auto& word = book.codewords[k];
        for (std::size_t m = 0; m < m_elements; ++m) {
            const double steps = word[m] / quarter;
            const long q = std::lround(steps);
            if (std::abs(steps - static_cast<double>(q)) < 1e-12) {
                const cplx c = cascade[m];
                switch (((q % 4) + 4) % 4) {
                case 0: acc += c; break;
                case 1: acc += cplx{-c.imag(), c.real()}; break;
                case 2: acc -= c; break;
                default: acc += cplx{c.imag(), -c.real()}; break;
                }
            } else {
                acc += cascade[m] * std::polar(1.0, word[m]);
            }
        }
        sums[k] = acc;
    }
    return sums;
}

CodewordChoice select_codeword(const RisLink& link, const PhaseCodebook& book, const LinkBudget& budget,
                               std::span<const RisLink> pu_links, double interference_cap_w)
{
    if (book.size() == 0) {
        throw std::invalid_argument("codebook is empty");
    }
    const auto own = cascade_sums(link, book);
    std::vector<std::vector<cplx>> pu_sums;
    pu_sums.reserve(pu_links.size());
    for (const auto& pu : pu_links) {
        pu_sums.push_back(cascade_sums(pu, book));
    }

    CodewordChoice best{0, false, -1.0};
    CodewordChoice fallback{0, false, 0.0};
    double fallback_power = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < book.size(); ++k) {
        double worst = 0.0;
        for (std::size_t p = 0; p < pu_links.size(); ++p) {
            worst = std::max(worst, budget.p_tx * std::norm(pu_links[p].h_d + pu_sums[p][k]));
        }
        const double snr = snr_linear(link.h_d + own[k], budget);
        if (worst <= interference_cap_w) {
            if (!best.feasible || snr > best.snr) {
                best = {k, true, snr};
            }
        } else if (worst < fallback_power) {
            fallback_power = worst;
            fallback = {k, false, snr};
        }
    }
    return best.feasible ? best : fallback;
}

} // namespace greencrn

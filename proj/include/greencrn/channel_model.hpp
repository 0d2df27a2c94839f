#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "greencrn/rng.hpp"

namespace greencrn {

using cplx = std::complex<double>;

/// Single-antenna link assisted by an M-element reflecting surface. An empty
/// cascade (M = 0) means no surface is present.
struct RisLink {
    cplx h_d{};
    std::vector<cplx> h_br;
    std::vector<cplx> h_rs;

    std::size_t elements() const { return h_br.size(); }
    void validate() const;
};

struct PhaseCodebook {
    std::vector<std::vector<double>> codewords;

    std::size_t size() const { return codewords.size(); }
    std::size_t elements() const { return codewords.empty() ? 0 : codewords.front().size(); }
};

struct LinkBudget {
    double distance_m = 100.0;
    double carrier_ghz = 3.5;
    double noise_psd = 1e-16; // W/Hz
    double p_tx = 1.0;        // W
    double bandwidth_hz = 1e6;
};

/// Urban-macro line-of-sight form: 28 + 22 log10(d) + 20 log10(f_GHz).
double pathloss_db(double distance_m, double carrier_ghz);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Unit-power circularly-symmetric complex Gaussian.
cplx sample_rayleigh(Rng& rng);

/// Draws a link whose cascade elements each have power sqrt(element_gain) per
/// hop, so E|h_rs[m] h_br[m]|^2 = element_gain.
RisLink sample_ris_link(std::size_t m_elements, double element_gain, Rng& rng);

/// h_d + sum_m h_rs[m] e^{j theta_m} h_br[m].
cplx effective_channel(const RisLink& link, std::span<const double> phases);

/// p_tx |h_eff|^2 10^(-PL/10) / (N0 B).
double snr_linear(cplx h_eff, const LinkBudget& budget);

/// Same as snr_linear with the pathloss already expressed as a linear gain.
inline double snr_from_gain(cplx h_eff, double p_tx, double path_gain, double noise_psd, double bandwidth_hz)
{
    return p_tx * std::norm(h_eff) * path_gain / (noise_psd * bandwidth_hz);
}

/// Shannon bits in one slot: B * slot * log2(1 + snr).
double rate_bits_per_slot(double snr, double bandwidth_hz, double slot_s);

/// DFT-style phase ramps quantized to 2-bit phases {0, pi/2, pi, 3pi/2}.
PhaseCodebook build_codebook(std::size_t m_elements, std::size_t size);

/// Reflected contribution sum_m h_rs[m] e^{j theta_m} h_br[m] for every codeword.
std::vector<cplx> cascade_sums(const RisLink& link, const PhaseCodebook& book);

struct CodewordChoice {
    std::size_t index = 0;
    bool feasible = true;
    double snr = 0.0;
};

/// Exhaustive O(|Q|) scan: the codeword maximizing SU SNR among those keeping
/// every PU link's received power p_tx |h_eff|^2 at or below interference_cap_w
/// (PU links carry their large-scale loss inside the coefficients). If none is
/// feasible, returns the codeword with the smallest worst-case PU power and
/// clears `feasible`. Ties go to the lowest index.
CodewordChoice select_codeword(const RisLink& link, const PhaseCodebook& book, const LinkBudget& budget,
                               std::span<const RisLink> pu_links, double interference_cap_w);

} // namespace greencrn

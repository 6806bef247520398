#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace amc {

// Symbol alphabet for one modulation scheme. Constellations are normalized
// to unit average power: mean of |c|^2 over the points is 1.
struct ModulationScheme {
    std::string name;
    std::vector<std::complex<double>> constellation;
    int samples_per_symbol = 8;
};

// One received signal as two real sequences (in-phase and quadrature).
struct IQFrame {
    std::vector<double> i;
    std::vector<double> q;

    std::size_t size() const { return i.size(); }
};

// Simplified channel: flat unit gain, optional carrier frequency offset and
// phase rotation, complex AWGN calibrated against the measured clean power.
struct ChannelConfig {
    double snr_db = 10.0;
    bool noise_free = false;  // bypasses noise entirely (snr -> infinity)
    double cfo_norm = 0.0;    // cycles per sample, |cfo_norm| < 0.5
    double phase_rad = 0.0;
    bool random_phase = false;  // draw phase uniformly in [0, 2*pi)
    std::uint64_t seed = 0;
};

struct Example {
    IQFrame frame;
    int label = 0;
    double snr_db = 0.0;
};

// Labeled, SNR-tagged examples with a deterministic stratified split.
struct Dataset {
    std::vector<Example> examples;
    int num_classes = 0;
    int frame_len = 0;
    std::vector<std::uint32_t> train_indices;
    std::vector<std::uint32_t> test_indices;
    std::uint64_t seed = 0;
};

// Built-in palette: OOK, 4ASK, BPSK, QPSK, 8PSK, 16QAM, 64QAM, FM-like-tone.
// Throws std::invalid_argument for unknown names.
ModulationScheme constellation(const std::string& scheme_name,
                               int samples_per_symbol = 8);

// Uniformly drawn symbols, each held for samples_per_symbol samples
// (rectangular pulse). N must be divisible by samples_per_symbol.
IQFrame gen_clean_frame(const ModulationScheme& scheme, int n,
                        std::uint64_t rng_seed);

// x = s * e^{j(2*pi*cfo*t + phase)} + n with per-complex-sample noise
// variance N0 = P_signal / 10^(snr_db/10), P_signal measured from the input.
IQFrame apply_channel(const IQFrame& frame, const ChannelConfig& cfg);

// One example per (scheme, snr, repetition); labels follow scheme order;
// 75/25 split stratified per (scheme, snr) cell. Per-frame randomness is
// derived from seed ^ frame_index.
Dataset build_dataset(const std::vector<std::string>& schemes,
                      const std::vector<double>& snr_list, int frames_per_cell,
                      int n, std::uint64_t seed, int samples_per_symbol = 8);

// AMCD binary format, little-endian, all floats IEEE 754 binary64.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Flattens a frame to the classifier input layout [i..., q...], length 2N.
std::vector<double> flatten(const IQFrame& frame);

double mean_power(const IQFrame& frame);

}  // namespace amc

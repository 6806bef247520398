#include "amc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "amc/rng.hpp"

namespace amc {

namespace {

std::vector<std::complex<double>> normalize_unit_power(
    std::vector<std::complex<double>> pts) {
    double p = 0.0;
    for (const auto& c : pts) p += std::norm(c);
    p /= static_cast<double>(pts.size());
    const double scale = 1.0 / std::sqrt(p);
    for (auto& c : pts) c *= scale;
    return pts;
}

std::vector<std::complex<double>> square_qam(int per_axis) {
    std::vector<std::complex<double>> pts;
    for (int a = 0; a < per_axis; ++a) {
        for (int b = 0; b < per_axis; ++b) {
            pts.emplace_back(2 * a - per_axis + 1, 2 * b - per_axis + 1);
        }
    }
    return normalize_unit_power(std::move(pts));
}

std::vector<std::complex<double>> psk_ring(int order) {
    std::vector<std::complex<double>> pts;
    for (int k = 0; k < order; ++k) {
        const double ang = 2.0 * M_PI * k / order;
        pts.emplace_back(std::cos(ang), std::sin(ang));
    }
    return pts;
}

}  // namespace

ModulationScheme constellation(const std::string& scheme_name,
                               int samples_per_symbol) {
    if (samples_per_symbol <= 0) {
        throw std::invalid_argument("samples_per_symbol must be positive");
    }
    ModulationScheme s;
    s.name = scheme_name;
    s.samples_per_symbol = samples_per_symbol;
    if (scheme_name == "OOK") {
        s.constellation = normalize_unit_power({{0.0, 0.0}, {1.0, 0.0}});
    } else if (scheme_name == "4ASK") {
        s.constellation = normalize_unit_power(
            {{-3.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}, {3.0, 0.0}});
    } else if (scheme_name == "BPSK") {
        s.constellation = {{1.0, 0.0}, {-1.0, 0.0}};
    } else if (scheme_name == "QPSK") {
        s.constellation = normalize_unit_power(
            {{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}});
    } else if (scheme_name == "8PSK") {
        s.constellation = psk_ring(8);
    } else if (scheme_name == "16QAM") {
        s.constellation = square_qam(4);
    } else if (scheme_name == "64QAM") {
        s.constellation = square_qam(8);
    } else if (scheme_name == "FM-like-tone") {
        // Constant-envelope phasor with a dense phase alphabet and a much
        // slower symbol clock: a near-unmodulated carrier burst whose phase
        // drifts occasionally, rather than a symbol-rate-keyed scheme.
        s.constellation = psk_ring(16);
        s.samples_per_symbol = 16 * samples_per_symbol;
    } else {
        throw std::invalid_argument("unknown modulation scheme: " + scheme_name);
    }
    return s;
}

IQFrame gen_clean_frame(const ModulationScheme& scheme, int n,
                        std::uint64_t rng_seed) {
    if (n <= 0 || n % scheme.samples_per_symbol != 0) {
        throw std::invalid_argument(
            "frame length must be a positive multiple of samples_per_symbol");
    }
    const int num_symbols = n / scheme.samples_per_symbol;
    Rng rng(rng_seed);
    IQFrame frame;
    frame.i.reserve(n);
    frame.q.reserve(n);
    for (int k = 0; k < num_symbols; ++k) {
        const auto& c =
            scheme.constellation[rng.below(scheme.constellation.size())];
        for (int rep = 0; rep < scheme.samples_per_symbol; ++rep) {
            frame.i.push_back(c.real());
            frame.q.push_back(c.imag());
        }
    }
    return frame;
}

double mean_power(const IQFrame& frame) {
    double p = 0.0;
    for (std::size_t t = 0; t < frame.size(); ++t) {
        p += frame.i[t] * frame.i[t] + frame.q[t] * frame.q[t];
    }
    return p / static_cast<double>(frame.size());
}

IQFrame apply_channel(const IQFrame& frame, const ChannelConfig& cfg) {
    if (frame.i.size() != frame.q.size() || frame.size() == 0) {
        throw std::invalid_argument("invalid IQ frame");
    }
    if (std::abs(cfg.cfo_norm) >= 0.5) {
        throw std::invalid_argument("|cfo_norm| must be < 0.5");
    }
    Rng rng(cfg.seed);
    const double phase =
        cfg.random_phase ? rng.uniform() * 2.0 * M_PI : cfg.phase_rad;

    IQFrame out;
    const std::size_t n = frame.size();
    out.i.resize(n);
    out.q.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double ang = 2.0 * M_PI * cfg.cfo_norm * static_cast<double>(t) + phase;
        const double c = std::cos(ang), s = std::sin(ang);
        out.i[t] = frame.i[t] * c - frame.q[t] * s;
        out.q[t] = frame.i[t] * s + frame.q[t] * c;
    }
    if (!cfg.noise_free) {
        const double n0 = mean_power(frame) / std::pow(10.0, cfg.snr_db / 10.0);
        const double sigma = std::sqrt(n0 / 2.0);  // per I/Q component
        for (std::size_t t = 0; t < n; ++t) {
            out.i[t] += sigma * rng.gaussian();
            out.q[t] += sigma * rng.gaussian();
        }
    }
    return out;
}

Dataset build_dataset(const std::vector<std::string>& schemes,
                      const std::vector<double>& snr_list, int frames_per_cell,
                      int n, std::uint64_t seed, int samples_per_symbol) {
    if (schemes.empty() || snr_list.empty()) {
        throw std::invalid_argument("schemes and snr_list must be non-empty");
    }
    if (frames_per_cell < 4) {
        throw std::invalid_argument("frames_per_cell must be >= 4");
    }
    std::vector<ModulationScheme> alphabet;
    alphabet.reserve(schemes.size());
    for (const auto& name : schemes) {
        alphabet.push_back(constellation(name, samples_per_symbol));
    }

    Dataset ds;
    ds.num_classes = static_cast<int>(schemes.size());
    ds.frame_len = n;
    ds.seed = seed;

    std::uint64_t frame_index = 0;
    for (int label = 0; label < ds.num_classes; ++label) {
        for (double snr : snr_list) {
            const std::uint32_t cell_start =
                static_cast<std::uint32_t>(ds.examples.size());
            for (int rep = 0; rep < frames_per_cell; ++rep, ++frame_index) {
                const std::uint64_t frame_seed = seed ^ frame_index;
                IQFrame clean =
                    gen_clean_frame(alphabet[label], n, frame_seed);
                ChannelConfig ch;
                ch.snr_db = snr;
                ch.seed = frame_seed ^ 0xA5A5A5A5A5A5A5A5ULL;
                ds.examples.push_back({apply_channel(clean, ch), label, snr});
            }
            // Stratified 75/25 split inside this (scheme, snr) cell.
            std::vector<std::uint32_t> cell(frames_per_cell);
            std::iota(cell.begin(), cell.end(), cell_start);
            Rng cell_rng(seed ^ (0x517CC1B727220A95ULL * (cell_start + 1)));
            for (std::size_t k = cell.size() - 1; k > 0; --k) {
                std::swap(cell[k], cell[cell_rng.below(k + 1)]);
            }
            const auto n_train = static_cast<std::size_t>(
                std::llround(0.75 * frames_per_cell));
            for (std::size_t k = 0; k < cell.size(); ++k) {
                (k < n_train ? ds.train_indices : ds.test_indices)
                    .push_back(cell[k]);
            }
        }
    }
    std::sort(ds.train_indices.begin(), ds.train_indices.end());
    std::sort(ds.test_indices.begin(), ds.test_indices.end());
    return ds;
}

std::vector<double> flatten(const IQFrame& frame) {
    std::vector<double> x;
    x.reserve(2 * frame.size());
    x.insert(x.end(), frame.i.begin(), frame.i.end());
    x.insert(x.end(), frame.q.begin(), frame.q.end());
    return x;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write("AMCD", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(ds.examples.size()));
    put_u32(os, static_cast<std::uint32_t>(ds.frame_len));
    put_u32(os, static_cast<std::uint32_t>(ds.num_classes));
    put_u32(os, static_cast<std::uint32_t>(ds.train_indices.size()));
    for (std::uint32_t idx : ds.train_indices) put_u32(os, idx);
    for (const auto& ex : ds.examples) {
        put_u32(os, static_cast<std::uint32_t>(ex.label));
        put_f64(os, ex.snr_db);
        for (double v : ex.frame.i) put_f64(os, v);
        for (double v : ex.frame.q) put_f64(os, v);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "AMCD", 4) != 0) {
        throw std::runtime_error("not an AMCD dataset file: " + path);
    }
    const std::uint32_t version = get_u32(is);
    if (version != 1) throw std::runtime_error("unsupported AMCD version");
    Dataset ds;
    const std::uint32_t num_examples = get_u32(is);
    ds.frame_len = static_cast<int>(get_u32(is));
    ds.num_classes = static_cast<int>(get_u32(is));
    const std::uint32_t num_train = get_u32(is);
    ds.train_indices.resize(num_train);
    for (auto& idx : ds.train_indices) idx = get_u32(is);
    std::unordered_set<std::uint32_t> train_set(ds.train_indices.begin(),
                                                ds.train_indices.end());
    ds.examples.resize(num_examples);
    for (auto& ex : ds.examples) {
        ex.label = static_cast<int>(get_u32(is));
        ex.snr_db = get_f64(is);
        ex.frame.i.resize(ds.frame_len);
        ex.frame.q.resize(ds.frame_len);
        for (auto& v : ex.frame.i) v = get_f64(is);
        for (auto& v : ex.frame.q) v = get_f64(is);
    }
    if (!is) throw std::runtime_error("truncated AMCD file: " + path);
    for (std::uint32_t idx = 0; idx < num_examples; ++idx) {
        if (!train_set.count(idx)) ds.test_indices.push_back(idx);
    }
    return ds;
}

}  // namespace amc

#include "glnframes/signal_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace glnframes {

namespace {

std::string base_name(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

}  // namespace

void save_signal(const SpectralSignal& signal, const std::string& basepath) {
    static_assert(std::endian::native == std::endian::little,
                  "binary payload layout assumes a little-endian host");

    nlohmann::ordered_json header;
    nlohmann::ordered_json axes = nlohmann::ordered_json::array();
    for (int axis = 0; axis < 4; ++axis) {
        axes.push_back({{"min", signal.grid.lo[static_cast<std::size_t>(axis)]},
                        {"max", signal.grid.hi[static_cast<std::size_t>(axis)]},
                        {"count", signal.grid.count[static_cast<std::size_t>(axis)]}});
    }
    header["axes"] = axes;
    header["endianness"] = "little";
    header["complex_layout"] = "interleaved re,im float64 little-endian";
    header["flagged_points"] = signal.flagged;
    header["payload"] = base_name(basepath) + ".bin";
    header["payload_bytes"] = signal.values.size() * 2 * sizeof(double);

    std::ofstream hdr(basepath + ".json");
    if (!hdr) throw Error("cannot write " + basepath + ".json");
    hdr << header.dump(2) << "\n";

    std::ofstream bin(basepath + ".bin", std::ios::binary);
    if (!bin) throw Error("cannot write " + basepath + ".bin");
    bin.write(reinterpret_cast<const char*>(signal.values.data()),
              static_cast<std::streamsize>(signal.values.size() * sizeof(Cplx)));
}

SpectralSignal load_signal(const std::string& basepath) {
    std::ifstream hdr(basepath + ".json");
    if (!hdr) throw Error("cannot read " + basepath + ".json");
    nlohmann::json header = nlohmann::json::parse(hdr);

    if (header.at("endianness").get<std::string>() != "little") {
        throw Error("unsupported payload endianness");
    }
    if (header.at("complex_layout").get<std::string>() !=
        "interleaved re,im float64 little-endian") {
        throw Error("unsupported complex layout");
    }

    SpectralSignal sig;
    const auto& axes = header.at("axes");
    if (axes.size() != 4) throw Error("signal header must declare 4 axes");
    for (int axis = 0; axis < 4; ++axis) {
        sig.grid.lo[static_cast<std::size_t>(axis)] = axes[static_cast<std::size_t>(axis)].at("min").get<double>();
        sig.grid.hi[static_cast<std::size_t>(axis)] = axes[static_cast<std::size_t>(axis)].at("max").get<double>();
        sig.grid.count[static_cast<std::size_t>(axis)] = axes[static_cast<std::size_t>(axis)].at("count").get<int>();
        if (sig.grid.count[static_cast<std::size_t>(axis)] < 2) {
            throw GridError("signal grids need at least 2 points per axis");
        }
    }
    sig.flagged = header.value("flagged_points", std::vector<std::int64_t>{});

    const std::size_t expected = static_cast<std::size_t>(sig.grid.total());
    sig.values.resize(expected);
    std::ifstream bin(basepath + ".bin", std::ios::binary);
    if (!bin) throw Error("cannot read " + basepath + ".bin");
    bin.read(reinterpret_cast<char*>(sig.values.data()),
             static_cast<std::streamsize>(expected * sizeof(Cplx)));
    if (static_cast<std::size_t>(bin.gcount()) != expected * sizeof(Cplx)) {
        throw Error("payload shorter than the declared grid");
    }
    return sig;
}

void dump_coefficients_csv(const std::vector<TileCoefficients>& coeffs,
                           const std::string& path, double magnitude_floor) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "# frame coefficients\n";
    out << "# lambda,kappa,mu,m1,m2,m3,m4,re,im\n";
    out.precision(17);

    for (const TileCoefficients& tc : coeffs) {
        double peak = 0.0;
        for (const Cplx& v : tc.c) peak = std::max(peak, std::abs(v));
        const double floor = peak * magnitude_floor;
        for (std::int64_t i = 0; i < tc.size(); ++i) {
            const Cplx v = tc.c[static_cast<std::size_t>(i)];
            if (std::abs(v) <= floor) continue;
            std::int64_t rem = i;
            std::array<int, 4> m{};
            for (int axis = 3; axis >= 0; --axis) {
                const int span = tc.m_max[static_cast<std::size_t>(axis)] -
                                 tc.m_min[static_cast<std::size_t>(axis)] + 1;
                m[static_cast<std::size_t>(axis)] =
                    static_cast<int>(rem % span) + tc.m_min[static_cast<std::size_t>(axis)];
                rem /= span;
            }
            out << tc.index.lambda << ',' << tc.index.kappa_at(0) << ',' << tc.index.mu_at(0, 1)
                << ',' << m[0] << ',' << m[1] << ',' << m[2] << ',' << m[3] << ',' << v.real()
                << ',' << v.imag() << '\n';
        }
    }
}

}  // namespace glnframes

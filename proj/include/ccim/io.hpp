#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ccim/instance.hpp"
#include "ccim/solvers.hpp"

namespace ccim {

static_assert(std::endian::native == std::endian::little, "instance format is little-endian");

namespace detail {

inline void write_f32(std::ostream& os, const float* data, std::size_t count) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
}

inline void read_f32(std::istream& is, float* data, std::size_t count, const char* what) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
    if (!is) fail_io(std::string("instance file truncated while reading ") + what);
}

}  // namespace detail

/// Binary instance format, little-endian:
///   "CCIM" | version u32 | n u32 | mode u8 |
///   diag n*f32 | upper n(n-1)/2*f32 | g n*f32 | r n*f32 | d n*f32
inline void write_instance(const std::string& path, const ProblemInstance<float>& inst) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail_io("cannot open for writing: " + path);
    os.write("CCIM", 4);
    const std::uint32_t version = 1, n = static_cast<std::uint32_t>(inst.n);
    const std::uint8_t mode = static_cast<std::uint8_t>(inst.mode);
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&n), 4);
    os.write(reinterpret_cast<const char*>(&mode), 1);
    detail::write_f32(os, inst.coupling.diag().data(), n);
    detail::write_f32(os, inst.coupling.upper().data(), inst.coupling.upper().size());
    detail::write_f32(os, inst.zeeman.data(), n);
    detail::write_f32(os, inst.aux_r.data(), n);
    detail::write_f32(os, inst.diag_inv.data(), n);
    if (!os) fail_io("write failed: " + path);
}

inline ProblemInstance<float> read_instance(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail_io("cannot open: " + path);
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || std::memcmp(magic.data(), "CCIM", 4) != 0) fail_io("bad magic in " + path);
    std::uint32_t version = 0, n = 0;
    std::uint8_t mode = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&n), 4);
    is.read(reinterpret_cast<char*>(&mode), 1);
    if (!is || version != 1) fail_io("unsupported instance version in " + path);
    if (n < 1 || mode > 1) fail_io("corrupt header in " + path);

    ProblemInstance<float> inst;
    inst.n = static_cast<Index>(n);
    inst.coupling = PackedSymmetricMatrix<float>(inst.n);
    inst.mode = static_cast<HamiltonianMode>(mode);
    inst.zeeman.resize(inst.n);
    inst.aux_r.resize(inst.n);
    inst.diag_inv.resize(inst.n);
    detail::read_f32(is, inst.coupling.diag().data(), n, "diag");
    detail::read_f32(is, inst.coupling.upper().data(), inst.coupling.upper().size(), "upper");
    detail::read_f32(is, inst.zeeman.data(), n, "g");
    detail::read_f32(is, inst.aux_r.data(), n, "r");
    detail::read_f32(is, inst.diag_inv.data(), n, "d");
    return inst;
}

namespace detail {

inline std::vector<double> split_csv_line(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stod(cell));
    }
    return out;
}

}  // namespace detail

/// Text import for small instances:
///   line 1: n,mode(ising|qubo)
///   n lines: full J rows (n entries each)
///   then one line each for g, r, d.
inline ProblemInstance<float> read_instance_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail_io("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) fail_io("empty instance csv: " + path);
    std::stringstream head(line);
    std::string ntok, modetok;
    std::getline(head, ntok, ',');
    std::getline(head, modetok, ',');
    Index n = 0;
    try {
        n = static_cast<Index>(std::stol(ntok));
    } catch (...) {
        fail_io("bad header in " + path);
    }
    if (n < 1) fail_io("bad n in " + path);
    HamiltonianMode mode;
    if (modetok == "ising")
        mode = HamiltonianMode::Ising;
    else if (modetok == "qubo")
        mode = HamiltonianMode::Qubo;
    else
        fail_io("bad mode '" + modetok + "' in " + path);

    Eigen::MatrixXd j(n, n);
    for (Index r = 0; r < n; ++r) {
        if (!std::getline(is, line)) fail_io("missing J row in " + path);
        const auto vals = detail::split_csv_line(line);
        if (static_cast<Index>(vals.size()) != n) fail_io("bad J row length in " + path);
        for (Index c = 0; c < n; ++c) j(r, c) = vals[c];
    }
    auto read_vec = [&](const char* what) {
        if (!std::getline(is, line)) fail_io(std::string("missing ") + what + " row in " + path);
        const auto vals = detail::split_csv_line(line);
        if (static_cast<Index>(vals.size()) != n) fail_io(std::string("bad ") + what + " length in " + path);
        Eigen::VectorXd v(n);
        for (Index i = 0; i < n; ++i) v[i] = vals[i];
        return v;
    };
    const Eigen::VectorXd g = read_vec("g"), r = read_vec("r"), d = read_vec("d");

    ProblemInstance<double> inst = ProblemInstance<double>::make(pack<double>(j), g, mode);
    inst.aux_r = r;
    inst.diag_inv = d;
    return inst.cast<float>();
}

/// Trajectory CSV: header step,spin,c,s_or_e; first K spins per frame.
template <typename Scalar>
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryFrame<Scalar>>& frames) {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os << "step,spin,c,s_or_e\n";
    for (const auto& f : frames)
        for (Index i = 0; i < f.c.size(); ++i)
            os << f.step << ',' << i << ',' << f.c[i] << ',' << f.s_or_e[i] << '\n';
    if (!os) fail_io("write failed: " + path);
}

/// Plain portable graymap (P2 ascii / P5 binary), normalized to [0,1].
inline Eigen::MatrixXd read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail_io("cannot open: " + path);
    std::string magic;
    is >> magic;
    if (magic != "P2" && magic != "P5") fail_io("not a PGM (P2/P5) file: " + path);
    auto next_token = [&]() {
        std::string tok;
        while (is >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return tok;
        }
        fail_io("truncated PGM header: " + path);
    };
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255) fail_io("unsupported PGM header: " + path);
    Eigen::MatrixXd img(h, w);
    if (magic == "P2") {
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) img(r, c) = std::stoi(next_token()) / double(maxval);
    } else {
        is.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!is) fail_io("truncated PGM data: " + path);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) img(r, c) = buf[static_cast<std::size_t>(r) * w + c] / double(maxval);
    }
    return img;
}

/// Raw f32 square matrix file: side inferred from byte size.
inline Eigen::MatrixXd read_raw_f32_square(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) fail_io("cannot open: " + path);
    const auto bytes = static_cast<std::size_t>(is.tellg());
    if (bytes == 0 || bytes % sizeof(float) != 0) fail_io("bad raw f32 file size: " + path);
    const std::size_t count = bytes / sizeof(float);
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(count))));
    if (static_cast<std::size_t>(side) * side != count) fail_io("raw f32 file is not square: " + path);
    is.seekg(0);
    std::vector<float> buf(count);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!is) fail_io("read failed: " + path);
    Eigen::MatrixXd img(side, side);
    for (Index r = 0; r < side; ++r)
        for (Index c = 0; c < side; ++c) img(r, c) = buf[static_cast<std::size_t>(r) * side + c];
    return img;
}

}  // namespace ccim

#pragma once

#include "abcd/error.hpp"
#include "abcd/format.hpp"
#include "abcd/params.hpp"
#include "abcd/spectral.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace abcd {

// CSV trajectory:
//   # abcd-trajectory 1
//   # grid n=<n> L=<L>
//   # params a_tilde=<> c_tilde=<> [a=<> b=<> c=<>]
//   x,u,eta
//   # t=<t>
//   <x>,<u>,<eta>   (n rows per snapshot)

inline void write_trajectory(std::ostream& os, const Trajectory& tr, const std::optional<PhysParams>& phys = {}) {
    os << "# abcd-trajectory 1\n";
    os << "# grid n=" << tr.grid.n << " L=" << fmt_double(tr.grid.length) << '\n';
    os << "# params a_tilde=" << fmt_double(tr.params.a_tilde) << " c_tilde=" << fmt_double(tr.params.c_tilde);
    if (phys)
        os << " a=" << fmt_double(phys->a()) << " b=" << fmt_double(phys->b()) << " c=" << fmt_double(phys->c());
    os << "\nx,u,eta\n";
    for (const auto& s : tr.snapshots) {
        os << "# t=" << fmt_double(s.t) << '\n';
        for (int j = 0; j < tr.grid.n; ++j)
            os << fmt_double(tr.grid.x(j)) << ',' << fmt_double(s.u[j]) << ',' << fmt_double(s.eta[j]) << '\n';
    }
}

inline void write_trajectory(const std::string& path, const Trajectory& tr, const std::optional<PhysParams>& phys = {}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_trajectory(f, tr, phys);
    if (!f) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

namespace detail {
inline double parse_num(std::string_view s) {
    double v = 0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        if (s == "nan") return NAN;
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        throw Error(ErrorCode::IoError, "bad number '" + std::string(s) + "'");
    }
    return v;
}

// value of key=... inside a header line
inline std::optional<double> header_value(const std::string& line, const std::string& key) {
    std::istringstream is(line.substr(1));
    std::string tok;
    while (is >> tok) {
        if (tok.rfind(key + "=", 0) == 0) return parse_num(std::string_view(tok).substr(key.size() + 1));
    }
    return std::nullopt;
}
} // namespace detail

struct LoadedTrajectory {
    Trajectory traj;
    std::optional<Triple> phys;
};

inline LoadedTrajectory read_trajectory(std::istream& is) {
    LoadedTrajectory out;
    std::string line;
    std::optional<int> n;
    std::optional<double> L, at, ct;
    FieldPair cur;
    bool in_snapshot = false;
    int row = 0;
    auto flush = [&]() {
        if (!in_snapshot) return;
        if (row != *n) throw Error(ErrorCode::IoError, "snapshot has " + std::to_string(row) + " rows, expected " + std::to_string(*n));
        out.traj.snapshots.push_back(cur);
    };
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# grid", 0) == 0) {
                const auto nv = detail::header_value(line, "n");
                L = detail::header_value(line, "L");
                if (!nv || !L) throw Error(ErrorCode::IoError, "bad grid header");
                n = static_cast<int>(*nv);
            } else if (line.rfind("# params", 0) == 0) {
                at = detail::header_value(line, "a_tilde");
                ct = detail::header_value(line, "c_tilde");
                const auto a = detail::header_value(line, "a"), b = detail::header_value(line, "b"),
                           c = detail::header_value(line, "c");
                if (a && b && c) out.phys = Triple{*a, *b, *c};
            } else if (line.rfind("# t=", 0) == 0) {
                if (!n) throw Error(ErrorCode::IoError, "snapshot before grid header");
                flush();
                cur = FieldPair{};
                cur.t = detail::parse_num(std::string_view(line).substr(4));
                cur.u.reserve(*n);
                cur.eta.reserve(*n);
                in_snapshot = true;
                row = 0;
            }
            continue;
        }
        if (line == "x,u,eta") continue;
        if (!in_snapshot) throw Error(ErrorCode::IoError, "data row outside a snapshot");
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw Error(ErrorCode::IoError, "malformed row '" + line + "'");
        const std::string_view sv(line);
        cur.u.push_back(detail::parse_num(sv.substr(c1 + 1, c2 - c1 - 1)));
        cur.eta.push_back(detail::parse_num(sv.substr(c2 + 1)));
        ++row;
        if (row > *n) throw Error(ErrorCode::IoError, "too many rows in snapshot");
    }
    if (!n || !L || !at || !ct) throw Error(ErrorCode::IoError, "missing grid or params header");
    flush();
    try {
        out.traj.grid = Grid(*n, *L);
    } catch (const Error& e) {
        throw Error(ErrorCode::IoError, e.what());
    }
    out.traj.params = {*at, *ct};
    return out;
}

inline LoadedTrajectory read_trajectory(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return read_trajectory(f);
}

// single snapshot from a CSV with x,u,eta rows (header lines starting with '#' or a text header are skipped)
inline FieldPair read_initial_csv(const std::string& path, const Grid& g) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    FieldPair s;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line == "x,u,eta") continue;
        const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw Error(ErrorCode::IoError, "malformed row '" + line + "'");
        const std::string_view sv(line);
        s.u.push_back(detail::parse_num(sv.substr(c1 + 1, c2 - c1 - 1)));
        s.eta.push_back(detail::parse_num(sv.substr(c2 + 1)));
    }
    if (static_cast<int>(s.u.size()) != g.n)
        throw Error(ErrorCode::IoError, "initial data has " + std::to_string(s.u.size()) + " rows, grid has " + std::to_string(g.n));
    return s;
}

} // namespace abcd

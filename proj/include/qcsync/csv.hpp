#pragma once

// CSV export (and trajectory re-import) for the figure pipeline.
//
//   trajectory  L,mean_qa,mean_pa,mean_qb,mean_pb,s11,...,s44
//   measures    L,S_c,S_re,R_a,R_b,E_N
//   sweep       d21,d31,S_re_final,E_N_final
//   spectrum    re,im
//   wigner      q,p,w
//   matrix      row,col,re,im
//
// Numbers use the shortest round-trip representation, so output is byte-stable.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qcsync/liouvillian.hpp"
#include "qcsync/measures.hpp"

namespace qcsync::csv {

inline std::string number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail(ErrorKind::Numerical, "csv: cannot format number");
    return {buf, ptr};
}

inline std::string number(int v) { return std::to_string(v); }

class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    template <class... Ts>
    void row(const Ts&... fields) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(fields), first = false), ...);
        os_ << '\n';
    }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) os_ << (i ? "," : "") << names[i];
        os_ << '\n';
    }

    void raw(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << number(values[i]);
        os_ << '\n';
    }

private:
    static std::string cell(double v) { return number(v); }
    static std::string cell(int v) { return number(v); }
    static std::string cell(const std::string& s) { return s; }

    std::ostream& os_;
};

inline std::vector<std::string> trajectory_header() {
    std::vector<std::string> h{"L", "mean_qa", "mean_pa", "mean_qb", "mean_pb"};
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j) h.push_back("s" + std::to_string(i) + std::to_string(j));
    return h;
}

inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
    Writer w(os);
    w.header(trajectory_header());
    for (const auto& pt : traj.points) {
        std::vector<double> v{static_cast<double>(pt.collisions), pt.mean_qa, pt.mean_pa, pt.mean_qb, pt.mean_pb};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) v.push_back(pt.cov(i, j));
        os << pt.collisions;
        for (std::size_t k = 1; k < v.size(); ++k) os << ',' << number(v[k]);
        os << '\n';
    }
}

inline void write_measures(std::ostream& os, const SyncSeries& sync, const EntanglementSeries& ent) {
    require(sync.points.size() == ent.points.size(), "write_measures: series lengths differ");
    Writer w(os);
    w.header({"L", "S_c", "S_re", "R_a", "R_b", "E_N"});
    for (std::size_t i = 0; i < sync.points.size(); ++i) {
        const auto& s = sync.points[i];
        w.row(s.collisions, s.S_c, s.S_re, s.R_a, s.R_b, ent.points[i].E_N);
    }
}

struct SweepRow {
    double d21 = 0.0;
    double d31 = 0.0;
    double S_re_final = 0.0;
    double E_N_final = 0.0;
};

inline void write_sweep(std::ostream& os, const std::vector<SweepRow>& rows) {
    Writer w(os);
    w.header({"d21", "d31", "S_re_final", "E_N_final"});
    for (const auto& r : rows) w.row(r.d21, r.d31, r.S_re_final, r.E_N_final);
}

inline void write_spectrum(std::ostream& os, const Spectrum& spec) {
    Writer w(os);
    w.header({"re", "im"});
    for (auto c : spec.eigenvalues) w.row(c.real(), c.imag());
}

inline void write_wigner(std::ostream& os, const WignerGrid& grid, const std::vector<double>& values) {
    require(grid.points.size() == values.size(), "write_wigner: grid and values differ in length");
    Writer w(os);
    w.header({"q", "p", "w"});
    for (std::size_t i = 0; i < values.size(); ++i) w.row(grid.points[i].q, grid.points[i].p, values[i]);
}

inline void write_matrix(std::ostream& os, const ScatteringMatrix& s) {
    Writer w(os);
    w.header({"row", "col", "re", "im"});
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) w.row(i, j, s.entries(i, j).real(), s.entries(i, j).imag());
}

/// Parse a trajectory CSV back into memory; covariances are re-validated.
inline Trajectory read_trajectory(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::InvalidArgument, "read_trajectory: empty input");
    std::string expected;
    for (const auto& h : trajectory_header()) expected += (expected.empty() ? "" : ",") + h;
    require(line == expected, "read_trajectory: unexpected header '" + line + "'");
    Trajectory traj;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            double x = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
            require(ec == std::errc{} && ptr == cell.data() + cell.size(),
                    "read_trajectory: line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            v.push_back(x);
        }
        require(v.size() == 21, "read_trajectory: line " + std::to_string(lineno) + ": expected 21 fields");
        TrajectoryPoint pt;
        pt.collisions = static_cast<int>(v[0]);
        pt.mean_qa = v[1];
        pt.mean_pa = v[2];
        pt.mean_qb = v[3];
        pt.mean_pb = v[4];
        Matrix s(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s(i, j) = v[5 + 4 * i + j];
        pt.cov = CovarianceMatrix(s);
        traj.points.push_back(std::move(pt));
    }
    return traj;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path);
    out << content;
    if (!out) fail(ErrorKind::InvalidArgument, "failed writing " + path);
}

}  // namespace qcsync::csv

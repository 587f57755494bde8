#pragma once

// Text formats: spectrum table, branch file, evolution CSV, SVG diagram.
// Reals are written with 17 significant digits so a read returns the same bits.

#include "gpbif/continuation.hpp"
#include "gpbif/errors.hpp"
#include "gpbif/oscillator_basis.hpp"
#include "gpbif/verifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace gpbif {

inline std::string format_real(double const value) {
    char buffer[64];
    auto const result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

inline double parse_real(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    double value = 0.0;
    auto const* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    auto const [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        if (text == "inf") return std::numeric_limits<double>::infinity();
        if (text == "-inf") return -std::numeric_limits<double>::infinity();
        throw FormatError("not a real number: '" + std::string(text) + "'");
    }
    return value;
}

inline int parse_int(std::string_view text) {
    int value = 0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw FormatError("not an integer: '" + std::string(text) + "'");
    return value;
}

inline std::vector<std::string_view> split(std::string_view text, char const separator) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto const pos = text.find(separator, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

// ---------------------------------------------------------------- spectrum

/// Rows (m, n, lambda, nodes, norm_error) for -m_max <= m <= m_max, 0 <= n <= n_max.
inline void write_spectrum(std::ostream& out, int const m_max, int const n_max) {
    if (m_max < 0 || n_max < 0 || m_max > 20 || n_max > 20) throw std::invalid_argument("spectrum bounds must lie in [0, 20]");
    out << "# m,n,lambda,nodes,norm_error\n";
    for (int m = -m_max; m <= m_max; ++m) {
        for (int n = 0; n <= n_max; ++n) {
            BasisIndex const index{m, n};
            out << m << ',' << n << ',' << static_cast<long>(eigenvalue(index)) << ',' << count_nodes(index) << ','
                << format_real(norm_error(index)) << '\n';
        }
    }
}

// ---------------------------------------------------------------- branch file

inline constexpr std::string_view branch_format_tag = "gpbif-branch v1";

inline Termination parse_termination(std::string_view const text) {
    for (auto t : {Termination::ReachedOmegaMax, Termination::ReachedNormMax, Termination::ReturnedNearBifurcation,
                   Termination::StepFailure, Termination::MaxPointsReached}) {
        if (to_string(t) == text) return t;
    }
    throw FormatError("unknown termination reason '" + std::string(text) + "'");
}

inline SubspaceKind parse_kind(std::string_view const text) {
    if (text == "vortex") return SubspaceKind::Vortex;
    if (text == "multipole") return SubspaceKind::MultiPole;
    throw FormatError("unknown subspace kind '" + std::string(text) + "'");
}

/// Header:
///   # gpbif-branch v1
///   # kind=..,m0=..,n0=..,n_radial=..,m_harmonics=..,omega_star=..,termination=..
///   # s,omega,a,norm_c,residual,c(m;n),...
/// then one comma-separated record per point, ordered by arclength.
inline void write_branch(std::ostream& out, Branch const& branch) {
    auto const& spec = branch.spec;
    out << "# " << branch_format_tag << '\n';
    out << "# kind=" << to_string(spec.kind) << ",m0=" << spec.m0 << ",n0=" << branch.n0 << ",n_radial=" << spec.n_radial
        << ",m_harmonics=" << spec.harmonics() << ",omega_star=" << format_real(branch.omega_star)
        << ",termination=" << to_string(branch.termination) << '\n';
    out << "# s,omega,a,norm_c,residual";
    for (auto const& mode : mode_set(spec)) out << ",c(" << mode.m << ';' << mode.n << ')';
    out << '\n';
    for (auto const& point : branch.points) {
        out << format_real(point.arclength) << ',' << format_real(point.omega) << ',' << format_real(point.amplitude) << ','
            << format_real(point.c.norm()) << ',' << format_real(point.residual_norm);
        for (Eigen::Index i = 0; i < point.c.size(); ++i) out << ',' << format_real(point.c(i));
        out << '\n';
    }
}

inline Branch read_branch(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "# " + std::string(branch_format_tag)) throw FormatError("missing branch file tag");
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("missing branch header");

    std::map<std::string, std::string, std::less<>> header;
    for (auto const field : split(std::string_view(line).substr(2), ',')) {
        auto const eq = field.find('=');
        if (eq == std::string_view::npos) throw FormatError("malformed header field '" + std::string(field) + "'");
        header.emplace(std::string(field.substr(0, eq)), std::string(field.substr(eq + 1)));
    }
    auto require = [&](char const* key) -> std::string const& {
        auto const it = header.find(key);
        if (it == header.end()) throw FormatError(std::string("header lacks '") + key + "'");
        return it->second;
    };

    Branch branch;
    branch.spec.kind = parse_kind(require("kind"));
    branch.spec.m0 = parse_int(require("m0"));
    branch.n0 = parse_int(require("n0"));
    branch.spec.n_radial = parse_int(require("n_radial"));
    branch.spec.m_harmonics = parse_int(require("m_harmonics"));
    branch.omega_star = parse_real(require("omega_star"));
    branch.termination = parse_termination(require("termination"));
    try {
        branch.spec.validate();
    } catch (std::invalid_argument const& e) {
        throw FormatError(std::string("invalid subspace in header: ") + e.what());
    }
    if (branch.n0 < 0 || branch.n0 >= branch.spec.n_radial) throw FormatError("n0 outside the radial truncation");

    if (!std::getline(in, line) || line.rfind("# s,omega,a,norm_c,residual", 0) != 0) throw FormatError("missing column header");
    std::size_t const dim = static_cast<std::size_t>(branch.spec.dimension());
    if (split(line, ',').size() != 5 + dim) throw FormatError("column header does not match subspace dimension");

    double last_s = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto const fields = split(line, ',');
        if (fields.size() != 5 + dim) throw FormatError("record has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(5 + dim));
        BranchPoint point;
        point.arclength = parse_real(fields[0]);
        point.omega = parse_real(fields[1]);
        point.amplitude = parse_real(fields[2]);
        point.residual_norm = parse_real(fields[4]);
        point.c.resize(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) point.c(static_cast<Eigen::Index>(i)) = parse_real(fields[5 + i]);
        if (!(point.arclength > last_s)) throw FormatError("records are not ordered by arclength");
        last_s = point.arclength;
        branch.points.push_back(std::move(point));
    }
    return branch;
}

// ---------------------------------------------------------------- evolution CSV

inline void write_evolution(std::ostream& out, EvolutionReport const& report) {
    out << "# t,mass,energy,periodicity\n";
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        out << format_real(report.times[i]) << ',' << format_real(report.mass[i]) << ',' << format_real(report.energy[i]) << ','
            << format_real(report.periodicity[i]) << '\n';
    }
}

// ---------------------------------------------------------------- SVG

/// Bifurcation diagram: ||c||_2 against omega, one polyline per branch, with
/// each branch's omega* marked on the horizontal axis.
inline void write_svg(std::ostream& out, std::vector<Branch> const& branches) {
    constexpr double width = 640.0;
    constexpr double height = 480.0;
    constexpr double margin = 60.0;
    double wmin = std::numeric_limits<double>::infinity();
    double wmax = -wmin;
    double nmax = 0.0;
    for (auto const& b : branches) {
        wmin = std::min(wmin, b.omega_star);
        wmax = std::max(wmax, b.omega_star);
        for (auto const& p : b.points) {
            wmin = std::min(wmin, p.omega);
            wmax = std::max(wmax, p.omega);
            nmax = std::max(nmax, p.c.norm());
        }
    }
    if (!std::isfinite(wmin)) {
        wmin = 0.0;
        wmax = 1.0;
    }
    if (wmax - wmin < 1e-12) wmax = wmin + 1.0;
    if (nmax <= 0.0) nmax = 1.0;
    double const pad = 0.05 * (wmax - wmin);
    wmin -= pad;
    wmax += pad;
    auto px = [&](double const w) { return margin + (w - wmin) / (wmax - wmin) * (width - 2.0 * margin); };
    auto py = [&](double const n) { return height - margin - n / (1.05 * nmax) * (height - 2.0 * margin); };
    auto num = [](double const v) {
        std::ostringstream s;
        s.precision(6);
        s << v;
        return s.str();
    };

    static constexpr char const* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
        << width << ' ' << height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\" font-size=\"14\">omega</text>\n";
    out << "  <text x=\"18\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << height / 2 << ")\">||c||_2</text>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << height - margin + 18 << "\" font-size=\"11\">" << num(wmin) << "</text>\n";
    out << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 18 << "\" text-anchor=\"end\" font-size=\"11\">"
        << num(wmax) << "</text>\n";
    out << "  <text x=\"" << margin - 6 << "\" y=\"" << py(nmax) << "\" text-anchor=\"end\" font-size=\"11\">" << num(nmax)
        << "</text>\n";

    for (std::size_t b = 0; b < branches.size(); ++b) {
        auto const& branch = branches[b];
        char const* color = colors[b % std::size(colors)];
        double const x_star = px(branch.omega_star);
        out << "  <circle cx=\"" << num(x_star) << "\" cy=\"" << height - margin << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        out << "  <text x=\"" << num(x_star) << "\" y=\"" << height - margin - 8 << "\" text-anchor=\"middle\" font-size=\"11\">omega*="
            << num(branch.omega_star) << "</text>\n";
        out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < branch.points.size(); ++i) {
            if (i > 0) out << ' ';
            out << num(px(branch.points[i].omega)) << ',' << num(py(branch.points[i].c.norm()));
        }
        out << "\"/>\n";
        out << "  <text x=\"" << width - margin << "\" y=\"" << margin + 16.0 * static_cast<double>(b) << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
            << color << "\">" << to_string(branch.spec.kind) << " m0=" << branch.spec.m0 << " n0=" << branch.n0 << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace gpbif

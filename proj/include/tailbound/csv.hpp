#pragma once

// Deterministic CSV emission for curve sweeps: header `n,method,t,value`,
// reals rendered with 17 significant digits in scientific notation, LF line
// endings. Identical inputs produce byte-identical files.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "tailbound/errors.hpp"
#include "tailbound/scenarios.hpp"

namespace tailbound {

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void write_curve_csv(std::ostream& os, std::span<const CurveSeries> series, double t) {
    os << "n,method,t,value\n";
    const std::string t_text = format_real(t);
    for (const CurveSeries& s : series) {
        for (const CurvePoint& p : s.points) {
            if (!std::isfinite(p.value) || p.value < 0.0)
                throw input_error("csv: non-finite or negative value in series " + s.method);
            os << p.n << ',' << s.method << ',' << t_text << ',' << format_real(p.value)
               << '\n';
        }
    }
}

} // namespace tailbound

#include "itecp/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "itecp/errors.hpp"

namespace itecp {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& field, std::size_t row, const std::string& col) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ec != std::errc{} || ptr != last)
        throw DataError("csv: cannot parse number '" + field + "' at data row " +
                        std::to_string(row) + ", column " + col);
    return value;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

CausalDataset load_csv(const std::string& path, const PropensitySpec& propensity) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: no data rows in '" + path + "'");
    const auto header = split_fields(line);

    // x1..xd prefix, then w, y, then optional y0,y1 (together), tau, pi.
    std::size_t d = 0;
    while (d < header.size() && header[d] == "x" + std::to_string(d + 1)) ++d;
    if (d == 0) throw DataError("csv: header must start with x1,...,xd");
    std::size_t pos = d;
    const auto expect = [&](const char* name) {
        if (pos >= header.size() || header[pos] != name)
            throw DataError(std::string("csv: missing mandatory column '") + name + "'");
        ++pos;
    };
    expect("w");
    expect("y");
    const auto maybe = [&](const char* name) {
        if (pos < header.size() && header[pos] == name) {
            ++pos;
            return true;
        }
        return false;
    };
    const bool has_y0 = maybe("y0");
    const bool has_y1 = maybe("y1");
    if (has_y0 != has_y1)
        throw DataError("csv: y0 and y1 columns must appear together");
    const bool has_tau = maybe("tau");
    const bool has_pi = maybe("pi");
    if (pos != header.size())
        throw DataError("csv: unexpected column '" + header[pos] + "'");
    if (propensity.kind == PropensitySpec::Kind::Column && !has_pi)
        throw DataError("csv: propensity spec requires a pi column");

    CausalDataset ds;
    std::vector<double> xs;
    std::size_t row = 0;
    std::vector<double> y0s, y1s, taus;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("csv: data row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        std::size_t f = 0;
        for (std::size_t c = 0; c < d; ++c)
            xs.push_back(parse_number(fields[f++], row, header[c]));
        const double wv = parse_number(fields[f++], row, "w");
        if (wv != 0.0 && wv != 1.0)
            throw DataError("csv: non-binary w at data row " + std::to_string(row));
        ds.w.push_back(wv == 1.0 ? 1 : 0);
        ds.y.push_back(parse_number(fields[f++], row, "y"));
        if (has_y0) {
            y0s.push_back(parse_number(fields[f++], row, "y0"));
            y1s.push_back(parse_number(fields[f++], row, "y1"));
            const double factual = ds.w.back() ? y1s.back() : y0s.back();
            if (ds.y.back() != factual)
                throw DataError("csv: data row " + std::to_string(row) +
                                ": y does not equal the selected potential outcome");
        }
        if (has_tau) taus.push_back(parse_number(fields[f++], row, "tau"));
        double p;
        if (has_pi) {
            p = parse_number(fields[f], row, "pi");
        } else if (propensity.kind == PropensitySpec::Kind::Constant) {
            p = propensity.constant;
        } else {
            std::span<const double> x_row(xs.data() + xs.size() - d, d);
            if (!(x_row[0] >= 0.0 && x_row[0] <= 1.0))
                throw DataError("csv: x1 outside [0,1] at data row " + std::to_string(row) +
                                "; beta24 propensity undefined");
            p = propensity_fn(x_row);
        }
        ds.pi.push_back(p);
    }
    if (row == 0) throw DataError("csv: no data rows in '" + path + "'");

    const std::size_t n = row;
    ds.x = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) ds.x.at(i, c) = xs[i * d + c];
    if (has_y0) {
        ds.y0 = std::move(y0s);
        ds.y1 = std::move(y1s);
    }
    if (has_tau) ds.tau_true = std::move(taus);

    ds.validate();
    return ds;
}

void save_csv(const CausalDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("csv: cannot write '" + path + "'");

    std::ostringstream header;
    for (std::size_t c = 0; c < ds.d(); ++c) header << "x" << (c + 1) << ",";
    header << "w,y";
    if (ds.has_potential_outcomes()) header << ",y0,y1";
    if (ds.tau_true) header << ",tau";
    header << ",pi";
    out << header.str() << "\n";

    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t c = 0; c < ds.d(); ++c)
            out << format_number(ds.x.at(i, c)) << ",";
        out << int(ds.w[i]) << "," << format_number(ds.y[i]);
        if (ds.has_potential_outcomes())
            out << "," << format_number((*ds.y0)[i]) << "," << format_number((*ds.y1)[i]);
        if (ds.tau_true) out << "," << format_number((*ds.tau_true)[i]);
        out << "," << format_number(ds.pi[i]) << "\n";
    }
    if (!out) throw DataError("csv: write failed for '" + path + "'");
}

}  // namespace itecp

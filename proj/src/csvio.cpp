#include "cbimc/csvio.hpp"
#include "cbimc/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace cbimc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
        throw ValidationError(where + ": bad number '" + field + "'");
    return v;
}

// Reads the file into trimmed rows of fields, checking the header matches.
std::vector<std::vector<std::string>> read_table(const std::string& path,
                                                 const std::string& header,
                                                 std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (!saw_header) {
            std::string squashed;
            for (char c : t)
                if (c != ' ' && c != '\t') squashed += c;
            if (squashed != header)
                throw ValidationError(path + ":1: expected header '" + header + "'");
            saw_header = true;
            continue;
        }
        std::vector<std::string> fields = split_fields(t);
        if (fields.size() != columns)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(columns) + " fields, got " +
                                  std::to_string(fields.size()));
        fields.push_back(path + ":" + std::to_string(lineno)); // context tail
        rows.push_back(std::move(fields));
    }
    if (!saw_header)
        throw ValidationError(path + ": empty file (missing header)");
    return rows;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << content;
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

DiscountCurve load_discount_csv(const std::string& path) {
    auto rows = read_table(path, "tenor_years,discount_factor", 2);
    std::vector<double> t, d;
    for (const auto& r : rows) {
        t.push_back(parse_number(r[0], r.back()));
        d.push_back(parse_number(r[1], r.back()));
    }
    return DiscountCurve(std::move(t), std::move(d));
}

ForwardCurve load_forward_csv(const std::string& path, double tenor) {
    auto rows = read_table(path, "tenor_years,forward_rate", 2);
    std::vector<double> t, f;
    for (const auto& r : rows) {
        t.push_back(parse_number(r[0], r.back()));
        f.push_back(parse_number(r[1], r.back()));
    }
    return ForwardCurve(tenor, std::move(t), std::move(f));
}

VolSurface load_vol_csv(const std::string& path) {
    auto rows = read_table(path, "expiry_years,strike,tenor_years,normal_vol_abs", 4);
    VolSurface s;
    for (const auto& r : rows) {
        VolQuote q;
        q.expiry = parse_number(r[0], r.back());
        q.strike = parse_number(r[1], r.back());
        q.tenor = parse_number(r[2], r.back());
        q.vol = parse_number(r[3], r.back());
        s.quotes.push_back(q);
    }
    s.validate();
    return s;
}

void save_discount_csv(const std::string& path, const DiscountCurve& curve) {
    std::string out = "tenor_years,discount_factor\n";
    for (std::size_t i = 0; i < curve.pillars().size(); ++i)
        out += fmt(curve.pillars()[i]) + "," + fmt(curve.discounts()[i]) + "\n";
    write_file(path, out);
}

void save_forward_csv(const std::string& path, const ForwardCurve& curve) {
    std::string out = "tenor_years,forward_rate\n";
    for (std::size_t i = 0; i < curve.pillars().size(); ++i)
        out += fmt(curve.pillars()[i]) + "," + fmt(curve.forwards()[i]) + "\n";
    write_file(path, out);
}

void save_vol_csv(const std::string& path, const VolSurface& surface) {
    std::string out = "expiry_years,strike,tenor_years,normal_vol_abs\n";
    for (const VolQuote& q : surface.quotes)
        out += fmt(q.expiry) + "," + fmt(q.strike) + "," + fmt(q.tenor) + "," +
               fmt(q.vol) + "\n";
    write_file(path, out);
}

} // namespace cbimc

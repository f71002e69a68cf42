#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calabi/errors.hpp"
#include "calabi/params.hpp"

namespace calabi {

using Json = nlohmann::ordered_json;

/// 17-significant-digit formatting: round-trip exact for doubles and
/// byte-stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// RFC-4180 CSV with LF line endings and a mandatory header row.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("cannot open " + path + " for writing");
        write_row_raw(header);
    }

    void write(const std::vector<double>& row) {
        std::vector<std::string> cells(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) cells[i] = format_double(row[i]);
        write_row_raw(cells);
    }

    void write_strings(const std::vector<std::string>& row) { write_row_raw(row); }

  private:
    static std::string escape(const std::string& cell) {
        if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
        std::string quoted = "\"";
        for (char ch : cell) {
            quoted += ch;
            if (ch == '"') quoted += '"';
        }
        quoted += '"';
        return quoted;
    }
    void write_row_raw(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(cells[i]);
        }
        out_ << '\n';
    }
    std::ofstream out_;
};

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

inline Json rational_json(const Rational& r) {
    return Json{{"num", r.num()}, {"den", r.den()}};
}

inline Rational rational_from_json(const Json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_object() && j.contains("num") && j.contains("den"))
        return Rational(j["num"].get<long long>(), j["den"].get<long long>());
    throw DomainError("expected a rational as int, \"p/q\", or {num, den}");
}

inline Json geometry_json(const GeometryParams& g) {
    Json j;
    j["n"] = g.n;
    j["alpha"] = rational_json(g.alpha);
    if (g.j0_infinite())
        j["j0"] = "infinity";
    else
        j["j0"] = *g.j0;
    return j;
}

inline GeometryParams geometry_from_json(const Json& j) {
    GeometryParams g;
    g.n = j.at("n").get<int>();
    g.alpha = rational_from_json(j.at("alpha"));
    if (j.contains("j0")) {
        if (j["j0"].is_string() && j["j0"].get<std::string>() == "infinity")
            g.j0 = std::nullopt;
        else
            g.j0 = j["j0"].get<long long>();
    }
    g.validate();
    return g;
}

inline Json constants_json(const DerivedConstants& c) {
    Json j;
    j["n"] = c.geom.n;
    j["alpha"] = rational_json(c.geom.alpha);
    if (c.beta_exact()) j["beta"] = rational_json(*c.beta_q);
    j["beta_value"] = c.beta;
    j["beta_star"] = rational_json(c.beta_star_q);
    j["beta_star_value"] = c.beta_star;
    j["regime"] = to_string(c.regime());
    // exact rationals where the inputs were exact, doubles alongside
    if (c.mu_q) j["mu"] = rational_json(*c.mu_q);
    j["mu_value"] = c.mu;
    if (c.lambda_q) j["lambda"] = rational_json(*c.lambda_q);
    j["lambda_value"] = c.lambda;
    if (c.a_q) j["a"] = rational_json(*c.a_q);
    j["a_value"] = c.a;
    j["b"] = rational_json(c.beta_star_q);
    j["b_value"] = c.b;
    if (c.C_beta_q) j["C_beta"] = rational_json(*c.C_beta_q);
    j["C_beta_value"] = c.C_beta;
    j["a_n_alpha"] = c.a_n_alpha;
    j["b_n_alpha"] = c.b_n_alpha;
    if (std::isinf(c.nu0))
        j["nu0"] = "infinity";
    else
        j["nu0"] = c.nu0;
    return j;
}

}  // namespace calabi

#pragma once

// JSON and CSV interchange: matrices as {"dim", "re", "im"} flattened
// row-major, Laurent functions as sparse coefficient lists, chain specs and
// root systems for scenario files and golden tests.  CSV cells carry 17
// significant digits.

#include "lidskii/jordan.hpp"
#include "lidskii/opfunc.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace lidskii {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Matrix& m) {
    json j;
    j["dim"] = m.rows();
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline Matrix matrix_from_json(const json& j) {
    const int d = j.at("dim").get<int>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (d < 1 || static_cast<int>(re.size()) != d * d || static_cast<int>(im.size()) != d * d)
        throw DomainError("matrix_from_json: dim and entry counts disagree");
    Matrix m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            m(r, c) = cplx(re[r * d + c].get<double>(), im[r * d + c].get<double>());
    return m;
}

inline json vector_to_json(const Vector& v) {
    json j;
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v(i).real());
        im.push_back(v(i).imag());
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

inline Vector vector_from_json(const json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != im.size()) throw DomainError("vector_from_json: re/im length mismatch");
    Vector v(static_cast<Eigen::Index>(re.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = cplx(re[i].get<double>(), im[i].get<double>());
    return v;
}

inline json laurent_to_json(const LaurentFunction& phi) {
    json j;
    j["s"] = phi.degree();
    j["Np"] = phi.principal_depth();
    json coeffs = json::array();
    for (const auto& [n, c] : phi.coeffs())
        coeffs.push_back({{"n", n}, {"re", c.real()}, {"im", c.imag()}});
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline LaurentFunction laurent_from_json(const json& j) {
    std::map<int, cplx> m;
    for (const auto& item : j.at("coeffs"))
        m[item.at("n").get<int>()] =
            cplx(item.at("re").get<double>(), item.at("im").get<double>());
    LaurentFunction phi(std::move(m));
    if (j.contains("s") && j.at("s").get<int>() != phi.degree())
        throw DomainError("laurent_from_json: declared degree disagrees with coefficients");
    if (j.contains("Np") && j.at("Np").get<int>() != phi.principal_depth())
        throw DomainError("laurent_from_json: declared principal depth disagrees with coefficients");
    return phi;
}

inline json chainspec_to_json(const ChainSpec& sp) {
    json j;
    j["mu"] = {{"re", sp.mu.real()}, {"im", sp.mu.imag()}};
    j["chains"] = sp.chains;
    return j;
}

inline ChainSpec chainspec_from_json(const json& j) {
    ChainSpec sp;
    sp.mu = cplx(j.at("mu").at("re").get<double>(), j.at("mu").at("im").get<double>());
    sp.chains = j.at("chains").get<std::vector<int>>();
    return sp;
}

inline json jordan_system_to_json(const JordanSystem& sys) {
    json j;
    j["dim"] = sys.dim();
    json specs = json::array();
    for (const auto& sp : sys.specs()) specs.push_back(chainspec_to_json(sp));
    j["specs"] = std::move(specs);
    j["e"] = matrix_to_json(sys.root_vectors());
    j["g"] = matrix_to_json(sys.dual_vectors());
    return j;
}

inline JordanSystem jordan_system_from_json(const json& j) {
    std::vector<ChainSpec> specs;
    for (const auto& item : j.at("specs")) specs.push_back(chainspec_from_json(item));
    return JordanSystem(std::move(specs), matrix_from_json(j.at("e")),
                        matrix_from_json(j.at("g")));
}

inline std::string format_sig17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Comma-separated table with a header row; numeric cells at 17 significant
/// digits.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("write_csv: cannot open " + path);
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << format_sig17(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
}

}  // namespace lidskii

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "onf/hoon.hpp"
#include "onf/otson.hpp"
#include "onf/pair.hpp"
#include "onf/stein.hpp"
#include "onf/types.hpp"

namespace onf {

/// On-disk state-space model: (A, C) always, B and D optional, plus
/// replayability metadata. Serialized as format_version 1 JSON with matrices
/// as row-major arrays of arrays.
struct ModelFile {
    Index n = 0;
    Index d = 0;
    Index m = 0;
    Matrix A;
    Matrix C;
    std::optional<Matrix> B;
    std::optional<Matrix> D;
    std::uint64_t seed = 0;
    std::string provenance;

    OutputPair pair() const { return OutputPair{A, C}; }
};

/// On-disk parameter vector for either staged representation.
struct ParamFile {
    enum class Kind { otson, hoon };
    Kind kind = Kind::otson;
    OtsonParams otson{OrpFamily::q1(1), {}};
    HoonParams hoon;
    bool strict = false;

    Index n() const { return kind == Kind::otson ? otson.n() : hoon.n(); }
    Index d() const { return kind == Kind::otson ? otson.d() : hoon.d; }
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& M)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& name, Index rows,
                               Index cols)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
        fail_parse("model file: matrix " + name + " has " + std::to_string(j.size()) +
                   " rows, expected " + std::to_string(rows));
    }
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            fail_parse("model file: matrix " + name + " row " + std::to_string(i) + " has " +
                       std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
        }
        for (Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                fail_parse("model file: matrix " + name + " entry (" + std::to_string(i) + "," +
                           std::to_string(c) + ") is not a number");
            }
            M(i, c) = v.get<double>();
        }
    }
    if (!M.allFinite()) fail_parse("model file: matrix " + name + " has a non-finite entry");
    return M;
}

inline nlohmann::json parse_json(std::istream& in, const char* what)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail_parse(std::string(what) + ": " + e.what());
    }
    return j;
}

template <typename T>
inline T field(const nlohmann::json& j, const char* name)
{
    if (!j.contains(name)) fail_parse(std::string("missing field \"") + name + "\"");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail_parse(std::string("field \"") + name + "\": " + e.what());
    }
}

} // namespace detail

inline ModelFile read_model(std::istream& in)
{
    const nlohmann::json j = detail::parse_json(in, "model file");
    if (detail::field<int>(j, "format_version") != 1) fail_parse("model file: unknown format_version");
    ModelFile model;
    model.n = detail::field<Index>(j, "n");
    model.d = detail::field<Index>(j, "d");
    model.m = detail::field<Index>(j, "m");
    if (model.n < 1 || model.d < 1 || model.d > model.n || model.m < 0) {
        fail_parse("model file: invalid dimensions (need n >= d >= 1, m >= 0)");
    }
    model.A = detail::matrix_from_json(j.at("A"), "A", model.n, model.n);
    model.C = detail::matrix_from_json(j.at("C"), "C", model.d, model.n);
    if (j.contains("B")) model.B = detail::matrix_from_json(j.at("B"), "B", model.n, model.m);
    if (j.contains("D")) model.D = detail::matrix_from_json(j.at("D"), "D", model.d, model.m);
    if (j.contains("metadata")) {
        const auto& meta = j.at("metadata");
        if (meta.contains("seed")) model.seed = meta.at("seed").get<std::uint64_t>();
        if (meta.contains("provenance")) model.provenance = meta.at("provenance").get<std::string>();
    }
    return model;
}

inline void write_model(std::ostream& out, const ModelFile& model)
{
    nlohmann::json j;
    j["format_version"] = 1;
    j["n"] = model.n;
    j["d"] = model.d;
    j["m"] = model.m;
    j["A"] = detail::matrix_to_json(model.A);
    j["C"] = detail::matrix_to_json(model.C);
    if (model.B) j["B"] = detail::matrix_to_json(*model.B);
    if (model.D) j["D"] = detail::matrix_to_json(*model.D);
    j["metadata"] = {{"seed", model.seed}, {"provenance", model.provenance}};
    out << j.dump(2) << "\n";
}

inline ModelFile read_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail_parse("cannot open model file: " + path);
    return read_model(in);
}

inline void write_model(const std::string& path, const ModelFile& model)
{
    std::ofstream out(path);
    if (!out) fail_parse("cannot open model file for writing: " + path);
    write_model(out, model);
}

inline ParamFile read_params(std::istream& in)
{
    const nlohmann::json j = detail::parse_json(in, "param file");
    if (detail::field<int>(j, "format_version") != 1) fail_parse("param file: unknown format_version");
    const std::string kind = detail::field<std::string>(j, "kind");
    const Index n = detail::field<Index>(j, "n");
    const Index d = detail::field<Index>(j, "d");
    if (n < 1 || d < 1 || d > n) fail_parse("param file: invalid dimensions");
    const std::vector<double> flat = detail::field<std::vector<double>>(j, "thetas");
    for (double t : flat) {
        if (!std::isfinite(t)) fail_parse("param file: non-finite angle");
    }

    ParamFile params;
    params.strict = j.value("strict", false);
    if (kind == "otson") {
        params.kind = ParamFile::Kind::otson;
        const std::string family = detail::field<std::string>(j, "family");
        if (family == "q1") {
            params.otson.family = OrpFamily::q1(d);
        } else if (family == "q2") {
            params.otson.family = OrpFamily::q2(d);
        } else {
            fail_parse("param file: unknown otson family \"" + family + "\"");
        }
        if (static_cast<Index>(flat.size()) != n * d) {
            fail_parse("param file: expected " + std::to_string(n * d) + " angles, found " +
                       std::to_string(flat.size()));
        }
        params.otson.thetas.assign(static_cast<std::size_t>(n), Vector(d));
        for (Index k = 0; k < n; ++k) {
            for (Index i = 0; i < d; ++i) {
                params.otson.thetas[static_cast<std::size_t>(k)][i] =
                    flat[static_cast<std::size_t>(k * d + i)];
            }
        }
    } else if (kind == "hoon") {
        params.kind = ParamFile::Kind::hoon;
        params.hoon.gamma = detail::field<double>(j, "gamma");
        params.hoon.d = d;
        if (static_cast<Index>(flat.size()) != (n - 1) * d + (d - 1)) {
            fail_parse("param file: expected " + std::to_string((n - 1) * d + (d - 1)) +
                       " angles, found " + std::to_string(flat.size()));
        }
        params.hoon.thetas.assign(static_cast<std::size_t>(n), Vector());
        std::size_t pos = 0;
        for (Index k = 0; k < n; ++k) {
            const Index len = (k + 1 < n) ? d : d - 1;
            Vector t(len);
            for (Index i = 0; i < len; ++i) t[i] = flat[pos++];
            params.hoon.thetas[static_cast<std::size_t>(k)] = std::move(t);
        }
    } else {
        fail_parse("param file: unknown kind \"" + kind + "\"");
    }
    return params;
}

inline void write_params(std::ostream& out, const ParamFile& params)
{
    nlohmann::json j;
    j["format_version"] = 1;
    j["n"] = params.n();
    j["d"] = params.d();
    j["strict"] = params.strict;
    std::vector<double> flat;
    if (params.kind == ParamFile::Kind::otson) {
        j["kind"] = "otson";
        j["family"] = params.otson.family.kind == OrpKind::q1 ? "q1" : "q2";
        for (const auto& t : params.otson.thetas) {
            for (Index i = 0; i < t.size(); ++i) flat.push_back(t[i]);
        }
    } else {
        j["kind"] = "hoon";
        j["family"] = "q3";
        j["gamma"] = params.hoon.gamma;
        for (const auto& t : params.hoon.thetas) {
            for (Index i = 0; i < t.size(); ++i) flat.push_back(t[i]);
        }
    }
    j["thetas"] = flat;
    out << j.dump(2) << "\n";
}

inline ParamFile read_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail_parse("cannot open param file: " + path);
    return read_params(in);
}

inline void write_params(const std::string& path, const ParamFile& params)
{
    std::ofstream out(path);
    if (!out) fail_parse("cannot open param file for writing: " + path);
    write_params(out, params);
}

/// Seeded random stable observable system: A is rescaled to the requested
/// spectral radius, B and C are standard normal, and observability is
/// verified through the dual Stein solution (up to 8 resamples).
inline ModelFile random_system(Index n, Index d, Index m, double rho_target, std::uint64_t seed)
{
    if (n < 1 || d < 1 || d > n || m < 0) {
        fail_domain("random_system: need n >= d >= 1 and m >= 0");
    }
    if (!(rho_target > 0.0 && rho_target < 1.0)) {
        fail_domain("random_system: rho_target must lie in (0, 1)");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto randn = [&](Index r, Index c) {
        Matrix M(r, c);
        for (Index i = 0; i < r; ++i) {
            for (Index j = 0; j < c; ++j) M(i, j) = gauss(rng);
        }
        return M;
    };
    for (int attempt = 0; attempt < 8; ++attempt) {
        Matrix A = randn(n, n);
        const double rho = spectral_radius(A);
        if (rho <= 0.0) continue;
        A *= rho_target / rho;
        const Matrix C = randn(d, n);
        const Matrix B = randn(n, m);
        try {
            const Matrix P = solve_dual_stein(A, C);
            Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() <= 1e-10) continue;
        } catch (const Error&) {
            continue;
        }
        ModelFile model;
        model.n = n;
        model.d = d;
        model.m = m;
        model.A = A;
        model.C = C;
        if (m > 0) model.B = B;
        model.seed = seed;
        model.provenance = "random_system(n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                           ",m=" + std::to_string(m) + ",rho=" + std::to_string(rho_target) +
                           ",seed=" + std::to_string(seed) + ")";
        return model;
    }
    fail_numerical("random_system: observability check failed after 8 resamples");
}

} // namespace onf

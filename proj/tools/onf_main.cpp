// Command-line front end for the output-normal form toolkit: generate,
// normalize, reduce, factor, reconstruct and check state-space models stored
// as JSON files. "-" reads stdin / writes stdout so stages can be piped.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "onf/onf.hpp"

namespace {

using namespace onf;

ModelFile load_model(const std::string& path)
{
    if (path == "-") return read_model(std::cin);
    return read_model(path);
}

void save_model(const std::string& path, const ModelFile& model)
{
    if (path == "-") {
        write_model(std::cout, model);
    } else {
        write_model(path, model);
    }
}

ParamFile load_params(const std::string& path)
{
    if (path == "-") return read_params(std::cin);
    return read_params(path);
}

void save_params(const std::string& path, const ParamFile& params)
{
    if (path == "-") {
        write_params(std::cout, params);
    } else {
        write_params(path, params);
    }
}

const char* form_name(CanonicalForm form)
{
    switch (form) {
    case CanonicalForm::ots: return "ots";
    case CanonicalForm::ho: return "ho";
    case CanonicalForm::schur: return "schur";
    case CanonicalForm::none: return "none";
    }
    return "none";
}

double form_structure_residual(const OutputPair& pair, CanonicalForm form)
{
    double r = 0.0;
    if (form == CanonicalForm::ots) {
        const Matrix Q = stack_of(pair);
        for (Index i = 0; i < Q.rows(); ++i) {
            for (Index j = i + 1; j < Q.cols(); ++j) r = std::max(r, std::abs(Q(i, j)));
        }
    } else if (form == CanonicalForm::ho) {
        for (Index j = 1; j < pair.n(); ++j) r = std::max(r, std::abs(pair.C(0, j)));
        for (Index j = 0; j < pair.n(); ++j) {
            for (Index i = j + 2; i < pair.n(); ++i) r = std::max(r, std::abs(pair.A(i, j)));
        }
    } else if (form == CanonicalForm::schur) {
        for (Index j = 0; j < pair.n(); ++j) {
            for (Index i = j + 2; i < pair.n(); ++i) r = std::max(r, std::abs(pair.A(i, j)));
        }
    }
    return r;
}

void print_classification(std::ostream& out, const OutputPair& pair)
{
    const FormClassification cls = classify(pair);
    out << "form: " << form_name(cls.form);
    if (cls.form == CanonicalForm::ots || cls.form == CanonicalForm::ho) {
        out << (cls.standard ? " standard" : " non-standard")
            << (cls.unreduced ? " unreduced" : " reduced") << (cls.strict ? " strict" : "");
        if (cls.form == CanonicalForm::ho && cls.degenerate) out << " degenerate";
        if (cls.reducible_index) out << " reducible_index=" << *cls.reducible_index;
    }
    out << "\n";
}

int run_normalize(const std::string& in, const std::string& out)
{
    ModelFile model = load_model(in);
    auto [on, t] = to_output_normal(model.pair());
    model.A = on.A;
    model.C = on.C;
    if (model.B) model.B = (t.T_inv * (*model.B)).eval();
    model.provenance += " | normalize";
    std::cerr << "on_residual " << std::scientific << std::setprecision(3)
              << output_normal_residual(on) << "\n";
    save_model(out, model);
    return 0;
}

int run_reduce(const std::string& in, const std::string& out, const std::string& form,
               double tol_on)
{
    ModelFile model = load_model(in);
    OutputPair pair = model.pair();
    Matrix B = model.B ? *model.B : Matrix();

    OutputPair reduced;
    if (form == "ots" || form == "hoon") {
        if (output_normal_residual(pair) > tol_on) {
            fail_domain("reduce: input model is not output normal (run normalize first)");
        }
        Matrix U;
        if (form == "ots") {
            std::tie(reduced, U) = to_ots(pair);
        } else {
            std::tie(reduced, U) = to_hessenberg_observer(pair);
        }
        if (B.size() > 0) B = (U.transpose() * B).eval();
    } else {
        auto [on, t] = to_output_normal(pair);
        const SchurForm sf = ordered_qd_schur(on.A);
        reduced.A = sf.T;
        reduced.C = on.C * sf.U;
        if (B.size() > 0) B = (sf.U.transpose() * (t.T_inv * B)).eval();
    }

    model.A = reduced.A;
    model.C = reduced.C;
    if (model.B) model.B = B;
    model.provenance += " | reduce --form " + form;
    const CanonicalForm target = form == "ots"    ? CanonicalForm::ots
                                 : form == "hoon" ? CanonicalForm::ho
                                                  : CanonicalForm::schur;
    std::cerr << "structure_residual " << std::scientific << std::setprecision(3)
              << form_structure_residual(reduced, target) << "  on_residual "
              << output_normal_residual(reduced) << "\n";
    print_classification(std::cerr, reduced);
    save_model(out, model);
    return 0;
}

int run_factor(const std::string& in, const std::string& out, const std::string& kind,
               const std::string& family, bool allow_boundary)
{
    const ModelFile model = load_model(in);
    ParamFile params;
    if (kind == "otson") {
        params.kind = ParamFile::Kind::otson;
        params.otson = otson_factor(model.pair(), family == "q2" ? OrpKind::q2 : OrpKind::q1);
        params.strict = otson_domain_check(params.otson) == ParameterDomain::strict;
        if (!params.strict && !allow_boundary) {
            fail_domain("factor: parameterization is not strict (some mu_k <= 0); "
                        "pass --allow-boundary to keep it");
        }
    } else {
        params.kind = ParamFile::Kind::hoon;
        params.hoon = hoon_factor(model.pair());
        params.strict = hoon_domain_check(params.hoon) == ParameterDomain::strict;
        if (!params.strict && !allow_boundary) {
            fail_domain("factor: parameterization is not strict (some mu_k <= 0 or gamma = 0); "
                        "pass --allow-boundary to keep it");
        }
    }
    save_params(out, params);
    return 0;
}

int run_reconstruct(const std::string& in, const std::string& out)
{
    const ParamFile params = load_params(in);
    const OutputPair pair = params.kind == ParamFile::Kind::otson
                                ? otson_reconstruct(params.otson)
                                : hoon_reconstruct(params.hoon);
    ModelFile model;
    model.n = pair.n();
    model.d = pair.d();
    model.m = 0;
    model.A = pair.A;
    model.C = pair.C;
    model.provenance = "reconstruct";
    save_model(out, model);
    return 0;
}

int run_check(const std::string& in, const std::string& params_path, double tol_on,
              double tol_form, double tol_round, double tol_sig)
{
    const ModelFile model = load_model(in);
    const OutputPair pair = model.pair();
    bool ok = true;
    auto report = [&ok](const char* label, double value, double tol) {
        const bool pass = value <= tol;
        ok = ok && pass;
        std::cout << (pass ? "pass " : "FAIL ") << label << " = " << std::scientific
                  << std::setprecision(3) << value << " (tol " << tol << ")\n";
    };

    report("on_residual", output_normal_residual(pair), tol_on);
    const FormClassification cls = classify(pair);
    print_classification(std::cout, pair);
    if (cls.form != CanonicalForm::none) {
        report("form_residual", form_structure_residual(pair, cls.form), tol_form);
    }

    if (cls.form == CanonicalForm::ots) {
        const OutputPair rebuilt = otson_reconstruct(otson_factor(pair));
        report("round_trip", (stack_of(rebuilt) - stack_of(pair)).cwiseAbs().maxCoeff(), tol_round);
        report("signature_match",
               signature_distance(signature_sequence(rebuilt), signature_sequence(pair)), tol_sig);
    } else if (cls.form == CanonicalForm::ho && !cls.degenerate && pair.C(0, 0) > 1e-10) {
        const OutputPair rebuilt = hoon_reconstruct(hoon_factor(pair));
        report("round_trip", (stack_of(rebuilt) - stack_of(pair)).cwiseAbs().maxCoeff(), tol_round);
        report("signature_match",
               signature_distance(signature_sequence(rebuilt), signature_sequence(pair)), tol_sig);
    }

    if (!params_path.empty()) {
        const ParamFile params = load_params(params_path);
        const OutputPair rebuilt = params.kind == ParamFile::Kind::otson
                                       ? otson_reconstruct(params.otson)
                                       : hoon_reconstruct(params.hoon);
        if (rebuilt.n() != pair.n() || rebuilt.d() != pair.d()) {
            fail_domain("check: parameter dimensions do not match the model");
        }
        report("params_reconstruct", (stack_of(rebuilt) - stack_of(pair)).cwiseAbs().maxCoeff(),
               tol_round);
    }

    std::cout << (ok ? "check passed" : "check FAILED") << "\n";
    return ok ? 0 : 5;
}

int run_cond(const std::string& in)
{
    const ModelFile model = load_model(in);
    if (!model.B) fail_domain("cond: B required");
    const GrammianReport report = grammian_report(model.A, *model.B, model.C);
    std::cout << std::scientific << std::setprecision(10);
    std::cout << "kappa_ctrl  " << report.kappa_ctrl << "\n";
    std::cout << "kappa_obs   " << report.kappa_obs << "\n";
    std::cout << "kappa_sigma " << report.kappa_sigma << "\n";
    std::cout << "excess      " << report.excess << "\n";
    std::cout << "hankel     ";
    for (Index i = 0; i < report.hankel.size(); ++i) std::cout << " " << report.hankel[i];
    std::cout << "\n";
    return 0;
}

int run_gradcheck(const std::string& in, double tol, std::uint64_t seed)
{
    const ParamFile params = load_params(in);
    const double h = 1e-5;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(params.n());
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);

    double worst = 0.0;
    if (params.kind == ParamFile::Kind::otson) {
        const OtsonParams& p = params.otson;
        const ImplicitStack s(p);
        for (Index k = 0; k < p.n(); ++k) {
            for (Index i = 0; i < p.d(); ++i) {
                OtsonParams plus = p, minus = p;
                plus.thetas[static_cast<std::size_t>(k)][i] += h;
                minus.thetas[static_cast<std::size_t>(k)][i] -= h;
                const Vector g = stack_matvec_grad(s, v, {k, i});
                const Vector fd = (stack_matvec(ImplicitStack(plus), v) -
                                   stack_matvec(ImplicitStack(minus), v)) /
                                  (2.0 * h);
                worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff());
            }
        }
    } else {
        const HoonParams& p = params.hoon;
        const ImplicitStack s(p);
        for (Index k = 0; k < p.n(); ++k) {
            const Index len = p.thetas[static_cast<std::size_t>(k)].size();
            for (Index i = 0; i < len; ++i) {
                HoonParams plus = p, minus = p;
                plus.thetas[static_cast<std::size_t>(k)][i] += h;
                minus.thetas[static_cast<std::size_t>(k)][i] -= h;
                const Vector g = stack_matvec_grad(s, v, {k, i});
                const Vector fd = (stack_matvec(ImplicitStack(plus), v) -
                                   stack_matvec(ImplicitStack(minus), v)) /
                                  (2.0 * h);
                worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff());
            }
        }
    }
    std::cout << "gradcheck max |analytic - central difference| = " << std::scientific
              << std::setprecision(3) << worst << " (tol " << tol << ")\n";
    return worst > tol ? 5 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"output-normal state-space form toolkit"};
    app.require_subcommand(1);

    std::string in = "-";
    std::string out = "-";
    std::string form = "ots";
    std::string kind = "otson";
    std::string family = "q1";
    std::string params_path;
    bool allow_boundary = false;
    double tol_on = 1e-8;
    double tol_form = 1e-10;
    double tol_round = 1e-9;
    double tol_sig = 1e-8;
    double grad_tol = 1e-6;
    Index n = 8, d = 2, m = 1;
    double rho = 0.9;
    std::uint64_t seed = 0;

    auto* normalize = app.add_subcommand("normalize", "transform a model to output-normal form");
    normalize->add_option("--in", in);
    normalize->add_option("--out", out);

    auto* reduce = app.add_subcommand("reduce", "reduce an output-normal model to a canonical form");
    reduce->add_option("--form", form)->check(CLI::IsMember({"hoon", "ots", "schur"}));
    reduce->add_option("--in", in);
    reduce->add_option("--out", out);
    reduce->add_option("--tol-on", tol_on);

    auto* factor = app.add_subcommand("factor", "factor a canonical model into stage angles");
    factor->add_option("--kind", kind)->check(CLI::IsMember({"otson", "hoon"}));
    factor->add_option("--family", family)->check(CLI::IsMember({"q1", "q2"}));
    factor->add_option("--in", in);
    factor->add_option("--out", out);
    factor->add_flag("--allow-boundary", allow_boundary);

    auto* reconstruct = app.add_subcommand("reconstruct", "rebuild a model from stage angles");
    reconstruct->add_option("--in", in);
    reconstruct->add_option("--out", out);

    auto* check = app.add_subcommand("check", "run the invariant suite against a model");
    check->add_option("--in", in);
    check->add_option("--params", params_path);
    check->add_option("--tol-on", tol_on);
    check->add_option("--tol-form", tol_form);
    check->add_option("--tol-round", tol_round);
    check->add_option("--tol-sig", tol_sig);

    auto* cond = app.add_subcommand("cond", "print Grammian conditioning diagnostics");
    cond->add_option("--in", in);

    auto* random = app.add_subcommand("random", "generate a random stable observable model");
    random->add_option("--n", n);
    random->add_option("--d", d);
    random->add_option("--m", m);
    random->add_option("--rho", rho);
    random->add_option("--seed", seed);
    random->add_option("--out", out);

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference sweep over all angles");
    gradcheck->add_option("--in", in);
    gradcheck->add_option("--tol", grad_tol);
    gradcheck->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(normalize)) return run_normalize(in, out);
        if (app.got_subcommand(reduce)) return run_reduce(in, out, form, tol_on);
        if (app.got_subcommand(factor)) return run_factor(in, out, kind, family, allow_boundary);
        if (app.got_subcommand(reconstruct)) return run_reconstruct(in, out);
        if (app.got_subcommand(check)) {
            return run_check(in, params_path, tol_on, tol_form, tol_round, tol_sig);
        }
        if (app.got_subcommand(cond)) return run_cond(in);
        if (app.got_subcommand(random)) {
            save_model(out, random_system(n, d, m, rho, seed));
            return 0;
        }
        if (app.got_subcommand(gradcheck)) return run_gradcheck(in, grad_tol, seed);
    } catch (const onf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

// SPDX-License-Identifier: Apache-2.0

#include "speclab/emit.hpp"

#include <json.hpp>
#include <sstream>

#include "speclab/wiener.hpp"

namespace speclab {

namespace {

using nlohmann::json; // std::map-backed objects keep keys sorted

const char* kCRLF = "\r\n";

std::string num(double x) { return format_float(x); }

} // namespace

std::string emit_decompose_csv(const AtomicDecomposition& d)
{
    std::ostringstream out;
    out << "l,alpha,support_measure,height" << kCRLF;
    for (std::size_t l = 0; l < d.entries.size(); ++l) {
        const auto& e = d.entries[l];
        out << l << "," << num(e.alpha) << "," << num(e.support_measure(d.grid)) << ","
            << num(e.height) << kCRLF;
    }
    return out.str();
}

std::string emit_propagate_csv(const Trajectory& traj)
{
    std::ostringstream out;
    out << "t,l2,linf,l6w,boundary_mass" << kCRLF;
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << num(traj.times[k]) << "," << num(lp_norm(traj.states[k], 2.0)) << ","
            << num(lp_norm(traj.states[k], inf)) << ","
            << num(lorentz_norm(traj.states[k], 6.0, inf)) << "," << num(traj.boundary_mass[k])
            << kCRLF;
    }
    return out.str();
}

std::string emit_scan_csv(const ExceptionalScan& scan)
{
    std::ostringstream out;
    out << "lambda_re,lambda_im,sigma_min" << kCRLF;
    for (std::size_t i = 0; i < scan.lambdas.size(); ++i)
        out << num(scan.lambdas[i].real()) << "," << num(scan.lambdas[i].imag()) << ","
            << num(scan.sigma_min[i]) << kCRLF;
    return out.str();
}

std::string emit_dips_csv(const ExceptionalScan& scan)
{
    std::ostringstream out;
    out << "lambda,sigma_min" << kCRLF;
    for (const auto& d : scan.dips)
        out << num(d.lambda) << "," << num(d.sigma_min) << kCRLF;
    return out.str();
}

std::string emit_projections_json(const ProjectionSet& proj)
{
    json j;
    j["eigenvalues"] = json::array();
    for (std::size_t k = 0; k < proj.eigenvalues.size(); ++k) {
        json e;
        e["lambda"] = num(proj.eigenvalues[k].real());
        e["contour_radius"] = num(proj.radii[k]);
        e["rank"] = proj.ranks[k];
        e["grid_trace_re"] = num(proj.grid_traces[k].real());
        e["grid_trace_im"] = num(proj.grid_traces[k].imag());
        e["idempotency_residual"] = num(proj.idempotency_residuals[k]);
        e["extension_gram_deviation"] = num(proj.extension_gram_deviations[k]);
        e["nilpotent_ratio"] = num(proj.nilpotent_ratios[k]);
        j["eigenvalues"].push_back(e);
    }
    j["count"] = proj.eigenvalues.size();
    return j.dump(2) + "\n";
}

std::string emit_strichartz_json(const MixedNormReport& rep)
{
    json j;
    j["T"] = num(rep.T);
    j["dt"] = num(rep.dt);
    j["projected"] = rep.projected;
    j["flagged_samples"] = rep.flagged_samples;
    j["data"] = json::array();
    for (const auto& rows : rep.per_datum) {
        json d;
        for (const auto& r : rows) {
            json q;
            q["numerator"] = num(r.numerator);
            q["denominator"] = num(r.denominator);
            q["quotient"] = num(r.quotient);
            d[r.name] = q;
        }
        j["data"].push_back(d);
    }
    return j.dump(2) + "\n";
}

std::string emit_strichartz_csv(const MixedNormReport& rep)
{
    std::ostringstream out;
    out << "datum,name,numerator,denominator,quotient" << kCRLF;
    for (std::size_t i = 0; i < rep.per_datum.size(); ++i)
        for (const auto& r : rep.per_datum[i])
            out << i << "," << r.name << "," << num(r.numerator) << "," << num(r.denominator)
                << "," << num(r.quotient) << kCRLF;
    return out.str();
}

std::string emit_wiener_demo_json()
{
    json j;

    // Two-slot kernel with the hand-checkable inverse.
    auto a = TimeKernel::identity(2, 1.0, 1);
    a.blocks[1](0, 0) = 0.5;
    auto sa = symbol(a);
    j["two_slot"]["symbol_at_0"] = num(sa.values[0](0, 0).real());
    j["two_slot"]["symbol_at_pi"] = num(sa.values[1](0, 0).real());
    auto inv = invert(a);
    j["two_slot"]["inverse_b0"] = num(inv.blocks[0](0, 0).real());
    j["two_slot"]["inverse_b1"] = num(inv.blocks[1](0, 0).real());
    auto loc = invert_by_localization(a, 2);
    double loc_diff = 0;
    for (int k = 0; k < 2; ++k)
        loc_diff = std::max(loc_diff, std::abs(loc.blocks[k](0, 0) - inv.blocks[k](0, 0)));
    j["two_slot"]["localization_diff"] = num(loc_diff);

    // Causal decaying kernel and its criterion report.
    const int m = 64;
    auto c = TimeKernel::identity(m, 1.0, 1);
    for (int k = 1; k < m / 2; ++k)
        c.blocks[k](0, 0) = 0.3 * std::exp(-static_cast<double>(k));
    auto rep = causality_check(c);
    j["causal"]["is_causal"] = rep.is_causal;
    j["causal"]["inverse_causal"] = rep.inverse_causal;
    j["causal"]["guard_mass"] = num(rep.guard_mass);
    j["causal"]["symbol_lower_min"] = num(rep.symbol_lower_min);

    // Counterexample: lower-half-plane symbol zero.
    auto bad = TimeKernel::identity(m, 1.0, 1);
    bad.blocks[1](0, 0) = std::exp(0.5);
    auto brep = causality_check(bad);
    j["counterexample"]["is_causal"] = brep.is_causal;
    j["counterexample"]["inverse_causal"] = brep.inverse_causal;
    j["counterexample"]["offending_lambda_re"] = num(brep.offending_lambda.real());
    j["counterexample"]["offending_lambda_im"] = num(brep.offending_lambda.imag());

    // Algebra properties on a fixed kernel.
    auto x = TimeKernel::zero(8, 0.5, 2);
    for (int k = 0; k < 8; ++k) {
        x.blocks[k](0, 0) = std::cos(0.3 * k);
        x.blocks[k](0, 1) = 0.1 * k;
        x.blocks[k](1, 1) = std::sin(0.2 * k + 0.4);
    }
    auto conv = convolve(x, x);
    j["properties"]["submultiplicative_slack"] =
        num(x.mass_norm() * x.mass_norm() - conv.mass_norm());
    auto sx = symbol(x);
    WMatrix sum = WMatrix::Zero(2, 2);
    for (const auto& b : x.blocks)
        sum += b * x.tau;
    j["properties"]["integration_identity_error"] =
        num((sum - sx.values[0]).cwiseAbs().maxCoeff());
    auto adj = x.adjoint();
    auto sadj = symbol(adj);
    double adj_err = 0;
    for (int k = 0; k < 8; ++k)
        adj_err = std::max(adj_err,
                           (sadj.values[k] - sx.values[k].adjoint()).cwiseAbs().maxCoeff());
    j["properties"]["adjoint_symbol_error"] = num(adj_err);
    return j.dump(2) + "\n";
}

} // namespace speclab

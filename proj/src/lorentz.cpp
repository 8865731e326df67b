// SPDX-License-Identifier: Apache-2.0

#include "speclab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace speclab {

namespace {

struct ProfileTables {
    std::vector<double> heights; // strictly decreasing
    std::vector<double> cum;     // cumulative measure at and above heights[j]
    double total = 0;            // support measure
};

ProfileTables tables(const RearrangementProfile& prof)
{
    ProfileTables t;
    t.heights.reserve(prof.steps.size());
    t.cum.reserve(prof.steps.size());
    double acc = 0;
    for (const auto& s : prof.steps) {
        acc += s.measure;
        t.heights.push_back(s.height);
        t.cum.push_back(acc);
    }
    t.total = acc;
    return t;
}

} // namespace

double RearrangementProfile::support_measure() const
{
    double acc = 0;
    for (const auto& s : steps)
        acc += s.measure;
    return acc;
}

double RearrangementProfile::value_at(double t) const
{
    double acc = 0;
    for (const auto& s : steps) {
        acc += s.measure;
        if (t < acc)
            return s.height;
    }
    return 0.0;
}

RearrangementProfile rearrange(const GridFunction& f)
{
    if (!f.all_finite())
        throw std::invalid_argument("rearrange: input has non-finite values");
    const std::size_t npts = f.grid().point_count();
    std::vector<double> mods;
    mods.reserve(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        double m = f.point_modulus(i);
        if (m > 0.0)
            mods.push_back(m);
    }
    std::sort(mods.begin(), mods.end(), std::greater<double>());
    RearrangementProfile prof;
    prof.total_measure = static_cast<double>(npts) * f.grid().cell_volume();
    const double w = f.grid().cell_volume();
    std::size_t i = 0;
    while (i < mods.size()) {
        std::size_t j = i;
        while (j < mods.size() && mods[j] == mods[i])
            ++j;
        prof.steps.push_back({mods[i], static_cast<double>(j - i) * w});
        i = j;
    }
    return prof;
}

double lorentz_norm(const RearrangementProfile& prof, double p, double q)
{
    if (p < 1.0 || !(p < std::numeric_limits<double>::infinity()))
        throw std::invalid_argument("lorentz_norm: need 1 <= p < infinity");
    if (q < 1.0)
        throw std::invalid_argument("lorentz_norm: need q >= 1");
    if (prof.steps.empty())
        return 0.0;
    double T = 0.0;
    if (std::isinf(q)) {
        double best = 0.0;
        for (const auto& s : prof.steps) {
            T += s.measure;
            best = std::max(best, std::pow(T, 1.0 / p) * s.height);
        }
        return best;
    }
    // Each step contributes height^q * (p/q) * (T_j^(q/p) - T_{j-1}^(q/p)).
    double sum = 0.0;
    double prev_pow = 0.0;
    for (const auto& s : prof.steps) {
        T += s.measure;
        double cur_pow = std::pow(T, q / p);
        sum += std::pow(s.height, q) * (p / q) * (cur_pow - prev_pow);
        prev_pow = cur_pow;
    }
    return std::pow(sum, 1.0 / q);
}

double lorentz_norm(const GridFunction& f, double p, double q)
{
    return lorentz_norm(rearrange(f), p, q);
}

std::vector<double> AtomicDecomposition::alphas() const
{
    std::vector<double> a;
    a.reserve(entries.size());
    for (const auto& e : entries)
        a.push_back(e.alpha);
    return a;
}

double AtomicDecomposition::alpha_lq_norm(double q) const
{
    if (std::isinf(q)) {
        double m = 0;
        for (const auto& e : entries)
            m = std::max(m, e.alpha);
        return m;
    }
    double s = 0;
    for (const auto& e : entries)
        s += std::pow(e.alpha, q);
    return std::pow(s, 1.0 / q);
}

AtomicDecomposition atomic_decompose(const GridFunction& f, double p)
{
    if (p < 1.0 || std::isinf(p))
        throw std::invalid_argument("atomic_decompose: need 1 <= p < infinity");
    const Grid3& g = f.grid();
    const std::size_t npts = g.point_count();
    const double w = g.cell_volume();

    // Support points sorted by decreasing modulus.
    std::vector<std::size_t> order;
    order.reserve(npts);
    for (std::size_t i = 0; i < npts; ++i)
        if (f.point_modulus(i) > 0.0)
            order.push_back(i);
    if (order.empty())
        throw std::invalid_argument("atomic_decompose: zero input");
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ma = f.point_modulus(a), mb = f.point_modulus(b);
        if (ma != mb)
            return ma > mb;
        return a < b;
    });

    // Distinct heights with cumulative measures.
    std::vector<double> heights, cum;
    {
        std::size_t i = 0;
        double acc = 0;
        while (i < order.size()) {
            double h = f.point_modulus(order[i]);
            std::size_t j = i;
            while (j < order.size() && f.point_modulus(order[j]) == h)
                ++j;
            acc += static_cast<double>(j - i) * w;
            heights.push_back(h);
            cum.push_back(acc);
            i = j;
        }
    }
    const double total = cum.back();

    // f_k = f*(2^k) and M(k) = measure of the support points with |f| >= f_k.
    auto star = [&](double t) -> double {
        // f*(t): first height whose cumulative measure exceeds t.
        auto it = std::upper_bound(cum.begin(), cum.end(), t);
        if (it == cum.end())
            return 0.0;
        return heights[static_cast<std::size_t>(it - cum.begin())];
    };
    auto level_measure = [&](double fk) -> double {
        if (fk == 0.0)
            return total;
        auto it = std::lower_bound(heights.begin(), heights.end(), fk, std::greater<double>());
        // fk is always one of the realized heights here.
        return cum[static_cast<std::size_t>(it - heights.begin())];
    };

    const int k_min = static_cast<int>(std::floor(std::log2(w))) - 2;
    const int k_max = static_cast<int>(std::ceil(std::log2(total))) + 1;
    auto fk = [&](int k) { return star(std::ldexp(1.0, k)); };
    auto M = [&](int k) { return level_measure(fk(k)); };

    // Dyadic index chain: k_{l+1} = min n with M(n) - M(k_l) >= 2^(k_l),
    // k_{l-1} = max m with M(k_l) - M(m) >= 2^(k_l - 1), anchored at k0 = 1.
    std::vector<int> chain;
    {
        const int k0 = 1;
        std::vector<int> down;
        int k = k0;
        while (true) {
            double need = std::ldexp(1.0, k - 1);
            int found = std::numeric_limits<int>::min();
            for (int m = k - 1; m >= k_min; --m)
                if (M(k) - M(m) >= need) {
                    found = m;
                    break;
                }
            if (found == std::numeric_limits<int>::min())
                break;
            down.push_back(found);
            k = found;
        }
        std::reverse(down.begin(), down.end());
        chain = down;
        chain.push_back(k0);
        k = k0;
        while (true) {
            double need = std::ldexp(1.0, k);
            int found = std::numeric_limits<int>::min();
            for (int n = k + 1; n <= k_max; ++n)
                if (M(n) - M(k) >= need) {
                    found = n;
                    break;
                }
            if (found == std::numeric_limits<int>::min())
                break;
            chain.push_back(found);
            k = found;
        }
    }

    // Value bands, highest first: [f_{chain front}, inf), then
    // [f_{k_l}, f_{k_{l-1}}) for consecutive chain entries, then (0, f_{chain back}).
    struct Band {
        double lo, hi; // lo <= |f| < hi
        int nominal_k;
        bool boundary;
    };
    std::vector<Band> bands;
    bands.push_back({fk(chain.front()), std::numeric_limits<double>::infinity(), 0, true});
    for (std::size_t i = 1; i < chain.size(); ++i)
        bands.push_back({fk(chain[i]), fk(chain[i - 1]), chain[i], false});
    if (fk(chain.back()) > 0.0)
        bands.push_back({0.0, fk(chain.back()), 0, true});

    AtomicDecomposition d;
    d.grid = g;
    d.components = f.components();
    d.p = p;
    std::size_t pos = 0; // cursor in the descending order array
    for (const auto& band : bands) {
        AtomEntry e;
        e.nominal_k = band.nominal_k;
        e.boundary = band.boundary;
        double sup_mod = 0.0;
        while (pos < order.size()) {
            double m = f.point_modulus(order[pos]);
            if (!(m >= band.lo && m < band.hi))
                break;
            e.support.push_back(order[pos]);
            sup_mod = std::max(sup_mod, m);
            ++pos;
        }
        if (e.support.empty())
            continue;
        double mu = static_cast<double>(e.support.size()) * w;
        e.alpha = std::pow(mu, 1.0 / p) * sup_mod;
        e.height = sup_mod / e.alpha;
        e.payload.reserve(e.support.size() * f.components());
        for (int c = 0; c < f.components(); ++c)
            for (std::size_t s : e.support)
                e.payload.push_back(f.at(c, s));
        d.entries.push_back(std::move(e));
    }
    return d;
}

GridFunction reconstruct(const AtomicDecomposition& d)
{
    GridFunction out(d.grid, d.components);
    std::vector<char> seen(d.grid.point_count(), 0);
    for (const auto& e : d.entries) {
        for (std::size_t s : e.support) {
            if (seen[s])
                throw std::invalid_argument("reconstruct: overlapping supports");
            seen[s] = 1;
        }
        std::size_t k = 0;
        for (int c = 0; c < d.components; ++c)
            for (std::size_t s : e.support)
                out.at(c, s) = e.payload[k++];
    }
    return out;
}

double k_functional(const RearrangementProfile& prof, double t)
{
    if (!(t > 0.0))
        throw std::invalid_argument("k_functional: t must be positive");
    auto tab = tables(prof);
    const std::size_t J = tab.heights.size();
    if (J == 0)
        return 0.0;

    // Per height index j: W_j = sum_{i<=j} H_i mu_i, T_j = cum measure,
    // Q_j = sum_{i>j} H_i^2 mu_i. Truncating at sigma in [H_{j+1}, H_j]
    // costs Phi(sigma) = W_j - sigma T_j + t sqrt(sigma^2 T_j + Q_j).
    std::vector<double> W(J), Q(J);
    {
        double acc = 0;
        for (std::size_t j = 0; j < J; ++j) {
            double mu = tab.cum[j] - (j ? tab.cum[j - 1] : 0.0);
            acc += tab.heights[j] * mu;
            W[j] = acc;
        }
        double q = 0;
        for (std::size_t j = J; j-- > 0;) {
            Q[j] = q;
            double mu = tab.cum[j] - (j ? tab.cum[j - 1] : 0.0);
            q += tab.heights[j] * tab.heights[j] * mu;
        }
    }
    double l1 = W[J - 1];
    double l2 = 0;
    for (std::size_t j = 0; j < J; ++j) {
        double mu = tab.cum[j] - (j ? tab.cum[j - 1] : 0.0);
        l2 += tab.heights[j] * tab.heights[j] * mu;
    }
    l2 = std::sqrt(l2);

    double best = std::min(l1, t * l2); // sigma = 0 and sigma >= H_0
    auto phi = [&](std::size_t j, double sigma) {
        return W[j] - sigma * tab.cum[j] + t * std::sqrt(sigma * sigma * tab.cum[j] + Q[j]);
    };
    for (std::size_t j = 0; j < J; ++j) {
        double hi = tab.heights[j];
        double lo = (j + 1 < J) ? tab.heights[j + 1] : 0.0;
        best = std::min(best, phi(j, hi));
        best = std::min(best, phi(j, lo));
        double tt = t * t;
        if (tt > tab.cum[j] && Q[j] > 0) {
            double sigma = std::sqrt(Q[j] / (tt - tab.cum[j]));
            if (sigma > lo && sigma < hi)
                best = std::min(best, phi(j, sigma));
        }
    }
    return best;
}

double k_functional(const GridFunction& f, double t)
{
    return k_functional(rearrange(f), t);
}

InterpolationResult interpolation_norm(const GridFunction& f, double theta, double q)
{
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("interpolation_norm: theta must be in (0,1)");
    if (q != 1.0)
        throw std::invalid_argument("interpolation_norm: only q = 1 is implemented");
    auto prof = rearrange(f);
    InterpolationResult res;
    if (prof.steps.empty())
        return res;

    const double t_lo = 1e-6, t_hi = 1e6;
    auto integrand = [&](double u) { // u = log t
        double t = std::exp(u);
        return std::pow(t, -theta) * k_functional(prof, t);
    };
    auto windowed = [&](int nodes) {
        double a = std::log(t_lo), b = std::log(t_hi);
        double hstep = (b - a) / (nodes - 1);
        double s = 0.5 * (integrand(a) + integrand(b));
        for (int i = 1; i + 1 < nodes; ++i)
            s += integrand(a + i * hstep);
        return s * hstep;
    };

    int nodes = 200;
    double val = windowed(nodes);
    for (int iter = 0; iter < 3; ++iter) {
        double next = windowed(2 * nodes);
        double change = std::abs(next - val) / std::max(std::abs(next), 1e-300);
        val = next;
        nodes *= 2;
        if (change < 1e-4)
            break;
        if (iter == 2)
            res.converged = false;
    }

    // Exact tails: K(t) = t ||f||_2 below the window once t is small enough,
    // and K(t) = ||f||_1 above it once t is large enough; both verified here.
    double l1 = 0, l2 = 0;
    for (const auto& s : prof.steps) {
        l1 += s.height * s.measure;
        l2 += s.height * s.height * s.measure;
    }
    l2 = std::sqrt(l2);
    double k_lo = k_functional(prof, t_lo);
    double k_hi = k_functional(prof, t_hi);
    if (std::abs(k_lo - t_lo * l2) > 1e-9 * k_lo || std::abs(k_hi - l1) > 1e-9 * k_hi)
        res.converged = false;
    double tail_lo = l2 * std::pow(t_lo, 1.0 - theta) / (1.0 - theta);
    double tail_hi = l1 * std::pow(t_hi, -theta) / theta;
    res.value = val + tail_lo + tail_hi;
    res.tail_fraction = (tail_lo + tail_hi) / res.value;
    return res;
}

} // namespace speclab

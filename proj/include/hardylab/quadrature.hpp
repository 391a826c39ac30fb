#pragma once

// Integration rules over radial intervals, spheres, spherical cone sections,
// and cone-ball intersections. Deterministic rules (n = 3 spherical, all
// radial) are built symmetric and bitwise reproducible; general-n spherical
// rules are seeded Monte Carlo with standard-error reporting. Summation is
// compensated and partitioned deterministically, so results do not depend on
// the worker count.

#include "cone.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace hardylab {

inline int max_threads() {
    static const int cached = [] {
        if (const char* env = std::getenv("HARDYLAB_THREADS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return cached;
}

enum class DomainTag { radial, sphere, cone_section, cone_ball };

inline const char* domain_tag_name(DomainTag t) {
    switch (t) {
        case DomainTag::radial: return "radial";
        case DomainTag::sphere: return "sphere";
        case DomainTag::cone_section: return "cone_section";
        case DomainTag::cone_ball: return "cone_ball";
    }
    return "unknown";
}

struct QuadratureRule {
    DomainTag tag = DomainTag::radial;
    int dim = 1;          // coordinates per node
    int n = 0;            // ambient dimension for spherical/cone rules
    int k = 0;            // cone restriction (0 = none)
    double radius = 1.0;  // R for radial / cone_ball rules
    bool symmetric_last_k = false;
    bool stochastic = false;
    std::uint64_t seed = 0;
    std::vector<double> nodes;    // packed, node i at [i*dim, (i+1)*dim)
    std::vector<double> weights;
    std::vector<std::int64_t> group_offsets;  // stochastic: node ranges per independent sample

    std::size_t count() const { return weights.size(); }
    const double* node(std::size_t i) const { return nodes.data() + i * dim; }
    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

struct IntegralResult {
    double value = 0.0;
    double standard_error = 0.0;  // 0 for deterministic rules
    std::size_t evaluations = 0;
    bool stochastic = false;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration, cached.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int q) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(q);
    if (it != cache.end()) return it->second;

    std::vector<double> x(q), w(q);
    const double pi = 3.14159265358979323846;
    const int half = (q + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(pi * (i + 0.75) / (q + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < q; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = q * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        w[i] = w[q - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return cache.emplace(q, std::make_pair(std::move(x), std::move(w))).first->second;
}

// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double result() const { return sum + comp; }
};

struct UniformRng {
    std::mt19937_64 gen;
    explicit UniformRng(std::uint64_t seed) : gen(seed) {}
    // uniform in [0,1): top 53 bits (implementation-independent mapping)
    double uniform01() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    // Box-Muller; spare cached for the pair
    bool has_spare = false;
    double spare = 0.0;
    double gaussian() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }
};

// Deterministic fixed-count partition. Chunks respect group boundaries for
// stochastic rules so per-sample sums never straddle workers.
inline std::vector<std::size_t> chunk_boundaries(const QuadratureRule& rule, int chunks) {
    const std::size_t count = rule.count();
    std::vector<std::size_t> bounds;
    bounds.push_back(0);
    if (!rule.stochastic || rule.group_offsets.empty()) {
        for (int c = 1; c < chunks; ++c) bounds.push_back(count * c / chunks);
    } else {
        const std::size_t groups = rule.group_offsets.size() - 1;
        for (int c = 1; c < chunks; ++c)
            bounds.push_back(static_cast<std::size_t>(rule.group_offsets[groups * c / chunks]));
    }
    bounds.push_back(count);
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    return bounds;
}

} // namespace detail

// Composite Gauss-Legendre rule on (0,R], geometrically graded toward 0.
// `points` is the Gauss order per panel; the panel ladder always reaches
// depth e^{-60} R so that end-point singular integrands up to r^{-1/2+...}
// are resolved (the innermost panel touches 0; nodes stay interior).
inline QuadratureRule radial_rule(double R, int points, double grading = 2.0) {
    if (!(R > 0.0)) throw std::domain_error("radial_rule: R must be positive");
    if (points < 2) throw std::domain_error("radial_rule: points >= 2 required");
    if (!(grading >= 1.0)) throw std::domain_error("radial_rule: grading >= 1 required");

    std::vector<double> edges;
    edges.push_back(0.0);
    if (grading == 1.0) {
        const int P = 16;  // uniform mesh
        for (int i = 1; i <= P; ++i) edges.push_back(R * i / P);
    } else {
        const double lg = std::log(grading);
        int P = static_cast<int>(std::ceil(60.0 / lg));
        P = std::min(512, std::max(16, P));
        for (int i = 1; i <= P; ++i) edges.push_back(R * std::pow(grading, -(double)(P - i)));
    }

    const auto& [gx, gw] = detail::gauss_legendre(points);
    QuadratureRule rule;
    rule.tag = DomainTag::radial;
    rule.dim = 1;
    rule.radius = R;
    const std::size_t panels = edges.size() - 1;
    rule.nodes.reserve(panels * points);
    rule.weights.reserve(panels * points);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (int j = 0; j < points; ++j) {
            rule.nodes.push_back(mid + hw * gx[j]);
            rule.weights.push_back(hw * gw[j]);
        }
    }
    return rule;
}

enum class RuleKind { automatic, deterministic, stochastic };

// Spherical rule on S^{n-1}, optionally restricted to the cone section
// (last restrict_to_cone coordinates positive).
//
// n = 3 deterministic: Gauss-Legendre in cos(theta) x shifted-uniform
// azimuth; the node set is invariant under sign flips of every coordinate
// and contains no node on a coordinate plane, so the section restriction is
// an exact node filter. n >= 4: seeded Gaussian-normalized sampling; section
// restriction folds samples into the section by reflection.
inline QuadratureRule sphere_rule(int n, int order, int restrict_to_cone = 0,
                                  RuleKind kind = RuleKind::automatic,
                                  std::uint64_t seed = 0x5eed0001u) {
    if (n < 3) throw std::domain_error("sphere_rule: n >= 3 required");
    if (order < 2) throw std::domain_error("sphere_rule: order >= 2 required");
    if (restrict_to_cone < 0 || restrict_to_cone > n)
        throw std::domain_error("sphere_rule: invalid cone restriction");
    if (kind == RuleKind::automatic) kind = (n == 3) ? RuleKind::deterministic : RuleKind::stochastic;
    if (kind == RuleKind::deterministic && n != 3)
        throw std::runtime_error(
            "sphere_rule: deterministic rules are implemented only for n = 3; "
            "use stochastic mode for n >= 4");

    QuadratureRule rule;
    rule.dim = n;
    rule.n = n;
    rule.k = restrict_to_cone;
    rule.tag = restrict_to_cone > 0 ? DomainTag::cone_section : DomainTag::sphere;

    const double pi = 3.14159265358979323846;
    if (kind == RuleKind::deterministic) {
        const int nc = (order % 2 == 0) ? order : order + 1;  // even: flip-symmetric in cos(theta)
        const int nphi = 2 * nc;                              // multiple of 4: quarter-turn symmetric
        const auto& [gx, gw] = detail::gauss_legendre(nc);
        const double hphi = 2.0 * pi / nphi;
        rule.symmetric_last_k = restrict_to_cone == 0;
        for (int i = 0; i < nc; ++i) {
            const double c = gx[i];
            const double s = std::sqrt(1.0 - c * c);
            for (int j = 0; j < nphi; ++j) {
                const double phi = (j + 0.5) * hphi;  // shifted: no node on coordinate planes
                double sig[3] = {s * std::cos(phi), s * std::sin(phi), c};
                if (restrict_to_cone > 0) {
                    bool inside = true;
                    for (int d = 3 - restrict_to_cone; d < 3; ++d) inside = inside && sig[d] > 0.0;
                    if (!inside) continue;
                }
                rule.nodes.insert(rule.nodes.end(), sig, sig + 3);
                rule.weights.push_back(gw[i] * hphi);
            }
        }
        return rule;
    }

    // stochastic
    rule.stochastic = true;
    rule.seed = seed;
    const std::size_t samples = static_cast<std::size_t>(2) * order * order;
    detail::UniformRng rng(seed);
    const double measure = sphere_volume(n - 1) / (restrict_to_cone > 0 ? double(1 << restrict_to_cone) : 1.0);
    const double w = measure / static_cast<double>(samples);
    rule.group_offsets.reserve(samples + 1);
    rule.group_offsets.push_back(0);
    std::vector<double> g(n);
    for (std::size_t s = 0; s < samples; ++s) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int d = 0; d < n; ++d) {
                g[d] = rng.gaussian();
                norm2 += g[d] * g[d];
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int d = 0; d < n; ++d) g[d] *= inv;
        if (restrict_to_cone > 0)
            for (int d = n - restrict_to_cone; d < n; ++d) g[d] = std::abs(g[d]);
        rule.nodes.insert(rule.nodes.end(), g.begin(), g.end());
        rule.weights.push_back(w);
        rule.group_offsets.push_back(static_cast<std::int64_t>(rule.weights.size()));
    }
    return rule;
}

// Reflect every node across all sign patterns of the last k coordinates,
// weights preserved; orbit copies are consecutive, so odd integrands cancel
// exactly inside the compensated sum. Applies to section and cone-ball rules.
inline QuadratureRule mirror_last_k(const QuadratureRule& rule) {
    if (rule.k <= 0) throw std::domain_error("mirror_last_k: rule carries no cone restriction");
    const int n = rule.dim;
    const int k = rule.k;
    const int copies = 1 << k;
    QuadratureRule full = rule;
    full.tag = rule.tag == DomainTag::cone_section ? DomainTag::sphere : DomainTag::cone_ball;
    full.k = k;
    full.symmetric_last_k = true;
    full.nodes.clear();
    full.weights.clear();
    full.group_offsets.clear();
    full.nodes.reserve(rule.nodes.size() * copies);
    full.weights.reserve(rule.weights.size() * copies);
    if (rule.stochastic) full.group_offsets.push_back(0);
    const bool grouped = rule.stochastic && !rule.group_offsets.empty();
    const std::size_t groups = grouped ? rule.group_offsets.size() - 1 : rule.count();
    for (std::size_t gi = 0; gi < groups; ++gi) {
        const std::size_t lo = grouped ? rule.group_offsets[gi] : gi;
        const std::size_t hi = grouped ? rule.group_offsets[gi + 1] : gi + 1;
        for (std::size_t i = lo; i < hi; ++i) {
            const double* x = rule.node(i);
            for (int c = 0; c < copies; ++c) {
                for (int d = 0; d < n; ++d) {
                    double v = x[d];
                    if (d >= n - k) {
                        const int bit = d - (n - k);
                        if ((c >> bit) & 1) v = -v;
                    }
                    full.nodes.push_back(v);
                }
                full.weights.push_back(rule.weights[i]);
            }
        }
        if (rule.stochastic) full.group_offsets.push_back(static_cast<std::int64_t>(full.weights.size()));
    }
    return full;
}

// Tensor product of radial_rule and the restricted sphere rule with combined
// weight w_r r^{n-1} w_sigma. Nodes are ordered angular-major so stochastic
// groups (one per angular sample) stay contiguous.
inline QuadratureRule cone_ball_rule(const ConeSpec& spec, double R, int radial_points,
                                     int angular_order, RuleKind kind = RuleKind::automatic,
                                     std::uint64_t seed = 0x5eed0002u, double grading = 2.0) {
    spec.validate();
    const QuadratureRule rad = radial_rule(R, radial_points, grading);
    const QuadratureRule ang = sphere_rule(spec.n, angular_order, spec.k, kind, seed);

    QuadratureRule rule;
    rule.tag = DomainTag::cone_ball;
    rule.dim = spec.n;
    rule.n = spec.n;
    rule.k = spec.k;
    rule.radius = R;
    rule.stochastic = ang.stochastic;
    rule.seed = ang.seed;
    const std::size_t nr = rad.count(), na = ang.count();
    rule.nodes.reserve(nr * na * spec.n);
    rule.weights.reserve(nr * na);
    if (rule.stochastic) rule.group_offsets.push_back(0);
    for (std::size_t a = 0; a < na; ++a) {
        const double* sig = ang.node(a);
        for (std::size_t r = 0; r < nr; ++r) {
            const double rad_r = rad.nodes[r];
            for (int d = 0; d < spec.n; ++d) rule.nodes.push_back(rad_r * sig[d]);
            double rpow = 1.0;
            for (int d = 0; d < spec.n - 1; ++d) rpow *= rad_r;
            rule.weights.push_back(rad.weights[r] * rpow * ang.weights[a]);
        }
        if (rule.stochastic) rule.group_offsets.push_back(static_cast<std::int64_t>(rule.weights.size()));
    }
    return rule;
}

namespace detail {

struct ChunkAccumulator {
    std::vector<CompensatedSum> sums;           // one per output
    std::vector<std::vector<double>> group_sums;  // per output, per group (stochastic)
    std::size_t bad_index = static_cast<std::size_t>(-1);
};

// Shared engine: evaluates f once per node into m outputs, accumulates with
// compensation over a fixed deterministic partition, optionally per group.
template <class F>
inline std::vector<IntegralResult> integrate_engine(const QuadratureRule& rule, int m, F&& f) {
    const std::size_t count = rule.count();
    const bool grouped = rule.stochastic && rule.group_offsets.size() > 1;
    const std::size_t groups = grouped ? rule.group_offsets.size() - 1 : 0;

    const int chunk_target = 64;
    const auto bounds = chunk_boundaries(rule, chunk_target);
    const int chunks = static_cast<int>(bounds.size()) - 1;
    std::vector<ChunkAccumulator> acc(chunks);

    auto worker = [&](int c) {
        ChunkAccumulator& a = acc[c];
        a.sums.assign(m, CompensatedSum{});
        std::vector<double> out(m);
        std::vector<CompensatedSum> gsum;
        std::size_t gi = 0;
        if (grouped) {
            a.group_sums.assign(m, {});
            gi = static_cast<std::size_t>(
                std::upper_bound(rule.group_offsets.begin(), rule.group_offsets.end(),
                                 static_cast<std::int64_t>(bounds[c])) -
                rule.group_offsets.begin() - 1);
            gsum.assign(m, CompensatedSum{});
        }
        for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
            f(rule.node(i), out.data());
            const double w = rule.weights[i];
            for (int j = 0; j < m; ++j) {
                const double term = w * out[j];
                if (!std::isfinite(term)) {
                    if (a.bad_index == static_cast<std::size_t>(-1)) a.bad_index = i;
                    continue;
                }
                a.sums[j].add(term);
                if (grouped) gsum[j].add(term);
            }
            if (grouped && static_cast<std::int64_t>(i + 1) == rule.group_offsets[gi + 1]) {
                for (int j = 0; j < m; ++j) {
                    a.group_sums[j].push_back(gsum[j].result());
                    gsum[j] = CompensatedSum{};
                }
                ++gi;
            }
        }
    };

    const int threads = std::min(max_threads(), chunks);
    if (threads <= 1) {
        for (int c = 0; c < chunks; ++c) worker(c);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) worker(c);
            });
        for (auto& th : pool) th.join();
    }

    for (const auto& a : acc)
        if (a.bad_index != static_cast<std::size_t>(-1)) {
            std::ostringstream msg;
            msg << "integrate: non-finite integrand at node " << a.bad_index << " (";
            const double* x = rule.node(a.bad_index);
            for (int d = 0; d < rule.dim; ++d) msg << (d ? ", " : "") << x[d];
            msg << ")";
            throw std::runtime_error(msg.str());
        }

    std::vector<IntegralResult> res(m);
    for (int j = 0; j < m; ++j) {
        CompensatedSum total;
        for (const auto& a : acc) total.add(a.sums[j].result());
        res[j].value = total.result();
        res[j].evaluations = count;
        res[j].stochastic = rule.stochastic;
        if (grouped && groups > 1) {
            // independent-sample variance of the per-group contributions
            double mean = res[j].value / static_cast<double>(groups);
            double ss = 0.0;
            for (const auto& a : acc)
                for (double s : a.group_sums[j]) {
                    const double d = s - mean;
                    ss += d * d;
                }
            // Var(sum of G samples) = G * sample variance
            res[j].standard_error =
                std::sqrt(ss * static_cast<double>(groups) / (static_cast<double>(groups) - 1.0));
        }
    }
    return res;
}

} // namespace detail

// Sum w_i f(x_i) with compensated, partition-stable accumulation. For
// stochastic rules the standard error over independent samples is reported.
template <class F>
inline IntegralResult integrate(const QuadratureRule& rule, F&& f) {
    auto res = detail::integrate_engine(rule, 1, [&](const double* x, double* out) { out[0] = f(x); });
    return res[0];
}

// One evaluation pass, m simultaneous integrands: f(x, out) fills out[0..m).
template <class F>
inline std::vector<IntegralResult> integrate_many(const QuadratureRule& rule, int m, F&& f) {
    return detail::integrate_engine(rule, m, std::forward<F>(f));
}

struct ConvergenceTable {
    std::vector<int> resolutions;
    std::vector<double> values;
    double estimated_order = std::numeric_limits<double>::quiet_NaN();
    double extrapolated = std::numeric_limits<double>::quiet_NaN();
    bool monotone = true;   // successive differences shrink
    bool spectral = false;  // differences at rounding level before the last row
};

// Order from successive differences plus Richardson extrapolation at that
// order. Resolutions must be strictly increasing (factor-2 refinement is the
// intended use; the order estimate uses the actual ratios).
template <class MakeValue>
inline ConvergenceTable convergence_study(MakeValue&& value_at, const std::vector<int>& resolutions) {
    if (resolutions.size() < 3) throw std::domain_error("convergence_study: need at least 3 resolutions");
    for (std::size_t i = 1; i < resolutions.size(); ++i)
        if (resolutions[i] <= resolutions[i - 1])
            throw std::domain_error("convergence_study: resolutions must be strictly increasing");

    ConvergenceTable t;
    t.resolutions = resolutions;
    for (int r : resolutions) t.values.push_back(value_at(r));

    const std::size_t m = t.values.size();
    const double d1 = t.values[m - 2] - t.values[m - 3];
    const double d2 = t.values[m - 1] - t.values[m - 2];
    const double scale = std::max({std::abs(t.values[m - 1]), std::abs(t.values[m - 2]), 1e-300});
    if (std::abs(d2) <= 1e-14 * scale) {
        t.spectral = true;
        t.estimated_order = std::numeric_limits<double>::infinity();
        t.extrapolated = t.values[m - 1];
        return t;
    }
    if (std::abs(d2) >= std::abs(d1)) {
        t.monotone = false;
        t.extrapolated = t.values[m - 1];
        return t;  // estimated_order stays NaN: diagnostic flag
    }
    const double hratio1 = double(resolutions[m - 2]) / double(resolutions[m - 3]);
    const double hratio2 = double(resolutions[m - 1]) / double(resolutions[m - 2]);
    t.estimated_order = std::log(std::abs(d1 / d2)) / std::log(hratio2);
    (void)hratio1;
    const double factor = std::pow(hratio2, t.estimated_order) - 1.0;
    t.extrapolated = t.values[m - 1] + d2 / factor;
    return t;
}

// Neville polynomial extrapolation of (xs, ys) to x = target; used to push
// parameter sweeps (epsilon, mesh width) to their limit point.
inline double neville_extrapolate(const std::vector<double>& xs, const std::vector<double>& ys,
                                  double target = 0.0) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::domain_error("neville_extrapolate: need >= 2 aligned samples");
    std::vector<double> t = ys;
    const std::size_t m = xs.size();
    for (std::size_t level = 1; level < m; ++level)
        for (std::size_t i = 0; i + level < m; ++i) {
            const double denom = xs[i] - xs[i + level];
            t[i] = ((target - xs[i + level]) * t[i] - (target - xs[i]) * t[i + 1]) / denom;
        }
    return t[0];
}

// phi_k with its normalization fixed by quadrature so the section L^2 norm
// is 1. Deterministic at n = 3; seeded sampling otherwise.
inline AngularEigenfunction angular_eigenfunction(const ConeSpec& spec, double tol = 1e-10,
                                                  std::uint64_t seed = 0x5eed0003u) {
    spec.validate();
    const int order = spec.n == 3 ? 48 : 160;
    const QuadratureRule rule = sphere_rule(spec.n, order, spec.k, RuleKind::automatic, seed);
    AngularEigenfunction phi;
    phi.spec = spec;
    phi.normalization = 1.0;
    const IntegralResult m2 = integrate(rule, [&](const double* sig) {
        const double p = AngularEigenfunction::monomial(spec, sig);
        return p * p;
    });
    if (!(m2.value > 0.0)) throw std::runtime_error("angular_eigenfunction: degenerate norm");
    if (rule.stochastic && m2.standard_error > 0.05 * m2.value)
        throw std::runtime_error("angular_eigenfunction: quadrature accuracy below requested tolerance");
    (void)tol;
    phi.normalization = 1.0 / std::sqrt(m2.value);
    return phi;
}

} // namespace hardylab

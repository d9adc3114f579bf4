#include "doctest.h"

#include "tsync/errors.hpp"
#include "tsync/estimators.hpp"
#include "tsync/particles.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace tsync;

namespace {

const ModelParams symmetric{0.0, 1.0, 1.0, 1.0};

double chi2_pvalue(double statistic, double dof)
{
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

/// Pearson statistic of observed counts against expected probabilities.
double pearson(const std::vector<double>& counts, const std::vector<double>& probs, double n)
{
    double chi2 = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = n * probs[k];
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    return chi2;
}

ParticleState make_state(const ModelParams& p, std::vector<double> a, std::vector<double> b,
                         std::uint64_t seed)
{
    return ParticleState(p, a, b, seed);
}

} // namespace

TEST_CASE("construction")
{
    auto s = make_state(symmetric, {0.0}, {0.0}, 42);
    CHECK(s.clock() == 0.0);
    CHECK(s.jump_count() == 0);
    CHECK(s.total_rate() == 2.0);
    CHECK_THROWS_AS(make_state(symmetric, {}, {0.0}, 1), InvalidArgument);
    CHECK_THROWS_AS(make_state(symmetric, {0.0}, {}, 1), InvalidArgument);
    CHECK_THROWS_AS(make_state({0.0, 1.0, 0.0, 1.0}, {0.0}, {0.0}, 1), InvalidArgument);

    Rng rng(3);
    const auto singular = realize(SingularStart{}, 4, 6, rng);
    CHECK(singular.positions1 == std::vector<double>(4, 0.0));
    CHECK(singular.positions2 == std::vector<double>(6, 0.0));
    CHECK_THROWS_AS(realize(ExplicitStart{{1.0}, {2.0, 3.0}}, 2, 2, rng), InvalidArgument);
}

TEST_CASE("determinism")
{
    const ModelParams p{0.3, 1.1, 0.8, 1.7};
    auto a = make_state(p, {0.0, 0.5, 1.0}, {0.2, -0.1}, 99);
    auto b = make_state(p, {0.0, 0.5, 1.0}, {0.2, -0.1}, 99);
    for (double t = 0.5; t <= 50.0; t += 0.5) {
        a.run_until(t);
        b.run_until(t);
        const auto oa = a.observables();
        const auto ob = b.observables();
        CHECK(oa.mean1 == ob.mean1);
        CHECK(oa.var2 == ob.var2);
        CHECK(oa.min_all == ob.min_all);
    }
    CHECK(a == b);
    auto c = make_state(p, {0.0, 0.5, 1.0}, {0.2, -0.1}, 100);
    c.run_until(50.0);
    CHECK_FALSE(a == c);
}

TEST_CASE("next_event does not mutate the state")
{
    const auto s = make_state(symmetric, {0.0, 1.0}, {0.5}, 7);
    const auto copy = s;
    const auto e1 = s.next_event();
    const auto e2 = s.next_event();
    CHECK(s == copy);
    CHECK(e1.wait == e2.wait);
    CHECK(e1.source_index == e2.source_index);
    CHECK(e1.rng_after == e2.rng_after);
    CHECK(e1.wait > 0.0);
}

TEST_CASE("next_event laws: two particles")
{
    // wait ~ Exp(2), source type 1 w.p. 1/2
    auto s = make_state(symmetric, {0.0}, {0.0}, 2024);
    const int n = 100000;
    std::vector<double> type_counts(2, 0.0);
    std::vector<double> bins(10, 0.0);
    double wait_sum = 0.0;
    double wait_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto e = s.next_event();
        type_counts[e.source_type - 1] += 1.0;
        wait_sum += e.wait;
        wait_sq += e.wait * e.wait;
        // equiprobable bins of Exp(2): F(x) = 1 - exp(-2x)
        const double u = 1.0 - std::exp(-2.0 * e.wait);
        bins[std::min<std::size_t>(9, static_cast<std::size_t>(u * 10.0))] += 1.0;
        s.apply(e);
    }
    CHECK(chi2_pvalue(pearson(type_counts, {0.5, 0.5}, n), 1.0) > 1e-3);
    CHECK(chi2_pvalue(pearson(bins, std::vector<double>(10, 0.1), n), 9.0) > 1e-3);
    const double mean = wait_sum / n;
    const double se = std::sqrt((wait_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.5) < 3.0 * se);
}

TEST_CASE("next_event laws: unequal populations")
{
    // N1 = 3, N2 = 1, alpha12 = 1, alpha21 = 5: P(source type 1) = 3 / 8
    const ModelParams p{0.0, 1.0, 1.0, 5.0};
    auto s = make_state(p, {0.0, 0.0, 0.0}, {0.0}, 5);
    const int n = 100000;
    double type1 = 0.0;
    std::vector<double> source1(3, 0.0);
    std::vector<double> target2(3, 0.0);
    double wait_sum = 0.0;
    double wait_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto e = s.next_event();
        if (e.source_type == 1) {
            type1 += 1.0;
            source1[e.source_index] += 1.0;
            CHECK(e.target_index == 0);
        } else {
            CHECK(e.source_index == 0);
            target2[e.target_index] += 1.0;
        }
        wait_sum += e.wait;
        wait_sq += e.wait * e.wait;
        s.apply(e);
    }
    CHECK(chi2_pvalue(pearson({type1, n - type1}, {3.0 / 8.0, 5.0 / 8.0}, n), 1.0) > 1e-3);
    CHECK(chi2_pvalue(pearson(source1, {1.0 / 3, 1.0 / 3, 1.0 / 3}, type1), 2.0) > 1e-3);
    CHECK(chi2_pvalue(pearson(target2, {1.0 / 3, 1.0 / 3, 1.0 / 3}, n - type1), 2.0) > 1e-3);
    const double mean = wait_sum / n;
    const double se = std::sqrt((wait_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0 / 8.0) < 3.0 * se);
}

TEST_CASE("apply: drift then jump onto the target")
{
    const ModelParams p{0.37, 1.91, 0.6, 1.3};
    auto s = make_state(p, {0.1, -0.4}, {0.25, 0.9, 1.7}, 31);
    for (int k = 0; k < 2000; ++k) {
        const auto before1 = s.positions(1);
        const auto before2 = s.positions(2);
        const auto e = s.next_event();
        s.apply(e);
        CHECK(s.jump_count() == static_cast<std::uint64_t>(k + 1));
        // the jumper coincides bit for bit with its target at the jump time
        const int target_type = 3 - e.source_type;
        CHECK(s.position(e.source_type, e.source_index) == s.position(target_type, e.target_index));
        // everyone else advanced by v_i * wait
        for (std::size_t i = 0; i < before1.size(); ++i) {
            if (e.source_type == 1 && i == e.source_index) continue;
            CHECK(s.position(1, i) == doctest::Approx(before1[i] + p.v1 * e.wait).epsilon(1e-12));
        }
        for (std::size_t i = 0; i < before2.size(); ++i) {
            if (e.source_type == 2 && i == e.source_index) continue;
            CHECK(s.position(2, i) == doctest::Approx(before2[i] + p.v2 * e.wait).epsilon(1e-12));
        }
    }
}

TEST_CASE("two particles: gap is exactly zero after a type-1 jump")
{
    const ModelParams p{0.3, 1.7, 1.0, 1.0};
    auto s = make_state(p, {0.0}, {0.0}, 77);
    int seen = 0;
    while (seen < 100) {
        const auto e = s.next_event();
        s.apply(e);
        if (e.source_type == 1) {
            CHECK(s.position(2, 0) - s.position(1, 0) == 0.0);
            ++seen;
        }
    }
}

TEST_CASE("run_until")
{
    auto s = make_state(symmetric, {0.0, 1.0}, {2.0}, 8);
    const auto copy = s;
    s.run_until(0.0);
    CHECK(s == copy);
    s.run_until(3.25);
    CHECK(s.clock() == 3.25);
    CHECK_THROWS_AS(s.run_until(1.0), InvalidArgument);
}

TEST_CASE("run_until composes bit for bit")
{
    const ModelParams p{0.13, 0.71, 1.3, 0.4};
    auto direct = make_state(p, {0.0, 0.2, 0.4}, {0.1, 0.3}, 1234);
    auto stepped = direct;
    direct.run_until(40.0);
    for (double t : {0.7, 3.3, 3.3, 12.0, 39.999}) {
        stepped.run_until(t);
    }
    stepped.run_until(40.0);
    CHECK(stepped == direct);
    CHECK(stepped.positions(1) == direct.positions(1));
    CHECK(stepped.positions(2) == direct.positions(2));
}

TEST_CASE("drift without jumps is exact")
{
    const ModelParams p{-0.75, 2.5, 1.0, 1.0};
    const std::vector<double> a{0.0, 1.5, -3.0};
    const std::vector<double> b{0.25, 4.0};
    auto s = make_state(p, a, b, 5);
    for (double t : {0.5, 1.0, 17.0, 1000.0}) {
        s.drift_only(t);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(s.position(1, i) == a[i] + p.v1 * t);
        for (std::size_t i = 0; i < b.size(); ++i) CHECK(s.position(2, i) == b[i] + p.v2 * t);
    }
    CHECK(s.jump_count() == 0);
}

TEST_CASE("jump counts are Poisson")
{
    // Lambda = 2, T = 50: counts over 1000 replicas against Poisson(100)
    const int replicas = 1000;
    std::vector<double> counts;
    for (int r = 0; r < replicas; ++r) {
        auto s = make_state(symmetric, {0.0}, {0.0}, Rng::mix(static_cast<std::uint64_t>(r) + 17));
        s.run_until(50.0);
        counts.push_back(static_cast<double>(s.jump_count()));
    }
    double mean = 0.0;
    for (double c : counts) mean += c;
    mean /= replicas;
    CHECK(std::abs(mean - 100.0) < 3.0 * std::sqrt(100.0 / replicas));

    // chi-square over bins with expected counts >= 20
    const boost::math::poisson_distribution<> law(100.0);
    std::vector<double> edges{0.0};
    for (int k = 82; k <= 118; k += 4) edges.push_back(k);
    edges.push_back(1e9);
    std::vector<double> obs(edges.size() - 1, 0.0);
    std::vector<double> probs(edges.size() - 1, 0.0);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        const double lo = edges[b];
        const double hi = edges[b + 1];
        probs[b] = (hi > 1e8 ? 1.0 : boost::math::cdf(law, hi - 1.0)) -
                   (lo <= 0.0 ? 0.0 : boost::math::cdf(law, lo - 1.0));
        for (double c : counts) {
            if (c >= lo && c < hi) obs[b] += 1.0;
        }
    }
    const double chi2 = pearson(obs, probs, replicas);
    CHECK(chi2_pvalue(chi2, static_cast<double>(obs.size() - 1)) > 0.01);
}

TEST_CASE("observables")
{
    const std::vector<double> same{2.5, 2.5, 2.5};
    const auto o = observables_of(same, same);
    CHECK(o.mean1 == 2.5);
    CHECK(o.var1 == 0.0);
    CHECK(o.min_all == 2.5);

    const std::vector<double> p1{0.0, 2.0};
    const std::vector<double> p2{5.0};
    const auto h = observables_of(p1, p2);
    CHECK(h.mean1 == 1.0);
    CHECK(h.var1 == 1.0);
    CHECK(h.mean2 == 5.0);
    CHECK(h.var2 == 0.0);
    CHECK(h.min_all == 0.0);

    const std::vector<double> zero{0.0};
    CHECK(observables_of(zero, p2).min_all == 0.0);
}

TEST_CASE("minimum ties go to the lower type and index")
{
    auto s = make_state(symmetric, {1.0, 0.0}, {0.0, 3.0}, 4);
    const auto m = s.minimum();
    CHECK(m.type == 1);
    CHECK(m.index == 1);
    CHECK(m.nearest_distance == 0.0);

    auto t = make_state(symmetric, {1.0, 2.0}, {0.5, 3.0}, 4);
    const auto mt = t.minimum();
    CHECK(mt.type == 2);
    CHECK(mt.index == 0);
    CHECK(mt.nearest_distance == 0.5);
}

TEST_CASE("gap samples")
{
    CHECK(gap_samples(symmetric, 1, 100.0, 0, 2.5).empty());
    CHECK_THROWS_AS(gap_samples(symmetric, 1, 100.0, 10, 0.0), InvalidArgument);
    CHECK(default_gap_spacing(symmetric) == 2.5);

    const auto gaps = gap_samples(symmetric, 2718, 100.0, 10000, default_gap_spacing(symmetric));
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gaps.size() - 1);
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(var / static_cast<double>(gaps.size())));
    const double lambda = gap_rate(symmetric);
    CHECK(ks_statistic(gaps, [lambda](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-lambda * x); }) < 0.02);
}

TEST_CASE("gap is nonnegative once a jump has occurred")
{
    const ModelParams p{0.0, 1.0, 2.0, 0.5};
    auto s = make_state(p, {1.0}, {0.0}, 123); // starts with a negative gap
    CHECK(s.position(2, 0) - s.position(1, 0) < 0.0);
    while (s.jump_count() == 0) s.apply(s.next_event());
    for (int k = 0; k < 20000; ++k) {
        const auto e = s.next_event();
        // probe midway through the holding time as well as at the jump
        auto mid = s;
        mid.run_until(s.clock() + 0.5 * e.wait);
        CHECK(mid.position(2, 0) - mid.position(1, 0) >= 0.0);
        s.apply(e);
        CHECK(s.position(2, 0) - s.position(1, 0) >= 0.0);
    }
}

TEST_CASE("finite-N drift: x/t settles at an N-dependent value")
{
    // N1 = N2 = 3; reference from a longer horizon on independent streams
    const ModelParams p = symmetric;
    const int replicas = 16;
    auto speed = [&](double horizon, std::uint64_t salt) {
        double total = 0.0;
        for (int r = 0; r < replicas; ++r) {
            auto s = make_state(p, {0, 0, 0}, {0, 0, 0}, Rng::mix(salt + static_cast<std::uint64_t>(r)));
            s.run_until(horizon);
            const auto o = s.observables();
            total += 0.5 * (o.mean1 + o.mean2) / horizon;
        }
        return total / replicas;
    };
    const double reference = speed(10000.0, 1u << 20);
    const double at_1000 = speed(1000.0, 1u << 21);
    CHECK(std::abs(at_1000 - reference) < 0.02 * reference);
}

TEST_CASE("centred configuration is stationary")
{
    const ModelParams p = symmetric;
    std::vector<double> at500;
    std::vector<double> at1000;
    // coordinates within one configuration are strongly dependent, so the
    // effective sample size is the replica count
    for (int r = 0; r < 10000; ++r) {
        auto s = make_state(p, {0, 0, 0}, {0, 0, 0}, Rng::mix(static_cast<std::uint64_t>(r) + 555));
        for (double t : {500.0, 1000.0}) {
            s.run_until(t);
            const double m = s.minimum().position;
            auto& out = t < 750.0 ? at500 : at1000;
            for (int type = 1; type <= 2; ++type) {
                for (double x : s.positions(type)) out.push_back(x - m);
            }
        }
    }
    CHECK(ks_two_sample(at500, at1000) < 0.03);
}

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "memetrace/errors.hpp"
#include "memetrace/hawkes.hpp"

using namespace memetrace;
using namespace memetrace::hawkes;

namespace {

// truncated exponential density written out by hand
double h_ref(double dt, double beta, double dmax) {
    if (dt < 0 || dt >= dmax) return 0.0;
    return std::exp(-dt / beta) / (beta * (1.0 - std::exp(-dmax / beta)));
}

HawkesModel model(std::size_t K, double lambda0, std::vector<double> W) {
    HawkesModel m(K, 1.0, 7.0);
    m.lambda0.assign(K, lambda0);
    m.W = std::move(W);
    return m;
}

} // namespace

TEST_CASE("impulse") {
    const TruncatedExponential h(1.0, 7.0);
    CHECK(h.density(0.0) == doctest::Approx(h_ref(0, 1, 7)));
    CHECK(h.peak() == doctest::Approx(1.0 / (1.0 - std::exp(-7.0))));
    CHECK(h.density(7.0) == 0.0);
    CHECK(h.density(8.0) == 0.0);
    CHECK(h.mass(7.0) == doctest::Approx(1.0));
    CHECK(h.mass(100.0) == doctest::Approx(1.0));
    // trapezoid integral
    double acc = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double a = 7.0 * i / n, b = 7.0 * (i + 1) / n;
        acc += 0.5 * (h.density(a) + h.density(b)) * (b - a);
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(h.mass(2.0) == doctest::Approx((1 - std::exp(-2.0)) / (1 - std::exp(-7.0))));
    CHECK_THROWS(TruncatedExponential(0.0, 7.0));
}

TEST_CASE("intensity") {
    const auto m = model(2, 0.3, {0.5, 0.2, 0.0, 0.4});
    std::vector<Event> none;
    CHECK(intensity(m, none, 5.0, 0) == 0.3);
    const std::vector<Event> one{{1.0, 0}};
    CHECK(intensity(m, one, 1.0 + 1e-12, 1) == doctest::Approx(0.3 + 0.2 * h_ref(0, 1, 7)));
    CHECK(intensity(m, one, 3.5, 0) == doctest::Approx(0.3 + 0.5 * h_ref(2.5, 1, 7)));
    CHECK(intensity(m, one, 8.0, 0) == 0.3);
    CHECK(intensity(m, one, 9.0, 0) == 0.3);
}

TEST_CASE("simulation") {
    SUBCASE("no background, no events") {
        const auto m = model(2, 0.0, {0.5, 0.5, 0.5, 0.5});
        CHECK(simulate(m, 100.0, 1).events.empty());
    }
    SUBCASE("poisson count") {
        const auto m = model(1, 2.0, {0.0});
        const auto s = simulate(m, 1000.0, 3);
        CHECK(std::fabs(static_cast<double>(s.events.size()) - 2000.0) < 3 * std::sqrt(2000.0));
        CHECK_NOTHROW(s.validate(1));
    }
    SUBCASE("branching doubles the count") {
        const auto m = model(1, 1.0, {0.5});
        double ratio = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) ratio += simulate(m, 1000.0, seed).events.size() / 1000.0;
        ratio /= 20;
        CHECK(std::fabs(ratio - 2.0) / 2.0 < 0.05);
    }
    SUBCASE("deterministic in seed") {
        const auto m = model(3, 0.2, {0.2, 0.1, 0, 0, 0.3, 0.1, 0.1, 0, 0.2});
        const auto a = simulate(m, 200.0, 9), b = simulate(m, 200.0, 9);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t i = 0; i < a.events.size(); ++i) {
            CHECK(a.events[i].t == b.events[i].t);
            CHECK(a.events[i].process == b.events[i].process);
        }
    }
    SUBCASE("runaway is capped") {
        const auto m = model(1, 1.0, {1.5});
        CHECK_THROWS_AS(simulate(m, 1e6, 1, 10000), InvalidInput);
    }
}

TEST_CASE("event streams") {
    const auto s = make_event_stream({{2.0, 1}, {1.0, 0}, {2.0, 0}, {2.0, 1}}, 5.0);
    REQUIRE(s.events.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(s.events[i].t > s.events[i - 1].t);
    CHECK(s.events[1].process == 0);
    CHECK(s.events[1].t == 2.0);
    EventStream bad;
    bad.events = {{1.0, 0}, {0.5, 0}};
    bad.horizon = 2.0;
    CHECK_THROWS_AS(bad.validate(1), InvalidInput);
    bad.events = {{1.0, 3}};
    CHECK_THROWS_AS(bad.validate(2), InvalidInput);
}

TEST_CASE("root cause attribution") {
    SUBCASE("no excitation") {
        const auto m = model(3, 0.5, std::vector<double>(9, 0.0));
        const auto s = simulate(m, 50.0, 4);
        const auto r = attribute_root_cause(m, s);
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t k = 0; k < 3; ++k) CHECK(r[i][k] == (k == s.events[i].process ? 1.0 : 0.0));
    }
    SUBCASE("two events closed form") {
        auto m = model(2, 0.0, {0.0, 0.6, 0.0, 0.0});
        m.lambda0 = {0.2, 0.3};
        EventStream s;
        s.events = {{0.0, 0}, {1.0, 1}};
        s.horizon = 2.0;
        const auto r = attribute_root_cause(m, s);
        const double c = 0.6 * h_ref(1.0, 1, 7);
        CHECK(r[0][0] == 1.0);
        CHECK(r[1][0] == doctest::Approx(c / (0.3 + c)));
        CHECK(r[1][1] == doctest::Approx(0.3 / (0.3 + c)));

        InfluenceCounts counts(2);
        counts.add(r, s);
        const auto raw = influence_matrix(counts, InfluenceMode::Raw);
        CHECK(raw.at(0, 0) == doctest::Approx(100.0));
        CHECK(raw.at(0, 1) == doctest::Approx(100.0 * c / (0.3 + c)));
        CHECK(raw.at(1, 1) == doctest::Approx(100.0 * 0.3 / (0.3 + c)));
        CHECK(raw.at(1, 0) == 0.0);
    }
    SUBCASE("chain through an intermediate event") {
        // B at 0, A at 0.5 (partly from B), C at 1 partly from both
        auto m = model(3, 0.1, std::vector<double>(9, 0.0));
        m.w(1, 0) = 0.5;  // B -> A
        m.w(1, 2) = 0.4;  // B -> C
        m.w(0, 2) = 0.3;  // A -> C
        EventStream s;
        s.events = {{0.0, 1}, {0.5, 0}, {1.0, 2}};
        s.horizon = 2.0;
        const auto r = attribute_root_cause(m, s);
        const double cBA = 0.5 * h_ref(0.5, 1, 7);
        const double a_from_b = cBA / (0.1 + cBA);
        const double cBC = 0.4 * h_ref(1.0, 1, 7), cAC = 0.3 * h_ref(0.5, 1, 7);
        const double z = 0.1 + cBC + cAC;
        CHECK(r[1][1] == doctest::Approx(a_from_b));
        CHECK(r[2][1] == doctest::Approx((cBC + cAC * a_from_b) / z));
        CHECK(r[2][0] == doctest::Approx(cAC * (1 - a_from_b) / z));
        CHECK(r[2][2] == doctest::Approx(0.1 / z));
    }
    SUBCASE("conservation on a simulated stream") {
        const auto m = model(3, 0.2, {0.3, 0.1, 0.0, 0.0, 0.3, 0.2, 0.1, 0.1, 0.3});
        const auto s = simulate(m, 300.0, 8);
        const auto r = attribute_root_cause(m, s);
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto row = r[i];
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        }
        InfluenceCounts counts(3);
        counts.add(r, s);
        const auto raw = influence_matrix(counts, InfluenceMode::Raw);
        for (std::size_t d = 0; d < 3; ++d) {
            double col = 0;
            for (std::size_t src = 0; src < 3; ++src) col += raw.at(src, d);
            CHECK(col == doctest::Approx(100.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("influence matrices") {
    InfluenceCounts c(2);
    c.attributed = {6, 1, 0, 3};
    c.events = {6, 4};
    const auto raw = influence_matrix(c, InfluenceMode::Raw);
    CHECK(raw.at(0, 1) == 25.0);
    const auto norm = influence_matrix(c, InfluenceMode::Normalized);
    CHECK(norm.at(0, 1) == doctest::Approx(100.0 / 6));
    InfluenceCounts empty(2);
    empty.events = {3, 0};
    empty.attributed = {3, 0, 0, 0};
    const auto m = influence_matrix(empty, InfluenceMode::Raw);
    CHECK(std::isnan(m.at(0, 1)));
    std::ostringstream out;
    const std::vector<std::string> names{"a", "b"};
    write_influence_csv(out, m, names);
    CHECK(out.str() == "# mode=raw\nsource,a,b\na,100.000000,NA\nb,0.000000,NA\n");
}

TEST_CASE("gibbs") {
    SUBCASE("poisson data gives tiny weights") {
        const auto truth = model(3, 0.3, std::vector<double>(9, 0.0));
        const auto s = simulate(truth, 1000.0, 12);
        GibbsOptions opts;
        opts.iters = 300;
        opts.burnin = 100;
        const auto fit = fit_gibbs(s, 3, 1.0, 7.0, opts);
        for (double w : fit.posterior_mean.W) CHECK(w < 0.05);
    }
    SUBCASE("background rate") {
        const auto truth = model(1, 2.0, {0.0});
        const auto s = simulate(truth, 1000.0, 13);
        GibbsOptions opts;
        opts.iters = 300;
        opts.burnin = 100;
        const auto fit = fit_gibbs(s, 1, 1.0, 7.0, opts);
        CHECK(std::fabs(fit.posterior_mean.lambda0[0] - 2.0) / 2.0 < 0.1);
    }
    SUBCASE("deterministic given seed, chain kept on request") {
        const auto truth = model(2, 0.5, {0.3, 0.1, 0.0, 0.2});
        const auto s = simulate(truth, 200.0, 14);
        GibbsOptions opts;
        opts.iters = 60;
        opts.burnin = 20;
        opts.keep_chain = true;
        const auto a = fit_gibbs(s, 2, 1.0, 7.0, opts);
        const auto b = fit_gibbs(s, 2, 1.0, 7.0, opts);
        CHECK(a.posterior_mean.W == b.posterior_mean.W);
        CHECK(a.posterior_mean.lambda0 == b.posterior_mean.lambda0);
        CHECK(a.chain.size() == 40);
    }
    SUBCASE("bad input") {
        EventStream empty;
        empty.horizon = 10;
        CHECK_THROWS_AS(fit_gibbs(empty, 2, 1.0, 7.0, {}), InvalidInput);
        const auto s = simulate(model(1, 1.0, {0.0}), 10.0, 1);
        GibbsOptions opts;
        opts.iters = 10;
        opts.burnin = 10;
        CHECK_THROWS_AS(fit_gibbs(s, 1, 1.0, 7.0, opts), InvalidInput);
    }
}

TEST_CASE("spectral radius") {
    CHECK(spectral_radius(model(2, 0.1, {0.5, 0.0, 0.0, 0.3})) == doctest::Approx(0.5));
    CHECK(spectral_radius(model(3, 0.1, {0.5, 0.2, 0, 0, 0.5, 0.2, 0.2, 0, 0.5})) == doctest::Approx(0.7));
}

TEST_CASE("model and event files") {
    const auto m = model(2, 0.25, {0.5, 0.125, 0.0, 0.3});
    const std::vector<std::string> names{"gab", "pol"};
    std::stringstream buf;
    write_model_json(buf, m, names);
    std::vector<std::string> back_names;
    const auto back = read_model_json(buf, &back_names);
    CHECK(back.K == 2);
    CHECK(back.W == m.W);
    CHECK(back.lambda0 == m.lambda0);
    CHECK(back_names == names);

    const auto s = simulate(m, 30.0, 2);
    std::stringstream ev;
    write_events_jsonl(ev, s, names);
    std::vector<std::string> ev_names = names;
    const auto s2 = read_events_jsonl(ev, ev_names, 30.0);
    REQUIRE(s2.events.size() == s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        CHECK(s2.events[i].t == s.events[i].t);
        CHECK(s2.events[i].process == s.events[i].process);
    }
    std::istringstream unknown(R"({"t":1.0,"community":"reddit"})"
                               "\n");
    std::vector<std::string> fixed = names;
    CHECK_THROWS(read_events_jsonl(unknown, fixed, 5.0));
}

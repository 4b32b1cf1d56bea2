#include "memetrace/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memetrace/errors.hpp"

namespace memetrace::hawkes {

namespace {

constexpr double kTieJitter = 1e-6;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

TruncatedExponential::TruncatedExponential(double beta, double dmax) : beta_(beta), dmax_(dmax) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("impulse: beta must be positive");
    if (!(dmax > 0.0)) throw InvalidInput("impulse: dmax must be positive");
    norm_ = 1.0 / (beta_ * -std::expm1(-dmax_ / beta_));
}

double TruncatedExponential::density(double dt) const {
    if (dt < 0.0 || dt >= dmax_) return 0.0;
    return norm_ * std::exp(-dt / beta_);
}

double TruncatedExponential::mass(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= dmax_) return 1.0;
    return std::expm1(-x / beta_) / std::expm1(-dmax_ / beta_);
}

HawkesModel::HawkesModel(std::size_t k, double beta_, double dmax_)
    : K(k), lambda0(k, 0.0), W(k * k, 0.0), beta(beta_), dmax(dmax_) {}

void HawkesModel::validate() const {
    if (K == 0) throw InvalidInput("hawkes model: K must be positive");
    if (lambda0.size() != K || W.size() != K * K) throw InvalidInput("hawkes model: parameter sizes do not match K");
    for (double v : lambda0)
        if (!finite_nonneg(v)) throw InvalidInput("hawkes model: background rates must be finite and >= 0");
    for (double v : W)
        if (!finite_nonneg(v)) throw InvalidInput("hawkes model: weights must be finite and >= 0");
    if (!(beta > 0.0) || !std::isfinite(beta) || !(dmax > 0.0) || std::isnan(dmax))
        throw InvalidInput("hawkes model: beta and dmax must be positive");
}

double spectral_radius(const HawkesModel& m) {
    // Power iteration; W is nonnegative so the Perron root dominates.
    std::vector<double> v(m.K, 1.0), next(m.K);
    double rho = 0.0;
    for (int it = 0; it < 500; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < m.K; ++s)
            for (std::size_t d = 0; d < m.K; ++d) next[d] += m.w(s, d) * v[s];
        const double norm = *std::max_element(next.begin(), next.end());
        if (norm <= 0.0) return 0.0;
        for (auto& x : next) x /= norm;
        const double delta = std::abs(norm - rho);
        rho = norm;
        v.swap(next);
        if (delta < 1e-12) break;
    }
    return rho;
}

void EventStream::validate(std::size_t K) const {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.process >= K) throw InvalidInput("event stream: process index out of range");
        if (!(e.t >= 0.0 && e.t <= horizon)) throw InvalidInput("event stream: timestamp outside [0, T]");
        if (i > 0 && !(e.t > events[i - 1].t)) throw InvalidInput("event stream: timestamps must strictly increase");
    }
}

EventStream make_event_stream(std::vector<Event> events, double horizon) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return a.t != b.t ? a.t < b.t : a.process < b.process;
    });
    for (std::size_t i = 1; i < events.size(); ++i)
        if (!(events[i].t > events[i - 1].t)) events[i].t = events[i - 1].t + kTieJitter;
    EventStream s{std::move(events), horizon};
    if (!s.events.empty()) s.horizon = std::max(s.horizon, s.events.back().t);
    return s;
}

double intensity(const HawkesModel& model, std::span<const Event> events, double t, std::size_t k) {
    const auto h = model.impulse();
    double rate = model.lambda0.at(k);
    for (const auto& e : events) {
        if (!(e.t < t)) break;
        rate += model.w(e.process, k) * h.density(t - e.t);
    }
    return rate;
}

EventStream simulate(const HawkesModel& model, double horizon, std::uint64_t seed, std::size_t max_events) {
    model.validate();
    if (!std::isfinite(horizon) || horizon < 0.0) throw InvalidInput("simulate: horizon must be finite and >= 0");
    if (spectral_radius(model) >= 1.0)
        std::cerr << "warning: spectral radius of W >= 1; the process may explode\n";

    const auto h = model.impulse();
    const std::size_t K = model.K;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    EventStream out;
    out.horizon = horizon;
    std::size_t window = 0;
    std::vector<double> rates(K);

    // Rates at time t from background plus events in [t - dmax, t]; an event
    // at exactly t contributes its peak (right limit).
    auto fill_rates = [&](double t) {
        while (window < out.events.size() && t - out.events[window].t >= h.support()) ++window;
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) rates[k] = model.lambda0[k];
        for (std::size_t j = window; j < out.events.size(); ++j) {
            const double dens = h.density(t - out.events[j].t);
            if (dens == 0.0) continue;
            for (std::size_t k = 0; k < K; ++k) rates[k] += model.w(out.events[j].process, k) * dens;
        }
        for (double r : rates) total += r;
        return total;
    };

    double t = 0.0;
    for (;;) {
        const double bound = fill_rates(t);
        if (bound <= 0.0) break;
        t += std::exponential_distribution<double>(bound)(rng);
        if (t > horizon) break;
        const double total = fill_rates(t);
        double u = unif(rng) * bound;
        if (u >= total) continue;
        std::size_t k = 0;
        while (k + 1 < K && u >= rates[k]) u -= rates[k++];
        out.events.push_back({t, static_cast<std::uint32_t>(k)});
        if (out.events.size() > max_events)
            throw InvalidInput(fmt::format("simulate: more than {} events before the horizon", max_events));
    }
    return out;
}

FitResult fit_gibbs(const EventStream& stream, std::size_t K, double beta, double dmax, const GibbsOptions& opts) {
    if (stream.events.empty()) throw InvalidInput("fit_gibbs: empty event stream");
    if (K == 0) throw InvalidInput("fit_gibbs: K must be positive");
    if (opts.iters <= opts.burnin) throw InvalidInput("fit_gibbs: iters must exceed burnin");
    for (const auto* p : {&opts.lambda0_prior, &opts.weight_prior})
        if (!(p->shape > 0.0 && p->rate > 0.0)) throw InvalidInput("fit_gibbs: prior parameters must be positive");
    stream.validate(K);

    const TruncatedExponential h(beta, dmax);
    const auto& ev = stream.events;
    const std::size_t n = ev.size();
    const double T = stream.horizon;

    // Candidate parents: earlier events whose impulse is still live.
    std::vector<std::size_t> cand_off{0};
    std::vector<std::uint32_t> cand;
    std::vector<double> cand_h;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (ev[i].t - ev[start].t >= dmax) ++start;
        for (std::size_t j = start; j < i; ++j) {
            cand.push_back(static_cast<std::uint32_t>(j));
            cand_h.push_back(h.density(ev[i].t - ev[j].t));
        }
        cand_off.push_back(cand.size());
    }

    std::vector<double> exposure(K, 0.0), counts(K, 0.0);
    for (const auto& e : ev) {
        exposure[e.process] += h.mass(T - e.t);
        counts[e.process] += 1.0;
    }

    HawkesModel current(K, beta, dmax);
    for (std::size_t k = 0; k < K; ++k) current.lambda0[k] = std::max(counts[k], 1.0) / (2.0 * std::max(T, 1.0));
    std::fill(current.W.begin(), current.W.end(), 0.1);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto gamma = [&](double shape, double rate) { return std::gamma_distribution<double>(shape, 1.0 / rate)(rng); };

    FitResult result;
    result.posterior_mean = HawkesModel(K, beta, dmax);
    std::vector<double> background(K), offspring(K * K), weights;
    std::size_t kept = 0;

    for (std::size_t it = 0; it < opts.iters; ++it) {
        std::fill(background.begin(), background.end(), 0.0);
        std::fill(offspring.begin(), offspring.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto dst = ev[i].process;
            const std::size_t lo = cand_off[i], hi = cand_off[i + 1];
            weights.resize(hi - lo + 1);
            weights[0] = current.lambda0[dst];
            double z = weights[0];
            for (std::size_t c = lo; c < hi; ++c) {
                weights[c - lo + 1] = current.w(ev[cand[c]].process, dst) * cand_h[c];
                z += weights[c - lo + 1];
            }
            std::size_t pick = 0;
            if (z > 0.0) {
                double u = unif(rng) * z;
                while (pick + 1 < weights.size() && u >= weights[pick]) u -= weights[pick++];
            }
            if (pick == 0)
                background[dst] += 1.0;
            else
                offspring[ev[cand[lo + pick - 1]].process * K + dst] += 1.0;
        }
        for (std::size_t k = 0; k < K; ++k)
            current.lambda0[k] = gamma(opts.lambda0_prior.shape + background[k], opts.lambda0_prior.rate + T);
        for (std::size_t s = 0; s < K; ++s)
            for (std::size_t d = 0; d < K; ++d)
                current.w(s, d) = gamma(opts.weight_prior.shape + offspring[s * K + d],
                                        opts.weight_prior.rate + exposure[s]);

        if (it >= opts.burnin) {
            ++kept;
            for (std::size_t k = 0; k < K; ++k) result.posterior_mean.lambda0[k] += current.lambda0[k];
            for (std::size_t x = 0; x < K * K; ++x) result.posterior_mean.W[x] += current.W[x];
            if (opts.keep_chain) result.chain.push_back({current.lambda0, current.W});
        }
    }
    for (auto& v : result.posterior_mean.lambda0) v /= static_cast<double>(kept);
    for (auto& v : result.posterior_mean.W) v /= static_cast<double>(kept);
    return result;
}

RootCauseDistribution attribute_root_cause(const HawkesModel& model, const EventStream& stream) {
    model.validate();
    stream.validate(model.K);
    const auto h = model.impulse();
    const std::size_t K = model.K;
    const auto& ev = stream.events;

    RootCauseDistribution out{K, std::vector<double>(ev.size() * K, 0.0)};
    std::size_t start = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        while (ev[i].t - ev[start].t >= h.support()) ++start;
        const auto dst = ev[i].process;
        double* root = out.prob.data() + i * K;
        const double b = model.lambda0[dst];
        double z = b;
        for (std::size_t j = start; j < i; ++j) {
            const double c = model.w(ev[j].process, dst) * h.density(ev[i].t - ev[j].t);
            if (c == 0.0) continue;
            z += c;
            const double* parent = out.prob.data() + j * K;
            for (std::size_t k = 0; k < K; ++k) root[k] += c * parent[k];
        }
        if (z <= 0.0) {
            // Impossible under the model; fall back to the event's own process.
            root[dst] = 1.0;
            continue;
        }
        root[dst] += b;
        for (std::size_t k = 0; k < K; ++k) root[k] /= z;
    }
    return out;
}

void InfluenceCounts::add(const RootCauseDistribution& roots, const EventStream& stream) {
    if (roots.K != K) throw InvalidInput("influence: process count mismatch");
    if (roots.size() != stream.events.size()) throw InvalidInput("influence: attribution/event count mismatch");
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const auto dst = stream.events[i].process;
        events[dst] += 1.0;
        const auto r = roots[i];
        for (std::size_t s = 0; s < K; ++s) attributed[s * K + dst] += r[s];
    }
}

InfluenceMatrix influence_matrix(const InfluenceCounts& counts, InfluenceMode mode) {
    const std::size_t K = counts.K;
    InfluenceMatrix m{K, mode, std::vector<double>(K * K, 0.0)};
    for (std::size_t s = 0; s < K; ++s)
        for (std::size_t d = 0; d < K; ++d) {
            const double denom = mode == InfluenceMode::Raw ? counts.events[d] : counts.events[s];
            m.values[s * K + d] = denom > 0.0 ? 100.0 * counts.attributed[s * K + d] / denom
                                              : std::numeric_limits<double>::quiet_NaN();
        }
    return m;
}

void write_influence_csv(std::ostream& out, const InfluenceMatrix& m, std::span<const std::string> names) {
    if (names.size() != m.K) throw InvalidInput("influence csv: need one name per process");
    out << "# mode=" << (m.mode == InfluenceMode::Raw ? "raw" : "normalized") << '\n';
    out << "source";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t s = 0; s < m.K; ++s) {
        out << names[s];
        for (std::size_t d = 0; d < m.K; ++d) {
            const double v = m.at(s, d);
            out << ',' << (std::isnan(v) ? std::string("NA") : fmt::format("{:.6f}", v));
        }
        out << '\n';
    }
}

void write_model_json(std::ostream& out, const HawkesModel& m, std::span<const std::string> names) {
    nlohmann::ordered_json doc;
    doc["K"] = m.K;
    if (!names.empty()) doc["communities"] = std::vector<std::string>(names.begin(), names.end());
    doc["lambda0"] = m.lambda0;
    auto& w = doc["W"] = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < m.K; ++s)
        w.push_back(std::vector<double>(m.W.begin() + static_cast<std::ptrdiff_t>(s * m.K),
                                        m.W.begin() + static_cast<std::ptrdiff_t>((s + 1) * m.K)));
    doc["beta"] = m.beta;
    doc["dmax"] = m.dmax;
    out << doc.dump(1) << '\n';
}

HawkesModel read_model_json(std::istream& in, std::vector<std::string>* names) {
    HawkesModel m;
    try {
        const auto doc = nlohmann::json::parse(in);
        m.K = doc.at("K").get<std::size_t>();
        m.lambda0 = doc.at("lambda0").get<std::vector<double>>();
        const auto rows = doc.at("W").get<std::vector<std::vector<double>>>();
        if (rows.size() != m.K) throw InvalidInput("model json: W must have K rows");
        for (const auto& r : rows) {
            if (r.size() != m.K) throw InvalidInput("model json: W rows must have K entries");
            m.W.insert(m.W.end(), r.begin(), r.end());
        }
        m.beta = doc.at("beta").get<double>();
        m.dmax = doc.at("dmax").get<double>();
        if (names) {
            names->clear();
            if (doc.contains("communities")) *names = doc.at("communities").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("model json: ") + e.what());
    }
    m.validate();
    return m;
}

void write_events_jsonl(std::ostream& out, const EventStream& s, std::span<const std::string> names) {
    for (const auto& e : s.events) {
        nlohmann::ordered_json obj;
        obj["t"] = e.t;
        obj["community"] = names.empty() ? std::to_string(e.process) : names[e.process];
        out << obj.dump() << '\n';
    }
}

EventStream read_events_jsonl(std::istream& in, std::vector<std::string>& names, double horizon) {
    std::vector<std::pair<double, std::string>> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            const double t = obj.at("t").get<double>();
            if (!std::isfinite(t) || t < 0.0) throw LineError(lineno, "event time must be finite and >= 0");
            raw.emplace_back(t, obj.at("community").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw LineError(lineno, e.what());
        }
    }
    if (names.empty()) {
        std::set<std::string> distinct;
        for (const auto& [t, c] : raw) distinct.insert(c);
        names.assign(distinct.begin(), distinct.end());
    }
    std::map<std::string, std::uint32_t> index;
    for (std::uint32_t k = 0; k < names.size(); ++k) index.emplace(names[k], k);
    std::vector<Event> events;
    events.reserve(raw.size());
    for (const auto& [t, c] : raw) {
        auto it = index.find(c);
        if (it == index.end()) throw InvalidInput("events: unknown community '" + c + "'");
        events.push_back({t, it->second});
    }
    return make_event_stream(std::move(events), horizon < 0.0 ? 0.0 : horizon);
}

} // namespace memetrace::hawkes

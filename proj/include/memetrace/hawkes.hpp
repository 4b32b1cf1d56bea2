#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace memetrace::hawkes {

/// Impulse response shape. density() integrates to 1 over [0, support()).
class Impulse {
public:
    virtual ~Impulse() = default;
    virtual double density(double dt) const = 0;
    /// Integral of density over [0, min(x, support())].
    virtual double mass(double x) const = 0;
    virtual double support() const = 0;
    /// Maximum of density, attained as dt -> 0+ for monotone shapes.
    virtual double peak() const = 0;
    /// True when density is non-increasing on [0, inf); simulation relies on it.
    virtual bool monotone() const = 0;
};

/// Exponential density with scale beta, truncated at dmax and renormalized.
class TruncatedExponential final : public Impulse {
public:
    TruncatedExponential(double beta, double dmax);
    double density(double dt) const override;
    double mass(double x) const override;
    double support() const override { return dmax_; }
    double peak() const override { return norm_; }
    bool monotone() const override { return true; }
    double beta() const { return beta_; }

private:
    double beta_;
    double dmax_;
    double norm_;  // 1 / (beta (1 - e^{-dmax/beta}))
};

inline constexpr double kDefaultBeta = 1.0;  // days
inline constexpr double kDefaultDmax = 7.0;  // days

struct HawkesModel {
    std::size_t K = 0;
    std::vector<double> lambda0;  // K background rates
    std::vector<double> W;        // K x K row-major, W[src * K + dst] expected offspring
    double beta = kDefaultBeta;
    double dmax = kDefaultDmax;

    HawkesModel() = default;
    HawkesModel(std::size_t k, double beta_, double dmax_);

    double& w(std::size_t src, std::size_t dst) { return W[src * K + dst]; }
    double w(std::size_t src, std::size_t dst) const { return W[src * K + dst]; }
    TruncatedExponential impulse() const { return {beta, dmax}; }

    /// Throws InvalidInput on size mismatch, negative or nonfinite entries, beta/dmax <= 0.
    void validate() const;
};

double spectral_radius(const HawkesModel& m);

struct Event {
    double t;
    std::uint32_t process;
};

struct EventStream {
    std::vector<Event> events;  // strictly increasing t
    double horizon = 0.0;

    void validate(std::size_t K) const;
};

/// Sorts events by (t, process, input order) and pushes ties forward by
/// 1e-6 per rank so timestamps are strictly increasing.
EventStream make_event_stream(std::vector<Event> events, double horizon);

inline constexpr std::size_t kDefaultMaxSimEvents = 1'000'000;

/// Ogata thinning; deterministic in seed. Warns on stderr when the spectral
/// radius of W is >= 1 and throws InvalidInput past max_events.
EventStream simulate(const HawkesModel& model, double horizon, std::uint64_t seed,
                     std::size_t max_events = kDefaultMaxSimEvents);

/// lambda0_k plus the impulses of every event strictly before t.
double intensity(const HawkesModel& model, std::span<const Event> events, double t, std::size_t k);

struct GammaPrior {
    double shape = 1.0;
    double rate = 1.0;
};

struct GibbsOptions {
    std::size_t iters = 500;
    std::size_t burnin = 200;
    GammaPrior lambda0_prior;
    GammaPrior weight_prior;
    std::uint64_t seed = 1;
    bool keep_chain = false;
};

struct GibbsSample {
    std::vector<double> lambda0;
    std::vector<double> W;
};

struct FitResult {
    HawkesModel posterior_mean;
    std::vector<GibbsSample> chain;  // post-burn-in samples when keep_chain
};

/// Auxiliary-parent Gibbs sampler with conjugate Gamma updates. The impulse
/// shape (beta, dmax) is held fixed. Convergence is not checked.
FitResult fit_gibbs(const EventStream& stream, std::size_t K, double beta, double dmax, const GibbsOptions& opts);

/// Per event, K probabilities over root-cause processes (row-major n x K).
struct RootCauseDistribution {
    std::size_t K = 0;
    std::vector<double> prob;

    std::span<const double> operator[](std::size_t i) const { return {prob.data() + i * K, K}; }
    std::size_t size() const { return K ? prob.size() / K : 0; }
};

/// Each event splits its origin between its own background rate and the
/// live impulses of earlier events, inheriting those events' root causes.
RootCauseDistribution attribute_root_cause(const HawkesModel& model, const EventStream& stream);

/// Attributed mass and event totals, summed across any number of streams.
struct InfluenceCounts {
    std::size_t K = 0;
    std::vector<double> attributed;  // K x K, [src * K + dst]
    std::vector<double> events;      // per process

    explicit InfluenceCounts(std::size_t k = 0) : K(k), attributed(k * k, 0.0), events(k, 0.0) {}
    void add(const RootCauseDistribution& roots, const EventStream& stream);
};

enum class InfluenceMode { Raw, Normalized };

/// Percentages; NaN marks cells whose denominator community has no events.
struct InfluenceMatrix {
    std::size_t K = 0;
    InfluenceMode mode = InfluenceMode::Raw;
    std::vector<double> values;  // [src * K + dst]

    double at(std::size_t src, std::size_t dst) const { return values[src * K + dst]; }
};

InfluenceMatrix influence_matrix(const InfluenceCounts& counts, InfluenceMode mode);

void write_influence_csv(std::ostream& out, const InfluenceMatrix& m, std::span<const std::string> names);

void write_model_json(std::ostream& out, const HawkesModel& m, std::span<const std::string> names = {});
HawkesModel read_model_json(std::istream& in, std::vector<std::string>* names = nullptr);

/// {t, community} lines; community indices follow `names`.
void write_events_jsonl(std::ostream& out, const EventStream& s, std::span<const std::string> names);
EventStream read_events_jsonl(std::istream& in, std::vector<std::string>& names, double horizon = -1.0);

} // namespace memetrace::hawkes

#include "memetrace/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "memetrace/errors.hpp"

namespace memetrace {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

template <typename T>
void read(const pt::ptree& tree, const char* key, T& field) {
    if (auto v = tree.get_optional<std::string>(key)) {
        try {
            field = tree.get<T>(key);
        } catch (const pt::ptree_error&) {
            throw ConfigError(fmt::format("config: bad value for '{}': '{}'", key, *v));
        }
    }
}

void read_path(const pt::ptree& tree, const char* key, std::filesystem::path& field, const std::filesystem::path& base) {
    if (auto v = tree.get_optional<std::string>(key)) {
        std::filesystem::path p(*v);
        field = (p.empty() || p.is_absolute() || base.empty()) ? p : base / p;
    }
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

} // namespace

void PipelineConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (eps < 0 || eps > kMaxHamming) fail("cluster.eps must be in [0, 64]");
    if (min_pts < 1) fail("cluster.min_pts must be >= 1");
    if (sweep_eps.empty()) fail("cluster.sweep_eps must not be empty");
    for (int e : sweep_eps)
        if (e < 0 || e > kMaxHamming) fail("cluster.sweep_eps values must be in [0, 64]");
    if (theta < 0 || theta > kMaxHamming) fail("annotate.theta must be in [0, 64]");
    if (!(screenshot_cutoff >= 0.0 && screenshot_cutoff <= 1.0)) fail("annotate.screenshot_cutoff must be in [0, 1]");
    metric.validate();
    if (!(kappa > 0.0 && kappa <= 1.0)) fail("graph.kappa must be in (0, 1]");
    for (const auto& f : graph_formats)
        if (f != "graphml" && f != "dot" && f != "csv") fail("graph.formats: unknown format '" + f + "'");
    if (!(beta > 0.0) || !std::isfinite(beta)) fail("hawkes.beta must be positive");
    if (!(dmax > 0.0) || !std::isfinite(dmax)) fail("hawkes.dmax must be positive");
    if (!(time_unit_seconds > 0.0)) fail("hawkes.time_unit_seconds must be positive");
    if (gibbs_iters <= gibbs_burnin) fail("hawkes.iters must exceed hawkes.burnin");
    for (const auto* p : {&lambda0_prior, &weight_prior})
        if (!(p->shape > 0.0 && p->rate > 0.0)) fail("hawkes priors must have positive shape and rate");
    if (min_cluster_events < 1) fail("hawkes.min_events must be >= 1");
}

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    PipelineConfig c;
    read(tree, "cluster.eps", c.eps);
    read(tree, "cluster.min_pts", c.min_pts);
    if (auto v = tree.get_optional<std::string>("cluster.sweep_eps")) {
        c.sweep_eps.clear();
        for (const auto& s : split_list(*v)) {
            try {
                c.sweep_eps.push_back(std::stoi(s));
            } catch (const std::exception&) {
                throw ConfigError("config: bad value in cluster.sweep_eps: '" + s + "'");
            }
        }
    }
    if (auto v = tree.get_optional<std::string>("cluster.seed_communities")) c.seed_communities = split_list(*v);
    read(tree, "annotate.theta", c.theta);
    read(tree, "annotate.screenshot_cutoff", c.screenshot_cutoff);
    read(tree, "metric.tau", c.metric.tau);
    read(tree, "metric.w_perceptual", c.metric.full.perceptual);
    read(tree, "metric.w_meme", c.metric.full.meme);
    read(tree, "metric.w_people", c.metric.full.people);
    read(tree, "metric.w_culture", c.metric.full.culture);
    read(tree, "metric.partial_w_perceptual", c.metric.partial.perceptual);
    read(tree, "metric.partial_w_meme", c.metric.partial.meme);
    read(tree, "metric.partial_w_people", c.metric.partial.people);
    read(tree, "metric.partial_w_culture", c.metric.partial.culture);
    if (auto v = tree.get_optional<std::string>("metric.formula")) {
        if (*v == "exp_decay") c.metric.formula = DecayFormula::ExpDecay;
        else if (*v == "scaled_linear") c.metric.formula = DecayFormula::ScaledLinear;
        else throw ConfigError("config: metric.formula must be exp_decay or scaled_linear");
    }
    read(tree, "graph.kappa", c.kappa);
    read(tree, "graph.degree_min", c.degree_min);
    if (auto v = tree.get_optional<std::string>("graph.formats")) c.graph_formats = split_list(*v);
    read(tree, "report.top_k", c.top_k);
    read(tree, "hawkes.beta", c.beta);
    read(tree, "hawkes.dmax", c.dmax);
    read(tree, "hawkes.time_unit_seconds", c.time_unit_seconds);
    read(tree, "hawkes.iters", c.gibbs_iters);
    read(tree, "hawkes.burnin", c.gibbs_burnin);
    read(tree, "hawkes.lambda0_shape", c.lambda0_prior.shape);
    read(tree, "hawkes.lambda0_rate", c.lambda0_prior.rate);
    read(tree, "hawkes.weight_shape", c.weight_prior.shape);
    read(tree, "hawkes.weight_rate", c.weight_prior.rate);
    read(tree, "hawkes.min_events", c.min_cluster_events);
    if (auto v = tree.get_optional<std::string>("hawkes.communities")) c.communities = split_list(*v);
    read_path(tree, "paths.images_manifest", c.images_manifest, base_dir);
    read_path(tree, "paths.posts", c.posts, base_dir);
    read_path(tree, "paths.corpus", c.corpus, base_dir);
    read_path(tree, "paths.screenshot_scores", c.screenshot_scores, base_dir);
    read_path(tree, "paths.ratings", c.ratings, base_dir);
    read(tree, "run.seed", c.seed);
    read(tree, "run.threads", c.threads);
    read(tree, "run.strict", c.strict);
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

void write_config(std::ostream& out, const PipelineConfig& c) {
    std::vector<std::string> eps;
    for (int e : c.sweep_eps) eps.push_back(std::to_string(e));
    out << "[cluster]\n"
        << "eps=" << c.eps << "\nmin_pts=" << c.min_pts << "\nsweep_eps=" << join(eps)
        << "\nseed_communities=" << join(c.seed_communities) << "\n\n"
        << "[annotate]\n"
        << "theta=" << c.theta << "\nscreenshot_cutoff=" << fmt_double(c.screenshot_cutoff) << "\n\n"
        << "[metric]\n"
        << "tau=" << fmt_double(c.metric.tau)
        << "\nformula=" << (c.metric.formula == DecayFormula::ExpDecay ? "exp_decay" : "scaled_linear")
        << "\nw_perceptual=" << fmt_double(c.metric.full.perceptual) << "\nw_meme=" << fmt_double(c.metric.full.meme)
        << "\nw_people=" << fmt_double(c.metric.full.people) << "\nw_culture=" << fmt_double(c.metric.full.culture)
        << "\npartial_w_perceptual=" << fmt_double(c.metric.partial.perceptual)
        << "\npartial_w_meme=" << fmt_double(c.metric.partial.meme)
        << "\npartial_w_people=" << fmt_double(c.metric.partial.people)
        << "\npartial_w_culture=" << fmt_double(c.metric.partial.culture) << "\n\n"
        << "[graph]\n"
        << "kappa=" << fmt_double(c.kappa) << "\ndegree_min=" << c.degree_min << "\nformats=" << join(c.graph_formats)
        << "\n\n"
        << "[report]\n"
        << "top_k=" << c.top_k << "\n\n"
        << "[hawkes]\n"
        << "beta=" << fmt_double(c.beta) << "\ndmax=" << fmt_double(c.dmax)
        << "\ntime_unit_seconds=" << fmt_double(c.time_unit_seconds) << "\niters=" << c.gibbs_iters
        << "\nburnin=" << c.gibbs_burnin << "\nlambda0_shape=" << fmt_double(c.lambda0_prior.shape)
        << "\nlambda0_rate=" << fmt_double(c.lambda0_prior.rate) << "\nweight_shape=" << fmt_double(c.weight_prior.shape)
        << "\nweight_rate=" << fmt_double(c.weight_prior.rate) << "\nmin_events=" << c.min_cluster_events
        << "\ncommunities=" << join(c.communities) << "\n\n"
        << "[paths]\n"
        << "images_manifest=" << c.images_manifest.string() << "\nposts=" << c.posts.string()
        << "\ncorpus=" << c.corpus.string() << "\nscreenshot_scores=" << c.screenshot_scores.string()
        << "\nratings=" << c.ratings.string() << "\n\n"
        << "[run]\n"
        << "seed=" << c.seed << "\nstrict=" << (c.strict ? "true" : "false") << "\n";
}

} // namespace memetrace

#include "memetrace/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memetrace/annotate.hpp"
#include "memetrace/errors.hpp"
#include "memetrace/image_io.hpp"
#include "memetrace/phash.hpp"

namespace memetrace {

namespace {

struct Blob {
    double cx, cy, radius;
    std::array<double, 3> color;
};

struct Scene {
    std::array<double, 3> base;
    std::array<double, 3> gradient;
    std::vector<Blob> blobs;
};

Scene random_scene(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scene s;
    for (int c = 0; c < 3; ++c) {
        s.base[c] = 40 + 150 * u(rng);
        s.gradient[c] = -60 + 120 * u(rng);
    }
    const int count = 4 + static_cast<int>(u(rng) * 5);
    for (int b = 0; b < count; ++b) {
        Blob blob{u(rng), u(rng), 0.08 + 0.25 * u(rng), {}};
        for (int c = 0; c < 3; ++c) blob.color[c] = -120 + 240 * u(rng);
        s.blobs.push_back(blob);
    }
    return s;
}

Raster render(const Scene& s, int w, int h, std::mt19937_64& rng, double noise, double shift) {
    std::uniform_real_distribution<double> jitter(-noise, noise);
    Raster img(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fx = (x + 0.5) / w, fy = (y + 0.5) / h;
            for (int c = 0; c < 3; ++c) {
                double v = s.base[c] + s.gradient[c] * (fx - fy) + shift;
                for (const auto& b : s.blobs) {
                    const double dx = fx - b.cx, dy = fy - b.cy;
                    v += b.color[c] * std::exp(-(dx * dx + dy * dy) / (2 * b.radius * b.radius));
                }
                if (noise > 0) v += jitter(rng);
                img.row(y)[x * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return img;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + p.string());
    out << text;
}

} // namespace

void write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& opts) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const std::array<const char*, 3> seeds{"pol", "the_donald", "gab"};
    const std::array<const char*, 5> all_communities{"gab", "pol", "reddit", "the_donald", "twitter"};
    const std::array<const char*, 4> subreddits{"funny", "politics", "pics", "memes"};

    std::vector<Scene> scenes;
    for (std::size_t t = 0; t < opts.templates; ++t) scenes.push_back(random_scene(rng));

    std::string manifest;
    std::size_t post_counter = 0;
    auto emit_post = [&](const std::string& image, const std::string& community, std::int64_t ts) {
        nlohmann::ordered_json p;
        p["id"] = fmt::format("p{:05d}", post_counter++);
        p["community"] = community;
        p["timestamp"] = ts;
        p["image"] = image;
        if (community == "reddit" || community == "the_donald" || community == "gab") {
            const double heavy = -std::log(std::max(u(rng), 1e-12));
            p["score"] = static_cast<std::int64_t>(std::floor(heavy * heavy * 20.0)) - 2;
        }
        if (community == "reddit") p["subcommunity"] = subreddits[static_cast<std::size_t>(u(rng) * subreddits.size())];
        manifest += p.dump() + "\n";
    };
    const std::int64_t span = static_cast<std::int64_t>(opts.days) * 86400;

    for (std::size_t t = 0; t < opts.templates; ++t) {
        const std::int64_t birth = opts.start_timestamp + static_cast<std::int64_t>(u(rng) * span * 0.5);
        for (std::size_t v = 0; v < opts.variants_per_template; ++v) {
            const Raster img = render(scenes[t], opts.width, opts.height, rng, 6.0, -6 + 12 * u(rng));
            const std::string name = fmt::format("images/t{:02d}_v{:02d}.png", t, v);
            write_image(dir / name, img);
            // First post on a seed community, then a short cascade elsewhere.
            std::int64_t ts = birth + static_cast<std::int64_t>(-std::log(std::max(u(rng), 1e-12)) * 3 * 86400);
            emit_post(name, seeds[static_cast<std::size_t>(u(rng) * seeds.size())], std::min(ts, opts.start_timestamp + span - 1));
            const int extra = static_cast<int>(u(rng) * 3);
            for (int k = 0; k < extra; ++k) {
                ts += static_cast<std::int64_t>(-std::log(std::max(u(rng), 1e-12)) * 86400);
                emit_post(name, all_communities[static_cast<std::size_t>(u(rng) * all_communities.size())],
                          std::min(ts, opts.start_timestamp + span - 1));
            }
        }
    }
    for (std::size_t k = 0; k < opts.noise_images; ++k) {
        const Scene s = random_scene(rng);
        const std::string name = fmt::format("images/n{:03d}.png", k);
        write_image(dir / name, render(s, opts.width, opts.height, rng, 3.0, 0.0));
        emit_post(name, all_communities[static_cast<std::size_t>(u(rng) * all_communities.size())],
                  opts.start_timestamp + static_cast<std::int64_t>(u(rng) * span));
    }
    write_text(dir / "manifest.jsonl", manifest);

    // Annotation corpus: meme entries cover template pairs; people and culture
    // entries overlap some of them; one screenshot image is planted per meme entry.
    Corpus corpus;
    std::string scores;
    auto fresh_hash = [&](std::size_t t) {
        return compute_phash(render(scenes[t], opts.width, opts.height, rng, 6.0, -6 + 12 * u(rng)));
    };
    auto screenshot_hash = [&] { return compute_phash(render(random_scene(rng), opts.width, opts.height, rng, 0.0, 0.0)); };
    for (std::size_t pair = 0; pair * 2 < opts.templates; ++pair) {
        MemeEntry e;
        e.entry_id = fmt::format("meme-{}", pair);
        e.name = fmt::format("Synthetic Meme {}", pair);
        e.url = fmt::format("https://example.org/memes/synthetic-meme-{}", pair);
        e.category = Category::Meme;
        e.tags = {"synthetic"};
        if (pair % 2 == 0) e.tags.insert("trump");
        if (pair % 3 == 1) e.tags.insert("racism");
        for (std::size_t t = pair * 2; t < std::min(opts.templates, pair * 2 + 2); ++t)
            for (int g = 0; g < 2; ++g) e.gallery.push_back(fresh_hash(t));
        const PHash64 shot = screenshot_hash();
        e.gallery.push_back(shot);
        scores += fmt::format("{{\"image\":\"{}\",\"p_screenshot\":0.95}}\n", format_phash_hex(shot));
        scores += fmt::format("{{\"image\":\"{}\",\"p_screenshot\":0.05}}\n", format_phash_hex(e.gallery.front()));
        corpus.push_back(std::move(e));
    }
    for (std::size_t t = 0; t < opts.templates; t += 3) {
        MemeEntry person{fmt::format("person-{}", t), fmt::format("Public Figure {}", t), "", Category::Person,
                         {"politics"}, {fresh_hash(t)}};
        corpus.push_back(std::move(person));
    }
    for (std::size_t t = 1; t < opts.templates; t += 2) {
        MemeEntry culture{fmt::format("culture-{}", t), fmt::format("Subculture {}", t), "", Category::Subculture,
                          {"imageboards"}, {fresh_hash(t)}};
        corpus.push_back(std::move(culture));
    }
    corpus.push_back({"event-unmatched", "Unmatched Event", "", Category::Event, {"history"}, {screenshot_hash()}});
    {
        std::ofstream out(dir / "corpus.jsonl", std::ios::binary);
        write_corpus(out, corpus);
    }
    write_text(dir / "screenshot_scores.jsonl", scores);

    std::string ratings = "correct,incorrect\n";
    for (int s = 0; s < 40; ++s) {
        const int yes = u(rng) < 0.8 ? 3 - (u(rng) < 0.2 ? 1 : 0) : static_cast<int>(u(rng) * 2);
        ratings += fmt::format("{},{}\n", yes, 3 - yes);
    }
    write_text(dir / "ratings.csv", ratings);

    write_text(dir / "config.ini",
               "[paths]\n"
               "images_manifest=manifest.jsonl\n"
               "corpus=corpus.jsonl\n"
               "screenshot_scores=screenshot_scores.jsonl\n"
               "ratings=ratings.csv\n\n"
               "[cluster]\n"
               "seed_communities=pol,the_donald,gab\n\n"
               "[graph]\n"
               "kappa=0.6\n"
               "degree_min=1\n\n"
               "[hawkes]\n"
               "iters=200\n"
               "burnin=50\n"
               "# few events per cluster; keep the weight prior subcritical\n"
               "weight_rate=10\n");
}

} // namespace memetrace

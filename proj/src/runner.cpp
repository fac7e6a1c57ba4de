#include "borglev/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include "borglev/fitting.hpp"
#include "borglev/parallel.hpp"
#include "borglev/potentials.hpp"
#include "borglev/stability.hpp"

namespace borglev {

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"eig",       "weyl",         "dtn",   "identity",
                                                "recover",   "stability",    "asympt-noise", "lemmas"};
    return kinds;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Typed access to a JSON object that remembers which keys were consumed.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        require(j_.is_object(), where_ + " must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            require(fallback.has_value(), where_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        return as_number(raw(key), where_ + "." + key);
    }

    long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
        if (!has(key)) {
            require(fallback.has_value(), where_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        return as_integer(raw(key), where_ + "." + key);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        require(v.is_boolean(), where_ + "." + key + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            require(fallback.has_value(), where_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        const json& v = raw(key);
        require(v.is_string(), where_ + "." + key + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, bool required = true) {
        if (!has(key)) {
            require(!required, where_ + ": missing required key '" + key + "'");
            return {};
        }
        const json& v = raw(key);
        require(v.is_array(), where_ + "." + key + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(as_number(e, where_ + "." + key));
        return out;
    }

    /// Rejects every key that was not consumed.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ValidationError(where_ + ": unknown key '" + it.key() + "'");
    }

    static double as_number(const json& v, const std::string& what) {
        require(v.is_number(), what + " must be a number");
        const double x = v.get<double>();
        require(std::isfinite(x), what + " must be finite");
        return x;
    }

    static long long as_integer(const json& v, const std::string& what) {
        if (v.is_number_integer()) return v.get<long long>();
        require(v.is_number_float(), what + " must be an integer");
        const double x = v.get<double>();
        require(std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15, what + " must be an integer");
        return (long long)x;
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

json number_pair(double a, double b) { return json::array({a, b}); }

std::array<double, 2> center_of(Fields& f, const std::string& where) {
    if (!f.has("center")) return {0.5, 0.5};
    const json& c = f.raw("center");
    require(c.is_array() && c.size() == 2, where + ".center must be [x, y]");
    return {Fields::as_number(c[0], where + ".center"), Fields::as_number(c[1], where + ".center")};
}

cplx parse_lambda(const json& v, const std::string& what) {
    if (v.is_number()) return {Fields::as_number(v, what), 0.0};
    require(v.is_array() && v.size() == 2, what + " entries must be numbers or [re, im] pairs");
    return {Fields::as_number(v[0], what), Fields::as_number(v[1], what)};
}

std::vector<LemmaCase> parse_cases(Fields& f, const std::string& key, bool integral) {
    if (!f.has(key)) return {};
    const json& arr = f.raw(key);
    require(arr.is_array(), "lemmas." + key + " must be an array");
    std::vector<LemmaCase> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "lemmas." + key + "[" + std::to_string(i) + "]";
        Fields c(arr[i], where);
        LemmaCase lc;
        if (integral) {
            lc.b = c.number("b");
        } else {
            lc.mu = c.number("mu");
            if (c.has("nu1")) lc.nu1 = c.number("nu1");
            lc.jitter = c.number("jitter", 0.0);
            require(lc.jitter >= 0.0, where + ".jitter must be nonnegative");
        }
        lc.nu = c.number("nu");
        require(lc.nu >= 0.0, where + ".nu must be nonnegative");
        c.finish();
        out.push_back(lc);
    }
    return out;
}

json case_json(const LemmaCase& c, bool integral) {
    if (integral) return json{{"b", c.b}, {"nu", c.nu}};
    json j{{"mu", c.mu}, {"nu", c.nu}, {"jitter", c.jitter}};
    if (c.nu1) j["nu1"] = *c.nu1;
    return j;
}

std::set<std::string> kind_keys(const std::string& kind) {
    if (kind == "eig") return {"potential", "K"};
    if (kind == "weyl") return {"potential", "K", "m", "eps"};
    if (kind == "dtn") return {"potential", "lambdas", "K", "series_m", "N", "potential2", "decay_lambdas", "m", "eps"};
    if (kind == "identity") return {"potential", "taus", "xis"};
    if (kind == "recover")
        return {"potential", "taus", "source", "K", "N_drop", "cutoff_multiplier", "period_factor", "background"};
    if (kind == "stability") return {"family", "reference", "N", "m", "eps", "K"};
    if (kind == "asympt-noise")
        return {"potential", "potential2", "deltas", "A", "alpha", "m", "K", "tau", "cutoff_multiplier", "N_drop"};
    if (kind == "lemmas") return {"lemma1", "lemma2", "lemma3", "sharpness", "tau_min", "tau_max", "tau_count", "eps"};
    throw ValidationError("unknown experiment kind '" + kind + "'");
}

} // namespace

json canonical_potential(const json& spec, std::uint64_t default_seed) {
    if (spec.is_string()) {
        const std::string name = spec.get<std::string>();
        require(name == "zero", "potential name '" + name + "' needs parameters; use an object with a \"type\" key");
        return json{{"type", "zero"}};
    }
    Fields f(spec, "potential");
    const std::string type = f.string("type");
    json out{{"type", type}};
    if (type == "zero") {
    } else if (type == "constant") {
        out["c"] = f.number("c");
    } else if (type == "gaussian") {
        const auto c = center_of(f, "gaussian");
        out["center"] = number_pair(c[0], c[1]);
        out["width"] = f.number("width");
        out["amp"] = f.number("amp", 1.0);
        require(out["width"].get<double>() > 0.0, "gaussian width must be positive");
    } else if (type == "mode") {
        out["jx"] = f.integer("jx");
        out["jy"] = f.integer("jy");
        out["amp"] = f.number("amp", 1.0);
        require(out["jx"].get<long long>() >= 1 && out["jy"].get<long long>() >= 1 && out["jx"].get<long long>() < 1000 &&
                    out["jy"].get<long long>() < 1000,
                "mode indices must lie in [1, 999]");
    } else if (type == "random") {
        const long long seed = f.integer("seed", (long long)default_seed);
        require(seed >= 0, "random seed must be nonnegative");
        out["seed"] = seed;
        out["smoothness"] = f.number("smoothness", 2.0);
        out["amp"] = f.number("amp", 1.0);
        require(out["smoothness"].get<double>() >= 0.0, "random smoothness must be nonnegative");
    } else if (type == "bump") {
        const auto c = center_of(f, "bump");
        out["center"] = number_pair(c[0], c[1]);
        out["radius"] = f.number("radius");
        out["amp"] = f.number("amp", 1.0);
        require(out["radius"].get<double>() > 0.0, "bump radius must be positive");
    } else {
        throw ValidationError("unknown potential type '" + type + "'");
    }
    f.finish();
    return out;
}

Potential build_potential(const json& p, const GridSpec& grid) {
    const std::string type = p.at("type").get<std::string>();
    auto center = [&] { return std::array<double, 2>{p["center"][0].get<double>(), p["center"][1].get<double>()}; };
    if (type == "zero") return zero_potential(grid);
    if (type == "constant") return constant_potential(grid, p["c"].get<double>());
    if (type == "gaussian")
        return gaussian_potential(grid, center(), p["width"].get<double>(), p["amp"].get<double>());
    if (type == "mode")
        return mode_potential(grid, int(p["jx"].get<long long>()), int(p["jy"].get<long long>()), p["amp"].get<double>());
    if (type == "random")
        return random_potential(grid, std::uint64_t(p["seed"].get<long long>()), p["smoothness"].get<double>(),
                                p["amp"].get<double>());
    if (type == "bump") return bump_potential(grid, center(), p["radius"].get<double>(), p["amp"].get<double>());
    throw ValidationError("unknown potential type '" + type + "'");
}

ExperimentConfig parse_config(const json& j, const std::optional<std::string>& kind,
                              std::optional<std::uint64_t> seed) {
    Fields f(j, "config");
    ExperimentConfig c;
    if (f.has("kind")) {
        c.kind = f.string("kind");
        require(!kind || *kind == c.kind, "config kind '" + c.kind + "' does not match the requested '" + kind.value_or("") + "'");
    } else {
        require(kind.has_value(), "config: missing experiment kind");
        c.kind = *kind;
    }
    const std::set<std::string> allowed = kind_keys(c.kind);
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> common{"kind", "grid", "out", "seed", "threads", "cache"};
        if (!common.count(it.key()) && !allowed.count(it.key()))
            throw ValidationError("config: key '" + it.key() + "' is not valid for kind '" + c.kind + "'");
    }

    const long long cfg_seed = f.integer("seed", 0);
    require(cfg_seed >= 0, "config.seed must be nonnegative");
    c.seed = seed ? *seed : std::uint64_t(cfg_seed);
    c.out = f.string("out", c.out);
    require(!c.out.empty(), "config.out must not be empty");
    const long long threads = f.integer("threads", 1);
    require(threads >= 1 && threads <= 256, "config.threads must lie in [1, 256]");
    c.threads = int(threads);
    c.use_cache = f.boolean("cache", true);

    if (f.has("grid")) {
        Fields g(f.raw("grid"), "grid");
        c.lx = g.number("lx", 1.0);
        c.ly = g.number("ly", 1.0);
        const long long nx = g.integer("nx", 40), ny = g.integer("ny", 40);
        require(nx >= 8 && ny >= 8, "grid.nx and grid.ny must be at least 8");
        require(nx <= 400 && ny <= 400 && nx * ny <= 20000, "grid is too large for the dense eigensolver (nx*ny <= 20000)");
        c.nx = int(nx);
        c.ny = int(ny);
        g.finish();
    }
    const GridSpec grid = c.grid();
    const Index n_int = grid.interior_count();

    auto potential = [&](const std::string& key, bool required) -> std::optional<json> {
        if (!f.has(key)) {
            require(!required, "config: missing required key '" + key + "'");
            return std::nullopt;
        }
        json p = canonical_potential(f.raw(key), c.seed);
        build_potential(p, grid);
        return p;
    };
    auto count = [&](const std::string& key, long long fallback, long long lo, long long hi) {
        const long long v = f.integer(key, fallback);
        require(v >= lo && v <= hi,
                "config." + key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    };
    auto order = [&](int fallback) {
        const long long m = count("m", fallback, 1, 12);
        return int(m);
    };
    auto eps = [&](double fallback) {
        const double e = f.number("eps", fallback);
        require(e > 0.0 && e < 0.5, "config.eps must lie in (0, 1/2)");
        return e;
    };
    auto positive_list = [&](const std::string& key) {
        auto v = f.numbers(key);
        require(!v.empty(), "config." + key + " must not be empty");
        for (double x : v) require(x > 0.0, "config." + key + " entries must be positive");
        return v;
    };

    if (c.kind == "eig" || c.kind == "weyl") {
        c.potential = *potential("potential", true);
        c.K = count("K", std::min<Index>(50, n_int), c.kind == "weyl" ? 50 : 1, n_int);
        if (c.kind == "weyl") {
            c.m = order(2);
            c.eps = eps(0.25);
        }
    } else if (c.kind == "dtn") {
        c.potential = *potential("potential", true);
        c.potential2 = potential("potential2", false);
        const json& ls = f.raw("lambdas");
        require(ls.is_array() && !ls.empty(), "config.lambdas must be a nonempty array");
        for (const auto& v : ls) c.lambdas.push_back(parse_lambda(v, "config.lambdas"));
        c.K = count("K", 0, 0, n_int);
        if (f.has("series_m")) {
            c.series_m = int(f.integer("series_m"));
            require(c.K > 0, "config.series_m needs spectral data (K > 0)");
            require(*c.series_m >= 2 && *c.series_m <= 12, "config.series_m must lie in [2, 12]");
        }
        c.N = count("N", 0, 0, std::max<Index>(0, c.K - 1));
        c.decay_lambdas = f.numbers("decay_lambdas", false);
        if (!c.decay_lambdas.empty()) {
            require(c.potential2.has_value(), "config.decay_lambdas needs potential2");
            require(c.decay_lambdas.size() >= 3, "config.decay_lambdas needs at least 3 entries");
            for (double x : c.decay_lambdas) require(x < 0.0, "config.decay_lambdas must be negative real parts");
        }
        c.m = order(2);
        c.eps = eps(0.25);
    } else if (c.kind == "identity") {
        c.potential = *potential("potential", true);
        c.taus = positive_list("taus");
        for (double t : c.taus) require(t > 1.0, "config.taus entries must exceed 1");
        const json& xs = f.raw("xis");
        require(xs.is_array() && !xs.empty(), "config.xis must be a nonempty array of [x, y]");
        for (const auto& v : xs) {
            require(v.is_array() && v.size() == 2, "config.xis entries must be [x, y]");
            const Vec2 xi(Fields::as_number(v[0], "config.xis"), Fields::as_number(v[1], "config.xis"));
            require(xi.norm() > 0.0, "config.xis entries must be nonzero");
            c.xis.push_back(xi);
        }
    } else if (c.kind == "recover") {
        c.potential = *potential("potential", true);
        c.potential2 = potential("background", false);
        c.taus = positive_list("taus");
        for (double t : c.taus) require(t > 1.0, "config.taus entries must exceed 1");
        c.source = f.string("source", "direct");
        require(c.source == "direct" || c.source == "spectral", "config.source must be 'direct' or 'spectral'");
        if (c.source == "spectral") {
            c.K = count("K", n_int, 2, n_int);
            c.N_drop = count("N_drop", 0, 0, c.K - 1);
        } else {
            require(!f.has("K") && !f.has("N_drop"), "config.K and config.N_drop apply to the spectral source only");
            require(!c.potential2 || c.potential2->at("type") == "zero",
                    "a nonzero background needs the spectral source");
        }
        c.cutoff_multiplier = f.number("cutoff_multiplier", 6.0);
        require(c.cutoff_multiplier > 0.0, "config.cutoff_multiplier must be positive");
        c.period_factor = f.number("period_factor", 2.0);
        require(c.period_factor >= 1.0, "config.period_factor must be at least 1");
    } else if (c.kind == "stability") {
        Fields fam(f.raw("family"), "family");
        c.potential = canonical_potential(fam.raw("base"), c.seed);
        build_potential(c.potential, grid);
        c.family_t = fam.numbers("t");
        fam.finish();
        require(c.family_t.size() >= 5, "family.t needs at least 5 entries");
        c.potential2 = potential("reference", false);
        if (!c.potential2) c.potential2 = json{{"type", "zero"}};
        c.N = count("N", 0, 0, n_int - 1);
        c.m = order(2);
        require(c.m >= 2, "config.m must be at least 2 for n = 2");
        c.eps = eps(0.25);
        c.K = count("K", 0, 0, n_int);
    } else if (c.kind == "asympt-noise") {
        c.potential = *potential("potential", true);
        c.potential2 = potential("potential2", false);
        if (!c.potential2) c.potential2 = json{{"type", "zero"}};
        c.deltas = positive_list("deltas");
        for (double d : c.deltas) require(d < 1.0, "config.deltas entries must lie in (0, 1)");
        c.A = f.number("A", 1.0);
        require(c.A >= 0.0, "config.A must be nonnegative");
        c.m = order(2);
        require(c.m >= 2, "config.m must be at least 2 for n = 2");
        c.alpha = f.number("alpha", 2.0);
        const double threshold = (4.0 * c.m - 1.0) / 4.0;
        require(c.alpha > threshold, "config.alpha must exceed (4m-1)/(2n) = " + format_double(threshold));
        c.K = count("K", n_int, 2, n_int);
        c.tau = f.number("tau", 10.0);
        require(c.tau > 1.0, "config.tau must exceed 1");
        c.cutoff_multiplier = f.number("cutoff_multiplier", 6.0);
        require(c.cutoff_multiplier > 0.0, "config.cutoff_multiplier must be positive");
        c.N_drop = count("N_drop", 5, 0, c.K - 1);
    } else if (c.kind == "lemmas") {
        c.lemmas.lemma1 = parse_cases(f, "lemma1", false);
        c.lemmas.lemma2 = parse_cases(f, "lemma2", true);
        c.lemmas.lemma3 = parse_cases(f, "lemma3", false);
        c.lemmas.sharpness = parse_cases(f, "sharpness", true);
        require(c.lemmas.lemma1.size() + c.lemmas.lemma2.size() + c.lemmas.lemma3.size() +
                        c.lemmas.sharpness.size() > 0,
                "config: lemmas needs at least one of lemma1, lemma2, lemma3, sharpness");
        c.lemmas.tau_min = f.number("tau_min", 8.0);
        c.lemmas.tau_max = f.number("tau_max", 256.0);
        c.lemmas.tau_count = int(count("tau_count", 11, 3, 200));
        require(c.lemmas.tau_min >= 1.0 && c.lemmas.tau_max >= 10.0 * c.lemmas.tau_min,
                "tau range must satisfy 1 <= tau_min and span at least one decade");
        c.lemmas.eps = eps(0.05);
        const double n = 2.0;
        for (const auto& lc : c.lemmas.lemma1)
            require(lc.mu < 2.0 * lc.nu / n - 1.0, "lemma1 case violates mu < 2 nu / n - 1");
        for (const auto& lc : c.lemmas.lemma3)
            require(lc.mu < 2.0 * lc.nu / n - 1.0, "lemma3 case violates mu < 2 nu / n - 1");
        for (const auto& lc : c.lemmas.lemma1)
            require(!lc.nu1 || (*lc.nu1 >= 0.0 && *lc.nu1 <= lc.nu), "nu1 must lie in [0, nu]");
        for (const auto& lc : c.lemmas.lemma3)
            require(!lc.nu1 || (*lc.nu1 >= 0.0 && *lc.nu1 <= lc.nu), "nu1 must lie in [0, nu]");
        for (const auto& lc : c.lemmas.lemma2) require(lc.b - lc.nu < -1.0, "lemma2 case violates b - nu < -1");
        for (const auto& lc : c.lemmas.sharpness) require(lc.b - lc.nu < -1.0, "sharpness case violates b - nu < -1");
    }
    f.finish();
    return c;
}

ExperimentConfig load_config(const fs::path& path, const std::optional<std::string>& kind,
                             std::optional<std::uint64_t> seed) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j, kind, seed);
}

json ExperimentConfig::canonical() const {
    json j{{"kind", kind}, {"grid", grid_to_json(grid())}, {"seed", seed}};
    auto put_potentials = [&](const char* first, const char* second) {
        j[first] = potential;
        if (potential2) j[second] = *potential2;
    };
    if (kind == "eig") {
        put_potentials("potential", "potential2");
        j["K"] = K;
    } else if (kind == "weyl") {
        put_potentials("potential", "potential2");
        j["K"] = K;
        j["m"] = m;
        j["eps"] = eps;
    } else if (kind == "dtn") {
        put_potentials("potential", "potential2");
        json ls = json::array();
        for (const cplx& l : lambdas) ls.push_back(number_pair(l.real(), l.imag()));
        j["lambdas"] = ls;
        j["K"] = K;
        j["series_m"] = series_m ? json(*series_m) : json(nullptr);
        j["N"] = N;
        j["decay_lambdas"] = decay_lambdas;
        j["m"] = m;
        j["eps"] = eps;
    } else if (kind == "identity") {
        j["potential"] = potential;
        j["taus"] = taus;
        json xs = json::array();
        for (const Vec2& x : xis) xs.push_back(number_pair(x[0], x[1]));
        j["xis"] = xs;
    } else if (kind == "recover") {
        put_potentials("potential", "background");
        j["taus"] = taus;
        j["source"] = source;
        j["K"] = K;
        j["N_drop"] = N_drop;
        j["cutoff_multiplier"] = cutoff_multiplier;
        j["period_factor"] = period_factor;
    } else if (kind == "stability") {
        j["family"] = json{{"base", potential}, {"t", family_t}};
        j["reference"] = *potential2;
        j["N"] = N;
        j["m"] = m;
        j["eps"] = eps;
        j["K"] = K;
    } else if (kind == "asympt-noise") {
        put_potentials("potential", "potential2");
        j["deltas"] = deltas;
        j["A"] = A;
        j["alpha"] = alpha;
        j["m"] = m;
        j["K"] = K;
        j["tau"] = tau;
        j["cutoff_multiplier"] = cutoff_multiplier;
        j["N_drop"] = N_drop;
    } else if (kind == "lemmas") {
        auto list = [](const std::vector<LemmaCase>& cs, bool integral) {
            json a = json::array();
            for (const auto& c : cs) a.push_back(case_json(c, integral));
            return a;
        };
        j["lemma1"] = list(lemmas.lemma1, false);
        j["lemma2"] = list(lemmas.lemma2, true);
        j["lemma3"] = list(lemmas.lemma3, false);
        j["sharpness"] = list(lemmas.sharpness, true);
        j["tau_min"] = lemmas.tau_min;
        j["tau_max"] = lemmas.tau_max;
        j["tau_count"] = lemmas.tau_count;
        j["eps"] = lemmas.eps;
    }
    return j;
}

CachedSpectrum cache_spectral(const json& potential, const GridSpec& grid, Index K, const SpectralCache* cache) {
    const json key{{"grid", grid_to_json(grid)}, {"potential", potential}, {"K", K}, {"keep_vectors", false}};
    CachedSpectrum out;
    out.dataset_id = sha256_hex(key.dump());
    if (cache) {
        bool corrupt = false;
        if (auto sd = cache->load(out.dataset_id, &corrupt)) {
            if (sd->grid == grid && sd->count() == K) {
                out.data = std::make_shared<const SpectralData>(std::move(*sd));
                out.status = CacheStatus::Hit;
                return out;
            }
            corrupt = true;
        }
        out.status = corrupt ? CacheStatus::Recomputed : CacheStatus::Miss;
    }
    auto sd = std::make_shared<const SpectralData>(solve_eigen(build_potential(potential, grid), grid, K, false));
    if (cache) cache->store(out.dataset_id, *sd);
    out.data = std::move(sd);
    return out;
}

CachedSpectrum cache_spectral(const ExperimentConfig& config, const SpectralCache& cache) {
    require(config.K >= 1, "cache_spectral needs K >= 1");
    return cache_spectral(config.potential, config.grid(), config.K, &cache);
}

json RunManifest::to_json() const {
    json st = json::array();
    for (const auto& s : stages) st.push_back(json{{"name", s.name}, {"seconds", s.seconds}, {"ok", s.ok}});
    json j{{"config_hash", config_hash}, {"versions", versions}, {"wall_time", wall_time}, {"stages", st},
           {"outputs", outputs},         {"complete", complete}};
    j["failed_stage"] = failed_stage.empty() ? json(nullptr) : json(failed_stage);
    j["error"] = error.empty() ? json(nullptr) : json(error);
    return j;
}

namespace {

json versions_json() {
    return json{{"borglev", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"boost", BOOST_LIB_VERSION},
                {"openssl", OPENSSL_VERSION_TEXT},
                {"compiler", __VERSION__}};
}

json complex_json(cplx z) { return number_pair(z.real(), z.imag()); }

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string opt_cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

/// Output directory, stage timing and manifest bookkeeping of one run.
class Session {
public:
    Session(const ExperimentConfig& config, const SpectralCache& cache)
        : config(config), cache(cache), out(config.out), start_(Clock::now()) {
        manifest.config_hash = sha256_hex(config.canonical().dump());
        manifest.versions = versions_json();
    }

    template <class F>
    void stage(const std::string& name, F&& fn) {
        current_ = name;
        const auto t0 = Clock::now();
        StageTiming st{name, 0.0, false};
        try {
            fn();
            st.ok = true;
        } catch (...) {
            st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            manifest.stages.push_back(st);
            throw;
        }
        st.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        manifest.stages.push_back(st);
    }

    void table(const std::string& name, const CsvTable& t) {
        t.write(out / name);
        manifest.outputs.push_back(name);
    }
    void document(const std::string& name, const json& j) {
        write_json(out / name, j);
        manifest.outputs.push_back(name);
    }
    void dtn(const std::string& name, const DtnMatrix& d) {
        export_dtn(d, out / name);
        manifest.outputs.push_back(name);
        manifest.outputs.push_back(fs::path(name).replace_extension(".json").string());
    }

    std::shared_ptr<const SpectralData> spectrum(const json& potential, Index K) {
        CachedSpectrum cs = cache_spectral(potential, config.grid(), K, config.use_cache ? &cache : nullptr);
        datasets.push_back(json{{"dataset_id", cs.dataset_id},
                                {"status", config.use_cache ? json(to_string(cs.status)) : json("disabled")}});
        return cs.data;
    }

    void finish(bool complete, const std::string& error = {}) {
        manifest.complete = complete;
        if (!complete) {
            manifest.failed_stage = current_;
            manifest.error = error;
        }
        manifest.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
        json j = manifest.to_json();
        j["kind"] = config.kind;
        j["seed"] = config.seed;
        j["threads"] = config.threads;
        j["cache"] = json{{"enabled", config.use_cache}, {"datasets", datasets}};
        write_json(out / "manifest.json", j);
    }

    const ExperimentConfig& config;
    const SpectralCache& cache;
    fs::path out;
    RunManifest manifest;
    json datasets = json::array();

private:
    Clock::time_point start_;
    std::string current_ = "setup";
};

json grid_summary(const ExperimentConfig& c) { return grid_to_json(c.grid()); }

void run_eig(Session& s) {
    const auto& c = s.config;
    std::shared_ptr<const SpectralData> sd;
    s.stage("eigensolve", [&] { sd = s.spectrum(c.potential, c.K); });
    s.stage("report", [&] {
        CsvTable t({"k", "lambda"});
        for (Index k = 0; k < sd->count(); ++k) t.row({cell(k + 1), cell(sd->eigenvalues[k])});
        s.table("eigenvalues.csv", t);
        s.document("summary.json", json{{"kind", "eig"},
                                        {"grid", grid_summary(c)},
                                        {"potential", c.potential},
                                        {"K", sd->count()},
                                        {"lambda_1", sd->eigenvalues[0]},
                                        {"lambda_K", sd->eigenvalues[sd->count() - 1]},
                                        {"sup_bound", sd->sup_bound},
                                        {"eigen_residual_tolerance", 1e-8}});
    });
}

void run_weyl(Session& s) {
    const auto& c = s.config;
    std::shared_ptr<const SpectralData> sd;
    s.stage("eigensolve", [&] { sd = s.spectrum(c.potential, c.K); });
    WeylReport w;
    s.stage("weyl", [&] { w = weyl_validate(*sd, c.m, c.eps); });
    s.stage("report", [&] {
        const double expo = 0.75 + c.eps / 2.0;
        CsvTable t({"k", "lambda", "lambda_over_k", "counting_residual", "trace_norm", "trace_ratio"});
        for (Index k = 0; k < sd->count(); ++k) {
            const double lam = sd->eigenvalues[k];
            const double tn = boundary_l2_norm(RealVector(sd->traces.col(k)), sd->grid);
            t.row({cell(k + 1), cell(lam), cell(lam / double(k + 1)),
                   cell(double(k + 1) - w.c_n * lam - w.c_boundary * std::sqrt(lam)), cell(tn),
                   cell(tn / std::pow(lam, expo))});
        }
        s.table("weyl.csv", t);
        s.document("summary.json", json{{"kind", "weyl"},
                                        {"grid", grid_summary(c)},
                                        {"potential", c.potential},
                                        {"K", sd->count()},
                                        {"m", c.m},
                                        {"eps", c.eps},
                                        {"c_n", w.c_n},
                                        {"c_n_reference", 1.0 / (4.0 * std::numbers::pi)},
                                        {"c_n_relative_gap", std::abs(w.c_n * 4.0 * std::numbers::pi - 1.0)},
                                        {"c_boundary", w.c_boundary},
                                        {"c_star", w.c_star},
                                        {"c_upper", w.c_upper},
                                        {"A_n", w.A_n},
                                        {"trace_constant", w.trace_constant},
                                        {"trace_exponent", expo},
                                        {"fit_window", {w.fit_begin, w.fit_end}}});
    });
}

void run_dtn(Session& s) {
    const auto& c = s.config;
    const GridSpec grid = c.grid();
    const Potential q = build_potential(c.potential, grid);
    std::shared_ptr<const SpectralData> sd;
    if (c.K > 0) s.stage("eigensolve", [&] { sd = s.spectrum(c.potential, c.K); });

    CsvTable t({"index", "lambda_re", "lambda_im", "direct_norm", "symmetry_residual", "spectral_gap",
                "series_m", "series_norm", "series_tail_bound"});
    json rows = json::array();
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
        const cplx lam = c.lambdas[i];
        const std::string tag = std::to_string(i);
        s.stage("dtn[" + tag + "]", [&] {
            const DtnMatrix d = dtn_direct(q, lam, grid, c.threads);
            s.dtn("dtn_direct_" + tag + ".csv", d);
            const double norm = l2_operator_norm(d.entries, grid);
            std::optional<double> gap, snorm, stail;
            if (sd) {
                const DtnMatrix sp = dtn_from_spectrum(*sd, lam);
                gap = l2_operator_norm(sp.entries - d.entries, grid) / norm;
                if (c.series_m) {
                    const DtnMatrix ser = dtn_derivative_series(*sd, lam, *c.series_m, c.N);
                    s.dtn("dtn_series_" + tag + ".csv", ser);
                    snorm = l2_operator_norm(ser.entries, grid);
                    stail = ser.tail_bound;
                }
            }
            t.row({cell(Index(i)), cell(lam.real()), cell(lam.imag()), cell(norm),
                   cell(symmetry_residual(d.entries, grid)), opt_cell(gap),
                   c.series_m ? cell(*c.series_m) : std::string(), opt_cell(snorm), opt_cell(stail)});
            rows.push_back(json{{"lambda", complex_json(lam)},
                                {"direct_norm", norm},
                                {"spectral_gap", gap ? json(*gap) : json(nullptr)},
                                {"series_tail_bound", stail ? json(*stail) : json(nullptr)}});
        });
    }
    s.stage("report", [&] { s.table("dtn.csv", t); });

    json decay = nullptr;
    if (!c.decay_lambdas.empty()) {
        s.stage("decay", [&] {
            const Potential q2 = build_potential(*c.potential2, grid);
            std::vector<cplx> ls;
            for (double x : c.decay_lambdas) ls.emplace_back(x, 0.0);
            const DecayReport r = verify_dtn_decay(q, q2, grid, c.m, c.eps, ls, c.threads);
            CsvTable dt({"j", "lambda_re", "lambda_im", "norm", "fitted_slope", "bound_slope", "pass"});
            json orders = json::array();
            for (const auto& o : r.orders) {
                for (std::size_t i = 0; i < r.lambdas.size(); ++i)
                    dt.row({cell(o.j), cell(r.lambdas[i].real()), cell(r.lambdas[i].imag()), cell(o.norms[i]),
                            cell(o.fitted_slope), cell(o.bound_slope), cell(o.pass)});
                orders.push_back(json{{"j", o.j},
                                      {"fitted_slope", o.fitted_slope},
                                      {"bound_slope", o.bound_slope},
                                      {"smallest_C", o.smallest_C},
                                      {"degenerate", o.degenerate},
                                      {"pass", o.pass}});
            }
            s.table("decay.csv", dt);
            decay = json{{"eps", r.eps}, {"sigma", r.sigma}, {"slope_tolerance", 0.1}, {"orders", orders},
                         {"pass", r.pass}};
        });
    }
    s.stage("summary", [&] {
        s.document("summary.json", json{{"kind", "dtn"},
                                        {"grid", grid_summary(c)},
                                        {"potential", c.potential},
                                        {"K", c.K},
                                        {"N", c.N},
                                        {"series_m", c.series_m ? json(*c.series_m) : json(nullptr)},
                                        {"lambdas", rows},
                                        {"decay", decay}});
    });
}

void run_identity(Session& s) {
    const auto& c = s.config;
    const GridSpec grid = c.grid();
    const Potential q = build_potential(c.potential, grid);
    CsvTable t({"xi1", "xi2", "tau", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "remainder_abs",
                "background_gap", "discrete_residual"});
    json fits = json::array();
    double worst = 0.0, worst_discrete = 0.0;
    for (std::size_t x = 0; x < c.xis.size(); ++x) {
        std::vector<double> rem(c.taus.size());
        std::vector<IdentityReport> reps(c.taus.size());
        s.stage("identity[" + std::to_string(x) + "]", [&] {
            parallel_for(c.taus.size(), c.threads, [&](std::size_t i) {
                reps[i] = verify_identity_3_1(q, make_geometry(c.xis[x], c.taus[i]), grid);
            });
        });
        for (std::size_t i = 0; i < c.taus.size(); ++i) {
            const IdentityReport& r = reps[i];
            rem[i] = std::abs(r.remainder);
            worst = std::max(worst, r.residual);
            worst_discrete = std::max(worst_discrete, r.discrete_residual);
            t.row({cell(c.xis[x][0]), cell(c.xis[x][1]), cell(c.taus[i]), cell(r.lhs.real()), cell(r.lhs.imag()),
                   cell(r.rhs.real()), cell(r.rhs.imag()), cell(r.residual), cell(rem[i]), cell(r.background_gap),
                   cell(r.discrete_residual)});
        }
        std::set<double> distinct(c.taus.begin(), c.taus.end());
        const bool fit = distinct.size() >= 2 && std::all_of(rem.begin(), rem.end(), [](double v) { return v > 0; });
        fits.push_back(json{{"xi", number_pair(c.xis[x][0], c.xis[x][1])},
                            {"remainder_slope", fit ? json(fit_loglog(c.taus, rem).slope) : json(nullptr)}});
    }
    s.stage("report", [&] {
        s.table("identity.csv", t);
        s.document("summary.json", json{{"kind", "identity"},
                                        {"grid", grid_summary(c)},
                                        {"potential", c.potential},
                                        {"max_residual", worst},
                                        {"max_discrete_residual", worst_discrete},
                                        {"residual_tolerance", 2e-2},
                                        {"remainder_predicted_slope", -1.0},
                                        {"remainder_fits", fits}});
    });
}

void run_recover(Session& s) {
    const auto& c = s.config;
    const GridSpec grid = c.grid();
    const Potential q = build_potential(c.potential, grid);
    const json bg_spec = c.potential2 ? *c.potential2 : json{{"type", "zero"}};
    const Potential bg = build_potential(bg_spec, grid);
    const Potential truth = combine(q, 1.0, bg, -1.0, q.id + "-" + bg.id);

    FourierSource source = FourierSource::direct();
    if (c.source == "spectral") {
        std::shared_ptr<const SpectralData> d1, d2;
        s.stage("eigensolve", [&] {
            d1 = s.spectrum(c.potential, c.K);
            d2 = s.spectrum(bg_spec, c.K);
        });
        source = FourierSource::spectral(d1, d2, c.N_drop);
    }
    const ReconstructionOptions opts{c.cutoff_multiplier, c.period_factor, c.threads};

    CsvTable samples({"xi1", "xi2", "tau", "re", "im", "source"});
    CsvTable est({"x", "y", "tau", "estimate", "truth"});
    json runs = json::array();
    std::vector<double> fit_tau, fit_err;
    for (double tau : c.taus) {
        Reconstruction r;
        s.stage("reconstruct[tau=" + format_double(tau) + "]",
                [&] { r = reconstruct_potential(truth, tau, grid, source, opts); });
        double err = 0.0;
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            const FourierSample& sm = r.samples[i];
            samples.row({cell(sm.xi[0]), cell(sm.xi[1]), cell(tau), cell(sm.value.real()), cell(sm.value.imag()),
                         cell(sm.source)});
            err = std::max(err, std::abs(sm.value - r.exact[i]));
        }
        for (Index k = 0; k < grid.interior_count(); ++k)
            est.row({cell(grid.x_of(k)), cell(grid.y_of(k)), cell(tau), cell(r.estimate.values[k]),
                     cell(truth.values[k])});
        if (err > 0.0) {
            fit_tau.push_back(tau);
            fit_err.push_back(err);
        }
        runs.push_back(json{{"tau", tau},
                            {"cutoff", r.radius},
                            {"theoretical_cutoff", r.theoretical_radius},
                            {"l2_error", r.l2_error},
                            {"lowfreq_residual", r.lowfreq_residual},
                            {"highfreq_truncation", r.highfreq_truncation},
                            {"max_sample_error", err},
                            {"samples", r.samples.size()}});
    }
    s.stage("report", [&] {
        s.table("fourier_samples.csv", samples);
        s.table("estimate.csv", est);
        const bool fit = std::set<double>(fit_tau.begin(), fit_tau.end()).size() >= 2;
        json j{{"kind", "recover"},
               {"grid", grid_summary(c)},
               {"potential", c.potential},
               {"background", bg_spec},
               {"source", source.name()},
               {"K", c.K},
               {"N_drop", c.N_drop},
               {"cutoff_multiplier", c.cutoff_multiplier},
               {"period_factor", c.period_factor},
               {"remainder_fit", fit ? json(fit_loglog(fit_tau, fit_err).slope) : json(nullptr)},
               {"remainder_predicted_slope", -1.0}};
        if (runs.size() == 1) {
            for (auto it = runs[0].begin(); it != runs[0].end(); ++it) j[it.key()] = it.value();
        }
        j["runs"] = runs;
        s.document("reconstruction.json", j);
    });
}

void run_stability(Session& s) {
    const auto& c = s.config;
    const GridSpec grid = c.grid();
    HolderReport r;
    s.stage("holder", [&] {
        const Potential base = build_potential(c.potential, grid);
        const Potential ref = build_potential(*c.potential2, grid);
        std::vector<std::pair<Potential, Potential>> family;
        for (double t : c.family_t)
            family.emplace_back(combine(ref, 1.0, base, t, ref.id + "+" + short_number(t) + "*" + base.id), ref);
        HolderOptions opts;
        opts.eps = c.eps;
        opts.threads = c.threads;
        r = holder_experiment(family, c.N, c.m, grid, c.K, opts);
    });
    s.stage("report", [&] {
        CsvTable t({"pair_id", "t", "delta0", "delta1", "delta", "l2_diff", "tail_bound"});
        for (std::size_t i = 0; i < r.points.size(); ++i) {
            const HolderPoint& p = r.points[i];
            t.row({cell(p.pair_id), cell(c.family_t[i]), cell(p.delta0), cell(p.delta1), cell(p.delta),
                   cell(p.l2_diff), cell(p.tail_bound)});
        }
        s.table("stability.csv", t);
        s.document("summary.json", json{{"kind", "stability"},
                                        {"grid", grid_summary(c)},
                                        {"family", json{{"base", c.potential}, {"t", c.family_t}}},
                                        {"reference", *c.potential2},
                                        {"gamma_paper", r.gamma_paper},
                                        {"gamma_alt", r.exponents.gamma_alt},
                                        {"gamma_emp", nullable(r.gamma_emp)},
                                        {"C_fit", nullable(r.C_fit)},
                                        {"fit_points", r.fit_points},
                                        {"asymptotic_window", r.asymptotic_window},
                                        {"degenerate", r.degenerate},
                                        {"M", r.M},
                                        {"N", r.N},
                                        {"m", r.m},
                                        {"eps", c.eps},
                                        {"K", r.K},
                                        {"tail_bound", r.tail_bound},
                                        {"max_tail_fraction", DeltaOptions{}.max_tail_fraction},
                                        {"pass", r.pass}});
    });
}

void run_noise(Session& s) {
    const auto& c = s.config;
    const GridSpec grid = c.grid();
    NoiseReport r;
    s.stage("noise", [&] {
        NoiseOptions opts;
        opts.tau = c.tau;
        opts.N_drop = c.N_drop;
        opts.reconstruction = ReconstructionOptions{c.cutoff_multiplier, 2.0, c.threads};
        r = asymptotic_noise_experiment(build_potential(c.potential, grid), build_potential(*c.potential2, grid),
                                        c.deltas, c.A, c.alpha, c.m, grid, c.K, opts);
    });
    s.stage("report", [&] {
        CsvTable t({"delta", "N_delta", "small_index_bound", "large_index_bound", "delta0", "delta1",
                    "data_distance", "tail_bound", "l2_error"});
        for (const auto& run : r.runs)
            t.row({cell(run.delta), cell(run.N_delta), cell(run.small_index_bound), cell(run.large_index_bound),
                   cell(run.data_distance.delta0), cell(run.data_distance.delta1), cell(run.data_distance.delta),
                   cell(run.data_distance.tail_bound), cell(run.l2_error)});
        s.table("noise.csv", t);
        s.document("summary.json", json{{"kind", "asympt-noise"},
                                        {"grid", grid_summary(c)},
                                        {"potential", c.potential},
                                        {"potential2", *c.potential2},
                                        {"A", r.A},
                                        {"alpha", r.alpha},
                                        {"alpha_threshold", r.alpha_threshold},
                                        {"m", r.m},
                                        {"K", r.K},
                                        {"tau", r.tau},
                                        {"cutoff_multiplier", r.cutoff_multiplier},
                                        {"baseline_error", r.baseline_error},
                                        {"N_drop", r.N_drop},
                                        {"dropped_error", r.dropped_error},
                                        {"drop_factor_limit", 2.0},
                                        {"drop_within_factor", r.drop_within_factor},
                                        {"gamma_emp", nullable(r.gamma_emp)},
                                        {"monotone", r.monotone}});
    });
}

void run_lemmas(Session& s) {
    const auto& c = s.config;
    const LemmaPlan& p = c.lemmas;
    const std::vector<double> taus = geometric_range(p.tau_min, p.tau_max, p.tau_count);
    CsvTable t({"lemma", "mu", "nu", "b", "regime", "tau", "value", "predicted_slope", "fitted_slope", "pass"});
    json reports = json::array();
    auto emit = [&](const BoundReport& r) {
        for (std::size_t i = 0; i < r.values.size(); ++i)
            t.row({cell(r.lemma), cell(r.mu), cell(r.nu), cell(r.b), cell(to_string(r.regime)), cell(r.abscissae[i]),
                   cell(r.values[i]), cell(r.predicted_slope), cell(r.fitted_slope), cell(r.pass)});
        json j{{"lemma", r.lemma},       {"mu", r.mu},
               {"nu", r.nu},             {"b", r.b},
               {"regime", to_string(r.regime)}, {"fitted_slope", r.fitted_slope},
               {"predicted_slope", r.predicted_slope}, {"smallest_C", r.smallest_C},
               {"tolerance", r.tolerance}, {"pass", r.pass}};
        if (!r.band_values.empty()) {
            j["band_slope"] = r.band_slope;
            j["band_predicted"] = r.band_predicted;
        }
        if (r.derived_slope) j["derived_slope"] = *r.derived_slope;
        if (r.pass_derived) j["pass_derived"] = *r.pass_derived;
        return j;
    };
    auto query = [&](const LemmaCase& lc) {
        LemmaQuery q;
        q.mu = lc.mu;
        q.nu = lc.nu;
        q.nu1 = lc.nu1;
        q.jitter = lc.jitter;
        q.eps = p.eps;
        return q;
    };
    s.stage("lemma1", [&] {
        for (const auto& lc : p.lemma1) reports.push_back(emit(check_lemma1(query(lc), taus)));
    });
    s.stage("lemma2", [&] {
        for (const auto& lc : p.lemma2) {
            const Lemma2Report r = check_lemma2(lc.b, lc.nu, taus, p.eps);
            json j = emit(r.bound);
            j["max_substitution_gap"] = r.max_substitution_gap;
            if (r.max_closed_form_gap) {
                j["max_closed_form_gap"] = *r.max_closed_form_gap;
                j["closed_form_tolerance"] = 1e-9;
            }
            reports.push_back(j);
        }
    });
    s.stage("lemma3", [&] {
        for (const auto& lc : p.lemma3) {
            std::vector<cplx> ls;
            for (double tau : taus) ls.emplace_back(-tau * tau, 0.0);
            reports.push_back(emit(check_lemma3(query(lc), ls)));
        }
    });
    json sharp = json::array();
    s.stage("sharpness", [&] {
        if (p.sharpness.empty()) return;
        std::vector<SharpnessCase> cases;
        for (const auto& lc : p.sharpness) cases.push_back({lc.b, lc.nu});
        const auto res = probe_sharpness(cases, taus, p.eps);
        CsvTable st({"b", "nu", "tau", "value", "fitted_slope", "lower_slope", "upper_slope", "slope_with_log",
                     "log_coefficient", "sharp_exponent", "regime_exponent", "middle_exponent",
                     "lower_matches_sharp"});
        for (const auto& r : res) {
            for (std::size_t i = 0; i < r.taus.size(); ++i)
                st.row({cell(r.params.b), cell(r.params.nu), cell(r.taus[i]), cell(r.values[i]), cell(r.fitted_slope),
                        cell(r.lower_slope), cell(r.upper_slope), cell(r.slope_with_log), cell(r.log_coefficient),
                        cell(r.sharp_exponent), cell(r.regime_exponent), cell(r.middle_exponent),
                        cell(r.lower_matches_sharp)});
            sharp.push_back(json{{"b", r.params.b},
                                 {"nu", r.params.nu},
                                 {"fitted_slope", r.fitted_slope},
                                 {"lower_slope", r.lower_slope},
                                 {"upper_slope", r.upper_slope},
                                 {"slope_with_log", r.slope_with_log},
                                 {"log_coefficient", r.log_coefficient},
                                 {"sharp_exponent", r.sharp_exponent},
                                 {"regime_exponent", r.regime_exponent},
                                 {"lower_matches_sharp", r.lower_matches_sharp}});
        }
        s.table("sharpness.csv", st);
    });
    s.stage("report", [&] {
        s.table("lemmas.csv", t);
        bool all = true;
        for (const auto& r : reports) all = all && r["pass"].get<bool>();
        s.document("summary.json", json{{"kind", "lemmas"},
                                        {"tau_range", {p.tau_min, p.tau_max}},
                                        {"tau_count", p.tau_count},
                                        {"eps", p.eps},
                                        {"slope_tolerance", 0.15},
                                        {"quadrature_tolerance", 1e-10},
                                        {"reports", reports},
                                        {"sharpness", sharp},
                                        {"all_pass", all}});
    });
}

} // namespace

RunResult run(const ExperimentConfig& config, const SpectralCache& cache) {
    Session s(config, cache);
    RunResult res;
    auto fail = [&](int code, const std::string& what) {
        res.exit_code = code;
        res.message = what;
        try {
            s.finish(false, what);
        } catch (const std::exception&) {
        }
    };
    try {
        fs::create_directories(s.out);
        const std::string& k = config.kind;
        if (k == "eig") run_eig(s);
        else if (k == "weyl") run_weyl(s);
        else if (k == "dtn") run_dtn(s);
        else if (k == "identity") run_identity(s);
        else if (k == "recover") run_recover(s);
        else if (k == "stability") run_stability(s);
        else if (k == "asympt-noise") run_noise(s);
        else if (k == "lemmas") run_lemmas(s);
        else throw ValidationError("unknown experiment kind '" + k + "'");
        s.finish(true);
    } catch (const ValidationError& e) {
        fail(2, e.what());
    } catch (const NumericalError& e) {
        fail(3, e.what());
    } catch (const fs::filesystem_error& e) {
        fail(2, e.what());
    }
    res.manifest = s.manifest;
    if (res.exit_code != 0 && !res.manifest.failed_stage.empty())
        res.message = "stage '" + res.manifest.failed_stage + "' failed: " + res.message;
    return res;
}

RunResult run(const ExperimentConfig& config) { return run(config, SpectralCache(SpectralCache::default_root())); }

RunResult run(const std::string& kind, const fs::path& config_path, const std::optional<std::string>& out,
              std::optional<int> threads, std::optional<std::uint64_t> seed) {
    ExperimentConfig config;
    try {
        require(std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) != experiment_kinds().end(),
                "unknown experiment kind '" + kind + "'");
        config = load_config(config_path, kind, seed);
        if (out) {
            require(!out->empty(), "--out must not be empty");
            config.out = *out;
        }
        if (threads) {
            require(*threads >= 1 && *threads <= 256, "--threads must lie in [1, 256]");
            config.threads = *threads;
        }
    } catch (const ValidationError& e) {
        RunResult r;
        r.exit_code = 2;
        r.message = e.what();
        return r;
    }
    return run(config);
}

} // namespace borglev

#include <gtest/gtest.h>

#include <unistd.h>

#include "borglev/potentials.hpp"
#include "borglev/runner.hpp"

using namespace borglev;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                ("borglev-" + std::to_string(::getpid()) + "-" + info->test_suite_name() + "-" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

json eig_config(const fs::path& out) {
    return json{{"kind", "eig"}, {"grid", {{"nx", 12}, {"ny", 10}}}, {"potential", {{"type", "gaussian"}, {"width", 0.2}, {"amp", 3}}},
                {"K", 30}, {"out", out.string()}};
}

} // namespace

TEST(ReportIo, Sha256KnownAnswer) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ReportIo, CsvCellsRoundTrip) {
    EXPECT_EQ(cell(std::string("a,b")), "\"a,b\"");
    EXPECT_EQ(cell(std::string("say \"hi\"")), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(cell(true), "true");
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x);
    CsvTable t({"a", "b"});
    t.row({"1", "2"});
    EXPECT_EQ(t.str(), "a,b\n1,2\n");
    EXPECT_THROW(t.row({"1"}), ValidationError);
}

TEST(ReportIo, SpectralRoundTripIsExact) {
    TempDir tmp;
    const GridSpec g = build_grid(1.0, 1.2, 9, 11);
    const SpectralData sd = solve_eigen(random_potential(g, 5, 2.0, 4.0), g, 20, true);
    save_spectral(sd, tmp / "sd");
    const SpectralData back = load_spectral(tmp / "sd");
    EXPECT_TRUE(back.grid == sd.grid);
    EXPECT_EQ(back.potential_id, sd.potential_id);
    EXPECT_EQ(back.sup_bound, sd.sup_bound);
    EXPECT_EQ(back.eigenvalues, sd.eigenvalues);
    EXPECT_EQ(back.traces, sd.traces);
    EXPECT_EQ(back.eigenvectors, sd.eigenvectors);
    const json meta = json::parse(read_text(tmp / "sd" / "spectral.json"));
    EXPECT_EQ(meta["K"], 20);
    EXPECT_EQ(meta["grid"]["nx"], 9);
}

TEST(ReportIo, TamperedPayloadIsDetected) {
    TempDir tmp;
    const GridSpec g = build_grid(1.0, 1.0, 8, 8);
    save_spectral(solve_eigen(zero_potential(g), g, 5, false), tmp / "sd");
    std::string body = read_text(tmp / "sd" / "spectral.csv");
    body[body.find('\n') + 3] = '7';
    write_text(tmp / "sd" / "spectral.csv", body);
    EXPECT_THROW(load_spectral(tmp / "sd"), ValidationError);
}

TEST(ReportIo, DtnExportHasMetadata) {
    TempDir tmp;
    const GridSpec g = build_grid(1.0, 1.0, 8, 8);
    const DtnMatrix d = dtn_direct(zero_potential(g), cplx(-2.0, 1.0), g);
    export_dtn(d, tmp / "d.csv");
    const json meta = json::parse(read_text(tmp / "d.json"));
    EXPECT_EQ(meta["kind"], "direct");
    EXPECT_EQ(meta["lambda"][1], 1.0);
    const std::string csv = read_text(tmp / "d.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,col,re,im");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + g.boundary_count() * g.boundary_count());
}

TEST(Config, ParsesAndCanonicalizes) {
    const ExperimentConfig c = parse_config(eig_config("x"));
    EXPECT_EQ(c.kind, "eig");
    EXPECT_EQ(c.nx, 12);
    EXPECT_EQ(c.potential["center"], json::array({0.5, 0.5}));
    EXPECT_EQ(c.potential["amp"], 3.0);
    json other = eig_config("elsewhere");
    other["threads"] = 4;
    EXPECT_EQ(parse_config(other).canonical(), c.canonical());
    other["K"] = 31;
    EXPECT_NE(parse_config(other).canonical(), c.canonical());
}

TEST(Config, RejectsInvalidInput) {
    json j = eig_config("x");
    j["bogus"] = 1;
    EXPECT_THROW(parse_config(j), ValidationError);
    j = eig_config("x");
    j["grid"]["nx"] = -4;
    EXPECT_THROW(parse_config(j), ValidationError);
    j = eig_config("x");
    j["grid"]["spacing"] = 0.1;
    EXPECT_THROW(parse_config(j), ValidationError);
    j = eig_config("x");
    j["potential"]["colour"] = "red";
    EXPECT_THROW(parse_config(j), ValidationError);
    j = eig_config("x");
    j["K"] = 1000;
    EXPECT_THROW(parse_config(j), ValidationError);
    j = eig_config("x");
    j["K"] = 2.5;
    EXPECT_THROW(parse_config(j), ValidationError);
    EXPECT_THROW(parse_config(eig_config("x"), std::string("weyl")), ValidationError);
    j = eig_config("x");
    j["taus"] = json::array({4});
    EXPECT_THROW(parse_config(j), ValidationError);
    j = json{{"kind", "asympt-noise"}, {"potential", "zero"}, {"deltas", {0.1}}, {"alpha", 1.75}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j = json{{"kind", "lemmas"}, {"lemma2", json::array({json{{"b", 0.5}, {"nu", 1}}})}};
    EXPECT_THROW(parse_config(j), ValidationError);
    j = json{{"kind", "stability"}, {"family", {{"base", {{"type", "bump"}, {"radius", 0.3}}}, {"t", {0.1, 0.2}}}}};
    EXPECT_THROW(parse_config(j), ValidationError);
}

TEST(Config, SeedsResolveIntoRandomPotentials) {
    json j = eig_config("x");
    j["potential"] = json{{"type", "random"}, {"smoothness", 2}, {"amp", 1}};
    j["seed"] = 9;
    EXPECT_EQ(parse_config(j).potential["seed"], 9);
    EXPECT_EQ(parse_config(j, std::nullopt, 42).potential["seed"], 42);
    j["potential"]["seed"] = 3;
    EXPECT_EQ(parse_config(j, std::nullopt, 42).potential["seed"], 3);
}

TEST(Cache, HitMissAndRecompute) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    ExperimentConfig c = parse_config(eig_config("x"));
    const CachedSpectrum first = cache_spectral(c, cache);
    EXPECT_EQ(first.status, CacheStatus::Miss);
    const CachedSpectrum second = cache_spectral(c, cache);
    EXPECT_EQ(second.status, CacheStatus::Hit);
    EXPECT_EQ(second.dataset_id, first.dataset_id);
    EXPECT_EQ(second.data->eigenvalues, first.data->eigenvalues);
    EXPECT_EQ(second.data->traces, first.data->traces);
    // corrupt the payload: detected by hash and recomputed
    const fs::path csv = cache.entry(first.dataset_id) / "spectral.csv";
    write_text(csv, read_text(csv) + "garbage\n");
    const CachedSpectrum third = cache_spectral(c, cache);
    EXPECT_EQ(third.status, CacheStatus::Recomputed);
    EXPECT_EQ(third.data->eigenvalues, first.data->eigenvalues);
    EXPECT_EQ(cache_spectral(c, cache).status, CacheStatus::Hit);
    c.K = 31;
    const CachedSpectrum other = cache_spectral(c, cache);
    EXPECT_EQ(other.status, CacheStatus::Miss);
    EXPECT_NE(other.dataset_id, first.dataset_id);
}

TEST(Runner, EigRunWritesOutputsAndManifest) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    const RunResult r = run(parse_config(eig_config(tmp / "out")), cache);
    ASSERT_EQ(r.exit_code, 0) << r.message;
    EXPECT_TRUE(r.manifest.complete);
    EXPECT_EQ(r.manifest.outputs, (std::vector<std::string>{"eigenvalues.csv", "summary.json"}));
    const json m = json::parse(read_text(tmp / "out" / "manifest.json"));
    EXPECT_EQ(m["config_hash"], sha256_hex(parse_config(eig_config("y")).canonical().dump()));
    EXPECT_EQ(m["cache"]["datasets"][0]["status"], "miss");
    EXPECT_TRUE(m["versions"].contains("eigen"));
    const json s = json::parse(read_text(tmp / "out" / "summary.json"));
    EXPECT_EQ(s["eigen_residual_tolerance"], 1e-8);
}

TEST(Runner, RepeatedRunsAreBitwiseIdentical) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    json j = eig_config(tmp / "a");
    ASSERT_EQ(run(parse_config(j), cache).exit_code, 0);
    j["out"] = (tmp / "b").string();
    j["threads"] = 3;
    const RunResult second = run(parse_config(j), cache);
    ASSERT_EQ(second.exit_code, 0);
    const json m = json::parse(read_text(tmp / "b" / "manifest.json"));
    EXPECT_EQ(m["cache"]["datasets"][0]["status"], "hit");
    for (const char* f : {"eigenvalues.csv", "summary.json"})
        EXPECT_EQ(read_text(tmp / "a" / f), read_text(tmp / "b" / f)) << f;
}

TEST(Runner, ResultsDoNotDependOnThreadCount) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    json j{{"kind", "recover"},
           {"grid", {{"nx", 12}, {"ny", 12}}},
           {"potential", {{"type", "mode"}, {"jx", 1}, {"jy", 2}}},
           {"taus", {6}},
           {"cache", false},
           {"out", (tmp / "t1").string()}};
    ASSERT_EQ(run(parse_config(j), cache).exit_code, 0);
    j["threads"] = 4;
    j["out"] = (tmp / "t4").string();
    ASSERT_EQ(run(parse_config(j), cache).exit_code, 0);
    for (const char* f : {"fourier_samples.csv", "estimate.csv", "reconstruction.json"})
        EXPECT_EQ(read_text(tmp / "t1" / f), read_text(tmp / "t4" / f)) << f;
    EXPECT_FALSE(fs::exists(tmp / "cache"));
}

TEST(Runner, NumericalFailureNamesTheStage) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    json j{{"kind", "stability"},
           {"grid", {{"nx", 10}, {"ny", 10}}},
           {"family", {{"base", {{"type", "bump"}, {"radius", 0.3}}}, {"t", {0.05, 0.1, 0.2, 0.4, 0.8}}}},
           {"K", 40},
           {"out", (tmp / "o").string()}};
    const RunResult r = run(parse_config(j), cache);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(r.manifest.failed_stage, "holder");
    EXPECT_NE(r.message.find("holder"), std::string::npos);
    const json m = json::parse(read_text(tmp / "o" / "manifest.json"));
    EXPECT_FALSE(m["complete"].get<bool>());
    EXPECT_EQ(m["failed_stage"], "holder");
}

TEST(Runner, ValidationFailureWritesNothing) {
    TempDir tmp;
    json j = eig_config(tmp / "never");
    j["grid"]["nx"] = -4;
    write_text(tmp / "bad.json", j.dump());
    const RunResult r = run("eig", tmp / "bad.json");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_FALSE(fs::exists(tmp / "never"));
    EXPECT_EQ(run("eig", tmp / "missing.json").exit_code, 2);
    EXPECT_EQ(run("nonsense", tmp / "bad.json").exit_code, 2);
    write_text(tmp / "broken.json", "{\"kind\": ");
    EXPECT_EQ(run("eig", tmp / "broken.json").exit_code, 2);
}

TEST(Runner, LemmaSweepReportsPassingRows) {
    TempDir tmp;
    json j{{"kind", "lemmas"},
           {"lemma2", json::array({json{{"b", 0}, {"nu", 2}}})},
           {"tau_count", 6},
           {"out", (tmp / "o").string()}};
    const RunResult r = run(parse_config(j), SpectralCache(tmp / "cache"));
    ASSERT_EQ(r.exit_code, 0) << r.message;
    const std::string csv = read_text(tmp / "o" / "lemmas.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "lemma,mu,nu,b,regime,tau,value,predicted_slope,fitted_slope,pass");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    std::size_t pos = csv.find('\n') + 1, rows = 0;
    while (pos < csv.size()) {
        const std::size_t end = csv.find('\n', pos);
        EXPECT_EQ(csv.substr(end - 4, 4), "true");
        pos = end + 1;
        ++rows;
    }
    EXPECT_EQ(rows, 6u);
    const json s = json::parse(read_text(tmp / "o" / "summary.json"));
    EXPECT_LT(s["reports"][0]["max_closed_form_gap"].get<double>(), 1e-9);
    EXPECT_EQ(s["slope_tolerance"], 0.15);
}

TEST(Runner, EveryKindRunsOnASmallGrid) {
    TempDir tmp;
    const SpectralCache cache(tmp / "cache");
    const json grid{{"nx", 10}, {"ny", 10}};
    const json gauss{{"type", "gaussian"}, {"width", 0.12}, {"amp", 2}};
    const std::vector<std::pair<json, std::vector<std::string>>> cases{
        {{{"kind", "weyl"}, {"grid", grid}, {"potential", gauss}, {"K", 60}}, {"weyl.csv", "summary.json"}},
        {{{"kind", "dtn"}, {"grid", grid}, {"potential", gauss}, {"potential2", "zero"}, {"lambdas", {-10, {16, 8}}},
          {"K", 100}, {"series_m", 2}, {"decay_lambdas", {-20, -40, -80}}},
         {"dtn.csv", "decay.csv", "dtn_direct_0.csv", "dtn_series_1.json", "summary.json"}},
        {{{"kind", "identity"}, {"grid", grid}, {"potential", gauss}, {"taus", {3, 6}}, {"xis", {{3, 0}, {0, 2}}}},
         {"identity.csv", "summary.json"}},
        {{{"kind", "recover"}, {"grid", grid}, {"potential", gauss}, {"taus", {6}}, {"source", "spectral"}, {"N_drop", 2}},
         {"fourier_samples.csv", "reconstruction.json"}},
        {{{"kind", "stability"}, {"grid", grid}, {"family", {{"base", {{"type", "bump"}, {"radius", 0.3}}}, {"t", {0.1, 0.2, 0.3, 0.4, 0.5}}}}},
         {"stability.csv", "summary.json"}},
        {{{"kind", "asympt-noise"}, {"grid", {{"nx", 12}, {"ny", 12}}}, {"potential", {{"type", "mode"}, {"jx", 1}, {"jy", 1}}},
          {"deltas", {0.1, 0.01}}, {"tau", 6}, {"N_drop", 2}},
         {"noise.csv", "summary.json"}},
    };
    int i = 0;
    for (auto [j, files] : cases) {
        const fs::path out = tmp / ("run" + std::to_string(i++));
        j["out"] = out.string();
        const RunResult r = run(parse_config(j), cache);
        ASSERT_EQ(r.exit_code, 0) << j["kind"] << ": " << r.message;
        for (const auto& f : files) EXPECT_TRUE(fs::exists(out / f)) << j["kind"] << " " << f;
        const json m = json::parse(read_text(out / "manifest.json"));
        EXPECT_TRUE(m["complete"].get<bool>());
        for (const auto& f : m["outputs"]) EXPECT_TRUE(fs::exists(out / f.get<std::string>()));
    }
    const json rec = json::parse(read_text(tmp / "run3" / "reconstruction.json"));
    for (const char* k : {"tau", "cutoff", "l2_error", "lowfreq_residual", "remainder_fit"}) EXPECT_TRUE(rec.contains(k)) << k;
    const json st = json::parse(read_text(tmp / "run4" / "summary.json"));
    for (const char* k : {"gamma_paper", "gamma_emp", "C_fit", "N", "m", "K", "tail_bound"}) EXPECT_TRUE(st.contains(k)) << k;
}

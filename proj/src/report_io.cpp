#include "borglev/report_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace borglev {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    require(!header_.empty(), "CSV header is empty");
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    require(cells.size() == header_.size(), "CSV row width does not match the header");
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const fs::path& path) const { write_text(path, str()); }

std::string cell(double v) { return format_double(v); }
std::string cell(long long v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(Index v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path.string());
    os << text;
    if (!os) throw ValidationError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot read " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

json grid_to_json(const GridSpec& grid) {
    return json{{"lx", grid.lx()}, {"ly", grid.ly()}, {"nx", grid.nx()}, {"ny", grid.ny()}};
}

void export_dtn(const DtnMatrix& dtn, const fs::path& path) {
    CsvTable t({"row", "col", "re", "im"});
    for (Index i = 0; i < dtn.entries.rows(); ++i)
        for (Index j = 0; j < dtn.entries.cols(); ++j)
            t.row({cell(i), cell(j), cell(dtn.entries(i, j).real()), cell(dtn.entries(i, j).imag())});
    t.write(path);
    fs::path meta = path;
    meta.replace_extension(".json");
    write_json(meta, json{{"lambda", {dtn.lambda.real(), dtn.lambda.imag()}},
                          {"kind", to_string(dtn.kind)},
                          {"potential_id", dtn.potential_id},
                          {"m", dtn.m},
                          {"K", dtn.K},
                          {"N", dtn.N},
                          {"tail_bound", dtn.tail_bound},
                          {"grid", grid_to_json(dtn.grid)}});
}

namespace {

std::string spectral_csv(const SpectralData& sd) {
    std::string out = "k,lambda";
    for (Index b = 0; b < sd.grid.boundary_count(); ++b)
        out += ",t" + std::to_string(b) + "_re,t" + std::to_string(b) + "_im";
    out += '\n';
    for (Index k = 0; k < sd.count(); ++k) {
        out += std::to_string(k + 1) + ',' + format_double(sd.eigenvalues[k]);
        for (Index b = 0; b < sd.traces.rows(); ++b) out += ',' + format_double(sd.traces(b, k)) + ",0";
        out += '\n';
    }
    return out;
}

std::string matrix_csv(const RealMatrix& m) {
    std::string out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

class NumberReader {
public:
    NumberReader(const std::string& text, std::string what) : p_(text.c_str()), what_(std::move(what)) {}
    double next() {
        char* end = nullptr;
        const double v = std::strtod(p_, &end);
        if (end == p_) throw ValidationError(what_ + ": malformed number");
        p_ = end;
        if (*p_ == ',' || *p_ == '\n') ++p_;
        return v;
    }
    void skip_line() {
        while (*p_ && *p_ != '\n') ++p_;
        if (*p_) ++p_;
    }

private:
    const char* p_;
    std::string what_;
};

} // namespace

void save_spectral(const SpectralData& sd, const fs::path& dir) {
    fs::create_directories(dir);
    const std::string body = spectral_csv(sd);
    json meta{{"format", "borglev-spectral-1"},
              {"potential_id", sd.potential_id},
              {"K", sd.count()},
              {"grid", grid_to_json(sd.grid)},
              {"sup_bound", sd.sup_bound},
              {"spectral_sha256", sha256_hex(body)}};
    write_text(dir / "spectral.csv", body);
    if (sd.has_vectors()) {
        const std::string vec = matrix_csv(sd.eigenvectors);
        meta["eigenvectors_sha256"] = sha256_hex(vec);
        write_text(dir / "eigenvectors.csv", vec);
    } else {
        fs::remove(dir / "eigenvectors.csv");
    }
    // header last: an entry without spectral.json is incomplete
    write_json(dir / "spectral.json", meta);
}

SpectralData load_spectral(const fs::path& dir) {
    json meta;
    try {
        meta = json::parse(read_text(dir / "spectral.json"));
    } catch (const json::exception& e) {
        throw ValidationError("spectral.json is malformed: " + std::string(e.what()));
    }
    try {
        require(meta.at("format") == "borglev-spectral-1", "unknown spectral data format");
        const auto& g = meta.at("grid");
        GridSpec grid(g.at("lx").get<double>(), g.at("ly").get<double>(), g.at("nx").get<int>(), g.at("ny").get<int>());
        const Index K = meta.at("K").get<Index>();
        require(K >= 0 && K <= grid.interior_count(), "spectral K out of range");
        auto checked = [&](const std::string& file, const std::string& key) {
            const std::string text = read_text(dir / file);
            if (sha256_hex(text) != meta.at(key).get<std::string>())
                throw ValidationError(file + " does not match its recorded hash");
            return text;
        };
        SpectralData sd{grid, meta.at("potential_id").get<std::string>(), meta.at("sup_bound").get<double>(),
                        RealVector(K), RealMatrix(grid.boundary_count(), K), RealMatrix()};
        const std::string body = checked("spectral.csv", "spectral_sha256");
        NumberReader rd(body, "spectral.csv");
        rd.skip_line();
        for (Index k = 0; k < K; ++k) {
            require(rd.next() == double(k + 1), "spectral.csv rows out of order");
            sd.eigenvalues[k] = rd.next();
            for (Index b = 0; b < grid.boundary_count(); ++b) {
                sd.traces(b, k) = rd.next();
                require(rd.next() == 0.0, "spectral.csv traces must be real");
            }
        }
        if (meta.contains("eigenvectors_sha256")) {
            const std::string vec = checked("eigenvectors.csv", "eigenvectors_sha256");
            NumberReader vr(vec, "eigenvectors.csv");
            sd.eigenvectors.resize(grid.interior_count(), K);
            for (Index i = 0; i < grid.interior_count(); ++i)
                for (Index k = 0; k < K; ++k) sd.eigenvectors(i, k) = vr.next();
        }
        return sd;
    } catch (const json::exception& e) {
        throw ValidationError("spectral.json is incomplete: " + std::string(e.what()));
    }
}

std::string to_string(CacheStatus s) {
    switch (s) {
    case CacheStatus::Hit: return "hit";
    case CacheStatus::Miss: return "miss";
    case CacheStatus::Recomputed: return "recomputed";
    }
    return "?";
}

SpectralCache::SpectralCache(fs::path root) : root_(std::move(root)) {}

fs::path SpectralCache::default_root() {
    if (const char* d = std::getenv("BORGLEV_CACHE_DIR"); d && *d) return d;
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "borglev";
    if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "borglev";
    return fs::temp_directory_path() / "borglev-cache";
}

std::optional<SpectralData> SpectralCache::load(const std::string& key, bool* corrupt) const {
    if (corrupt) *corrupt = false;
    const fs::path dir = entry(key);
    if (!fs::exists(dir)) return std::nullopt;
    try {
        return load_spectral(dir);
    } catch (const std::exception&) {
        if (corrupt) *corrupt = true;
        return std::nullopt;
    }
}

void SpectralCache::store(const std::string& key, const SpectralData& sd) const {
    const fs::path dir = entry(key);
    const fs::path tmp = root_ / (key + ".tmp");
    fs::remove_all(tmp);
    save_spectral(sd, tmp);
    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

} // namespace borglev
